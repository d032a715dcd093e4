//! Plain-text LP export of a [`MilpProblem`] for cross-checking against
//! external solvers.

use crate::milp::{MilpProblem, Sense};
use std::fmt::Write;

fn push_terms(out: &mut String, p: &MilpProblem, terms: &[(usize, f64)]) {
    let mut first = true;
    for &(idx, w) in terms {
        if w == 0.0 {
            continue;
        }
        let name = p.layout.name(idx);
        if first {
            if w < 0.0 {
                let _ = write!(out, "- ");
            }
            first = false;
        } else if w < 0.0 {
            let _ = write!(out, " - ");
        } else {
            let _ = write!(out, " + ");
        }
        let mag = w.abs();
        if mag == 1.0 {
            let _ = write!(out, "{name}");
        } else {
            let _ = write!(out, "{mag} {name}");
        }
    }
    if first {
        let _ = write!(out, "0");
    }
}

/// Render the model in LP format with `Maximize`, `Subject To`, `Bounds` and
/// `Binary` sections. Variables are named `a_c_u`, `f_c_u`, `l_c_u`, `s_u`
/// and `psi`.
pub fn write_lp(p: &MilpProblem) -> String {
    let mut out = String::new();
    out.push_str("Maximize\n obj: ");
    push_terms(&mut out, p, &p.objective);
    out.push_str("\nSubject To\n");
    for (i, row) in p.constraints.iter().enumerate() {
        let _ = write!(out, " c{i}: ");
        push_terms(&mut out, p, &row.terms);
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for (idx, v) in p.variables.iter().enumerate() {
        let name = p.layout.name(idx);
        if v.ub.is_infinite() {
            let _ = writeln!(out, " {} <= {name}", v.lb);
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", v.lb, v.ub);
        }
    }
    let binaries: Vec<String> = p
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.binary)
        .map(|(idx, _)| p.layout.name(idx))
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for name in binaries {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::build_milp;
    use crate::model::Matrix;

    #[test]
    fn lp_text_has_expected_sections_and_names() {
        let s = crate::test_fixtures::scenario_with(2, 2);
        let r = Matrix::from_rows(vec![vec![100e6, 80e6], vec![90e6, 70e6]]).unwrap();
        let p = build_milp(&s, &r).unwrap();
        let text = write_lp(&p);
        assert!(text.starts_with("Maximize\n obj: psi\n"));
        for section in ["Subject To", "Bounds", "Binary", "End"] {
            assert!(text.contains(section), "missing {section}");
        }
        for name in ["a_0_0", "f_1_1", "l_0_1", "s_1", "psi"] {
            assert!(text.contains(name), "missing variable {name}");
        }
        // C1 for user 0 carries the rates as coefficients
        assert!(text.contains("s_0 - 100000000 l_0_0 - 90000000 l_1_0 = 0"));
    }
}
