//! LP front end: presolve (fixed-variable substitution, single-variable
//! rows folded into bounds, redundant-row elimination), equilibration
//! scaling, and conversion to the equality form the simplex consumes.

use super::simplex::{solve_standard, SimplexOutcome, StandardLp, FEAS_TOL};
use super::{LpSolution, LpStatus};
use crate::milp::{MilpProblem, Sense};
use crate::CaError;

/// Bounded-variable LP with sense rows; the objective is maximized.
#[derive(Debug, Clone)]
pub(crate) struct LinProg {
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub obj: Vec<f64>,
    pub rows: Vec<(Vec<(usize, f64)>, Sense, f64)>,
}

impl LinProg {
    pub fn from_relaxation(p: &MilpProblem) -> Self {
        LinProg {
            lb: p.variables.iter().map(|v| v.lb).collect(),
            ub: p.variables.iter().map(|v| v.ub).collect(),
            obj: {
                let mut c = vec![0.0; p.variables.len()];
                for &(j, w) in &p.objective {
                    c[j] += w;
                }
                c
            },
            rows: p
                .constraints
                .iter()
                .map(|r| (r.terms.clone(), r.sense, r.rhs))
                .collect(),
        }
    }
}

/// Solve the LP relaxation of a model. Integrality markers are ignored.
pub fn solve_lp(p: &MilpProblem) -> Result<LpSolution, CaError> {
    solve_linprog(&LinProg::from_relaxation(p))
}

fn is_fixed(lb: f64, ub: f64) -> bool {
    ub - lb <= 1e-11
}

pub(crate) fn solve_linprog(lp: &LinProg) -> Result<LpSolution, CaError> {
    let n = lp.lb.len();
    let mut lb = lp.lb.clone();
    let mut ub = lp.ub.clone();
    let mut live: Vec<bool> = vec![true; lp.rows.len()];

    let infeasible = Ok(LpSolution {
        status: LpStatus::Infeasible,
        objective: f64::NEG_INFINITY,
        x: Vec::new(),
    });

    // presolve to a fixpoint: substitute fixed variables, fold
    // single-variable rows into bounds, drop vacuous rows
    loop {
        let mut changed = false;
        for (ri, (terms, sense, rhs)) in lp.rows.iter().enumerate() {
            if !live[ri] {
                continue;
            }
            let mut constant = 0.0;
            let mut active: Vec<(usize, f64)> = Vec::new();
            for &(j, w) in terms {
                if w == 0.0 {
                    continue;
                }
                if is_fixed(lb[j], ub[j]) {
                    constant += w * lb[j];
                } else {
                    active.push((j, w));
                }
            }
            let resid = rhs - constant;
            let scale = terms.iter().fold(rhs.abs(), |a, &(_, w)| a.max(w.abs()));
            let tol = FEAS_TOL * scale.max(1.0);
            match active.len() {
                0 => {
                    let ok = match sense {
                        Sense::Le => resid >= -tol,
                        Sense::Eq => resid.abs() <= tol,
                        Sense::Ge => resid <= tol,
                    };
                    if !ok {
                        return infeasible;
                    }
                    live[ri] = false;
                    changed = true;
                }
                1 => {
                    let (j, w) = active[0];
                    let bound = resid / w;
                    let (tighten_ub, tighten_lb) = match (sense, w > 0.0) {
                        (Sense::Le, true) | (Sense::Ge, false) => (true, false),
                        (Sense::Le, false) | (Sense::Ge, true) => (false, true),
                        (Sense::Eq, _) => (true, true),
                    };
                    if tighten_ub && bound < ub[j] {
                        ub[j] = bound;
                        changed = true;
                    }
                    if tighten_lb && bound > lb[j] {
                        lb[j] = bound;
                        changed = true;
                    }
                    if lb[j] > ub[j] + FEAS_TOL * lb[j].abs().max(1.0) {
                        return infeasible;
                    }
                    live[ri] = false;
                }
                _ => {
                    // interval arithmetic: drop rows no bound assignment can violate
                    if *sense != Sense::Eq {
                        let mut lo = constant;
                        let mut hi = constant;
                        for &(j, w) in &active {
                            if w > 0.0 {
                                lo += w * lb[j];
                                hi += w * ub[j];
                            } else {
                                lo += w * ub[j];
                                hi += w * lb[j];
                            }
                        }
                        let redundant = match sense {
                            Sense::Le => hi <= rhs + tol,
                            Sense::Ge => lo >= rhs - tol,
                            Sense::Eq => false,
                        };
                        if redundant {
                            live[ri] = false;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    for j in 0..n {
        if lb[j] > ub[j] + FEAS_TOL * lb[j].abs().max(1.0) {
            return infeasible;
        }
    }

    // compact live variables
    let keep: Vec<usize> = (0..n).filter(|&j| !is_fixed(lb[j], ub[j])).collect();
    let mut new_index = vec![usize::MAX; n];
    for (k, &j) in keep.iter().enumerate() {
        new_index[j] = k;
    }
    let nk = keep.len();

    // assemble scaled equality form
    let mut rows: Vec<(Vec<(usize, f64)>, Sense, f64)> = Vec::new();
    for (ri, (terms, sense, rhs)) in lp.rows.iter().enumerate() {
        if !live[ri] {
            continue;
        }
        let mut constant = 0.0;
        let mut active: Vec<(usize, f64)> = Vec::new();
        for &(j, w) in terms {
            if w == 0.0 {
                continue;
            }
            if is_fixed(lb[j], ub[j]) {
                constant += w * lb[j];
            } else {
                active.push((new_index[j], w));
            }
        }
        rows.push((active, *sense, rhs - constant));
    }

    let m = rows.len();
    // row equilibration, rhs included
    let mut row_scale = vec![1.0; m];
    for (i, (terms, _, rhs)) in rows.iter().enumerate() {
        let mx = terms
            .iter()
            .fold(rhs.abs(), |a, &(_, w)| a.max(w.abs()));
        if mx > 0.0 {
            row_scale[i] = 1.0 / mx;
        }
    }
    // column equilibration on the row-scaled matrix
    let mut col_scale = vec![0.0f64; nk];
    for (i, (terms, _, _)) in rows.iter().enumerate() {
        for &(j, w) in terms {
            col_scale[j] = col_scale[j].max((w * row_scale[i]).abs());
        }
    }
    for cs in col_scale.iter_mut() {
        if *cs <= 0.0 {
            *cs = 1.0;
        }
    }

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nk + m];
    let mut rhs_v = vec![0.0; m];
    let mut slb = vec![0.0; nk + m];
    let mut sub = vec![0.0; nk + m];
    for (k, &j) in keep.iter().enumerate() {
        slb[k] = lb[j] * col_scale[k];
        sub[k] = ub[j] * col_scale[k];
    }
    for (i, (terms, sense, rhs)) in rows.iter().enumerate() {
        for &(j, w) in terms {
            cols[j].push((i, w * row_scale[i] / col_scale[j]));
        }
        rhs_v[i] = rhs * row_scale[i];
        let slack = nk + i;
        cols[slack].push((i, 1.0));
        let (l, u) = match sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Eq => (0.0, 0.0),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
        };
        slb[slack] = l;
        sub[slack] = u;
    }

    // scaled, normalized, negated objective (simplex minimizes)
    let mut obj = vec![0.0; nk + m];
    for (k, &j) in keep.iter().enumerate() {
        obj[k] = -lp.obj[j] / col_scale[k];
    }
    let obj_norm = obj.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if obj_norm > 0.0 {
        for v in obj.iter_mut() {
            *v /= obj_norm;
        }
    }

    let std = StandardLp {
        num_rows: m,
        num_vars: nk + m,
        cols,
        lb: slb,
        ub: sub,
        rhs: rhs_v,
        obj,
    };

    match solve_standard(&std) {
        SimplexOutcome::Optimal { x: xs, .. } => {
            let mut x = vec![0.0; n];
            for j in 0..n {
                if is_fixed(lb[j], ub[j]) {
                    x[j] = lb[j];
                }
            }
            for (k, &j) in keep.iter().enumerate() {
                x[j] = xs[k] / col_scale[k];
            }
            let objective = lp.obj.iter().zip(&x).map(|(c, v)| c * v).sum();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                objective,
                x,
            })
        }
        SimplexOutcome::Infeasible => infeasible,
        SimplexOutcome::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective: f64::INFINITY,
            x: Vec::new(),
        }),
        SimplexOutcome::Numerical(e) => Err(CaError::Numerical(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presolve_handles_fully_fixed_problem() {
        let lp = LinProg {
            lb: vec![2.0, 3.0],
            ub: vec![2.0, 3.0],
            obj: vec![1.0, 1.0],
            rows: vec![(vec![(0, 1.0), (1, 1.0)], Sense::Le, 6.0)],
        };
        let sol = solve_linprog(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 5.0).abs() < 1e-9);
        assert_eq!(sol.x, vec![2.0, 3.0]);
    }

    #[test]
    fn presolve_detects_fixed_infeasibility() {
        let lp = LinProg {
            lb: vec![2.0],
            ub: vec![2.0],
            obj: vec![0.0],
            rows: vec![(vec![(0, 1.0)], Sense::Le, 1.0)],
        };
        let sol = solve_linprog(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn badly_scaled_problem_solves_cleanly() {
        // max psi st s = 1e8 * l, s >= psi * 5e7, s <= 5e7, l in [0,1], psi in [0,1]
        let lp = LinProg {
            lb: vec![0.0, 0.0, 0.0],
            ub: vec![1.0, f64::INFINITY, 1.0],
            obj: vec![0.0, 0.0, 1.0],
            rows: vec![
                (vec![(1, 1.0), (0, -1e8)], Sense::Eq, 0.0),
                (vec![(1, 1.0), (2, -5e7)], Sense::Ge, 0.0),
                (vec![(1, 1.0)], Sense::Le, 5e7),
            ],
        };
        let sol = solve_linprog(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-7);
        assert!((sol.x[0] - 0.5).abs() < 1e-7, "l = {}", sol.x[0]);
        assert!((sol.x[1] - 5e7).abs() < 1.0, "s = {}", sol.x[1]);
    }
}
