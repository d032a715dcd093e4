//! Brute-force reference solver: enumerate every admissible association
//! pattern, solve the remaining LP in the fill rates for each, and keep the
//! best. Exponential in the number of free associations, so it refuses
//! anything with more than twenty of them; it exists to validate the branch
//! and bound on small instances, not to be fast.

use super::family::{self, PairModel};
use super::lp::solve_linprog;
use super::{LpStatus, MilpSolution, MilpStatus};
use crate::milp::MilpProblem;
use crate::CaError;
use std::collections::BTreeMap;

/// Refuse to enumerate beyond this many free associations.
const MAX_FREE: usize = 20;

struct Search<'a> {
    p: &'a MilpProblem,
    pm: &'a PairModel,
    free: &'a [usize],
    /// Free previous-association pairs at or after each position, for the
    /// swap-budget prune (each can lower the row's value by at most one).
    prev1_suffix: Vec<usize>,
    assoc: Vec<f64>,
    used: Vec<f64>,
    swap_lhs: f64,
    nodes: u64,
    best: Option<(f64, Vec<f64>)>,
    unbounded: bool,
    numerical: Option<String>,
}

impl Search<'_> {
    fn leaf(&mut self) {
        let mut full_fix: BTreeMap<usize, bool> = BTreeMap::new();
        for &pair in self.free {
            full_fix.insert(pair, self.assoc[pair] > 0.5);
        }
        let nl = family::build_node_lp(self.p, self.pm, &full_fix);
        self.nodes += 1;
        let sol = match solve_linprog(&nl.lin) {
            Ok(s) => s,
            Err(e) => {
                self.numerical = Some(e.to_string());
                return;
            }
        };
        match sol.status {
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => self.unbounded = true,
            LpStatus::Optimal => {
                let cand = family::lift_solution(self.p, &nl, &sol.x, &self.assoc);
                let obj = family::objective_value(self.p, &cand);
                let better = match &self.best {
                    Some((b, _)) => obj > b + 1e-12,
                    None => true,
                };
                if better {
                    self.best = Some((obj, cand));
                }
            }
        }
    }

    fn recurse(&mut self, i: usize) {
        if self.unbounded || self.numerical.is_some() {
            return;
        }
        if i == self.free.len() {
            self.leaf();
            return;
        }
        let pair = self.free[i];
        let u = pair % self.pm.num_users;
        for val in [0.0, 1.0] {
            if val == 1.0 && self.used[u] + 1.0 > self.pm.maxc[u] + 1e-9 {
                continue;
            }
            let delta = self.pm.prev_coeff[pair] * val;
            if let Some(rhs) = self.pm.swap_rhs {
                // remaining pairs can lower the row by at most one each
                let slack_left = self.prev1_suffix[i + 1] as f64;
                if self.swap_lhs + delta - slack_left > rhs + 1e-9 {
                    continue;
                }
            }
            self.assoc[pair] = val;
            self.used[u] += val;
            self.swap_lhs += delta;
            self.recurse(i + 1);
            self.swap_lhs -= delta;
            self.used[u] -= val;
            self.assoc[pair] = 0.0;
        }
    }
}

/// Solve a model exactly by exhaustive enumeration of association patterns.
pub fn enumerate_oracle(p: &MilpProblem) -> Result<MilpSolution, CaError> {
    let pm = PairModel::extract(p).map_err(CaError::OracleRefused)?;
    let np = pm.num_pairs();
    let free: Vec<usize> = (0..np).filter(|&pr| pm.base_fix[pr].is_none()).collect();
    if free.len() > MAX_FREE {
        return Err(CaError::OracleRefused(format!(
            "{} free associations exceed the enumeration cap of {MAX_FREE}",
            free.len()
        )));
    }

    let mut prev1_suffix = vec![0usize; free.len() + 1];
    for i in (0..free.len()).rev() {
        let is_prev1 = pm.prev_coeff[free[i]] < 0.0;
        prev1_suffix[i] = prev1_suffix[i + 1] + usize::from(is_prev1);
    }

    let mut assoc = vec![0.0; np];
    let mut used = vec![0.0; pm.num_users];
    let mut swap_lhs = 0.0;
    for pair in 0..np {
        if pm.base_fix[pair] == Some(true) {
            assoc[pair] = 1.0;
            used[pair % pm.num_users] += 1.0;
            swap_lhs += pm.prev_coeff[pair];
        }
    }

    let mut search = Search {
        p,
        pm: &pm,
        free: &free,
        prev1_suffix,
        assoc,
        used,
        swap_lhs,
        nodes: 0,
        best: None,
        unbounded: false,
        numerical: None,
    };
    search.recurse(0);

    if search.unbounded {
        return Err(CaError::Unbounded);
    }
    if let Some(msg) = search.numerical {
        return Err(CaError::Numerical(msg));
    }
    Ok(match search.best {
        Some((obj, x)) => MilpSolution {
            status: MilpStatus::Optimal,
            gap: 0.0,
            objective: obj,
            bound: obj,
            x,
            nodes: search.nodes,
        },
        None => MilpSolution {
            status: MilpStatus::Infeasible,
            gap: 0.0,
            objective: f64::NEG_INFINITY,
            bound: f64::NEG_INFINITY,
            x: Vec::new(),
            nodes: search.nodes,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::build_milp;
    use crate::model::{Matrix, Sla};
    use crate::test_fixtures::scenario_with;

    #[test]
    fn enumerates_all_patterns_on_a_two_pair_instance() {
        let mut s = scenario_with(2, 1);
        s.users[0].demand_bps = 150e6;
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6], vec![100e6]]).unwrap());
        let p = build_milp(&s, s.rate_matrix_override.as_ref().unwrap()).unwrap();
        let sol = enumerate_oracle(&p).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert_eq!(sol.nodes, 4, "both carriers free: four leaf patterns");
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matches_the_hand_value_on_a_shared_carrier() {
        let mut s = scenario_with(1, 2);
        for u in &mut s.users {
            u.demand_bps = 60e6;
            u.sla = Sla::Standard;
            u.max_carriers = 1;
        }
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6, 100e6]]).unwrap());
        let p = build_milp(&s, s.rate_matrix_override.as_ref().unwrap()).unwrap();
        let sol = enumerate_oracle(&p).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert!((sol.objective - 5.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn refuses_instances_beyond_the_enumeration_cap() {
        let mut s = scenario_with(5, 5);
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6; 5]; 5]).unwrap());
        let p = build_milp(&s, s.rate_matrix_override.as_ref().unwrap()).unwrap();
        match enumerate_oracle(&p) {
            Err(crate::CaError::OracleRefused(_)) => {}
            other => panic!("expected a refusal, got {other:?}"),
        }
    }

    #[test]
    fn zero_rate_pairs_are_pinned_and_not_enumerated() {
        let mut s = scenario_with(2, 1);
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6], vec![0.0]]).unwrap());
        let p = build_milp(&s, s.rate_matrix_override.as_ref().unwrap()).unwrap();
        let sol = enumerate_oracle(&p).unwrap();
        assert_eq!(sol.nodes, 2, "the zero-rate pair is fixed off");
        assert_eq!(sol.x[p.layout.association(1, 0)], 0.0);
    }
}
