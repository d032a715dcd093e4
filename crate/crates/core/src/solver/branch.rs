//! Best-first branch and bound over association variables.
//!
//! Models produced by `build_milp` are solved through the reduced node
//! relaxation in [`super::family`]; anything outside that family falls back
//! to a plain relaxation that branches on binary variables directly. Node
//! order, branching choice and tie-breaking are all deterministic, so two
//! runs on the same model produce bit-identical solutions.

use super::family::{self, NodeLp, PairModel};
use super::lp::{solve_linprog, LinProg};
use super::{LpStatus, MilpSolution, MilpStatus};
use crate::milp::MilpProblem;
use crate::CaError;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::time::{Duration, Instant};

/// A binary is treated as integral when within this distance of 0/1.
const INT_TOL: f64 = 1e-6;
/// Product values above this mark a pair as actively used.
const SUPPORT_TOL: f64 = 1e-9;
/// Tolerance for accepting an incumbent against the full row set.
const CHECK_TOL: f64 = 1e-7;

/// Termination controls for [`branch_and_bound`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Accept an incumbent once `(bound - objective) / max(|bound|, 1)`
    /// drops to this value.
    pub mip_gap: f64,
    /// Wall-clock budget in seconds.
    pub time_limit_s: f64,
    /// Optional feasible point in the full variable space; its association
    /// pattern seeds the first incumbent.
    pub warm_start: Option<Vec<f64>>,
    /// Stop with the best incumbent after this many relaxations, regardless
    /// of the clock; unlike the time limit this cut-off is deterministic.
    pub max_nodes: Option<u64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mip_gap: 1e-6,
            time_limit_s: 60.0,
            warm_start: None,
            max_nodes: None,
        }
    }
}

struct OpenNode {
    bound: f64,
    id: u64,
    depth: usize,
    fixings: BTreeMap<usize, bool>,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for OpenNode {}
impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenNode {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap: higher bound first; ties pop the most recently created
        // node, so plateaus of equal bounds are explored depth-first and
        // integral incumbents appear early
        self.bound
            .partial_cmp(&other.bound)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.id.cmp(&other.id))
    }
}

fn gap_of(bound: f64, objective: f64) -> f64 {
    if !bound.is_finite() || !objective.is_finite() {
        return f64::INFINITY;
    }
    ((bound - objective) / bound.abs().max(1.0)).max(0.0)
}

fn gap_closed(bound: f64, objective: f64, mip_gap: f64) -> bool {
    // an infinite bound (unprocessed root) never closes, even though
    // IEEE would accept `inf <= obj + gap * inf`
    bound.is_finite()
        && objective.is_finite()
        && bound <= objective + mip_gap * bound.abs().max(1.0)
}

/// Solve a mixed-integer model to proven optimality within the scenario's
/// gap, or return the best incumbent at the time limit.
pub fn branch_and_bound(
    p: &MilpProblem,
    params: &crate::model::SolverParams,
) -> Result<MilpSolution, CaError> {
    branch_and_bound_with(
        p,
        &SolveOptions {
            mip_gap: params.mip_gap,
            time_limit_s: params.time_limit_s,
            warm_start: None,
            max_nodes: None,
        },
    )
}

/// [`branch_and_bound`] with explicit termination controls and an optional
/// warm start.
pub fn branch_and_bound_with(
    p: &MilpProblem,
    opts: &SolveOptions,
) -> Result<MilpSolution, CaError> {
    let deadline = Instant::now() + Duration::from_secs_f64(opts.time_limit_s.max(0.0));
    match PairModel::extract(p) {
        Ok(pm) => solve_family(p, &pm, opts, deadline),
        Err(_) => solve_generic(p, opts, deadline),
    }
}

fn relax_assoc_value(nl: &NodeLp, x: &[f64], pair: usize) -> f64 {
    match nl.assoc_var[pair] {
        Some(av) => x[av],
        None => x[nl.lambda_var[pair].expect("free pair has a lambda variable")],
    }
}

fn recover_assoc(
    pm: &PairModel,
    fixings: &BTreeMap<usize, bool>,
    nl: &NodeLp,
    x: &[f64],
) -> Vec<f64> {
    (0..pm.num_pairs())
        .map(|pair| match pm.fix_of(pair, fixings) {
            Some(true) => 1.0,
            Some(false) => 0.0,
            None => {
                let lam = x[nl.lambda_var[pair].expect("free pair has a lambda variable")];
                if lam > SUPPORT_TOL {
                    1.0
                } else if let Some(av) = nl.assoc_var[pair] {
                    // keeping an unused previous association is free on the
                    // swap budget; follow the relaxation's preference
                    if x[av] > 0.5 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    0.0
                }
            }
        })
        .collect()
}

/// Round the node relaxation to a full association pattern: per user, keep
/// the largest products up to the carrier limit, then repair the swap
/// budget. Re-solving the fill rates for the rounded pattern gives a
/// candidate incumbent.
fn rounding_heuristic(
    p: &MilpProblem,
    pm: &PairModel,
    fixings: &BTreeMap<usize, bool>,
    nl: &NodeLp,
    x: &[f64],
    nodes: &mut u64,
) -> Result<Option<(f64, Vec<f64>)>, CaError> {
    let np = pm.num_pairs();
    let nc = pm.num_carriers;
    let nu = pm.num_users;
    let mut assoc = vec![0.0; np];
    let mut full_fix: BTreeMap<usize, bool> = BTreeMap::new();
    for pair in 0..np {
        if let Some(b) = pm.fix_of(pair, fixings) {
            assoc[pair] = if b { 1.0 } else { 0.0 };
            if pm.base_fix[pair].is_none() {
                full_fix.insert(pair, b);
            }
        }
    }
    for u in 0..nu {
        let fixed1 = (0..nc)
            .filter(|&c| pm.fix_of(c * nu + u, fixings) == Some(true))
            .count();
        let mut cap = if pm.maxc[u].is_finite() {
            (pm.maxc[u] - fixed1 as f64).max(0.0).round() as usize
        } else {
            nc
        };
        let mut free: Vec<(usize, f64)> = (0..nc)
            .filter_map(|c| {
                let pair = c * nu + u;
                match pm.fix_of(pair, fixings) {
                    None => Some((
                        pair,
                        x[nl.lambda_var[pair].expect("free pair has a lambda variable")],
                    )),
                    Some(_) => None,
                }
            })
            .collect();
        free.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        for (pair, lam) in free {
            let take = cap > 0 && lam > SUPPORT_TOL;
            assoc[pair] = if take { 1.0 } else { 0.0 };
            full_fix.insert(pair, take);
            if take {
                cap -= 1;
            }
        }
    }

    if let Some(rhs) = pm.swap_rhs {
        let mut lhs: f64 = (0..np).map(|pr| pm.prev_coeff[pr] * assoc[pr]).sum();
        while lhs > rhs + 1e-9 {
            // cheapest repair: re-enable a kept-from-before pair whose user
            // still has association capacity, preferring the one the
            // relaxation valued most
            let enable = (0..np)
                .filter(|&pr| {
                    pm.prev_coeff[pr] < 0.0
                        && assoc[pr] == 0.0
                        && pm.fix_of(pr, fixings).is_none()
                        && {
                            let u = pr % nu;
                            let used: f64 = (0..nc).map(|c| assoc[c * nu + u]).sum();
                            used + 1.0 <= pm.maxc[u] + 1e-9
                        }
                })
                .max_by(|&a, &b| {
                    let la = x[nl.lambda_var[a].expect("live pair")];
                    let lb = x[nl.lambda_var[b].expect("live pair")];
                    la.partial_cmp(&lb)
                        .unwrap_or(Ordering::Equal)
                        .then_with(|| b.cmp(&a))
                });
            if let Some(pr) = enable {
                assoc[pr] = 1.0;
                full_fix.insert(pr, true);
                lhs -= 1.0;
                continue;
            }
            // otherwise drop the weakest newly added association
            let drop = (0..np)
                .filter(|&pr| {
                    pm.prev_coeff[pr] > 0.0 && assoc[pr] == 1.0 && pm.fix_of(pr, fixings).is_none()
                })
                .min_by(|&a, &b| {
                    let la = x[nl.lambda_var[a].expect("live pair")];
                    let lb = x[nl.lambda_var[b].expect("live pair")];
                    la.partial_cmp(&lb)
                        .unwrap_or(Ordering::Equal)
                        .then_with(|| a.cmp(&b))
                });
            match drop {
                Some(pr) => {
                    assoc[pr] = 0.0;
                    full_fix.insert(pr, false);
                    lhs -= 1.0;
                }
                None => return Ok(None),
            }
        }
    }

    let nl2 = family::build_node_lp(p, pm, &full_fix);
    *nodes += 1;
    let sol = solve_linprog(&nl2.lin)?;
    if sol.status != LpStatus::Optimal {
        return Ok(None);
    }
    let cand = family::lift_solution(p, &nl2, &sol.x, &assoc);
    if family::is_feasible(p, &cand, CHECK_TOL) {
        Ok(Some((family::objective_value(p, &cand), cand)))
    } else {
        Ok(None)
    }
}

/// LP-guided dive: repeatedly fix associations the relaxation is confident
/// about and re-solve, until the pattern is integral. The node LP carries
/// the swap-budget and carrier-limit rows, so dives land on feasible
/// patterns far more often than single-shot rounding.
fn dive_heuristic(
    p: &MilpProblem,
    pm: &PairModel,
    fixings: &BTreeMap<usize, bool>,
    nodes: &mut u64,
    deadline: Instant,
) -> Result<Option<(f64, Vec<f64>)>, CaError> {
    let np = pm.num_pairs();
    let mut fix = fixings.clone();
    for _ in 0..(np + 1) {
        if Instant::now() >= deadline {
            return Ok(None);
        }
        let nl = family::build_node_lp(p, pm, &fix);
        *nodes += 1;
        let sol = solve_linprog(&nl.lin)?;
        if sol.status != LpStatus::Optimal {
            return Ok(None);
        }
        let mut most_fractional: Option<(usize, f64)> = None;
        let mut fixed_any = false;
        for pair in 0..np {
            if pm.fix_of(pair, &fix).is_some() {
                continue;
            }
            let v = relax_assoc_value(&nl, &sol.x, pair);
            let frac = v.min(1.0 - v);
            if frac <= 0.05 {
                fix.insert(pair, v >= 0.5);
                fixed_any = true;
            } else if most_fractional.map_or(true, |(_, f)| frac < f) {
                most_fractional = Some((pair, v));
            }
        }
        match most_fractional {
            None => {
                // fully integral: evaluate the dived pattern
                let assoc = recover_assoc(pm, &fix, &nl, &sol.x);
                let cand = family::lift_solution(p, &nl, &sol.x, &assoc);
                if family::is_feasible(p, &cand, CHECK_TOL) {
                    return Ok(Some((family::objective_value(p, &cand), cand)));
                }
                return Ok(None);
            }
            Some((pair, v)) => {
                if !fixed_any {
                    fix.insert(pair, v >= 0.5);
                }
            }
        }
    }
    Ok(None)
}

fn solve_family(
    p: &MilpProblem,
    pm: &PairModel,
    opts: &SolveOptions,
    deadline: Instant,
) -> Result<MilpSolution, CaError> {
    let np = pm.num_pairs();
    let nc = pm.num_carriers;
    let nu = pm.num_users;
    let mut nodes = 0u64;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;

    if let Some(w) = &opts.warm_start {
        if w.len() == p.variables.len() {
            // re-optimize the continuous variables for the warm pattern
            let mut fixings = BTreeMap::new();
            let mut assoc = vec![0.0; np];
            for c in 0..nc {
                for u in 0..nu {
                    let pair = c * nu + u;
                    match pm.base_fix[pair] {
                        Some(b) => assoc[pair] = if b { 1.0 } else { 0.0 },
                        None => {
                            let v = w[p.layout.association(c, u)] > 0.5;
                            assoc[pair] = if v { 1.0 } else { 0.0 };
                            fixings.insert(pair, v);
                        }
                    }
                }
            }
            let nl = family::build_node_lp(p, pm, &fixings);
            nodes += 1;
            let sol = solve_linprog(&nl.lin)?;
            if sol.status == LpStatus::Optimal {
                let cand = family::lift_solution(p, &nl, &sol.x, &assoc);
                if family::is_feasible(p, &cand, CHECK_TOL) {
                    incumbent = Some((family::objective_value(p, &cand), cand));
                }
            }
            if incumbent.is_none() && family::is_feasible(p, w, CHECK_TOL) {
                incumbent = Some((family::objective_value(p, w), w.clone()));
            }
        }
    }

    let mut heap: BinaryHeap<OpenNode> = BinaryHeap::new();
    heap.push(OpenNode {
        bound: f64::INFINITY,
        id: 0,
        depth: 0,
        fixings: BTreeMap::new(),
    });
    let mut next_id = 1u64;
    let mut closing_bound: Option<f64> = None;

    while let Some(node) = heap.pop() {
        let z = incumbent.as_ref().map(|i| i.0).unwrap_or(f64::NEG_INFINITY);
        if gap_closed(node.bound, z, opts.mip_gap) {
            closing_bound = Some(node.bound.max(z));
            break;
        }
        if opts.max_nodes.is_some_and(|m| nodes >= m) {
            let bound = node.bound.max(z);
            return Ok(match incumbent {
                Some((obj, x)) => MilpSolution {
                    status: MilpStatus::Feasible,
                    gap: gap_of(bound, obj),
                    objective: obj,
                    bound,
                    x,
                    nodes,
                },
                None => MilpSolution {
                    status: MilpStatus::TimeLimit,
                    gap: f64::INFINITY,
                    objective: f64::NEG_INFINITY,
                    bound,
                    x: Vec::new(),
                    nodes,
                },
            });
        }
        if Instant::now() >= deadline {
            let bound = node.bound.max(z);
            return Ok(match incumbent {
                Some((obj, x)) => MilpSolution {
                    status: MilpStatus::TimeLimit,
                    gap: gap_of(bound, obj),
                    objective: obj,
                    bound,
                    x,
                    nodes,
                },
                None => MilpSolution {
                    status: MilpStatus::TimeLimit,
                    gap: f64::INFINITY,
                    objective: f64::NEG_INFINITY,
                    bound,
                    x: Vec::new(),
                    nodes,
                },
            });
        }

        let nl = family::build_node_lp(p, pm, &node.fixings);
        nodes += 1;
        let sol = solve_linprog(&nl.lin)?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(CaError::Unbounded),
            LpStatus::Optimal => {}
        }
        let bound = sol.objective.min(node.bound);
        if gap_closed(bound, z, opts.mip_gap) {
            continue;
        }

        let assoc = recover_assoc(pm, &node.fixings, &nl, &sol.x);
        let cand = family::lift_solution(p, &nl, &sol.x, &assoc);
        if family::is_feasible(p, &cand, CHECK_TOL) {
            let obj = family::objective_value(p, &cand);
            if obj > incumbent.as_ref().map(|i| i.0).unwrap_or(f64::NEG_INFINITY) {
                incumbent = Some((obj, cand));
            }
            if obj >= bound - 1e-9 * bound.abs().max(1.0) {
                continue; // the relaxation value is attained; node is done
            }
        } else {
            if incumbent.is_none() || node.depth % 4 == 0 {
                if let Some((obj, hx)) =
                    rounding_heuristic(p, pm, &node.fixings, &nl, &sol.x, &mut nodes)?
                {
                    if obj > incumbent.as_ref().map(|i| i.0).unwrap_or(f64::NEG_INFINITY) {
                        incumbent = Some((obj, hx));
                    }
                }
            }
            if incumbent.is_none() || (node.depth == 0 && nodes < 4) {
                if let Some((obj, hx)) =
                    dive_heuristic(p, pm, &node.fixings, &mut nodes, deadline)?
                {
                    if obj > incumbent.as_ref().map(|i| i.0).unwrap_or(f64::NEG_INFINITY) {
                        incumbent = Some((obj, hx));
                    }
                }
            }
        }

        let mut branch_pair = None;
        let mut best_score = INT_TOL;
        let mut first_free = None;
        for pair in 0..np {
            if pm.fix_of(pair, &node.fixings).is_some() {
                continue;
            }
            if first_free.is_none() {
                first_free = Some(pair);
            }
            let v = relax_assoc_value(&nl, &sol.x, pair);
            let score = v.min(1.0 - v);
            if score > best_score {
                best_score = score;
                branch_pair = Some(pair);
            }
        }
        let pair = match branch_pair.or(first_free) {
            Some(pr) => pr,
            None => {
                return Err(CaError::Numerical(
                    "fully fixed node failed the feasibility check".into(),
                ))
            }
        };
        // push the child matching the relaxation's leaning last so the
        // tie-breaking dive follows the LP's suggestion
        let lean = relax_assoc_value(&nl, &sol.x, pair) >= 0.5;
        for val in [!lean, lean] {
            let mut f2 = node.fixings.clone();
            f2.insert(pair, val);
            heap.push(OpenNode {
                bound,
                id: next_id,
                depth: node.depth + 1,
                fixings: f2,
            });
            next_id += 1;
        }
    }

    match incumbent {
        Some((obj, x)) => {
            let bound = closing_bound.unwrap_or(obj);
            Ok(MilpSolution {
                status: MilpStatus::Optimal,
                gap: gap_of(bound, obj),
                objective: obj,
                bound,
                x,
                nodes,
            })
        }
        None => Ok(MilpSolution {
            status: MilpStatus::Infeasible,
            gap: 0.0,
            objective: f64::NEG_INFINITY,
            bound: f64::NEG_INFINITY,
            x: Vec::new(),
            nodes,
        }),
    }
}

/// Plain branch and bound on binary variables for models outside the
/// carrier-aggregation family.
fn solve_generic(
    p: &MilpProblem,
    opts: &SolveOptions,
    deadline: Instant,
) -> Result<MilpSolution, CaError> {
    let base = LinProg::from_relaxation(p);
    let binaries: Vec<usize> = p
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.binary)
        .map(|(j, _)| j)
        .collect();

    let mut nodes = 0u64;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    if let Some(w) = &opts.warm_start {
        if w.len() == p.variables.len() && family::is_feasible(p, w, CHECK_TOL) {
            incumbent = Some((family::objective_value(p, w), w.clone()));
        }
    }

    struct GenNode {
        bound: f64,
        id: u64,
        fix: BTreeMap<usize, f64>,
    }
    let mut heap: Vec<GenNode> = vec![GenNode {
        bound: f64::INFINITY,
        id: 0,
        fix: BTreeMap::new(),
    }];
    let mut next_id = 1u64;
    let mut closing_bound: Option<f64> = None;

    while !heap.is_empty() {
        // best-first: highest bound, then lowest id
        let mut best = 0;
        for (i, n) in heap.iter().enumerate() {
            let b = &heap[best];
            if n.bound > b.bound || (n.bound == b.bound && n.id < b.id) {
                best = i;
            }
        }
        let node = heap.swap_remove(best);
        let z = incumbent.as_ref().map(|i| i.0).unwrap_or(f64::NEG_INFINITY);
        if gap_closed(node.bound, z, opts.mip_gap) {
            closing_bound = Some(node.bound.max(z));
            break;
        }
        if opts.max_nodes.is_some_and(|m| nodes >= m) {
            let bound = node.bound.max(z);
            return Ok(match incumbent {
                Some((obj, x)) => MilpSolution {
                    status: MilpStatus::Feasible,
                    gap: gap_of(bound, obj),
                    objective: obj,
                    bound,
                    x,
                    nodes,
                },
                None => MilpSolution {
                    status: MilpStatus::TimeLimit,
                    gap: f64::INFINITY,
                    objective: f64::NEG_INFINITY,
                    bound,
                    x: Vec::new(),
                    nodes,
                },
            });
        }
        if Instant::now() >= deadline {
            let bound = node.bound.max(z);
            return Ok(match incumbent {
                Some((obj, x)) => MilpSolution {
                    status: MilpStatus::TimeLimit,
                    gap: gap_of(bound, obj),
                    objective: obj,
                    bound,
                    x,
                    nodes,
                },
                None => MilpSolution {
                    status: MilpStatus::TimeLimit,
                    gap: f64::INFINITY,
                    objective: f64::NEG_INFINITY,
                    bound,
                    x: Vec::new(),
                    nodes,
                },
            });
        }

        let mut lp = base.clone();
        for (&j, &v) in &node.fix {
            lp.lb[j] = v;
            lp.ub[j] = v;
        }
        nodes += 1;
        let sol = solve_linprog(&lp)?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(CaError::Unbounded),
            LpStatus::Optimal => {}
        }
        let bound = sol.objective.min(node.bound);
        if gap_closed(bound, z, opts.mip_gap) {
            continue;
        }

        let mut integral = true;
        let mut branch_var = None;
        let mut best_score = 0.0;
        for &j in &binaries {
            let v = sol.x[j];
            let score = (v - v.round()).abs();
            if score > INT_TOL {
                integral = false;
            }
            if !node.fix.contains_key(&j) && score > best_score {
                best_score = score;
                branch_var = Some(j);
            }
        }
        if integral {
            let mut cand = sol.x.clone();
            for &j in &binaries {
                cand[j] = cand[j].round();
            }
            if family::is_feasible(p, &cand, CHECK_TOL) {
                let obj = family::objective_value(p, &cand);
                if obj > z {
                    incumbent = Some((obj, cand));
                }
                if obj >= bound - 1e-9 * bound.abs().max(1.0) {
                    continue;
                }
            }
        }
        // branch on the most fractional unfixed binary; fall back to the
        // first unfixed one when rounding was rejected on an integral node
        let fallback = binaries.iter().copied().find(|j| !node.fix.contains_key(j));
        let j = match branch_var.or(fallback) {
            Some(j) => j,
            None => {
                return Err(CaError::Numerical(
                    "fully fixed node failed the feasibility check".into(),
                ))
            }
        };
        for val in [0.0, 1.0] {
            let mut f2 = node.fix.clone();
            f2.insert(j, val);
            heap.push(GenNode {
                bound,
                id: next_id,
                fix: f2,
            });
            next_id += 1;
        }
    }

    match incumbent {
        Some((obj, x)) => {
            let bound = closing_bound.unwrap_or(obj);
            Ok(MilpSolution {
                status: MilpStatus::Optimal,
                gap: gap_of(bound, obj),
                objective: obj,
                bound,
                x,
                nodes,
            })
        }
        None => Ok(MilpSolution {
            status: MilpStatus::Infeasible,
            gap: 0.0,
            objective: f64::NEG_INFINITY,
            bound: f64::NEG_INFINITY,
            x: Vec::new(),
            nodes,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{build_milp, Constraint, RowKind, Sense};
    use crate::model::{Matrix, Sla, SwapBudget};
    use crate::test_fixtures::scenario_with;

    #[test]
    fn two_standard_users_share_one_carrier() {
        // one carrier at 100 Mbit/s, two single-carrier users demanding 60
        // each: the carrier splits evenly and psi = 50/60
        let mut s = scenario_with(1, 2);
        for u in &mut s.users {
            u.demand_bps = 60e6;
            u.sla = Sla::Standard;
            u.max_carriers = 1;
        }
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6, 100e6]]).unwrap());
        let p = build_milp(&s, s.rate_matrix_override.as_ref().unwrap()).unwrap();
        let sol = branch_and_bound(&p, &s.solver).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert!((sol.objective - 5.0 / 6.0).abs() < 1e-9, "psi = {}", sol.objective);
    }

    #[test]
    fn premium_user_aggregates_two_carriers() {
        let mut s = scenario_with(2, 1);
        s.users[0].demand_bps = 150e6;
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6], vec![100e6]]).unwrap());
        let p = build_milp(&s, s.rate_matrix_override.as_ref().unwrap()).unwrap();
        let sol = branch_and_bound(&p, &s.solver).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9, "psi = {}", sol.objective);
    }

    #[test]
    fn single_user_half_fill_is_exact() {
        // demand 50 on a 100 Mbit/s carrier under no_oversupply: the supply
        // cap pins lambda = f = 0.5 exactly
        let mut s = scenario_with(1, 1);
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6]]).unwrap());
        let p = build_milp(&s, s.rate_matrix_override.as_ref().unwrap()).unwrap();
        let sol = branch_and_bound(&p, &s.solver).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!((sol.x[p.layout.fill(0, 0)] - 0.5).abs() < 1e-9);
        assert!((sol.x[p.layout.product(0, 0)] - 0.5).abs() < 1e-9);
        assert!((sol.x[p.layout.supply(0)] - 50e6).abs() < 1e-3);
    }

    #[test]
    fn overfull_previous_association_with_zero_budget_is_infeasible() {
        // the previous epoch associated three carriers to a user limited to
        // two; with Q = 0 neither keeping nor shrinking the set is allowed
        let mut s = scenario_with(3, 1);
        s.rate_matrix_override =
            Some(Matrix::from_rows(vec![vec![100e6], vec![100e6], vec![100e6]]).unwrap());
        s.prev_association = Some(Matrix::from_rows(vec![vec![1.0], vec![1.0], vec![1.0]]).unwrap());
        s.solver.swap_budget_q = SwapBudget::Limit(0);
        let p = build_milp(&s, s.rate_matrix_override.as_ref().unwrap()).unwrap();
        let sol = branch_and_bound(&p, &s.solver).unwrap();
        assert_eq!(sol.status, MilpStatus::Infeasible);
        let oracle = super::super::oracle::enumerate_oracle(&p).unwrap();
        assert_eq!(oracle.status, MilpStatus::Infeasible);
    }

    #[test]
    fn zero_swap_budget_freezes_the_previous_association() {
        let mut s = scenario_with(2, 2);
        s.rate_matrix_override =
            Some(Matrix::from_rows(vec![vec![100e6, 80e6], vec![70e6, 90e6]]).unwrap());
        let prev = Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        s.prev_association = Some(prev.clone());
        s.solver.swap_budget_q = SwapBudget::Limit(0);
        let p = build_milp(&s, s.rate_matrix_override.as_ref().unwrap()).unwrap();
        let sol = branch_and_bound(&p, &s.solver).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        for c in 0..2 {
            for u in 0..2 {
                assert_eq!(sol.x[p.layout.association(c, u)].round(), prev.get(c, u));
            }
        }
    }

    #[test]
    fn extra_pair_rows_fall_back_to_the_generic_search() {
        // an extra row over an association variable pushes the model outside
        // the reduced-relaxation family; the generic path must still solve it
        let mut s = scenario_with(2, 1);
        s.users[0].demand_bps = 150e6;
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6], vec![100e6]]).unwrap());
        let mut p = build_milp(&s, s.rate_matrix_override.as_ref().unwrap()).unwrap();
        p.constraints.push(Constraint {
            kind: RowKind::Extra,
            terms: vec![
                (p.layout.association(0, 0), 1.0),
                (p.layout.association(1, 0), 1.0),
            ],
            sense: Sense::Le,
            rhs: 1.0,
        });
        let sol = branch_and_bound(&p, &s.solver).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert!(
            (sol.objective - 100.0 / 150.0).abs() < 1e-9,
            "psi = {}",
            sol.objective
        );
    }

    #[test]
    fn warm_start_pattern_seeds_the_incumbent() {
        let mut s = scenario_with(2, 1);
        s.users[0].demand_bps = 150e6;
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6], vec![100e6]]).unwrap());
        let p = build_milp(&s, s.rate_matrix_override.as_ref().unwrap()).unwrap();
        let first = branch_and_bound(&p, &s.solver).unwrap();
        let warm = branch_and_bound_with(
            &p,
            &SolveOptions {
                warm_start: Some(first.x.clone()),
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert_eq!(warm.status, MilpStatus::Optimal);
        assert!((warm.objective - first.objective).abs() < 1e-9);
    }
}
