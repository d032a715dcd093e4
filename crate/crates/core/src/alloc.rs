//! Allocation engine: end-to-end carrier-aggregation solves, the no-CA
//! proportional baseline, multi-epoch demand evolution under a swap budget,
//! and the unmet/unused capacity metrics.

use crate::milp::{build_milp, Constraint, RowKind, Sense};
use crate::model::{
    swap_distance, validate_scenario, AssociationMatrix, FillRateMatrix, LambdaMatrix, Matrix,
    RateMatrix, Scenario, SwapBudget, SCHEMA_VERSION,
};
use crate::solver::{branch_and_bound_with, MilpStatus, SolveOptions};
use crate::CaError;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Relaxations granted to the supply-maximizing refinement phase.
const PHASE2_NODE_CAP: u64 = 50;

/// Capacity-matching metrics over one demand/supply vector pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Demand the system fails to serve: sum of (d - s)+ in bit/s.
    pub unmet_bps: f64,
    /// Supplied rate exceeding demand: sum of (s - d)+ in bit/s.
    pub unused_bps: f64,
    /// Worst s/d ratio over users with positive demand; +inf if none.
    pub min_ratio: f64,
}

/// Compute unmet/unused capacity and the worst demand-satisfaction ratio.
pub fn compute_metrics(demands: &[f64], supplies: &[f64]) -> Metrics {
    assert_eq!(
        demands.len(),
        supplies.len(),
        "demand and supply vectors must have equal length"
    );
    let mut unmet = 0.0;
    let mut unused = 0.0;
    let mut min_ratio = f64::INFINITY;
    for (&d, &s) in demands.iter().zip(supplies) {
        unmet += (d - s).max(0.0);
        unused += (s - d).max(0.0);
        if d > 0.0 {
            min_ratio = min_ratio.min(s / d);
        }
    }
    Metrics {
        unmet_bps: unmet,
        unused_bps: unused,
        min_ratio,
    }
}

/// Outcome of one allocation: matrices, per-user supply, and metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub schema: u32,
    pub user_ids: Vec<usize>,
    pub demand_bps: Vec<f64>,
    pub supply_bps: Vec<f64>,
    pub association: AssociationMatrix,
    pub fill: FillRateMatrix,
    pub lambda: LambdaMatrix,
    /// Max-min demand-satisfaction slack; for the baseline, the achieved
    /// worst ratio.
    pub psi: f64,
    pub unmet_bps: f64,
    pub unused_bps: f64,
    /// L1 distance to the scenario's previous association, when one exists.
    pub swap_count: Option<usize>,
    /// `optimal`, `feasible`, `time_limit`, or `baseline`.
    pub status: String,
    /// Relative optimality gap on the max-min objective (0 for baseline).
    pub gap: f64,
    /// Relaxations solved to produce this result.
    pub nodes: u64,
    pub warnings: Vec<String>,
}

impl AllocationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("allocation result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// One epoch of a demand-evolution run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub demand_bps: Vec<f64>,
    pub result: AllocationResult,
    /// Associations changed relative to the previous epoch (0 at epoch 0).
    pub swap_count: usize,
}

/// Ordered per-epoch results of [`evolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub schema: u32,
    pub epochs: Vec<EpochRecord>,
    /// Set when a later epoch failed and the trace was truncated.
    pub error: Option<String>,
}

fn effective_rates(s: &Scenario) -> Result<RateMatrix, CaError> {
    match &s.rate_matrix_override {
        Some(r) => {
            if r.shape() != (s.num_carriers(), s.num_users()) {
                return Err(CaError::ShapeMismatch {
                    expected: (s.num_carriers(), s.num_users()),
                    got: r.shape(),
                });
            }
            Ok(r.clone())
        }
        None => Ok(crate::linkbudget::compute_rate_matrix(s)),
    }
}

fn validated(s: &Scenario) -> Result<(), CaError> {
    let violations = validate_scenario(s);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CaError::Validation(violations))
    }
}

fn status_name(status: MilpStatus) -> &'static str {
    match status {
        MilpStatus::Optimal => "optimal",
        MilpStatus::Feasible => "feasible",
        MilpStatus::Infeasible => "infeasible",
        MilpStatus::TimeLimit => "time_limit",
    }
}

fn extract_result(
    s: &Scenario,
    x: &[f64],
    psi: f64,
    status: MilpStatus,
    gap: f64,
    nodes: u64,
) -> AllocationResult {
    let nc = s.num_carriers();
    let nu = s.num_users();
    let layout = crate::milp::VarLayout {
        num_carriers: nc,
        num_users: nu,
    };
    let mut a = Matrix::zeros(nc, nu);
    let mut f = Matrix::zeros(nc, nu);
    let mut l = Matrix::zeros(nc, nu);
    for c in 0..nc {
        for u in 0..nu {
            a.set(c, u, x[layout.association(c, u)].round());
            f.set(c, u, x[layout.fill(c, u)]);
            l.set(c, u, x[layout.product(c, u)]);
        }
    }
    let supply: Vec<f64> = (0..nu).map(|u| x[layout.supply(u)]).collect();
    let demands: Vec<f64> = s.users.iter().map(|u| u.demand_bps).collect();
    let m = compute_metrics(&demands, &supply);
    let swap_count = s
        .prev_association
        .as_ref()
        .map(|prev| swap_distance(prev, &a).expect("shapes validated"));
    AllocationResult {
        schema: SCHEMA_VERSION,
        user_ids: s.users.iter().map(|u| u.id).collect(),
        demand_bps: demands,
        supply_bps: supply,
        association: a,
        fill: f,
        lambda: l,
        psi,
        unmet_bps: m.unmet_bps,
        unused_bps: m.unused_bps,
        swap_count,
        status: status_name(status).to_string(),
        gap,
        nodes,
        warnings: Vec::new(),
    }
}

/// Trivial result for scenarios where no user demands anything: psi is 1 by
/// convention and the previous association (if any) is kept unchanged.
fn zero_demand_result(s: &Scenario) -> AllocationResult {
    let nc = s.num_carriers();
    let nu = s.num_users();
    let a = s
        .prev_association
        .clone()
        .unwrap_or_else(|| Matrix::zeros(nc, nu));
    let swap_count = s.prev_association.as_ref().map(|_| 0);
    AllocationResult {
        schema: SCHEMA_VERSION,
        user_ids: s.users.iter().map(|u| u.id).collect(),
        demand_bps: vec![0.0; nu],
        supply_bps: vec![0.0; nu],
        association: a,
        fill: Matrix::zeros(nc, nu),
        lambda: Matrix::zeros(nc, nu),
        psi: 1.0,
        unmet_bps: 0.0,
        unused_bps: 0.0,
        swap_count,
        status: "optimal".to_string(),
        gap: 0.0,
        nodes: 0,
        warnings: Vec::new(),
    }
}

/// Solve the max-min demand-matching problem for one scenario.
///
/// With `lexicographic_phase2` enabled (and `no_oversupply` on), a second
/// solve maximizes total supply subject to the max-min value found first,
/// warm-started from the first incumbent.
pub fn allocate_ca(s: &Scenario) -> Result<AllocationResult, CaError> {
    allocate_ca_warm(s, None)
}

/// [`allocate_ca`] seeded with a known-good solution in solver variable
/// order; the solver re-optimizes the continuous part for the seeded
/// association pattern and keeps it as the initial incumbent if feasible.
pub fn allocate_ca_warm(
    s: &Scenario,
    warm_start: Option<Vec<f64>>,
) -> Result<AllocationResult, CaError> {
    validated(s)?;
    let rates = effective_rates(s)?;
    if s.users.iter().all(|u| u.demand_bps == 0.0) {
        return Ok(zero_demand_result(s));
    }

    let start = Instant::now();
    let p = build_milp(s, &rates)?;
    let phase1 = branch_and_bound_with(
        &p,
        &SolveOptions {
            mip_gap: s.solver.mip_gap,
            time_limit_s: s.solver.time_limit_s,
            warm_start,
            max_nodes: None,
        },
    )?;
    match phase1.status {
        MilpStatus::Infeasible => return Err(CaError::Infeasible),
        MilpStatus::TimeLimit if phase1.x.is_empty() => return Err(CaError::TimeLimitNoIncumbent),
        _ => {}
    }
    let psi = phase1.objective;

    // second phase: maximize total supply at (near-)fixed psi; only
    // meaningful when supply is capped at demand, otherwise it would just
    // inflate oversupply
    if s.solver.lexicographic_phase2 && s.solver.no_oversupply {
        let mut p2 = p.clone();
        // the phase-1 incumbent attains psi exactly, so pinning the bound at
        // psi keeps it feasible; the LP's own tolerance absorbs round-off
        p2.constraints.push(Constraint {
            terms: vec![(p2.layout.psi(), 1.0)],
            sense: Sense::Ge,
            rhs: psi,
            kind: RowKind::Extra,
        });
        p2.objective = (0..s.num_users())
            .map(|u| (p2.layout.supply(u), 1.0))
            .collect();
        let remaining = (s.solver.time_limit_s - start.elapsed().as_secs_f64()).max(1.0);
        let phase2 = branch_and_bound_with(
            &p2,
            &SolveOptions {
                mip_gap: s.solver.mip_gap,
                time_limit_s: remaining,
                warm_start: Some(phase1.x.clone()),
                // the refinement phase keeps the phase-1 solution feasible
                // throughout, so a deterministic node cap is enough
                max_nodes: Some(PHASE2_NODE_CAP),
            },
        )?;
        if !phase2.x.is_empty() {
            let status = match (phase1.status, phase2.status) {
                (MilpStatus::Optimal, MilpStatus::Optimal) => MilpStatus::Optimal,
                (_, MilpStatus::TimeLimit) | (MilpStatus::TimeLimit, _) => MilpStatus::TimeLimit,
                _ => MilpStatus::Feasible,
            };
            let psi2 = phase2.x[p2.layout.psi()];
            return Ok(extract_result(
                s,
                &phase2.x,
                psi2,
                status,
                phase1.gap,
                phase1.nodes + phase2.nodes,
            ));
        }
    }

    Ok(extract_result(
        s,
        &phase1.x,
        psi,
        phase1.status,
        phase1.gap,
        phase1.nodes,
    ))
}

/// No-aggregation baseline: each user attaches to its single best-rate
/// carrier and every carrier's bandwidth is shared among its attached users
/// in proportion to their demands. Can oversupply by design.
pub fn allocate_baseline_no_ca(s: &Scenario) -> Result<AllocationResult, CaError> {
    validated(s)?;
    let rates = effective_rates(s)?;
    let nc = s.num_carriers();
    let nu = s.num_users();

    let mut warnings = Vec::new();
    let mut attached: Vec<Option<usize>> = vec![None; nu];
    for u in 0..nu {
        let mut best: Option<(usize, f64)> = None;
        for c in 0..nc {
            let r = rates.get(c, u);
            if r > 0.0 && best.map(|(_, br)| r > br).unwrap_or(true) {
                best = Some((c, r));
            }
        }
        match best {
            Some((c, _)) => attached[u] = Some(c),
            None => warnings.push(format!("user {} has no eligible carrier", s.users[u].id)),
        }
    }

    let mut a = Matrix::zeros(nc, nu);
    let mut f = Matrix::zeros(nc, nu);
    let mut l = Matrix::zeros(nc, nu);
    let mut supply = vec![0.0; nu];
    for c in 0..nc {
        let users_on_c: Vec<usize> = (0..nu).filter(|&u| attached[u] == Some(c)).collect();
        let total_demand: f64 = users_on_c.iter().map(|&u| s.users[u].demand_bps).sum();
        for &u in &users_on_c {
            a.set(c, u, 1.0);
            if total_demand > 0.0 {
                let share = s.users[u].demand_bps / total_demand;
                f.set(c, u, share);
                l.set(c, u, share);
                supply[u] = share * rates.get(c, u);
            }
        }
    }

    let demands: Vec<f64> = s.users.iter().map(|u| u.demand_bps).collect();
    let m = compute_metrics(&demands, &supply);
    let psi = if m.min_ratio.is_finite() {
        m.min_ratio
    } else {
        1.0
    };
    Ok(AllocationResult {
        schema: SCHEMA_VERSION,
        user_ids: s.users.iter().map(|u| u.id).collect(),
        demand_bps: demands,
        supply_bps: supply,
        association: a,
        fill: f,
        lambda: l,
        psi,
        unmet_bps: m.unmet_bps,
        unused_bps: m.unused_bps,
        swap_count: None,
        status: "baseline".to_string(),
        gap: 0.0,
        nodes: 0,
        warnings,
    })
}

/// Rebuild the solver variable vector from an allocation result.
fn result_to_x(s: &Scenario, r: &AllocationResult) -> Vec<f64> {
    let layout = crate::milp::VarLayout {
        num_carriers: s.num_carriers(),
        num_users: s.num_users(),
    };
    let mut x = vec![0.0; layout.total()];
    for ((c, u), v) in r.association.iter() {
        x[layout.association(c, u)] = v;
    }
    for ((c, u), v) in r.fill.iter() {
        x[layout.fill(c, u)] = v;
    }
    for ((c, u), v) in r.lambda.iter() {
        x[layout.product(c, u)] = v;
    }
    for (u, &v) in r.supply_bps.iter().enumerate() {
        x[layout.supply(u)] = v;
    }
    x[layout.psi()] = r.psi;
    x
}

/// Re-solve the scenario across successive demand profiles, limiting each
/// transition to `q` association changes. Epoch 0 is solved without the
/// swap constraint.
pub fn evolve(s: &Scenario, demand_profiles: &[Vec<f64>], q: usize) -> Result<EvolutionTrace, CaError> {
    evolve_warm(s, demand_profiles, q, None)
}

/// [`evolve`] optionally seeded with the trace of a previous run at a
/// smaller swap budget: whenever an epoch faces the same previous
/// association as the seed trace did, the seed's epoch solution (feasible a
/// fortiori under the larger budget) warm-starts the solve.
fn evolve_warm(
    s: &Scenario,
    demand_profiles: &[Vec<f64>],
    q: usize,
    seed: Option<&EvolutionTrace>,
) -> Result<EvolutionTrace, CaError> {
    if demand_profiles.len() < 2 {
        return Err(CaError::Invalid(
            "demand evolution needs at least two profiles".into(),
        ));
    }
    for (i, prof) in demand_profiles.iter().enumerate() {
        if prof.len() != s.num_users() {
            return Err(CaError::Invalid(format!(
                "profile {i} has {} demands for {} users",
                prof.len(),
                s.num_users()
            )));
        }
    }

    let mut trace = EvolutionTrace {
        schema: SCHEMA_VERSION,
        epochs: Vec::with_capacity(demand_profiles.len()),
        error: None,
    };
    let mut prev_a: Option<AssociationMatrix> = None;
    for (epoch, profile) in demand_profiles.iter().enumerate() {
        let mut se = s.clone();
        for (user, &d) in se.users.iter_mut().zip(profile) {
            user.demand_bps = d;
        }
        if epoch == 0 {
            se.prev_association = None;
            se.solver.swap_budget_q = SwapBudget::Unconstrained;
        } else {
            se.prev_association = prev_a.clone();
            se.solver.swap_budget_q = SwapBudget::Limit(q);
        }
        // epoch 0 ignores the swap budget entirely, so a seed trace's first
        // epoch can be reused as is
        if epoch == 0 {
            if let Some(rec) = seed.and_then(|tr| tr.epochs.first()) {
                prev_a = Some(rec.result.association.clone());
                trace.epochs.push(rec.clone());
                continue;
            }
        }
        // the seed epoch is only usable if it was produced against the same
        // previous association this epoch sees; its swap count then fits the
        // (not smaller) current budget
        let warm = seed
            .and_then(|tr| tr.epochs.get(epoch))
            .filter(|_| {
                epoch == 0
                    || seed
                        .and_then(|tr| tr.epochs.get(epoch - 1))
                        .map(|r| Some(&r.result.association) == prev_a.as_ref())
                        .unwrap_or(false)
            })
            .map(|rec| result_to_x(&se, &rec.result));
        match allocate_ca_warm(&se, warm) {
            Ok(result) => {
                let swaps = result.swap_count.unwrap_or(0);
                prev_a = Some(result.association.clone());
                trace.epochs.push(EpochRecord {
                    demand_bps: profile.clone(),
                    result,
                    swap_count: swaps,
                });
            }
            Err(e) => {
                // reusing the previous association is always feasible, so
                // this indicates a genuine solver failure
                trace.error = Some(format!("epoch {epoch}: {e}"));
                break;
            }
        }
    }
    Ok(trace)
}

/// One entry of a swap-budget sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSweepEntry {
    pub q: usize,
    pub trace: EvolutionTrace,
}

/// Run [`evolve`] once per swap budget in `qs`.
///
/// Budgets are processed in increasing order and each run seeds the next
/// larger one with its trace: a solution using at most `q` swaps stays
/// feasible when the budget grows, so the achieved objective can only
/// improve from one budget to the next. Entries come back in the caller's
/// order.
pub fn sweep_q(
    s: &Scenario,
    demand_profiles: &[Vec<f64>],
    qs: &[usize],
) -> Result<Vec<QSweepEntry>, CaError> {
    let mut order: Vec<usize> = (0..qs.len()).collect();
    order.sort_by_key(|&i| qs[i]);
    let mut results: Vec<Option<EvolutionTrace>> = vec![None; qs.len()];
    let mut seed: Option<EvolutionTrace> = None;
    for &i in &order {
        let trace = evolve_warm(s, demand_profiles, qs[i], seed.as_ref())?;
        seed = Some(trace.clone());
        results[i] = Some(trace);
    }
    Ok(qs
        .iter()
        .zip(results)
        .map(|(&q, trace)| QSweepEntry {
            q,
            trace: trace.expect("every index visited"),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sla;
    use crate::test_fixtures::scenario_with;

    #[test]
    fn metrics_direct_arithmetic() {
        let m = compute_metrics(&[100e6, 50e6], &[80e6, 60e6]);
        assert!((m.unmet_bps - 20e6).abs() < 1e-6);
        assert!((m.unused_bps - 10e6).abs() < 1e-6);
        assert!((m.min_ratio - 0.8).abs() < 1e-12);
    }

    #[test]
    fn metrics_perfect_match() {
        let m = compute_metrics(&[10.0, 20.0], &[10.0, 20.0]);
        assert_eq!((m.unmet_bps, m.unused_bps, m.min_ratio), (0.0, 0.0, 1.0));
    }

    #[test]
    fn metrics_zero_demand_users_are_excluded() {
        let m = compute_metrics(&[0.0, 10.0], &[5.0, 10.0]);
        assert_eq!(m.unmet_bps, 0.0);
        assert_eq!(m.unused_bps, 5.0);
        assert_eq!(m.min_ratio, 1.0);
    }

    #[test]
    fn metrics_no_positive_demand_gives_infinite_ratio() {
        let m = compute_metrics(&[0.0], &[5.0]);
        assert!(m.min_ratio.is_infinite());
    }

    #[test]
    fn single_user_aggregates_two_carriers() {
        // premium user, two carriers at 100 Mbit/s, demand 150 Mbit/s
        let mut s = scenario_with(2, 1);
        s.users[0].demand_bps = 150e6;
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6], vec![100e6]]).unwrap());
        let r = allocate_ca(&s).unwrap();
        assert_eq!(r.status, "optimal");
        assert!((r.psi - 1.0).abs() < 1e-9, "psi = {}", r.psi);
        assert!(r.unmet_bps < 1e-3, "unmet = {}", r.unmet_bps);
        assert!(r.unused_bps < 1e-3, "unused = {}", r.unused_bps);
        assert!((r.supply_bps[0] - 150e6).abs() < 1.0);
    }

    #[test]
    fn all_zero_demands_use_the_psi_one_convention() {
        let mut s = scenario_with(2, 2);
        for u in &mut s.users {
            u.demand_bps = 0.0;
        }
        s.rate_matrix_override =
            Some(Matrix::from_rows(vec![vec![100e6, 80e6], vec![90e6, 70e6]]).unwrap());
        let r = allocate_ca(&s).unwrap();
        assert_eq!(r.psi, 1.0);
        assert_eq!(r.unmet_bps, 0.0);
        assert_eq!(r.unused_bps, 0.0);
        assert!(r.association.iter().all(|(_, v)| v == 0.0));
        assert!(r.lambda.iter().all(|(_, v)| v == 0.0));
    }

    #[test]
    fn supply_equals_lambda_times_rate() {
        let mut s = scenario_with(3, 3);
        let rates = Matrix::from_rows(vec![
            vec![120e6, 90e6, 60e6],
            vec![80e6, 110e6, 70e6],
            vec![50e6, 60e6, 130e6],
        ])
        .unwrap();
        s.rate_matrix_override = Some(rates.clone());
        for (i, u) in s.users.iter_mut().enumerate() {
            u.demand_bps = 40e6 + 20e6 * i as f64;
        }
        let r = allocate_ca(&s).unwrap();
        for u in 0..3 {
            let expect: f64 = (0..3).map(|c| r.lambda.get(c, u) * rates.get(c, u)).sum();
            let rel = (r.supply_bps[u] - expect).abs() / expect.abs().max(1.0);
            assert!(rel < 1e-6, "user {u}: {} vs {expect}", r.supply_bps[u]);
        }
    }

    #[test]
    fn baseline_proportional_shares_equal_rates() {
        let mut s = scenario_with(1, 2);
        s.users[0].demand_bps = 60e6;
        s.users[1].demand_bps = 40e6;
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6, 100e6]]).unwrap());
        let r = allocate_baseline_no_ca(&s).unwrap();
        assert!((r.fill.get(0, 0) - 0.6).abs() < 1e-12);
        assert!((r.fill.get(0, 1) - 0.4).abs() < 1e-12);
        assert!((r.supply_bps[0] - 60e6).abs() < 1e-3);
        assert!((r.supply_bps[1] - 40e6).abs() < 1e-3);
        assert_eq!(r.unmet_bps, 0.0);
        assert_eq!(r.unused_bps, 0.0);
    }

    #[test]
    fn baseline_proportional_shares_unequal_rates() {
        let mut s = scenario_with(1, 2);
        s.users[0].demand_bps = 60e6;
        s.users[1].demand_bps = 60e6;
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6, 50e6]]).unwrap());
        let r = allocate_baseline_no_ca(&s).unwrap();
        assert!((r.fill.get(0, 0) - 0.5).abs() < 1e-12);
        assert!((r.fill.get(0, 1) - 0.5).abs() < 1e-12);
        assert!((r.supply_bps[0] - 50e6).abs() < 1e-3);
        assert!((r.supply_bps[1] - 25e6).abs() < 1e-3);
        assert!((r.unmet_bps - 45e6).abs() < 1e-3);
    }

    #[test]
    fn baseline_saturates_single_overloaded_user() {
        let mut s = scenario_with(1, 1);
        s.users[0].demand_bps = 150e6;
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6]]).unwrap());
        let r = allocate_baseline_no_ca(&s).unwrap();
        assert_eq!(r.fill.get(0, 0), 1.0);
        assert!((r.supply_bps[0] - 100e6).abs() < 1e-3);
        assert!((r.unmet_bps - 50e6).abs() < 1e-3);
    }

    #[test]
    fn baseline_warns_about_ineligible_user() {
        let mut s = scenario_with(1, 2);
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6, 0.0]]).unwrap());
        let r = allocate_baseline_no_ca(&s).unwrap();
        assert_eq!(r.supply_bps[1], 0.0);
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0].contains("no eligible carrier"));
    }

    #[test]
    fn baseline_picks_best_rate_with_lowest_index_tiebreak() {
        let mut s = scenario_with(3, 1);
        s.rate_matrix_override =
            Some(Matrix::from_rows(vec![vec![90e6], vec![110e6], vec![110e6]]).unwrap());
        let r = allocate_baseline_no_ca(&s).unwrap();
        assert_eq!(r.association.get(1, 0), 1.0);
        assert_eq!(r.association.get(0, 0), 0.0);
        assert_eq!(r.association.get(2, 0), 0.0);
    }

    fn evolve_fixture() -> (Scenario, Vec<Vec<f64>>) {
        let mut s = scenario_with(2, 2);
        s.users[1].sla = Sla::Standard;
        s.users[1].max_carriers = 1;
        s.rate_matrix_override =
            Some(Matrix::from_rows(vec![vec![100e6, 100e6], vec![100e6, 100e6]]).unwrap());
        let profiles = vec![vec![150e6, 10e6], vec![10e6, 90e6], vec![150e6, 10e6]];
        (s, profiles)
    }

    #[test]
    fn evolve_with_q_zero_freezes_the_association() {
        let (s, profiles) = evolve_fixture();
        let t = evolve(&s, &profiles, 0).unwrap();
        assert!(t.error.is_none());
        assert_eq!(t.epochs.len(), 3);
        for e in &t.epochs[1..] {
            assert_eq!(e.result.association, t.epochs[0].result.association);
            assert_eq!(e.swap_count, 0);
        }
    }

    #[test]
    fn evolve_with_large_q_matches_unconstrained_solves() {
        let (s, profiles) = evolve_fixture();
        let big = 2 * s.num_carriers() * s.num_users();
        let t = evolve(&s, &profiles, big).unwrap();
        for (e, prof) in t.epochs.iter().zip(&profiles) {
            let mut su = s.clone();
            for (user, &d) in su.users.iter_mut().zip(prof) {
                user.demand_bps = d;
            }
            su.prev_association = None;
            su.solver.swap_budget_q = SwapBudget::Unconstrained;
            let free = allocate_ca(&su).unwrap();
            assert!(
                (e.result.psi - free.psi).abs() < 1e-6,
                "epoch psi {} vs unconstrained {}",
                e.result.psi,
                free.psi
            );
        }
    }

    #[test]
    fn evolve_respects_the_swap_budget() {
        let (s, profiles) = evolve_fixture();
        for q in 0..=3 {
            let t = evolve(&s, &profiles, q).unwrap();
            assert!(t.error.is_none());
            for e in &t.epochs[1..] {
                assert!(e.swap_count <= q, "q={q}, swaps={}", e.swap_count);
            }
        }
    }

    #[test]
    fn evolve_needs_two_profiles() {
        let (s, profiles) = evolve_fixture();
        assert!(evolve(&s, &profiles[..1], 1).is_err());
    }

    #[test]
    fn allocation_result_round_trips_through_json() {
        let mut s = scenario_with(2, 1);
        s.users[0].demand_bps = 150e6;
        s.rate_matrix_override = Some(Matrix::from_rows(vec![vec![100e6], vec![100e6]]).unwrap());
        let r = allocate_ca(&s).unwrap();
        let back = AllocationResult::from_json(&r.to_json()).unwrap();
        assert_eq!(r, back);
    }
}
