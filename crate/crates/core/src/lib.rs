//! Max-min demand matching for carrier aggregation in multibeam high
//! throughput satellite systems: scenario model, synthetic link budget,
//! MILP construction, an exact branch-and-bound solver, and the allocation
//! engine with its no-aggregation baseline.

pub mod alloc;
pub mod linkbudget;
pub mod lp_format;
pub mod milp;
pub mod model;
pub mod presets;
pub mod solver;

pub use alloc::{
    allocate_baseline_no_ca, allocate_ca, allocate_ca_warm, compute_metrics, evolve, sweep_q,
    AllocationResult, EvolutionTrace, Metrics, QSweepEntry,
};
pub use linkbudget::{
    beam_gain, compute_rate_matrix, free_space_path_loss_db, shannon_rate_bps, InterferenceModel,
    LinkParams,
};
pub use lp_format::write_lp;
pub use milp::{build_milp, MilpProblem};
pub use model::{
    swap_distance, validate_scenario, AssociationMatrix, Beam, Carrier, FillRateMatrix,
    LambdaMatrix, Matrix, RateMatrix, Scenario, Sla, SolverParams, SwapBudget, User, Violation,
    SCHEMA_VERSION,
};
pub use presets::{generate_preset, GeneratedScenario, Preset};
pub use solver::{
    branch_and_bound, branch_and_bound_with, enumerate_oracle, solve_lp, LpSolution, LpStatus,
    MilpSolution, MilpStatus, SolveOptions,
};

use model::Violation as V;

/// Errors surfaced by the allocation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum CaError {
    #[error("matrix shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("scenario validation failed: {}", format_violations(.0))]
    Validation(Vec<V>),
    #[error("problem is infeasible")]
    Infeasible,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("numerical failure in the LP solver: {0}")]
    Numerical(String),
    #[error("time limit reached with no feasible incumbent")]
    TimeLimitNoIncumbent,
    #[error("enumeration oracle refused: {0}")]
    OracleRefused(String),
    #[error("{0}")]
    Invalid(String),
}

fn format_violations(v: &[V]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
