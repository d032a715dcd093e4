//! Exact solvers for the demand-matching model: a bounded-variable revised
//! simplex for LP relaxations, best-first branch and bound for the mixed
//! integer problem, and a brute-force enumeration oracle for small
//! instances used to validate the other two.

mod branch;
mod family;
mod lp;
mod oracle;
mod simplex;

pub use branch::{branch_and_bound, branch_and_bound_with, SolveOptions};
pub use lp::solve_lp;
pub use oracle::enumerate_oracle;

/// Outcome class of an LP solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solution of an LP relaxation.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; `-inf` when infeasible, `+inf` when unbounded.
    pub objective: f64,
    /// Variable values in the order of the model; empty unless optimal.
    pub x: Vec<f64>,
}

/// Outcome class of a mixed-integer solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    /// Incumbent proven within the configured gap.
    Optimal,
    /// Feasible incumbent without a proof of optimality.
    Feasible,
    /// No feasible assignment exists.
    Infeasible,
    /// Search stopped at the wall-clock budget.
    TimeLimit,
}

/// Solution of a mixed-integer solve.
///
/// Invariant: `gap == max(0, (bound - objective) / max(|bound|, 1))`.
#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Incumbent variable values; empty when none was found.
    pub x: Vec<f64>,
    /// Incumbent objective; `-inf` when no incumbent exists.
    pub objective: f64,
    /// Proven bound on the optimum.
    pub bound: f64,
    /// Relative optimality gap.
    pub gap: f64,
    /// Number of relaxations solved.
    pub nodes: u64,
}
