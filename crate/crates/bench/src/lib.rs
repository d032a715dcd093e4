//! Shared fixtures for the solver benchmarks.

use ca_core::{compute_rate_matrix, generate_preset, Preset, RateMatrix, Scenario};

/// A seeded preset scenario together with its achievable-rate matrix.
pub fn scenario_with_rates(preset: Preset, seed: u64) -> (Scenario, RateMatrix) {
    let s = generate_preset(preset, seed).scenario;
    let rates = match &s.rate_matrix_override {
        Some(r) => r.clone(),
        None => compute_rate_matrix(&s),
    };
    (s, rates)
}
