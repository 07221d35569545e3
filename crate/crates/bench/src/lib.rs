//! Shared setup for the criterion benchmarks in `benches/`.

use ibstokes::integrators::{Integrator, Scheme, StepState};
use ibstokes::sim::RunConfig;

/// Integrator and initial ellipse state of the model problem.
pub fn model_problem(scheme: Scheme, n: usize, dt: f64, mu: f64) -> (Integrator, StepState) {
    RunConfig { scheme, n, dt, mu, ..RunConfig::default() }.build().expect("benchmark config is valid")
}

/// Deterministic pseudo-random samples in [−1, 1).
pub fn samples(len: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..len)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}
