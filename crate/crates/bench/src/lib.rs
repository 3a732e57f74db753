//! Shared fixtures for the benchmarks.

use dast_core::{draw_sample, Distribution, OrderedSample};

/// Half-t(2) sample of size `n`, the heavy-tailed workhorse of the benches.
pub fn student_t_sample(n: usize, seed: u64) -> OrderedSample {
    draw_sample(&Distribution::StudentT { nu: 2.0 }, n, seed).expect("valid distribution")
}
