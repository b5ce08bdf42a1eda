//! Shared fixtures for the benchmarks.

use szego_core::sampling::{case_rng, sample_generic_rational, SamplerConfig};
use szego_core::symbol::{expand_rational, DEFAULT_TAIL_TOL};
use szego_core::FourierSymbol;

/// Generic rank-`n` symbol cut to exactly `m` coefficients, fixed per `(n, m)`.
pub fn generic_symbol(n: usize, m: usize) -> FourierSymbol {
    let mut rng = case_rng(7, n as u64);
    let (r, _) = sample_generic_rational(&mut rng, n, &SamplerConfig::default());
    expand_rational(&r, m, DEFAULT_TAIL_TOL)
        .expect("sampled poles lie outside the disc")
        .resized(m)
}
