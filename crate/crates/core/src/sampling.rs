//! Seeded generators of generic test data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::flow::evolve_angles;
use crate::hankel::{spectral_data_default, SpectralCoordinates};
use crate::linalg::{wrap_angle, ONE};
use crate::symbol::{expand_rational, FourierSymbol, RationalSymbol, DEFAULT_TAIL_TOL};
use crate::transform::{inverse_model, reconstruct_rational};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-case generator, independent of how many draws earlier cases used.
pub fn case_rng(seed: u64, case: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case);
    rng
}

/// Bounds for sampled spectra.
#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    /// Range of the largest singular value `lambda_1`.
    pub top: (f64, f64),
    /// Range of the ratio between consecutive values of
    /// `lambda_1 > mu_1 > lambda_2 > ... > mu_N`.
    pub step_ratio: (f64, f64),
    /// Upper bound on the pole radius (spectral radius of `A`).
    pub max_pole_radius: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { top: (0.7, 1.5), step_ratio: (0.45, 0.82), max_pole_radius: 0.8 }
    }
}

/// Interlaced actions `lambda_1 > mu_1 > ... > mu_N`, built as a descending
/// walk with random step ratios.
pub fn sample_actions<R: Rng>(rng: &mut R, n: usize, cfg: &SamplerConfig) -> (Vec<f64>, Vec<f64>) {
    let mut x = rng.random_range(cfg.top.0..cfg.top.1);
    let mut lambda = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    for _ in 0..n {
        lambda.push(x);
        x *= rng.random_range(cfg.step_ratio.0..cfg.step_ratio.1);
        mu.push(x);
        x *= rng.random_range(cfg.step_ratio.0..cfg.step_ratio.1);
    }
    (lambda, mu)
}

pub fn sample_angles<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| wrap_angle(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)))
        .collect()
}

/// Random coordinates whose reconstructed symbol has pole radius at most
/// `cfg.max_pole_radius`.
pub fn sample_coordinates<R: Rng>(rng: &mut R, n: usize, cfg: &SamplerConfig) -> SpectralCoordinates {
    loop {
        let (lambda, mu) = sample_actions(rng, n, cfg);
        let phi = sample_angles(rng, n);
        let theta = sample_angles(rng, n);
        let s = SpectralCoordinates::from_actions_angles(lambda, mu, phi, theta)
            .expect("sampled actions interlace");
        let model = inverse_model(&s).expect("sampled actions interlace");
        if model.spectral_radius() <= cfg.max_pole_radius {
            return s;
        }
    }
}

/// A generic rational symbol of rank `n` together with its coordinates.
pub fn sample_generic_rational<R: Rng>(
    rng: &mut R,
    n: usize,
    cfg: &SamplerConfig,
) -> (RationalSymbol, SpectralCoordinates) {
    loop {
        let s = sample_coordinates(rng, n, cfg);
        let model = inverse_model(&s).expect("sampled actions interlace");
        if let Ok(r) = reconstruct_rational(&model) {
            return (r, s);
        }
    }
}

/// Largest pole radius along the exact orbit of `s` on `[0, horizon]`,
/// probed every `step` time units.
pub fn orbit_pole_radius(s: &SpectralCoordinates, horizon: f64, step: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    let mut t = 0.0;
    while t <= horizon {
        worst = worst.max(inverse_model(&evolve_angles(s, t))?.spectral_radius());
        t += step;
    }
    Ok(worst)
}

/// Generic rational initial data whose poles stay within `max_orbit_radius`
/// along the flow up to `horizon`, so a fixed truncation stays accurate.
pub fn sample_flow_rational<R: Rng>(
    rng: &mut R,
    n: usize,
    cfg: &SamplerConfig,
    horizon: f64,
    max_orbit_radius: f64,
) -> (RationalSymbol, SpectralCoordinates) {
    loop {
        let (r, s) = sample_generic_rational(rng, n, cfg);
        if orbit_pole_radius(&s, horizon, 0.01).is_ok_and(|x| x <= max_orbit_radius) {
            return (r, s);
        }
    }
}

/// `u = sum_k a_k / (1 - p_k z)` with `|p_k| <= max_radius`, poles at least
/// `min_separation` apart, kept only if it passes the genericity checks.
pub fn sample_pole_residue<R: Rng>(
    rng: &mut R,
    n: usize,
    max_radius: f64,
    min_separation: f64,
    m: usize,
) -> Result<(RationalSymbol, FourierSymbol)> {
    loop {
        let mut poles: Vec<Complex64> = Vec::with_capacity(n);
        while poles.len() < n {
            let r = rng.random_range(0.15..max_radius);
            let p = Complex64::from_polar(r, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
            if poles.iter().all(|q| (q - p).norm() >= min_separation) {
                poles.push(p);
            }
        }
        let residues: Vec<Complex64> = (0..n)
            .map(|_| Complex64::from_polar(rng.random_range(0.3..1.0), rng.random_range(-3.0..3.0)))
            .collect();
        let mut den = vec![ONE];
        for p in &poles {
            den = crate::linalg::convolve(&den, &[ONE, -p]);
        }
        let mut num = vec![Complex64::new(0.0, 0.0); n];
        for (k, a) in residues.iter().enumerate() {
            let mut part = vec![*a];
            for (j, p) in poles.iter().enumerate() {
                if j != k {
                    part = crate::linalg::convolve(&part, &[ONE, -p]);
                }
            }
            for (i, c) in part.iter().enumerate() {
                num[i] += c;
            }
        }
        let Ok(r) = RationalSymbol::new(num, den) else { continue };
        let u = expand_rational(&r, m, DEFAULT_TAIL_TOL)?;
        if spectral_data_default(&u).is_ok() {
            return Ok((r, u));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::check_interlacing;

    #[test]
    fn actions_interlace() {
        let mut rng = seeded(7);
        for n in 1..=6 {
            let (l, m) = sample_actions(&mut rng, n, &SamplerConfig::default());
            check_interlacing(&l, &m).unwrap();
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a: f64 = case_rng(3, 5).random();
        let b: f64 = case_rng(3, 5).random();
        let c: f64 = case_rng(3, 6).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_symbols_respect_pole_radius() {
        let mut rng = seeded(11);
        let cfg = SamplerConfig::default();
        for n in 1..=4 {
            let (r, _) = sample_generic_rational(&mut rng, n, &cfg);
            assert!(r.min_root_modulus() >= 1.0 / cfg.max_pole_radius - 1e-9);
            assert_eq!(r.rank(), n);
        }
    }
}
