//! Hankel matrices of a symbol and the spectral data of `H_u` and `K_u`.
//!
//! In the Fourier basis `H_u h = Gamma conj(h)` with `Gamma[n][p] = c_{n+p}`,
//! and `K_u = H_u T_z` is given by the shifted matrix `c_{n+p+1}`. Both are
//! complex symmetric, so `H_u^2 = Gamma Gamma^*` and `K_u^2` are Hermitian.

mod eigen;

pub use eigen::{hermitian_eig, EigenSystem, MAX_SWEEPS, OFF_DIAGONAL_TOL};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, GenericityViolation, Result};
use crate::linalg::{convolve, inner, wrap_angle, CMatrix, ZERO};
use crate::symbol::FourierSymbol;

pub const DEFAULT_RANK_TOL: f64 = 1e-10;
pub const DEFAULT_GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct HankelPair {
    pub gamma: CMatrix,
    pub gamma_shifted: CMatrix,
    pub h2: CMatrix,
    pub k2: CMatrix,
}

pub fn build_pair(u: &FourierSymbol) -> HankelPair {
    let m = u.len();
    let gamma = CMatrix::from_fn(m, m, |n, p| u.coeff(n + p));
    let gamma_shifted = CMatrix::from_fn(m, m, |n, p| u.coeff(n + p + 1));
    let h2 = &gamma * gamma.adjoint();
    let k2 = &gamma_shifted * gamma_shifted.adjoint();
    HankelPair { gamma, gamma_shifted, h2, k2 }
}

/// `H_u(h) = Pi(u conj(h))`, i.e. `Gamma conj(h)`. Antilinear in `h`.
pub fn apply_h(u: &FourierSymbol, h: &[Complex64]) -> Vec<Complex64> {
    apply_shifted(u.coeffs(), h, 0)
}

/// `K_u(h) = H_u(z h)`, i.e. the shifted Hankel matrix applied to `conj(h)`.
pub fn apply_k(u: &FourierSymbol, h: &[Complex64]) -> Vec<Complex64> {
    apply_shifted(u.coeffs(), h, 1)
}

fn apply_shifted(c: &[Complex64], h: &[Complex64], shift: usize) -> Vec<Complex64> {
    let m = c.len();
    if h.is_empty() {
        return vec![ZERO; m];
    }
    // out[n] = sum_p c[n + p + shift] conj(h[p]), a correlation.
    let reversed: Vec<Complex64> = h.iter().rev().map(|x| x.conj()).collect();
    let full = convolve(c, &reversed);
    let offset = shift + h.len() - 1;
    (0..m).map(|n| full.get(n + offset).copied().unwrap_or(ZERO)).collect()
}

/// Actions and angles of a generic finite-rank symbol.
///
/// `lambda` and `mu` are decreasing; `I_j = 2 lambda_j^2`, `L_m = 2 mu_m^2`.
/// Angles are in radians, reduced to `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoordinates {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    #[serde(default)]
    pub nu: Vec<f64>,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
}

impl SpectralCoordinates {
    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    /// Coordinates from actions and angles, with `nu` from the closed form.
    pub fn from_actions_angles(
        lambda: Vec<f64>,
        mu: Vec<f64>,
        phi: Vec<f64>,
        theta: Vec<f64>,
    ) -> Result<Self> {
        let nu = crate::transform::nu_from_actions(&lambda, &mu)?;
        if phi.len() != lambda.len() || theta.len() != lambda.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} actions but {} phi and {} theta angles",
                lambda.len(),
                phi.len(),
                theta.len()
            )));
        }
        let phi = phi.into_iter().map(wrap_angle).collect();
        let theta = theta.into_iter().map(wrap_angle).collect();
        Ok(Self { lambda, mu, nu, phi, theta })
    }

    pub fn lambda_sq(&self) -> Vec<f64> {
        self.lambda.iter().map(|l| l * l).collect()
    }

    pub fn mu_sq(&self) -> Vec<f64> {
        self.mu.iter().map(|m| m * m).collect()
    }

    /// Fill `nu` from the closed form when it was not supplied.
    pub fn with_closed_form_nu(mut self) -> Result<Self> {
        if self.nu.is_empty() {
            self.nu = crate::transform::nu_from_actions(&self.lambda, &self.mu)?;
        }
        Ok(self)
    }
}

/// Spectral coordinates together with the eigenvectors they were read from.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub coords: SpectralCoordinates,
    /// Phase-fixed eigenvectors with `H_u e_j = lambda_j e_j`.
    pub e: Vec<Vec<Complex64>>,
    /// `g_m = (H_u^2 - mu_m^2)^{-1} u`, eigenvectors of `K_u^2`.
    pub g: Vec<Vec<Complex64>>,
    /// Unit eigenvectors of `K_u^2` as returned by the eigensolver.
    pub f_raw: Vec<Vec<Complex64>>,
    pub h_values: Vec<f64>,
    pub k_values: Vec<f64>,
}

pub fn spectral_data(u: &FourierSymbol, rank_tol: f64, gap_tol: f64) -> Result<SpectralCoordinates> {
    spectral_decomposition(u, rank_tol, gap_tol).map(|d| d.coords)
}

pub fn spectral_data_default(u: &FourierSymbol) -> Result<SpectralCoordinates> {
    spectral_data(u, DEFAULT_RANK_TOL, DEFAULT_GAP_TOL)
}

pub fn spectral_decomposition(
    u: &FourierSymbol,
    rank_tol: f64,
    gap_tol: f64,
) -> Result<SpectralDecomposition> {
    let pair = build_pair(u);
    let eh = hermitian_eig(&pair.h2)?;
    let ek = hermitian_eig(&pair.k2)?;
    let scale = eh.values.first().copied().unwrap_or(0.0);
    if !(scale > 0.0) {
        return Err(Error::NotGeneric(GenericityViolation::ZeroSymbol));
    }
    let cut = rank_tol * scale;
    let h_rank = eh.values.iter().filter(|v| **v > cut).count();
    let k_rank = ek.values.iter().filter(|v| **v > cut).count();
    if h_rank != k_rank {
        return Err(Error::NotGeneric(GenericityViolation::RankMismatch { h_rank, k_rank }));
    }
    let n = h_rank;
    let lam2 = &eh.values[..n];
    let mu2 = &ek.values[..n];
    let gap = gap_tol * scale;
    for (operator, vals) in [("H_u^2", lam2), ("K_u^2", mu2)] {
        for j in 0..n.saturating_sub(1) {
            if vals[j] - vals[j + 1] <= gap {
                return Err(Error::NotGeneric(GenericityViolation::EigenvalueGap {
                    operator,
                    index: j + 1,
                    gap: (vals[j] - vals[j + 1]) / scale,
                }));
            }
        }
    }
    for j in 0..n {
        let below = if j + 1 < n { lam2[j + 1] } else { 0.0 };
        if !(lam2[j] - mu2[j] > gap && mu2[j] - below > gap) {
            return Err(Error::NotGeneric(GenericityViolation::InterlacingFails { index: j }));
        }
    }

    let c = u.coeffs();
    let mut nu = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    for j in 0..n {
        let v = eh.vector(j);
        let nu_j = v[0].norm();
        if nu_j <= rank_tol {
            return Err(Error::NotGeneric(GenericityViolation::VanishingNu { index: j, nu: nu_j }));
        }
        // H_u v = lambda e^{i gamma} v on a simple eigenline; e = e^{i gamma/2} v.
        let w = apply_h(u, &v);
        let gamma = inner(&w, &v).arg();
        let rot = Complex64::from_polar(1.0, 0.5 * gamma);
        let ej: Vec<Complex64> = v.iter().map(|x| x * rot).collect();
        phi.push(wrap_angle(-2.0 * ej[0].arg()));
        nu.push(nu_j);
        e.push(ej);
    }
    let nu_sum: f64 = nu.iter().map(|x| x * x).sum();
    if nu_sum >= 1.0 - rank_tol {
        return Err(Error::NotGeneric(GenericityViolation::NuSumNotBelowOne { sum: nu_sum }));
    }

    // g_m expanded on the e_j; (u|g_m) = 1 by the secular equation.
    let proj: Vec<Complex64> = e.iter().map(|ej| inner(c, ej)).collect();
    let mut theta = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for &mu2_m in mu2.iter().take(n) {
        let mut gm = vec![ZERO; c.len()];
        for j in 0..n {
            let w = proj[j] / (lam2[j] - mu2_m);
            for (x, y) in gm.iter_mut().zip(&e[j]) {
                *x += w * y;
            }
        }
        let kg = apply_k(u, &gm);
        theta.push(wrap_angle(-inner(&kg, &gm).arg()));
        g.push(gm);
    }

    let coords = SpectralCoordinates {
        lambda: lam2.iter().map(|x| x.sqrt()).collect(),
        mu: mu2.iter().map(|x| x.sqrt()).collect(),
        nu,
        phi,
        theta,
    };
    Ok(SpectralDecomposition {
        coords,
        e,
        g,
        f_raw: (0..n).map(|m| ek.vector(m)).collect(),
        h_values: eh.values,
        k_values: ek.values,
    })
}

/// `theta_m` by phase-fixing the `K_u^2` eigenvectors: `K_u f = mu e^{i gamma} f`,
/// `f~ = e^{i gamma/2} f`, `theta = arg (u|f~)^2`. Independent of the `g_m` route.
pub fn theta_from_k_eigenvectors(u: &FourierSymbol, d: &SpectralDecomposition) -> Vec<f64> {
    d.f_raw
        .iter()
        .map(|f| {
            let w = apply_k(u, f);
            let gamma = inner(&w, f).arg();
            let rot = Complex64::from_polar(1.0, 0.5 * gamma);
            let ft: Vec<Complex64> = f.iter().map(|x| x * rot).collect();
            let p = inner(u.coeffs(), &ft);
            wrap_angle(2.0 * p.arg())
        })
        .collect()
}

/// Roots `sigma = mu_m^2` of `sum_j lambda_j^2 nu_j^2 / (lambda_j^2 - sigma) = 1`.
///
/// Root `m` lies in `(lambda_{m+1}^2, lambda_m^2)` (with `lambda_{N+1} = 0`),
/// so the output is index-aligned with `lambda_sq` and decreasing.
pub fn secular_mu(lambda_sq: &[f64], nu_sq: &[f64]) -> Result<Vec<f64>> {
    if lambda_sq.len() != nu_sq.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues but {} weights",
            lambda_sq.len(),
            nu_sq.len()
        )));
    }
    let n = lambda_sq.len();
    for j in 0..n {
        let below = if j + 1 < n { lambda_sq[j + 1] } else { 0.0 };
        if !(lambda_sq[j] > below) || !(nu_sq[j] > 0.0) {
            return Err(Error::InterlacingViolated(
                "lambda^2 must be strictly decreasing and positive with nu^2 > 0".into(),
            ));
        }
    }
    let f = |s: f64| -> f64 {
        lambda_sq
            .iter()
            .zip(nu_sq)
            .map(|(l, v)| l * v / (l - s))
            .sum::<f64>()
            - 1.0
    };
    let mut roots = Vec::with_capacity(n);
    for m in 0..n {
        let mut lo = if m + 1 < n { lambda_sq[m + 1] } else { 0.0 };
        let mut hi = lambda_sq[m];
        // f increases from -inf (or f(0) = sum nu^2 - 1) to +inf on the interval.
        let flo = if m + 1 < n { f(next_up(lo)) } else { f(lo) };
        let fhi = f(next_down(hi));
        if !(flo < 0.0 && fhi > 0.0) {
            return Err(Error::IntervalFailure { index: m });
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
                break;
            }
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    Ok(roots)
}

fn next_up(x: f64) -> f64 {
    x + x.abs().max(f64::MIN_POSITIVE) * 4.0 * f64::EPSILON
}

fn next_down(x: f64) -> f64 {
    x - x.abs().max(f64::MIN_POSITIVE) * 4.0 * f64::EPSILON
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn geometric(alpha: f64, p: f64, m: usize) -> FourierSymbol {
        FourierSymbol::from_real(&(0..m).map(|k| alpha * p.powi(k as i32)).collect::<Vec<_>>()).unwrap()
    }

    fn cx(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pair_blocks_for_linear_symbol() {
        let u = FourierSymbol::from_real(&[0.1, 1.0, 0.0, 0.0]).unwrap();
        let pair = build_pair(&u);
        assert_eq!(pair.gamma[(0, 0)], cx(0.1));
        assert_eq!(pair.gamma[(0, 1)], cx(1.0));
        assert_eq!(pair.gamma[(1, 0)], cx(1.0));
        assert_eq!(pair.gamma[(1, 1)], cx(0.0));
        assert_eq!(pair.gamma_shifted[(0, 0)], cx(1.0));
        assert_eq!(pair.gamma_shifted[(0, 1)], cx(0.0));
        assert_eq!(pair.gamma_shifted[(1, 1)], cx(0.0));
    }

    #[test]
    fn pair_of_constant() {
        let a = Complex64::new(0.2, 0.5);
        let u = FourierSymbol::new(vec![a, ZERO, ZERO]).unwrap();
        let pair = build_pair(&u);
        assert_eq!(pair.gamma[(0, 0)], a);
        assert_eq!(pair.gamma.iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert!(pair.gamma_shifted.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn geometric_h2_is_rank_one() {
        let u = geometric(1.0, 0.5, 64);
        let pair = build_pair(&u);
        let trace: f64 = (0..64).map(|i| pair.h2[(i, i)].re).sum();
        assert!((trace - 16.0 / 9.0).abs() < 1e-10);
        let es = hermitian_eig(&pair.h2).unwrap();
        assert!((es.values[0] - 16.0 / 9.0).abs() < 1e-12);
        assert!(es.values[1].abs() < 1e-14);
    }

    #[test]
    fn apply_h_on_unit_returns_symbol() {
        let u = FourierSymbol::new(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4), cx(0.05)]).unwrap();
        let one = vec![cx(1.0), ZERO, ZERO];
        assert_eq!(apply_h(&u, &one), u.coeffs().to_vec());
    }

    #[test]
    fn apply_h_is_antilinear() {
        let u = FourierSymbol::new(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4), cx(0.05)]).unwrap();
        let h = vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0), Complex64::new(0.0, 1.0)];
        let a = Complex64::new(0.7, -1.3);
        let lhs = apply_h(&u, &h.iter().map(|x| x * a).collect::<Vec<_>>());
        let rhs: Vec<Complex64> = apply_h(&u, &h).iter().map(|x| x * a.conj()).collect();
        for (x, y) in lhs.iter().zip(&rhs) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn apply_h_real_on_real() {
        let u = FourierSymbol::from_real(&[0.5, 0.25, -0.1]).unwrap();
        let out = apply_h(&u, &[cx(1.0), cx(2.0), cx(3.0)]);
        assert_eq!(out, vec![cx(0.5 + 0.5 - 0.3), cx(0.25 - 0.2), cx(-0.1)]);
    }

    #[test]
    fn h_squared_of_unit_pairs_to_j2() {
        let u = geometric(1.0, 0.5, 64);
        let h1 = apply_h(&u, u.coeffs());
        // (H_u^2(1)|1) is the first component of H_u(u).
        assert!((h1[0].re - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_data_of_traveling_wave() {
        let u = geometric(1.0, 0.5, 64);
        let s = spectral_data_default(&u).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.lambda[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((s.mu[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.nu[0] - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(s.phi[0].abs() < 1e-12);
        assert!(s.theta[0].abs() < 1e-12);
    }

    #[test]
    fn spectral_data_of_alternating_wave() {
        let u = geometric(1.5, -0.5, 64);
        let s = spectral_data_default(&u).unwrap();
        assert!((s.lambda[0] - 2.0).abs() < 1e-12);
        assert!((s.mu[0] - 1.0).abs() < 1e-12);
        assert!(s.phi[0].abs() < 1e-12);
        assert!((s.theta[0].abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn linear_symbol_is_not_generic() {
        let u = FourierSymbol::from_real(&[0.1, 1.0, 0.0, 0.0]).unwrap();
        match spectral_data_default(&u) {
            Err(Error::NotGeneric(GenericityViolation::RankMismatch { h_rank: 2, k_rank: 1 })) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_symbol_is_not_generic() {
        let u = FourierSymbol::from_real(&[0.0, 0.0]).unwrap();
        assert!(matches!(
            spectral_data_default(&u),
            Err(Error::NotGeneric(GenericityViolation::ZeroSymbol))
        ));
    }

    #[test]
    fn secular_single_mode() {
        let mu = secular_mu(&[16.0 / 9.0], &[0.75]).unwrap();
        assert!((mu[0] - 4.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn secular_two_modes_against_quadratic() {
        // 1/(4 - s) + 0.25/(1 - s) = 1  <=>  s^2 - 3.75 s + 2 = 0
        let mu = secular_mu(&[4.0, 1.0], &[0.25, 0.25]).unwrap();
        let disc = (3.75f64 * 3.75 - 8.0).sqrt();
        assert!((mu[0] - (3.75 + disc) / 2.0).abs() < 1e-13);
        assert!((mu[1] - (3.75 - disc) / 2.0).abs() < 1e-13);
        assert!(4.0 > mu[0] && mu[0] > 1.0 && 1.0 > mu[1] && mu[1] > 0.0);
    }

    #[test]
    fn secular_needs_nu_sum_below_one() {
        assert!(matches!(secular_mu(&[2.0, 1.0], &[0.6, 0.5]), Err(Error::IntervalFailure { index: 1 })));
        assert!(matches!(secular_mu(&[1.0, 2.0], &[0.1, 0.1]), Err(Error::InterlacingViolated(_))));
    }
}
