//! Hankel sequences with prescribed singular values, or prescribed signed
//! eigenvalues in the real symmetric case.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{build_pair, hermitian_eig, SpectralCoordinates};
use crate::symbol::{FourierSymbol, DEFAULT_LENGTH, DEFAULT_TAIL_TOL};
use crate::transform::{inverse_model, reconstruct_auto, reconstruct_coeffs};

/// Imaginary residue tolerated before a self-adjoint build is declared faulty.
pub const NOT_REAL_TOL: f64 = 1e-8;
/// Relative cut below which an eigenvalue counts as zero.
pub const VERIFY_RANK_TOL: f64 = 1e-10;

/// Sequence `c` with `Gamma_c`, `Gamma~_c` of singular values `lambda`, `mu`
/// and angles `phi`, `theta`. Without `m`, the length is the smallest one
/// (at least the default) with discarded tail below `1e-12`.
pub fn build_symbol(
    lambda: &[f64],
    mu: &[f64],
    phi: &[f64],
    theta: &[f64],
    m: Option<usize>,
) -> Result<FourierSymbol> {
    let s = SpectralCoordinates::from_actions_angles(lambda.to_vec(), mu.to_vec(), phi.to_vec(), theta.to_vec())?;
    let model = inverse_model(&s)?;
    match m {
        Some(m) => reconstruct_coeffs(&model, m),
        None => reconstruct_auto(&model, DEFAULT_LENGTH, DEFAULT_TAIL_TOL),
    }
}

/// Real sequence whose symmetric `Gamma_c` has nonzero eigenvalues `zeta` and
/// `Gamma~_c` has nonzero eigenvalues `gamma`.
pub fn build_selfadjoint(zeta: &[f64], gamma: &[f64], m: Option<usize>) -> Result<FourierSymbol> {
    if zeta.len() != gamma.len() {
        return Err(Error::InterlacingViolated(format!(
            "{} values of zeta but {} of gamma",
            zeta.len(),
            gamma.len()
        )));
    }
    let sign_angle = |x: f64| if x > 0.0 { 0.0 } else { PI };
    let lambda: Vec<f64> = zeta.iter().map(|z| z.abs()).collect();
    let mu: Vec<f64> = gamma.iter().map(|g| g.abs()).collect();
    let phi: Vec<f64> = zeta.iter().map(|z| sign_angle(*z)).collect();
    let theta: Vec<f64> = gamma.iter().map(|g| sign_angle(*g)).collect();
    let c = build_symbol(&lambda, &mu, &phi, &theta, m)?;
    let residue = c.coeffs().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if residue > NOT_REAL_TOL {
        return Err(Error::NotReal { residue });
    }
    let tail = c.truncation_tol();
    let real = c.into_coeffs().into_iter().map(|z| Complex64::new(z.re, 0.0)).collect();
    FourierSymbol::with_tail(real, tail)
}

/// Outcome of comparing the spectra of `Gamma_c`, `Gamma~_c` with targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularValueReport {
    pub lambda_found: Vec<f64>,
    pub mu_found: Vec<f64>,
    pub max_deviation: f64,
    pub rank_agrees: bool,
    pub pass: bool,
}

fn positive_singular_values(p: &crate::linalg::CMatrix) -> Result<Vec<f64>> {
    let es = hermitian_eig(p)?;
    let top = es.values.first().copied().unwrap_or(0.0);
    Ok(es
        .values
        .iter()
        .take_while(|v| **v > VERIFY_RANK_TOL * top && **v > 0.0)
        .map(|v| v.sqrt())
        .collect())
}

fn compare(found: &[f64], target: &[f64]) -> f64 {
    let n = found.len().max(target.len());
    (0..n)
        .map(|i| (found.get(i).copied().unwrap_or(0.0) - target.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

pub fn verify_singular_values(c: &FourierSymbol, lambda: &[f64], mu: &[f64], tol: f64) -> Result<SingularValueReport> {
    let pair = build_pair(c);
    let lambda_found = positive_singular_values(&pair.h2)?;
    let mu_found = positive_singular_values(&pair.k2)?;
    let rank_agrees = lambda_found.len() == lambda.len() && mu_found.len() == mu.len();
    let max_deviation = compare(&lambda_found, lambda).max(compare(&mu_found, mu));
    Ok(SingularValueReport {
        pass: rank_agrees && max_deviation <= tol,
        lambda_found,
        mu_found,
        max_deviation,
        rank_agrees,
    })
}

/// Nonzero eigenvalues of the real symmetric `Gamma_c` and `Gamma~_c`,
/// ordered by decreasing modulus.
pub fn signed_eigenvalues(c: &FourierSymbol) -> Result<(Vec<f64>, Vec<f64>)> {
    let pair = build_pair(c);
    let signed = |g: &crate::linalg::CMatrix| -> Result<Vec<f64>> {
        let mut v = hermitian_eig(&g.map(|z| Complex64::new(z.re, 0.0)))?.values;
        v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        let top = v.first().map_or(0.0, |x| x.abs());
        Ok(v.into_iter().take_while(|x| x.abs() > VERIFY_RANK_TOL.sqrt() * top && *x != 0.0).collect())
    };
    Ok((signed(&pair.gamma)?, signed(&pair.gamma_shifted)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedSpectrumReport {
    pub zeta_found: Vec<f64>,
    pub gamma_found: Vec<f64>,
    pub max_deviation: f64,
    pub max_imaginary: f64,
    pub pass: bool,
}

pub fn verify_signed_eigenvalues(c: &FourierSymbol, zeta: &[f64], gamma: &[f64], tol: f64) -> Result<SignedSpectrumReport> {
    let (zeta_found, gamma_found) = signed_eigenvalues(c)?;
    let max_imaginary = c.coeffs().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let max_deviation = compare(&zeta_found, zeta).max(compare(&gamma_found, gamma));
    Ok(SignedSpectrumReport {
        pass: zeta_found.len() == zeta.len() && gamma_found.len() == gamma.len() && max_deviation <= tol,
        zeta_found,
        gamma_found,
        max_deviation,
        max_imaginary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(p: f64, m: usize) -> Vec<f64> {
        (0..m).map(|n| 1.5 * p.powi(n as i32)).collect()
    }

    #[test]
    fn single_mode_sequences() {
        for (theta, p) in [(0.0, 0.5), (PI, -0.5)] {
            let c = build_symbol(&[2.0], &[1.0], &[0.0], &[theta], Some(40)).unwrap();
            for (z, e) in c.coeffs().iter().zip(geometric(p, 40)) {
                assert!((z - Complex64::new(e, 0.0)).norm() < 1e-12);
            }
            let report = verify_singular_values(&c, &[2.0], &[1.0], 1e-10).unwrap();
            assert!(report.pass, "{report:?}");
        }
    }

    #[test]
    fn automatic_length_meets_tail() {
        let c = build_symbol(&[2.0], &[1.0], &[0.0], &[0.0], None).unwrap();
        assert!(c.len() >= 64);
        assert!(c.truncation_tol() <= 1e-12);
    }

    #[test]
    fn selfadjoint_signs() {
        let c = build_selfadjoint(&[2.0], &[1.0], Some(40)).unwrap();
        for (z, e) in c.coeffs().iter().zip(geometric(0.5, 40)) {
            assert_eq!(z.im, 0.0);
            assert!((z.re - e).abs() < 1e-12);
        }
        let c = build_selfadjoint(&[2.0], &[-1.0], Some(64)).unwrap();
        let (z, g) = signed_eigenvalues(&c).unwrap();
        assert!((z[0] - 2.0).abs() < 1e-10 && z.len() == 1);
        assert!((g[0] + 1.0).abs() < 1e-10 && g.len() == 1);
    }

    #[test]
    fn linear_symbol_spectrum() {
        let c = FourierSymbol::from_real(&[0.1, 1.0, 0.0, 0.0]).unwrap();
        let report = verify_singular_values(&c, &[1.105124922f64.sqrt(), 0.904875078f64.sqrt()], &[1.0], 1e-8).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn tampering_is_detected() {
        let c = build_symbol(&[2.0], &[1.0], &[0.0], &[0.0], Some(64)).unwrap();
        let mut coeffs = c.into_coeffs();
        coeffs[1] += 1e-3;
        let c = FourierSymbol::new(coeffs).unwrap();
        let report = verify_singular_values(&c, &[2.0], &[1.0], 1e-8).unwrap();
        assert!(!report.pass);
        assert!(report.max_deviation >= 1e-4);
    }

    #[test]
    fn bad_interlacing_is_rejected() {
        assert!(matches!(build_symbol(&[1.0], &[2.0], &[0.0], &[0.0], None), Err(Error::InterlacingViolated(_))));
        assert!(matches!(build_selfadjoint(&[1.0], &[-2.0], None), Err(Error::InterlacingViolated(_))));
    }
}
