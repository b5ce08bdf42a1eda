//! Stability and instability computations around traveling and stationary waves.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::evolve_angles;
use crate::hankel::{build_pair, SpectralCoordinates};
use crate::linalg::{convolve, inner, ONE, ZERO};
use crate::symbol::{expand_rational, FourierSymbol, RationalSymbol, DEFAULT_TAIL_TOL};
use crate::transform::{b_from_actions, inverse_model, nu_from_actions};

/// Minimal separation of beat frequencies and of phase velocities.
pub const FREQUENCY_TOL: f64 = 1e-10;

/// Coefficients of `prod_j (z - conj(p_j)) / (1 - p_j z)`.
pub fn blaschke_rational(p: &[Complex64]) -> Result<RationalSymbol> {
    for pj in p {
        if !(pj.norm() < 1.0) {
            return Err(Error::PoleOutsideDisc { modulus: pj.norm() });
        }
    }
    let mut num = vec![ONE];
    let mut den = vec![ONE];
    for pj in p {
        num = convolve(&num, &[-pj.conj(), ONE]);
        den = convolve(&den, &[ONE, -pj]);
    }
    RationalSymbol::new(num, den)
}

pub fn blaschke_symbol(p: &[Complex64], m: usize) -> Result<FourierSymbol> {
    expand_rational(&blaschke_rational(p)?, m, DEFAULT_TAIL_TOL)
}

/// `q = (1|phi) = (-1)^{N-1} p_1 ... p_{N-1}` for `N - 1 = p.len()` factors.
pub fn blaschke_q(p: &[Complex64]) -> Complex64 {
    let prod: Complex64 = p.iter().product();
    if p.len() % 2 == 1 {
        -prod
    } else {
        prod
    }
}

/// `phi + eps` after the rotation `p_j -> e^{i gamma} p_j` that makes `q >= 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbedBlaschke {
    pub symbol: FourierSymbol,
    pub q: f64,
    pub epsilon: f64,
    /// Rotation angle applied to the parameters.
    pub rotation: f64,
    pub p_rotated: Vec<Complex64>,
}

pub fn perturbed_blaschke(p: &[Complex64], eps: f64, m: usize) -> Result<PerturbedBlaschke> {
    if p.is_empty() {
        return Err(Error::InvalidSymbol("need at least one Blaschke factor".into()));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidSymbol(format!("perturbation must be nonnegative, got {eps}")));
    }
    let q = blaschke_q(p);
    let rotation = if q.norm() > 0.0 { -q.arg() / p.len() as f64 } else { 0.0 };
    let turn = Complex64::from_polar(1.0, rotation);
    let p_rotated: Vec<Complex64> = p.iter().map(|pj| pj * turn).collect();
    let mut coeffs = blaschke_symbol(&p_rotated, m)?;
    let tail = coeffs.truncation_tol();
    let mut c = std::mem::replace(&mut coeffs, FourierSymbol::new(vec![ZERO])?).into_coeffs();
    c[0] += eps;
    Ok(PerturbedBlaschke {
        symbol: FourierSymbol::with_tail(c, tail)?,
        q: blaschke_q(&p_rotated).re.max(0.0),
        epsilon: eps,
        rotation,
        p_rotated,
    })
}

/// `r_+-` = `1 + eps (q + eps/2 +- sqrt(1 + eps q + eps^2/4))`.
pub fn beat_eigenvalues(q: f64, eps: f64) -> (f64, f64) {
    let root = (1.0 + eps * q + eps * eps / 4.0).sqrt();
    (1.0 + eps * (q + eps / 2.0 + root), 1.0 + eps * (q + eps / 2.0 - root))
}

/// `gamma_+-` from `gamma_+ + gamma_- = q + eps` and
/// `gamma_+/r_+ + gamma_-/r_- = q/(1 + eps q)`.
pub fn beat_coefficients(q: f64, eps: f64) -> Result<(f64, f64)> {
    let (rp, rm) = beat_eigenvalues(q, eps);
    let gap = rp - rm;
    if gap < 1e-12 {
        return Err(Error::DegenerateFrequencies { gap });
    }
    let s = q + eps;
    let w = q / (1.0 + eps * q);
    // gamma_+ (1/r_+ - 1/r_-) = w - s/r_-
    let gp = (w - s / rm) / (1.0 / rp - 1.0 / rm);
    Ok((gp, s - gp))
}

/// `J_1(t) = (u(t)|1) = gamma_+ e^{-i r_+ t} + gamma_- e^{-i r_- t}`.
pub fn j1_closed_form(q: f64, eps: f64, t: f64) -> Result<Complex64> {
    let (rp, rm) = beat_eigenvalues(q, eps);
    let (gp, gm) = beat_coefficients(q, eps)?;
    Ok(Complex64::from_polar(gp, -rp * t) + Complex64::from_polar(gm, -rm * t))
}

/// `f(s) = (1 + q^2)/2 - (1 - q^2) sin(2s)/(4s)`, the limit of the mean of
/// `|J_1|^2` over `[0, s/eps]`.
pub fn average_j1_sq(q: f64, s: f64) -> f64 {
    (1.0 + q * q) / 2.0 - (1.0 - q * q) * (2.0 * s).sin() / (4.0 * s)
}

/// `(eps/s) int_0^{s/eps} |J_1|^2 dt` by the trapezoid rule with `intervals` steps.
pub fn empirical_average_j1_sq(q: f64, eps: f64, s: f64, intervals: usize) -> Result<f64> {
    let span = s / eps;
    let h = span / intervals as f64;
    let mut acc = 0.0;
    for k in 0..=intervals {
        let w = if k == 0 || k == intervals { 0.5 } else { 1.0 };
        acc += w * j1_closed_form(q, eps, k as f64 * h)?.norm_sqr();
    }
    Ok(acc * h / span)
}

/// `sup_{t <= s/eps} | |J_1(t)|^2 - q^2 |` on a grid of `samples + 1` points.
pub fn j1_excursion(q: f64, eps: f64, s: f64, samples: usize) -> Result<f64> {
    let span = s / eps;
    let mut worst = 0.0f64;
    for k in 0..=samples {
        let t = span * k as f64 / samples as f64;
        worst = worst.max((j1_closed_form(q, eps, t)?.norm_sqr() - q * q).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstabilityRun {
    pub q: f64,
    pub epsilon: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub times: Vec<f64>,
    pub j1_series: Vec<Complex64>,
    /// `(s, empirical mean of |J_1|^2 over [0, s/eps])`.
    pub averages: Vec<(f64, f64)>,
}

/// Closed-form `J_1` on `[0, horizon/eps]` sampled at `samples + 1` points.
pub fn instability_run(q: f64, eps: f64, horizon: f64, samples: usize) -> Result<InstabilityRun> {
    if !(0.0..1.0).contains(&q) || !(eps > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidSymbol(format!(
            "need 0 <= q < 1, eps > 0, horizon > 0; got q = {q}, eps = {eps}, s = {horizon}"
        )));
    }
    let (r_plus, r_minus) = beat_eigenvalues(q, eps);
    let (gamma_plus, gamma_minus) = beat_coefficients(q, eps)?;
    let span = horizon / eps;
    let samples = samples.max(1);
    let times: Vec<f64> = (0..=samples).map(|k| span * k as f64 / samples as f64).collect();
    let j1_series = times
        .iter()
        .map(|t| j1_closed_form(q, eps, *t))
        .collect::<Result<Vec<_>>>()?;
    let avg = empirical_average_j1_sq(q, eps, horizon, samples)?;
    Ok(InstabilityRun {
        q,
        epsilon: eps,
        r_plus,
        r_minus,
        gamma_plus,
        gamma_minus,
        times,
        j1_series,
        averages: vec![(horizon, avg)],
    })
}

/// Refuse spectra where two phase velocities `lambda_j^2 - mu_l^2` coincide.
pub fn check_resonance(s: &SpectralCoordinates) -> Result<()> {
    let mut freq = Vec::new();
    for l in &s.lambda {
        for m in &s.mu {
            freq.push(l * l - m * m);
        }
    }
    let scale = s.lambda.first().map_or(1.0, |l| (l * l).max(1.0));
    for i in 0..freq.len() {
        for j in (i + 1)..freq.len() {
            if (freq[i] - freq[j]).abs() < FREQUENCY_TOL * scale {
                return Err(Error::ResonantFrequencies { a: freq[i], b: freq[j] });
            }
        }
    }
    Ok(())
}

/// `sigma(t) = tr A(t)` along the exact flow.
pub fn sigma_drift(s: &SpectralCoordinates, t_grid: &[f64]) -> Result<Vec<Complex64>> {
    check_resonance(s)?;
    t_grid
        .iter()
        .map(|t| Ok(inverse_model(&evolve_angles(s, *t))?.trace()))
        .collect()
}

/// Long-time mean of `|sigma|^2`:
/// `sum_{j,l} lambda_j^2 nu_j^4 mu_l^2 / (b_l^2 (lambda_j^2 - mu_l^2)^4)`.
pub fn sigma_mean_limit(s: &SpectralCoordinates) -> Result<f64> {
    check_resonance(s)?;
    let nu = nu_from_actions(&s.lambda, &s.mu)?;
    let b = b_from_actions(&s.lambda, &s.mu, &nu)?;
    let mut acc = 0.0;
    for (l, v) in s.lambda.iter().zip(&nu) {
        for (m, bl) in s.mu.iter().zip(&b) {
            let d = l * l - m * m;
            acc += l * l * v.powi(4) * m * m / (bl * bl * d.powi(4));
        }
    }
    Ok(acc)
}

/// `(1/T) int_0^T |sigma|^2 dt` by the trapezoid rule.
pub fn sigma_time_average(s: &SpectralCoordinates, horizon: f64, intervals: usize) -> Result<f64> {
    let h = horizon / intervals as f64;
    let grid: Vec<f64> = (0..=intervals).map(|k| k as f64 * h).collect();
    let series = sigma_drift(s, &grid)?;
    let mut acc = 0.0;
    for (k, z) in series.iter().enumerate() {
        let w = if k == 0 || k == intervals { 0.5 } else { 1.0 };
        acc += w * z.norm_sqr();
    }
    Ok(acc * h / horizon)
}

/// `z^l / (1 - p^N z^N)`, a traveling wave on which `sigma` vanishes for `N >= 2`.
pub fn traveling_wave_rational(ell: usize, n: usize, p: Complex64) -> Result<RationalSymbol> {
    if ell >= n {
        return Err(Error::InvalidSymbol(format!("need l < N, got l = {ell}, N = {n}")));
    }
    if !(p.norm() < 1.0) {
        return Err(Error::PoleOutsideDisc { modulus: p.norm() });
    }
    let mut num = vec![ZERO; ell + 1];
    num[ell] = ONE;
    let mut den = vec![ZERO; n + 1];
    den[0] = ONE;
    den[n] = -p.powu(n as u32);
    RationalSymbol::new(num, den)
}

/// `sigma_1` of the Krylov system `(A^{N+k}e|e) = sum_j (-1)^{j-1} sigma_j (A^{N-j+k}e|e)`
/// by Cramer's rule; `moments[k] = (A^k e|e)` for `k = 0..2N-1`.
pub fn trace_lower_bound(moments: &[f64], n: usize) -> Result<f64> {
    if n == 0 || moments.len() < 2 * n {
        return Err(Error::DimensionMismatch(format!(
            "need {} moments for N = {n}, got {}",
            2 * n,
            moments.len()
        )));
    }
    let gram = DMatrix::from_fn(n, n, |k, l| moments[k + l]);
    let mut replaced = gram.clone();
    for k in 0..n {
        replaced[(k, n - 1)] = moments[k + n];
    }
    let det = gram.determinant();
    let scale: f64 = (0..n).map(|k| gram.row(k).iter().map(|x| x.abs()).fold(0.0, f64::max)).product();
    if !(det.abs() > 1e-14 * scale) {
        return Err(Error::SingularGram);
    }
    Ok(replaced.determinant() / det)
}

/// `(K_u^{2k} u|u)` for `k < count`, from the dense shifted Hankel matrix.
pub fn krylov_moments(u: &FourierSymbol, count: usize) -> Vec<f64> {
    let k2 = build_pair(u).k2;
    let c = u.coeffs();
    let mut v = nalgebra::DVector::from_column_slice(c);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(inner(v.as_slice(), c).re);
        v = &k2 * v;
    }
    out
}

/// The same moments from `J_2, J_4, ...` alone: with `Q(x) = sum J_{2(n+1)} x^n`
/// and `J = 1 + xQ`, `sum_k (K_u^{2k} u|u) x^k = Q - x Q^2 / J`.
pub fn krylov_moments_from_j(j: &[f64], count: usize) -> Result<Vec<f64>> {
    if j.len() < count {
        return Err(Error::DimensionMismatch(format!("need {count} moments J_2.., got {}", j.len())));
    }
    let q: Vec<f64> = j[..count].to_vec();
    // Series of J = 1 + x Q and of Q^2, truncated to `count` terms.
    let mut jser = vec![0.0; count];
    jser[0] = 1.0;
    jser[1..count].copy_from_slice(&q[..count - 1]);
    let mut q2 = vec![0.0; count];
    for a in 0..count {
        for b in 0..count - a {
            q2[a + b] += q[a] * q[b];
        }
    }
    // r = Q^2 / J by series division.
    let mut r = vec![0.0; count];
    for k in 0..count {
        let mut acc = q2[k];
        for i in 1..=k {
            acc -= jser[i] * r[k - i];
        }
        r[k] = acc;
    }
    Ok((0..count).map(|k| q[k] - if k > 0 { r[k - 1] } else { 0.0 }).collect())
}

/// `M(u) >= sigma_1` with `A = K_u^2`, `e = u`, rank `n`.
pub fn momentum_lower_bound(u: &FourierSymbol, n: usize) -> Result<f64> {
    trace_lower_bound(&krylov_moments(u, 2 * n), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cx(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn blaschke_examples() {
        let u = blaschke_symbol(&[ZERO], 8).unwrap();
        assert!((u.coeff(1) - ONE).norm() < 1e-15);
        assert!(u.coeff(0).norm() < 1e-15);

        let u = blaschke_symbol(&[cx(0.5)], 40).unwrap();
        assert!((u.coeff(0) - cx(-0.5)).norm() < 1e-15);
        for n in 1..40 {
            assert!((u.coeff(n) - cx(0.75 * 0.5f64.powi(n as i32 - 1))).norm() < 1e-15);
        }
        assert!((blaschke_q(&[cx(0.5)]) - cx(-0.5)).norm() < 1e-15);
    }

    #[test]
    fn rotation_makes_q_nonnegative() {
        let run = perturbed_blaschke(&[cx(0.5)], 0.0, 40).unwrap();
        assert!((run.q - 0.5).abs() < 1e-15);
        assert!((run.p_rotated[0] - cx(-0.5)).norm() < 1e-15);
        assert!((run.symbol.coeff(0) - cx(0.5)).norm() < 1e-15);
        assert!((run.symbol.coeff(2) - cx(-0.375)).norm() < 1e-15);

        let p = [Complex64::new(0.3, 0.4), Complex64::new(-0.2, 0.1)];
        let run = perturbed_blaschke(&p, 0.1, 64).unwrap();
        let q = blaschke_q(&run.p_rotated);
        assert!(q.im.abs() < 1e-15 && q.re > 0.0);
        assert!((run.symbol.coeff(0) - cx(q.re + 0.1)).norm() < 1e-14);
    }

    #[test]
    fn linear_perturbation() {
        let run = perturbed_blaschke(&[ZERO], 0.1, 4).unwrap();
        assert_eq!(run.q, 0.0);
        let c = run.symbol.coeffs();
        assert!((c[0] - cx(0.1)).norm() < 1e-15 && (c[1] - ONE).norm() < 1e-15);
        assert!(c[2].norm() < 1e-15 && c[3].norm() < 1e-15);
    }

    #[test]
    fn beat_closed_form() {
        let (rp, rm) = beat_eigenvalues(0.0, 0.1);
        assert!((rp - 1.105124922).abs() < 1e-9);
        assert!((rm - 0.904875078).abs() < 1e-9);
        for (q, eps) in [(0.0, 0.1), (0.3, 0.05), (0.9, 0.2)] {
            let (rp, rm) = beat_eigenvalues(q, eps);
            assert!((rp * rm - (1.0 + eps * q).powi(2)).abs() < 1e-12);
            assert!((rp + rm - (2.0 + 2.0 * eps * q + eps * eps)).abs() < 1e-12);
        }
        for q in [0.0, 0.5] {
            let eps = 1e-3;
            let (rp, rm) = beat_eigenvalues(q, eps);
            assert!((rp - (1.0 + eps * (q + 1.0))).abs() <= eps * eps);
            assert!((rm - (1.0 + eps * (q - 1.0))).abs() <= eps * eps);
        }
    }

    #[test]
    fn j1_initial_value_and_coefficients() {
        for (q, eps) in [(0.0, 0.1), (0.4, 0.01)] {
            assert!((j1_closed_form(q, eps, 0.0).unwrap() - cx(q + eps)).norm() < 1e-14);
        }
        let (gp, gm) = beat_coefficients(0.0, 0.1).unwrap();
        assert!((gp - 0.5).abs() <= 0.1 && (gm + 0.5).abs() <= 0.1);
        assert!(matches!(beat_coefficients(0.0, 0.0), Err(Error::DegenerateFrequencies { .. })));
    }

    #[test]
    fn average_formula() {
        assert!(average_j1_sq(0.0, 1e-9).abs() < 1e-12);
        assert!((average_j1_sq(0.0, PI / 2.0) - 0.5).abs() < 1e-15);
        let emp = empirical_average_j1_sq(0.0, 1e-3, 1.0, 1000).unwrap();
        assert!((emp - average_j1_sq(0.0, 1.0)).abs() <= 1e-2);
    }

    #[test]
    fn trace_bound_single_mode() {
        let u = FourierSymbol::from_real(&(0..64).map(|k| 0.5f64.powi(k)).collect::<Vec<_>>()).unwrap();
        let bound = momentum_lower_bound(&u, 1).unwrap();
        assert!((bound - 4.0 / 9.0).abs() < 1e-12);
        assert!((u.momentum() - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn krylov_moments_from_generating_function() {
        let u = FourierSymbol::from_real(&(0..64).map(|k| 0.5f64.powi(k)).collect::<Vec<_>>()).unwrap();
        let j = crate::symbol::functionals(&u, 4).moments;
        let from_j = krylov_moments_from_j(&j, 4).unwrap();
        let direct = krylov_moments(&u, 4);
        for k in 0..4 {
            let expect = 4.0 / 3.0 * (4.0f64 / 9.0).powi(k as i32);
            assert!((direct[k] - expect).abs() < 1e-12);
            assert!((from_j[k] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_gram_is_reported() {
        assert!(matches!(trace_lower_bound(&[0.0, 0.0], 1), Err(Error::SingularGram)));
        assert!(matches!(trace_lower_bound(&[1.0, 1.0, 1.0, 1.0], 2), Err(Error::SingularGram)));
    }

    #[test]
    fn resonance_guard() {
        let coords = |l2: [f64; 2], m2: [f64; 2]| {
            SpectralCoordinates::from_actions_angles(
                l2.iter().map(|x| x.sqrt()).collect(),
                m2.iter().map(|x| x.sqrt()).collect(),
                vec![0.0; 2],
                vec![0.0; 2],
            )
            .unwrap()
        };
        // velocities 1, 3.5, -1, 1.5
        assert!(check_resonance(&coords([4.0, 2.0], [3.0, 0.5])).is_ok());
        // 4 - 3 = 2 - 1
        assert!(matches!(
            check_resonance(&coords([4.0, 2.0], [3.0, 1.0])),
            Err(Error::ResonantFrequencies { .. })
        ));
    }
}
