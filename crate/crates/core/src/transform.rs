//! The explicit inverse of the action-angle map: `u(z) = X (I - zA)^{-1} Y`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hankel::{build_pair, SpectralCoordinates};
use crate::linalg::{lu_solve, spectral_radius, CMatrix, CVector, ONE, ZERO};
use crate::symbol::{FourierSymbol, RationalSymbol};

/// Guard distance `|1 - lambda^2 x|` for the generating function.
pub const POLE_GUARD: f64 = 1e-8;

/// Strict interlacing `lambda_1 > mu_1 > lambda_2 > ... > lambda_N > mu_N > 0`.
pub fn check_interlacing(lambda: &[f64], mu: &[f64]) -> Result<()> {
    if lambda.len() != mu.len() {
        return Err(Error::InterlacingViolated(format!(
            "{} values of lambda but {} of mu",
            lambda.len(),
            mu.len()
        )));
    }
    if lambda.is_empty() {
        return Err(Error::InterlacingViolated("empty spectrum".into()));
    }
    let mut prev = f64::INFINITY;
    for (j, (l, m)) in lambda.iter().zip(mu).enumerate() {
        if !(l.is_finite() && m.is_finite()) {
            return Err(Error::InterlacingViolated(format!("non-finite value at position {}", j + 1)));
        }
        if !(prev > *l && l > m && *m > 0.0) {
            return Err(Error::InterlacingViolated(format!(
                "need lambda_{0} > mu_{0} > 0 below the previous value, got lambda = {l}, mu = {m}",
                j + 1
            )));
        }
        prev = *m;
    }
    Ok(())
}

/// `nu_j` from the actions alone.
pub fn nu_from_actions(lambda: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
    check_interlacing(lambda, mu)?;
    let l2: Vec<f64> = lambda.iter().map(|x| x * x).collect();
    let m2: Vec<f64> = mu.iter().map(|x| x * x).collect();
    Ok((0..l2.len())
        .map(|j| {
            let mut v = 1.0 - m2[j] / l2[j];
            for k in 0..l2.len() {
                if k != j {
                    v *= (l2[j] - m2[k]) / (l2[j] - l2[k]);
                }
            }
            v.sqrt()
        })
        .collect())
}

/// `b_l = sum_j lambda_j^2 nu_j^2 / (lambda_j^2 - mu_l^2)^2`, the squared norm of `g_l`.
pub fn b_from_actions(lambda: &[f64], mu: &[f64], nu: &[f64]) -> Result<Vec<f64>> {
    check_interlacing(lambda, mu)?;
    if nu.len() != lambda.len() {
        return Err(Error::DimensionMismatch(format!("{} nu for {} lambda", nu.len(), lambda.len())));
    }
    Ok(mu
        .iter()
        .map(|m| {
            let m2 = m * m;
            lambda
                .iter()
                .zip(nu)
                .map(|(l, v)| {
                    let l2 = l * l;
                    l2 * v * v / ((l2 - m2) * (l2 - m2))
                })
                .sum()
        })
        .collect())
}

/// Product form `b_l = 1/(lambda_l^2 - mu_l^2) prod_{k != l} (mu_l^2 - mu_k^2)/(mu_l^2 - lambda_k^2)`.
pub fn b_product_form(lambda: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
    check_interlacing(lambda, mu)?;
    let l2: Vec<f64> = lambda.iter().map(|x| x * x).collect();
    let m2: Vec<f64> = mu.iter().map(|x| x * x).collect();
    Ok((0..l2.len())
        .map(|l| {
            let mut b = 1.0 / (l2[l] - m2[l]);
            for k in 0..l2.len() {
                if k != l {
                    b *= (m2[l] - m2[k]) / (m2[l] - l2[k]);
                }
            }
            b
        })
        .collect())
}

/// Finite-dimensional model `(X, A, Y)` of the compressed shift.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseModel {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub a: CMatrix,
    pub b: Vec<f64>,
}

impl InverseModel {
    pub fn rank(&self) -> usize {
        self.x.len()
    }

    /// `sigma = tr A`.
    pub fn trace(&self) -> Complex64 {
        self.a.trace()
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.a)
    }

    fn check_radius(&self) -> Result<f64> {
        let radius = self.spectral_radius();
        if !(radius < 1.0) {
            return Err(Error::SpectralRadiusExceeded { radius });
        }
        Ok(radius)
    }

    /// `u(z) = X (I - zA)^{-1} Y`.
    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        let n = self.rank();
        let m = CMatrix::identity(n, n) - &self.a * z;
        let y = CVector::from_column_slice(&self.y);
        let w = lu_solve(m, &y, 1e-14)?;
        Some(self.x.iter().zip(w.iter()).map(|(a, b)| a * b).sum())
    }
}

impl Serialize for InverseModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Complex64>> = (0..self.a.nrows())
            .map(|i| (0..self.a.ncols()).map(|j| self.a[(i, j)]).collect())
            .collect();
        let mut st = s.serialize_struct("InverseModel", 3)?;
        st.serialize_field("X", &self.x)?;
        st.serialize_field("Y", &self.y)?;
        st.serialize_field("A", &rows)?;
        st.end()
    }
}

/// Assemble `X`, `Y`, `A` term by term. `nu` is always taken from the closed
/// form in the actions, so the model depends on `(lambda, mu, phi, theta)` only.
pub fn inverse_model(s: &SpectralCoordinates) -> Result<InverseModel> {
    let n = s.rank();
    if s.phi.len() != n || s.theta.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "rank {n} with {} phi and {} theta angles",
            s.phi.len(),
            s.theta.len()
        )));
    }
    let lambda = &s.lambda;
    let mu = &s.mu;
    let nu = nu_from_actions(lambda, mu)?;
    let b = b_from_actions(lambda, mu, &nu)?;
    let l2: Vec<f64> = lambda.iter().map(|x| x * x).collect();
    let m2: Vec<f64> = mu.iter().map(|x| x * x).collect();

    let x = (0..n)
        .map(|j| Complex64::from_polar(lambda[j] * nu[j], -s.phi[j]))
        .collect();
    let y = nu.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let mut a = CMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let mut acc = ZERO;
            for l in 0..n {
                let w = lambda[k] * nu[j] * nu[k] * mu[l] / (b[l] * (l2[j] - m2[l]) * (l2[k] - m2[l]));
                acc += Complex64::from_polar(w, -(s.phi[k] + s.theta[l]));
            }
            a[(j, k)] = acc;
        }
    }
    Ok(InverseModel { x, y, a, b })
}

/// `c_n = X A^n Y` for `n < m`. The recorded truncation tolerance is the
/// sum of the next terms of the sequence until they fall below round-off.
pub fn reconstruct_coeffs(model: &InverseModel, m: usize) -> Result<FourierSymbol> {
    let radius = model.check_radius()?;
    let mut v = CVector::from_column_slice(&model.y);
    let mut c = Vec::with_capacity(m);
    let dot = |v: &CVector| -> Complex64 { model.x.iter().zip(v.iter()).map(|(a, b)| a * b).sum() };
    for _ in 0..m.max(1) {
        c.push(dot(&v));
        v = &model.a * v;
    }
    let tail = tail_sum(model, v, radius, &dot);
    FourierSymbol::with_tail(c, tail)
}

fn tail_sum(model: &InverseModel, mut v: CVector, radius: f64, dot: &dyn Fn(&CVector) -> Complex64) -> f64 {
    let head = model.x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        * model.y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut tail = 0.0;
    let mut geo = 1.0;
    for _ in 0..100_000 {
        let term = dot(&v).norm_sqr();
        tail += term;
        v = &model.a * v;
        geo *= radius * radius;
        if geo * head * head < 1e-34 && term < 1e-34 {
            break;
        }
    }
    tail
}

/// Smallest `m >= min_len` whose discarded tail is at most `tol`.
pub fn reconstruct_auto(model: &InverseModel, min_len: usize, tol: f64) -> Result<FourierSymbol> {
    let radius = model.check_radius()?;
    let mut v = CVector::from_column_slice(&model.y);
    let dot = |v: &CVector| -> Complex64 { model.x.iter().zip(v.iter()).map(|(a, b)| a * b).sum() };
    // Generate generously, then cut where the remaining tail is below tol.
    let mut c = Vec::new();
    let mut geo = 1.0;
    let head = model.x.iter().chain(&model.y).map(|z| z.norm_sqr()).sum::<f64>();
    while c.len() < min_len.max(1) || !(geo * head * head < 1e-36) {
        c.push(dot(&v));
        v = &model.a * v;
        geo *= radius * radius;
        if c.len() >= 1 << 16 {
            break;
        }
    }
    let mut tail = tail_sum(model, v, radius, &dot);
    let mut m = c.len();
    while m > min_len.max(1) && tail + c[m - 1].norm_sqr() <= tol {
        m -= 1;
        tail += c[m].norm_sqr();
    }
    c.truncate(m);
    FourierSymbol::with_tail(c, tail)
}

/// Characteristic data by Faddeev-LeVerrier: returns `(den, adjugate terms)`,
/// where `det(I - zA) = sum_k den[k] z^k` and `adj(I - zA) = sum_k M_{k+1} z^k`.
fn faddeev_leverrier(a: &CMatrix) -> (Vec<Complex64>, Vec<CMatrix>) {
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    // p(lambda) = det(lambda I - A) = sum_k p[k] lambda^k.
    let mut p = vec![ZERO; n + 1];
    p[n] = ONE;
    let mut mk = CMatrix::zeros(n, n);
    let mut adj = Vec::with_capacity(n);
    for k in 1..=n {
        mk = a * &mk + &id * p[n - k + 1];
        p[n - k] = -(a * &mk).trace() / k as f64;
        adj.push(mk.clone());
    }
    let den = (0..=n).map(|k| p[n - k]).collect();
    (den, adj)
}

/// `A(z)/B(z)` with `B = det(I - zA)` and `A = X adj(I - zA) Y`.
pub fn reconstruct_rational(model: &InverseModel) -> Result<RationalSymbol> {
    model.check_radius()?;
    let (den, adj) = faddeev_leverrier(&model.a);
    let y = CVector::from_column_slice(&model.y);
    let num = adj
        .iter()
        .map(|mk| {
            let w = mk * &y;
            model.x.iter().zip(w.iter()).map(|(a, b)| a * b).sum()
        })
        .collect();
    RationalSymbol::new(num, den)
}

/// Denominator of degree `n` fitted to the recursion `sum_i d_i c_{k-i} = 0`
/// (`k >= n`) in the least-squares sense, numerator from the first `n` terms.
/// Works for non-generic symbols too.
pub fn rational_from_coeffs(u: &FourierSymbol, n: usize) -> Result<RationalSymbol> {
    let c = u.coeffs();
    if n == 0 || c.len() < 2 * n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "need at least {} coefficients for rank {n}, got {}",
            2 * n + 1,
            c.len()
        )));
    }
    let rows = c.len() - n;
    let mat = DMatrix::from_fn(rows, n, |r, i| c[r + n - 1 - i]);
    let rhs = CVector::from_fn(rows, |r, _| -c[r + n]);
    let d = mat
        .svd(true, true)
        .solve(&rhs, 1e-13)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    let mut den = vec![ONE];
    den.extend(d.iter().copied());
    let num = (0..n)
        .map(|k| (0..=k).map(|i| den[i] * c[k - i]).sum())
        .collect();
    RationalSymbol::new(num, den)
}

/// `J(x) = ((I - x H_u^2)^{-1} 1 | 1)` by a dense LU solve.
pub fn generating_j(u: &FourierSymbol, x: f64) -> Result<f64> {
    let h2 = build_pair(u).h2;
    generating_j_with(&h2, x)
}

/// As [`generating_j`], reusing an already assembled `H_u^2`.
pub fn generating_j_with(h2: &CMatrix, x: f64) -> Result<f64> {
    let m = h2.nrows();
    let sys = CMatrix::identity(m, m) - h2 * Complex64::new(x, 0.0);
    let mut rhs = CVector::zeros(m);
    rhs[0] = ONE;
    match lu_solve(sys, &rhs, POLE_GUARD) {
        Some(w) => Ok(w[0].re),
        None => Err(Error::NearPole { x, pole: x }),
    }
}

fn guard(lambda: &[f64], x: f64) -> Result<()> {
    for l in lambda {
        let l2 = l * l;
        if (1.0 - l2 * x).abs() < POLE_GUARD {
            return Err(Error::NearPole { x, pole: 1.0 / l2 });
        }
    }
    Ok(())
}

/// `J(x) = prod_j (1 - mu_j^2 x) / (1 - lambda_j^2 x)`.
pub fn generating_j_product(lambda: &[f64], mu: &[f64], x: f64) -> Result<f64> {
    guard(lambda, x)?;
    Ok(lambda
        .iter()
        .zip(mu)
        .map(|(l, m)| (1.0 - m * m * x) / (1.0 - l * l * x))
        .product())
}

/// `J(x) = 1 + x sum_j lambda_j^2 nu_j^2 / (1 - lambda_j^2 x)`.
pub fn generating_j_sum(lambda: &[f64], nu: &[f64], x: f64) -> Result<f64> {
    guard(lambda, x)?;
    Ok(1.0
        + x * lambda
            .iter()
            .zip(nu)
            .map(|(l, v)| l * l * v * v / (1.0 - l * l * x))
            .sum::<f64>())
}

/// `J(x) = 1 - sum nu_j^2 + sum nu_j^2 / (1 - lambda_j^2 x)`.
pub fn generating_j_partial_fractions(lambda: &[f64], nu: &[f64], x: f64) -> Result<f64> {
    guard(lambda, x)?;
    let s: f64 = nu.iter().map(|v| v * v).sum();
    Ok(1.0 - s
        + lambda
            .iter()
            .zip(nu)
            .map(|(l, v)| v * v / (1.0 - l * l * x))
            .sum::<f64>())
}

/// `J'(x)/J(x) = sum_j lambda_j^2/(1 - lambda_j^2 x) - mu_j^2/(1 - mu_j^2 x)`.
pub fn log_derivative_trace(lambda: &[f64], mu: &[f64], x: f64) -> Result<f64> {
    guard(lambda, x)?;
    guard(mu, x)?;
    Ok(lambda
        .iter()
        .zip(mu)
        .map(|(l, m)| {
            let (l2, m2) = (l * l, m * m);
            l2 / (1.0 - l2 * x) - m2 / (1.0 - m2 * x)
        })
        .sum())
}

/// Common value of `J_{2n}` on the torus with actions `I_j = 2 lambda_j^2`,
/// `L_j = 2 mu_j^2`, for `n = 1..=n_max`.
pub fn torus_moments(lambda: &[f64], mu: &[f64], n_max: usize) -> Result<Vec<f64>> {
    check_interlacing(lambda, mu)?;
    let i: Vec<f64> = lambda.iter().map(|l| 2.0 * l * l).collect();
    let l: Vec<f64> = mu.iter().map(|m| 2.0 * m * m).collect();
    Ok((1..=n_max)
        .map(|n| {
            (0..i.len())
                .map(|j| {
                    let mut term = (i[j] / 2.0).powi(n as i32) * (1.0 - l[j] / i[j]);
                    for k in 0..i.len() {
                        if k != j {
                            term *= (l[k] - i[j]) / (i[k] - i[j]);
                        }
                    }
                    term
                })
                .sum()
        })
        .collect())
}
