//! Hardy-space symbols: truncated Fourier sequences and rational functions.
//!
//! A symbol `u = sum_k c_k e^{ik theta}` is stored by its first `M`
//! coefficients. Rational symbols `A/B` with `B(0) = 1` and no roots of `B`
//! in the closed unit disc are the finite-rank (Kronecker) class and are
//! expanded into Fourier sequences by power-series division.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel;
use crate::linalg::{convolve, norm_sq, poly_eval, poly_roots, ZERO};

/// Root moduli must exceed `1 + ROOT_MARGIN`.
pub const ROOT_MARGIN: f64 = 1e-8;
/// Default bound on the discarded l2 tail.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
/// Default minimum truncation length.
pub const DEFAULT_LENGTH: usize = 64;

const MAX_LENGTH: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFourierSymbol")]
pub struct FourierSymbol {
    coeffs: Vec<Complex64>,
    truncation_tol: f64,
}

#[derive(Deserialize)]
struct RawFourierSymbol {
    coeffs: Vec<Complex64>,
    #[serde(default)]
    truncation_tol: f64,
}

impl TryFrom<RawFourierSymbol> for FourierSymbol {
    type Error = Error;

    fn try_from(raw: RawFourierSymbol) -> Result<Self> {
        FourierSymbol::with_tail(raw.coeffs, raw.truncation_tol)
    }
}

impl FourierSymbol {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::with_tail(coeffs, 0.0)
    }

    pub fn with_tail(coeffs: Vec<Complex64>, truncation_tol: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidSymbol("no coefficients".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidSymbol("non-finite coefficient".into()));
        }
        if !(truncation_tol >= 0.0) || !truncation_tol.is_finite() {
            return Err(Error::InvalidSymbol(format!(
                "truncation_tol must be a finite nonnegative number, got {truncation_tol}"
            )));
        }
        Ok(Self { coeffs, truncation_tol })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn truncation_tol(&self) -> f64 {
        self.truncation_tol
    }

    /// Coefficient `c_k`, zero beyond the stored range.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// Horner evaluation of `sum c_k z^k`. For `|z| <= 1` the truncation error
    /// is at most `sqrt(truncation_tol) / sqrt(1 - |z|^2)`; it is not reported.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        poly_eval(&self.coeffs, z)
    }

    /// `||u||^2 = J_2(u)`.
    pub fn l2_norm_sq(&self) -> f64 {
        norm_sq(&self.coeffs)
    }

    /// `M(u) = sum k |c_k|^2`.
    pub fn momentum(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| k as f64 * c.norm_sqr())
            .sum()
    }

    /// Copy zero-padded or cut to length `m`.
    pub fn resized(&self, m: usize) -> FourierSymbol {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(m.max(1), ZERO);
        let dropped: f64 = self.coeffs.iter().skip(m).map(|c| c.norm_sqr()).sum();
        FourierSymbol { coeffs, truncation_tol: self.truncation_tol + dropped }
    }

    /// l2 distance, treating missing coefficients as zero.
    pub fn distance(&self, other: &FourierSymbol) -> f64 {
        let n = self.len().max(other.len());
        (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, a: Complex64) -> FourierSymbol {
        FourierSymbol {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            truncation_tol: self.truncation_tol * a.norm_sqr(),
        }
    }
}

/// `u = A/B` with `B(0) = 1` and `B` free of roots in `|z| <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRationalSymbol")]
pub struct RationalSymbol {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
}

#[derive(Deserialize)]
struct RawRationalSymbol {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
}

impl TryFrom<RawRationalSymbol> for RationalSymbol {
    type Error = Error;

    fn try_from(raw: RawRationalSymbol) -> Result<Self> {
        RationalSymbol::new(raw.num, raw.den)
    }
}

fn trim(mut p: Vec<Complex64>) -> Vec<Complex64> {
    while p.len() > 1 && p.last() == Some(&ZERO) {
        p.pop();
    }
    p
}

impl RationalSymbol {
    /// Validates and normalizes so that the denominator has constant term one.
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        let num = trim(num);
        let den = trim(den);
        if num.is_empty() || den.is_empty() {
            return Err(Error::InvalidSymbol("empty polynomial".into()));
        }
        if num.iter().chain(&den).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidSymbol("non-finite polynomial coefficient".into()));
        }
        if num.iter().all(|c| *c == ZERO) {
            return Err(Error::InvalidSymbol("zero numerator".into()));
        }
        let b0 = den[0];
        if b0.norm() == 0.0 {
            return Err(Error::DenominatorRootInsideDisc { modulus: 0.0 });
        }
        let num: Vec<Complex64> = num.iter().map(|c| c / b0).collect();
        let den: Vec<Complex64> = den.iter().map(|c| c / b0).collect();

        let roots = poly_roots(&den);
        if let Some(m) = roots.iter().map(|r| r.norm()).find(|m| *m <= 1.0 + ROOT_MARGIN) {
            return Err(Error::DenominatorRootInsideDisc { modulus: m });
        }
        // Common roots: A vanishes (relative to its size on the root circle) at a root of B.
        let scale: f64 = num.iter().map(|c| c.norm()).sum();
        for r in &roots {
            let rn = r.norm().max(1.0);
            let size = scale * rn.powi(num.len() as i32 - 1);
            if poly_eval(&num, *r).norm() <= 1e-10 * size {
                return Err(Error::InvalidSymbol(format!(
                    "numerator and denominator share the root {r}"
                )));
            }
        }
        Ok(Self { num, den })
    }

    pub fn from_real(num: &[f64], den: &[f64]) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(c(num), c(den))
    }

    pub fn num(&self) -> &[Complex64] {
        &self.num
    }

    pub fn den(&self) -> &[Complex64] {
        &self.den
    }

    /// Hankel rank `N = max(deg A + 1, deg B)`.
    pub fn rank(&self) -> usize {
        self.num.len().max(self.den.len() - 1)
    }

    /// `sigma(u)`: minus the `z` coefficient of the denominator.
    pub fn sigma(&self) -> Complex64 {
        -self.den.get(1).copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        poly_eval(&self.num, z) / poly_eval(&self.den, z)
    }

    pub fn min_root_modulus(&self) -> f64 {
        poly_roots(&self.den)
            .iter()
            .map(|r| r.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Cauchy-estimate bound on `sum_{k >= m} |c_k|^2`.
    fn tail_bound(&self, m: usize, min_root: f64) -> f64 {
        if self.den.len() == 1 {
            return self.num.iter().skip(m).map(|c| c.norm_sqr()).sum();
        }
        // |c_k| <= max_{|z|=s} |u| * s^{-k} for any 1 < s < min_root.
        let s = min_root.sqrt();
        let samples = 512;
        let peak = (0..samples)
            .map(|j| {
                let z = Complex64::from_polar(s, 2.0 * std::f64::consts::PI * j as f64 / samples as f64);
                self.eval(z).norm()
            })
            .fold(0.0, f64::max)
            * 1.05;
        let q = s.powi(-2);
        peak * peak * q.powi(m as i32) / (1.0 - q)
    }
}

/// First `m` Taylor coefficients of `A/B` at zero. If the geometric tail bound
/// exceeds `tol`, `m` is enlarged until it holds.
pub fn expand_rational(r: &RationalSymbol, m: usize, tol: f64) -> Result<FourierSymbol> {
    let min_root = r.min_root_modulus();
    if min_root <= 1.0 + ROOT_MARGIN {
        return Err(Error::DenominatorRootInsideDisc { modulus: min_root });
    }
    let mut m = m.max(1);
    let mut tail = r.tail_bound(m, min_root);
    while tail > tol && m < MAX_LENGTH {
        m += 1;
        tail = r.tail_bound(m, min_root);
    }
    let mut c = vec![ZERO; m];
    for k in 0..m {
        let mut acc = r.num.get(k).copied().unwrap_or(ZERO);
        for i in 1..r.den.len().min(k + 1) {
            acc -= r.den[i] * c[k - i];
        }
        c[k] = acc;
    }
    FourierSymbol::with_tail(c, tail)
}

/// `M = max(64, smallest M with tail <= 1e-12)`.
pub fn expand_rational_default(r: &RationalSymbol) -> Result<FourierSymbol> {
    expand_rational(r, DEFAULT_LENGTH, DEFAULT_TAIL_TOL)
}

/// `Pi(|u|^2 u)` restricted to the first `M` modes, by two direct convolutions.
pub fn szego_nonlinearity(u: &FourierSymbol) -> FourierSymbol {
    let c = u.coeffs();
    let m = c.len();
    let square = convolve(c, c);
    let out = (0..m)
        .map(|k| (0..m).map(|j| square[k + j] * c[j].conj()).sum())
        .collect();
    FourierSymbol { coeffs: out, truncation_tol: 0.0 }
}

/// FFT evaluation of the truncated nonlinearity for repeated use at a fixed
/// length. Products have frequencies in `[-(M-1), 2(M-1)]`, so a grid of
/// `L >= 2M - 1` points keeps the first `M` output modes alias-free.
pub struct NonlinearityPlan {
    m: usize,
    grid: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl NonlinearityPlan {
    pub fn new(m: usize) -> Self {
        let grid = (2 * m).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid);
        let inverse = planner.plan_fft_inverse(grid);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            m,
            grid,
            forward,
            inverse,
            buffer: vec![ZERO; grid],
            scratch: vec![ZERO; scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Writes `Pi(|u|^2 u)` (first `M` modes) into `out`.
    pub fn apply(&mut self, c: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(c.len(), self.m);
        assert_eq!(out.len(), self.m);
        self.buffer[..self.m].copy_from_slice(c);
        self.buffer[self.m..].fill(ZERO);
        self.inverse.process_with_scratch(&mut self.buffer, &mut self.scratch);
        for v in self.buffer.iter_mut() {
            *v *= v.norm_sqr();
        }
        self.forward.process_with_scratch(&mut self.buffer, &mut self.scratch);
        let scale = 1.0 / self.grid as f64;
        for (o, v) in out.iter_mut().zip(&self.buffer) {
            *o = v * scale;
        }
    }
}

/// Conserved functionals of a symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolFunctionals {
    /// `||u||^2 = J_2`.
    pub l2sq: f64,
    /// `M(u) = sum k |c_k|^2`.
    pub momentum: f64,
    /// `E(u) = ||u||_{L^4}^4`.
    pub energy: f64,
    /// `moments[n - 1] = J_{2n}(u) = (H_u^{2n}(1)|1)`.
    pub moments: Vec<f64>,
}

impl SymbolFunctionals {
    /// `J_{2n}` for `n >= 1`.
    pub fn j(&self, n: usize) -> f64 {
        self.moments[n - 1]
    }

    /// `E - (2 J_4 - J_2^2)`.
    pub fn energy_identity_residual(&self) -> f64 {
        self.energy - (2.0 * self.j(2) - self.j(1) * self.j(1))
    }
}

pub fn functionals(u: &FourierSymbol, n_max: usize) -> SymbolFunctionals {
    let n_max = n_max.max(2);
    let c = u.coeffs();
    let mut moments = Vec::with_capacity(n_max);
    // J_{2n} = ||H_u^n(1)||^2 because H_u^2 is self-adjoint.
    let mut h = vec![ZERO; c.len()];
    h[0] = Complex64::new(1.0, 0.0);
    for _ in 0..n_max {
        h = hankel::apply_h(u, &h);
        moments.push(norm_sq(&h));
    }
    let energy = norm_sq(&convolve(c, c));
    SymbolFunctionals {
        l2sq: u.l2_norm_sq(),
        momentum: u.momentum(),
        energy,
        moments,
    }
}
