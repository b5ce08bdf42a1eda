//! Small dense helpers shared by the spectral modules.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `(a|b) = sum a_k conj(b_k)`, linear in the first slot.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm_sq(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Reduce an angle to `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        // Adding zero turns -0.0 into 0.0.
        r + 0.0
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Eigenvalues of a general complex matrix (complex Schur form).
pub fn general_eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let (_, t) = m.clone().schur().unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

pub fn spectral_radius(m: &CMatrix) -> f64 {
    general_eigenvalues(m)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Roots of `sum_k coeffs[k] z^k` via the companion matrix. Trailing zero
/// coefficients are ignored; a constant polynomial has no roots.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = match coeffs.iter().rposition(|c| c.norm() > 0.0) {
        Some(d) => d,
        None => return Vec::new(),
    };
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut comp = CMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    general_eigenvalues(&comp)
}

pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
}

/// Solve `a x = b` by partial-pivot LU; `None` when a pivot falls below
/// `pivot_tol` times the largest pivot.
pub fn lu_solve(a: CMatrix, b: &CVector, pivot_tol: f64) -> Option<CVector> {
    let lu = a.lu();
    let u = lu.u();
    let pivots: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
    let max = pivots.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 || pivots.iter().any(|p| *p <= pivot_tol * max) {
        return None;
    }
    lu.solve(b)
}

/// Linear convolution of two coefficient sequences.
/// Products with fewer terms than this use the direct double loop.
const FFT_CONVOLVE_MIN: usize = 1 << 14;

pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len() * b.len() >= FFT_CONVOLVE_MIN {
        return fft_convolve(a, b);
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == ZERO {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn fft_convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let len = a.len() + b.len() - 1;
    let grid = len.next_power_of_two();
    let mut planner = rustfft::FftPlanner::new();
    let forward = planner.plan_fft_forward(grid);
    let inverse = planner.plan_fft_inverse(grid);
    let mut fa = a.to_vec();
    fa.resize(grid, ZERO);
    let mut fb = b.to_vec();
    fb.resize(grid, ZERO);
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inverse.process(&mut fa);
    let scale = 1.0 / grid as f64;
    fa.truncate(len);
    fa.iter_mut().for_each(|x| *x *= scale);
    fa
}
