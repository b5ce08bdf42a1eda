//! Cyclic Jacobi eigensolver for dense Hermitian matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ZERO};

pub const MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius norm target, relative to `||P||_F`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenpairs sorted by descending eigenvalue; `vectors` holds them as columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn vector(&self, j: usize) -> Vec<Complex64> {
        self.vectors.column(j).iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Each eigenvector is rotated so that its largest-modulus entry (first one on
/// ties) is real and positive.
pub fn hermitian_eig(p: &CMatrix) -> Result<EigenSystem> {
    let n = p.nrows();
    if p.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            n,
            p.ncols()
        )));
    }
    let fro = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            defect = defect.max((p[(i, j)] - p[(j, i)].conj()).norm());
        }
    }
    if defect > HERMITIAN_TOL * fro.max(1.0) {
        return Err(Error::DimensionMismatch(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }

    // Row-major working copy, symmetrized.
    let mut a = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (p[(i, j)] + p[(j, i)].conj());
        }
        a[i * n + i].im = 0.0;
    }
    // Eigenvectors as rows of `v` (row r = column r of V) so updates stay contiguous.
    let mut v = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }

    if fro > 0.0 {
        let target = OFF_DIAGONAL_TOL * fro;
        // Entries below target/n cannot lift the off-norm above the target
        // together, so they are not worth a rotation.
        let inert = target / n as f64;
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            if off_norm(&a, n) <= target {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, n, p, q, inert);
                }
            }
        }
        if !converged && off_norm(&a, n) > target {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let row = &v[i * n..(i + 1) * n];
        let mut best = 0;
        for k in 1..n {
            if row[k].norm() > row[best].norm() {
                best = k;
            }
        }
        let phase = if row[best].norm() > 0.0 {
            row[best].conj() / row[best].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for k in 0..n {
            vectors[(k, col)] = row[k] * phase;
        }
    }
    Ok(EigenSystem { values, vectors })
}

fn off_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One unitary rotation annihilating `a[p][q]`.
///
/// With `a_pq = |a_pq| e^{i alpha}`, `J = D R` where `D = diag(1, e^{-i alpha})`
/// makes the pivot real and `R` is the real Jacobi rotation.
fn rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize, inert: f64) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag <= inert {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let phase = (apq / mag).conj();
    let j_pp = Complex64::new(c, 0.0);
    let j_pq = Complex64::new(s, 0.0);
    let j_qp = -phase * s;
    let j_qq = phase * c;

    // A <- A J (columns p, q)
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * j_pp + akq * j_qp;
        a[k * n + q] = akp * j_pq + akq * j_qq;
    }
    // A <- J^* A (rows p, q)
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[q * n + k] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;
    // V <- V J, with eigenvectors stored as rows.
    for k in 0..n {
        let vp = v[p * n + k];
        let vq = v[q * n + k];
        v[p * n + k] = vp * j_pp + vq * j_qp;
        v[q * n + k] = vp * j_pq + vq * j_qq;
    }
}
