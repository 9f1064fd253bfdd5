use crate::error::{Error, Result};

use super::matrix::{ComplexMatrix, ZERO};

/// Relative tolerance used when deciding whether two operators commute.
pub const COMMUTATOR_TOL: f64 = 1e-9;

fn require_square(m: &ComplexMatrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.rows())
    } else {
        Err(Error::NotSquare(m.rows(), m.cols()))
    }
}

/// `[a, b] = ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = require_square(a)?;
    if require_square(b)? != n {
        return Err(Error::DimensionMismatch {
            left: (a.rows(), a.cols()),
            right: (b.rows(), b.cols()),
        });
    }
    Ok(commutator_unchecked(a, b))
}

pub(crate) fn commutator_unchecked(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    let (x, y) = (a.as_slice(), b.as_slice());
    let o = out.as_mut_slice();
    for i in 0..n {
        for j in 0..n {
            let mut s = ZERO;
            for k in 0..n {
                s += x[i * n + k] * y[k * n + j] - y[i * n + k] * x[k * n + j];
            }
            o[i * n + j] = s;
        }
    }
    out
}

/// `‖[a, b]‖_F / (‖a‖_F ‖b‖_F)`, zero when either operand vanishes.
pub fn normalized_commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let denom = a.frobenius_norm() * b.frobenius_norm();
    if denom == 0.0 {
        return 0.0;
    }
    commutator_unchecked(a, b).frobenius_norm() / denom
}

/// `‖MM† − M†M‖_F / ‖M‖_F²`, zero for the zero matrix.
pub fn normality_defect(m: &ComplexMatrix) -> f64 {
    let n2 = m.frobenius_norm().powi(2);
    if n2 == 0.0 {
        return 0.0;
    }
    commutator_unchecked(m, &m.adjoint()).frobenius_norm() / n2
}

pub fn is_normal(m: &ComplexMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n2 = m.frobenius_norm().powi(2);
    commutator_unchecked(m, &m.adjoint()).frobenius_norm() <= tol * (1.0 + n2)
}

/// Kronecker product `a ⊗ b`; the row index is `i_a · rows(b) + i_b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Which factor of `A ⊗ B` survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), keep: Keep) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    let n = require_square(m)?;
    if da == 0 || db == 0 || da * db != n {
        return Err(Error::DimensionMismatch {
            left: (n, n),
            right: (da, db),
        });
    }
    let out = match keep {
        Keep::A => {
            let mut r = ComplexMatrix::zeros(da, da);
            for i in 0..da {
                for j in 0..da {
                    r[(i, j)] = (0..db).map(|k| m[(i * db + k, j * db + k)]).sum();
                }
            }
            r
        }
        Keep::B => {
            let mut r = ComplexMatrix::zeros(db, db);
            for k in 0..db {
                for l in 0..db {
                    r[(k, l)] = (0..da).map(|i| m[(i * db + k, i * db + l)]).sum();
                }
            }
            r
        }
    };
    Ok(out)
}
