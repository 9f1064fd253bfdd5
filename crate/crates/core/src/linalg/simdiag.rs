use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

use super::eigen::jacobi;
use super::matrix::ComplexMatrix;
use super::ops::{commutator_unchecked, is_normal};

const ATTEMPTS: usize = 5;
// Fixed so that the result is a pure function of the inputs.
const COMBINATION_SEED: u64 = 0x5eed_d1a6_0000_0001;

/// Finds a unitary `V` such that `V† M V` is diagonal for every member of a
/// commuting family of normal matrices.
///
/// A random real combination of the Hermitian and anti-Hermitian parts is
/// diagonalized; generic coefficients split every joint degeneracy that the
/// family itself does not share. Up to five combinations are tried.
pub fn simultaneous_diagonalization(ms: &[ComplexMatrix], tol: f64) -> Result<ComplexMatrix> {
    let Some(first) = ms.first() else {
        return Err(Error::InvalidArgument("empty matrix family".into()));
    };
    let n = first.rows();
    for m in ms {
        if !m.is_square() {
            return Err(Error::NotSquare(m.rows(), m.cols()));
        }
        if m.rows() != n {
            return Err(Error::DimensionMismatch {
                left: (n, n),
                right: (m.rows(), m.cols()),
            });
        }
        if !is_normal(m, tol) {
            return Err(Error::NotNormal);
        }
    }
    let norms: Vec<f64> = ms.iter().map(ComplexMatrix::frobenius_norm).collect();
    for i in 0..ms.len() {
        for j in (i + 1)..ms.len() {
            let defect = commutator_unchecked(&ms[i], &ms[j]).frobenius_norm();
            if defect > tol * norms[i] * norms[j] {
                return Err(Error::NonCommuting { defect });
            }
        }
    }

    let parts: Vec<(ComplexMatrix, ComplexMatrix)> = ms
        .iter()
        .map(|m| (m.hermitian_part(), m.antihermitian_part()))
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(COMBINATION_SEED);
    let mut worst = f64::INFINITY;
    for _ in 0..ATTEMPTS {
        let mut h = ComplexMatrix::zeros(n, n);
        for (re, im) in &parts {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            h.add_scaled_in_place(re, a.into());
            h.add_scaled_in_place(im, b.into());
        }
        let v = jacobi(&h).eigenvectors;
        worst = diagonalization_residual(ms, &v);
        if ms
            .iter()
            .zip(&norms)
            .all(|(m, &nm)| v.adjoint().mul_unchecked(m).mul_unchecked(&v).off_diagonal_norm() <= tol * (1.0 + nm))
        {
            return Ok(v);
        }
    }
    Err(Error::DiagonalizationFailed {
        attempts: ATTEMPTS,
        residual: worst,
    })
}

/// Largest off-diagonal Frobenius norm of `V† M V` over the family.
pub fn diagonalization_residual(ms: &[ComplexMatrix], v: &ComplexMatrix) -> f64 {
    let vh = v.adjoint();
    ms.iter()
        .map(|m| vh.mul_unchecked(m).mul_unchecked(v).off_diagonal_norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{pauli_x, pauli_y};

    #[test]
    fn diagonal_family_keeps_computational_basis() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        let b = ComplexMatrix::from_real_diag(&[3.0, 3.0]);
        let v = simultaneous_diagonalization(&[a.clone(), b.clone()], 1e-9).unwrap();
        // Columns are standard basis vectors up to phase and order.
        for j in 0..2 {
            let col = v.col(j);
            let big = col.iter().filter(|z| z.norm() > 1.0 - 1e-12).count();
            assert_eq!(big, 1);
        }
        assert!(diagonalization_residual(&[a, b], &v) < 1e-12);
    }

    #[test]
    fn non_commuting_pair_fails() {
        assert!(matches!(
            simultaneous_diagonalization(&[pauli_x(), pauli_y()], 1e-9),
            Err(Error::NonCommuting { .. })
        ));
    }

    #[test]
    fn non_normal_member_fails() {
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(simultaneous_diagonalization(&[j], 1e-9), Err(Error::NotNormal));
    }
}
