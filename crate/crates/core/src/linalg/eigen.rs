//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Dimensions handled here are small (a few dozen at most), where Jacobi is
//! both accurate and fast enough; every sweep costs `O(n³)`.

use crate::error::{Error, Result};

use super::matrix::{ComplexMatrix, C64, ZERO};

/// Default Hermiticity tolerance, relative to `1 + ‖M‖_F`.
pub const HERM_TOL: f64 = 1e-10;

/// Sweeps stop once the off-diagonal mass falls below this fraction of `‖M‖_F`.
const OFF_DIAGONAL_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 64;

/// Relative width used to group nearly equal eigenvalues.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// A square matrix verified to be Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Accepts `m` when `‖M − M†‖_F ≤ tol · (1 + ‖M‖_F)`; the stored matrix is exactly Hermitian.
    pub fn new(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare(m.rows(), m.cols()));
        }
        let defect = m.hermiticity_defect();
        if defect > tol * (1.0 + m.frobenius_norm()) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self(m.hermitian_part()))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn eig(&self) -> Spectrum {
        jacobi(&self.0)
    }
}

/// Ascending eigenvalues with a unitary whose columns are the matching eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.col(k)
    }

    /// `V f(Λ) V†`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = ZERO;
                for k in 0..n {
                    s += v[(i, k)] * fl[k] * v[(j, k)].conj();
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|l| C64::new(l, 0.0))
    }

    /// Index ranges of eigenvalue clusters, each spanning less than
    /// `DEGENERACY_TOL · (1 + spectral range)` between neighbours.
    ///
    /// The basis inside a cluster is arbitrary.
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        let ev = &self.eigenvalues;
        if ev.is_empty() {
            return Vec::new();
        }
        let range = ev[ev.len() - 1] - ev[0];
        let width = DEGENERACY_TOL * (1.0 + range);
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..ev.len() {
            if ev[k] - ev[k - 1] > width {
                out.push(start..k);
                start = k;
            }
        }
        out.push(start..ev.len());
        out
    }
}

/// Hermitian eigendecomposition; rejects non-Hermitian input at the default tolerance.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<Spectrum> {
    Ok(HermitianMatrix::new(m.clone(), HERM_TOL)?.eig())
}

/// Cyclic Jacobi on the Hermitian part of `m`.
pub(crate) fn jacobi(m: &ComplexMatrix) -> Spectrum {
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let target = OFF_DIAGONAL_TOL * scale;

    for _ in 0..MAX_SWEEPS {
        if a.off_diagonal_norm() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_col(new, &v.col(old));
    }
    Spectrum {
        eigenvalues: order.iter().map(|&i| diag[i]).collect(),
        eigenvectors: vectors,
    }
}

/// Annihilates `a[p][q]` with the unitary `G = diag(1, e^{-iφ}) · R(θ)` acting on columns `p, q`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / mag;
    let theta = 0.5 * (2.0 * mag).atan2(aqq - app);
    let (s, c) = theta.sin_cos();
    // Columns of G: g_p = (c, -s e^{-iφ}), g_q = (s, c e^{-iφ}).
    let ph = phase.conj();
    let g = [[C64::new(c, 0.0), C64::new(s, 0.0)], [ph * (-s), ph * c]];

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g[0][0] + akq * g[1][0];
        a[(k, q)] = akp * g[0][1] + akq * g[1][1];
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g[0][0].conj() * apk + g[1][0].conj() * aqk;
        a[(q, k)] = g[0][1].conj() * apk + g[1][1].conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g[0][0] + vkq * g[1][0];
        v[(k, q)] = vkp * g[0][1] + vkq * g[1][1];
    }
}

/// `exp(iH)` for Hermitian `H`.
pub fn expm_i_hermitian(h: &ComplexMatrix) -> ComplexMatrix {
    jacobi(h).apply_fn(|l| C64::from_polar(1.0, l))
}

/// Principal square root of a PSD matrix; small negative eigenvalues are treated as zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    jacobi(m).apply_fn(|l| C64::new(l.max(0.0).sqrt(), 0.0))
}

/// `M^{-1/2}` for a positive definite matrix.
pub fn inverse_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let s = jacobi(m);
    if let Some(&min) = s.eigenvalues.first() {
        if min <= 0.0 {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
    }
    Ok(s.apply_fn(|l| C64::new(1.0 / l.sqrt(), 0.0)))
}

/// Hermitian matrix from `n²` real coordinates: diagonal first, then (re, im) of the upper triangle.
pub fn hermitian_from_coords(n: usize, x: &[f64]) -> ComplexMatrix {
    debug_assert_eq!(x.len(), n * n);
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(x[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = C64::new(x[k], x[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{pauli_x, pauli_y};

    #[test]
    fn diagonal_input_sorted() {
        let s = hermitian_eig(&ComplexMatrix::from_real_diag(&[2.0, 1.0, 0.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 2.0]);
        assert!(
            s.reconstruct()
                .distance(&ComplexMatrix::from_real_diag(&[2.0, 1.0, 0.0]))
                < 1e-15
        );
    }

    #[test]
    fn pauli_spectra() {
        for p in [pauli_x(), pauli_y()] {
            let s = hermitian_eig(&p).unwrap();
            assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
            assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
            assert!(s.eigenvectors.unitarity_defect() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn clusters_group_degenerate_values() {
        let s = hermitian_eig(&ComplexMatrix::from_real_diag(&[1.0, 0.5, 1.0 + 1e-12, 3.0])).unwrap();
        assert_eq!(s.clusters(), vec![0..1, 1..3, 3..4]);
    }

    #[test]
    fn exp_of_pauli() {
        let t = 0.3;
        let u = expm_i_hermitian(&pauli_x().scale_real(t));
        assert!((u[(0, 0)] - C64::new(t.cos(), 0.0)).norm() < 1e-14);
        assert!((u[(0, 1)] - C64::new(0.0, t.sin())).norm() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let s = hermitian_eig(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0; 3]);
        assert_eq!(s.clusters(), vec![0..3]);
    }
}
