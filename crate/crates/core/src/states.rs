//! Density matrices, bipartite states, and the classical-on-B test.
//!
//! Joint indices of a state on `A ⊗ B` are `a · dim_b + b`, so the joint
//! matrix is a `dim_a × dim_a` grid of `dim_b × dim_b` blocks
//! `C_kl = ⟨k|_A ρ |l⟩_A`.

use crate::error::{Error, Result};
use crate::linalg::{
    normality_defect, normalized_commutator_norm, simultaneous_diagonalization, tensor, vec_inner, vec_norm,
    ComplexMatrix, HermitianMatrix, C64, HERM_TOL, ONE, ZERO,
};

/// Eigenvalues down to this value are clamped to zero when building a density matrix.
pub const PSD_CLAMP_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on `‖v‖ − 1` for pure states.
pub const NORM_TOL: f64 = 1e-12;
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Default threshold on the quantumness score.
pub const CLASSICALITY_TOL: f64 = 1e-9;
/// Blocks with norm below this fraction of the largest block are treated as zero.
pub const BLOCK_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    ///
    /// Eigenvalues in `[-1e-10, 0)` are clamped to zero and the state is
    /// renormalized; anything more negative is rejected.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let h = HermitianMatrix::new(m, HERM_TOL)?;
        let trace = h.matrix().trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace });
        }
        let spec = h.eig();
        let min = spec.eigenvalues.first().copied().unwrap_or(0.0);
        if min < -PSD_CLAMP_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        if min < 0.0 {
            let total: f64 = spec.eigenvalues.iter().map(|l| l.max(0.0)).sum();
            let m = spec.apply_fn(|l| C64::new(l.max(0.0) / total, 0.0));
            return Ok(Self(HermitianMatrix::new(m, HERM_TOL)?));
        }
        Ok(Self(h))
    }

    /// Wraps a matrix already known to be a state (internal hot paths).
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(HermitianMatrix::new(m.hermitian_part(), f64::INFINITY).expect("square"))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self::new_unchecked(ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new_unchecked(ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.0.matrix()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0.into_matrix()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.0.eig().eigenvalues
    }

    pub fn purity(&self) -> f64 {
        self.matrix().frobenius_norm().powi(2)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.matrix().distance(other.matrix())
    }
}

/// `S(ρ) = −Σ λ log₂ λ` in bits, with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

pub(crate) fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum();
    s.clamp(0.0, (eigenvalues.len() as f64).log2())
}

/// Unit vector in `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState(Vec<C64>);

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(amplitudes))
    }

    /// Rescales `v` to unit norm.
    pub fn normalized(v: Vec<C64>) -> Result<Self> {
        let norm = vec_norm(&v);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(v.into_iter().map(|z| z / norm).collect()))
    }

    pub fn from_real(v: &[f64]) -> Result<Self> {
        Self::normalized(v.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|i⟩`.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = vec![ZERO; d];
        v[i] = ONE;
        Self(v)
    }

    pub(crate) fn new_unchecked(v: Vec<C64>) -> Self {
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        vec_inner(&self.0, &other.0)
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.0, &self.0)
    }
}

/// `‖G − I‖_F` for the Gram matrix of `vectors`.
pub fn gram_residual(vectors: &[PureState]) -> f64 {
    let n = vectors.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let g = vectors[i].overlap(&vectors[j]);
            let target = if i == j { ONE } else { ZERO };
            s += (g - target).norm_sqr();
        }
    }
    s.sqrt()
}

fn check_orthonormal(vectors: &[PureState]) -> Result<()> {
    let residual = gram_residual(vectors);
    if residual >= ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { residual });
    }
    Ok(())
}

/// Matrix whose columns are the given vectors.
pub fn basis_matrix(vectors: &[PureState]) -> ComplexMatrix {
    let d = vectors.first().map_or(0, PureState::dim);
    let mut m = ComplexMatrix::zeros(d, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_col(j, v.amplitudes());
    }
    m
}

/// Density matrix on `A ⊗ B` with recorded local dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    joint: DensityMatrix,
}

impl BipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, joint: DensityMatrix) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || dim_a * dim_b != joint.dim() {
            return Err(Error::DimensionMismatch {
                left: (joint.dim(), joint.dim()),
                right: (dim_a, dim_b),
            });
        }
        Ok(Self { dim_a, dim_b, joint })
    }

    pub fn product(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Self {
        Self {
            dim_a: rho_a.dim(),
            dim_b: rho_b.dim(),
            joint: DensityMatrix::new_unchecked(tensor(rho_a.matrix(), rho_b.matrix())),
        }
    }

    /// `|Φ⁺⟩ = (1/√d) Σ |ii⟩` on `C^d ⊗ C^d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let psi = maximally_entangled_vector(d);
        Self {
            dim_a: d,
            dim_b: d,
            joint: DensityMatrix::new_unchecked(ComplexMatrix::outer(&psi, &psi)),
        }
    }

    pub(crate) fn new_unchecked(dim_a: usize, dim_b: usize, m: ComplexMatrix) -> Self {
        Self {
            dim_a,
            dim_b,
            joint: DensityMatrix::new_unchecked(m),
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn joint(&self) -> &DensityMatrix {
        &self.joint
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.joint.matrix()
    }
}

pub fn maximally_entangled_vector(d: usize) -> Vec<C64> {
    let mut v = vec![ZERO; d * d];
    let a = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = C64::new(a, 0.0);
    }
    v
}

/// `Σᵢ pᵢ ρ_A^{(i)} ⊗ |αᵢ⟩⟨αᵢ|` for an orthonormal family `{αᵢ}` on B.
pub fn make_half_classical(weights: &[f64], cond_a: &[DensityMatrix], basis_b: &[PureState]) -> Result<BipartiteState> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("empty".into()));
    }
    if weights.len() != cond_a.len() || weights.len() != basis_b.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights, {} conditional states, {} basis vectors",
            weights.len(),
            cond_a.len(),
            basis_b.len()
        )));
    }
    check_probability_vector(weights)?;
    let dim_a = cond_a[0].dim();
    let dim_b = basis_b[0].dim();
    if cond_a.iter().any(|r| r.dim() != dim_a) || basis_b.iter().any(|v| v.dim() != dim_b) {
        return Err(Error::InvalidArgument("inconsistent local dimensions".into()));
    }
    if basis_b.len() > dim_b {
        return Err(Error::InvalidArgument(format!(
            "{} orthonormal vectors requested in dimension {dim_b}",
            basis_b.len()
        )));
    }
    check_orthonormal(basis_b)?;

    let n = dim_a * dim_b;
    let mut joint = ComplexMatrix::zeros(n, n);
    for ((&p, rho), alpha) in weights.iter().zip(cond_a).zip(basis_b) {
        joint.add_scaled_in_place(&tensor(rho.matrix(), &alpha.projector()), C64::new(p, 0.0));
    }
    BipartiteState::new(dim_a, dim_b, DensityMatrix::new(joint)?)
}

pub(crate) fn check_probability_vector(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
        return Err(Error::InvalidWeights("negative or non-finite entry".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidWeights(format!("sum is {total}")));
    }
    Ok(())
}

/// The `dim_a × dim_a` grid of B-operators `C_kl = ⟨k|_A ρ |l⟩_A`.
pub fn block_decompose(s: &BipartiteState) -> Vec<Vec<ComplexMatrix>> {
    blocks_of(s.matrix(), s.dim_a, s.dim_b)
}

pub(crate) fn blocks_of(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Vec<Vec<ComplexMatrix>> {
    (0..dim_a)
        .map(|k| {
            (0..dim_a)
                .map(|l| {
                    let mut c = ComplexMatrix::zeros(dim_b, dim_b);
                    for i in 0..dim_b {
                        for j in 0..dim_b {
                            c[(i, j)] = m[(k * dim_b + i, l * dim_b + j)];
                        }
                    }
                    c
                })
                .collect()
        })
        .collect()
}

/// Inverse of [`block_decompose`]: `Σ_kl |k⟩⟨l| ⊗ C_kl`.
pub fn reassemble_blocks(blocks: &[Vec<ComplexMatrix>]) -> ComplexMatrix {
    let dim_a = blocks.len();
    let dim_b = blocks[0][0].rows();
    let n = dim_a * dim_b;
    let mut m = ComplexMatrix::zeros(n, n);
    for (k, row) in blocks.iter().enumerate() {
        for (l, c) in row.iter().enumerate() {
            for i in 0..dim_b {
                for j in 0..dim_b {
                    m[(k * dim_b + i, l * dim_b + j)] = c[(i, j)];
                }
            }
        }
    }
    m
}

/// Block indices `((k, l), (m, n))`.
pub type BlockPair = ((usize, usize), (usize, usize));

#[derive(Clone, Debug)]
pub struct ClassicalityReport {
    pub is_classical_on_b: bool,
    /// Orthonormal B-basis diagonalizing every block, present iff classical.
    pub witness_basis: Option<Vec<PureState>>,
    /// Largest normalized commutator or normality defect among the blocks.
    pub quantumness: f64,
    /// Block indices `((k, l), (m, n))` attaining the score; equal pairs flag non-normality.
    pub worst_pair: Option<BlockPair>,
}

/// Largest normalized defect over the block family together with its location.
pub(crate) fn block_quantumness(blocks: &[Vec<ComplexMatrix>]) -> (f64, Option<BlockPair>) {
    let floor = block_floor(blocks);
    let flat: Vec<((usize, usize), &ComplexMatrix)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(k, row)| row.iter().enumerate().map(move |(l, c)| ((k, l), c)))
        .filter(|(_, c)| c.frobenius_norm() > floor)
        .collect();
    let mut best = 0.0;
    let mut at = None;
    for (i, &(ki, ci)) in flat.iter().enumerate() {
        let nd = normality_defect(ci);
        if nd > best {
            best = nd;
            at = Some((ki, ki));
        }
        for &(kj, cj) in &flat[i + 1..] {
            let v = normalized_commutator_norm(ci, cj);
            if v > best {
                best = v;
                at = Some((ki, kj));
            }
        }
    }
    (best, at)
}

fn block_floor(blocks: &[Vec<ComplexMatrix>]) -> f64 {
    let largest = blocks
        .iter()
        .flatten()
        .map(ComplexMatrix::frobenius_norm)
        .fold(0.0, f64::max);
    BLOCK_FLOOR * largest
}

/// Decides whether `s` is classical on B: every block normal and all blocks
/// mutually commuting, in which case a common eigenbasis is returned.
pub fn is_classical_on_b(s: &BipartiteState, tol: f64) -> ClassicalityReport {
    let blocks = block_decompose(s);
    let (quantumness, worst_pair) = block_quantumness(&blocks);
    if quantumness > tol {
        return ClassicalityReport {
            is_classical_on_b: false,
            witness_basis: None,
            quantumness,
            worst_pair,
        };
    }
    let floor = block_floor(&blocks);
    let nonzero: Vec<ComplexMatrix> = blocks
        .into_iter()
        .flatten()
        .filter(|c| c.frobenius_norm() > floor)
        .collect();
    let diag_tol = tol.max(1e-12);
    match simultaneous_diagonalization(&nonzero, diag_tol) {
        Ok(v) => ClassicalityReport {
            is_classical_on_b: true,
            witness_basis: Some((0..v.cols()).map(|j| PureState::new_unchecked(v.col(j))).collect()),
            quantumness,
            worst_pair: None,
        },
        Err(_) => ClassicalityReport {
            is_classical_on_b: false,
            witness_basis: None,
            quantumness,
            worst_pair,
        },
    }
}

/// `Σ_j (I ⊗ Π_j) ρ (I ⊗ Π_j)` for a complete orthonormal basis on B.
pub fn measure_and_dephase(s: &BipartiteState, basis_b: &[PureState]) -> Result<BipartiteState> {
    if basis_b.len() != s.dim_b || basis_b.iter().any(|v| v.dim() != s.dim_b) {
        return Err(Error::InvalidArgument(format!(
            "measurement needs {} basis vectors of dimension {}",
            s.dim_b, s.dim_b
        )));
    }
    check_orthonormal(basis_b)?;
    Ok(dephase_unchecked(s, &basis_matrix(basis_b)))
}

pub(crate) fn dephase_unchecked(s: &BipartiteState, v: &ComplexMatrix) -> BipartiteState {
    let vh = v.adjoint();
    let blocks: Vec<Vec<ComplexMatrix>> = block_decompose(s)
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|c| {
                    let rotated = vh.mul_unchecked(&c).mul_unchecked(v);
                    let diag = ComplexMatrix::from_diag(&rotated.diag());
                    v.mul_unchecked(&diag).mul_unchecked(&vh)
                })
                .collect()
        })
        .collect();
    BipartiteState::new_unchecked(s.dim_a, s.dim_b, reassemble_blocks(&blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli_x;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket(v: &[f64]) -> PureState {
        PureState::from_real(v).unwrap()
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        assert!(DensityMatrix::new(pauli_x()).is_err());
        let bad = ComplexMatrix::from_real_diag(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(bad), Err(Error::NotPositive { .. })));
        let nearly = ComplexMatrix::from_real_diag(&[1.0 + 5e-11, -5e-11]);
        let rho = DensityMatrix::new(nearly).unwrap();
        assert!(rho.eigenvalues().iter().all(|&l| l >= 0.0));
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(
            von_neumann_entropy(&DensityMatrix::from_pure(&PureState::basis(2, 0))),
            0.0
        );
        let s = von_neumann_entropy(&DensityMatrix::maximally_mixed(3));
        assert!((s - 3f64.log2()).abs() < 1e-12);
        let half = DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.5, 0.5, 0.0])).unwrap();
        assert!((von_neumann_entropy(&half) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pure_state_validation() {
        assert!(PureState::new(vec![ONE, ONE]).is_err());
        assert!(PureState::normalized(vec![ZERO, ZERO]).is_err());
        assert_eq!(ket(&[3.0, 4.0]).amplitudes()[0], C64::new(0.6, 0.0));
    }

    #[test]
    fn half_classical_product_state() {
        let s = make_half_classical(
            &[1.0],
            &[DensityMatrix::from_pure(&PureState::basis(2, 0))],
            &[PureState::basis(2, 0)],
        )
        .unwrap();
        assert_eq!(s.matrix()[(0, 0)], ONE);
        assert!((s.matrix().frobenius_norm() - 1.0).abs() < 1e-15);
        assert!(is_classical_on_b(&s, 1e-10).is_classical_on_b);
    }

    #[test]
    fn classically_correlated_two_qubits() {
        let s = make_half_classical(
            &[0.5, 0.5],
            &[
                DensityMatrix::from_pure(&PureState::basis(2, 0)),
                DensityMatrix::from_pure(&PureState::basis(2, 1)),
            ],
            &[PureState::basis(2, 0), PureState::basis(2, 1)],
        )
        .unwrap();
        let r = is_classical_on_b(&s, 1e-10);
        assert!(r.is_classical_on_b);
        assert_eq!(r.quantumness, 0.0);
        assert!(r.witness_basis.is_some());
    }

    #[test]
    fn half_classical_rejects_bad_inputs() {
        let rho = DensityMatrix::maximally_mixed(2);
        let e0 = PureState::basis(2, 0);
        assert!(matches!(
            make_half_classical(
                &[0.6, 0.6],
                &[rho.clone(), rho.clone()],
                &[e0.clone(), PureState::basis(2, 1)]
            ),
            Err(Error::InvalidWeights(_))
        ));
        let plus = ket(&[1.0, 1.0]);
        assert!(matches!(
            make_half_classical(&[0.5, 0.5], &[rho.clone(), rho.clone()], &[e0.clone(), plus]),
            Err(Error::NotOrthonormal { .. })
        ));
        assert!(make_half_classical(&[1.0], &[rho], &[e0.clone(), e0]).is_err());
    }

    #[test]
    fn product_blocks_scale_rho_b() {
        let ra = DensityMatrix::new(ComplexMatrix::from_real_rows(&[&[0.6, 0.2], &[0.2, 0.4]]).unwrap()).unwrap();
        let rb = DensityMatrix::from_pure(&ket(&[1.0, 2.0, 0.0]));
        let blocks = block_decompose(&BipartiteState::product(&ra, &rb));
        for (k, row) in blocks.iter().enumerate() {
            for (l, block) in row.iter().enumerate() {
                let expected = rb.matrix().scale(ra.matrix()[(k, l)]);
                assert!(block.distance(&expected) < 1e-15);
            }
        }
    }

    #[test]
    fn non_commuting_blocks_detected() {
        // ½(|0⟩⟨0|⊗|0⟩⟨0| + |1⟩⟨1|⊗|+⟩⟨+|)
        let p0 = PureState::basis(2, 0).projector();
        let plus = ket(&[1.0, 1.0]).projector();
        let joint = &tensor(&p0, &p0).scale_real(0.5) + &tensor(&ComplexMatrix::unit(2, 1, 1), &plus).scale_real(0.5);
        let s = BipartiteState::new(2, 2, DensityMatrix::new(joint).unwrap()).unwrap();
        let r = is_classical_on_b(&s, 1e-9);
        assert!(!r.is_classical_on_b);
        assert!(r.witness_basis.is_none());
        assert_eq!(r.worst_pair, Some(((0, 0), (1, 1))));
    }

    #[test]
    fn bell_state_is_quantum_and_dephases_to_classical_mixture() {
        let phi = BipartiteState::maximally_entangled(2);
        let r = is_classical_on_b(&phi, 1e-9);
        assert!(!r.is_classical_on_b);
        assert!(r.quantumness > 0.1);

        let comp = [PureState::basis(2, 0), PureState::basis(2, 1)];
        let out = measure_and_dephase(&phi, &comp).unwrap();
        let expected = ComplexMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.5]);
        assert!(out.matrix().distance(&expected) < 1e-15);
        assert!(measure_and_dephase(&phi, &comp[..1]).is_err());
    }

    #[test]
    fn half_classical_unchanged_by_own_measurement() {
        let b0 = ket(&[1.0, 1.0]);
        let b1 = ket(&[1.0, -1.0]);
        let s = make_half_classical(
            &[0.3, 0.7],
            &[
                DensityMatrix::maximally_mixed(2),
                DensityMatrix::from_pure(&ket(&[FRAC_1_SQRT_2, 0.5])),
            ],
            &[b0.clone(), b1.clone()],
        )
        .unwrap();
        let out = measure_and_dephase(&s, &[b0, b1]).unwrap();
        assert!(out.matrix().distance(s.matrix()) < 1e-10);
    }
}
