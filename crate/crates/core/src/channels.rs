//! Quantum channels in Kraus and Choi form, plus the named constructors.
//!
//! Choi convention: `J(Λ) = (Λ ⊗ I)(|Φ⁺⟩⟨Φ⁺|)` with `|Φ⁺⟩ = (1/√d) Σ |ii⟩`,
//! output leg first, unit trace. Entry `J[(a·d + i), (b·d + j)]` equals
//! `⟨a|Λ(|i⟩⟨j|)|b⟩ / d`.

use crate::error::{Error, Result};
use crate::linalg::{jacobi, partial_trace, tensor, ComplexMatrix, HermitianMatrix, Keep, C64, ONE};
use crate::states::{
    check_probability_vector, gram_residual, maximally_entangled_vector, BipartiteState, DensityMatrix, PureState,
    ORTHONORMAL_TOL,
};

/// Tolerance on `‖Σ E†E − I‖_F`.
pub const TP_TOL: f64 = 1e-9;
/// Most negative Choi eigenvalue accepted by [`validate_cptp`].
pub const CHOI_PSD_TOL: f64 = 1e-8;
/// Most negative Choi eigenvalue accepted when building isotropic channels.
pub const ISOTROPIC_PSD_TOL: f64 = 1e-12;
/// Choi eigenvalues below this are dropped when extracting Kraus operators.
pub const KRAUS_RANK_CUTOFF: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

/// Completely positive map in Kraus form.
///
/// Everything built through this module's constructors is trace preserving;
/// the one exception is [`KrausChannel::adjoint`], which returns the dual map
/// in the same container.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<ComplexMatrix>,
}

/// Checks a Kraus set for trace preservation and a PSD Choi matrix.
pub fn validate_cptp(ops: Vec<ComplexMatrix>) -> Result<KrausChannel> {
    let ch = KrausChannel::from_ops(ops)?;
    let residual = ch.trace_preservation_residual();
    if residual > TP_TOL {
        return Err(Error::NotTracePreserving { residual });
    }
    let min = ch.choi_unchecked().min_eigenvalue();
    if min < -CHOI_PSD_TOL {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: min });
    }
    Ok(ch)
}

impl KrausChannel {
    fn from_ops(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::InvalidArgument("empty Kraus set".into()));
        };
        let dim = first.rows();
        for op in &ops {
            if !op.is_square() {
                return Err(Error::NotSquare(op.rows(), op.cols()));
            }
            if op.rows() != dim {
                return Err(Error::DimensionMismatch {
                    left: (dim, dim),
                    right: (op.rows(), op.cols()),
                });
            }
        }
        Ok(Self { dim, ops })
    }

    pub(crate) fn new_unchecked(ops: Vec<ComplexMatrix>) -> Self {
        Self {
            dim: ops[0].rows(),
            ops,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::new_unchecked(vec![ComplexMatrix::identity(d)])
    }

    /// `ρ ↦ UρU†`.
    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        check_unitary(u)?;
        Ok(Self::new_unchecked(vec![u.clone()]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// `‖Σ E†E − I‖_F`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut s = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.ops {
            s.add_scaled_in_place(&e.adjoint().mul_unchecked(e), ONE);
        }
        s.distance(&ComplexMatrix::identity(self.dim))
    }

    /// `‖Λ(I) − I‖_F`.
    pub fn unitality_residual(&self) -> f64 {
        self.apply_matrix(&ComplexMatrix::identity(self.dim))
            .distance(&ComplexMatrix::identity(self.dim))
    }

    /// `Σ E X E†` on an arbitrary operator.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.ops {
            out.add_scaled_in_place(&e.sandwich(x), ONE);
        }
        out
    }

    /// `Λ(|ψ⟩⟨ψ|) = Σ (Eψ)(Eψ)†`.
    pub fn apply_pure(&self, psi: &[C64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.ops {
            let v = e.mul_vec(psi);
            out.add_scaled_in_place(&ComplexMatrix::outer(&v, &v), ONE);
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: (self.dim, self.dim),
                right: (rho.dim(), rho.dim()),
            });
        }
        DensityMatrix::new(self.apply_matrix(rho.matrix()))
    }

    /// `(I_A ⊗ Λ)(ρ_AB)` through the Kraus operators `I ⊗ E`.
    pub fn apply_local_b(&self, s: &BipartiteState) -> Result<BipartiteState> {
        if s.dim_b() != self.dim {
            return Err(Error::DimensionMismatch {
                left: (self.dim, self.dim),
                right: (s.dim_b(), s.dim_b()),
            });
        }
        let id = ComplexMatrix::identity(s.dim_a());
        let n = s.dim_a() * s.dim_b();
        let mut out = ComplexMatrix::zeros(n, n);
        for e in &self.ops {
            out.add_scaled_in_place(&tensor(&id, e).sandwich(s.matrix()), ONE);
        }
        BipartiteState::new(s.dim_a(), s.dim_b(), DensityMatrix::new(out)?)
    }

    /// Dual map with Kraus operators `E†`; unital, and trace preserving only when `self` is unital.
    pub fn adjoint(&self) -> Self {
        Self::new_unchecked(self.ops.iter().map(ComplexMatrix::adjoint).collect())
    }

    pub fn choi(&self) -> ChoiMatrix {
        self.choi_unchecked()
    }

    fn choi_unchecked(&self) -> ChoiMatrix {
        let d = self.dim;
        let mut j = ComplexMatrix::zeros(d * d, d * d);
        for e in &self.ops {
            // Row-major entries of E are exactly Σ_i E|i⟩ ⊗ |i⟩.
            j.add_scaled_in_place(&ComplexMatrix::outer(e.as_slice(), e.as_slice()), ONE);
        }
        ChoiMatrix {
            dim: d,
            matrix: HermitianMatrix::new(j.scale_real(1.0 / d as f64), f64::INFINITY).expect("square"),
        }
    }
}

fn check_unitary(u: &ComplexMatrix) -> Result<()> {
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::InvalidArgument(format!(
            "matrix is not unitary (‖U†U − I‖ = {defect:.3e})"
        )));
    }
    Ok(())
}

/// Unit-trace Choi matrix of a CPTP map on `C^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: HermitianMatrix,
}

impl ChoiMatrix {
    /// Validates positivity and `Tr_out J = I/d`.
    pub fn new(dim: usize, m: ComplexMatrix) -> Result<Self> {
        if m.rows() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: (dim * dim, dim * dim),
                right: (m.rows(), m.cols()),
            });
        }
        let choi = Self {
            dim,
            matrix: HermitianMatrix::new(m, crate::linalg::HERM_TOL)?,
        };
        let min = choi.min_eigenvalue();
        if min < -CHOI_PSD_TOL {
            return Err(Error::NotCompletelyPositive { min_eigenvalue: min });
        }
        let marginal = partial_trace(choi.matrix(), (dim, dim), Keep::B)?;
        let residual = marginal.distance(&ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64));
        if residual > TP_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(choi)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.eig().eigenvalues[0]
    }

    /// Number of eigenvalues above `cutoff`.
    pub fn rank(&self, cutoff: f64) -> usize {
        self.matrix.eig().eigenvalues.iter().filter(|&&l| l > cutoff).count()
    }
}

/// Minimal Kraus set from the Choi eigendecomposition, `E_k = √(d λ_k) · reshape(v_k)`.
pub fn kraus_from_choi(j: &ChoiMatrix) -> Result<KrausChannel> {
    let d = j.dim;
    let spectrum = j.matrix.eig();
    if spectrum.eigenvalues[0] < -CHOI_PSD_TOL {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: spectrum.eigenvalues[0],
        });
    }
    let ops: Vec<ComplexMatrix> = spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &l)| l > KRAUS_RANK_CUTOFF)
        .map(|(k, &l)| {
            let scale = (d as f64 * l).sqrt();
            let v: Vec<C64> = spectrum.vector(k).into_iter().map(|z| z * scale).collect();
            ComplexMatrix::from_vec(d, d, v).expect("d² entries")
        })
        .collect();
    Ok(KrausChannel::new_unchecked(ops))
}

pub fn choi_from_kraus(ch: &KrausChannel) -> ChoiMatrix {
    ch.choi()
}

/// The eigenvalue-preserving map inside an isotropic channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaKind {
    /// `Γ(ρ) = UρU†`
    Unitary,
    /// `Γ(ρ) = UρᵀU†`
    TransposeUnitary,
}

/// Completely positive range of `p` for `pΓ(ρ) + (1 − p)I/d`.
///
/// Unitary case: `[-1/(d²−1), 1]`. Transpose case: `[-1/(d−1), 1/(d+1)]`.
pub fn isotropic_p_range(d: usize, kind: GammaKind) -> (f64, f64) {
    let d = d as f64;
    match kind {
        GammaKind::Unitary => (-1.0 / (d * d - 1.0), 1.0),
        GammaKind::TransposeUnitary => (-1.0 / (d - 1.0), 1.0 / (d + 1.0)),
    }
}

/// Choi matrix of `pΓ + (1 − p)I/d` without any positivity check.
pub fn isotropic_choi_matrix(d: usize, kind: GammaKind, u: &ComplexMatrix, p: f64) -> ComplexMatrix {
    let id = ComplexMatrix::identity(d);
    let u_id = tensor(u, &id);
    let gamma = match kind {
        GammaKind::Unitary => {
            let phi = maximally_entangled_vector(d);
            ComplexMatrix::outer(&phi, &phi)
        }
        GammaKind::TransposeUnitary => swap(d).scale_real(1.0 / d as f64),
    };
    let gamma = u_id.sandwich(&gamma);
    let mut j = ComplexMatrix::identity(d * d).scale_real((1.0 - p) / (d * d) as f64);
    j.add_scaled_in_place(&gamma, C64::new(p, 0.0));
    j
}

/// Swap operator on `C^d ⊗ C^d`.
pub fn swap(d: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(i * d + j, j * d + i)] = ONE;
        }
    }
    s
}

/// `Λ(ρ) = pΓ(ρ) + (1 − p)I/d`, built through its Choi matrix.
///
/// Fails when the Choi matrix has an eigenvalue below `-1e-12`, i.e. when
/// `p` leaves the completely positive range.
pub fn make_isotropic(d: usize, kind: GammaKind, u: &ComplexMatrix, p: f64) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::InvalidArgument("isotropic channels need d ≥ 2".into()));
    }
    if u.rows() != d || !u.is_square() {
        return Err(Error::DimensionMismatch {
            left: (d, d),
            right: (u.rows(), u.cols()),
        });
    }
    check_unitary(u)?;
    if !p.is_finite() {
        return Err(Error::NonFinite);
    }
    let j = isotropic_choi_matrix(d, kind, u, p);
    let min = jacobi(&j).eigenvalues[0];
    if min < -ISOTROPIC_PSD_TOL {
        let (lo, hi) = isotropic_p_range(d, kind);
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            min: lo,
            max: hi,
        });
    }
    let choi = ChoiMatrix {
        dim: d,
        matrix: HermitianMatrix::new(j, f64::INFINITY)?,
    };
    kraus_from_choi(&choi)
}

/// `ρ ↦ pρ + (1 − p)I/d`.
pub fn depolarizing(d: usize, p: f64) -> Result<KrausChannel> {
    make_isotropic(d, GammaKind::Unitary, &ComplexMatrix::identity(d), p)
}

/// Checks that `povm` consists of PSD operators summing to the identity.
pub fn check_povm(povm: &[ComplexMatrix]) -> Result<usize> {
    let Some(first) = povm.first() else {
        return Err(Error::InvalidPovm("no elements".into()));
    };
    let d = first.rows();
    let mut sum = ComplexMatrix::zeros(d, d);
    for f in povm {
        if !f.is_square() || f.rows() != d {
            return Err(Error::InvalidPovm("elements have inconsistent shapes".into()));
        }
        let h = HermitianMatrix::new(f.clone(), crate::linalg::HERM_TOL)
            .map_err(|_| Error::InvalidPovm("element is not Hermitian".into()))?;
        let min = h.eig().eigenvalues[0];
        if min < -1e-10 {
            return Err(Error::InvalidPovm(format!("element has eigenvalue {min:.3e}")));
        }
        sum.add_scaled_in_place(f, ONE);
    }
    let residual = sum.distance(&ComplexMatrix::identity(d));
    if residual > TP_TOL {
        return Err(Error::InvalidPovm(format!("elements sum to I up to {residual:.3e}")));
    }
    Ok(d)
}

/// `Λ(ρ) = Σᵢ Tr(Fᵢρ) |bᵢ⟩⟨bᵢ|`.
pub fn make_completely_decohering(basis: &[PureState], povm: &[ComplexMatrix]) -> Result<KrausChannel> {
    let d = check_povm(povm)?;
    if basis.len() != povm.len() {
        return Err(Error::InvalidArgument(format!(
            "{} basis vectors for {} POVM elements",
            basis.len(),
            povm.len()
        )));
    }
    if basis.iter().any(|b| b.dim() != d) {
        return Err(Error::InvalidArgument(
            "basis dimension differs from POVM dimension".into(),
        ));
    }
    let residual = gram_residual(basis);
    if residual >= ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { residual });
    }
    let mut ops = Vec::new();
    for (b, f) in basis.iter().zip(povm) {
        let spectrum = jacobi(f);
        for (k, &mu) in spectrum.eigenvalues.iter().enumerate() {
            if mu > KRAUS_RANK_CUTOFF {
                let fv = spectrum.vector(k);
                ops.push(ComplexMatrix::outer(b.amplitudes(), &fv).scale_real(mu.sqrt()));
            }
        }
    }
    validate_cptp(ops)
}

/// Projective dephasing in the computational basis.
pub fn full_dephasing(d: usize) -> KrausChannel {
    KrausChannel::new_unchecked((0..d).map(|i| ComplexMatrix::unit(d, i, i)).collect())
}

/// POVM `Fᵢ = Σ_j T_ij |b_j⟩⟨b_j|` from a column-stochastic matrix `T` (columns sum to one).
pub fn povm_from_stochastic(basis: &[PureState], t: &[Vec<f64>]) -> Result<Vec<ComplexMatrix>> {
    let d = basis.len();
    if t.len() != d || t.iter().any(|row| row.len() != d) {
        return Err(Error::InvalidArgument("stochastic matrix must be d×d".into()));
    }
    for j in 0..d {
        check_probability_vector(&t.iter().map(|row| row[j]).collect::<Vec<_>>())?;
    }
    Ok(t.iter()
        .map(|row| {
            let mut f = ComplexMatrix::zeros(d, d);
            for (b, &w) in basis.iter().zip(row) {
                f.add_scaled_in_place(&b.projector(), C64::new(w, 0.0));
            }
            f
        })
        .collect())
}

/// Kraus operators `√wᵢ Uᵢ`.
pub fn make_unital_mixture(weights: &[f64], unitaries: &[ComplexMatrix]) -> Result<KrausChannel> {
    if weights.len() != unitaries.len() || weights.is_empty() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} unitaries",
            weights.len(),
            unitaries.len()
        )));
    }
    check_probability_vector(weights)?;
    for u in unitaries {
        check_unitary(u)?;
    }
    let ops = weights
        .iter()
        .zip(unitaries)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, u)| u.scale_real(w.sqrt()))
        .collect();
    validate_cptp(ops)
}

/// Qutrit channel with Kraus set `{|2⟩⟨2|} ∪ {eᵢ uᵢ (|0⟩⟨0| + |1⟩⟨1|)}`, each `uᵢ` a 2×2
/// unitary on `span{|0⟩, |1⟩}` and `Σ eᵢ² = 1`.
pub fn make_example_channel(e_weights: &[f64], rank2_unitaries: &[ComplexMatrix]) -> Result<KrausChannel> {
    if e_weights.len() != rank2_unitaries.len() || e_weights.is_empty() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} unitaries",
            e_weights.len(),
            rank2_unitaries.len()
        )));
    }
    let squares: Vec<f64> = e_weights.iter().map(|e| e * e).collect();
    if e_weights.iter().any(|&e| e.is_nan() || e < 0.0) {
        return Err(Error::InvalidWeights("negative weight".into()));
    }
    check_probability_vector(&squares)?;
    let mut ops = vec![ComplexMatrix::unit(3, 2, 2)];
    for (&e, u) in e_weights.iter().zip(rank2_unitaries) {
        if u.rows() != 2 || u.cols() != 2 {
            return Err(Error::DimensionMismatch {
                left: (2, 2),
                right: (u.rows(), u.cols()),
            });
        }
        check_unitary(u)?;
        let mut k = ComplexMatrix::zeros(3, 3);
        for i in 0..2 {
            for j in 0..2 {
                k[(i, j)] = u[(i, j)] * e;
            }
        }
        ops.push(k);
    }
    validate_cptp(ops)
}

/// Real rotation by `theta` on a two-dimensional space.
pub fn rotation2(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]).expect("2x2")
}

/// Qubit amplitude damping with decay probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            min: 0.0,
            max: 1.0,
        });
    }
    let k0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - gamma).sqrt()]])?;
    let k1 = ComplexMatrix::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]])?;
    validate_cptp(vec![k0, k1])
}

/// `ρ ↦ σ` for every input.
pub fn replacement(d: usize, sigma: &DensityMatrix) -> KrausChannel {
    let spectrum = jacobi(sigma.matrix());
    let mut ops = Vec::new();
    for (k, &l) in spectrum.eigenvalues.iter().enumerate() {
        if l > KRAUS_RANK_CUTOFF {
            let v = spectrum.vector(k);
            for i in 0..d {
                ops.push(ComplexMatrix::outer(&v, PureState::basis(d, i).amplitudes()).scale_real(l.sqrt()));
            }
        }
    }
    KrausChannel::new_unchecked(ops)
}

/// Parameterized description of a channel, mirrored by the file format's `meta` block.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    Depolarizing {
        dim: usize,
        p: f64,
    },
    CompletelyDecohering {
        basis: Vec<PureState>,
        povm: Vec<ComplexMatrix>,
    },
    Isotropic {
        kind: GammaKind,
        u: ComplexMatrix,
        p: f64,
    },
    UnitalMixture {
        weights: Vec<f64>,
        unitaries: Vec<ComplexMatrix>,
    },
    Example {
        e_weights: Vec<f64>,
        rank2_unitaries: Vec<ComplexMatrix>,
    },
    RawKraus(Vec<ComplexMatrix>),
}

impl ChannelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Depolarizing { .. } => "depolarizing",
            Self::CompletelyDecohering { .. } => "completely_decohering",
            Self::Isotropic { .. } => "isotropic",
            Self::UnitalMixture { .. } => "unital_mixture",
            Self::Example { .. } => "example_qutrit",
            Self::RawKraus(_) => "raw_kraus",
        }
    }

    pub fn build(&self) -> Result<KrausChannel> {
        match self {
            Self::Depolarizing { dim, p } => depolarizing(*dim, *p),
            Self::CompletelyDecohering { basis, povm } => make_completely_decohering(basis, povm),
            Self::Isotropic { kind, u, p } => make_isotropic(u.rows(), *kind, u, *p),
            Self::UnitalMixture { weights, unitaries } => make_unital_mixture(weights, unitaries),
            Self::Example {
                e_weights,
                rank2_unitaries,
            } => make_example_channel(e_weights, rank2_unitaries),
            Self::RawKraus(ops) => validate_cptp(ops.clone()),
        }
    }
}
