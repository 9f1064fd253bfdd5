//! Small dense complex linear algebra.

mod eigen;
mod matrix;
mod ops;
mod simdiag;

pub(crate) use eigen::jacobi;
pub use eigen::{
    expm_i_hermitian, hermitian_eig, hermitian_from_coords, inverse_sqrt, psd_sqrt, HermitianMatrix, Spectrum,
    DEGENERACY_TOL, HERM_TOL,
};
pub use matrix::{pauli_x, pauli_y, pauli_z, vec_inner, vec_norm, ComplexMatrix, C64, I, ONE, ZERO};
pub use ops::{
    commutator, is_normal, normality_defect, normalized_commutator_norm, partial_trace, tensor, Keep, COMMUTATOR_TOL,
};
pub use simdiag::{diagonalization_residual, simultaneous_diagonalization};
