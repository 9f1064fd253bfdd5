//! Commutativity-preservation testing, creation witnesses, channel
//! classification, maximum singlet fraction, and channel censuses.
//!
//! Searches over pure-state pairs and unitaries use a chart
//! `W(x) = W₀ · exp(iH(x))` around a random base point `W₀`, with `H`
//! Hermitian and given by `d²` real coordinates.

mod classify;
mod commutativity;
mod detect;
mod msf;
mod scan;

pub use classify::{classify, classify_qubit, classify_qutrit, ChannelLabel, ClassificationVerdict, Evidence};
pub use commutativity::{
    creation_witness, example_channel_criterion, is_commutativity_preserving, output_violation, witness_from_pair,
    CpVerdict, CreationWitness,
};
pub use detect::{is_completely_decohering, is_isotropic, is_mixing_sampled, is_unital, IsotropicFit};
pub use msf::{msf, singlet_overlap, teleportation_fidelity, verify_msf_bound, MsfBound, MsfResult, MSF_SLACK};
pub use scan::{census, conjecture_scan, Anomaly, ChannelFamily, FamilyCounts, ScanRecord, ScanReport};

use crate::linalg::{expm_i_hermitian, hermitian_from_coords, ComplexMatrix};

/// Local-search starts per multistart run.
pub const DEFAULT_STARTS: usize = 32;
/// Objective evaluations per verdict, shared across starts.
pub const DEFAULT_BUDGET: usize = 20_000;
/// Threshold on the normalized output commutator.
pub const DEFAULT_TOL: f64 = 1e-7;

/// `base · exp(iH(x))`.
pub(crate) fn chart(base: &ComplexMatrix, x: &[f64]) -> ComplexMatrix {
    let h = hermitian_from_coords(base.cols(), x);
    base.mul_unchecked(&expm_i_hermitian(&h))
}

/// Number of starts that leaves each at least a few simplex generations.
pub(crate) fn starts_for(budget: usize, params: usize) -> usize {
    (budget / (20 * (params + 1))).clamp(1, DEFAULT_STARTS)
}
