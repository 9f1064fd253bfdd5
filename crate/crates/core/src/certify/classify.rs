use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::sampling::SampleRng;
use crate::states::PureState;

use super::commutativity::{is_commutativity_preserving, witness_from_pair, CreationWitness};
use super::detect::{is_completely_decohering, is_isotropic, is_unital, IsotropicFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelLabel {
    CompletelyDecohering,
    UnitalMixing,
    Isotropic,
    Creator,
    /// No detector matched yet no violation was found: a candidate
    /// counterexample to the known classification, or a search miss.
    PreservingUnclassified,
}

impl ChannelLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelLabel::CompletelyDecohering => "CompletelyDecohering",
            ChannelLabel::UnitalMixing => "UnitalMixing",
            ChannelLabel::Isotropic => "Isotropic",
            ChannelLabel::Creator => "Creator",
            ChannelLabel::PreservingUnclassified => "PreservingUnclassified",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Evidence {
    /// Common eigenbasis of all outputs.
    Basis(Vec<PureState>),
    Unital {
        residual: f64,
    },
    Isotropic(IsotropicFit),
    Witness(Box<CreationWitness>),
    NoViolationFound {
        max_violation: f64,
        evaluations: usize,
    },
}

#[derive(Clone, Debug)]
pub struct ClassificationVerdict {
    pub label: ChannelLabel,
    pub evidence: Evidence,
}

fn require_dim(ch: &KrausChannel, d: usize) -> Result<()> {
    if ch.dim() != d {
        return Err(Error::DimensionMismatch {
            left: (d, d),
            right: (ch.dim(), ch.dim()),
        });
    }
    Ok(())
}

/// Qubit channels are unital, completely decohering, or creators.
pub fn classify_qubit(
    ch: &KrausChannel,
    budget: usize,
    tol: f64,
    rng: &mut SampleRng,
) -> Result<ClassificationVerdict> {
    require_dim(ch, 2)?;
    if is_unital(ch, tol) {
        return Ok(ClassificationVerdict {
            label: ChannelLabel::UnitalMixing,
            evidence: Evidence::Unital {
                residual: ch.unitality_residual(),
            },
        });
    }
    if let Some(basis) = is_completely_decohering(ch, tol) {
        return Ok(decohering(basis));
    }
    Ok(search(ch, budget, tol, rng))
}

/// Qutrit channels are completely decohering, isotropic, or creators.
pub fn classify_qutrit(
    ch: &KrausChannel,
    budget: usize,
    tol: f64,
    rng: &mut SampleRng,
) -> Result<ClassificationVerdict> {
    require_dim(ch, 3)?;
    Ok(detect_then_search(ch, budget, tol, rng))
}

/// Dispatches on dimension. For `d ≥ 4` the same detectors run as for
/// qutrits, without a completeness guarantee.
pub fn classify(ch: &KrausChannel, budget: usize, tol: f64, rng: &mut SampleRng) -> ClassificationVerdict {
    match ch.dim() {
        2 => classify_qubit(ch, budget, tol, rng).expect("dimension checked"),
        _ => detect_then_search(ch, budget, tol, rng),
    }
}

fn decohering(basis: Vec<PureState>) -> ClassificationVerdict {
    ClassificationVerdict {
        label: ChannelLabel::CompletelyDecohering,
        evidence: Evidence::Basis(basis),
    }
}

fn detect_then_search(ch: &KrausChannel, budget: usize, tol: f64, rng: &mut SampleRng) -> ClassificationVerdict {
    if let Some(basis) = is_completely_decohering(ch, tol) {
        return decohering(basis);
    }
    if let Some(fit) = is_isotropic(ch, tol) {
        return ClassificationVerdict {
            label: ChannelLabel::Isotropic,
            evidence: Evidence::Isotropic(fit),
        };
    }
    search(ch, budget, tol, rng)
}

fn search(ch: &KrausChannel, budget: usize, tol: f64, rng: &mut SampleRng) -> ClassificationVerdict {
    let verdict = is_commutativity_preserving(ch, budget, tol, rng);
    let witness = verdict
        .witness_pair
        .as_ref()
        .and_then(|(phi, psi)| witness_from_pair(ch, phi, psi, tol).ok().flatten());
    match witness {
        Some(w) => ClassificationVerdict {
            label: ChannelLabel::Creator,
            evidence: Evidence::Witness(Box::new(w)),
        },
        None => ClassificationVerdict {
            label: ChannelLabel::PreservingUnclassified,
            evidence: Evidence::NoViolationFound {
                max_violation: verdict.max_violation,
                evaluations: verdict.evaluations,
            },
        },
    }
}
