use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{normalized_commutator_norm, vec_inner, vec_norm, ComplexMatrix, C64, ZERO};
use crate::optimize::{multistart_maximize, MultistartConfig};
use crate::sampling::{child_seed, haar_unitary, SampleRng};
use crate::states::{is_classical_on_b, BipartiteState, DensityMatrix, PureState, ORTHONORMAL_TOL};

use super::{chart, starts_for};

/// Outcome of the search for orthogonal inputs with non-commuting outputs.
///
/// A passing verdict means no violation was found within the budget.
#[derive(Clone, Debug)]
pub struct CpVerdict {
    pub preserving: bool,
    /// Largest `‖[Λ(φ), Λ(ψ)]‖_F / (‖Λ(φ)‖_F ‖Λ(ψ)‖_F)` found.
    pub max_violation: f64,
    /// Present iff `max_violation > tol`.
    pub witness_pair: Option<(PureState, PureState)>,
    pub evaluations: usize,
    pub tol: f64,
}

/// A half-classical input on `C² ⊗ C^d` that `I ⊗ Λ` maps to a state that is
/// not classical on B.
#[derive(Clone, Debug)]
pub struct CreationWitness {
    pub input: BipartiteState,
    pub output: BipartiteState,
    pub input_quantumness: f64,
    pub output_quantumness: f64,
    pub pair: (PureState, PureState),
}

/// Normalized commutator of `Λ(|φ⟩⟨φ|)` and `Λ(|ψ⟩⟨ψ|)`.
pub fn output_violation(ch: &KrausChannel, phi: &[C64], psi: &[C64]) -> f64 {
    normalized_commutator_norm(&ch.apply_pure(phi), &ch.apply_pure(psi))
}

/// Maximizes the output violation over orthogonal pure pairs
/// `(W e₀, W e₁)`, `W` unitary, by multistart Nelder–Mead.
///
/// `budget` is the total number of violation evaluations. The best pair is
/// re-orthonormalized and re-scored before the verdict is formed.
pub fn is_commutativity_preserving(ch: &KrausChannel, budget: usize, tol: f64, rng: &mut SampleRng) -> CpVerdict {
    let d = ch.dim();
    let seed = child_seed(rng);
    if d < 2 {
        return CpVerdict {
            preserving: true,
            max_violation: 0.0,
            witness_pair: None,
            evaluations: 0,
            tol,
        };
    }
    let params = d * d;
    let cfg = MultistartConfig::new(starts_for(budget, params), budget, seed);
    let best = multistart_maximize(
        &cfg,
        params,
        |_, rng| haar_unitary(d, rng),
        |base, x| {
            let w = chart(base, x);
            output_violation(ch, &w.col(0), &w.col(1))
        },
    );
    let w = chart(&best.start, &best.x);
    let (phi, psi) = orthonormal_pair(&w.col(0), &w.col(1));
    let max_violation = output_violation(ch, phi.amplitudes(), psi.amplitudes());
    let preserving = max_violation <= tol;
    CpVerdict {
        preserving,
        max_violation,
        witness_pair: (!preserving).then_some((phi, psi)),
        evaluations: best.evals,
        tol,
    }
}

fn orthonormal_pair(a: &[C64], b: &[C64]) -> (PureState, PureState) {
    let na = vec_norm(a);
    let a: Vec<C64> = a.iter().map(|z| z / na).collect();
    let c = vec_inner(&a, b);
    let b: Vec<C64> = b.iter().zip(&a).map(|(y, x)| y - c * x).collect();
    let nb = vec_norm(&b);
    let b = b.iter().map(|z| z / nb).collect();
    (PureState::new_unchecked(a), PureState::new_unchecked(b))
}

/// `½|0⟩⟨0| ⊗ φ + ½|1⟩⟨1| ⊗ ψ` pushed through `I ⊗ Λ`.
///
/// Returns `None` unless the input scores at most `tol / 10` and the output
/// more than `tol` on the quantumness scale.
pub fn witness_from_pair(
    ch: &KrausChannel,
    phi: &PureState,
    psi: &PureState,
    tol: f64,
) -> Result<Option<CreationWitness>> {
    let d = ch.dim();
    if phi.dim() != d || psi.dim() != d {
        return Err(Error::DimensionMismatch {
            left: (d, d),
            right: (phi.dim(), psi.dim()),
        });
    }
    let overlap = phi.overlap(psi).norm();
    if overlap > ORTHONORMAL_TOL {
        return Err(Error::NotOrthogonal { overlap });
    }
    let half = C64::new(0.5, 0.0);
    let mut joint = ComplexMatrix::zeros(2 * d, 2 * d);
    for (k, v) in [phi, psi].into_iter().enumerate() {
        let p = v.projector();
        for i in 0..d {
            for j in 0..d {
                joint[(k * d + i, k * d + j)] = half * p[(i, j)];
            }
        }
    }
    let input = BipartiteState::new(2, d, DensityMatrix::new(joint)?)?;
    let output = ch.apply_local_b(&input)?;
    let inp = is_classical_on_b(&input, tol / 10.0);
    let out = is_classical_on_b(&output, tol);
    if !inp.is_classical_on_b || out.is_classical_on_b || out.quantumness <= tol {
        return Ok(None);
    }
    Ok(Some(CreationWitness {
        input,
        output,
        input_quantumness: inp.quantumness,
        output_quantumness: out.quantumness,
        pair: (phi.clone(), psi.clone()),
    }))
}

/// Runs the commutativity search and, on a violation, builds and verifies
/// the corresponding creation witness.
pub fn creation_witness(ch: &KrausChannel, budget: usize, tol: f64, rng: &mut SampleRng) -> Option<CreationWitness> {
    let verdict = is_commutativity_preserving(ch, budget, tol, rng);
    let (phi, psi) = verdict.witness_pair?;
    witness_from_pair(ch, &phi, &psi, tol).ok().flatten()
}

/// Zero threshold for the reduced overlap in [`example_channel_criterion`].
const OVERLAP_EPS: f64 = 1e-10;

/// Violation condition for the qutrit example channel.
///
/// With `φ₂ = (a₀, a₁)` and `ψ₂ = (b₀, b₁)` the restrictions to
/// `span{|0⟩, |1⟩}`, the reduced overlap is `g = a₀b₀* + a₁b₁*`. Returns true
/// iff `g ≠ 0` and the reduced vectors are not proportional,
/// i.e. `|g| < ‖φ₂‖‖ψ₂‖`.
pub fn example_channel_criterion(phi: &PureState, psi: &PureState) -> Result<bool> {
    if phi.dim() != 3 || psi.dim() != 3 {
        return Err(Error::DimensionMismatch {
            left: (3, 3),
            right: (phi.dim(), psi.dim()),
        });
    }
    let overlap = phi.overlap(psi).norm();
    if overlap > ORTHONORMAL_TOL {
        return Err(Error::NotOrthogonal { overlap });
    }
    let (a, b) = (phi.amplitudes(), psi.amplitudes());
    let g = (0..2).fold(ZERO, |acc, i| acc + a[i] * b[i].conj()).norm();
    let bound = vec_norm(&a[..2]) * vec_norm(&b[..2]);
    Ok(g > OVERLAP_EPS && g < bound * (1.0 - OVERLAP_EPS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, depolarizing, full_dephasing, make_example_channel, rotation2};
    use crate::sampling::{haar_unitary, rng_from_seed};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn example_channel() -> KrausChannel {
        let e = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
        make_example_channel(&e, &[ComplexMatrix::identity(2), rotation2(FRAC_PI_4)]).unwrap()
    }

    #[test]
    fn unitary_channel_preserves() {
        let mut rng = rng_from_seed(1);
        let u = haar_unitary(3, &mut rng);
        let v = is_commutativity_preserving(&KrausChannel::unitary(&u).unwrap(), 4000, 1e-7, &mut rng);
        assert!(v.preserving && v.max_violation < 1e-10, "{}", v.max_violation);
        assert!(v.witness_pair.is_none());
    }

    #[test]
    fn dephasing_preserves() {
        let mut rng = rng_from_seed(2);
        for d in 2..=4 {
            let v = is_commutativity_preserving(&full_dephasing(d), 4000, 1e-7, &mut rng);
            assert!(v.preserving, "d = {d}: {}", v.max_violation);
        }
    }

    #[test]
    fn amplitude_damping_violates_and_matches_grid() {
        let ch = amplitude_damping(0.4).unwrap();
        let mut rng = rng_from_seed(3);
        let v = is_commutativity_preserving(&ch, 4000, 1e-7, &mut rng);
        assert!(v.max_violation > 1e-3);
        // Orthogonal qubit pairs are antipodal Bloch vectors.
        let mut grid_best: f64 = 0.0;
        let n = 60;
        for i in 0..=n {
            let theta = std::f64::consts::PI * i as f64 / n as f64;
            for j in 0..(2 * n) {
                let ph = std::f64::consts::PI * j as f64 / n as f64;
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                let phi = [C64::new(c, 0.0), C64::from_polar(s, ph)];
                let psi = [C64::from_polar(-s, -ph), C64::new(c, 0.0)];
                grid_best = grid_best.max(output_violation(&ch, &phi, &psi));
            }
        }
        assert!(grid_best > 1e-3);
        assert!(
            v.max_violation >= grid_best - 1e-6,
            "{} vs grid {grid_best}",
            v.max_violation
        );
    }

    #[test]
    fn witness_is_sound() {
        let ch = amplitude_damping(0.7).unwrap();
        let mut rng = rng_from_seed(4);
        let w = creation_witness(&ch, 4000, 1e-7, &mut rng).expect("witness");
        assert!(is_classical_on_b(&w.input, 1e-9).is_classical_on_b);
        assert!(w.output_quantumness > 1e-7);
        assert_eq!(w.input.dim_a(), 2);
    }

    #[test]
    fn no_witness_for_identity_or_depolarizing() {
        let mut rng = rng_from_seed(5);
        assert!(creation_witness(&KrausChannel::identity(3), 4000, 1e-7, &mut rng).is_none());
        assert!(creation_witness(&depolarizing(2, 0.6).unwrap(), 4000, 1e-7, &mut rng).is_none());
    }

    #[test]
    fn criterion_on_basis_pairs() {
        let b = |i| PureState::basis(3, i);
        assert!(!example_channel_criterion(&b(0), &b(1)).unwrap());
        assert!(!example_channel_criterion(&b(2), &b(0)).unwrap());
        let plus = PureState::from_real(&[1.0, 0.0, 1.0]).unwrap();
        assert!(example_channel_criterion(&plus, &plus).is_err());
    }

    #[test]
    fn criterion_matches_direct_commutator() {
        let ch = example_channel();
        // Reduced vectors (1/√2, 0) and (1/√2, 0) are proportional: no violation.
        let phi = PureState::from_real(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]).unwrap();
        let psi = PureState::from_real(&[FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2]).unwrap();
        assert!(!example_channel_criterion(&phi, &psi).unwrap());
        assert!(output_violation(&ch, phi.amplitudes(), psi.amplitudes()) < 1e-12);

        let s = 1.0 / 3f64.sqrt();
        let phi = PureState::from_real(&[s, s, s]).unwrap();
        let psi = PureState::from_real(&[FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2]).unwrap();
        assert!(example_channel_criterion(&phi, &psi).unwrap());
        assert!(output_violation(&ch, phi.amplitudes(), psi.amplitudes()) > 1e-3);
        assert!(witness_from_pair(&ch, &phi, &psi, 1e-7).unwrap().is_some());
    }

    #[test]
    fn criterion_agrees_with_commutator_on_random_pairs() {
        let ch = example_channel();
        let mut rng = rng_from_seed(6);
        for _ in 0..200 {
            let u = haar_unitary(3, &mut rng);
            let phi = PureState::new(u.col(0)).unwrap();
            let psi = PureState::new(u.col(1)).unwrap();
            let predicted = example_channel_criterion(&phi, &psi).unwrap();
            let v = output_violation(&ch, phi.amplitudes(), psi.amplitudes());
            assert_eq!(predicted, v > 1e-9, "violation {v}");
        }
    }
}
