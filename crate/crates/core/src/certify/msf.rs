use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ZERO};
use crate::optimize::{multistart_maximize, MultistartConfig};
use crate::sampling::{child_seed, haar_unitary, SampleRng};
use crate::states::BipartiteState;

use super::detect::is_unital;
use super::{chart, starts_for};

/// Allowance for optimizer error when comparing two singlet fractions.
pub const MSF_SLACK: f64 = 1e-6;
/// Unitality threshold for [`verify_msf_bound`].
const UNITAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct MsfResult {
    /// `max_U ⟨Φ_U|ρ|Φ_U⟩`, `|Φ_U⟩ = (I ⊗ U)|Φ⁺⟩`.
    pub singlet_fraction: f64,
    pub optimal_unitary: ComplexMatrix,
    /// `(dF + 1)/(d + 1)`.
    pub fidelity: f64,
    pub evaluations: usize,
}

/// Average teleportation fidelity `(dF + 1)/(d + 1)`.
pub fn teleportation_fidelity(f: f64, d: usize) -> f64 {
    let d = d as f64;
    (d * f + 1.0) / (d + 1.0)
}

/// `⟨Φ_U|ρ|Φ_U⟩` with `(Φ_U)_{i·d + b} = U_{b i}/√d`.
pub fn singlet_overlap(rho: &ComplexMatrix, u: &ComplexMatrix) -> f64 {
    let d = u.rows();
    let s = 1.0 / (d as f64).sqrt();
    let mut w = vec![ZERO; d * d];
    for i in 0..d {
        for b in 0..d {
            w[i * d + b] = u[(b, i)] * s;
        }
    }
    let rw = rho.mul_vec(&w);
    w.iter().zip(&rw).fold(ZERO, |acc, (x, y)| acc + x.conj() * y).re
}

/// Maximum singlet fraction by multistart search over `U = U₀ exp(iH)`.
///
/// Start 0 uses `U₀ = I`, so the result is never below `⟨Φ⁺|ρ|Φ⁺⟩`.
pub fn msf(s: &BipartiteState, budget: usize, rng: &mut SampleRng) -> Result<MsfResult> {
    let d = s.dim_b();
    if s.dim_a() != d {
        return Err(Error::DimensionMismatch {
            left: (s.dim_a(), s.dim_a()),
            right: (d, d),
        });
    }
    let seed = child_seed(rng);
    let rho = s.matrix();
    let params = d * d;
    let cfg = MultistartConfig::new(starts_for(budget, params), budget, seed);
    let best = multistart_maximize(
        &cfg,
        params,
        |i, rng| {
            if i == 0 {
                ComplexMatrix::identity(d)
            } else {
                haar_unitary(d, rng)
            }
        },
        |base, x| singlet_overlap(rho, &chart(base, x)),
    );
    let u = chart(&best.start, &best.x);
    let f = singlet_overlap(rho, &u).clamp(0.0, 1.0);
    Ok(MsfResult {
        singlet_fraction: f,
        optimal_unitary: u,
        fidelity: teleportation_fidelity(f, d),
        evaluations: best.evals,
    })
}

#[derive(Clone, Debug)]
pub struct MsfBound {
    pub before: MsfResult,
    pub after: MsfResult,
    /// `after ≤ before + MSF_SLACK`.
    pub holds: bool,
}

/// Compares the singlet fraction of `s` with that of `(I ⊗ Λ)(s)` for a unital `Λ`.
pub fn verify_msf_bound(s: &BipartiteState, ch: &KrausChannel, budget: usize, rng: &mut SampleRng) -> Result<MsfBound> {
    if !is_unital(ch, UNITAL_TOL) {
        return Err(Error::NotUnital {
            residual: ch.unitality_residual(),
        });
    }
    let out = ch.apply_local_b(s)?;
    let before = msf(s, budget, rng)?;
    let after = msf(&out, budget, rng)?;
    let holds = after.singlet_fraction <= before.singlet_fraction + MSF_SLACK;
    Ok(MsfBound { before, after, holds })
}

/// Exact qubit MSF: on `U = a₀I + i(a₁X + a₂Y + a₃Z)`, `a ∈ S³`, the overlap
/// is a real quadratic form whose largest eigenvalue is the maximum.
#[cfg(test)]
pub(crate) fn qubit_msf_exact(rho: &ComplexMatrix) -> f64 {
    use crate::linalg::{jacobi, pauli_x, pauli_y, pauli_z, C64, I};
    let gens = [
        ComplexMatrix::identity(2),
        pauli_x().scale(I),
        pauli_y().scale(I),
        pauli_z().scale(I),
    ];
    let mut q = ComplexMatrix::zeros(4, 4);
    for j in 0..4 {
        for k in 0..4 {
            // Polarization of the quadratic form a ↦ ⟨Φ_U|ρ|Φ_U⟩.
            let sum = gens[j].try_add(&gens[k]).unwrap();
            let diff = gens[j].try_sub(&gens[k]).unwrap();
            let v = (singlet_overlap(rho, &sum) - singlet_overlap(rho, &diff)) / 4.0;
            q[(j, k)] = C64::new(v, 0.0);
        }
    }
    jacobi(&q).eigenvalues[3]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, depolarizing, make_unital_mixture};
    use crate::sampling::{random_density, rng_from_seed};
    use crate::states::{DensityMatrix, PureState};

    fn phi_plus(d: usize) -> BipartiteState {
        BipartiteState::maximally_entangled(d)
    }

    #[test]
    fn maximally_entangled_and_mixed() {
        let mut rng = rng_from_seed(1);
        let r = msf(&phi_plus(3), 4000, &mut rng).unwrap();
        assert!((r.singlet_fraction - 1.0).abs() < 1e-12);
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        let mixed = BipartiteState::new(2, 2, DensityMatrix::maximally_mixed(4)).unwrap();
        let r = msf(&mixed, 2000, &mut rng).unwrap();
        assert!((r.singlet_fraction - 0.25).abs() < 1e-12);
        assert!((r.fidelity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_state_closed_form() {
        // F = (Σ √λᵢ)²/d over the Schmidt coefficients.
        let mut rng = rng_from_seed(2);
        let (a, b) = (0.9f64.sqrt(), 0.1f64.sqrt());
        let u = haar_unitary(2, &mut rng);
        let v = haar_unitary(2, &mut rng);
        let mut amp = vec![ZERO; 4];
        for (c, k) in [(a, 0), (b, 1)] {
            for i in 0..2 {
                for j in 0..2 {
                    amp[i * 2 + j] += u[(i, k)] * v[(j, k)] * c;
                }
            }
        }
        let psi = PureState::new(amp).unwrap();
        let s = BipartiteState::new(2, 2, DensityMatrix::from_pure(&psi)).unwrap();
        let want = (a + b).powi(2) / 2.0;
        let r = msf(&s, 4000, &mut rng).unwrap();
        assert!(
            (r.singlet_fraction - want).abs() < 1e-9,
            "{} vs {want}",
            r.singlet_fraction
        );
        assert!((qubit_msf_exact(s.matrix()) - want).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_exact_qubit_form() {
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let rho = random_density(4, 4, &mut rng).unwrap();
            let s = BipartiteState::new(2, 2, rho).unwrap();
            let r = msf(&s, 4000, &mut rng).unwrap();
            let exact = qubit_msf_exact(s.matrix());
            assert!(
                (r.singlet_fraction - exact).abs() < 1e-9,
                "{} vs {exact}",
                r.singlet_fraction
            );
        }
    }

    #[test]
    fn depolarized_bell_state() {
        let mut rng = rng_from_seed(4);
        for p in [0.0, 0.3, 0.8] {
            let b = verify_msf_bound(&phi_plus(2), &depolarizing(2, p).unwrap(), 4000, &mut rng).unwrap();
            assert!((b.after.singlet_fraction - (1.0 + 3.0 * p) / 4.0).abs() < 1e-8);
            assert!(b.holds);
        }
    }

    #[test]
    fn identity_channel_keeps_fraction() {
        let mut rng = rng_from_seed(5);
        let s = BipartiteState::new(3, 3, random_density(9, 3, &mut rng).unwrap()).unwrap();
        let b = verify_msf_bound(&s, &KrausChannel::identity(3), 4000, &mut rng).unwrap();
        assert!((b.after.singlet_fraction - b.before.singlet_fraction).abs() < 1e-8);
    }

    #[test]
    fn bound_holds_for_mixtures_and_rejects_non_unital() {
        let mut rng = rng_from_seed(6);
        for _ in 0..10 {
            let s = BipartiteState::new(2, 2, random_density(4, 2, &mut rng).unwrap()).unwrap();
            let us = [haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)];
            let ch = make_unital_mixture(&[0.6, 0.4], &us).unwrap();
            assert!(verify_msf_bound(&s, &ch, 4000, &mut rng).unwrap().holds);
        }
        let s = phi_plus(2);
        assert!(matches!(
            verify_msf_bound(&s, &amplitude_damping(0.3).unwrap(), 1000, &mut rng),
            Err(Error::NotUnital { .. })
        ));
    }
}
