use crate::channels::{isotropic_p_range, GammaKind, KrausChannel};
use crate::linalg::{jacobi, simultaneous_diagonalization, tensor, ComplexMatrix, C64, ONE};
use crate::sampling::{random_density, random_pure, rng_from_seed, SampleRng};
use crate::states::{entropy_of_spectrum, von_neumann_entropy, DensityMatrix, PureState};

/// Fixed seed for the probe state used to fit `p`.
const PROBE_SEED: u64 = 0x1_5072_091c;

/// `‖Λ(I) − I‖_F ≤ tol`.
pub fn is_unital(ch: &KrausChannel, tol: f64) -> bool {
    ch.unitality_residual() <= tol
}

/// Checks `S(Λ(ρ)) ≥ S(ρ) − tol` on the maximally mixed state and on
/// `n_samples` random full-rank states.
pub fn is_mixing_sampled(ch: &KrausChannel, n_samples: usize, tol: f64, rng: &mut SampleRng) -> bool {
    let d = ch.dim();
    let holds = |rho: &DensityMatrix| {
        let out = jacobi(&ch.apply_matrix(rho.matrix())).eigenvalues;
        entropy_of_spectrum(&out) >= von_neumann_entropy(rho) - tol
    };
    if !holds(&DensityMatrix::maximally_mixed(d)) {
        return false;
    }
    (0..n_samples).all(|_| holds(&random_density(d, d, rng).expect("rank d is valid")))
}

/// Hermitian operator basis: `E_ii`, then `(E_ij + E_ji)/√2` and `i(E_ij − E_ji)/√2` for `i < j`.
fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out: Vec<ComplexMatrix> = (0..d).map(|i| ComplexMatrix::unit(d, i, i)).collect();
    for i in 0..d {
        for j in (i + 1)..d {
            let mut x = ComplexMatrix::zeros(d, d);
            x[(i, j)] = C64::new(s, 0.0);
            x[(j, i)] = C64::new(s, 0.0);
            out.push(x);
            let mut y = ComplexMatrix::zeros(d, d);
            y[(i, j)] = C64::new(0.0, s);
            y[(j, i)] = C64::new(0.0, -s);
            out.push(y);
        }
    }
    out
}

/// Common eigenbasis of the images of a Hermitian operator basis, if the
/// images commute within `tol`; by linearity every output is then diagonal
/// in that basis.
pub fn is_completely_decohering(ch: &KrausChannel, tol: f64) -> Option<Vec<PureState>> {
    let outputs: Vec<ComplexMatrix> = hermitian_basis(ch.dim())
        .iter()
        .map(|x| ch.apply_matrix(x).hermitian_part())
        .collect();
    let largest = outputs.iter().map(ComplexMatrix::frobenius_norm).fold(0.0, f64::max);
    let nonzero: Vec<ComplexMatrix> = outputs
        .into_iter()
        .filter(|m| m.frobenius_norm() > 1e-12 * largest)
        .collect();
    let v = simultaneous_diagonalization(&nonzero, tol).ok()?;
    Some((0..v.cols()).map(|j| PureState::new_unchecked(v.col(j))).collect())
}

/// Fitted form `Λ(ρ) = pΓ(ρ) + (1 − p)I/d`.
#[derive(Clone, Debug)]
pub struct IsotropicFit {
    pub p: f64,
    /// `None` when `p ≈ 0` and any Γ fits.
    pub kind: Option<GammaKind>,
    pub unitary: Option<ComplexMatrix>,
    /// Largest `‖Λ(E_ij) − Λ_fit(E_ij)‖_F` over matrix units.
    pub residual: f64,
}

/// Recognizes isotropic channels.
///
/// The channel must be unital. `p` is read off the output spectrum of a fixed
/// probe state; `Γ = (Λ − (1 − p)Tr(·)I/d)/p` is rebuilt on matrix units and
/// its Choi matrix, or that of `Γ ∘ transpose`, must be rank one, which yields
/// `U`. The fit is accepted when it reproduces `Λ` on every matrix unit
/// within `tol`.
pub fn is_isotropic(ch: &KrausChannel, tol: f64) -> Option<IsotropicFit> {
    let d = ch.dim();
    if d < 2 || !is_unital(ch, tol) {
        return None;
    }
    let images: Vec<Vec<ComplexMatrix>> = (0..d)
        .map(|i| (0..d).map(|j| ch.apply_matrix(&ComplexMatrix::unit(d, i, j))).collect())
        .collect();

    let flat = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
    let zero_fit = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| {
            if i == j {
                images[i][j].distance(&flat)
            } else {
                images[i][j].frobenius_norm()
            }
        })
        .fold(0.0, f64::max);
    if zero_fit <= tol {
        return Some(IsotropicFit {
            p: 0.0,
            kind: None,
            unitary: None,
            residual: zero_fit,
        });
    }

    let probe = random_pure(d, &mut rng_from_seed(PROBE_SEED));
    let spectrum = jacobi(&ch.apply_pure(probe.amplitudes())).eigenvalues;
    let scale = d as f64 / (d as f64 - 1.0);
    let inv_d = 1.0 / d as f64;
    let mut candidates = Vec::new();
    // One eigenvalue p + (1 − p)/d, the other d − 1 equal to (1 − p)/d.
    if spread(&spectrum[..d - 1]) <= tol {
        candidates.push((spectrum[d - 1] - inv_d) * scale);
    }
    if spread(&spectrum[1..]) <= tol {
        candidates.push((spectrum[0] - inv_d) * scale);
    }

    for p in candidates {
        for kind in [GammaKind::Unitary, GammaKind::TransposeUnitary] {
            let (lo, hi) = isotropic_p_range(d, kind);
            if p < lo - tol || p > hi + tol {
                continue;
            }
            let Some(u) = extract_unitary(&images, p, kind) else {
                continue;
            };
            let residual = fit_residual(&images, p, kind, &u);
            if residual <= tol {
                return Some(IsotropicFit {
                    p,
                    kind: Some(kind),
                    unitary: Some(u),
                    residual,
                });
            }
        }
    }
    None
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Leading Choi eigenvector of the reconstructed Γ (or Γ ∘ transpose) reshaped to `U`.
fn extract_unitary(images: &[Vec<ComplexMatrix>], p: f64, kind: GammaKind) -> Option<ComplexMatrix> {
    let d = images.len();
    let mut j = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            let (i, k) = match kind {
                GammaKind::Unitary => (a, b),
                GammaKind::TransposeUnitary => (b, a),
            };
            let mut g = images[i][k].clone();
            if i == k {
                g.add_scaled_in_place(&ComplexMatrix::identity(d), C64::new(-(1.0 - p) / d as f64, 0.0));
            }
            let g = g.scale_real(1.0 / (p * d as f64));
            j.add_scaled_in_place(&tensor(&g, &ComplexMatrix::unit(d, a, b)), ONE);
        }
    }
    let s = jacobi(&j.hermitian_part());
    let top = s.eigenvalues[d * d - 1];
    // Rank one with unit trace; the final action check decides acceptance.
    if (top - 1.0).abs() > 1e-3 {
        return None;
    }
    let v = s.vector(d * d - 1);
    let root_d = (d as f64).sqrt();
    let u = ComplexMatrix::from_vec(d, d, v.iter().map(|z| z * root_d).collect()).ok()?;
    (u.unitarity_defect() < 1e-3).then_some(u)
}

#[allow(clippy::needless_range_loop)]
fn fit_residual(images: &[Vec<ComplexMatrix>], p: f64, kind: GammaKind, u: &ComplexMatrix) -> f64 {
    let d = images.len();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for k in 0..d {
            let x = match kind {
                GammaKind::Unitary => ComplexMatrix::unit(d, i, k),
                GammaKind::TransposeUnitary => ComplexMatrix::unit(d, k, i),
            };
            let mut fit = u.sandwich(&x).scale_real(p);
            if i == k {
                fit.add_scaled_in_place(&ComplexMatrix::identity(d), C64::new((1.0 - p) / d as f64, 0.0));
            }
            worst = worst.max(images[i][k].distance(&fit));
        }
    }
    worst
}
