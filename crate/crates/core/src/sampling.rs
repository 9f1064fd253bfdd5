//! Seeded random generators for unitaries, states and channels.
//!
//! Measures: Haar unitaries (Ginibre + QR with positive `R` diagonal),
//! Hilbert–Schmidt / induced Ginibre states, and channels from Haar-random
//! Stinespring isometries. Every stochastic routine draws from a
//! [`SampleRng`]; parallel work uses [`substream`], so results depend only on
//! the master seed and the task index, never on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::channels::{
    isotropic_p_range, make_completely_decohering, make_example_channel, make_isotropic, make_unital_mixture,
    validate_cptp, GammaKind, KrausChannel,
};
use crate::error::{Error, Result};
use crate::linalg::{inverse_sqrt, vec_inner, vec_norm, ComplexMatrix, C64, ONE};
use crate::states::{DensityMatrix, PureState};

pub type SampleRng = ChaCha20Rng;

/// Seed plus dimension; [`SamplerConfig::stream`] hands out independent substreams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub dim: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, dim: usize) -> Self {
        Self { seed, dim }
    }

    pub fn stream(&self, index: u64) -> SampleRng {
        substream(self.seed, index)
    }
}

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Substream `index` of `master`: a ChaCha20 generator seeded with
/// `splitmix64(master ⊕ splitmix64(index))`.
pub fn substream(master: u64, index: u64) -> SampleRng {
    ChaCha20Rng::seed_from_u64(splitmix64(master ^ splitmix64(index)))
}

/// Draws a fresh 64-bit seed from `rng` for a nested computation.
pub fn child_seed(rng: &mut SampleRng) -> u64 {
    rng.random()
}

/// Standard complex normal, `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("shape")
}

/// Orthonormalizes the columns (two Gram–Schmidt passes), keeping `R` with positive diagonal.
fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let mut q = m.clone();
    for j in 0..q.cols() {
        let mut v = q.col(j);
        for _ in 0..2 {
            for k in 0..j {
                let e = q.col(k);
                let c = vec_inner(&e, &v);
                for (x, y) in v.iter_mut().zip(&e) {
                    *x -= c * y;
                }
            }
        }
        let n = vec_norm(&v);
        for x in &mut v {
            *x /= n;
        }
        q.set_col(j, &v);
    }
    q
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    orthonormalize_columns(&ginibre(d, d, rng))
}

/// `d × k` matrix with orthonormal columns, Haar distributed.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    orthonormalize_columns(&ginibre(rows, cols, rng))
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    let v = (0..d).map(|_| complex_normal(rng)).collect();
    PureState::normalized(v).expect("nonzero with probability one")
}

/// `GG†/Tr(GG†)` with `G` a `d × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(Error::InvalidArgument(format!("rank {rank} outside 1..={d}")));
    }
    let g = ginibre(d, rank, rng);
    let w = g.mul_unchecked(&g.adjoint());
    let t = w.trace().re;
    DensityMatrix::new(w.scale_real(1.0 / t))
}

/// Uniform point on the probability simplex.
pub fn random_probability_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Channel with Kraus operators `E_i = (⟨i|_env ⊗ I) V` for a Haar isometry `V: C^d → C^env ⊗ C^d`.
pub fn random_cptp<R: Rng + ?Sized>(d: usize, env_dim: usize, rng: &mut R) -> Result<KrausChannel> {
    if env_dim == 0 || d == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let v = haar_isometry(env_dim * d, d, rng);
    let ops = (0..env_dim)
        .map(|i| {
            let mut e = ComplexMatrix::zeros(d, d);
            for a in 0..d {
                for j in 0..d {
                    e[(a, j)] = v[(i * d + a, j)];
                }
            }
            e
        })
        .collect();
    validate_cptp(ops)
}

fn diag_density(u: &ComplexMatrix, spectrum: &[f64]) -> DensityMatrix {
    let d = ComplexMatrix::from_real_diag(spectrum);
    DensityMatrix::new(u.sandwich(&d)).expect("valid by construction")
}

/// Two density matrices sharing a Haar eigenbasis, with independent uniform spectra.
pub fn random_commuting_pair<R: Rng + ?Sized>(d: usize, rng: &mut R) -> (DensityMatrix, DensityMatrix) {
    let u = haar_unitary(d, rng);
    let s1 = random_probability_vector(d, rng);
    let s2 = random_probability_vector(d, rng);
    (diag_density(&u, &s1), diag_density(&u, &s2))
}

/// First two columns of a Haar unitary.
pub fn random_orthogonal_pure_pair<R: Rng + ?Sized>(d: usize, rng: &mut R) -> (PureState, PureState) {
    assert!(d >= 2, "orthogonal pair needs d ≥ 2");
    let u = haar_isometry(d, 2, rng);
    (PureState::new_unchecked(u.col(0)), PureState::new_unchecked(u.col(1)))
}

/// Random POVM with `n` elements: `Fᵢ = S^{-1/2} Gᵢ S^{-1/2}`, `Gᵢ` Wishart, `S = Σ Gᵢ`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let gs: Vec<ComplexMatrix> = (0..n)
        .map(|_| {
            let a = ginibre(d, d, rng);
            a.mul_unchecked(&a.adjoint())
        })
        .collect();
    let mut s = ComplexMatrix::zeros(d, d);
    for g in &gs {
        s.add_scaled_in_place(g, ONE);
    }
    let w = inverse_sqrt(&s).expect("Wishart sum is positive definite");
    gs.iter().map(|g| w.sandwich(g).hermitian_part()).collect()
}

/// Completely decohering channel onto a Haar basis; the readout is projective
/// (in an independent Haar basis) or a random POVM with equal probability.
pub fn random_completely_decohering<R: Rng + ?Sized>(d: usize, rng: &mut R) -> KrausChannel {
    let u = haar_unitary(d, rng);
    let basis: Vec<PureState> = (0..d).map(|j| PureState::new_unchecked(u.col(j))).collect();
    let povm = if rng.random_bool(0.5) {
        let w = haar_unitary(d, rng);
        (0..d).map(|j| ComplexMatrix::outer(&w.col(j), &w.col(j))).collect()
    } else {
        random_povm(d, d, rng)
    };
    make_completely_decohering(&basis, &povm).expect("valid by construction")
}

/// Isotropic channel with random Γ kind, Haar `U` and `p` uniform on the completely positive range.
pub fn random_isotropic<R: Rng + ?Sized>(d: usize, rng: &mut R) -> (KrausChannel, GammaKind, f64) {
    let kind = if rng.random_bool(0.5) {
        GammaKind::Unitary
    } else {
        GammaKind::TransposeUnitary
    };
    let (lo, hi) = isotropic_p_range(d, kind);
    let p = lo + (hi - lo) * rng.random::<f64>();
    let u = haar_unitary(d, rng);
    (make_isotropic(d, kind, &u, p).expect("p inside range"), kind, p)
}

/// Mixture of `n` Haar unitaries with uniform simplex weights.
pub fn random_unital_mixture<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> KrausChannel {
    let w = random_probability_vector(n, rng);
    let us: Vec<ComplexMatrix> = (0..n).map(|_| haar_unitary(d, rng)).collect();
    make_unital_mixture(&w, &us).expect("valid by construction")
}

/// Qutrit example channel with `n` Haar 2×2 unitaries and random weights.
pub fn random_example_channel<R: Rng + ?Sized>(n: usize, rng: &mut R) -> KrausChannel {
    let w = random_probability_vector(n, rng);
    let e: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let us: Vec<ComplexMatrix> = (0..n).map(|_| haar_unitary(2, rng)).collect();
    make_example_channel(&e, &us).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::commutator;
    use crate::states::von_neumann_entropy;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_from_seed(1);
        for d in 1..=8 {
            let u = haar_unitary(d, &mut rng);
            assert!(u.unitarity_defect() < 1e-12, "d = {d}");
        }
        let u = haar_unitary(1, &mut rng);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_first_moment() {
        let mut rng = rng_from_seed(7);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| haar_unitary(2, &mut rng)[(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean = {mean}");
    }

    #[test]
    fn same_seed_same_stream() {
        let a = haar_unitary(4, &mut substream(99, 3));
        let b = haar_unitary(4, &mut substream(99, 3));
        let c = haar_unitary(4, &mut substream(99, 4));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn density_rank_and_trace() {
        let mut rng = rng_from_seed(2);
        let pure = random_density(3, 1, &mut rng).unwrap();
        assert!(von_neumann_entropy(&pure) < 1e-10);
        let full = random_density(4, 4, &mut rng).unwrap();
        assert!((full.matrix().trace().re - 1.0).abs() < 1e-14);
        assert!(random_density(3, 0, &mut rng).is_err());
        assert!(random_density(3, 4, &mut rng).is_err());
    }

    #[test]
    fn hilbert_schmidt_purity_moment() {
        // Mean purity under the Hilbert–Schmidt measure is 2d/(d²+1) = 0.8 on qubits; the
        // reference comes from direct uniform sampling of the Bloch ball,
        // which induces the same measure in d = 2.
        let mut rng = rng_from_seed(3);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| random_density(2, 2, &mut rng).unwrap().purity())
            .sum::<f64>()
            / n as f64;
        let mut oracle_rng = rng_from_seed(4);
        let mut acc = 0.0;
        let mut count = 0;
        while count < n {
            let r: [f64; 3] = [
                oracle_rng.random_range(-1.0..1.0),
                oracle_rng.random_range(-1.0..1.0),
                oracle_rng.random_range(-1.0..1.0),
            ];
            let r2: f64 = r.iter().map(|x| x * x).sum();
            if r2 <= 1.0 {
                acc += (1.0 + r2) / 2.0;
                count += 1;
            }
        }
        let oracle = acc / n as f64;
        assert!((oracle - 0.8).abs() < 0.01, "oracle = {oracle}");
        assert!((mean - oracle).abs() < 0.01, "mean = {mean}, oracle = {oracle}");
    }

    #[test]
    fn random_channels_are_cptp() {
        let mut rng = rng_from_seed(5);
        let unitary = random_cptp(3, 1, &mut rng).unwrap();
        assert_eq!(unitary.kraus_ops().len(), 1);
        assert!(unitary.kraus_ops()[0].unitarity_defect() < 1e-12);
        let mut full_rank = 0;
        for _ in 0..20 {
            let ch = random_cptp(2, 4, &mut rng).unwrap();
            assert!(ch.trace_preservation_residual() < 1e-10);
            if ch.choi().rank(1e-10) == 4 {
                full_rank += 1;
            }
        }
        assert_eq!(full_rank, 20);
    }

    #[test]
    fn commuting_pair_commutes() {
        let mut rng = rng_from_seed(6);
        for d in 2..=5 {
            let (a, b) = random_commuting_pair(d, &mut rng);
            assert!(commutator(a.matrix(), b.matrix()).unwrap().frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn commuting_pair_spectra_uncorrelated() {
        let mut rng = rng_from_seed(8);
        let n = 4000;
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let (a, b) = random_commuting_pair(3, &mut rng);
                (a.eigenvalues()[2], b.eigenvalues()[2])
            })
            .collect();
        let (mx, my) = pairs
            .iter()
            .fold((0.0, 0.0), |(x, y), &(a, b)| (x + a / n as f64, y + b / n as f64));
        let (mut cxy, mut cxx, mut cyy) = (0.0, 0.0, 0.0);
        for &(a, b) in &pairs {
            cxy += (a - mx) * (b - my);
            cxx += (a - mx).powi(2);
            cyy += (b - my).powi(2);
        }
        let corr = cxy / (cxx * cyy).sqrt();
        assert!(corr.abs() < 0.03, "corr = {corr}");
    }

    #[test]
    fn orthogonal_pairs_and_beta_moments() {
        let mut rng = rng_from_seed(9);
        let d = 3;
        let n = 10_000;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for _ in 0..n {
            let (phi, psi) = random_orthogonal_pure_pair(d, &mut rng);
            assert!(phi.overlap(&psi).norm() < 1e-12);
            assert!((vec_norm(phi.amplitudes()) - 1.0).abs() < 1e-12);
            let x = phi.amplitudes()[0].norm_sqr();
            m1 += x / n as f64;
            m2 += x * x / n as f64;
        }
        // Beta(1, d−1): mean 1/d, second moment 2/(d(d+1)).
        assert!((m1 - 1.0 / 3.0).abs() < 0.02);
        assert!((m2 - 2.0 / 12.0).abs() < 0.02);
    }

    #[test]
    fn family_samplers_are_valid() {
        let mut rng = rng_from_seed(10);
        for d in 2..=4 {
            let cd = random_completely_decohering(d, &mut rng);
            assert!(cd.trace_preservation_residual() < 1e-10);
            let (iso, _, _) = random_isotropic(d, &mut rng);
            assert!(iso.unitality_residual() < 1e-10);
            let mix = random_unital_mixture(d, 3, &mut rng);
            assert!(mix.unitality_residual() < 1e-10);
        }
        let ex = random_example_channel(3, &mut rng);
        assert!(ex.unitality_residual() < 1e-12);
    }
}
