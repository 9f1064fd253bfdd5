use proptest::prelude::*;

use qcorr::channels::{kraus_from_choi, make_isotropic, GammaKind, KrausChannel};
use qcorr::linalg::{commutator, hermitian_eig, tensor, ComplexMatrix};
use qcorr::sampling::{
    ginibre, haar_unitary, random_cptp, random_density, random_probability_vector, random_pure, rng_from_seed,
};
use qcorr::states::{
    is_classical_on_b, make_half_classical, measure_and_dephase, von_neumann_entropy, BipartiteState, DensityMatrix,
    PureState,
};

fn hermitian(d: usize, seed: u64) -> ComplexMatrix {
    ginibre(d, d, &mut rng_from_seed(seed)).hermitian_part()
}

fn random_channel(d: usize, seed: u64) -> KrausChannel {
    let mut rng = rng_from_seed(seed);
    let env = 1 + (seed as usize % d.pow(2));
    random_cptp(d, env, &mut rng).unwrap()
}

fn half_classical(da: usize, db: usize, seed: u64) -> BipartiteState {
    let mut rng = rng_from_seed(seed);
    let u = haar_unitary(db, &mut rng);
    let basis: Vec<PureState> = (0..db).map(|j| PureState::new(u.col(j)).unwrap()).collect();
    let cond: Vec<DensityMatrix> = (0..db).map(|_| random_density(da, da, &mut rng).unwrap()).collect();
    make_half_classical(&random_probability_vector(db, &mut rng), &cond, &basis).unwrap()
}

fn local(s: &BipartiteState, ua: &ComplexMatrix, ub: &ComplexMatrix) -> BipartiteState {
    let u = tensor(ua, ub);
    let m = u.matmul(s.matrix()).unwrap().matmul(&u.adjoint()).unwrap();
    BipartiteState::new(s.dim_a(), s.dim_b(), DensityMatrix::new(m).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(d in 1usize..=9, seed in any::<u64>()) {
        let h = hermitian(d, seed);
        let s = hermitian_eig(&h).unwrap();
        prop_assert!(s.reconstruct().distance(&h) <= 1e-12 * (1.0 + h.frobenius_norm()));
        prop_assert!(s.eigenvectors.unitarity_defect() < 1e-12);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn commutator_is_antisymmetric(d in 1usize..=6, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let a = ginibre(d, d, &mut rng);
        let b = ginibre(d, d, &mut rng);
        let ab = commutator(&a, &b).unwrap();
        let ba = commutator(&b, &a).unwrap();
        prop_assert!(ab.try_add(&ba).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn entropy_is_concave(d in 2usize..=5, seed in any::<u64>(), t in 0.0f64..=1.0) {
        let mut rng = rng_from_seed(seed);
        let r = random_density(d, 1 + seed as usize % d, &mut rng).unwrap();
        let s = random_density(d, d, &mut rng).unwrap();
        let mut mix = r.matrix().scale_real(t);
        mix = mix.try_add(&s.matrix().scale_real(1.0 - t)).unwrap();
        let mix = DensityMatrix::new(mix).unwrap();
        let lhs = von_neumann_entropy(&mix);
        let rhs = t * von_neumann_entropy(&r) + (1.0 - t) * von_neumann_entropy(&s);
        prop_assert!(lhs >= rhs - 1e-10);
    }

    #[test]
    fn half_classical_round_trip(da in 1usize..=3, db in 2usize..=4, seed in any::<u64>()) {
        let s = half_classical(da, db, seed);
        let report = is_classical_on_b(&s, 1e-9);
        prop_assert!(report.is_classical_on_b, "quantumness {}", report.quantumness);
        let basis = report.witness_basis.unwrap();
        let dephased = measure_and_dephase(&s, &basis).unwrap();
        prop_assert!(dephased.matrix().distance(s.matrix()) < 1e-9);
    }

    #[test]
    fn classicality_invariant_under_local_unitaries(db in 2usize..=3, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed ^ 0x5a5a);
        let ua = haar_unitary(2, &mut rng);
        let ub = haar_unitary(db, &mut rng);
        let classical = half_classical(2, db, seed);
        prop_assert!(is_classical_on_b(&local(&classical, &ua, &ub), 1e-9).is_classical_on_b);

        let generic = BipartiteState::new(2, db, random_density(2 * db, 2 * db, &mut rng).unwrap()).unwrap();
        let q = is_classical_on_b(&generic, 1e-9);
        prop_assert!(!q.is_classical_on_b);
        let id = ComplexMatrix::identity(2);
        let rotated = is_classical_on_b(&local(&generic, &id, &ub), 1e-9);
        prop_assert!((rotated.quantumness - q.quantumness).abs() < 1e-10);
        prop_assert!(!is_classical_on_b(&local(&generic, &ua, &ub), 1e-9).is_classical_on_b);
    }

    #[test]
    fn channels_preserve_trace_and_positivity(d in 2usize..=4, seed in any::<u64>()) {
        let ch = random_channel(d, seed);
        prop_assert!(ch.trace_preservation_residual() < 1e-10);
        let rho = random_density(d, d, &mut rng_from_seed(!seed)).unwrap();
        let out = ch.apply(&rho).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(out.eigenvalues()[0] >= -1e-12);
    }

    #[test]
    fn adjoint_duality(d in 2usize..=4, seed in any::<u64>()) {
        let ch = random_channel(d, seed);
        let mut rng = rng_from_seed(!seed);
        let a = ginibre(d, d, &mut rng);
        let b = ginibre(d, d, &mut rng);
        // Tr(A† Λ(B)) = Tr(Λ*(A)† B).
        let lhs = a.inner(&ch.apply_matrix(&b));
        let rhs = ch.adjoint().apply_matrix(&a).inner(&b);
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn choi_kraus_round_trip(d in 2usize..=4, seed in any::<u64>()) {
        let ch = random_channel(d, seed);
        let back = kraus_from_choi(&ch.choi()).unwrap();
        prop_assert!(back.choi().matrix().distance(ch.choi().matrix()) < 1e-10);
        let x = ginibre(d, d, &mut rng_from_seed(!seed));
        prop_assert!(back.apply_matrix(&x).distance(&ch.apply_matrix(&x)) < 1e-9);
    }

    #[test]
    fn isotropic_commutators_scale_by_p_squared(d in 2usize..=4, seed in any::<u64>(), t in 0.0f64..=1.0) {
        let mut rng = rng_from_seed(seed);
        let lo = -1.0 / ((d * d) as f64 - 1.0);
        let p = lo + (1.0 - lo) * t;
        let u = haar_unitary(d, &mut rng);
        let ch = make_isotropic(d, GammaKind::Unitary, &u, p).unwrap();
        let x = random_pure(d, &mut rng).projector();
        let y = random_pure(d, &mut rng).projector();
        let before = commutator(&x, &y).unwrap().frobenius_norm();
        let after = commutator(&ch.apply_matrix(&x), &ch.apply_matrix(&y)).unwrap().frobenius_norm();
        prop_assert!((after - p * p * before).abs() < 1e-9, "p = {p}: {after} vs {}", p * p * before);
    }

    #[test]
    fn unital_adjoint_is_unital_and_trace_preserving(d in 2usize..=4, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let n = 1 + seed as usize % 4;
        let w = random_probability_vector(n, &mut rng);
        let us: Vec<ComplexMatrix> = (0..n).map(|_| haar_unitary(d, &mut rng)).collect();
        let ch = qcorr::channels::make_unital_mixture(&w, &us).unwrap();
        let adj = ch.adjoint();
        prop_assert!(adj.unitality_residual() < 1e-10);
        prop_assert!(adj.trace_preservation_residual() < 1e-10);
    }
}
