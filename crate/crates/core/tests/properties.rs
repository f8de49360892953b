use proptest::prelude::*;

use qms_core::classical::{transition_matrix, BirthDeathChain, RateFamily};
use qms_core::lindblad::{adjoint, build_from_generator_pair, build_schrodinger_generator, verify_cptp};
use qms_core::numerics::{
    cx, generalized_eigenspace, matrix_exponential, nullspace, orthonormalize, vec_dot, ComplexMatrix,
    Tolerances,
};
use qms_core::operators::{HilbertSpace, Subspace};
use qms_core::random::{ginibre, random_gkls, random_hermitian, random_state, seeded};
use qms_core::semigroup::channel;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    orthonormalize(&ginibre(n, n, &mut seeded(seed)), 1e-8)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn expm_semigroup_law(seed in any::<u64>(), n in 1usize..6, s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let a = ginibre(n, n, &mut seeded(seed));
        let lhs = matrix_exponential(&a, s + t).unwrap();
        let rhs = matrix_exponential(&a, s).unwrap().matmul(&matrix_exponential(&a, t).unwrap());
        prop_assert!((&lhs - &rhs).norm_fro() <= 1e-10 * lhs.norm_fro().max(1.0));
    }

    #[test]
    fn expm_of_hermitian_is_unitary(seed in any::<u64>(), n in 1usize..6, t in -3.0f64..3.0) {
        let h = random_hermitian(n, &mut seeded(seed));
        let u = matrix_exponential(&h.scale(cx(0.0, 1.0)), t).unwrap();
        let defect = (&u.adjoint().matmul(&u) - &ComplexMatrix::identity(n)).norm_max();
        prop_assert!(defect < 1e-12);
    }

    #[test]
    fn nullspace_of_low_rank_product(seed in any::<u64>(), n in 2usize..8, r_frac in 0.0f64..1.0) {
        let r = ((n as f64) * r_frac) as usize;
        let mut rng = seeded(seed);
        let m = ginibre(n, r, &mut rng).matmul(&ginibre(r, n, &mut rng));
        let ker = nullspace(&m, &Tolerances::default()).unwrap();
        prop_assert_eq!(ker.ncols(), n - r);
        prop_assert!(m.matmul(&ker).norm_fro() <= 1e-9 * m.norm_fro().max(1.0));
    }

    #[test]
    fn generalized_eigenspace_grows_with_power(seed in any::<u64>(), k in 1usize..4, extra in 1usize..4) {
        // Jordan block of size k at λ plus `extra` eigenvalues away from λ, in a random basis.
        let n = k + extra;
        let lambda = cx(0.3, -0.2);
        let mut j = ComplexMatrix::zeros(n, n);
        for i in 0..k {
            j[(i, i)] = lambda;
            if i + 1 < k {
                j[(i, i + 1)] = cx(1.0, 0.0);
            }
        }
        for i in k..n {
            j[(i, i)] = lambda + cx(1.0 + i as f64, 0.5);
        }
        let u = random_unitary(n, seed);
        let m = u.matmul(&j).matmul(&u.adjoint());
        let tol = Tolerances::default();
        let mut prev = 0;
        for p in 1..=n {
            let dim = generalized_eigenspace(&m, lambda, p, &tol).unwrap().ncols();
            prop_assert!(dim >= prev);
            prop_assert_eq!(dim, p.min(k));
            prev = dim;
        }
    }

    #[test]
    fn heisenberg_schrodinger_duality(seed in any::<u64>(), d in 2usize..5, jumps in 0usize..4) {
        let mut rng = seeded(seed);
        let spec = random_gkls(d, jumps, &mut rng).unwrap();
        let schr = build_schrodinger_generator(&spec).unwrap();
        let heis = adjoint(&schr);
        let rho = ginibre(d, d, &mut rng);
        let x = ginibre(d, d, &mut rng);
        let lhs = vec_dot(&x.vectorize(), &schr.apply(&rho).vectorize());
        let rhs = vec_dot(&heis.apply(&x).vectorize(), &rho.vectorize());
        prop_assert!((lhs - rhs).norm() <= 1e-10 * schr.matrix().norm_fro());
    }

    #[test]
    fn generator_pair_matches_gkls_form(seed in any::<u64>(), d in 2usize..5, jumps in 0usize..4) {
        let spec = random_gkls(d, jumps, &mut seeded(seed)).unwrap();
        let from_pair = build_from_generator_pair(&spec.to_pair()).unwrap();
        let heis = adjoint(&build_schrodinger_generator(&spec).unwrap());
        prop_assert!((from_pair.matrix() - heis.matrix()).norm_max() <= 1e-12 * heis.matrix().norm_max());
    }

    #[test]
    fn random_gkls_channels_are_cptp(seed in any::<u64>(), d in 2usize..5, jumps in 0usize..4, t in 0.0f64..3.0) {
        let spec = random_gkls(d, jumps, &mut seeded(seed)).unwrap();
        let ch = channel(&build_schrodinger_generator(&spec).unwrap(), t).unwrap();
        let rep = verify_cptp(&ch, &Tolerances::default()).unwrap();
        prop_assert!(rep.pass, "{:?}", rep);
    }

    #[test]
    fn channels_map_states_to_states(seed in any::<u64>(), d in 2usize..5, t in 0.0f64..3.0) {
        let mut rng = seeded(seed);
        let spec = random_gkls(d, 2, &mut rng).unwrap();
        let rho = random_state(spec.space(), &mut rng).unwrap();
        let out = channel(&build_schrodinger_generator(&spec).unwrap(), t).unwrap().apply(rho.matrix());
        prop_assert!((out.trace() - cx(1.0, 0.0)).norm() < 1e-10);
        prop_assert!(out.hermitian_defect() < 1e-10);
        prop_assert!(qms_core::operators::min_eigenvalue(&out.hermitian_part()).unwrap() > -1e-10);
    }

    #[test]
    fn subspace_projector_invariants(seed in any::<u64>(), d in 1usize..7, k_frac in 0.0f64..1.0) {
        let k = ((d as f64) * k_frac).round() as usize;
        let space = HilbertSpace::abstract_space(d).unwrap();
        let tol = Tolerances::default();
        let v = Subspace::span(&space, &ginibre(d, k, &mut seeded(seed)), &tol).unwrap();
        let p = v.projector();
        prop_assert_eq!(v.dim(), k);
        prop_assert!((&p.matmul(p) - p).norm_max() < 1e-12);
        prop_assert!(p.hermitian_defect() < 1e-12);
        prop_assert!((p.trace().re - k as f64).abs() < 1e-12);
        let c = v.complement().unwrap();
        prop_assert_eq!(c.dim(), d - k);
        prop_assert!(v.sum(&c, &tol).unwrap().is_full());
        prop_assert!(v.intersection(&c, &tol).unwrap().is_zero());
        prop_assert!(v.contains(&v).unwrap());
    }

    #[test]
    fn transition_rows_are_stochastic(
        birth in 0.0f64..5.0,
        death in 0.0f64..5.0,
        power in 0.0f64..3.0,
        horizon in 1usize..200,
    ) {
        for rates in [
            RateFamily::Constant { birth, death },
            RateFamily::Linear { birth, death },
            RateFamily::Polynomial { birth, death, power },
            RateFamily::Geometric { birth, death, ratio: 1.0 + power / 10.0 },
        ] {
            let t = transition_matrix(&BirthDeathChain::new(rates, horizon).unwrap()).unwrap();
            for i in 0..t.len() {
                prop_assert!((t.row_sum(i) - 1.0).abs() <= 1e-12);
            }
        }
    }
}
