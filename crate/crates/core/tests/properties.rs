use proptest::prelude::*;
use synaptic_core::sampling::{random_atom_pair, random_pair, random_projection_pair, trial_rng};
use synaptic_core::{
    carrier, cbs_decompose, commutes, inf_with_atom_complement, inf_with_projection, join, meet,
    orthosupplement, pair_commutator, psd_leq, sqrt_psd, sym_eigen, Effect, Projection,
    SymmetricElement, ToleranceConfig,
};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

prop_compose! {
    fn symmetric()(n in 1usize..=7)(entries in prop::collection::vec(-10.0f64..10.0, n * n), n in Just(n)) -> SymmetricElement {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| 0.5 * (entries[i * n + j] + entries[j * n + i])).collect())
            .collect();
        SymmetricElement::from_rows(&rows).unwrap()
    }
}

fn pair() -> impl Strategy<Value = (Projection, Effect)> {
    (2usize..=6, any::<u64>()).prop_map(|(n, seed)| random_pair(&mut trial_rng(seed, 0), n))
}

fn projections() -> impl Strategy<Value = (Projection, Projection)> {
    (2usize..=6, any::<u64>()).prop_map(|(n, seed)| random_projection_pair(&mut trial_rng(seed, 1), n))
}

fn atom_pair() -> impl Strategy<Value = (Projection, Effect)> {
    (2usize..=6, any::<u64>()).prop_map(|(n, seed)| random_atom_pair(&mut trial_rng(seed, 2), n))
}

fn scale(a: &SymmetricElement) -> f64 {
    1.0 + a.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigen_reconstructs_with_sorted_values(a in symmetric()) {
        let eig = sym_eigen(&a, &tol()).unwrap();
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(a.distance(&eig.reconstruct()) <= 1e-12 * scale(&a));
        let v = &eig.eigenvectors;
        let gram = v.transpose().matmul(v);
        let n = a.dim();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn carrier_is_the_least_projection_fixing_a(a in symmetric()) {
        let t = tol();
        let c = carrier(&a, &t).unwrap();
        let fixed = c.element().product(&a);
        prop_assert!((&fixed - a.as_matrix()).frobenius_norm() <= 1e-10 * scale(&a));
        let eig = sym_eigen(&a, &t).unwrap();
        let nonzero = eig.eigenvalues.iter().filter(|l| l.abs() > t.zero_threshold(eig.spectral_radius())).count();
        prop_assert_eq!(c.rank(), nonzero);
    }

    #[test]
    fn square_root_of_a_gram_matrix(a in symmetric()) {
        let g = a.square();
        let r = sqrt_psd(&g, &tol()).unwrap();
        prop_assert!(psd_leq(&SymmetricElement::zeros(g.dim()), &r, &tol()).unwrap());
        // roots of eigenvalues cut at the threshold move by up to its square root
        prop_assert!(r.square().distance(&g) <= 1e-8 * (1.0 + g.norm()));
    }

    #[test]
    fn orthosupplement_is_an_involution((_p, e) in pair()) {
        let back = orthosupplement(&orthosupplement(&e));
        prop_assert!(back.element().distance(e.element()) < 1e-15);
        let sum = orthosupplement(&e).element().as_matrix() + e.element().as_matrix();
        prop_assert!((&sum - SymmetricElement::identity(e.dim()).as_matrix()).frobenius_norm() < 1e-14);
    }

    #[test]
    fn meet_and_join_bound_their_arguments((p, q) in projections()) {
        let t = tol();
        let j = join(&p, &q, &t).unwrap();
        let m = meet(&p, &q, &t).unwrap();
        prop_assert!(p.leq(&j, &t) && q.leq(&j, &t));
        prop_assert!(m.leq(&p, &t) && m.leq(&q, &t));
        prop_assert!(j.approx_eq(&join(&q, &p, &t).unwrap(), &t));
        // De Morgan
        let dual = meet(&p.ortho(), &q.ortho(), &t).unwrap();
        prop_assert!(j.ortho().approx_eq(&dual, &t));
        prop_assert_eq!(j.rank() + m.rank(), p.rank() + q.rank());
    }

    #[test]
    fn cbs_reconstructs_the_effect((p, e) in pair()) {
        let d = cbs_decompose(&p, &e, &tol()).unwrap();
        prop_assert!(d.reconstruction_residual() <= 1e-10 * (1.0 + e.element().norm()));
        prop_assert!(d.b_carrier.leq(&d.c_carrier, &tol()));
        prop_assert!(d.b_carrier.leq(&d.s_carrier, &tol()));
    }

    #[test]
    fn commutator_vanishes_exactly_on_commuting_pairs((p, e) in pair()) {
        let t = tol();
        let r = pair_commutator(&p, &e, &t).unwrap();
        let together = commutes(p.element(), e.element(), &t).unwrap();
        prop_assert_eq!(r.is_zero(), together);
        // off r the pair commutes
        let rc = r.ortho();
        let pr = rc.element().sandwich(p.element());
        let er = rc.element().sandwich(e.element());
        prop_assert!(commutes(&pr, &er, &t).unwrap());
    }

    #[test]
    fn atom_infimum_is_a_lower_bound((p, e) in atom_pair()) {
        let t = tol();
        let record = inf_with_atom_complement(&p, &e, &t).unwrap();
        let f = record.infimum.element();
        prop_assert!(psd_leq(f, e.element(), &t).unwrap());
        prop_assert!(psd_leq(f, p.ortho().element(), &t).unwrap());
        let general = inf_with_projection(&e, &p.ortho(), &t).unwrap();
        prop_assert!(general.element().distance(f) <= 1e-8);
    }
}
