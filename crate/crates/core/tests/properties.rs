//! Randomized invariants of the algebra, form and snapshot layers.

use gaugeflow::liealg::random_element;
use gaugeflow::snapshot::Snapshot;
use gaugeflow::{FieldGen, FormField, GridSpec};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(k in 2usize..=3, s in any::<u64>()) {
        let (x, y, z) = (random_element(k, s, 1.0), random_element(k, s ^ 1, 1.0), random_element(k, s ^ 2, 1.0));
        let xy = x.bracket(&y).unwrap();
        let yx = y.bracket(&x).unwrap();
        prop_assert!(xy.add(&yx).unwrap().norm() <= 1e-14);
        let cyc = x.bracket(&y.bracket(&z).unwrap()).unwrap()
            .add(&y.bracket(&z.bracket(&x).unwrap()).unwrap()).unwrap()
            .add(&z.bracket(&x.bracket(&y).unwrap()).unwrap()).unwrap();
        prop_assert!(cyc.norm() <= 1e-13);
        prop_assert!(xy.is_valid(1e-12));
    }

    #[test]
    fn adjoint_action_is_an_isometry(k in 2usize..=3, s in any::<u64>(), scale in 0.1f64..3.0) {
        let g = random_element(k, s, scale).exp_map();
        prop_assert!(g.is_valid(1e-10));
        let (x, y) = (random_element(k, s ^ 7, 1.0), random_element(k, s ^ 9, 1.0));
        let (gx, gy) = (g.conjugate(&x).unwrap(), g.conjugate(&y).unwrap());
        let before = x.inner(&y).unwrap();
        prop_assert!((gx.inner(&gy).unwrap() - before).abs() <= 1e-12 * (1.0 + before.abs()));
        prop_assert!(x.inner(&x).unwrap() >= 0.0);
    }

    #[test]
    fn hodge_star_squares_to_sign(m in 2usize..=3, p in 0usize..=3, s in any::<u64>()) {
        prop_assume!(p <= m);
        let g = GridSpec::new(m, 8, 2, 2).unwrap();
        let f = FieldGen::new(s, 1, 1.0).form(&g, p).unwrap();
        let sign = if (p * (m - p)) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(f.hodge_star().hodge_star().max_abs_diff(&f.scale(sign)).unwrap() == 0.0);
    }

    #[test]
    fn d_squared_vanishes(m in 2usize..=3, p in 0usize..=1, s in any::<u64>()) {
        prop_assume!(p + 2 <= m);
        let g = GridSpec::new(m, 8, 2, 2).unwrap();
        let f = FieldGen::new(s, 2, 1.0).form(&g, p).unwrap();
        let dd = f.ext_d().unwrap().ext_d().unwrap();
        prop_assert!(dd.lp_norm(2.0).unwrap() <= 1e-10 * (1.0 + f.lp_norm(2.0).unwrap()));
    }

    #[test]
    fn d_and_codiff_are_adjoint(m in 2usize..=3, p in 0usize..=1, s in any::<u64>()) {
        let g = GridSpec::new(m, 8, 2, 2).unwrap();
        let a = FieldGen::new(s, 2, 1.0).form(&g, p).unwrap();
        let b = FieldGen::new(s ^ 3, 2, 1.0).form(&g, p + 1).unwrap();
        let lhs = a.ext_d().unwrap().discrete_inner(&b).unwrap();
        let rhs = a.discrete_inner(&b.codifferential().unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
    }

    #[test]
    fn graded_bracket_symmetry(p in 0usize..=2, q in 0usize..=1, s in any::<u64>()) {
        let g = GridSpec::new(3, 8, 2, 2).unwrap();
        let a = FieldGen::new(s, 1, 1.0).form(&g, p).unwrap();
        let b = FieldGen::new(s ^ 5, 1, 1.0).form(&g, q).unwrap();
        let sign = if (p * q) % 2 == 0 { -1.0 } else { 1.0 };
        let ab = a.graded_bracket(&b).unwrap();
        let ba = b.graded_bracket(&a).unwrap();
        prop_assert!(ab.max_abs_diff(&ba.scale(sign)).unwrap() <= 1e-14);
    }

    #[test]
    fn snapshot_round_trip_and_truncation(m in 2usize..=3, p in 0usize..=2, s in any::<u64>(), cut in 1usize..2000) {
        prop_assume!(p <= m);
        let g = GridSpec::new(m, 8, 2, 2).unwrap();
        let f = FieldGen::new(s, 1, 1.0).form(&g, p).unwrap();
        let bytes = Snapshot::from_form(&f).encode();
        let back: FormField = Snapshot::decode(&bytes).unwrap().into_form().unwrap();
        prop_assert_eq!(&back, &f);
        let cut = cut.min(bytes.len());
        prop_assert!(Snapshot::decode(&bytes[..bytes.len() - cut]).is_err());
    }
}
