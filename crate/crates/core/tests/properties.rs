use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gerbecalc::branes::{conj_tangent, omega_h, ConjClassPoint};
use gerbecalc::deligne::{
    bi_d, circle_model, make_trivial_multiplicative, mc_class, random_cochain, random_delta_closed, CochainFile,
    DiscreteForm, SimplicialGroupModel,
};
use gerbecalc::lie::{max_abs, GroupElement, GroupTag, InvariantPairing};
use gerbecalc::mesh::MeshFile;
use gerbecalc::wzw::{me_associator, random_disc_maps, random_sphere_map, MickelssonElement};

fn z12() -> &'static SimplicialGroupModel {
    static M: OnceLock<SimplicialGroupModel> = OnceLock::new();
    M.get_or_init(circle_model)
}

fn su2(rng: &mut ChaCha8Rng) -> GroupElement {
    GroupElement::random(GroupTag::SU2, 2, 1.0, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exp_lands_in_su2(seed in any::<u64>(), scale in 0.01f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = GroupTag::SU2.random_algebra(2, scale, &mut rng);
        prop_assert!(GroupElement::exp(GroupTag::SU2, &x).validate(1e-12).is_ok());
    }

    #[test]
    fn pairing_is_symmetric_and_ad_invariant(seed in any::<u64>(), level in 1i64..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = InvariantPairing::calibrated(level);
        let x = GroupTag::SU2.random_algebra(2, 1.0, &mut rng);
        let y = GroupTag::SU2.random_algebra(2, 1.0, &mut rng);
        let g = su2(&mut rng);
        prop_assert!((p.pair(&x, &y) - p.pair(&y, &x)).abs() < 1e-12);
        prop_assert!((p.pair(&g.ad(&x), &g.ad(&y)) - p.pair(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn omega_h_is_antisymmetric_and_equivariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = InvariantPairing::calibrated(1);
        let c = ConjClassPoint::random(&su2(&mut rng), &mut rng).unwrap();
        let v1 = conj_tangent(&c, &GroupTag::SU2.random_algebra(2, 1.0, &mut rng));
        let v2 = conj_tangent(&c, &GroupTag::SU2.random_algebra(2, 1.0, &mut rng));
        let w = omega_h(&c, &p, &v1, &v2).unwrap();
        prop_assert!((w + omega_h(&c, &p, &v2, &v1).unwrap()).abs() < 1e-12);
        let a = su2(&mut rng);
        let (am, ai) = (a.matrix(), a.inverse());
        let moved = ConjClassPoint::new(c.h.clone(), a.mul(&c.g).mul(&ai)).unwrap();
        let w2 = omega_h(&moved, &p, &(am * &v1 * ai.matrix()), &(am * &v2 * ai.matrix())).unwrap();
        prop_assert!((w - w2).abs() < 1e-10);
    }

    #[test]
    fn mesh_text_round_trip_is_exact(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_sphere_map(n, 1.5, &mut rng);
        let back = MeshFile::from_text(&MeshFile::from_group_mesh(&m).to_text()).unwrap().to_group_mesh().unwrap();
        prop_assert_eq!(&back.mesh, &m.mesh);
        for (a, b) in back.values.iter().zip(&m.values) {
            prop_assert!(a.iter().zip(b).all(|(x, y)| max_abs(&(x.matrix() - y.matrix())) == 0.0));
        }
    }

    #[test]
    fn mickelsson_associator_is_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Arc::new(random_disc_maps(3, 2, 1.0, &mut rng));
        let elt = |rng: &mut ChaCha8Rng| {
            let word = (0..rng.random_range(1..=3)).map(|_| (rng.random_range(0..2), rng.random_bool(0.5))).collect();
            MickelssonElement::new(base.clone(), word, Complex64::from_polar(1.0, rng.random_range(0.0..6.0)), 1).unwrap()
        };
        let (a, b, c) = (elt(&mut rng), elt(&mut rng), elt(&mut rng));
        prop_assert!((me_associator(&a, &b, &c).unwrap() - 1.0).norm() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bi_d_squares_to_zero(seed in any::<u64>(), n in 0usize..3, extra in 0usize..3) {
        let m = z12();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let degree = (n + extra).min(n + 2);
        let mut c = random_cochain(m, n, degree, 6, &mut rng);
        if degree == n + 1 {
            c.rho = Some(random_delta_closed(m, n, 0.3, &mut rng));
        }
        prop_assert!(bi_d(m, &bi_d(m, &c).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn delta_squares_to_zero_on_forms(seed in any::<u64>(), degree in 0usize..2) {
        let m = z12();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = DiscreteForm::random(m, 1, degree, 0.5, &mut rng);
        prop_assert!(f.delta(m).unwrap().delta(m).unwrap().is_zero());
    }

    #[test]
    fn cochain_file_round_trip(seed in any::<u64>(), n in 0usize..3) {
        let m = z12();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = random_cochain(m, n, n + 1, 5, &mut rng);
        c.rho = Some(random_delta_closed(m, n, 0.2, &mut rng));
        let text = serde_json::to_string(&CochainFile::from_cochain(&c)).unwrap();
        let back = serde_json::from_str::<CochainFile>(&text).unwrap().to_cochain().unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn kappa_is_integral_after_coboundary_shift(seed in any::<u64>()) {
        let m = z12();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = DiscreteForm::random(m, 1, 2, 0.5, &mut rng);
        let psi = DiscreteForm::random(m, 1, 1, 0.5, &mut rng).delta(m).unwrap();
        let c = make_trivial_multiplicative(m, &phi, &psi).unwrap();
        let w = random_cochain(m, 2, 2, 6, &mut rng);
        let shifted = c.add(&bi_d(m, &w).unwrap(), 1).unwrap();
        let k = mc_class(m, &shifted).unwrap();
        prop_assert!(k.is_integer && k.is_cocycle);
    }
}
