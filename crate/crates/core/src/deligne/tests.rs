use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn models() -> Vec<SimplicialGroupModel> {
    vec![circle_model(), band_model(4)]
}

fn random_pair(m: &SimplicialGroupModel, rng: &mut ChaCha8Rng) -> (DiscreteForm, DiscreteForm) {
    let phi = DiscreteForm::random(m, 1, 2, 0.7, rng);
    // Δψ = 0 for ψ = Δβ
    let psi = DiscreteForm::random(m, 1, 1, 0.5, rng).delta(m).unwrap();
    (phi, psi)
}

fn scaled(c: &Component, s: i64) -> Component {
    c.iter().map(|(&k, &v)| (k, v * s)).collect()
}

fn sum(parts: Vec<Component>) -> Component {
    let mut out = Component::new();
    for p in parts {
        for (k, v) in p {
            *out.entry(k).or_insert_with(|| Q::from_integer(0)) += v;
        }
    }
    out.retain(|_, v| *v != Q::from_integer(0));
    out
}

#[test]
fn degree_three_cocycle_equations_split_by_level() {
    // (a, μ, ξ, ρ) ↦ (Δa, −Da + Δμ, Dμ + Δξ − (1, 0, ρ), −Dξ)
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for m in models() {
        let mut c = random_cochain(&m, 2, 3, 8, &mut rng);
        c.rho = Some(random_delta_closed(&m, 2, 0.4, &mut rng));
        let out = bi_d(&m, &c).unwrap();
        let level = |q: usize| -> BTreeMap<(usize, usize), Component> {
            c.comps.iter().filter(|((l, _, _), _)| *l == q).map(|(&(_, p, k), x)| ((p, k), x.clone())).collect()
        };
        let (xi, mu, a) = (level(1), level(2), level(3));
        let get = |map: &BTreeMap<(usize, usize), Component>, p, k| map.get(&(p, k)).cloned().unwrap_or_default();
        let d_xi = deligne_d(&m, 2, 1, &xi);
        let d_mu = deligne_d(&m, 2, 2, &mu);
        let d_a = deligne_d(&m, 2, 3, &a);
        for (p, k) in [(3, 0), (2, 1), (1, 2)] {
            assert_eq!(out.component(1, p, k).cloned().unwrap_or_default(), scaled(&get(&d_xi, p, k), -1));
        }
        for (p, k) in [(2, 0), (1, 1), (0, 2)] {
            let mut parts = vec![get(&d_mu, p, k), simplicial_delta(&m, 1, p, &get(&xi, p, k))];
            if (p, k) == (0, 2) {
                parts.push(scaled(&c.rho.as_ref().unwrap().restrict(&m), -1));
            }
            assert_eq!(out.component(2, p, k).cloned().unwrap_or_default(), sum(parts));
        }
        for (p, k) in [(1, 0), (0, 1)] {
            let want = sum(vec![scaled(&get(&d_a, p, k), -1), simplicial_delta(&m, 2, p, &get(&mu, p, k))]);
            assert_eq!(out.component(3, p, k).cloned().unwrap_or_default(), want);
        }
        assert_eq!(out.component(4, 0, 0).cloned().unwrap_or_default(), simplicial_delta(&m, 3, 0, &get(&a, 0, 0)));
        assert_eq!(out.comps.keys().filter(|(q, _, _)| *q > 4).count(), 0);
    }
}

#[test]
fn zero_rho_gives_the_plain_simplicial_differential() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = band_model(4);
    let c = random_cochain(&m, 1, 2, 8, &mut rng);
    let mut with_zero = c.clone();
    with_zero.rho = Some(DiscreteForm::zero(2, 1));
    assert_eq!(bi_d(&m, &c).unwrap(), bi_d(&m, &with_zero).unwrap());
}

#[test]
fn trivial_multiplicative_data_is_a_cocycle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in models() {
        for _ in 0..3 {
            let (phi, psi) = random_pair(&m, &mut rng);
            let c = make_trivial_multiplicative(&m, &phi, &psi).unwrap();
            let (ok, r) = is_cocycle(&m, &c).unwrap();
            assert!(ok, "{}: {:?}", m.name, r);
            let k = mc_class(&m, &c).unwrap();
            assert!(k.kappa.is_empty() && k.is_integer && k.is_cocycle);
            let o = omega_projection(&m, &c).unwrap();
            assert_eq!(o.h, phi.d(&m));
            assert_eq!(o.rho, psi.d(&m).add(&phi.delta(&m).unwrap()));
            assert!(o.conditions_hold());
        }
    }
}

#[test]
fn trivial_multiplicative_special_cases() {
    let m = band_model(4);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let zero = make_trivial_multiplicative(&m, &DiscreteForm::zero(1, 2), &DiscreteForm::zero(2, 1)).unwrap();
    assert!(zero.comps.is_empty() && zero.rho.as_ref().unwrap().is_zero());
    let (phi, _) = random_pair(&m, &mut rng);
    let c = make_trivial_multiplicative(&m, &phi, &DiscreteForm::zero(2, 1)).unwrap();
    assert_eq!(c.rho.unwrap(), phi.delta(&m).unwrap());
}

#[test]
fn perturbed_phi_breaks_the_rho_equation() {
    let m = band_model(4);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (phi, psi) = random_pair(&m, &mut rng);
    let mut c = make_trivial_multiplicative(&m, &phi, &psi).unwrap();
    let cell = m.level(1).complex.cells_of_dim(2)[0];
    let mut comp = c.component(1, 0, 2).cloned().unwrap_or_default();
    *comp.entry(key(&[0], cell)).or_insert_with(|| Q::from_integer(0)) += Q::new(1, 3);
    c.set(1, 0, 2, comp);
    let (ok, r) = is_cocycle(&m, &c).unwrap();
    assert!(!ok);
    assert!(r.offending.iter().any(|e| (e.q, e.p, e.k) == (2, 0, 2)), "{r:?}");
}

#[test]
fn psi_must_be_delta_closed() {
    let m = band_model(4);
    let mut psi = DiscreteForm::zero(2, 1);
    psi.values.insert(m.level(2).complex.cells_of_dim(1)[0], Q::from_integer(1));
    let r = make_trivial_multiplicative(&m, &DiscreteForm::zero(1, 2), &psi);
    assert!(matches!(r, Err(DeligneError::NotDeltaClosed(_))));
}

#[test]
fn alpha_shift_is_a_coboundary_with_minus_d_alpha() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for m in models() {
        let (phi, psi) = random_pair(&m, &mut rng);
        let alpha = DiscreteForm::random(&m, 1, 1, 0.6, &mut rng);
        let c = make_trivial_multiplicative(&m, &phi, &psi).unwrap();
        let w = shift_witness(&m, &alpha).unwrap();
        let psi2 = psi.add(&alpha.delta(&m).unwrap());
        let shifted = |sign: i64| make_trivial_multiplicative(&m, &phi.add(&alpha.d(&m).scale(sign)), &psi2).unwrap();
        assert!(check_coboundary(&m, &c, &shifted(-1), &w).unwrap());
        if !alpha.delta(&m).unwrap().d(&m).is_zero() {
            // φ + dα moves ρ by 2dΔα
            assert!(!check_coboundary(&m, &c, &shifted(1), &w).unwrap());
        }
        assert_eq!(shifted(-1).rho, c.rho);
    }
}

#[test]
fn unrelated_cochains_are_not_cobordant() {
    let m = circle_model();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let c1 = random_cochain(&m, 2, 3, 8, &mut rng);
    let c2 = random_cochain(&m, 2, 3, 8, &mut rng);
    let w = random_cochain(&m, 2, 2, 8, &mut rng);
    assert!(!check_coboundary(&m, &c1, &c2, &w).unwrap());
    assert!(check_coboundary(&m, &c1, &c1, &DeligneCochain::zero(2, 2)).unwrap());
    assert!(matches!(check_coboundary(&m, &c1, &c2, &c1), Err(DeligneError::Degree(_))));
}

/// Integer constants on whole intersections U_I for a few random tuples at
/// every level, function components of degree `degree` only.
fn integer_shift(m: &SimplicialGroupModel, degree: usize, rng: &mut ChaCha8Rng) -> DeligneCochain {
    use rand::Rng;
    let mut s = DeligneCochain::zero(2, degree);
    for q in 1..=m.depth().min(degree) {
        let p = degree - q;
        let l = m.level(q);
        let mut comp = Component::new();
        for _ in 0..3 {
            let t: Vec<u8> = (0..=p).map(|_| rng.random_range(0..l.n_patches()) as u8).collect();
            let mask = t.iter().fold(0u128, |a, &i| a | 1u128 << i);
            let v = Q::from_integer(rng.random_range(-3..=3));
            for &x in l.complex.cells_of_dim(0) {
                if l.in_all(x, mask) {
                    *comp.entry(key(&t, x)).or_insert_with(|| Q::from_integer(0)) += v;
                }
            }
        }
        comp.retain(|_, v| *v != Q::from_integer(0));
        s.set(q, p, 0, comp);
    }
    s
}

/// Cocycle shifted by bi_D(w) and an integer cochain s on the function
/// parts; κ moves by D_tot(s).
fn shifted_kappa_case(m: &SimplicialGroupModel, rng: &mut ChaCha8Rng) {
    let (phi, psi) = random_pair(m, rng);
    let c = make_trivial_multiplicative(m, &phi, &psi).unwrap();
    let w = random_cochain(m, 2, 2, 8, rng);
    let s = integer_shift(m, 3, rng);
    let shifted = c.add(&bi_d(m, &w).unwrap(), 1).unwrap().add(&s, 1).unwrap();
    assert!(check_coboundary(m, &c, &shifted, &w).unwrap());
    let k0 = mc_class(m, &c).unwrap();
    let k1 = mc_class(m, &shifted).unwrap();
    assert!(k1.is_integer && k1.is_cocycle);
    let mut diff = k1.kappa.clone();
    for (key, x) in &k0.kappa {
        let e = diff.entry(*key).or_default();
        for (k, v) in x {
            *e.entry(*k).or_insert_with(|| Q::from_integer(0)) -= v;
        }
        e.retain(|_, v| *v != Q::from_integer(0));
    }
    diff.retain(|_, x| !x.is_empty());
    assert_eq!(diff, tot_differential(m, &function_parts(&s)));
}

#[test]
fn kappa_of_shifted_cocycles_differs_by_the_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for m in models() {
        for _ in 0..3 {
            shifted_kappa_case(&m, &mut rng);
        }
    }
}

#[test]
fn kappa_rejects_non_cocycles_and_n_zero() {
    let m = band_model(4);
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let c = random_cochain(&m, 2, 3, 8, &mut rng);
    assert!(matches!(mc_class(&m, &c), Err(DeligneError::NotCocycle(_))));
    assert!(matches!(mc_class(&m, &DeligneCochain::zero(0, 1)), Err(DeligneError::Degree(_))));
}

/// Valid (H, ρ, B): H = dφ, ρ = Δφ + dΔγ, B_i = φ| + dσ_i.
pub(super) fn random_hrb_input(
    m: &SimplicialGroupModel,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (DiscreteForm, DiscreteForm, Component) {
    let phi = DiscreteForm::random(m, 1, n, 0.6, rng);
    let h = phi.d(m);
    let rho = if n == 0 {
        phi.delta(m).unwrap()
    } else {
        phi.delta(m).unwrap().add(&DiscreteForm::random(m, 1, n - 1, 0.6, rng).delta(m).unwrap().d(m))
    };
    let mut b = phi.restrict(m);
    if n > 0 {
        let sigma = random_cochain(m, n, n, 10, rng);
        if let Some(s) = sigma.component(1, 0, n - 1) {
            for (k, v) in cell_d(m, 1, 0, s) {
                *b.entry(k).or_insert_with(|| Q::from_integer(0)) += v;
            }
            b.retain(|_, v| *v != Q::from_integer(0));
        }
    }
    (h, rho, b)
}

#[test]
fn hrb_cochain_closes_in_form_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for m in models() {
        for n in 0..=1 {
            for _ in 0..3 {
                let (h, rho, b) = random_hrb_input(&m, n, &mut rng);
                let c = make_lemma2_cocycle(&m, n, &h, &rho, &b).unwrap();
                let r = residual(&m, &bi_d(&m, &c).unwrap());
                assert!(r.forms_vanish(), "{} n={n}: {r:?}", m.name);
                let cl = top_form_closedness(&m, n, &rho, &b);
                assert_eq!(cl.minus_rho_max, Q::from_integer(0));
                assert_eq!(cl.plus_rho_max, cl.two_drho_max);
            }
        }
    }
}

#[test]
fn hrb_special_cases_and_preconditions() {
    let m = band_model(4);
    let n = 1;
    let z = make_lemma2_cocycle(&m, n, &DiscreteForm::zero(1, 2), &DiscreteForm::zero(2, 1), &Component::new()).unwrap();
    assert!(z.comps.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let beta = DiscreteForm::random(&m, 1, 1, 0.7, &mut rng);
    // H = dB, ρ = −ΔB leaves ΔH − dρ = 2dΔB, so only exact B is admissible
    let r = make_lemma2_cocycle(&m, n, &beta.d(&m), &beta.delta(&m).unwrap().scale(-1), &beta.restrict(&m));
    assert!(matches!(r, Err(DeligneError::Precondition(ref v)) if v.iter().any(|s| s.starts_with("ΔH"))), "{r:?}");
    let exact = DiscreteForm::random(&m, 1, 0, 0.7, &mut rng).d(&m);
    let c = make_lemma2_cocycle(&m, n, &exact.d(&m), &exact.delta(&m).unwrap().scale(-1), &exact.restrict(&m)).unwrap();
    assert!(c.component(2, 0, 1).is_none());
    let mut bad_h = beta.d(&m);
    bad_h.values.insert(m.level(1).complex.cells_of_dim(2)[0], Q::new(1, 2));
    match make_lemma2_cocycle(&m, n, &bad_h, &DiscreteForm::zero(2, 1), &beta.restrict(&m)) {
        Err(DeligneError::Precondition(v)) => assert!(v.iter().any(|s| s.starts_with("dB_i"))),
        other => panic!("{other:?}"),
    }
}

#[test]
fn omega_projection_of_zero_and_random_cocycles() {
    let m = band_model(4);
    let o = omega_projection(&m, &DeligneCochain::zero(2, 3)).unwrap();
    assert!(o.h.is_zero() && o.rho.is_zero() && o.conditions_hold());
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let (phi, psi) = random_pair(&m, &mut rng);
    let c = make_trivial_multiplicative(&m, &phi, &psi).unwrap();
    let w = random_cochain(&m, 2, 2, 8, &mut rng);
    let shifted = c.add(&bi_d(&m, &w).unwrap(), 1).unwrap();
    assert!(is_cocycle(&m, &shifted).unwrap().0);
    let o = omega_projection(&m, &shifted).unwrap();
    assert!(o.conditions_hold());
    assert_eq!(o.rho, c.rho.unwrap());
}
