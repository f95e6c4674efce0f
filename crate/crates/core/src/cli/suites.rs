use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Check, CliError, Command, RunConfig};
use crate::branes::{bibrane_curvature, omega_h, BiconjPoint, ConjClassPoint};
use crate::chern_simons::{
    gauge_shift_check, pontryagin_defect, transition_identity_check, ConnectionData, ConnectionSpec, FactorSpec,
};
use crate::deligne::{
    self, bi_d, check_coboundary, shift_witness, is_cocycle, top_form_closedness, make_lemma2_cocycle,
    make_trivial_multiplicative, mc_class, omega_projection, random_cochain, random_delta_closed, residual,
    tot_differential, validate_model, Component, DeligneCochain, DiscreteForm, SimplicialGroupModel, Q,
};
use crate::lie::{
    calibrate_pairing, eta, pull_product, random_frame, rho, simplicial_delta, su2_point, FdConfig, Form, GroupElement,
    GroupTag, IndexMap, InvariantPairing,
};
use crate::mesh::{integrate_pullback, read_group_mesh, s3_identity_map, s3_mesh, ConeOptions, GroupMesh, QuadratureRule};
use crate::wzw::{
    integer_distance, lemma6_check, me_associator, me_equal, polyakov_wiegmann_check, random_disc_maps,
    random_sphere_map, smooth_field_map, wz_action, LoopStack, MickelssonElement,
};

type Emit<'a> = &'a mut dyn FnMut(Check);

fn suite_err(e: impl std::fmt::Display) -> CliError {
    CliError::Suite(e.to_string())
}

fn max_fold(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

pub(super) fn run(command: Command, cfg: &RunConfig, emit: Emit) -> Result<(), CliError> {
    match command {
        Command::FormIdentities => form_identities(cfg, emit),
        Command::Normalization => normalization(cfg, emit),
        Command::Pw => pw(cfg, emit),
        Command::Mickelsson => mickelsson(cfg, emit),
        Command::Deligne => deligne_suite(cfg, emit),
        Command::McClass => mc_class_suite(cfg, emit),
        Command::Cs => cs(cfg, emit),
        Command::Transition => transition(cfg, emit),
        Command::Lemma6 => lemma6(cfg, emit),
        Command::Branes => branes(cfg, emit),
    }
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed())
}

fn form_identities(cfg: &RunConfig, emit: Emit) -> Result<(), CliError> {
    let tol = cfg.tolerance_scale();
    let n = cfg.samples.unwrap_or(100);
    let p = InvariantPairing::calibrated(cfg.level.unwrap_or(1));
    let e = eta(&p);
    let e1 = e.pullback(&IndexMap::projection(2, 0)).map_err(suite_err)?;
    let e2 = e.pullback(&IndexMap::projection(2, 1)).map_err(suite_err)?;
    let e12 = pull_product(&e, 2, &[0, 1]).map_err(suite_err)?;
    let drho = rho(&p).ext_d(FdConfig { step: 1e-3, richardson: true }).map_err(suite_err)?;
    let mut r = rng(cfg);
    let d = max_fold((0..n).map(|_| {
        let pt = su2_point(2, &mut r);
        let fr = random_frame(&pt, 3, &mut r);
        let lhs = e1.eval_owned(&pt, &fr).unwrap() + e2.eval_owned(&pt, &fr).unwrap() - e12.eval_owned(&pt, &fr).unwrap();
        (lhs - drho.eval_owned(&pt, &fr).unwrap()).abs()
    }));
    emit(Check::numeric("eta_transgression_defect", d, 1e-5 * tol));
    let dr = simplicial_delta(&rho(&p)).map_err(suite_err)?;
    let d = max_fold((0..n).map(|_| {
        let pt = su2_point(3, &mut r);
        let fr = random_frame(&pt, 2, &mut r);
        dr.eval_owned(&pt, &fr).unwrap().abs()
    }));
    emit(Check::numeric("rho_delta_closed_defect", d, 1e-10 * tol));
    Ok(())
}

fn normalization(cfg: &RunConfig, emit: Emit) -> Result<(), CliError> {
    let tol = cfg.tolerance_scale();
    let cal = calibrate_pairing(crate::lie::CALIBRATION_RESOLUTION).map_err(suite_err)?;
    let target = 0.25 / std::f64::consts::PI.powi(2);
    emit(
        Check::numeric("calibration_relative_to_one_over_4pi2", (cal.c - target).abs() / target, 1e-3 * tol)
            .with_note(format!("c = {:.9}", cal.c)),
    );
    let rule = match cfg.quadrature_order {
        Some(m) => QuadratureRule::collapsed_gauss(3, m),
        None => QuadratureRule::default_for(3),
    };
    let e = eta(&InvariantPairing::calibrated(1));
    match &cfg.mesh {
        Some(path) => {
            let map = read_mesh(path)?;
            let v = integrate_pullback(&e, &map, &rule).map_err(suite_err)?;
            emit(Check::numeric("eta_integral_distance_to_integer", integer_distance(v), 1e-3 * tol).with_note(format!("∫η = {v}")));
        }
        None => {
            let map = s3_identity_map(cfg.resolution.unwrap_or(6));
            let v = integrate_pullback(&e, &map, &rule).map_err(suite_err)?;
            emit(
                Check::numeric("eta_integral_minus_one", (v - 1.0).abs(), 1e-3 * tol)
                    .with_note(format!("∫η = {v} on {} tetrahedra", map.mesh.len())),
            );
        }
    }
    Ok(())
}

fn read_mesh(path: &PathBuf) -> Result<GroupMesh, CliError> {
    if !path.exists() {
        return Err(CliError::File { path: path.clone(), source: std::io::Error::from(std::io::ErrorKind::NotFound) });
    }
    read_group_mesh(path).map_err(|e| CliError::Parse { path: path.clone(), message: e.to_string() })
}

fn pw(cfg: &RunConfig, emit: Emit) -> Result<(), CliError> {
    let tol = cfg.tolerance_scale();
    let k = cfg.level.unwrap_or(2);
    let n = cfg.resolution.unwrap_or(12);
    let trials = cfg.samples.unwrap_or(3);
    let mut r = rng(cfg);
    let mut defect = 0.0f64;
    let mut wz = 0.0f64;
    for t in 0..trials {
        let a = random_sphere_map(n, 1.2, &mut r);
        let b = random_sphere_map(n, 1.2, &mut r);
        defect = defect.max(polyakov_wiegmann_check(&a, &b, k, &ConeOptions::default()).map_err(suite_err)?.defect);
        let o1 = ConeOptions { seed: 2 * t as u64, fixed_candidates: false, ..Default::default() };
        let o2 = ConeOptions { seed: 2 * t as u64 + 1, fixed_candidates: false, ..Default::default() };
        let x = wz_action(&a, 1, &o1).map_err(suite_err)?;
        let y = wz_action(&a, 1, &o2).map_err(suite_err)?;
        wz = wz.max(integer_distance(x.raw_integral - y.raw_integral));
    }
    emit(Check::numeric("polyakov_wiegmann_defect", defect, 1e-3 * tol));
    emit(Check::numeric("wz_extension_difference_distance_to_integer", wz, 1e-3 * tol));
    Ok(())
}

fn mickelsson(cfg: &RunConfig, emit: Emit) -> Result<(), CliError> {
    let tol = cfg.tolerance_scale();
    let k = cfg.level.unwrap_or(2);
    let mut r = rng(cfg);
    let base = Arc::new(random_disc_maps(cfg.resolution.unwrap_or(5), 3, 1.2, &mut r));
    let mut worst = 0.0f64;
    let elt = |r: &mut ChaCha8Rng| {
        let len = r.random_range(1..=3);
        let word = (0..len).map(|_| (r.random_range(0..3), r.random_bool(0.5))).collect();
        MickelssonElement::new(base.clone(), word, Complex64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU)), k)
    };
    for _ in 0..cfg.samples.unwrap_or(10) {
        let (a, b, c) = (elt(&mut r).map_err(suite_err)?, elt(&mut r).map_err(suite_err)?, elt(&mut r).map_err(suite_err)?);
        worst = worst.max((me_associator(&a, &b, &c).map_err(suite_err)? - Complex64::new(1.0, 0.0)).norm());
    }
    emit(Check::numeric("associator_defect", worst, 1e-9 * tol));
    let a = elt(&mut r).map_err(suite_err)?;
    // quadrature-limited: the two glued halves are triangulated with different vertex orders
    let same = me_equal(&a, &a, 1e-6 * tol, &ConeOptions::default()).map_err(suite_err)?;
    emit(Check::numeric("self_equality_distance", same.distance, 1e-6 * tol));
    Ok(())
}

fn load_model(cfg: &RunConfig) -> Result<SimplicialGroupModel, CliError> {
    match cfg.model.as_deref().unwrap_or("z12") {
        "z12" => Ok(deligne::circle_model()),
        "band" => Ok(deligne::band_model(4)),
        path => {
            let p = PathBuf::from(path);
            let text = std::fs::read_to_string(&p).map_err(|source| CliError::File { path: p.clone(), source })?;
            SimplicialGroupModel::from_json(&text).map_err(|e| CliError::Parse { path: p, message: e.to_string() })
        }
    }
}

fn trivial_pair(m: &SimplicialGroupModel, r: &mut ChaCha8Rng) -> Result<(DiscreteForm, DiscreteForm), CliError> {
    let phi = DiscreteForm::random(m, 1, 2, 0.7, r);
    let psi = DiscreteForm::random(m, 1, 1, 0.5, r).delta(m).map_err(suite_err)?;
    Ok((phi, psi))
}

fn deligne_suite(cfg: &RunConfig, emit: Emit) -> Result<(), CliError> {
    let m = load_model(cfg)?;
    if m.depth() < 4 {
        return Err(CliError::Config(format!("model {} has {} levels; the suite needs 4", m.name, m.depth())));
    }
    let report = validate_model(&m, 0);
    emit(Check::exact("model_valid", report.is_valid(), m.name.clone()));
    let mut r = rng(cfg);
    let samples = cfg.samples.unwrap_or(100);
    let mut nonzero = 0;
    for i in 0..samples {
        let n = i % 3;
        let degree = r.random_range(0..=n + 2);
        let mut c = random_cochain(&m, n, degree, 8, &mut r);
        if degree == n + 1 {
            c.rho = Some(random_delta_closed(&m, n, 0.3, &mut r));
        }
        if !bi_d(&m, &bi_d(&m, &c).map_err(suite_err)?).map_err(suite_err)?.is_zero() {
            nonzero += 1;
        }
    }
    emit(Check::exact("bi_d_squared_nonzero_count", nonzero == 0, nonzero));

    let (phi, psi) = trivial_pair(&m, &mut r)?;
    let c = make_trivial_multiplicative(&m, &phi, &psi).map_err(suite_err)?;
    let (ok, res) = is_cocycle(&m, &c).map_err(suite_err)?;
    emit(Check::exact("trivial_multiplicative_is_cocycle", ok, res.offending.len()));
    let o = omega_projection(&m, &c).map_err(suite_err)?;
    let pair = o.h == phi.d(&m) && o.rho == psi.d(&m).add(&phi.delta(&m).map_err(suite_err)?);
    emit(Check::exact("omega_projection_is_dphi_and_rho", pair && o.conditions_hold(), o.h.values.len()));

    let alpha = DiscreteForm::random(&m, 1, 1, 0.6, &mut r);
    let w = shift_witness(&m, &alpha).map_err(suite_err)?;
    let psi2 = psi.add(&alpha.delta(&m).map_err(suite_err)?);
    let minus = make_trivial_multiplicative(&m, &phi.add(&alpha.d(&m).scale(-1)), &psi2).map_err(suite_err)?;
    let plus = make_trivial_multiplicative(&m, &phi.add(&alpha.d(&m)), &psi2).map_err(suite_err)?;
    emit(Check::exact("shift_phi_minus_dalpha_is_coboundary", check_coboundary(&m, &c, &minus, &w).map_err(suite_err)?, true));
    let plus_ok = check_coboundary(&m, &c, &plus, &w).map_err(suite_err)?;
    let ddelta = alpha.delta(&m).map_err(suite_err)?.d(&m).scale(2);
    emit(
        Check::exact("shift_phi_plus_dalpha_moves_rho_by_2dDelta_alpha", !plus_ok || ddelta.is_zero(), ddelta.max_abs().to_string())
            .with_note("sign diagnostic"),
    );

    let n = if m.level(1).complex.max_dim() >= 2 { 1 } else { 0 };
    let mut good = 0;
    let mut closed_minus = true;
    let trials = 5;
    for _ in 0..trials {
        let (h, rr, b) = hrb_input(&m, n, &mut r)?;
        let c = make_lemma2_cocycle(&m, n, &h, &rr, &b).map_err(suite_err)?;
        if residual(&m, &bi_d(&m, &c).map_err(suite_err)?).forms_vanish() {
            good += 1;
        }
        closed_minus &= top_form_closedness(&m, n, &rr, &b).minus_rho_max == Q::from_integer(0);
    }
    emit(Check::exact("hrb_form_residuals_vanish", good == trials, good));
    emit(Check::exact("hrb_top_form_closed_with_minus_rho", closed_minus, n).with_note("sign diagnostic"));
    Ok(())
}

fn hrb_input(
    m: &SimplicialGroupModel,
    n: usize,
    r: &mut ChaCha8Rng,
) -> Result<(DiscreteForm, DiscreteForm, Component), CliError> {
    let phi = DiscreteForm::random(m, 1, n, 0.6, r);
    let h = phi.d(m);
    let mut rr = phi.delta(m).map_err(suite_err)?;
    let mut b = phi.restrict(m);
    if n > 0 {
        let gamma = DiscreteForm::random(m, 1, n - 1, 0.6, r);
        rr = rr.add(&gamma.delta(m).map_err(suite_err)?.d(m));
        let sigma = random_cochain(m, n, n, 10, r);
        if let Some(s) = sigma.component(1, 0, n - 1) {
            for (k, v) in deligne::cell_d(m, 1, 0, s) {
                *b.entry(k).or_insert_with(|| Q::from_integer(0)) += v;
            }
            b.retain(|_, v| *v != Q::from_integer(0));
        }
    }
    Ok((h, rr, b))
}

fn mc_class_suite(cfg: &RunConfig, emit: Emit) -> Result<(), CliError> {
    let m = load_model(cfg)?;
    let mut r = rng(cfg);
    let trials = cfg.samples.unwrap_or(10);
    let (mut integral, mut closed, mut witnessed) = (0, 0, 0);
    for _ in 0..trials {
        let (phi, psi) = trivial_pair(&m, &mut r)?;
        let c = make_trivial_multiplicative(&m, &phi, &psi).map_err(suite_err)?;
        let w = random_cochain(&m, 2, 2, 8, &mut r);
        let s = integer_shift(&m, &mut r);
        let shifted = c.add(&bi_d(&m, &w).map_err(suite_err)?, 1).map_err(suite_err)?.add(&s, 1).map_err(suite_err)?;
        let k0 = mc_class(&m, &c).map_err(suite_err)?;
        let k1 = mc_class(&m, &shifted).map_err(suite_err)?;
        integral += k1.is_integer as usize;
        closed += k1.is_cocycle as usize;
        let mut diff = k1.kappa.clone();
        for (key, x) in &k0.kappa {
            let e = diff.entry(*key).or_default();
            for (k, v) in x {
                *e.entry(*k).or_insert_with(|| Q::from_integer(0)) -= v;
            }
            e.retain(|_, v| *v != Q::from_integer(0));
        }
        diff.retain(|_, x| !x.is_empty());
        witnessed += (diff == tot_differential(&m, &deligne::function_parts(&s))) as usize;
    }
    emit(Check::exact("kappa_integer", integral == trials, integral));
    emit(Check::exact("kappa_closed", closed == trials, closed));
    emit(Check::exact("kappa_shift_witnessed", witnessed == trials, witnessed));
    let bad = random_cochain(&m, 2, 3, 8, &mut r);
    emit(Check::exact("non_cocycle_rejected", mc_class(&m, &bad).is_err(), true));
    Ok(())
}

fn integer_shift(m: &SimplicialGroupModel, r: &mut ChaCha8Rng) -> DeligneCochain {
    let mut s = DeligneCochain::zero(2, 3);
    for q in 1..=3usize.min(m.depth()) {
        let p = 3 - q;
        let l = m.level(q);
        let mut comp = Component::new();
        for _ in 0..3 {
            let t: Vec<u8> = (0..=p).map(|_| r.random_range(0..l.n_patches()) as u8).collect();
            let mask = t.iter().fold(0u128, |a, &i| a | 1u128 << i);
            let v = Q::from_integer(r.random_range(1..=3));
            for &x in l.complex.cells_of_dim(0) {
                if l.in_all(x, mask) {
                    *comp.entry(deligne::key(&t, x)).or_insert_with(|| Q::from_integer(0)) += v;
                }
            }
        }
        comp.retain(|_, v| *v != Q::from_integer(0));
        s.set(q, p, 0, comp);
    }
    s
}

fn random_connection(seed: u64, level: i64) -> Result<ConnectionData, CliError> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let base = FactorSpec { tag: GroupTag::VectorGroupRd, size: 4 };
    ConnectionData::new(&ConnectionSpec::random(base, FactorSpec::SU2, 6, 0.8, &mut r), InvariantPairing::calibrated(level))
        .map_err(suite_err)
}

fn cs(cfg: &RunConfig, emit: Emit) -> Result<(), CliError> {
    let tol = cfg.tolerance_scale();
    let k = cfg.level.unwrap_or(2);
    let seed = cfg.seed();
    let samples = cfg.samples.unwrap_or(50);
    let mut d = 0.0f64;
    for i in 0..5 {
        d = d.max(pontryagin_defect(&random_connection(seed.wrapping_add(i), k)?, samples, seed.wrapping_add(i)).map_err(suite_err)?);
    }
    emit(Check::numeric("pontryagin_defect", d, 1e-5 * tol));
    let n = cfg.resolution.unwrap_or(4);
    let s3 = s3_identity_map(n);
    let mut r = rng(cfg);
    let spec = ConnectionSpec::random(FactorSpec::SU2, FactorSpec::SU2, 4, 0.5, &mut r);
    let c = ConnectionData::new(&spec, InvariantPairing::calibrated(k)).map_err(suite_err)?;
    let id = gauge_shift_check(&s3, &c, &s3).map_err(suite_err)?;
    emit(
        Check::numeric("identity_gauge_shift_minus_level", (id.delta.abs() - k.abs() as f64).abs(), 1e-2 * tol)
            .with_note(format!("delta = {}", id.delta)),
    );
    let emb = s3_mesh(n);
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let f = smooth_field_map(&emb, 0.8, &mut r);
        let h = GroupMesh::new(s3.mesh.clone(), f.values).map_err(suite_err)?;
        worst = worst.max(gauge_shift_check(&s3, &c, &h).map_err(suite_err)?.nearest_int_defect);
    }
    emit(Check::numeric("gauge_shift_distance_to_integer", worst, 1e-2 * tol));
    Ok(())
}

fn transition(cfg: &RunConfig, emit: Emit) -> Result<(), CliError> {
    let tol = cfg.tolerance_scale();
    let c = random_connection(cfg.seed(), cfg.level.unwrap_or(1))?;
    let r = transition_identity_check(&c, cfg.samples.unwrap_or(50), cfg.seed()).map_err(suite_err)?;
    emit(Check::numeric("tp_transition_defect", r.tp_defect, 1e-5 * tol));
    emit(Check::numeric("rho_transition_defect", r.rho_defect, 1e-9 * tol));
    Ok(())
}

fn lemma6(cfg: &RunConfig, emit: Emit) -> Result<(), CliError> {
    let tol = cfg.tolerance_scale();
    let n = cfg.resolution.unwrap_or(64);
    let f = Form::monopole(1, 0, 1.0);
    let mut worst = 0.0f64;
    for theta in [0.5, 0.8, 1.3, 2.0] {
        worst = worst.max(lemma6_check(&f, &LoopStack::latitude(n, theta, 1e-3, 3), 6).map_err(suite_err)?.defect);
    }
    emit(Check::numeric("holonomy_derivative_defect", worst, 1e-3 * tol));
    Ok(())
}

fn branes(cfg: &RunConfig, emit: Emit) -> Result<(), CliError> {
    let tol = cfg.tolerance_scale();
    let p = InvariantPairing::calibrated(cfg.level.unwrap_or(1));
    let q = GroupElement::su2_from_quaternion;
    let pairs = [
        (q([0.6, 0.8, 0.0, 0.0]), q([0.1, -0.7, 0.2, (1.0f64 - 0.54).sqrt()])),
        (q([0.3, 0.0, 0.9, (1.0f64 - 0.9).sqrt()]), GroupElement::identity(GroupTag::SU2, 2)),
        (q([-0.5, 0.5, 0.5, 0.5]), q([0.8, 0.0, -0.6, 0.0])),
    ];
    let mut r = rng(cfg);
    let samples = cfg.samples.unwrap_or(50);
    let mut worst = 0.0f64;
    let mut antisym = 0.0f64;
    for (h1, h2) in &pairs {
        for _ in 0..samples {
            let b = BiconjPoint::random(h1, h2, &mut r).map_err(suite_err)?;
            let mut t = || b.tangent(&GroupTag::SU2.random_algebra(2, 1.0, &mut r), &GroupTag::SU2.random_algebra(2, 1.0, &mut r));
            let (u, v) = (t(), t());
            worst = worst.max(bibrane_curvature(&b, (&u.0, &u.1), (&v.0, &v.1), &p).map_err(suite_err)?.defect);
        }
        let c = ConjClassPoint::random(h1, &mut r).map_err(suite_err)?;
        let x = crate::branes::conj_tangent(&c, &GroupTag::SU2.random_algebra(2, 1.0, &mut r));
        let y = crate::branes::conj_tangent(&c, &GroupTag::SU2.random_algebra(2, 1.0, &mut r));
        let a = omega_h(&c, &p, &x, &y).map_err(suite_err)? + omega_h(&c, &p, &y, &x).map_err(suite_err)?;
        antisym = antisym.max(a.abs());
    }
    emit(Check::numeric("bibrane_two_sided_defect", worst, 1e-9 * tol));
    emit(Check::numeric("omega_antisymmetry_defect", antisym, 1e-12 * tol));
    Ok(())
}
