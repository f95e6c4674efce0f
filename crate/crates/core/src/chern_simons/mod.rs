//! Chern–Simons forms of connections on trivial bundles M × G, the Pontryagin
//! form, the action over closed 3-meshes, gauge shifts, and the transition
//! identities on the fibre products E^[2], E^[3] of the trivial bundle.
//!
//! TP and ω use P = −½⟨−,−⟩ while H = η and ρ use ⟨−,−⟩ itself; with one
//! common pairing the transition identities fail by fixed factors, which
//! [`TransitionReport`] also reports.

mod spec;

pub use spec::{Atom, Coefficient, ConnectionField, ConnectionSpec, ConnectionTerm, FactorSpec};

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lie::{
    eta_sized, random_frame, random_point, rho_sized, AlgForm, FdConfig, Form, GroupElement, IndexMap,
    InvariantPairing, LieError,
};
use crate::mesh::{integrate_pullback, GroupMesh, MeshError, QuadratureRule};

#[derive(Debug, Error)]
pub enum CsError {
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("connection spec: {0}")]
    Spec(String),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("mesh must be closed")]
    Open,
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// A connection A on M × G together with the invariant pairing.
#[derive(Clone, Debug)]
pub struct ConnectionData {
    pub field: Arc<ConnectionField>,
    pub pairing: InvariantPairing,
    pub fd: FdConfig,
}

impl ConnectionData {
    pub fn new(spec: &ConnectionSpec, pairing: InvariantPairing) -> Result<Self, CsError> {
        Ok(ConnectionData { field: Arc::new(spec.field()?), pairing, fd: FdConfig::default() })
    }

    pub fn spec(&self) -> &ConnectionSpec {
        self.field.spec()
    }

    fn size(&self) -> usize {
        self.spec().fiber.size
    }

    /// Ad_{a⁻¹}A(m) + θ_a on the factors (base, fiber) of an arity-`arity` tuple.
    pub fn total_connection(&self, arity: usize, base: usize, fiber: usize) -> AlgForm {
        AlgForm::connection(arity, self.field.clone(), base, Some(fiber))
    }

    /// Ω = dA + [A∧A] on E = M × G.
    pub fn curvature(&self) -> Result<AlgForm, CsError> {
        let a = self.total_connection(2, 0, 1);
        Ok(AlgForm::sum(vec![a.ext_d(self.fd)?, a.bracket(&a)?])?)
    }

    /// coeff · Re tr(A∧dA + ⅔ A∧[A∧A]) on E.
    fn tp_with(&self, coeff: f64) -> Result<Form, CsError> {
        let a = self.total_connection(2, 0, 1);
        let t1 = Form::pairing(coeff, &a, &a.ext_d(self.fd)?)?;
        let t2 = Form::pairing(coeff * 2.0 / 3.0, &a, &a.bracket(&a)?)?;
        Ok(t1.add(&t2)?)
    }

    /// TP(A) = P(A∧dA) + ⅔P(A∧[A∧A]) on E, P = −½⟨−,−⟩.
    pub fn tp_form(&self) -> Result<Form, CsError> {
        self.tp_with(-0.5 * self.pairing.coeff())
    }

    /// TP(A) with P = ⟨−,−⟩, for the single-pairing diagnostics.
    pub fn tp_form_single_pairing(&self) -> Result<Form, CsError> {
        self.tp_with(self.pairing.coeff())
    }

    /// F_A = P(Ω∧Ω) on E.
    pub fn pontryagin_form(&self) -> Result<Form, CsError> {
        let om = self.curvature()?;
        Ok(Form::pairing(-0.5 * self.pairing.coeff(), &om, &om)?)
    }

    fn omega_with(&self, coeff: f64) -> Result<Form, CsError> {
        // E^[2] = (m, a, b), g = a⁻¹b
        let g = IndexMap::new(3, vec![vec![(1, true), (2, false)]])?;
        let thb = AlgForm::theta_bar(1, 0, self.size()).pullback(&g)?;
        let p1a = self.total_connection(2, 0, 1).pullback(&IndexMap::grouping(3, &[&[0], &[1]])?)?;
        Ok(Form::pairing(coeff, &thb, &p1a)?)
    }

    /// ω = −P(g*θ̄ ∧ p₁*A) on E^[2], P = −½⟨−,−⟩.
    pub fn omega_form(&self) -> Result<Form, CsError> {
        self.omega_with(0.5 * self.pairing.coeff())
    }

    pub fn omega_form_single_pairing(&self) -> Result<Form, CsError> {
        self.omega_with(-self.pairing.coeff())
    }
}

fn with_identity_section(m: &GroupMesh, fiber: FactorSpec) -> GroupMesh {
    let e = GroupElement::identity(fiber.tag, fiber.size);
    m.map_values(|v| vec![v[0].clone(), e.clone()])
}

fn check_base_mesh(m: &GroupMesh, c: &ConnectionData, dim: usize) -> Result<(), CsError> {
    if m.mesh.dim != dim || m.arity() != 1 {
        return Err(CsError::Invalid(format!("need an M-valued {dim}-mesh of arity 1")));
    }
    let b = c.spec().base;
    if m.values.iter().any(|v| v[0].tag() != b.tag || v[0].size() != b.size) {
        return Err(CsError::Invalid("mesh values are not in the base factor".into()));
    }
    Ok(())
}

/// ∫_M s*TP(A) for the identity section s(m) = (m, e).
pub fn cs_action(m: &GroupMesh, c: &ConnectionData) -> Result<f64, CsError> {
    check_base_mesh(m, c, 3)?;
    if !m.mesh.is_closed() {
        return Err(CsError::Open);
    }
    let tp = c.tp_form()?;
    Ok(integrate_pullback(&tp, &with_identity_section(m, c.spec().fiber), &QuadratureRule::default_for(3))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeShiftReport {
    pub action: f64,
    pub shifted_action: f64,
    /// Z(A^h) − Z(A).
    pub delta: f64,
    pub nearest_integer: i64,
    pub nearest_int_defect: f64,
}

/// Z(A^h) − Z(A) with A^h = Ad_{h⁻¹}A + h*θ, which is s_h*A_E for the
/// section s_h(m) = (m, h(m)).
pub fn gauge_shift_check(m: &GroupMesh, c: &ConnectionData, h: &GroupMesh) -> Result<GaugeShiftReport, CsError> {
    check_base_mesh(m, c, 3)?;
    if h.mesh != m.mesh || h.arity() != 1 {
        return Err(CsError::Invalid("gauge map must live on the base mesh".into()));
    }
    let z = cs_action(m, c)?;
    let tp = c.tp_form()?;
    let shifted = integrate_pullback(&tp, &m.pair_with(h)?, &QuadratureRule::default_for(3))?;
    let delta = shifted - z;
    Ok(GaugeShiftReport {
        action: z,
        shifted_action: shifted,
        delta,
        nearest_integer: delta.round() as i64,
        nearest_int_defect: (delta - delta.round()).abs(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillingReport {
    pub bulk: f64,
    pub boundary: f64,
    pub defect: f64,
}

/// ∫_B s*F_A against ∫_{∂B} s*TP(A) on an M-valued 4-mesh.
pub fn pontryagin_filling_check(ball: &GroupMesh, c: &ConnectionData, rule: &QuadratureRule) -> Result<FillingReport, CsError> {
    check_base_mesh(ball, c, 4)?;
    let f = c.pontryagin_form()?;
    let bulk = integrate_pullback(&f, &with_identity_section(ball, c.spec().fiber), rule)?;
    let bmesh = GroupMesh { mesh: ball.mesh.boundary_mesh(), ..ball.clone() };
    let boundary = integrate_pullback(
        &c.tp_form()?,
        &with_identity_section(&bmesh, c.spec().fiber),
        &QuadratureRule::default_for(3),
    )?;
    Ok(FillingReport { bulk, boundary, defect: (bulk - boundary).abs() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub samples: usize,
    /// max |ΔTP − g*H − dω| on E^[2].
    pub tp_defect: f64,
    /// max |g*ρ + Δω| on E^[3].
    pub rho_defect: f64,
    /// The same identities with one pairing for TP, ω, H and ρ.
    pub single_pairing_tp_defect: f64,
    pub single_pairing_rho_defect: f64,
}

struct Identities {
    tp_lhs: Form,
    tp_rhs: Form,
    rho_check: Form,
}

fn identities(c: &ConnectionData, tp: &Form, omega: &Form) -> Result<Identities, CsError> {
    let n = c.size();
    let p1 = IndexMap::grouping(3, &[&[0], &[1]])?;
    let p2 = IndexMap::grouping(3, &[&[0], &[2]])?;
    let g = IndexMap::new(3, vec![vec![(1, true), (2, false)]])?;
    let tp_lhs = tp.pullback(&p2)?.sub(&tp.pullback(&p1)?)?;
    let gh = eta_sized(&c.pairing, n).pullback(&g)?;
    let tp_rhs = gh.add(&omega.ext_d(c.fd)?)?;
    // E^[3] = (m, a, b, c); (g₁₂, g₂₃) = (a⁻¹b, b⁻¹c)
    let g2 = IndexMap::new(4, vec![vec![(1, true), (2, false)], vec![(2, true), (3, false)]])?;
    let pij = |i: usize, j: usize| IndexMap::grouping(4, &[&[0], &[i], &[j]]);
    let delta_omega = omega
        .pullback(&pij(2, 3)?)?
        .sub(&omega.pullback(&pij(1, 3)?)?)?
        .add(&omega.pullback(&pij(1, 2)?)?)?;
    let rho_check = rho_sized(&c.pairing, n).pullback(&g2)?.add(&delta_omega)?;
    Ok(Identities { tp_lhs, tp_rhs, rho_check })
}

fn max_defects(ids: &Identities, c: &ConnectionData, samples: usize, seed: u64) -> (f64, f64) {
    let b = c.spec().base;
    let f = c.spec().fiber;
    let per: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(7919).wrapping_add(i as u64));
            let p3 = random_point(&[(b.tag, b.size), (f.tag, f.size), (f.tag, f.size)], &mut rng);
            let fr3 = random_frame(&p3, 3, &mut rng);
            let refs3: Vec<&[_]> = fr3.iter().map(|v| v.as_slice()).collect();
            let dtp = (ids.tp_lhs.value(&p3, &refs3) - ids.tp_rhs.value(&p3, &refs3)).abs();
            let p4 = random_point(&[(b.tag, b.size), (f.tag, f.size), (f.tag, f.size), (f.tag, f.size)], &mut rng);
            let fr4 = random_frame(&p4, 2, &mut rng);
            let refs4: Vec<&[_]> = fr4.iter().map(|v| v.as_slice()).collect();
            let drho = ids.rho_check.value(&p4, &refs4).abs();
            (dtp, drho)
        })
        .collect();
    per.iter().fold((0.0_f64, 0.0_f64), |(a, b), &(x, y)| (a.max(x), b.max(y)))
}

/// Pointwise defects of ΔTP(A) = g*H + dω and g*ρ + Δω = 0 at random points
/// and frames of the fibre products of the trivial bundle.
pub fn transition_identity_check(c: &ConnectionData, samples: usize, seed: u64) -> Result<TransitionReport, CsError> {
    let main = identities(c, &c.tp_form()?, &c.omega_form()?)?;
    let single = identities(c, &c.tp_form_single_pairing()?, &c.omega_form_single_pairing()?)?;
    let (dtp, drho) = max_defects(&main, c, samples, seed);
    let (stp, srho) = max_defects(&single, c, samples, seed);
    Ok(TransitionReport {
        samples,
        tp_defect: dtp,
        rho_defect: drho,
        single_pairing_tp_defect: stp,
        single_pairing_rho_defect: srho,
    })
}

/// max |dTP(A) − P(Ω∧Ω)| at random points and frames of E.
pub fn pontryagin_defect(c: &ConnectionData, samples: usize, seed: u64) -> Result<f64, CsError> {
    let fd = FdConfig { step: 1e-3, richardson: true };
    let dtp = c.tp_form()?.ext_d(fd)?;
    let f = c.pontryagin_form()?;
    let b = c.spec().base;
    let fi = c.spec().fiber;
    let per: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(104729).wrapping_add(i as u64));
            let p = random_point(&[(b.tag, b.size), (fi.tag, fi.size)], &mut rng);
            let fr = random_frame(&p, 4, &mut rng);
            let refs: Vec<&[_]> = fr.iter().map(|v| v.as_slice()).collect();
            (dtp.value(&p, &refs) - f.value(&p, &refs)).abs()
        })
        .collect();
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// A = f(y)α dx + g(y)β dz on the torus U(1)³, f = sin, g = cos: the action is
/// (2π)² P(α, β) ∫₀^{2π} (f g′ − g f′) dy = −(2π)³ P(α, β).
pub fn torus_helicity_spec(alpha: usize, beta: usize, fiber: FactorSpec) -> ConnectionSpec {
    ConnectionSpec {
        base: FactorSpec { tag: crate::lie::GroupTag::UnitaryN, size: 3 },
        fiber,
        terms: vec![
            ConnectionTerm {
                coefficient: Coefficient { scale: 1.0, atoms: vec![Atom::Sin { coord: 1, freq: 1.0, phase: 0.0 }] },
                generator: alpha,
                differential: 0,
            },
            ConnectionTerm {
                coefficient: Coefficient { scale: 1.0, atoms: vec![Atom::Cos { coord: 1, freq: 1.0, phase: 0.0 }] },
                generator: beta,
                differential: 2,
            },
        ],
    }
}

/// Closed form of the helicity action: −(2π)³ P(α, β), P = −½⟨−,−⟩.
pub fn torus_helicity_value(alpha: usize, beta: usize, fiber: FactorSpec, pairing: &InvariantPairing) -> f64 {
    let basis = fiber.tag.algebra_basis(fiber.size);
    let p = -0.5 * pairing.pair(&basis[alpha], &basis[beta]);
    -(2.0 * std::f64::consts::PI).powi(3) * p
}

/// The torus U(1)³ as diagonal unitary matrices on the periodic mesh.
pub fn torus3_map(n: usize) -> GroupMesh {
    let t = crate::mesh::torus3_mesh(n);
    let values = t.positions.iter().map(|p| vec![GroupElement::torus(p)]).collect();
    GroupMesh::new(t.mesh, values).expect("one value per vertex")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{GroupTag, Mat};
    use crate::mesh::s3_identity_map;

    fn su2_base() -> (FactorSpec, FactorSpec) {
        (FactorSpec { tag: GroupTag::VectorGroupRd, size: 4 }, FactorSpec::SU2)
    }

    fn random_connection(seed: u64) -> ConnectionData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (b, f) = su2_base();
        ConnectionData::new(&ConnectionSpec::random(b, f, 6, 0.8, &mut rng), InvariantPairing::calibrated(2)).unwrap()
    }

    #[test]
    fn zero_connection_has_zero_tp_on_the_section() {
        let (b, f) = su2_base();
        let c = ConnectionData::new(&ConnectionSpec::zero(b, f), InvariantPairing::calibrated(1)).unwrap();
        let tp = c.tp_form().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = random_point(&[(b.tag, b.size), (f.tag, f.size)], &mut rng);
        p[1] = GroupElement::identity(GroupTag::SU2, 2);
        let mut fr = random_frame(&p, 3, &mut rng);
        for t in &mut fr {
            t[1] = Mat::zeros(2, 2);
        }
        assert_eq!(tp.eval_owned(&p, &fr).unwrap(), 0.0);
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (b, f) = su2_base();
        let s = ConnectionSpec::random(b, f, 4, 1.0, &mut rng);
        assert_eq!(ConnectionSpec::from_json(&s.to_json()).unwrap(), s);
        let mut bad = s.clone();
        bad.terms[0].generator = 7;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn pontryagin_identity_holds() {
        let d = pontryagin_defect(&random_connection(3), 5, 1).unwrap();
        assert!(d < 1e-5, "defect {d}");
    }

    #[test]
    fn transition_identities_hold() {
        let r = transition_identity_check(&random_connection(4), 6, 2).unwrap();
        assert!(r.tp_defect < 1e-5, "{r:?}");
        assert!(r.rho_defect < 1e-9, "{r:?}");
        assert!(r.single_pairing_tp_defect > 1e-3 && r.single_pairing_rho_defect > 1e-3, "{r:?}");
    }

    #[test]
    fn torus_helicity_matches_closed_form() {
        let p = InvariantPairing::calibrated(1);
        let spec = torus_helicity_spec(2, 2, FactorSpec::SU2);
        let c = ConnectionData::new(&spec, p).unwrap();
        let z = cs_action(&torus3_map(8), &c).unwrap();
        let expected = torus_helicity_value(2, 2, FactorSpec::SU2, &p);
        assert!((z - expected).abs() < 1e-2 * expected.abs(), "{z} vs {expected}");
    }

    #[test]
    fn identity_gauge_shift_is_level() {
        let s3 = s3_identity_map(4);
        let c = ConnectionData::new(&ConnectionSpec::zero(FactorSpec::SU2, FactorSpec::SU2), InvariantPairing::calibrated(2))
            .unwrap();
        let r = gauge_shift_check(&s3, &c, &s3).unwrap();
        assert!((r.delta - 2.0).abs() < 1e-2, "{r:?}");
    }
}
