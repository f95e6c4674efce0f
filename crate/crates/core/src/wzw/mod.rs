//! Surface holonomy of the level-k gerbe on SU(2) through Wess–Zumino
//! extensions, the Polyakov–Wiegmann identity, the Mickelsson model of the
//! loop group extension, and the holonomy derivative of a U(1)-bundle.

mod holonomy_derivative;
mod mickelsson;
mod samples;

pub use holonomy_derivative::{cap_mesh, flux_through_cap, latitude_loop, lemma6_check, HolonomyDerivativeReport, LoopStack};
pub use mickelsson::{me_associator, me_equal, me_product, MeEqualReport, MickelssonElement, Word};
pub use samples::{latitude_sphere, latitude_wz_value, random_disc_maps, random_sphere_map, smooth_field_map};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lie::{eta, rho, GroupTag, InvariantPairing, LieError};
use crate::mesh::{cone_extension, integrate_pullback, ConeOptions, GroupMesh, MeshError, QuadratureRule};

#[derive(Debug, Error)]
pub enum WzwError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(i64, i64),
    #[error("not a unit complex number: |z| = {0}")]
    NotUnit(f64),
    #[error("cap construction failed: {0}")]
    Cap(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// e^{2πi t}.
pub fn turn(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)
}

/// |z/w − 1| for unit complex numbers.
pub fn circle_defect(z: Complex64, w: Complex64) -> f64 {
    (z / w - 1.0).norm()
}

/// Distance from x to the nearest integer.
pub fn integer_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WZHolonomy {
    pub level: i64,
    pub value: Complex64,
    /// Level-1 integral reduced to [0, 1).
    pub wz_integral: f64,
    /// Level-1 integral over the chosen extension, unreduced.
    pub raw_integral: f64,
    /// Seed of the cone extension.
    pub extension_id: u64,
    pub avoided: [f64; 4],
}

impl WZHolonomy {
    fn from_raw(level: i64, raw: f64, extension_id: u64, avoided: [f64; 4]) -> Self {
        WZHolonomy {
            level,
            value: turn(level as f64 * raw),
            wz_integral: raw.rem_euclid(1.0),
            raw_integral: raw,
            extension_id,
            avoided,
        }
    }
}

fn check_su2(map: &GroupMesh) -> Result<(), WzwError> {
    if map.values.iter().flatten().any(|g| g.tag() != GroupTag::SU2) {
        return Err(WzwError::Invalid("SU(2)-valued map required".into()));
    }
    Ok(())
}

/// Level-1 ∫_B η over a ball map of arity 1, or of the pointwise product for
/// arity 2.
fn ball_integral(ball: &GroupMesh) -> Result<f64, WzwError> {
    let unit = InvariantPairing::calibrated(1);
    let e = eta(&unit);
    let f = if ball.arity() == 2 { crate::lie::pull_product(&e, 2, &[0, 1])? } else { e };
    Ok(integrate_pullback(&f, ball, &QuadratureRule::default_for(3))?)
}

/// exp(2πi k ∫_B φ̃*η) for a cone extension φ̃ of φ.
pub fn wz_action(phi: &GroupMesh, level: i64, opts: &ConeOptions) -> Result<WZHolonomy, WzwError> {
    check_su2(phi)?;
    if phi.arity() != 1 {
        return Err(WzwError::Invalid("sphere map of arity 1 required".into()));
    }
    let (ball, info) = cone_extension(phi, opts)?;
    let raw = ball_integral(&ball)?;
    Ok(WZHolonomy::from_raw(level, raw, opts.seed, info.avoided))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PwReport {
    pub level: i64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub defect: f64,
    pub hol1: WZHolonomy,
    pub hol2: WZHolonomy,
    /// Level-1 ∫_B of η pulled back along the product of the two extensions.
    pub product_integral: f64,
    /// Level-1 ∫_Σ Φ*ρ.
    pub rho_integral: f64,
}

/// Hol(φ₁)·Hol(φ₂) against Hol(φ₁φ₂)·exp(2πik ∫_Σ Φ*ρ).
///
/// The product map is extended over the ball by the pointwise product of the
/// two cone extensions, which share one ball mesh.
pub fn polyakov_wiegmann_check(
    phi1: &GroupMesh,
    phi2: &GroupMesh,
    level: i64,
    opts: &ConeOptions,
) -> Result<PwReport, WzwError> {
    check_su2(phi1)?;
    check_su2(phi2)?;
    if phi1.mesh != phi2.mesh || phi1.interpolation != phi2.interpolation {
        return Err(WzwError::MeshMismatch("maps must share one sphere mesh".into()));
    }
    let (b1, i1) = cone_extension(phi1, opts)?;
    let opts2 = ConeOptions { seed: opts.seed.wrapping_add(1), ..*opts };
    let (b2, i2) = cone_extension(phi2, &opts2)?;
    let w1 = ball_integral(&b1)?;
    let w2 = ball_integral(&b2)?;
    let w12 = ball_integral(&b1.pair_with(&b2)?)?;
    let unit = InvariantPairing::calibrated(1);
    let r = integrate_pullback(&rho(&unit), &phi1.pair_with(phi2)?, &QuadratureRule::default_for(2))?;
    let k = level as f64;
    let lhs = turn(k * w1) * turn(k * w2);
    let rhs = turn(k * w12) * turn(k * r);
    Ok(PwReport {
        level,
        lhs,
        rhs,
        defect: circle_defect(lhs, rhs),
        hol1: WZHolonomy::from_raw(level, w1, opts.seed, i1.avoided),
        hol2: WZHolonomy::from_raw(level, w2, opts2.seed, i2.avoided),
        product_integral: w12,
        rho_integral: r,
    })
}
