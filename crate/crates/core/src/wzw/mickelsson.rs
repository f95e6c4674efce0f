use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{circle_defect, turn, wz_action, WZHolonomy, WzwError};
use crate::lie::{rho, GroupElement, GroupTag, IndexMap, InvariantPairing};
use crate::mesh::{glue_sphere, integrate_pullback, ConeOptions, GroupMesh, QuadratureRule};

/// A word in the factors of the base map; (i, true) stands for φ_i⁻¹.
pub type Word = Vec<(usize, bool)>;

/// An element (φ, z) of the Mickelsson extension. The disc map φ is the
/// pointwise product of base factors listed in `word`, so products of
/// elements are exact pointwise products of the interpolated factors.
#[derive(Clone, Debug)]
pub struct MickelssonElement {
    pub base: Arc<GroupMesh>,
    pub word: Word,
    pub z: Complex64,
    pub level: i64,
}

fn reduce(word: impl IntoIterator<Item = (usize, bool)>) -> Word {
    let mut out: Word = Vec::new();
    for (i, inv) in word {
        if out.last() == Some(&(i, !inv)) {
            out.pop();
        } else {
            out.push((i, inv));
        }
    }
    out
}

impl MickelssonElement {
    pub fn new(base: Arc<GroupMesh>, word: Word, z: Complex64, level: i64) -> Result<Self, WzwError> {
        if base.mesh.dim != 2 {
            return Err(WzwError::Invalid("base must be a map on a 2-dimensional disc".into()));
        }
        if base.values.iter().flatten().any(|g| g.tag() != GroupTag::SU2) {
            return Err(WzwError::Invalid("SU(2)-valued base required".into()));
        }
        if word.iter().any(|&(i, _)| i >= base.arity()) {
            return Err(WzwError::Invalid(format!("word refers past arity {}", base.arity())));
        }
        if (z.norm() - 1.0).abs() > 1e-12 {
            return Err(WzwError::NotUnit(z.norm()));
        }
        Ok(MickelssonElement { base, word: reduce(word), z, level })
    }

    /// (φ_i, z).
    pub fn generator(base: Arc<GroupMesh>, i: usize, z: Complex64, level: i64) -> Result<Self, WzwError> {
        MickelssonElement::new(base, vec![(i, false)], z, level)
    }

    pub fn identity(base: Arc<GroupMesh>, level: i64) -> Result<Self, WzwError> {
        MickelssonElement::new(base, Vec::new(), Complex64::new(1.0, 0.0), level)
    }

    /// The disc map sampled at the vertices, as an arity-1 map.
    pub fn disc(&self) -> GroupMesh {
        let word = self.word.clone();
        self.base.map_values(move |v| vec![evaluate_word(&word, v)])
    }

    pub fn with_z(&self, z: Complex64) -> Result<Self, WzwError> {
        MickelssonElement::new(self.base.clone(), self.word.clone(), z, self.level)
    }
}

fn evaluate_word(word: &[(usize, bool)], v: &[GroupElement]) -> GroupElement {
    let mut g = GroupElement::identity(GroupTag::SU2, 2);
    for &(i, inv) in word {
        g = g.mul(&if inv { v[i].inverse() } else { v[i].clone() });
    }
    g
}

/// Level-1 ∫_D Φ*ρ for Φ = (φ_{w₁}, φ_{w₂}). A constant factor contributes 0.
fn rho_integral(base: &GroupMesh, w1: &Word, w2: &Word) -> Result<f64, WzwError> {
    if w1.is_empty() || w2.is_empty() {
        return Ok(0.0);
    }
    let unit = InvariantPairing::calibrated(1);
    let map = IndexMap::new(base.arity(), vec![w1.clone(), w2.clone()])?;
    let f = rho(&unit).pullback(&map)?;
    Ok(integrate_pullback(&f, base, &QuadratureRule::default_for(2))?)
}

/// (φ₁, z₁)·(φ₂, z₂) = (φ₁φ₂, z₁z₂·exp(2πik ∫_D Φ*ρ)).
pub fn me_product(e1: &MickelssonElement, e2: &MickelssonElement) -> Result<MickelssonElement, WzwError> {
    if !Arc::ptr_eq(&e1.base, &e2.base) && *e1.base != *e2.base {
        return Err(WzwError::MeshMismatch("elements live over different base maps".into()));
    }
    if e1.level != e2.level {
        return Err(WzwError::LevelMismatch(e1.level, e2.level));
    }
    let r = rho_integral(&e1.base, &e1.word, &e2.word)?;
    let z = e1.z * e2.z * turn(e1.level as f64 * r);
    let z = z / z.norm();
    MickelssonElement::new(e1.base.clone(), e1.word.iter().chain(&e2.word).copied().collect(), z, e1.level)
}

/// z-part of ((e₁e₂)e₃)·(e₁(e₂e₃))⁻¹; the disc parts agree as words.
pub fn me_associator(
    e1: &MickelssonElement,
    e2: &MickelssonElement,
    e3: &MickelssonElement,
) -> Result<Complex64, WzwError> {
    let left = me_product(&me_product(e1, e2)?, e3)?;
    let right = me_product(e1, &me_product(e2, e3)?)?;
    if left.word != right.word {
        return Err(WzwError::Invalid("associated words differ".into()));
    }
    Ok(left.z / right.z)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeEqualReport {
    pub equal: bool,
    /// |z₂ / (z₁·e^{2πi S_WZ}) − 1|.
    pub distance: f64,
    pub wz: WZHolonomy,
}

/// (φ, z) ~ (φ′, z′) iff the boundary loops agree and z′ = z·e^{2πi S_WZ(φ♯)},
/// φ♯ the sphere glued from φ and the reversed φ′.
pub fn me_equal(
    e1: &MickelssonElement,
    e2: &MickelssonElement,
    tol: f64,
    opts: &ConeOptions,
) -> Result<MeEqualReport, WzwError> {
    if e1.level != e2.level {
        return Err(WzwError::LevelMismatch(e1.level, e2.level));
    }
    let sphere = glue_sphere(&e1.disc(), &e2.disc())?;
    let wz = wz_action(&sphere, e1.level, opts)?;
    let distance = circle_defect(e2.z, e1.z * wz.value);
    Ok(MeEqualReport { equal: distance < tol, distance, wz })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wzw::random_disc_maps;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn base(seed: u64) -> Arc<GroupMesh> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Arc::new(random_disc_maps(4, 3, 1.2, &mut rng))
    }

    #[test]
    fn identity_element_is_neutral() {
        let b = base(1);
        let e = MickelssonElement::generator(b.clone(), 0, turn(0.2), 2).unwrap();
        let one = MickelssonElement::identity(b, 2).unwrap();
        let p = me_product(&e, &one).unwrap();
        assert_eq!(p.word, e.word);
        assert!((p.z - e.z).norm() < 1e-15);
    }

    #[test]
    fn inverse_word_cancels() {
        let b = base(2);
        let e = MickelssonElement::new(b.clone(), vec![(1, false)], turn(0.4), 1).unwrap();
        let inv = MickelssonElement::new(b, vec![(1, true)], turn(0.0), 1).unwrap();
        let p = me_product(&e, &inv).unwrap();
        assert!(p.word.is_empty());
        for v in &p.disc().values {
            assert!(v[0].distance(&GroupElement::identity(GroupTag::SU2, 2)) < 1e-15);
        }
    }

    #[test]
    fn associator_is_one() {
        let b = base(3);
        let es: Vec<_> =
            (0..3).map(|i| MickelssonElement::generator(b.clone(), i, turn(0.1 * i as f64), 3).unwrap()).collect();
        let a = me_associator(&es[0], &es[1], &es[2]).unwrap();
        assert!((a - 1.0).norm() < 1e-9, "associator {a}");
    }

    #[test]
    fn equality_detects_phase_shift() {
        let b = base(4);
        let e = MickelssonElement::generator(b, 0, turn(0.25), 1).unwrap();
        let opts = ConeOptions::default();
        assert!(me_equal(&e, &e, 1e-3, &opts).unwrap().equal);
        let shifted = e.with_z(e.z * turn(0.3)).unwrap();
        assert!(!me_equal(&e, &shifted, 1e-3, &opts).unwrap().equal);
    }
}
