use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::form::trace_product;
use super::group::Mat;
use super::LieError;
use crate::mesh;

/// ⟨X,Y⟩ = −c·k·Re tr(XY).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantPairing {
    pub level: i64,
    pub normalization_constant: f64,
}

/// Mesh resolution used for the cached calibration (8·6·n³ tetrahedra).
pub const CALIBRATION_RESOLUTION: usize = 6;

static CALIBRATED: OnceLock<f64> = OnceLock::new();

impl InvariantPairing {
    pub fn new(level: i64, c: f64) -> Self {
        InvariantPairing { level, normalization_constant: c }
    }

    /// Level-k pairing with the cached calibrated constant.
    pub fn calibrated(level: i64) -> Self {
        let c = *CALIBRATED.get_or_init(|| {
            calibrate_pairing(CALIBRATION_RESOLUTION).expect("calibration at the default resolution").c
        });
        InvariantPairing::new(level, c)
    }

    /// Coefficient multiplying Re tr(XY).
    pub fn coeff(&self) -> f64 {
        -self.normalization_constant * self.level as f64
    }

    pub fn pair(&self, x: &Mat, y: &Mat) -> f64 {
        self.coeff() * trace_product(x, y)
    }

    pub fn with_level(&self, level: i64) -> Self {
        InvariantPairing { level, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c: f64,
    pub c_refined: f64,
    /// ∫η at c = 1, level 1, on the coarse mesh.
    pub raw_integral: f64,
}

/// Finds c with ∫_{S³} η = 1 at level 1, comparing resolutions n and 2n.
pub fn calibrate_pairing(resolution: usize) -> Result<Calibration, LieError> {
    let raw = |n: usize| -> f64 {
        let unit = InvariantPairing::new(1, 1.0);
        let eta = super::eta(&unit);
        let map = mesh::s3_identity_map(n);
        mesh::integrate_pullback(&eta, &map, &mesh::QuadratureRule::default_for(3)).unwrap()
    };
    let coarse = raw(resolution);
    let fine = raw(2 * resolution);
    let c = 1.0 / coarse;
    let c_refined = 1.0 / fine;
    if !c.is_finite() || (c - c_refined).abs() > 1e-3 * c_refined.abs() {
        return Err(LieError::Calibration { coarse: c, fine: c_refined });
    }
    Ok(Calibration { c: c_refined, c_refined, raw_integral: coarse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::group::GroupTag;
    use crate::lie::GroupElement;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pairing_is_ad_invariant_and_symmetric() {
        let p = InvariantPairing::new(3, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = GroupTag::SU2.random_algebra(2, 1.0, &mut rng);
            let y = GroupTag::SU2.random_algebra(2, 1.0, &mut rng);
            let g = GroupElement::random(GroupTag::SU2, 2, 1.0, &mut rng);
            assert!((p.pair(&g.ad(&x), &g.ad(&y)) - p.pair(&x, &y)).abs() < 1e-10);
            assert!((p.pair(&x, &y) - p.pair(&y, &x)).abs() < 1e-14);
        }
    }

    #[test]
    fn pairing_is_positive_on_su2_for_positive_c() {
        let p = InvariantPairing::new(1, 1.0);
        for t in crate::lie::group::su2_basis() {
            assert!((p.pair(&t, &t) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    #[ignore]
    fn print_calibration_convergence() {
        for n in [2, 3, 4, 6, 8] {
            let unit = InvariantPairing::new(1, 1.0);
            let eta = crate::lie::eta(&unit);
            for kind in [mesh::Interpolation::FirstVertexExponential, mesh::Interpolation::Projected] {
                let map = mesh::s3_identity_map(n).with_interpolation(kind);
                let t = std::time::Instant::now();
                let v = mesh::integrate_pullback(&eta, &map, &mesh::QuadratureRule::default_for(3)).unwrap();
                println!("n={n} {kind:?} raw={v:.9} c={:.9} target={:.9} {:?}", 1.0 / v, 0.25 / std::f64::consts::PI.powi(2), t.elapsed());
            }
        }
    }

    #[test]
    fn calibration_is_positive_and_near_one_over_four_pi_squared() {
        let c = InvariantPairing::calibrated(1).normalization_constant;
        let expected = 1.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
        assert!((c - expected).abs() < 1e-3 * expected, "c = {c}");
    }
}
