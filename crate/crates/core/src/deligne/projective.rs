use num_complex::Complex64;

use super::DeligneError;
use crate::lie::GroupElement;

pub const PROJECTIVE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveReport {
    /// max |Δρ| over the sample triples.
    pub delta_rho: f64,
    /// max |g(x)g(y) − g(xy)e^{2πiρ(x,y)}| over the sample pairs.
    pub defect: f64,
    pub holds: bool,
}

/// Checks that g is a projective homomorphism with 2-cocycle ρ. Each triple
/// (x, y, z) supplies the pair (x, y) and the Δρ sample.
pub fn verify_projective_hom(
    g: &dyn Fn(&GroupElement) -> Complex64,
    rho: &dyn Fn(&GroupElement, &GroupElement) -> f64,
    samples: &[[GroupElement; 3]],
) -> Result<ProjectiveReport, DeligneError> {
    let mut delta_rho = 0.0f64;
    for [x, y, z] in samples {
        let d = rho(y, z) - rho(&x.mul(y), z) + rho(x, &y.mul(z)) - rho(x, y);
        delta_rho = delta_rho.max(d.abs());
    }
    if delta_rho > PROJECTIVE_TOL {
        return Err(DeligneError::NotDeltaClosed(format!("max |Δρ| = {delta_rho:e} at samples")));
    }
    let mut defect = 0.0f64;
    for [x, y, _] in samples {
        let lhs = g(x) * g(y);
        let rhs = g(&x.mul(y)) * Complex64::from_polar(1.0, std::f64::consts::TAU * rho(x, y));
        defect = defect.max((lhs - rhs).norm());
    }
    Ok(ProjectiveReport { delta_rho, defect, holds: defect <= PROJECTIVE_TOL })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn r2_samples(seed: u64) -> Vec<[GroupElement; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = || GroupElement::translation(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        (0..50).map(|_| [p(), p(), p()]).collect()
    }

    fn heisenberg(x: &GroupElement) -> Complex64 {
        let c = x.coordinates();
        Complex64::from_polar(1.0, PI * c[0] * c[1])
    }

    fn heisenberg_rho(u: &GroupElement, v: &GroupElement) -> f64 {
        let (a, b) = (u.coordinates(), v.coordinates());
        -(a[0] * b[1] + b[0] * a[1]) / 2.0
    }

    #[test]
    fn identity_character_of_u1() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = || GroupElement::torus(&[rng.random_range(-3.0..3.0)]);
        let s: Vec<_> = (0..30).map(|_| [p(), p(), p()]).collect();
        let r = verify_projective_hom(&|x| x.matrix()[(0, 0)], &|_, _| 0.0, &s).unwrap();
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn quadratic_phase_on_r2() {
        let s = r2_samples(2);
        let r = verify_projective_hom(&heisenberg, &heisenberg_rho, &s).unwrap();
        assert!(r.holds, "{r:?}");
        let r = verify_projective_hom(&heisenberg, &|_, _| 0.0, &s).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn non_closed_rho_is_rejected() {
        let s = r2_samples(3);
        let bad = |u: &GroupElement, v: &GroupElement| u.coordinates()[0] * v.coordinates()[0].powi(2);
        assert!(matches!(verify_projective_hom(&heisenberg, &bad, &s), Err(DeligneError::NotDeltaClosed(_))));
    }
}
