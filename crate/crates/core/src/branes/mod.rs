//! Conjugacy and biconjugacy classes in SU(2), the D-brane 2-form ω_h on a
//! class, and the bi-brane curvature on a biconjugacy class.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lie::{rho, su2_basis, GroupElement, GroupTag, IndexMap, InvariantPairing, LieError, Mat};

#[derive(Debug, Error)]
pub enum BraneError {
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("not in the conjugacy class: {0}")]
    NotInClass(String),
    #[error("not tangent to the class: off by {0:e}")]
    NotTangent(f64),
    #[error("SU(2) only")]
    Group,
}

/// Tolerance for class membership (eigenvalues) and tangency.
pub const CLASS_TOL: f64 = 1e-10;
pub const TANGENT_TOL: f64 = 1e-8;

/// g ∈ C_h, the class of h.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjClassPoint {
    pub h: GroupElement,
    pub g: GroupElement,
}

/// For SU(2) the eigenvalues e^{±iφ} are fixed by the real trace.
fn half_trace(g: &GroupElement) -> f64 {
    g.matrix().trace().re / 2.0
}

fn check_su2(g: &GroupElement) -> Result<(), BraneError> {
    if g.tag() != GroupTag::SU2 {
        return Err(BraneError::Group);
    }
    Ok(())
}

impl ConjClassPoint {
    pub fn new(h: GroupElement, g: GroupElement) -> Result<Self, BraneError> {
        check_su2(&h)?;
        check_su2(&g)?;
        let d = (half_trace(&h) - half_trace(&g)).abs();
        if d > CLASS_TOL {
            return Err(BraneError::NotInClass(format!("eigenvalue mismatch {d:e}")));
        }
        Ok(ConjClassPoint { h, g })
    }

    /// x h x⁻¹ for a Haar-random x.
    pub fn random<R: Rng + ?Sized>(h: &GroupElement, rng: &mut R) -> Result<Self, BraneError> {
        let x = GroupElement::random(GroupTag::SU2, 2, 1.0, rng);
        ConjClassPoint::new(h.clone(), x.mul(h).mul(&x.inverse()))
    }

    pub fn is_central(&self) -> bool {
        (half_trace(&self.h).abs() - 1.0).abs() < CLASS_TOL
    }
}

/// The tangent xg − gx of the class at g, generated by x ∈ su(2).
pub fn conj_tangent(p: &ConjClassPoint, x: &Mat) -> Mat {
    x * p.g.matrix() - p.g.matrix() * x
}

/// Components of X ∈ su(2) in the τ basis.
fn components(x: &Mat) -> DVector<f64> {
    DVector::from_iterator(3, (0..3).map(|a| crate::lie::coordinate_component(GroupTag::SU2, x, a)))
}

fn from_components(c: &DVector<f64>) -> Mat {
    let b = su2_basis();
    let mut out = Mat::zeros(2, 2);
    for a in 0..3 {
        out += &b[a] * crate::lie::c64(c[a], 0.0);
    }
    out
}

/// Matrix of Ad_{g⁻¹} in the τ basis.
fn ad_inv_matrix(g: &GroupElement) -> DMatrix<f64> {
    let b = su2_basis();
    let mut m = DMatrix::zeros(3, 3);
    for (j, t) in b.iter().enumerate() {
        let c = components(&g.ad_inv(t));
        m.set_column(j, &c);
    }
    m
}

/// T u = (Ad_{g⁻¹} + 1)(Ad_{g⁻¹} − 1)⁻¹ u, with the inverse taken as the
/// minimal-norm least-squares solution, i.e. on the complement of the kernel.
pub fn t_operator(g: &GroupElement, u: &Mat) -> Mat {
    let r = ad_inv_matrix(g);
    let id = DMatrix::<f64>::identity(3, 3);
    let svd = (&r - &id).svd(true, true);
    let y = svd.solve(&components(u), 1e-10).expect("svd with u and v_t");
    from_components(&((&r + &id) * y))
}

/// θ(v) for a tangent of the class at g; rejects vectors off the class.
fn class_theta(p: &ConjClassPoint, v: &Mat) -> Result<Mat, BraneError> {
    let u = p.g.left_trivialize(v).map_err(|e| match e {
        LieError::NotTangent(d) => BraneError::NotTangent(d),
        other => BraneError::Lie(other),
    })?;
    // tangents of C_h have θ in im(Ad_{g⁻¹} − 1) = ker(Ad_{g⁻¹} − 1)^⊥
    let r = ad_inv_matrix(&p.g) - DMatrix::<f64>::identity(3, 3);
    let c = components(&u);
    let svd = r.clone().svd(true, true);
    let y = svd.solve(&c, 1e-10).expect("svd with u and v_t");
    let off = (&r * y - &c).amax();
    if off > TANGENT_TOL * (1.0 + c.amax()) {
        return Err(BraneError::NotTangent(off));
    }
    Ok(u)
}

/// ω_h(v₁, v₂) = ⟨θv₁, Tθv₂⟩ − ⟨θv₂, Tθv₁⟩.
pub fn omega_h(p: &ConjClassPoint, pairing: &InvariantPairing, v1: &Mat, v2: &Mat) -> Result<f64, BraneError> {
    let u1 = class_theta(p, v1)?;
    let u2 = class_theta(p, v2)?;
    Ok(pairing.pair(&u1, &t_operator(&p.g, &u2)) - pairing.pair(&u2, &t_operator(&p.g, &u1)))
}

/// (g₁, g₂) = (x h₁ y⁻¹, x h₂ y⁻¹).
#[derive(Clone, Debug, PartialEq)]
pub struct BiconjPoint {
    pub h1: GroupElement,
    pub h2: GroupElement,
    pub g1: GroupElement,
    pub g2: GroupElement,
}

impl BiconjPoint {
    pub fn new(h1: GroupElement, h2: GroupElement, g1: GroupElement, g2: GroupElement) -> Result<Self, BraneError> {
        for g in [&h1, &h2, &g1, &g2] {
            check_su2(g)?;
        }
        let d = (half_trace(&g1.mul(&g2.inverse())) - half_trace(&h1.mul(&h2.inverse()))).abs();
        if d > CLASS_TOL {
            return Err(BraneError::NotInClass(format!("g₁g₂⁻¹ off C_{{h₁h₂⁻¹}} by {d:e}")));
        }
        Ok(BiconjPoint { h1, h2, g1, g2 })
    }

    pub fn random<R: Rng + ?Sized>(h1: &GroupElement, h2: &GroupElement, rng: &mut R) -> Result<Self, BraneError> {
        let x = GroupElement::random(GroupTag::SU2, 2, 1.0, rng);
        let yi = GroupElement::random(GroupTag::SU2, 2, 1.0, rng).inverse();
        BiconjPoint::new(h1.clone(), h2.clone(), x.mul(h1).mul(&yi), x.mul(h2).mul(&yi))
    }

    /// (xg₁ − g₁y, xg₂ − g₂y).
    pub fn tangent(&self, x: &Mat, y: &Mat) -> (Mat, Mat) {
        (x * self.g1.matrix() - self.g1.matrix() * y, x * self.g2.matrix() - self.g2.matrix() * y)
    }

    /// The point g₁g₂⁻¹ of C_{h₁h₂⁻¹}.
    pub fn quotient(&self) -> Result<ConjClassPoint, BraneError> {
        ConjClassPoint::new(self.h1.mul(&self.h2.inverse()), self.g1.mul(&self.g2.inverse()))
    }

    /// d(g₁g₂⁻¹) = v g₂⁻¹ − g₁g₂⁻¹ w g₂⁻¹.
    pub fn quotient_tangent(&self, v: &Mat, w: &Mat) -> Mat {
        let g2i = self.g2.inverse();
        v * g2i.matrix() - self.g1.matrix() * g2i.matrix() * w * g2i.matrix()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BibraneReport {
    /// −μ*ρ + m̃*ω_{h₁h₂⁻¹} with μ(g, h) = (gh⁻¹, h).
    pub def4_value: f64,
    /// m̃*ω_{h₁h₂⁻¹} − ½⟨p₁*θ ∧ p₂*θ⟩.
    pub target_value: f64,
    pub defect: f64,
}

/// Both expressions for the bi-brane curvature on tangent pairs (v₁, w₁),
/// (v₂, w₂) of the biconjugacy class.
pub fn bibrane_curvature(
    q: &BiconjPoint,
    t1: (&Mat, &Mat),
    t2: (&Mat, &Mat),
    pairing: &InvariantPairing,
) -> Result<BibraneReport, BraneError> {
    let class = q.quotient()?;
    let m1 = q.quotient_tangent(t1.0, t1.1);
    let m2 = q.quotient_tangent(t2.0, t2.1);
    let om = omega_h(&class, pairing, &m1, &m2)?;
    let mu = IndexMap::new(2, vec![vec![(0, false), (1, true)], vec![(1, false)]])?;
    let pulled = rho(pairing).pullback(&mu)?;
    let point = [q.g1.clone(), q.g2.clone()];
    let f1 = [t1.0.clone(), t1.1.clone()];
    let f2 = [t2.0.clone(), t2.1.clone()];
    let r = pulled.eval(&point, &[&f1, &f2])?;
    let th = |g: &GroupElement, v: &Mat| g.left_trivialize(v);
    let cross = pairing.pair(&th(&q.g1, t1.0)?, &th(&q.g2, t2.1)?) - pairing.pair(&th(&q.g1, t2.0)?, &th(&q.g2, t1.1)?);
    let def4_value = -r + om;
    let target_value = om - 0.5 * cross;
    Ok(BibraneReport { def4_value, target_value, defect: (def4_value - target_value).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pairing() -> InvariantPairing {
        InvariantPairing::new(3, 0.05)
    }

    fn generic_h() -> GroupElement {
        GroupElement::su2_from_quaternion([0.4, 0.3, -0.5, (1.0f64 - 0.16 - 0.09 - 0.25).sqrt()])
    }

    #[test]
    fn tangents_stay_in_class_to_first_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ConjClassPoint::random(&generic_h(), &mut rng).unwrap();
        let x = GroupTag::SU2.random_algebra(2, 1.0, &mut rng);
        let v = conj_tangent(&p, &x);
        assert!(v.trace().norm() < 1e-15);
        for t in [1e-2, 1e-3] {
            let moved = GroupElement::exp(GroupTag::SU2, &(&x * crate::lie::c64(t, 0.0)));
            let exact = moved.mul(&p.g).mul(&moved.inverse());
            let linear = p.g.matrix() + &v * crate::lie::c64(t, 0.0);
            let err = (exact.matrix() - linear).norm();
            assert!(err < 10.0 * t * t, "t = {t}: {err}");
        }
    }

    #[test]
    fn central_class_has_no_tangents() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = GroupElement::identity(GroupTag::SU2, 2);
        let p = ConjClassPoint::random(&e, &mut rng).unwrap();
        assert!(p.is_central());
        let x = GroupTag::SU2.random_algebra(2, 1.0, &mut rng);
        assert!(crate::lie::max_abs(&conj_tangent(&p, &x)) < 1e-15);
        let z = Mat::zeros(2, 2);
        assert_eq!(omega_h(&p, &pairing(), &z, &z).unwrap(), 0.0);
    }

    #[test]
    fn omega_is_alternating_bilinear_and_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = ConjClassPoint::random(&generic_h(), &mut rng).unwrap();
        let xs: Vec<Mat> = (0..3).map(|_| GroupTag::SU2.random_algebra(2, 1.0, &mut rng)).collect();
        let v: Vec<Mat> = xs.iter().map(|x| conj_tangent(&p, x)).collect();
        let pr = pairing();
        let w = |a: &Mat, b: &Mat| omega_h(&p, &pr, a, b).unwrap();
        assert!(w(&v[0], &v[0]).abs() < 1e-12);
        assert!((w(&v[0], &v[1]) + w(&v[1], &v[0])).abs() < 1e-12);
        let comb = &v[1] * crate::lie::c64(2.0, 0.0) + &v[2] * crate::lie::c64(-0.5, 0.0);
        assert!((w(&v[0], &comb) - 2.0 * w(&v[0], &v[1]) + 0.5 * w(&v[0], &v[2])).abs() < 1e-12);
        let a = GroupElement::random(GroupTag::SU2, 2, 1.0, &mut rng);
        let q = ConjClassPoint::new(p.h.clone(), a.mul(&p.g).mul(&a.inverse())).unwrap();
        let conj = |m: &Mat| a.matrix() * m * a.inverse().matrix();
        let moved = omega_h(&q, &pr, &conj(&v[0]), &conj(&v[1])).unwrap();
        assert!((moved - w(&v[0], &v[1])).abs() < 1e-10);
    }

    #[test]
    fn t_operator_matches_rotation_formula() {
        // Ad_{g⁻¹} rotates the plane normal to log g by some ψ; writing
        // Ad_{g⁻¹}e₁ = cos ψ e₁ + sin ψ Je₁, T = (R + 1)(R − 1)⁻¹ = −cot(ψ/2)·J there.
        let g = GroupElement::su2_from_quaternion([0.9f64.cos(), 0.9f64.sin() * 0.48, -0.9f64.sin() * 0.6, 0.9f64.sin() * 0.64]);
        let n = components(&g.log());
        let n = &n / n.norm();
        let trial = DVector::from_row_slice(&[1.0, 0.3, -0.2]);
        let e1 = &trial - &n * n.dot(&trial);
        let e1 = &e1 / e1.norm();
        let re1 = ad_inv_matrix(&g) * &e1;
        let cos = re1.dot(&e1);
        assert!(re1.dot(&n).abs() < 1e-12);
        let perp = &re1 - &e1 * cos;
        let sin = perp.norm();
        let je1 = &perp / sin;
        let psi = sin.atan2(cos);
        let te1 = components(&t_operator(&g, &from_components(&e1)));
        let expected = &je1 * (-1.0 / (psi / 2.0).tan());
        assert!((&te1 - &expected).amax() < 1e-12, "{te1} vs {expected}");
        // ψ = ±1.8 for a quaternion angle of 0.9
        assert!((psi - 1.8).abs() < 1e-12, "{psi}");
    }

    #[test]
    fn rejects_non_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = ConjClassPoint::random(&generic_h(), &mut rng).unwrap();
        // g·X with X along the axis of g is tangent to G but not to the class
        let axis = p.g.log();
        let v = p.g.tangent(&axis);
        assert!(matches!(omega_h(&p, &pairing(), &v, &v), Err(BraneError::NotTangent(_))));
    }

    #[test]
    fn bibrane_sides_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h1 = generic_h();
        let h2 = GroupElement::su2_from_quaternion([0.1, -0.7, 0.2, (1.0f64 - 0.01 - 0.49 - 0.04).sqrt()]);
        for _ in 0..10 {
            let q = BiconjPoint::random(&h1, &h2, &mut rng).unwrap();
            let mut pair = || {
                let x = GroupTag::SU2.random_algebra(2, 1.0, &mut rng);
                let y = GroupTag::SU2.random_algebra(2, 1.0, &mut rng);
                q.tangent(&x, &y)
            };
            let (a, b) = (pair(), pair());
            let r = bibrane_curvature(&q, (&a.0, &a.1), (&b.0, &b.1), &pairing()).unwrap();
            assert!(r.defect < 1e-9, "{r:?}");
        }
    }
}
