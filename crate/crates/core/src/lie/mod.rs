//! Matrix Lie groups and a small evaluator for differential forms on tuples
//! of group factors.

mod form;
mod group;
mod index_map;
mod pairing;

pub use form::{
    coordinate_component, shuffles, trace_product, AlgField, AlgForm, AlgNode, Custom2Form, FdConfig, Form,
    FormNode, ScalarField, MIN_FD_STEP,
};
pub use group::{c64, max_abs, su2_basis, GroupElement, GroupTag, Mat};
pub use index_map::{Block, IndexMap};
pub use pairing::{calibrate_pairing, Calibration, InvariantPairing, CALIBRATION_RESOLUTION};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("singular group element")]
    Singular,
    #[error("not a group element: {0}")]
    NotInGroup(String),
    #[error("tangent vector off the group by {0:e}")]
    NotTangent(f64),
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("degree mismatch: {0}")]
    Degree(String),
    #[error("finite-difference step {0:e} below the cancellation floor")]
    StepTooSmall(f64),
    #[error("calibration did not converge: c = {coarse} vs {fine}")]
    Calibration { coarse: f64, fine: f64 },
}

/// θ_g(v) = g⁻¹v.
pub fn left_mc(g: &GroupElement, v: &Mat) -> Result<Mat, LieError> {
    if g.matrix().determinant().norm() < 1e-300 {
        return Err(LieError::Singular);
    }
    g.left_trivialize(v)
}

/// θ̄_g(v) = vg⁻¹.
pub fn right_mc(g: &GroupElement, v: &Mat) -> Result<Mat, LieError> {
    let x = left_mc(g, v)?;
    Ok(g.ad(&x))
}

/// η = ⅙⟨θ ∧ [θ ∧ θ]⟩ on G.
pub fn eta(p: &InvariantPairing) -> Form {
    let th = AlgForm::theta(1, 0, 2);
    Form::bracket_pairing(p.coeff() / 6.0, &th, &th, &th).expect("same arity")
}

/// η on a general factor size, for groups other than SU(2).
pub fn eta_sized(p: &InvariantPairing, size: usize) -> Form {
    let th = AlgForm::theta(1, 0, size);
    Form::bracket_pairing(p.coeff() / 6.0, &th, &th, &th).expect("same arity")
}

/// ρ = ½⟨p₁*θ ∧ p₂*θ̄⟩ on G².
pub fn rho(p: &InvariantPairing) -> Form {
    rho_sized(p, 2)
}

pub fn rho_sized(p: &InvariantPairing, size: usize) -> Form {
    let a = AlgForm::theta(2, 0, size);
    let b = AlgForm::theta_bar(2, 1, size);
    Form::pairing(0.5 * p.coeff(), &a, &b).expect("same arity")
}

/// Δf = Σ_i (−1)^i Δ_i* f, taking forms on G^q to forms on G^{q+1}.
pub fn simplicial_delta(f: &Form) -> Result<Form, LieError> {
    let q = f.arity() + 1;
    let terms = (0..=q)
        .map(|i| {
            let t = f.pullback(&IndexMap::face(q, i))?;
            Ok(if i % 2 == 0 { t } else { t.scale(-1.0) })
        })
        .collect::<Result<Vec<_>, LieError>>()?;
    Form::sum(terms)
}

/// The pullback of a form on G along the multiplication of the listed factors.
pub fn pull_product(f: &Form, arity: usize, factors: &[usize]) -> Result<Form, LieError> {
    f.pullback(&IndexMap::grouping(arity, &[factors])?)
}

pub fn random_point<R: Rng + ?Sized>(tags: &[(GroupTag, usize)], rng: &mut R) -> Vec<GroupElement> {
    tags.iter().map(|&(t, n)| GroupElement::random(t, n, 1.0, rng)).collect()
}

pub fn random_frame<R: Rng + ?Sized>(point: &[GroupElement], k: usize, rng: &mut R) -> Vec<Vec<Mat>> {
    (0..k)
        .map(|_| point.iter().map(|g| g.tangent(&g.tag().random_algebra(g.size(), 1.0, rng))).collect())
        .collect()
}

pub fn su2_point<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Vec<GroupElement> {
    random_point(&vec![(GroupTag::SU2, 2); q], rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(2024)
    }

    #[test]
    fn maurer_cartan_examples() {
        let g = GroupElement::from_raw(
            Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(0.0, 1.0), c64(0.0, -1.0)])),
            GroupTag::SU2,
        );
        let x = Mat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, 1.0), c64(0.0, 1.0), c64(0.0, 0.0)]);
        let v = g.tangent(&x);
        assert!(max_abs(&(left_mc(&g, &v).unwrap() - &x)) < 1e-15);
        let e = GroupElement::identity(GroupTag::SU2, 2);
        assert!(max_abs(&(right_mc(&e, &x).unwrap() - &x)) == 0.0);
        let mut r = rng();
        let h = GroupElement::random(GroupTag::SU2, 2, 1.0, &mut r);
        let y = GroupTag::SU2.random_algebra(2, 1.0, &mut r);
        let w = &y * h.matrix();
        assert!(max_abs(&(right_mc(&h, &w).unwrap() - &y)) < 1e-14);
        let th = left_mc(&h, &w).unwrap();
        assert!(max_abs(&(right_mc(&h, &w).unwrap() - h.ad(&th))) < 1e-14);
    }

    #[test]
    fn eta_alternates_exactly() {
        let p = InvariantPairing::new(1, 1.0);
        let f = eta(&p);
        let mut r = rng();
        for _ in 0..20 {
            let pt = su2_point(1, &mut r);
            let fr = random_frame(&pt, 2, &mut r);
            let v = f.eval_owned(&pt, &[fr[0].clone(), fr[0].clone(), fr[1].clone()]).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn eta_at_identity_matches_triple_product() {
        // Hand expansion: ⅙ Σ_shuffles ⟨X_i, [X_j, X_k]⟩ = ½⟨X, [Y, Z]⟩ for the ½ bracket.
        let p = InvariantPairing::new(1, 1.0);
        let f = eta(&p);
        let e = vec![GroupElement::identity(GroupTag::SU2, 2)];
        let b = su2_basis();
        let v = f.eval_owned(&e, &[vec![b[0].clone()], vec![b[1].clone()], vec![b[2].clone()]]).unwrap();
        let comm = &b[1] * &b[2] - &b[2] * &b[1];
        let expect = 0.5 * p.pair(&b[0], &comm);
        assert!((v - expect).abs() < 1e-15);
        // [τ_2, τ_3] = τ_1 and ⟨τ_1, τ_1⟩ = ½ at c = 1
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rho_vanishes_for_zero_frames() {
        let p = InvariantPairing::new(1, 1.0);
        let f = rho(&p);
        let e = vec![GroupElement::identity(GroupTag::SU2, 2); 2];
        let z = Mat::zeros(2, 2);
        let b = su2_basis();
        let v = f
            .eval_owned(&e, &[vec![z.clone(), b[0].clone()], vec![b[1].clone(), z.clone()]])
            .unwrap();
        // ½(⟨0, 0⟩ − ⟨τ_2, τ_1⟩) = 0
        assert_eq!(v, 0.0);
        let w = f
            .eval_owned(&e, &[vec![b[0].clone(), z.clone()], vec![z.clone(), b[0].clone()]])
            .unwrap();
        assert!((w - 0.25).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_shape_errors() {
        let p = InvariantPairing::new(1, 1.0);
        let f = rho(&p);
        let mut r = rng();
        let pt = su2_point(1, &mut r);
        let fr = random_frame(&pt, 2, &mut r);
        assert!(matches!(f.eval_owned(&pt, &fr), Err(LieError::Arity(_))));
        let pt2 = su2_point(2, &mut r);
        let fr2 = random_frame(&pt2, 1, &mut r);
        assert!(matches!(f.eval_owned(&pt2, &fr2), Err(LieError::Degree(_))));
    }

    #[test]
    fn fd_step_guard() {
        let f = eta(&InvariantPairing::new(1, 1.0));
        assert!(f.ext_d(FdConfig { step: 1e-9, richardson: false }).is_err());
        assert!(f.ext_d(FdConfig::default()).is_ok());
    }

    #[test]
    fn exterior_derivative_of_constant_vanishes() {
        let mut r = rng();
        let c = Form::constant(3.5, 2).ext_d(FdConfig::default()).unwrap();
        let pt = su2_point(2, &mut r);
        let fr = random_frame(&pt, 1, &mut r);
        assert!(c.eval_owned(&pt, &fr).unwrap().abs() < 1e-9);
    }

    #[test]
    fn exterior_derivative_of_function_is_directional_derivative() {
        #[derive(Debug)]
        struct F;
        impl ScalarField for F {
            fn eval(&self, p: &[GroupElement]) -> f64 {
                let x = p[0].coordinates();
                x[0] * x[0] + (x[1] * 3.0).sin()
            }
        }
        let f = Form::function(std::sync::Arc::new(F), 1);
        let df = f.ext_d(FdConfig::default()).unwrap();
        let pt = vec![GroupElement::translation(&[0.3, -0.2])];
        let v = vec![GroupElement::translation(&[0.0, 0.0]).tangent(&GroupTag::VectorGroupRd.algebra_basis(3)[1])];
        let got = df.eval_owned(&pt, &[v]).unwrap();
        assert!((got - 3.0 * (-0.6f64).cos()).abs() < 1e-7);
    }

    #[test]
    fn exterior_derivative_of_theta_is_minus_bracket() {
        // Maurer–Cartan: dθ + [θ∧θ] = 0 with the ½ bracket.
        let th = AlgForm::theta(1, 0, 2);
        let dth = th.ext_d(FdConfig::default()).unwrap();
        let mut r = rng();
        for _ in 0..10 {
            let pt = su2_point(1, &mut r);
            let fr = random_frame(&pt, 2, &mut r);
            let refs: Vec<&[Mat]> = fr.iter().map(|v| v.as_slice()).collect();
            let s = dth.eval(&pt, &refs).unwrap() + th.bracket(&th).unwrap().eval(&pt, &refs).unwrap();
            assert!(max_abs(&s) < 1e-7);
        }
    }

    #[test]
    fn delta_squared_vanishes() {
        let p = InvariantPairing::new(1, 1.0);
        let dd = simplicial_delta(&simplicial_delta(&eta(&p)).unwrap()).unwrap();
        let mut r = rng();
        for _ in 0..50 {
            let pt = su2_point(3, &mut r);
            let fr = random_frame(&pt, 3, &mut r);
            assert!(dd.eval_owned(&pt, &fr).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn delta_of_eta_unfolds_termwise() {
        let p = InvariantPairing::new(1, 1.0);
        let e = eta(&p);
        let de = simplicial_delta(&e).unwrap();
        let e1 = e.pullback(&IndexMap::projection(2, 0)).unwrap();
        let e2 = e.pullback(&IndexMap::projection(2, 1)).unwrap();
        let e12 = pull_product(&e, 2, &[0, 1]).unwrap();
        let mut r = rng();
        let pt = su2_point(2, &mut r);
        let fr = random_frame(&pt, 3, &mut r);
        let lhs = de.eval_owned(&pt, &fr).unwrap();
        let rhs = e1.eval_owned(&pt, &fr).unwrap() - e12.eval_owned(&pt, &fr).unwrap()
            + e2.eval_owned(&pt, &fr).unwrap();
        assert!((lhs - rhs).abs() < 1e-13);
    }
}
