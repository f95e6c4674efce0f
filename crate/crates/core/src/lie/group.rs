use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::LieError;

pub type Mat = DMatrix<Complex64>;

const GROUP_TOL: f64 = 1e-12;
const TANGENT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupTag {
    SU2,
    UnitaryN,
    /// Translations of R^d, stored as (d+1)×(d+1) affine matrices.
    VectorGroupRd,
}

/// A matrix Lie group element. The matrix size is `n` for SU2/UnitaryN and
/// `d + 1` for VectorGroupRd.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    matrix: Mat,
    tag: GroupTag,
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The basis τ_a = −(i/2)σ_a of su(2).
pub fn su2_basis() -> [Mat; 3] {
    let z = c64(0.0, 0.0);
    let h = 0.5;
    [
        Mat::from_row_slice(2, 2, &[z, c64(0.0, -h), c64(0.0, -h), z]),
        Mat::from_row_slice(2, 2, &[z, c64(-h, 0.0), c64(h, 0.0), z]),
        Mat::from_row_slice(2, 2, &[c64(0.0, -h), z, z, c64(0.0, h)]),
    ]
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

impl GroupTag {
    /// Real basis of the Lie algebra realized as matrices of size `size`.
    pub fn algebra_basis(self, size: usize) -> Vec<Mat> {
        match self {
            GroupTag::SU2 => su2_basis().to_vec(),
            GroupTag::UnitaryN => {
                let mut out = Vec::new();
                for j in 0..size {
                    let mut m = Mat::zeros(size, size);
                    m[(j, j)] = c64(0.0, 1.0);
                    out.push(m);
                }
                for j in 0..size {
                    for k in (j + 1)..size {
                        let mut a = Mat::zeros(size, size);
                        a[(j, k)] = c64(1.0, 0.0);
                        a[(k, j)] = c64(-1.0, 0.0);
                        out.push(a);
                        let mut s = Mat::zeros(size, size);
                        s[(j, k)] = c64(0.0, 1.0);
                        s[(k, j)] = c64(0.0, 1.0);
                        out.push(s);
                    }
                }
                out
            }
            GroupTag::VectorGroupRd => {
                let d = size - 1;
                (0..d)
                    .map(|i| {
                        let mut m = Mat::zeros(size, size);
                        m[(i, d)] = c64(1.0, 0.0);
                        m
                    })
                    .collect()
            }
        }
    }

    /// Orthogonal projection of an arbitrary matrix onto the Lie algebra.
    pub fn project_algebra(self, x: &Mat) -> Mat {
        let n = x.nrows();
        match self {
            GroupTag::SU2 | GroupTag::UnitaryN => {
                let mut a = (x - x.adjoint()) * c64(0.5, 0.0);
                if self == GroupTag::SU2 {
                    let t = a.trace() / c64(n as f64, 0.0);
                    for i in 0..n {
                        a[(i, i)] -= t;
                    }
                }
                a
            }
            GroupTag::VectorGroupRd => {
                let d = n - 1;
                let mut m = Mat::zeros(n, n);
                for i in 0..d {
                    m[(i, d)] = c64(x[(i, d)].re, 0.0);
                }
                m
            }
        }
    }

    pub fn random_algebra<R: Rng + ?Sized>(self, size: usize, scale: f64, rng: &mut R) -> Mat {
        let mut x = Mat::zeros(size, size);
        for b in self.algebra_basis(size) {
            let t: f64 = rng.sample(StandardNormal);
            x += b * c64(scale * t, 0.0);
        }
        x
    }
}

impl GroupElement {
    pub fn new(matrix: Mat, tag: GroupTag) -> Result<Self, LieError> {
        let g = GroupElement { matrix, tag };
        g.validate(GROUP_TOL)?;
        Ok(g)
    }

    /// Construction without validation; callers guarantee membership.
    pub fn from_raw(matrix: Mat, tag: GroupTag) -> Self {
        GroupElement { matrix, tag }
    }

    pub fn identity(tag: GroupTag, size: usize) -> Self {
        GroupElement { matrix: Mat::identity(size, size), tag }
    }

    /// Unit quaternion (a, b, c, d) as [[a+ib, c+id], [−c+id, a−ib]].
    pub fn su2_from_quaternion(q: [f64; 4]) -> Self {
        let m = Mat::from_row_slice(
            2,
            2,
            &[c64(q[0], q[1]), c64(q[2], q[3]), c64(-q[2], q[3]), c64(q[0], -q[1])],
        );
        GroupElement { matrix: m, tag: GroupTag::SU2 }
    }

    pub fn quaternion(&self) -> [f64; 4] {
        let m = &self.matrix;
        [m[(0, 0)].re, m[(0, 0)].im, m[(0, 1)].re, m[(0, 1)].im]
    }

    pub fn translation(x: &[f64]) -> Self {
        let d = x.len();
        let mut m = Mat::identity(d + 1, d + 1);
        for (i, xi) in x.iter().enumerate() {
            m[(i, d)] = c64(*xi, 0.0);
        }
        GroupElement { matrix: m, tag: GroupTag::VectorGroupRd }
    }

    /// Diagonal torus element diag(e^{iφ_j}) in U(n).
    pub fn torus(angles: &[f64]) -> Self {
        let n = angles.len();
        let mut m = Mat::zeros(n, n);
        for (j, a) in angles.iter().enumerate() {
            m[(j, j)] = Complex64::from_polar(1.0, *a);
        }
        GroupElement { matrix: m, tag: GroupTag::UnitaryN }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Real coordinates used by coefficient functions: quaternion components
    /// for SU2, translation vector for VectorGroupRd, diagonal phases for UnitaryN.
    pub fn coordinates(&self) -> Vec<f64> {
        match self.tag {
            GroupTag::SU2 => self.quaternion().to_vec(),
            GroupTag::VectorGroupRd => {
                let d = self.size() - 1;
                (0..d).map(|i| self.matrix[(i, d)].re).collect()
            }
            GroupTag::UnitaryN => (0..self.size()).map(|j| self.matrix[(j, j)].arg()).collect(),
        }
    }

    pub fn validate(&self, tol: f64) -> Result<(), LieError> {
        let n = self.size();
        if self.matrix.ncols() != n || n == 0 {
            return Err(LieError::NotInGroup("non-square matrix".into()));
        }
        match self.tag {
            GroupTag::SU2 | GroupTag::UnitaryN => {
                let u = self.matrix.adjoint() * &self.matrix - Mat::identity(n, n);
                if max_abs(&u) > tol {
                    return Err(LieError::NotInGroup(format!("unitarity defect {:e}", max_abs(&u))));
                }
                if self.tag == GroupTag::SU2 {
                    if n != 2 {
                        return Err(LieError::NotInGroup("SU2 needs 2x2".into()));
                    }
                    let det = self.matrix.determinant();
                    if (det - c64(1.0, 0.0)).norm() > tol {
                        return Err(LieError::NotInGroup(format!("determinant {det}")));
                    }
                }
            }
            GroupTag::VectorGroupRd => {
                let d = n - 1;
                for i in 0..n {
                    for j in 0..n {
                        let z = self.matrix[(i, j)];
                        let expect = if j == d && i < d {
                            c64(z.re, 0.0)
                        } else if i == j {
                            c64(1.0, 0.0)
                        } else {
                            c64(0.0, 0.0)
                        };
                        if (z - expect).norm() > tol {
                            return Err(LieError::NotInGroup("not a translation matrix".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement { matrix: &self.matrix * &other.matrix, tag: self.tag }
    }

    pub fn inverse(&self) -> GroupElement {
        let m = match self.tag {
            GroupTag::SU2 | GroupTag::UnitaryN => self.matrix.adjoint(),
            GroupTag::VectorGroupRd => {
                let mut m = self.matrix.clone();
                let d = self.size() - 1;
                for i in 0..d {
                    m[(i, d)] = -m[(i, d)];
                }
                m
            }
        };
        GroupElement { matrix: m, tag: self.tag }
    }

    pub fn exp(tag: GroupTag, x: &Mat) -> GroupElement {
        let m = match tag {
            GroupTag::SU2 => su2_exp(x),
            GroupTag::VectorGroupRd => Mat::identity(x.nrows(), x.ncols()) + x,
            GroupTag::UnitaryN => {
                if is_diagonal(x) {
                    let mut m = Mat::zeros(x.nrows(), x.ncols());
                    for j in 0..x.nrows() {
                        m[(j, j)] = x[(j, j)].exp();
                    }
                    m
                } else {
                    x.clone().exp()
                }
            }
        };
        GroupElement { matrix: m, tag }
    }

    /// Principal logarithm. For SU2 and UnitaryN the cut locus is the set of
    /// elements with an eigenvalue −1.
    pub fn log(&self) -> Mat {
        match self.tag {
            GroupTag::SU2 => su2_log(&self.matrix),
            GroupTag::VectorGroupRd => &self.matrix - Mat::identity(self.size(), self.size()),
            GroupTag::UnitaryN => unitary_log(&self.matrix),
        }
    }

    pub fn ad(&self, x: &Mat) -> Mat {
        &self.matrix * x * self.inverse().matrix
    }

    pub fn ad_inv(&self, x: &Mat) -> Mat {
        self.inverse().matrix * x * &self.matrix
    }

    /// Left trivialization g⁻¹v, rejecting v that is not tangent at g.
    pub fn left_trivialize(&self, v: &Mat) -> Result<Mat, LieError> {
        let x = self.inverse().matrix * v;
        let p = self.tag.project_algebra(&x);
        let defect = max_abs(&(&x - &p));
        if defect > TANGENT_TOL * (1.0 + max_abs(&x)) {
            return Err(LieError::NotTangent(defect));
        }
        Ok(x)
    }

    pub fn random<R: Rng + ?Sized>(tag: GroupTag, size: usize, scale: f64, rng: &mut R) -> Self {
        match tag {
            GroupTag::SU2 => {
                let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                GroupElement::su2_from_quaternion(q.map(|x| x / n))
            }
            _ => GroupElement::exp(tag, &tag.random_algebra(size, scale, rng)),
        }
    }

    /// Tangent vector g·X at g for algebra element X.
    pub fn tangent(&self, x: &Mat) -> Mat {
        &self.matrix * x
    }

    pub fn distance(&self, other: &GroupElement) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

fn is_diagonal(x: &Mat) -> bool {
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if i != j && x[(i, j)].norm() != 0.0 {
                return false;
            }
        }
    }
    true
}

/// exp of a traceless 2×2 matrix: X² = −det(X)·1.
fn su2_exp(x: &Mat) -> Mat {
    let det = x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)];
    let s = (-det).sqrt();
    let (ch, sh) = if s.norm() < 1e-8 {
        let s2 = s * s;
        (c64(1.0, 0.0) + s2 / 2.0, c64(1.0, 0.0) + s2 / 6.0)
    } else {
        (s.cosh(), s.sinh() / s)
    };
    Mat::identity(2, 2) * ch + x * sh
}

fn su2_log(g: &Mat) -> Mat {
    let half_tr = ((g[(0, 0)] + g[(1, 1)]).re / 2.0).clamp(-1.0, 1.0);
    let alpha = half_tr.acos();
    let mut u = g.clone();
    u[(0, 0)] -= c64(half_tr, 0.0);
    u[(1, 1)] -= c64(half_tr, 0.0);
    let s = alpha.sin();
    let f = if s.abs() < 1e-8 { 1.0 + alpha * alpha / 6.0 } else { alpha / s };
    let x = u * c64(f, 0.0);
    GroupTag::SU2.project_algebra(&x)
}

fn unitary_log(g: &Mat) -> Mat {
    let n = g.nrows();
    if is_diagonal(g) {
        let mut m = Mat::zeros(n, n);
        for j in 0..n {
            m[(j, j)] = c64(0.0, g[(j, j)].arg());
        }
        return m;
    }
    let (q, t) = nalgebra::Schur::new(g.clone()).unpack();
    let mut d = Mat::zeros(n, n);
    for j in 0..n {
        d[(j, j)] = c64(0.0, t[(j, j)].arg());
    }
    GroupTag::UnitaryN.project_algebra(&(&q * d * q.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn su2_exp_log_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = GroupTag::SU2.random_algebra(2, 0.8, &mut rng);
            let g = GroupElement::exp(GroupTag::SU2, &x);
            g.validate(1e-12).unwrap();
            assert!(max_abs(&(g.log() - &x)) < 1e-12);
            let reference = x.clone().exp();
            assert!(max_abs(&(g.matrix() - reference)) < 1e-12);
        }
    }

    #[test]
    fn unitary_log_matches_exp() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = GroupTag::UnitaryN.random_algebra(3, 0.5, &mut rng);
            let g = GroupElement::exp(GroupTag::UnitaryN, &x);
            g.validate(1e-12).unwrap();
            assert!(max_abs(&(g.log() - &x)) < 1e-10);
        }
    }

    #[test]
    fn quaternion_roundtrip_and_inverse() {
        let q = [0.5, -0.5, 0.5, 0.5];
        let g = GroupElement::su2_from_quaternion(q);
        g.validate(1e-14).unwrap();
        assert_eq!(g.quaternion(), q);
        let e = g.mul(&g.inverse());
        assert!(e.distance(&GroupElement::identity(GroupTag::SU2, 2)) < 1e-15);
    }

    #[test]
    fn translations_compose_additively() {
        let a = GroupElement::translation(&[1.0, 2.0]);
        let b = GroupElement::translation(&[-0.5, 3.0]);
        assert_eq!(a.mul(&b).coordinates(), vec![0.5, 5.0]);
        assert_eq!(a.inverse().coordinates(), vec![-1.0, -2.0]);
        assert!(max_abs(&(a.log() - GroupElement::translation(&[1.0, 2.0]).log())) == 0.0);
    }

    #[test]
    fn tangent_check_rejects_non_tangent() {
        let g = GroupElement::su2_from_quaternion([0.6, 0.8, 0.0, 0.0]);
        let good = g.tangent(&su2_basis()[0]);
        assert!(g.left_trivialize(&good).is_ok());
        assert!(g.left_trivialize(&Mat::identity(2, 2)).is_err());
    }
}
