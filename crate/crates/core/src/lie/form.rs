use std::fmt;
use std::sync::Arc;

use super::group::{c64, GroupElement, GroupTag, Mat};
use super::index_map::IndexMap;
use super::LieError;

/// Finite-difference settings for the numerical exterior derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdConfig {
    pub step: f64,
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { step: 1e-4, richardson: false }
    }
}

pub const MIN_FD_STEP: f64 = 1e-7;

/// A 𝔤-valued 1-form living on a single factor of the point tuple.
pub trait AlgField: Send + Sync + fmt::Debug {
    fn eval(&self, at: &GroupElement, v: &Mat) -> Mat;
    fn size(&self) -> usize;
}

/// A smooth real function of the point tuple.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn eval(&self, point: &[GroupElement]) -> f64;
}

#[derive(Debug)]
pub enum AlgNode {
    Zero,
    Theta(usize),
    ThetaBar(usize),
    /// A_E = Ad_{a⁻¹} A(m) + θ_a on M×G; without a fiber slot, A(m) itself.
    Connection { field: Arc<dyn AlgField>, base: usize, fiber: Option<usize> },
    /// Graded bracket with the ½ normalization: [α∧β](v,w) = ½([αv,βw] − [αw,βv]) on 1-forms.
    Bracket(AlgForm, AlgForm),
    Sum(Vec<AlgForm>),
    Scale(f64, AlgForm),
    Pullback(IndexMap, AlgForm),
    ExtD(AlgForm, FdConfig),
}

/// 𝔤-valued differential form on a tuple of group factors.
#[derive(Clone, Debug)]
pub struct AlgForm {
    node: Arc<AlgNode>,
    degree: usize,
    arity: usize,
    size: usize,
}

#[derive(Debug)]
pub enum FormNode {
    Zero,
    Constant(f64),
    Function(Arc<dyn ScalarField>),
    /// Coordinate 1-form on one factor: dx_i (translations), dφ_i (diagonal
    /// torus phases), or the i-th component of θ in the τ basis (SU2).
    CoordDiff { slot: usize, index: usize, tag: GroupTag },
    /// c · Re tr(α ∧ β) with the determinant wedge convention.
    PairingWedge(f64, AlgForm, AlgForm),
    Wedge(Form, Form),
    Sum(Vec<Form>),
    Scale(f64, Form),
    Pullback(IndexMap, Form),
    ExtD(Form, FdConfig),
    /// (q/4π) det[x, v, w] / |x|³ on a translation factor of R³.
    Monopole { slot: usize, charge: f64 },
    /// Pointwise 2-form with a user-supplied alternating evaluator.
    Custom2(Arc<dyn Custom2Form>),
}

pub trait Custom2Form: Send + Sync + fmt::Debug {
    fn eval(&self, point: &[GroupElement], v: &[Mat], w: &[Mat]) -> f64;
}

/// Real differential form on a tuple of group factors.
#[derive(Clone, Debug)]
pub struct Form {
    node: Arc<FormNode>,
    degree: usize,
    arity: usize,
}

fn check_arity(a: usize, b: usize) -> Result<(), LieError> {
    if a != b {
        return Err(LieError::Arity(format!("arity {a} vs {b}")));
    }
    Ok(())
}

fn check_step(cfg: FdConfig) -> Result<(), LieError> {
    if !(cfg.step >= MIN_FD_STEP) {
        return Err(LieError::StepTooSmall(cfg.step));
    }
    Ok(())
}

impl AlgForm {
    fn make(node: AlgNode, degree: usize, arity: usize, size: usize) -> Self {
        AlgForm { node: Arc::new(node), degree, arity, size }
    }

    pub fn zero(degree: usize, arity: usize, size: usize) -> Self {
        AlgForm::make(AlgNode::Zero, degree, arity, size)
    }

    /// Left Maurer–Cartan form θ_g(v) = g⁻¹v on factor `slot`.
    pub fn theta(arity: usize, slot: usize, size: usize) -> Self {
        AlgForm::make(AlgNode::Theta(slot), 1, arity, size)
    }

    /// Right Maurer–Cartan form θ̄_g(v) = vg⁻¹ on factor `slot`.
    pub fn theta_bar(arity: usize, slot: usize, size: usize) -> Self {
        AlgForm::make(AlgNode::ThetaBar(slot), 1, arity, size)
    }

    pub fn connection(arity: usize, field: Arc<dyn AlgField>, base: usize, fiber: Option<usize>) -> Self {
        let size = field.size();
        AlgForm::make(AlgNode::Connection { field, base, fiber }, 1, arity, size)
    }

    pub fn bracket(&self, other: &AlgForm) -> Result<AlgForm, LieError> {
        check_arity(self.arity, other.arity)?;
        Ok(AlgForm::make(
            AlgNode::Bracket(self.clone(), other.clone()),
            self.degree + other.degree,
            self.arity,
            self.size,
        ))
    }

    pub fn sum(terms: Vec<AlgForm>) -> Result<AlgForm, LieError> {
        let first = terms.first().ok_or_else(|| LieError::Arity("empty sum".into()))?;
        let (d, a, s) = (first.degree, first.arity, first.size);
        for t in &terms {
            check_arity(a, t.arity)?;
            if t.degree != d {
                return Err(LieError::Degree(format!("sum of degrees {d} and {}", t.degree)));
            }
        }
        Ok(AlgForm::make(AlgNode::Sum(terms), d, a, s))
    }

    pub fn scale(&self, s: f64) -> AlgForm {
        AlgForm::make(AlgNode::Scale(s, self.clone()), self.degree, self.arity, self.size)
    }

    pub fn pullback(&self, map: &IndexMap) -> Result<AlgForm, LieError> {
        check_arity(map.arity_out(), self.arity)?;
        Ok(AlgForm::make(AlgNode::Pullback(map.clone(), self.clone()), self.degree, map.arity_in(), self.size))
    }

    pub fn ext_d(&self, cfg: FdConfig) -> Result<AlgForm, LieError> {
        check_step(cfg)?;
        Ok(AlgForm::make(AlgNode::ExtD(self.clone(), cfg), self.degree + 1, self.arity, self.size))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn node(&self) -> &AlgNode {
        &self.node
    }

    pub fn eval(&self, point: &[GroupElement], frame: &[&[Mat]]) -> Result<Mat, LieError> {
        check_shape(self.arity, self.degree, point, frame)?;
        Ok(self.value(point, frame))
    }

    /// Evaluation without shape checks.
    pub fn value(&self, point: &[GroupElement], frame: &[&[Mat]]) -> Mat {
        match &*self.node {
            AlgNode::Zero => Mat::zeros(self.size, self.size),
            AlgNode::Theta(s) => point[*s].inverse().matrix() * frame[0][*s].clone(),
            AlgNode::ThetaBar(s) => frame[0][*s].clone() * point[*s].inverse().matrix(),
            AlgNode::Connection { field, base, fiber } => {
                let a = field.eval(&point[*base], &frame[0][*base]);
                match fiber {
                    None => a,
                    Some(f) => {
                        let g = &point[*f];
                        let gi = g.inverse();
                        gi.matrix() * a * g.matrix() + gi.matrix() * &frame[0][*f]
                    }
                }
            }
            AlgNode::Bracket(a, b) => {
                let (p, q) = (a.degree, b.degree);
                let mut acc = Mat::zeros(self.size, self.size);
                for (s, r, sign) in shuffles(p, q) {
                    let fs: Vec<&[Mat]> = s.iter().map(|&i| frame[i]).collect();
                    let fr: Vec<&[Mat]> = r.iter().map(|&i| frame[i]).collect();
                    let x = a.value(point, &fs);
                    let y = b.value(point, &fr);
                    let comm = &x * &y - &y * &x;
                    acc += comm * c64(0.5 * sign, 0.0);
                }
                acc
            }
            AlgNode::Sum(ts) => {
                let mut acc = Mat::zeros(self.size, self.size);
                for t in ts {
                    acc += t.value(point, frame);
                }
                acc
            }
            AlgNode::Scale(s, t) => t.value(point, frame) * c64(*s, 0.0),
            AlgNode::Pullback(map, t) => {
                let (p, f) = pull(map, point, frame);
                let refs: Vec<&[Mat]> = f.iter().map(|v| v.as_slice()).collect();
                t.value(&p, &refs)
            }
            AlgNode::ExtD(t, cfg) => fd_exterior(point, frame, *cfg, |p, f| t.value(p, f)),
        }
    }
}

impl Form {
    fn make(node: FormNode, degree: usize, arity: usize) -> Self {
        Form { node: Arc::new(node), degree, arity }
    }

    pub fn zero(degree: usize, arity: usize) -> Self {
        Form::make(FormNode::Zero, degree, arity)
    }

    pub fn constant(c: f64, arity: usize) -> Self {
        Form::make(FormNode::Constant(c), 0, arity)
    }

    pub fn function(f: Arc<dyn ScalarField>, arity: usize) -> Self {
        Form::make(FormNode::Function(f), 0, arity)
    }

    pub fn coord_diff(arity: usize, slot: usize, index: usize, tag: GroupTag) -> Self {
        Form::make(FormNode::CoordDiff { slot, index, tag }, 1, arity)
    }

    /// c · Re tr(α ∧ β).
    pub fn pairing(coeff: f64, a: &AlgForm, b: &AlgForm) -> Result<Form, LieError> {
        check_arity(a.arity, b.arity)?;
        Ok(Form::make(FormNode::PairingWedge(coeff, a.clone(), b.clone()), a.degree + b.degree, a.arity))
    }

    /// c · Re tr(α ∧ [β ∧ γ]).
    pub fn bracket_pairing(coeff: f64, a: &AlgForm, b: &AlgForm, c: &AlgForm) -> Result<Form, LieError> {
        Form::pairing(coeff, a, &b.bracket(c)?)
    }

    pub fn monopole(arity: usize, slot: usize, charge: f64) -> Self {
        Form::make(FormNode::Monopole { slot, charge }, 2, arity)
    }

    pub fn custom2(arity: usize, f: Arc<dyn Custom2Form>) -> Self {
        Form::make(FormNode::Custom2(f), 2, arity)
    }

    pub fn wedge(&self, other: &Form) -> Result<Form, LieError> {
        check_arity(self.arity, other.arity)?;
        Ok(Form::make(FormNode::Wedge(self.clone(), other.clone()), self.degree + other.degree, self.arity))
    }

    pub fn sum(terms: Vec<Form>) -> Result<Form, LieError> {
        let first = terms.first().ok_or_else(|| LieError::Arity("empty sum".into()))?;
        let (d, a) = (first.degree, first.arity);
        for t in &terms {
            check_arity(a, t.arity)?;
            if t.degree != d {
                return Err(LieError::Degree(format!("sum of degrees {d} and {}", t.degree)));
            }
        }
        Ok(Form::make(FormNode::Sum(terms), d, a))
    }

    pub fn add(&self, other: &Form) -> Result<Form, LieError> {
        Form::sum(vec![self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &Form) -> Result<Form, LieError> {
        Form::sum(vec![self.clone(), other.scale(-1.0)])
    }

    pub fn scale(&self, s: f64) -> Form {
        Form::make(FormNode::Scale(s, self.clone()), self.degree, self.arity)
    }

    pub fn pullback(&self, map: &IndexMap) -> Result<Form, LieError> {
        check_arity(map.arity_out(), self.arity)?;
        Ok(Form::make(FormNode::Pullback(map.clone(), self.clone()), self.degree, map.arity_in()))
    }

    pub fn ext_d(&self, cfg: FdConfig) -> Result<Form, LieError> {
        check_step(cfg)?;
        Ok(Form::make(FormNode::ExtD(self.clone(), cfg), self.degree + 1, self.arity))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn node(&self) -> &FormNode {
        &self.node
    }

    pub fn eval(&self, point: &[GroupElement], frame: &[&[Mat]]) -> Result<f64, LieError> {
        check_shape(self.arity, self.degree, point, frame)?;
        Ok(self.value(point, frame))
    }

    /// Evaluation on owned tangent tuples.
    pub fn eval_owned(&self, point: &[GroupElement], frame: &[Vec<Mat>]) -> Result<f64, LieError> {
        let refs: Vec<&[Mat]> = frame.iter().map(|v| v.as_slice()).collect();
        self.eval(point, &refs)
    }

    /// Evaluation without shape checks.
    pub fn value(&self, point: &[GroupElement], frame: &[&[Mat]]) -> f64 {
        match &*self.node {
            FormNode::Zero => 0.0,
            FormNode::Constant(c) => *c,
            FormNode::Function(f) => f.eval(point),
            FormNode::CoordDiff { slot, index, tag } => {
                let g = &point[*slot];
                let x = g.inverse().matrix() * &frame[0][*slot];
                coordinate_component(*tag, &x, *index)
            }
            FormNode::PairingWedge(c, a, b) => {
                let (p, q) = (a.degree, b.degree);
                let mut acc = 0.0;
                for (s, r, sign) in shuffles(p, q) {
                    let fs: Vec<&[Mat]> = s.iter().map(|&i| frame[i]).collect();
                    let fr: Vec<&[Mat]> = r.iter().map(|&i| frame[i]).collect();
                    let x = a.value(point, &fs);
                    let y = b.value(point, &fr);
                    acc += sign * trace_product(&x, &y);
                }
                c * acc
            }
            FormNode::Wedge(a, b) => {
                let (p, q) = (a.degree, b.degree);
                let mut acc = 0.0;
                for (s, r, sign) in shuffles(p, q) {
                    let fs: Vec<&[Mat]> = s.iter().map(|&i| frame[i]).collect();
                    let fr: Vec<&[Mat]> = r.iter().map(|&i| frame[i]).collect();
                    acc += sign * a.value(point, &fs) * b.value(point, &fr);
                }
                acc
            }
            FormNode::Sum(ts) => ts.iter().map(|t| t.value(point, frame)).sum(),
            FormNode::Scale(s, t) => s * t.value(point, frame),
            FormNode::Pullback(map, t) => {
                let (p, f) = pull(map, point, frame);
                let refs: Vec<&[Mat]> = f.iter().map(|v| v.as_slice()).collect();
                t.value(&p, &refs)
            }
            FormNode::ExtD(t, cfg) => fd_exterior(point, frame, *cfg, |p, f| t.value(p, f)),
            FormNode::Monopole { slot, charge } => {
                let g = &point[*slot];
                let x = g.coordinates();
                let v = translation_part(&frame[0][*slot]);
                let w = translation_part(&frame[1][*slot]);
                let det = x[0] * (v[1] * w[2] - v[2] * w[1]) - x[1] * (v[0] * w[2] - v[2] * w[0])
                    + x[2] * (v[0] * w[1] - v[1] * w[0]);
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                charge / (4.0 * std::f64::consts::PI) * det / (r * r * r)
            }
            FormNode::Custom2(f) => f.eval(point, frame[0], frame[1]),
        }
    }
}

fn translation_part(v: &Mat) -> Vec<f64> {
    let d = v.nrows() - 1;
    (0..d).map(|i| v[(i, d)].re).collect()
}

/// Component of a left-trivialized tangent in the coordinate coframe.
pub fn coordinate_component(tag: GroupTag, x: &Mat, index: usize) -> f64 {
    match tag {
        GroupTag::VectorGroupRd => x[(index, x.nrows() - 1)].re,
        GroupTag::UnitaryN => x[(index, index)].im,
        // tr(τ_a τ_b) = −δ_ab / 2
        GroupTag::SU2 => -2.0 * trace_product(&super::group::su2_basis()[index], x),
    }
}

/// Re tr(XY) without forming the product.
pub fn trace_product(x: &Mat, y: &Mat) -> f64 {
    let n = x.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (x[(i, j)] * y[(j, i)]).re;
        }
    }
    acc
}

fn check_shape(arity: usize, degree: usize, point: &[GroupElement], frame: &[&[Mat]]) -> Result<(), LieError> {
    if point.len() != arity {
        return Err(LieError::Arity(format!("point has {} factors, form arity {arity}", point.len())));
    }
    if frame.len() != degree {
        return Err(LieError::Degree(format!("frame has {} vectors, form degree {degree}", frame.len())));
    }
    for t in frame {
        if t.len() != arity {
            return Err(LieError::Arity("tangent tuple length differs from arity".into()));
        }
        for (g, v) in point.iter().zip(t.iter()) {
            if v.nrows() != g.size() || v.ncols() != g.size() {
                return Err(LieError::Arity("tangent matrix size differs from factor".into()));
            }
        }
    }
    Ok(())
}

fn pull(map: &IndexMap, point: &[GroupElement], frame: &[&[Mat]]) -> (Vec<GroupElement>, Vec<Vec<Mat>>) {
    let p = map.apply(point);
    let f = frame.iter().map(|t| map.push_tangent(point, t)).collect();
    (p, f)
}

/// (p,q)-shuffles of {0..p+q}: (first p slots, last q slots, sign).
pub fn shuffles(p: usize, q: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let n = p + q;
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(p);
    fn rec(start: usize, n: usize, p: usize, chosen: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, Vec<usize>, f64)>) {
        if chosen.len() == p {
            let rest: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            // sign of the permutation (chosen ++ rest): count inversions
            let mut inv = 0;
            for (k, &c) in chosen.iter().enumerate() {
                inv += c - k;
            }
            let sign = if inv % 2 == 0 { 1.0 } else { -1.0 };
            out.push((chosen.clone(), rest, sign));
            return;
        }
        for i in start..n {
            chosen.push(i);
            rec(i + 1, n, p, chosen, out);
            chosen.pop();
        }
    }
    rec(0, n, p, &mut chosen, &mut out);
    out
}

trait Linear: Sized {
    fn combine(terms: Vec<(f64, Self)>) -> Self;
}

impl Linear for f64 {
    fn combine(terms: Vec<(f64, Self)>) -> Self {
        terms.into_iter().map(|(c, x)| c * x).sum()
    }
}

impl Linear for Mat {
    fn combine(terms: Vec<(f64, Self)>) -> Self {
        let mut it = terms.into_iter();
        let (c0, x0) = it.next().expect("nonempty");
        let mut acc = x0 * c64(c0, 0.0);
        for (c, x) in it {
            acc += x * c64(c, 0.0);
        }
        acc
    }
}

/// dexp_x(X) = Σ (−1)^n/(n+1)! ad_x^n X, truncated for the small x used here.
fn dexp(x: &Mat, y: &Mat) -> Mat {
    let mut out = y.clone();
    let mut term = y.clone();
    let mut fact = 1.0;
    for n in 1..6 {
        term = x * &term - &term * x;
        fact *= (n + 1) as f64;
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        out += &term * c64(s / fact, 0.0);
    }
    out
}

fn fd_once<T: Linear>(
    point: &[GroupElement],
    coords: &[Vec<Mat>],
    h: f64,
    f: &impl Fn(&[GroupElement], &[&[Mat]]) -> T,
) -> T {
    let k1 = coords.len();
    let mut terms = Vec::with_capacity(2 * k1);
    for i in 0..k1 {
        for sg in [1.0, -1.0] {
            let t = sg * h;
            let shifted: Vec<Mat> = coords[i].iter().map(|x| x * c64(t, 0.0)).collect();
            let p: Vec<GroupElement> = point
                .iter()
                .zip(&shifted)
                .map(|(g, x)| g.mul(&GroupElement::exp(g.tag(), x)))
                .collect();
            let fields: Vec<Vec<Mat>> = (0..k1)
                .filter(|&j| j != i)
                .map(|j| {
                    p.iter()
                        .zip(&shifted)
                        .zip(&coords[j])
                        .map(|((g, x), y)| match g.tag() {
                            GroupTag::VectorGroupRd => g.matrix() * y,
                            _ => g.matrix() * dexp(x, y),
                        })
                        .collect()
                })
                .collect();
            let refs: Vec<&[Mat]> = fields.iter().map(|v| v.as_slice()).collect();
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            terms.push((sign * sg / (2.0 * h), f(&p, &refs)));
        }
    }
    T::combine(terms)
}

/// Central-difference exterior derivative with coordinate-constant extensions
/// of the frame in the chart x ↦ g·exp(x), so the bracket terms vanish.
fn fd_exterior<T: Linear>(
    point: &[GroupElement],
    frame: &[&[Mat]],
    cfg: FdConfig,
    f: impl Fn(&[GroupElement], &[&[Mat]]) -> T,
) -> T {
    let coords: Vec<Vec<Mat>> = frame
        .iter()
        .map(|t| point.iter().zip(t.iter()).map(|(g, v)| g.inverse().matrix() * v).collect())
        .collect();
    if cfg.richardson {
        let coarse = fd_once(point, &coords, cfg.step, &f);
        let fine = fd_once(point, &coords, cfg.step / 2.0, &f);
        T::combine(vec![(4.0 / 3.0, fine), (-1.0 / 3.0, coarse)])
    } else {
        fd_once(point, &coords, cfg.step, &f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_signs() {
        let s = shuffles(1, 2);
        assert_eq!(s.len(), 3);
        assert_eq!(s[0], (vec![0], vec![1, 2], 1.0));
        assert_eq!(s[1], (vec![1], vec![0, 2], -1.0));
        assert_eq!(s[2], (vec![2], vec![0, 1], 1.0));
        assert_eq!(shuffles(2, 2).len(), 6);
        let total: f64 = shuffles(2, 1).iter().map(|x| x.2).sum();
        assert_eq!(total, 1.0);
    }
}
