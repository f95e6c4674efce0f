use serde::{Deserialize, Serialize};

use super::WzwError;
use crate::lie::{c64, Form, GroupElement, GroupTag};
use crate::mesh::{
    integrate_pullback, interval_loop_mesh, sort_with_sign, GroupMesh, QuadratureRule, SimplicialMesh,
};

/// Loops γ_{t₀ + jh}, j = −m..m, on one loop mesh in R³ (translation group).
#[derive(Clone, Debug)]
pub struct LoopStack {
    pub step: f64,
    pub loops: Vec<GroupMesh>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyDerivativeReport {
    /// d/dt ∫_{cap_t} F by central differences; the log-holonomy in units of 2πi.
    pub fd_derivative: f64,
    /// ∫_{S¹} F(∂_tγ, ∂_sγ) ds.
    pub fiber_integral: f64,
    pub defect: f64,
}

const NORTH: [f64; 3] = [0.0, 0.0, 1.0];

impl LoopStack {
    /// Central-difference weights for 3 or 5 loops.
    fn stencil(&self) -> Result<Vec<f64>, WzwError> {
        let h = self.step;
        match self.loops.len() {
            3 => Ok(vec![-0.5 / h, 0.0, 0.5 / h]),
            5 => Ok(vec![1.0 / (12.0 * h), -8.0 / (12.0 * h), 0.0, 8.0 / (12.0 * h), -1.0 / (12.0 * h)]),
            n => Err(WzwError::Invalid(format!("stack of {n} loops; use 3 or 5"))),
        }
    }

    /// Latitude circles at polar angles θ₀ + jh, counterclockwise about +z.
    pub fn latitude(n: usize, theta0: f64, step: f64, points: usize) -> LoopStack {
        let m = (points / 2) as i64;
        let loops = (-m..=m).map(|j| latitude_loop(n, theta0 + j as f64 * step)).collect();
        LoopStack { step, loops }
    }

    /// The same loop repeated: a stationary family.
    pub fn stationary(l: GroupMesh, step: f64) -> LoopStack {
        LoopStack { step, loops: vec![l; 3] }
    }
}

/// Latitude circle on the unit sphere at polar angle θ.
pub fn latitude_loop(n: usize, theta: f64) -> GroupMesh {
    let m = interval_loop_mesh(n);
    let values = m
        .positions
        .iter()
        .map(|p| vec![GroupElement::translation(&[theta.sin() * p[0], theta.sin() * p[1], theta.cos()])])
        .collect();
    GroupMesh::new(m.mesh, values).expect("one value per vertex")
}

fn norm3(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Spherical interpolation from the north pole to the direction of x, with
/// the radius moving linearly from 1 to |x|.
fn ruled(x: &[f64], r: f64) -> Result<Vec<f64>, WzwError> {
    let len = norm3(x);
    if len < 1e-9 {
        return Err(WzwError::Cap("loop passes through the origin".into()));
    }
    let u: Vec<f64> = x.iter().map(|v| v / len).collect();
    let c = (u[2]).clamp(-1.0, 1.0);
    if c < -1.0 + 1e-9 {
        return Err(WzwError::Cap("loop passes through the excluded pole".into()));
    }
    let omega = c.acos();
    let radius = 1.0 - r + r * len;
    if omega < 1e-12 {
        return Ok(u.iter().map(|v| radius * v).collect());
    }
    let (a, b) = (((1.0 - r) * omega).sin() / omega.sin(), (r * omega).sin() / omega.sin());
    Ok((0..3).map(|i| radius * (a * NORTH[i] + b * u[i])).collect())
}

/// Disc map ruled from the north pole to the loop, with boundary the loop.
pub fn cap_mesh(l: &GroupMesh, layers: usize) -> Result<GroupMesh, WzwError> {
    if l.mesh.dim != 1 || l.arity() != 1 || l.values.iter().any(|v| v[0].tag() != GroupTag::VectorGroupRd) {
        return Err(WzwError::Invalid("loop must be an R³-valued 1-mesh".into()));
    }
    if layers == 0 {
        return Err(WzwError::Invalid("at least one layer".into()));
    }
    let n = l.mesh.n_vertices;
    let pos: Vec<Vec<f64>> = l.values.iter().map(|v| v[0].coordinates()).collect();
    if pos.iter().any(|p| p.len() != 3) {
        return Err(WzwError::Invalid("loop must lie in R³".into()));
    }
    // vertex 0 is the pole; layer j ∈ 1..=L vertex v is (j−1)·n + v + 1
    let id = |j: usize, v: usize| if j == 0 { 0 } else { (j - 1) * n + v + 1 };
    let mut values = vec![vec![GroupElement::translation(&NORTH)]];
    for j in 1..=layers {
        let r = j as f64 / layers as f64;
        for p in &pos {
            let x = if j == layers { p.clone() } else { ruled(p, r)? };
            values.push(vec![GroupElement::translation(&x)]);
        }
    }
    for p in &pos {
        ruled(p, 0.5)?;
    }
    let mut simplices = Vec::new();
    let mut signs = Vec::new();
    let mut push = |t: [usize; 3], g: i64| {
        let (s, ps) = sort_with_sign(&t);
        simplices.push(s);
        signs.push((ps * g) as i8);
    };
    for (e, &g) in l.mesh.simplices.iter().zip(&l.mesh.signs) {
        let (a, b) = (e[0], e[1]);
        let g = g as i64;
        push([id(0, a), id(1, a), id(1, b)], g);
        for j in 1..layers {
            push([id(j, a), id(j + 1, a), id(j + 1, b)], g);
            push([id(j, a), id(j + 1, b), id(j, b)], g);
        }
    }
    let mesh = SimplicialMesh::new(2, 1 + layers * n, simplices, signs)?;
    Ok(GroupMesh::new(mesh, values)?.with_interpolation(l.interpolation))
}

/// ∫_{cap} F, the log-holonomy of the loop in units of 2πi.
pub fn flux_through_cap(f: &Form, l: &GroupMesh, layers: usize) -> Result<f64, WzwError> {
    let cap = cap_mesh(l, layers)?;
    Ok(integrate_pullback(f, &cap, &QuadratureRule::default_for(2))?)
}

/// Compares d/dt log Hol(γ_t) with ∫_{S¹} ev*F contracted with ∂_tγ.
pub fn lemma6_check(f: &Form, stack: &LoopStack, cap_layers: usize) -> Result<HolonomyDerivativeReport, WzwError> {
    if f.degree() != 2 || f.arity() != 1 {
        return Err(WzwError::Invalid("F must be a 2-form on one factor".into()));
    }
    let w = stack.stencil()?;
    let mid = &stack.loops[stack.loops.len() / 2];
    if stack.loops.iter().any(|l| l.mesh != mid.mesh) {
        return Err(WzwError::MeshMismatch("loops must share one loop mesh".into()));
    }
    let mut fd = 0.0;
    for (wi, l) in w.iter().zip(&stack.loops) {
        if *wi != 0.0 {
            fd += wi * flux_through_cap(f, l, cap_layers)?;
        }
    }
    let rule = QuadratureRule::segment_gauss(6);
    let mut terms = Vec::new();
    for s in 0..mid.mesh.len() {
        let interps: Vec<_> = stack.loops.iter().map(|l| l.interp(s)).collect();
        let im = mid.interp(s);
        for (p, wq) in rule.points.iter().zip(&rule.weights) {
            let lam = &p[1..];
            let pt = im.point(lam);
            let ds = im.frame(lam).remove(0);
            let mut dt = crate::lie::Mat::zeros(4, 4);
            for (wi, ip) in w.iter().zip(&interps) {
                if *wi != 0.0 {
                    dt += ip.point(lam)[0].matrix() * c64(*wi, 0.0);
                }
            }
            let v = f.value(&pt, &[std::slice::from_ref(&dt), ds.as_slice()]);
            terms.push(mid.mesh.signs[s] as f64 * wq * v);
        }
    }
    let fiber = crate::mesh::pairwise_sum(&terms);
    Ok(HolonomyDerivativeReport { fd_derivative: fd, fiber_integral: fiber, defect: (fd - fiber).abs() })
}
