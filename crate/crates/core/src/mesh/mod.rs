//! Oriented simplicial meshes, group-valued maps on them, and quadrature of
//! pulled-back forms.

mod builders;
mod cone;
mod io;
mod quadrature;

pub use builders::{
    cube4_mesh, disc_mesh, interval_loop_mesh, s2_mesh, s3_identity_map, s3_mesh, torus3_mesh, EmbeddedMesh,
};
pub use cone::{cone_extension, glue_sphere, ConeInfo, ConeOptions};
pub use io::{read_group_mesh, write_group_mesh, MeshFile, MESH_FORMAT, MESH_VERSION};
pub use quadrature::{gauss_legendre01, QuadratureRule};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lie::{c64, Form, GroupElement, GroupTag, LieError, Mat};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("form degree {form} does not match mesh dimension {mesh}")]
    Degree { form: usize, mesh: usize },
    #[error("form arity {form} does not match map arity {map}")]
    Arity { form: usize, map: usize },
    #[error("mesh is not closed")]
    Open,
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("cone extension failed: {0}")]
    Cone(String),
    #[error("malformed mesh: {0}")]
    Malformed(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// Oriented simplicial complex. A simplex (v₀, …, v_k) with sign s stands for
/// the chain s·[v₀, …, v_k].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialMesh {
    pub dim: usize,
    pub n_vertices: usize,
    pub simplices: Vec<Vec<usize>>,
    pub signs: Vec<i8>,
}

/// Sorts a tuple and returns the permutation parity as ±1.
pub fn sort_with_sign(v: &[usize]) -> (Vec<usize>, i64) {
    let mut s = v.to_vec();
    let mut sign = 1;
    for i in 0..s.len() {
        for j in 0..s.len() - 1 - i {
            if s[j] > s[j + 1] {
                s.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    (s, sign)
}

impl SimplicialMesh {
    pub fn new(dim: usize, n_vertices: usize, simplices: Vec<Vec<usize>>, signs: Vec<i8>) -> Result<Self, MeshError> {
        if simplices.len() != signs.len() {
            return Err(MeshError::Malformed("sign count".into()));
        }
        for s in &simplices {
            if s.len() != dim + 1 || s.iter().any(|&v| v >= n_vertices) {
                return Err(MeshError::Malformed(format!("bad simplex {s:?}")));
            }
            let (sorted, _) = sort_with_sign(s);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(MeshError::Malformed(format!("repeated vertex in {s:?}")));
            }
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(MeshError::Malformed("signs must be ±1".into()));
        }
        Ok(SimplicialMesh { dim, n_vertices, simplices, signs })
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Boundary chain on sorted faces, zero coefficients removed.
    pub fn boundary_chain(&self) -> BTreeMap<Vec<usize>, i64> {
        boundary_of(self.simplices.iter().zip(&self.signs).map(|(s, &g)| (s.clone(), g as i64)))
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_chain().is_empty()
    }

    /// Every face occurs in at most two simplices, with opposite induced
    /// orientations when it occurs twice.
    pub fn orientation_consistent(&self) -> bool {
        let mut count: BTreeMap<Vec<usize>, Vec<i64>> = BTreeMap::new();
        for (s, &g) in self.simplices.iter().zip(&self.signs) {
            for i in 0..s.len() {
                let mut f = s.clone();
                f.remove(i);
                let (sorted, ps) = sort_with_sign(&f);
                let c = if i % 2 == 0 { 1 } else { -1 } * ps * g as i64;
                count.entry(sorted).or_default().push(c);
            }
        }
        count.values().all(|cs| cs.len() == 1 || (cs.len() == 2 && cs[0] + cs[1] == 0))
    }

    pub fn boundary_mesh(&self) -> SimplicialMesh {
        let chain = self.boundary_chain();
        let mut simplices = Vec::new();
        let mut signs = Vec::new();
        for (f, c) in chain {
            for _ in 0..c.unsigned_abs() {
                simplices.push(f.clone());
                signs.push(c.signum() as i8);
            }
        }
        SimplicialMesh { dim: self.dim - 1, n_vertices: self.n_vertices, simplices, signs }
    }

    pub fn reversed(&self) -> SimplicialMesh {
        SimplicialMesh { signs: self.signs.iter().map(|s| -s).collect(), ..self.clone() }
    }

    /// Chain with every simplex written in sorted vertex order.
    pub fn canonical_chain(&self) -> BTreeMap<Vec<usize>, i64> {
        let mut out: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        for (s, &g) in self.simplices.iter().zip(&self.signs) {
            let (sorted, ps) = sort_with_sign(s);
            *out.entry(sorted).or_insert(0) += ps * g as i64;
        }
        out.retain(|_, c| *c != 0);
        out
    }
}

pub fn boundary_of(chain: impl Iterator<Item = (Vec<usize>, i64)>) -> BTreeMap<Vec<usize>, i64> {
    let mut out: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    for (s, g) in chain {
        if s.len() < 2 {
            continue;
        }
        for i in 0..s.len() {
            let mut f = s.clone();
            f.remove(i);
            let (sorted, ps) = sort_with_sign(&f);
            let c = if i % 2 == 0 { 1 } else { -1 } * ps * g;
            *out.entry(sorted).or_insert(0) += c;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// How a simplex is filled in from its vertex values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// g(λ) = g₀ exp(Σ λ_i log(g₀⁻¹ g_i)). Neighbouring simplices need not agree
    /// on a shared face that misses their first vertices.
    FirstVertexExponential,
    /// Linear blend of the vertex matrices projected back to the group (unit
    /// quaternion, unitary polar factor, or the affine blend for R^d). Symmetric
    /// in the vertices, so the map is continuous across faces.
    #[default]
    Projected,
}

/// A map from a simplicial mesh into G^q, given by vertex values and an
/// interpolation rule.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupMesh {
    pub mesh: SimplicialMesh,
    pub values: Vec<Vec<GroupElement>>,
    pub interpolation: Interpolation,
}

/// Barycentric step for tangent frames.
pub const FRAME_STEP: f64 = 1e-5;

pub struct SimplexInterp {
    kind: Interpolation,
    /// First-vertex values (exponential) or all vertex values (projected).
    base: Vec<GroupElement>,
    logs: Vec<Vec<Mat>>,
    corners: Vec<Vec<GroupElement>>,
}

/// Projects a small perturbation of a group element back onto the group.
fn project_to_group(m: &Mat, tag: GroupTag) -> GroupElement {
    match tag {
        GroupTag::SU2 => {
            let r = m.determinant().norm().sqrt();
            let q = [
                0.5 * (m[(0, 0)].re + m[(1, 1)].re) / r,
                0.5 * (m[(0, 0)].im - m[(1, 1)].im) / r,
                0.5 * (m[(0, 1)].re - m[(1, 0)].re) / r,
                0.5 * (m[(0, 1)].im + m[(1, 0)].im) / r,
            ];
            GroupElement::su2_from_quaternion(q)
        }
        GroupTag::VectorGroupRd => GroupElement::from_raw(m.clone(), tag),
        GroupTag::UnitaryN => {
            let n = m.nrows();
            let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].norm() == 0.0));
            if diagonal {
                let mut u = Mat::zeros(n, n);
                for i in 0..n {
                    u[(i, i)] = m[(i, i)] / m[(i, i)].norm();
                }
                GroupElement::from_raw(u, tag)
            } else {
                let svd = m.clone().svd(true, true);
                let u = svd.u.expect("u requested") * svd.v_t.expect("v_t requested");
                GroupElement::from_raw(u, tag)
            }
        }
    }
}

impl SimplexInterp {
    /// Point at barycentric coordinates (λ₁, …, λ_k).
    pub fn point(&self, lam: &[f64]) -> Vec<GroupElement> {
        match self.kind {
            Interpolation::FirstVertexExponential => self
                .base
                .iter()
                .enumerate()
                .map(|(f, g0)| {
                    let mut x = Mat::zeros(g0.size(), g0.size());
                    for (i, l) in lam.iter().enumerate() {
                        x += &self.logs[i][f] * c64(*l, 0.0);
                    }
                    g0.mul(&GroupElement::exp(g0.tag(), &x))
                })
                .collect(),
            Interpolation::Projected => {
                let l0 = 1.0 - lam.iter().sum::<f64>();
                (0..self.corners[0].len())
                    .map(|f| {
                        let g0 = &self.corners[0][f];
                        let mut m = g0.matrix() * c64(l0, 0.0);
                        for (i, l) in lam.iter().enumerate() {
                            m += self.corners[i + 1][f].matrix() * c64(*l, 0.0);
                        }
                        project_to_group(&m, g0.tag())
                    })
                    .collect()
            }
        }
    }

    /// Central-difference tangent frame ∂/∂λ_i, i = 1..k.
    pub fn frame(&self, lam: &[f64]) -> Vec<Vec<Mat>> {
        let k = lam.len();
        (0..k)
            .map(|i| {
                let mut lp = lam.to_vec();
                let mut lm = lam.to_vec();
                lp[i] += FRAME_STEP;
                lm[i] -= FRAME_STEP;
                let a = self.point(&lp);
                let b = self.point(&lm);
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| (x.matrix() - y.matrix()) * c64(0.5 / FRAME_STEP, 0.0))
                    .collect()
            })
            .collect()
    }
}

impl GroupMesh {
    pub fn new(mesh: SimplicialMesh, values: Vec<Vec<GroupElement>>) -> Result<Self, MeshError> {
        if values.len() != mesh.n_vertices {
            return Err(MeshError::Malformed("one value tuple per vertex".into()));
        }
        let arity = values.first().map(|v| v.len()).unwrap_or(0);
        if values.iter().any(|v| v.len() != arity) {
            return Err(MeshError::Malformed("ragged value tuples".into()));
        }
        Ok(GroupMesh { mesh, values, interpolation: Interpolation::default() })
    }

    pub fn with_interpolation(self, interpolation: Interpolation) -> GroupMesh {
        GroupMesh { interpolation, ..self }
    }

    pub fn arity(&self) -> usize {
        self.values.first().map(|v| v.len()).unwrap_or(0)
    }

    pub fn interp(&self, simplex: usize) -> SimplexInterp {
        let s = &self.mesh.simplices[simplex];
        match self.interpolation {
            Interpolation::FirstVertexExponential => {
                let base = self.values[s[0]].clone();
                let inv: Vec<GroupElement> = base.iter().map(|g| g.inverse()).collect();
                let logs = s[1..]
                    .iter()
                    .map(|&v| self.values[v].iter().zip(&inv).map(|(g, gi)| gi.mul(g).log()).collect())
                    .collect();
                SimplexInterp { kind: self.interpolation, base, logs, corners: Vec::new() }
            }
            Interpolation::Projected => SimplexInterp {
                kind: self.interpolation,
                base: Vec::new(),
                logs: Vec::new(),
                corners: s.iter().map(|&v| self.values[v].clone()).collect(),
            },
        }
    }

    /// Pointwise product of maps with one factor each, giving a map of arity 2.
    pub fn pair_with(&self, other: &GroupMesh) -> Result<GroupMesh, MeshError> {
        if self.mesh != other.mesh {
            return Err(MeshError::Malformed("different meshes".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().chain(b.iter()).cloned().collect())
            .collect();
        Ok(GroupMesh { mesh: self.mesh.clone(), values, interpolation: self.interpolation })
    }

    pub fn map_values(&self, f: impl Fn(&[GroupElement]) -> Vec<GroupElement>) -> GroupMesh {
        GroupMesh { values: self.values.iter().map(|v| f(v)).collect(), ..self.clone() }
    }

    pub fn reversed(&self) -> GroupMesh {
        GroupMesh { mesh: self.mesh.reversed(), ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationReport {
    pub value: f64,
    /// Simplices whose interpolated frame vanished at every node.
    pub zero_frame_simplices: usize,
}

/// Deterministic fixed-tree pairwise sum.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// ∫ over the mesh of the pullback of `f` along the interpolated map.
pub fn integrate_pullback(f: &Form, map: &GroupMesh, rule: &QuadratureRule) -> Result<f64, MeshError> {
    Ok(integrate_pullback_report(f, map, rule)?.value)
}

pub fn integrate_pullback_report(
    f: &Form,
    map: &GroupMesh,
    rule: &QuadratureRule,
) -> Result<IntegrationReport, MeshError> {
    if f.degree() != map.mesh.dim || rule.dim != map.mesh.dim {
        return Err(MeshError::Degree { form: f.degree(), mesh: map.mesh.dim });
    }
    if f.arity() != map.arity() {
        return Err(MeshError::Arity { form: f.arity(), map: map.arity() });
    }
    let per: Vec<(f64, bool)> = (0..map.mesh.len())
        .into_par_iter()
        .map(|s| {
            let ip = map.interp(s);
            let mut vals = Vec::with_capacity(rule.weights.len());
            let mut any_frame = false;
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let lam = &p[1..];
                let pt = ip.point(lam);
                let fr = ip.frame(lam);
                if fr.iter().any(|t| t.iter().any(|m| crate::lie::max_abs(m) > 1e-14)) {
                    any_frame = true;
                }
                let refs: Vec<&[Mat]> = fr.iter().map(|v| v.as_slice()).collect();
                vals.push(w * f.value(&pt, &refs));
            }
            (map.mesh.signs[s] as f64 * pairwise_sum(&vals), any_frame)
        })
        .collect();
    let values: Vec<f64> = per.iter().map(|p| p.0).collect();
    Ok(IntegrationReport {
        value: pairwise_sum(&values),
        zero_frame_simplices: per.iter().filter(|p| !p.1).count(),
    })
}
