use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sort_with_sign, GroupMesh, MeshError, SimplicialMesh};
use crate::lie::{c64, GroupElement, GroupTag};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeOptions {
    pub seed: u64,
    pub candidates: usize,
    pub layers: usize,
    /// Minimal chordal distance between the avoided point and the image.
    pub min_clearance: f64,
    /// Also try the antipodes of the first vertex value and of the image mean.
    /// Turning this off makes q* depend on the seed alone.
    pub fixed_candidates: bool,
    /// Use this unit quaternion as q* instead of searching.
    pub avoid: Option<[f64; 4]>,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions { seed: 0, candidates: 256, layers: 6, min_clearance: 0.05, fixed_candidates: true, avoid: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeInfo {
    /// The avoided point q*; the cone apex is −q*.
    pub avoided: [f64; 4],
    pub clearance: f64,
}

fn chord(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn normalize4(q: [f64; 4]) -> [f64; 4] {
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    q.map(|x| x / n)
}

/// Extends a map S² → SU(2) over the 3-ball by radial contraction toward the
/// antipode of a point q* far from the image. Vertex v of the sphere becomes
/// layer vertices j·N + v with values p·exp(r_j log(p⁻¹φ(v))), r_j = 1 − j/L,
/// and the apex L·N has value p. Layer 0 carries the input values unchanged.
pub fn cone_extension(sphere_map: &GroupMesh, opts: &ConeOptions) -> Result<(GroupMesh, ConeInfo), MeshError> {
    let mesh = &sphere_map.mesh;
    if mesh.dim != 2 || !mesh.is_closed() {
        return Err(MeshError::Cone("input must be a closed 2-mesh".into()));
    }
    if sphere_map.arity() != 1 || sphere_map.values.iter().any(|v| v[0].tag() != GroupTag::SU2) {
        return Err(MeshError::Cone("input must be an SU(2)-valued map".into()));
    }
    if opts.layers == 0 {
        return Err(MeshError::Cone("at least one layer".into()));
    }
    let quats: Vec<[f64; 4]> = sphere_map.values.iter().map(|v| v[0].quaternion()).collect();
    let mut samples = quats.clone();
    for s in &mesh.simplices {
        let c = normalize4(std::array::from_fn(|t| s.iter().map(|&v| quats[v][t]).sum::<f64>()));
        samples.push(c);
        for i in 0..3 {
            let (a, b) = (s[i], s[(i + 1) % 3]);
            samples.push(normalize4(std::array::from_fn(|t| quats[a][t] + quats[b][t])));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<([f64; 4], f64)> = None;
    // Deterministic candidates first: antipodes of the first vertex value and of
    // the image mean. A constant map then cones to a constant ball map.
    let mean: [f64; 4] = std::array::from_fn(|t| quats.iter().map(|q| q[t]).sum::<f64>());
    let mut fixed = Vec::new();
    if opts.fixed_candidates {
        fixed.push(quats[0].map(|x| -x));
    }
    if opts.fixed_candidates && mean.iter().any(|x| x.abs() > 1e-9) {
        fixed.push(normalize4(mean).map(|x| -x));
    }
    if let Some(q) = opts.avoid {
        fixed = vec![normalize4(q)];
    }
    let n_random = if opts.avoid.is_some() { 0 } else { opts.candidates };
    let random = (0..n_random).map(|_| GroupElement::random(GroupTag::SU2, 2, 1.0, &mut rng).quaternion());
    for q in fixed.into_iter().chain(random) {
        let d = samples.iter().map(|s| chord(&q, s)).fold(f64::INFINITY, f64::min);
        if best.map_or(true, |(_, bd)| d > bd) {
            best = Some((q, d));
        }
    }
    let (qstar, clearance) = best.unwrap();
    if clearance < opts.min_clearance {
        return Err(MeshError::Cone(format!("best clearance {clearance:.3e}; refine or re-randomize")));
    }
    let apex = GroupElement::su2_from_quaternion(qstar.map(|x| -x));
    let apex_inv = apex.inverse();
    let n = mesh.n_vertices;
    let l = opts.layers;
    let logs: Vec<_> = sphere_map.values.iter().map(|v| apex_inv.mul(&v[0]).log()).collect();
    let mut values = Vec::with_capacity(l * n + 1);
    for j in 0..l {
        let r = 1.0 - j as f64 / l as f64;
        for v in 0..n {
            if j == 0 {
                values.push(sphere_map.values[v].clone());
            } else {
                values.push(vec![apex.mul(&GroupElement::exp(GroupTag::SU2, &(&logs[v] * c64(r, 0.0))))]);
            }
        }
    }
    values.push(vec![apex.clone()]);
    let apex_id = l * n;
    let mut simplices = Vec::new();
    let mut signs = Vec::new();
    for (s, &g) in mesh.simplices.iter().zip(&mesh.signs) {
        let (t, ps) = sort_with_sign(s);
        // ∂[a,b,c,x] contains −[a,b,c]; the ball's boundary must be the input.
        let sigma = (-(ps * g as i64)) as i8;
        for j in 0..l {
            let outer: Vec<usize> = t.iter().map(|&v| j * n + v).collect();
            if j + 1 == l {
                simplices.push(vec![outer[0], outer[1], outer[2], apex_id]);
                signs.push(sigma);
            } else {
                let inner: Vec<usize> = t.iter().map(|&v| (j + 1) * n + v).collect();
                simplices.push(vec![outer[0], outer[1], outer[2], inner[0]]);
                simplices.push(vec![outer[1], outer[2], inner[0], inner[1]]);
                simplices.push(vec![outer[2], inner[0], inner[1], inner[2]]);
                signs.extend([sigma; 3]);
            }
        }
    }
    let ball = SimplicialMesh::new(3, l * n + 1, simplices, signs)?;
    Ok((GroupMesh::new(ball, values)?.with_interpolation(sphere_map.interpolation), ConeInfo { avoided: qstar, clearance }))
}

/// Glues two maps on the same disc mesh along their common boundary; the
/// second disc enters with reversed orientation.
pub fn glue_sphere(d1: &GroupMesh, d2: &GroupMesh) -> Result<GroupMesh, MeshError> {
    if d1.mesh != d2.mesh || d1.mesh.dim != 2 {
        return Err(MeshError::BoundaryMismatch("discs must share one 2-mesh".into()));
    }
    let boundary = d1.mesh.boundary_mesh();
    if boundary.is_empty() {
        return Err(MeshError::BoundaryMismatch("disc has empty boundary".into()));
    }
    let n = d1.mesh.n_vertices;
    let mut on_boundary = vec![false; n];
    for s in &boundary.simplices {
        for &v in s {
            on_boundary[v] = true;
        }
    }
    for v in 0..n {
        if on_boundary[v] {
            for (a, b) in d1.values[v].iter().zip(&d2.values[v]) {
                let d = a.distance(b);
                if d > 1e-9 {
                    return Err(MeshError::BoundaryMismatch(format!("vertex {v} differs by {d:e}")));
                }
            }
        }
    }
    let mut remap = vec![0usize; n];
    let mut values = d1.values.clone();
    for v in 0..n {
        if on_boundary[v] {
            remap[v] = v;
        } else {
            remap[v] = values.len();
            values.push(d2.values[v].clone());
        }
    }
    let mut simplices = d1.mesh.simplices.clone();
    let mut signs = d1.mesh.signs.clone();
    for (s, &g) in d2.mesh.simplices.iter().zip(&d2.mesh.signs) {
        let (t, ps) = sort_with_sign(&s.iter().map(|&v| remap[v]).collect::<Vec<_>>());
        simplices.push(t);
        signs.push((-(ps * g as i64)) as i8);
    }
    let m = SimplicialMesh::new(2, values.len(), simplices, signs)?;
    Ok(GroupMesh::new(m, values)?.with_interpolation(d1.interpolation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{disc_mesh, s2_mesh};

    fn sample_sphere_map(n: usize) -> GroupMesh {
        let s = s2_mesh(n);
        let values = s
            .positions
            .iter()
            .map(|p| {
                let x = &crate::lie::su2_basis();
                let a = &x[0] * c64(0.9 * p[0], 0.0) + &x[1] * c64(0.4 * p[1] * p[2], 0.0) + &x[2] * c64(1.1 * p[2], 0.0);
                vec![GroupElement::exp(GroupTag::SU2, &a)]
            })
            .collect();
        GroupMesh::new(s.mesh, values).unwrap()
    }

    #[test]
    fn cone_boundary_is_input() {
        let m = sample_sphere_map(3);
        let (ball, _) = cone_extension(&m, &ConeOptions::default()).unwrap();
        assert!(ball.mesh.orientation_consistent());
        assert_eq!(ball.mesh.boundary_mesh().canonical_chain(), m.mesh.canonical_chain());
        for v in 0..m.mesh.n_vertices {
            assert_eq!(ball.values[v], m.values[v]);
        }
    }

    #[test]
    fn constant_map_cones_to_constant() {
        let s = s2_mesh(2);
        let g = GroupElement::su2_from_quaternion([0.6, 0.0, 0.8, 0.0]);
        let m = GroupMesh::new(s.mesh.clone(), vec![vec![g.clone()]; s.mesh.n_vertices]).unwrap();
        let (ball, _) = cone_extension(&m, &ConeOptions::default()).unwrap();
        for v in &ball.values {
            assert!(v[0].distance(&g) < 1e-14);
        }
    }

    #[test]
    fn glue_equal_discs() {
        let d = disc_mesh(3);
        let g = GroupMesh::new(
            d.mesh.clone(),
            d.positions
                .iter()
                .map(|p| vec![GroupElement::su2_from_quaternion(normalize4([1.0, p[0], p[1], p[2]]))])
                .collect(),
        )
        .unwrap();
        let s = glue_sphere(&g, &g).unwrap();
        assert!(s.mesh.is_closed());
        assert!(s.mesh.orientation_consistent());
        let mut other = g.clone();
        other.values[0] = vec![GroupElement::identity(GroupTag::SU2, 2)];
        assert!(glue_sphere(&g, &other).is_err());
    }
}
