use std::collections::HashMap;

use super::{sort_with_sign, GroupMesh, SimplicialMesh};
use crate::lie::GroupElement;

/// A simplicial mesh with vertex positions in some R^d.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedMesh {
    pub mesh: SimplicialMesh,
    pub positions: Vec<Vec<f64>>,
}

fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    d
}

/// Orientation of (p₀, …, p_k) relative to the outward radial direction:
/// sign det[p₀, p₁ − p₀, …, p_k − p₀].
fn radial_sign(ps: &[&Vec<f64>]) -> i64 {
    let mut rows = vec![ps[0].clone()];
    for p in &ps[1..] {
        rows.push(p.iter().zip(ps[0].iter()).map(|(a, b)| a - b).collect());
    }
    let d = det(&rows);
    assert!(d != 0.0, "degenerate simplex");
    if d > 0.0 {
        1
    } else {
        -1
    }
}

/// Orientation of a full-dimensional simplex in R^d.
fn volume_sign(ps: &[&Vec<f64>]) -> i64 {
    let rows: Vec<Vec<f64>> = ps[1..].iter().map(|p| p.iter().zip(ps[0].iter()).map(|(a, b)| a - b).collect()).collect();
    let d = det(&rows);
    assert!(d != 0.0, "degenerate simplex");
    if d > 0.0 {
        1
    } else {
        -1
    }
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Kuhn simplices of the unit cube in dimension d: one per axis permutation.
fn kuhn_paths(d: usize) -> Vec<Vec<usize>> {
    fn perms(items: Vec<usize>) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.clone();
            let x = rest.remove(i);
            for mut p in perms(rest) {
                p.insert(0, x);
                out.push(p);
            }
        }
        out
    }
    perms((0..d).collect())
}

struct Builder<K: std::hash::Hash + Eq> {
    ids: HashMap<K, usize>,
    positions: Vec<Vec<f64>>,
    simplices: Vec<Vec<usize>>,
    signs: Vec<i8>,
}

impl<K: std::hash::Hash + Eq> Builder<K> {
    fn new() -> Self {
        Builder { ids: HashMap::new(), positions: Vec::new(), simplices: Vec::new(), signs: Vec::new() }
    }

    fn vertex(&mut self, key: K, pos: impl FnOnce() -> Vec<f64>) -> usize {
        let n = self.ids.len();
        *self.ids.entry(key).or_insert_with(|| {
            self.positions.push(pos());
            n
        })
    }

    /// Stores the simplex in sorted order with sign = orientation × parity.
    fn push(&mut self, vs: Vec<usize>, orientation: i64) {
        let (sorted, ps) = sort_with_sign(&vs);
        self.simplices.push(sorted);
        self.signs.push((orientation * ps) as i8);
    }

    fn finish(self, dim: usize) -> EmbeddedMesh {
        let n = self.positions.len();
        EmbeddedMesh {
            mesh: SimplicialMesh::new(dim, n, self.simplices, self.signs).expect("builder output is well formed"),
            positions: self.positions,
        }
    }
}

/// S³ as the radially projected boundary of the 4-cube, n³ cubes per facet,
/// six tetrahedra per cube, oriented as the boundary of the unit ball.
pub fn s3_mesh(n: usize) -> EmbeddedMesh {
    assert!(n >= 1);
    let mut b: Builder<[usize; 4]> = Builder::new();
    let pos = |k: [usize; 4]| -> Vec<f64> { k.iter().map(|&c| 2.0 * c as f64 / n as f64 - 1.0).collect() };
    let paths = kuhn_paths(3);
    for axis in 0..4 {
        let others: Vec<usize> = (0..4).filter(|&a| a != axis).collect();
        for side in [0, n] {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for path in &paths {
                            let mut key = [0usize; 4];
                            key[axis] = side;
                            key[others[0]] = i;
                            key[others[1]] = j;
                            key[others[2]] = k;
                            let mut keys = vec![key];
                            for &step in path {
                                let mut nk = *keys.last().unwrap();
                                nk[others[step]] += 1;
                                keys.push(nk);
                            }
                            let raw: Vec<Vec<f64>> = keys.iter().map(|&k| pos(k)).collect();
                            let refs: Vec<&Vec<f64>> = raw.iter().collect();
                            let o = radial_sign(&refs);
                            let vs: Vec<usize> = keys.iter().map(|&k| b.vertex(k, || normalize(&pos(k)))).collect();
                            b.push(vs, o);
                        }
                    }
                }
            }
        }
    }
    b.finish(3)
}

/// Identity map of S³ ≅ SU(2) via unit quaternions.
pub fn s3_identity_map(n: usize) -> GroupMesh {
    let m = s3_mesh(n);
    let values = m
        .positions
        .iter()
        .map(|p| vec![GroupElement::su2_from_quaternion([p[0], p[1], p[2], p[3]])])
        .collect();
    GroupMesh::new(m.mesh, values).expect("one value per vertex")
}

fn octa_faces(north_only: bool) -> Vec<[[i64; 3]; 3]> {
    let mut out = Vec::new();
    for sx in [1i64, -1] {
        for sy in [1i64, -1] {
            for sz in [1i64, -1] {
                if north_only && sz < 0 {
                    continue;
                }
                out.push([[sx, 0, 0], [0, sy, 0], [0, 0, sz]]);
            }
        }
    }
    out
}

fn octa_mesh(n: usize, north_only: bool) -> EmbeddedMesh {
    assert!(n >= 1);
    let ni = n as i64;
    let mut b: Builder<[i64; 3]> = Builder::new();
    for [a, bb, c] in octa_faces(north_only) {
        let key = |i: i64, j: i64| -> [i64; 3] {
            std::array::from_fn(|t| (ni - i - j) * a[t] + i * bb[t] + j * c[t])
        };
        let tri = |p: [i64; 3], q: [i64; 3], r: [i64; 3], b: &mut Builder<[i64; 3]>| {
            let raw: Vec<Vec<f64>> = [p, q, r].iter().map(|k| k.iter().map(|&x| x as f64).collect()).collect();
            let refs: Vec<&Vec<f64>> = raw.iter().collect();
            let o = radial_sign(&refs);
            let vs: Vec<usize> = [p, q, r]
                .iter()
                .map(|&k| b.vertex(k, || normalize(&k.iter().map(|&x| x as f64).collect::<Vec<_>>())))
                .collect();
            b.push(vs, o);
        };
        for i in 0..ni {
            for j in 0..(ni - i) {
                tri(key(i, j), key(i + 1, j), key(i, j + 1), &mut b);
                if i + j + 2 <= ni {
                    tri(key(i + 1, j), key(i + 1, j + 1), key(i, j + 1), &mut b);
                }
            }
        }
    }
    b.finish(2)
}

/// Unit sphere S² from the subdivided octahedron (8n² triangles), outward oriented.
pub fn s2_mesh(n: usize) -> EmbeddedMesh {
    octa_mesh(n, false)
}

/// Closed northern hemisphere of `s2_mesh(n)`, oriented by the outward normal
/// (counterclockwise seen from above); the boundary is the equator.
pub fn disc_mesh(n: usize) -> EmbeddedMesh {
    octa_mesh(n, true)
}

/// Closed polygon with n vertices on the unit circle, traversed counterclockwise.
pub fn interval_loop_mesh(n: usize) -> EmbeddedMesh {
    assert!(n >= 3);
    let positions = (0..n)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let mut simplices = Vec::new();
    let mut signs = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        let (s, ps) = sort_with_sign(&[i, j]);
        simplices.push(s);
        signs.push(ps as i8);
    }
    EmbeddedMesh { mesh: SimplicialMesh::new(1, n, simplices, signs).unwrap(), positions }
}

/// The cube [−1, 1]⁴ with n⁴ subcubes, 24 Kuhn simplices each, standard orientation.
pub fn cube4_mesh(n: usize) -> EmbeddedMesh {
    let mut b: Builder<[usize; 4]> = Builder::new();
    let pos = |k: [usize; 4]| -> Vec<f64> { k.iter().map(|&c| 2.0 * c as f64 / n as f64 - 1.0).collect() };
    let paths = kuhn_paths(4);
    for idx in 0..n.pow(4) {
        let base = [idx % n, (idx / n) % n, (idx / n / n) % n, idx / n / n / n];
        for path in &paths {
            let mut keys = vec![base];
            for &step in path {
                let mut nk = *keys.last().unwrap();
                nk[step] += 1;
                keys.push(nk);
            }
            let raw: Vec<Vec<f64>> = keys.iter().map(|&k| pos(k)).collect();
            let refs: Vec<&Vec<f64>> = raw.iter().collect();
            let o = volume_sign(&refs);
            let vs: Vec<usize> = keys.iter().map(|&k| b.vertex(k, || pos(k))).collect();
            b.push(vs, o);
        }
    }
    b.finish(4)
}

/// Flat 3-torus (R/2πZ)³ with n³ periodic cubes; positions are the angles.
pub fn torus3_mesh(n: usize) -> EmbeddedMesh {
    assert!(n >= 3);
    let mut b: Builder<[usize; 3]> = Builder::new();
    let paths = kuhn_paths(3);
    let angle = |k: [usize; 3]| -> Vec<f64> {
        k.iter().map(|&c| 2.0 * std::f64::consts::PI * c as f64 / n as f64).collect()
    };
    for idx in 0..n.pow(3) {
        let base = [idx % n, (idx / n) % n, idx / n / n];
        for path in &paths {
            let mut keys = vec![base];
            for &step in path {
                let mut nk = *keys.last().unwrap();
                nk[step] += 1;
                keys.push(nk);
            }
            let raw: Vec<Vec<f64>> = keys.iter().map(|&k| k.iter().map(|&c| c as f64).collect()).collect();
            let refs: Vec<&Vec<f64>> = raw.iter().collect();
            let o = volume_sign(&refs);
            let vs: Vec<usize> = keys
                .iter()
                .map(|&k| {
                    let w = [k[0] % n, k[1] % n, k[2] % n];
                    b.vertex(w, || angle(w))
                })
                .collect();
            b.push(vs, o);
        }
    }
    b.finish(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_meshes_are_closed_and_consistent() {
        for n in 1..4 {
            let s2 = s2_mesh(n);
            assert_eq!(s2.mesh.len(), 8 * n * n);
            assert!(s2.mesh.is_closed());
            assert!(s2.mesh.orientation_consistent());
            let s3 = s3_mesh(n);
            assert_eq!(s3.mesh.len(), 48 * n * n * n);
            assert!(s3.mesh.is_closed());
            assert!(s3.mesh.orientation_consistent());
        }
        let t = torus3_mesh(3);
        assert!(t.mesh.is_closed());
        assert!(t.mesh.orientation_consistent());
    }

    #[test]
    fn disc_boundary_is_equator() {
        let d = disc_mesh(4);
        let b = d.mesh.boundary_mesh();
        assert_eq!(b.len(), 16);
        for s in &b.simplices {
            for &v in s {
                assert!(d.positions[v][2].abs() < 1e-15);
            }
        }
        assert!(b.is_closed());
    }

    #[test]
    fn loop_is_closed() {
        assert!(interval_loop_mesh(7).mesh.is_closed());
    }

    #[test]
    fn cube_boundary_is_closed_three_sphere() {
        let c = cube4_mesh(2);
        assert_eq!(c.mesh.len(), 24 * 16);
        let b = c.mesh.boundary_mesh();
        assert!(b.is_closed());
        assert_eq!(b.len(), 8 * 8 * 6);
    }
}
