use rand::Rng;
use rand_distr::StandardNormal;

use crate::lie::{c64, su2_basis, GroupElement, GroupTag, Mat};
use crate::mesh::{disc_mesh, s2_mesh, EmbeddedMesh, GroupMesh};

/// x ↦ (cos α, sin α·x) on the unit sphere, as unit quaternions.
pub fn latitude_sphere(n: usize, alpha: f64) -> GroupMesh {
    let s = s2_mesh(n);
    let (c, si) = (alpha.cos(), alpha.sin());
    let values = s
        .positions
        .iter()
        .map(|p| vec![GroupElement::su2_from_quaternion([c, si * p[0], si * p[1], si * p[2]])])
        .collect();
    GroupMesh::new(s.mesh, values).expect("one value per vertex")
}

/// Level-1 Wess–Zumino value of the latitude sphere extended over the cap
/// containing the identity: the normalized volume (α − sin α cos α)/π.
pub fn latitude_wz_value(alpha: f64) -> f64 {
    (alpha - alpha.sin() * alpha.cos()) / std::f64::consts::PI
}

/// p ↦ g₀ exp(X(p)) with X a random su(2)-valued polynomial of degree ≤ 2 in
/// the embedding coordinates, of typical size `amplitude`.
pub fn smooth_field_map<R: Rng + ?Sized>(mesh: &EmbeddedMesh, amplitude: f64, rng: &mut R) -> GroupMesh {
    let d = mesh.positions.first().map(|p| p.len()).unwrap_or(0);
    let n_mono = 1 + d + d * (d + 1) / 2;
    let coeffs: Vec<[f64; 3]> = (0..n_mono)
        .map(|_| std::array::from_fn(|_| amplitude * rng.sample::<f64, _>(StandardNormal) / (n_mono as f64).sqrt()))
        .collect();
    let g0 = GroupElement::random(GroupTag::SU2, 2, 1.0, rng);
    let basis = su2_basis();
    let values = mesh
        .positions
        .iter()
        .map(|p| {
            let mut mono = Vec::with_capacity(n_mono);
            mono.push(1.0);
            mono.extend(p.iter().copied());
            for i in 0..d {
                for j in i..d {
                    mono.push(p[i] * p[j]);
                }
            }
            let mut x = Mat::zeros(2, 2);
            for (m, c) in mono.iter().zip(&coeffs) {
                for a in 0..3 {
                    x += &basis[a] * c64(m * c[a], 0.0);
                }
            }
            vec![g0.mul(&GroupElement::exp(GroupTag::SU2, &x))]
        })
        .collect();
    GroupMesh::new(mesh.mesh.clone(), values).expect("one value per vertex")
}

pub fn random_sphere_map<R: Rng + ?Sized>(n: usize, amplitude: f64, rng: &mut R) -> GroupMesh {
    smooth_field_map(&s2_mesh(n), amplitude, rng)
}

/// Arity-r map on the disc mesh, one independent smooth map per factor.
pub fn random_disc_maps<R: Rng + ?Sized>(n: usize, r: usize, amplitude: f64, rng: &mut R) -> GroupMesh {
    let d = disc_mesh(n);
    let factors: Vec<GroupMesh> = (0..r).map(|_| smooth_field_map(&d, amplitude, rng)).collect();
    let values = (0..d.mesh.n_vertices).map(|v| factors.iter().map(|f| f.values[v][0].clone()).collect()).collect();
    GroupMesh::new(d.mesh, values).expect("one value per vertex")
}
