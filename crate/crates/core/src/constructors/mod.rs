//! Parametric builders for the test surfaces and competitors.

mod glue;
mod rings;
mod torus;

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use crate::curve::Circle;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryLoop, TriMesh};
use crate::Vec3;
pub use glue::{glue_handle_into_disk, GlueHandle, GlueParams, GlueReport, StarCurve};
pub(crate) use rings::{ring_angles, MeshBuilder};
pub use torus::{
    make_clifford_torus, make_inverted_torus, make_truncated_inverted_torus, CliffordParams,
    EndGraph, InvertedTorus, InvertedTorusParams, TruncatedTorus, TruncationParams,
};

/// Unit icosphere: an icosahedron subdivided `subdivisions` times, vertices
/// projected to the sphere.
pub fn make_sphere(subdivisions: u32) -> Result<TriMesh> {
    if subdivisions > 8 {
        return Err(Error::InvalidParameter(format!(
            "sphere subdivisions must be in [0, 8], got {subdivisions}"
        )));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Vec3::from(*p).normalize())
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        for [a, b, c] in tris {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    TriMesh::new(verts, tris)
}

/// Number of rings and per-ring vertex counts for a disk-like polar mesh with
/// `n_boundary` vertices on the rim. With `n_boundary = 6K` ring `k` has `6k` vertices.
fn disk_ring_counts(n_boundary: usize) -> Vec<usize> {
    let k_rings = ((n_boundary as f64 / 6.0).round() as usize).max(1);
    (1..=k_rings)
        .map(|k| ((n_boundary * k) as f64 / k_rings as f64).round().max(3.0) as usize)
        .collect()
}

/// Polar disk built from rings around a centre vertex. `place(t, θ)` maps the
/// relative radius `t ∈ [0, 1]` and angle to a position.
fn polar_disk<F: Fn(f64, f64) -> Vec3>(n_boundary: usize, place: F) -> Result<TriMesh> {
    if n_boundary < 8 {
        return Err(Error::InvalidParameter(format!(
            "disk resolution must be at least 8, got {n_boundary}"
        )));
    }
    let counts = disk_ring_counts(n_boundary);
    let k_rings = counts.len();
    let mut b = MeshBuilder::default();
    let center = b.add(place(0.0, 0.0));
    let mut prev: Option<(Vec<usize>, Vec<f64>)> = None;
    for (k, &n) in counts.iter().enumerate() {
        let t = (k + 1) as f64 / k_rings as f64;
        let ang = ring_angles(n, 0.0);
        let ring = b.add_ring(ang.iter().map(|&th| place(t, th)));
        match &prev {
            None => b.fan(center, &ring, true),
            Some((pr, pa)) => b.stitch(pr, pa, &ring, &ang, true),
        }
        prev = Some((ring, ang));
    }
    b.build()
}

/// Planar disk bounded by `circle`, rim sampled at `n_boundary` points.
pub fn make_flat_disk(circle: &Circle, n_boundary: usize) -> Result<TriMesh> {
    let (e1, e2) = plane_basis(&circle.normal);
    polar_disk(n_boundary, |t, th| {
        circle.center + (e1 * th.cos() + e2 * th.sin()) * (circle.radius * t)
    })
}

/// The rim of [`make_flat_disk`] as a boundary loop description.
pub fn make_circle(circle: &Circle, n_boundary: usize) -> BoundaryLoop {
    let nb = n_boundary as f64;
    BoundaryLoop {
        vertex_indices: (0..n_boundary).collect(),
        length: 2.0 * nb * circle.radius * (PI / nb).sin(),
    }
}

/// Orthonormal `e1, e2` with `e1 × e2 = n`.
pub(crate) fn plane_basis(n: &Vec3) -> (Vec3, Vec3) {
    let n = n.normalize();
    let a = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (a - n * a.dot(&n)).normalize();
    (e1, n.cross(&e1))
}

/// Flat annulus in the plane z = 0 with `n_rings` radial layers.
pub fn make_annulus(r_in: f64, r_out: f64, n_angular: usize, n_rings: usize) -> Result<TriMesh> {
    if !(0.0 < r_in && r_in < r_out) || n_angular < 3 || n_rings < 1 {
        return Err(Error::InvalidParameter(format!(
            "annulus needs 0 < r_in < r_out, n_angular >= 3, n_rings >= 1 (got {r_in}, {r_out}, {n_angular}, {n_rings})"
        )));
    }
    let mut b = MeshBuilder::default();
    let mut prev: Option<(Vec<usize>, Vec<f64>)> = None;
    for j in 0..=n_rings {
        let r = r_in + (r_out - r_in) * j as f64 / n_rings as f64;
        let ang = ring_angles(n_angular, 0.5 * (j % 2) as f64);
        let ring = b.add_ring(ang.iter().map(|&t| Vec3::new(r * t.cos(), r * t.sin(), 0.0)));
        if let Some((pr, pa)) = &prev {
            b.stitch(pr, pa, &ring, &ang, true);
        }
        prev = Some((ring, ang));
    }
    b.build()
}

/// Upper unit hemisphere over the unit circle in z = 0.
pub fn make_hemisphere(n_boundary: usize) -> Result<TriMesh> {
    if n_boundary < 8 {
        return Err(Error::InvalidParameter(format!(
            "hemisphere resolution must be at least 8, got {n_boundary}"
        )));
    }
    let k_rings = ((n_boundary as f64 / 4.0).round() as usize).max(2);
    let mut b = MeshBuilder::default();
    let pole = b.add(Vec3::z());
    let mut prev: Option<(Vec<usize>, Vec<f64>)> = None;
    for k in 1..=k_rings {
        let phi = FRAC_PI_2 * k as f64 / k_rings as f64;
        let n = if k == k_rings {
            n_boundary
        } else {
            ((n_boundary as f64 * phi.sin()).round() as usize).max(5)
        };
        let ang = ring_angles(n, 0.0);
        let ring = b.add_ring(
            ang.iter()
                .map(|&t| Vec3::new(phi.sin() * t.cos(), phi.sin() * t.sin(), phi.cos())),
        );
        match &prev {
            None => b.fan(pole, &ring, true),
            Some((pr, pa)) => b.stitch(pr, pa, &ring, &ang, true),
        }
        prev = Some((ring, ang));
    }
    b.build()
}

/// Half-disk `{y >= 0, |p| <= radius}` in z = 0. The origin is a vertex on the
/// straight edge.
pub fn make_half_disk(radius: f64, n_arc: usize) -> Result<TriMesh> {
    if n_arc < 4 || !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "half disk needs radius > 0 and n_arc >= 4 (got {radius}, {n_arc})"
        )));
    }
    let k_rings = ((n_arc as f64 / PI).round() as usize).max(1);
    let mut b = MeshBuilder::default();
    let center = b.add(Vec3::zeros());
    let mut prev: Option<(Vec<usize>, Vec<f64>)> = None;
    for k in 1..=k_rings {
        let t = k as f64 / k_rings as f64;
        let segs = ((n_arc * k) as f64 / k_rings as f64).round().max(2.0) as usize;
        let ang: Vec<f64> = (0..=segs).map(|i| PI * i as f64 / segs as f64).collect();
        let r = radius * t;
        let ring = b.add_ring(ang.iter().map(|&a| Vec3::new(r * a.cos(), r * a.sin(), 0.0)));
        match &prev {
            None => b.fan(center, &ring, false),
            Some((pr, pa)) => b.stitch(pr, pa, &ring, &ang, false),
        }
        prev = Some((ring, ang));
    }
    b.build()
}

/// One compactly supported bump `height · (1 - (d/radius)²)³` centred at `center` in the xy-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
    pub height: f64,
}

impl Bump {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d2 = ((x - self.center[0]).powi(2) + (y - self.center[1]).powi(2)) / (self.radius * self.radius);
        if d2 >= 1.0 {
            0.0
        } else {
            self.height * (1.0 - d2).powi(3)
        }
    }
}

/// `count` random bumps supported inside the disk of radius 0.9.
pub fn random_bumps(seed: u64, count: usize, amplitude: f64) -> Vec<Bump> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let radius = rng.random_range(0.2..0.4);
            let r = rng.random_range(0.0..(0.9 - radius));
            let th = rng.random_range(0.0..(2.0 * PI));
            Bump {
                center: [r * th.cos(), r * th.sin()],
                radius,
                height: amplitude * rng.random_range(-1.0..1.0),
            }
        })
        .collect()
}

/// Unit disk displaced vertically by a sum of bumps. The rim stays on the unit circle.
pub fn make_bumpy_disk(n_boundary: usize, bumps: &[Bump]) -> Result<TriMesh> {
    polar_disk(n_boundary, |t, th| {
        let (x, y) = (t * th.cos(), t * th.sin());
        Vec3::new(x, y, bumps.iter().map(|b| b.eval(x, y)).sum())
    })
}

/// Rim resolution giving roughly `faces` triangles on a polar disk.
pub fn disk_resolution_for_faces(faces: usize) -> usize {
    ((6.0 * faces as f64).sqrt() / 6.0).round() as usize * 6
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::energies;
    use crate::mesh::{boundary_loops, topology};

    #[test]
    fn icosahedron_and_subdivisions() {
        assert_eq!(make_sphere(0).unwrap().num_faces(), 20);
        let s = make_sphere(3).unwrap();
        assert_eq!(s.num_faces(), 1280);
        assert!(s.vertices().iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
        for f in 0..s.num_faces() {
            let c: Vec3 = s.face_positions(f).iter().sum();
            assert!(s.face_normal_scaled(f).dot(&c) > 0.0, "inward face {f}");
        }
        assert!(make_sphere(9).is_err());
    }

    #[test]
    fn flat_disk_rim_and_energy() {
        for r in [1.0, 7.0] {
            let c = Circle::new(Vec3::zeros(), r);
            let d = make_flat_disk(&c, 64).unwrap();
            let loops = boundary_loops(&d);
            assert_eq!(loops[0].vertex_indices.len(), 64);
            for &v in &loops[0].vertex_indices {
                assert!(c.distance(&d.vertices()[v]) < 1e-12 * r);
            }
            let e = energies(&d).unwrap();
            assert!(e.w.abs() < 1e-20);
            assert!((e.g - 2.0 * PI).abs() < 1e-3);
        }
    }

    #[test]
    fn six_k_ring_structure() {
        assert_eq!(disk_ring_counts(48), (1..=8).map(|k| 6 * k).collect::<Vec<_>>());
        let d = make_flat_disk(&Circle::unit(), 48).unwrap();
        assert_eq!(d.num_vertices(), 1 + 6 * 8 * 9 / 2);
    }

    #[test]
    fn make_circle_matches_disk_rim() {
        let c = Circle::new(Vec3::zeros(), 2.0);
        let d = make_flat_disk(&c, 32).unwrap();
        assert!((make_circle(&c, 32).length - boundary_loops(&d)[0].length).abs() < 1e-12);
    }

    #[test]
    fn hemisphere_and_half_disk_topology() {
        let h = make_hemisphere(40).unwrap();
        let t = topology(&h).unwrap();
        assert_eq!((t.euler_characteristic, t.boundary_loop_count), (1, 1));
        let hd = make_half_disk(1.0, 40).unwrap();
        assert_eq!(topology(&hd).unwrap().euler_characteristic, 1);
        assert!(hd.is_boundary_vertex(0));
    }

    #[test]
    fn bumpy_disk_keeps_rim() {
        let bumps = random_bumps(3, 4, 0.2);
        let d = make_bumpy_disk(60, &bumps).unwrap();
        for l in boundary_loops(&d) {
            for v in l.vertex_indices {
                assert!(Circle::unit().distance(&d.vertices()[v]) < 1e-12);
            }
        }
        assert!(energies(&d).unwrap().w > 0.0);
    }

    #[test]
    fn face_count_heuristic() {
        let n = disk_resolution_for_faces(50_000);
        let d = make_flat_disk(&Circle::unit(), n).unwrap();
        assert!((45_000..60_000).contains(&d.num_faces()), "{}", d.num_faces());
    }
}
