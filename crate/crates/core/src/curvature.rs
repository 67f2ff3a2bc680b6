//! Discrete curvature and the three energies W, D and G.
//!
//! Mean curvature uses the cotangent Laplacian with mixed Voronoi areas, scaled so
//! that `H` is the average of the principal curvatures (a unit sphere gives
//! `|H| = 1`). The vector points towards the centre of curvature, i.e. `H = Δx / 2`.
//! Gaussian curvature is the angle defect. Boundary vertices carry no `H` or `K`;
//! the boundary enters only through the geodesic curvature masses `π - Σθ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::Circle;
use crate::dual::{self, Scalar, V3};
use crate::error::{Error, Result};
use crate::mesh::{boundary_loops, topology, TriMesh};
use crate::par;
use crate::Vec3;

/// Smallest admissible triangle angle, in radians.
pub const ANGLE_FLOOR: f64 = 1e-7;

/// Per-face contributions of one triangle to the cotangent Laplacian of its three
/// corners and to their mixed areas.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FaceLocal<T> {
    pub lap: [V3<T>; 3],
    pub area: [T; 3],
}

/// The face kernel shared by energy evaluation and the exact gradient.
pub(crate) fn face_kernel<T: Scalar>(p: &[V3<T>; 3]) -> FaceLocal<T> {
    let zero = T::cst(0.0);
    let mut cot = [zero; 3];
    let mut obtuse = [false; 3];
    let n = dual::cross(&dual::sub(&p[1], &p[0]), &dual::sub(&p[2], &p[0]));
    let twice_area = dual::dot(&n, &n).sqrt();
    for k in 0..3 {
        let a = dual::sub(&p[(k + 1) % 3], &p[k]);
        let b = dual::sub(&p[(k + 2) % 3], &p[k]);
        let d = dual::dot(&a, &b);
        cot[k] = d / twice_area;
        obtuse[k] = d.val() < 0.0;
    }
    let mut lap = [[zero; 3]; 3];
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let e = dual::scale(&dual::sub(&p[j], &p[i]), cot[k]);
        for c in 0..3 {
            lap[i][c] = lap[i][c] + e[c];
            lap[j][c] = lap[j][c] - e[c];
        }
    }
    let area = twice_area * T::cst(0.5);
    let mut mixed = [zero; 3];
    let any_obtuse = obtuse.iter().any(|&o| o);
    for k in 0..3 {
        mixed[k] = if !any_obtuse {
            let (j, l) = ((k + 1) % 3, (k + 2) % 3);
            let eij = dual::sub(&p[j], &p[k]);
            let eil = dual::sub(&p[l], &p[k]);
            (dual::dot(&eij, &eij) * cot[l] + dual::dot(&eil, &eil) * cot[j]) * T::cst(0.125)
        } else if obtuse[k] {
            area * T::cst(0.5)
        } else {
            area * T::cst(0.25)
        };
    }
    FaceLocal { lap, area: mixed }
}

fn to_arr(v: &Vec3) -> V3<f64> {
    [v.x, v.y, v.z]
}

/// Interior angles of a triangle, checked against [`ANGLE_FLOOR`].
pub(crate) fn face_angles(mesh: &TriMesh, f: usize) -> Result<[f64; 3]> {
    let p = mesh.face_positions(f);
    let mut ang = [0.0; 3];
    for k in 0..3 {
        let a = p[(k + 1) % 3] - p[k];
        let b = p[(k + 2) % 3] - p[k];
        ang[k] = a.cross(&b).norm().atan2(a.dot(&b));
        if !(ang[k] >= ANGLE_FLOOR) {
            return Err(Error::Numerical(format!(
                "face {f} has angle {:e} rad below the floor {ANGLE_FLOOR:e}",
                ang[k]
            )));
        }
    }
    Ok(ang)
}

/// Accumulated per-vertex sums: cotangent Laplacian, mixed area and angle sum.
#[derive(Debug, Clone)]
pub(crate) struct VertexSums {
    pub lap: Vec<Vec3>,
    pub area: Vec<f64>,
    pub angle_sum: Vec<f64>,
}

pub(crate) fn vertex_sums(mesh: &TriMesh) -> Result<VertexSums> {
    let locals = par::try_map_indexed(mesh.num_faces(), |f| {
        let ang = face_angles(mesh, f)?;
        let p = mesh.face_positions(f).map(|v| to_arr(&v));
        Ok::<_, Error>((face_kernel(&p), ang))
    })?;
    let n = mesh.num_vertices();
    let mut sums = VertexSums {
        lap: vec![Vec3::zeros(); n],
        area: vec![0.0; n],
        angle_sum: vec![0.0; n],
    };
    for (f, (loc, ang)) in locals.iter().enumerate() {
        for (k, &v) in mesh.triangles()[f].iter().enumerate() {
            sums.lap[v] += Vec3::from(loc.lap[k]);
            sums.area[v] += loc.area[k];
            sums.angle_sum[v] += ang[k];
        }
    }
    Ok(sums)
}

/// Discrete Willmore energy `Σ_interior |H_i|² A_i`, without the rest of the report.
pub fn willmore_energy(mesh: &TriMesh) -> Result<f64> {
    let s = vertex_sums(mesh)?;
    Ok(willmore_from_sums(mesh, &s))
}

pub(crate) fn willmore_from_sums(mesh: &TriMesh, s: &VertexSums) -> f64 {
    (0..mesh.num_vertices())
        .filter(|&v| !mesh.is_boundary_vertex(v))
        .map(|v| s.lap[v].norm_squared() / (16.0 * s.area[v]))
        .sum()
}

/// Exact gradient of the discrete `W` with respect to every vertex coordinate,
/// together with `W` itself.
///
/// With `W = Σ |L_i|² / (16 A_i)` the differential is `Σ λ_i·dL_i + μ_i dA_i` for
/// `λ_i = L_i / (8 A_i)` and `μ_i = -|L_i|² / (16 A_i²)`. Holding `λ, μ` fixed, each
/// face contributes a scalar function of its nine coordinates, differentiated in
/// forward mode.
pub fn willmore_gradient_exact(mesh: &TriMesh) -> Result<(f64, Vec<Vec3>)> {
    let s = vertex_sums(mesh)?;
    let n = mesh.num_vertices();
    let mut lambda = vec![Vec3::zeros(); n];
    let mut mu = vec![0.0; n];
    for v in 0..n {
        if !mesh.is_boundary_vertex(v) {
            lambda[v] = s.lap[v] / (8.0 * s.area[v]);
            mu[v] = -s.lap[v].norm_squared() / (16.0 * s.area[v] * s.area[v]);
        }
    }
    let per_face = par::map_indexed(mesh.num_faces(), |f| {
        let tri = mesh.triangles()[f];
        let pos = mesh.face_positions(f);
        let mut p = [[dual::Dual9::cst(0.0); 3]; 3];
        for k in 0..3 {
            for c in 0..3 {
                p[k][c] = dual::Dual9::var(pos[k][c], 3 * k + c);
            }
        }
        let loc = face_kernel(&p);
        let mut phi = dual::Dual9::cst(0.0);
        for k in 0..3 {
            let v = tri[k];
            for c in 0..3 {
                phi = phi + loc.lap[k][c] * dual::Dual9::cst(lambda[v][c]);
            }
            phi = phi + loc.area[k] * dual::Dual9::cst(mu[v]);
        }
        phi.d
    });
    let mut grad = vec![Vec3::zeros(); n];
    for (f, d) in per_face.iter().enumerate() {
        for (k, &v) in mesh.triangles()[f].iter().enumerate() {
            grad[v] += Vec3::new(d[3 * k], d[3 * k + 1], d[3 * k + 2]);
        }
    }
    Ok((willmore_from_sums(mesh, &s), grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryVertexData {
    pub vertex: usize,
    /// Outward unit conormal.
    pub conormal: Vec3,
    /// Unit tangent along the loop (surface on the left).
    pub tangent: Vec3,
    /// `π - Σθ`, the geodesic curvature already integrated over the vertex's share of the curve.
    pub geodesic_mass: f64,
}

#[derive(Debug, Clone)]
pub struct CurvatureField {
    /// Mean curvature vector, zero at boundary vertices.
    pub mean_curvature: Vec<Vec3>,
    /// Angle-defect Gaussian curvature, zero at boundary vertices.
    pub gauss: Vec<f64>,
    /// Mixed Voronoi areas.
    pub vertex_area: Vec<f64>,
    pub angle_sum: Vec<f64>,
    pub boundary: Vec<BoundaryVertexData>,
    interior: Vec<bool>,
}

impl CurvatureField {
    pub fn is_interior(&self, v: usize) -> bool {
        self.interior[v]
    }

    /// `|A|²_i A_i = (4|H_i|² - 2K_i) A_i`, clamped at zero, for interior vertices.
    pub fn bending_density(&self, v: usize) -> f64 {
        if !self.interior[v] {
            return 0.0;
        }
        let a2 = 4.0 * self.mean_curvature[v].norm_squared() - 2.0 * self.gauss[v];
        (a2 * self.vertex_area[v]).max(0.0)
    }
}

pub fn curvature_field(mesh: &TriMesh) -> Result<CurvatureField> {
    let s = vertex_sums(mesh)?;
    let n = mesh.num_vertices();
    let mut mean = vec![Vec3::zeros(); n];
    let mut gauss = vec![0.0; n];
    let mut interior = vec![false; n];
    for v in 0..n {
        if mesh.is_boundary_vertex(v) {
            continue;
        }
        interior[v] = true;
        mean[v] = s.lap[v] / (4.0 * s.area[v]);
        gauss[v] = (2.0 * PI - s.angle_sum[v]) / s.area[v];
    }

    let mut boundary = Vec::new();
    for lp in boundary_loops(mesh) {
        for &v in &lp.vertex_indices {
            boundary.push(boundary_data(mesh, v, s.angle_sum[v])?);
        }
    }
    Ok(CurvatureField {
        mean_curvature: mean,
        gauss,
        vertex_area: s.area,
        angle_sum: s.angle_sum,
        boundary,
        interior,
    })
}

fn boundary_data(mesh: &TriMesh, v: usize, angle_sum: f64) -> Result<BoundaryVertexData> {
    let x = mesh.vertices()[v];
    let next = mesh.boundary_next(v).unwrap();
    let prev = mesh.boundary_prev(v).unwrap();
    let tangent = (mesh.vertices()[next] - mesh.vertices()[prev]).normalize();
    let normal = mesh.vertex_normal(v);

    // Outward bisector: away from the interior edges, or from both boundary edges
    // when the vertex has no interior edge.
    let mut inward = Vec3::zeros();
    for &w in mesh.vertex_neighbors(v) {
        if w != next && w != prev {
            inward += (mesh.vertices()[w] - x).normalize();
        }
    }
    if inward.norm() < 1e-12 {
        inward = (mesh.vertices()[next] - x).normalize() + (mesh.vertices()[prev] - x).normalize();
    }
    let outward = -inward;

    let dir = tangent.cross(&normal);
    let dir = dir - tangent * dir.dot(&tangent);
    let len = dir.norm();
    if !(len > 1e-12) {
        return Err(Error::Numerical(format!(
            "boundary vertex {v}: tangent parallel to the vertex normal"
        )));
    }
    let mut conormal = dir / len;
    if conormal.dot(&outward) < 0.0 {
        conormal = -conormal;
    }
    Ok(BoundaryVertexData {
        vertex: v,
        conormal,
        tangent,
        geodesic_mass: PI - angle_sum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub total_gauss: f64,
    pub chi: i64,
    pub gb_residual: f64,
}

impl EnergyReport {
    /// The conformally invariant combination `W + G`.
    pub fn w_plus_g(&self) -> f64 {
        self.w + self.g
    }
}

pub fn energies(mesh: &TriMesh) -> Result<EnergyReport> {
    let chi = topology(mesh)?.euler_characteristic;
    let field = curvature_field(mesh)?;
    Ok(energies_from_field(mesh, &field, chi))
}

pub fn energies_from_field(mesh: &TriMesh, field: &CurvatureField, chi: i64) -> EnergyReport {
    let mut w = 0.0;
    let mut total_gauss = 0.0;
    for v in 0..mesh.num_vertices() {
        if field.is_interior(v) {
            w += field.mean_curvature[v].norm_squared() * field.vertex_area[v];
            total_gauss += 2.0 * PI - field.angle_sum[v];
        }
    }
    let g: f64 = field.boundary.iter().map(|b| b.geodesic_mass).sum();
    let d = 4.0 * w - 2.0 * total_gauss;
    let gb_residual = w - 0.25 * d - 0.5 * (2.0 * PI * chi as f64 - g);
    EnergyReport {
        w,
        d,
        g,
        total_gauss,
        chi,
        gb_residual,
    }
}

/// Edge-length weighted L² distance between the discrete conormal and the
/// circle's outward radial field `(p - c)/r`.
pub fn conormal_deviation(mesh: &TriMesh, circle: &Circle) -> Result<f64> {
    let limit = 1e-6 * circle.radius;
    for v in (0..mesh.num_vertices()).filter(|&v| mesh.is_boundary_vertex(v)) {
        let d = circle.distance(&mesh.vertices()[v]);
        if d > limit {
            return Err(Error::BoundaryMismatch {
                vertex: v,
                distance: d,
                limit,
            });
        }
    }
    let field = curvature_field(mesh)?;
    let mut sum = 0.0;
    for b in &field.boundary {
        let v = b.vertex;
        let x = mesh.vertices()[v];
        let next = mesh.vertices()[mesh.boundary_next(v).unwrap()];
        let prev = mesh.vertices()[mesh.boundary_prev(v).unwrap()];
        let weight = 0.5 * ((next - x).norm() + (x - prev).norm());
        let radial = (x - circle.center) / circle.radius;
        sum += (b.conormal - radial).norm_squared() * weight;
    }
    Ok(sum.sqrt())
}
