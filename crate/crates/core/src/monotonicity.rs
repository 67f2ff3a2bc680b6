//! Boundary monotonicity quantity `A(ρ)` about a center `p₀`.
//!
//! `A(ρ) = μ(B_ρ)/ρ² + ¼∫_{B_ρ}|H|² + ∫_{B_ρ}⟨H⃗, p−p₀⟩/ρ² + T_ρ` with
//! `T_ρ = ½∫_{Γ∩B_ρ}(1/|p−p₀|² − 1/ρ²)⟨p−p₀, co⟩`, nondecreasing in ρ.
//! `H⃗` is the mean curvature vector (half the trace of the second fundamental form).

use std::fmt::Write as _;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_field, CurvatureField};
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::moebius::closest_on_triangle;
use crate::{par, Vec3};

pub const MAX_DEPTH: usize = 24;
pub const MASS_TOL: f64 = 1e-6;

/// 5-point Gauss–Legendre on [0, 1].
const GAUSS5: [(f64, f64); 5] = [
    (0.046_910_077_030_668, 0.118_463_442_528_095),
    (0.230_765_344_947_158, 0.239_314_335_249_683),
    (0.5, 0.284_444_444_444_444),
    (0.769_234_655_052_842, 0.239_314_335_249_683),
    (0.953_089_922_969_332, 0.118_463_442_528_095),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub rho: f64,
    pub mass_ratio: f64,
    pub willmore_quarter: f64,
    pub mean_remainder: f64,
    pub boundary_remainder: f64,
    #[serde(rename = "A")]
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityProfile {
    pub center: Vec3,
    pub rows: Vec<ProfileRow>,
}

impl MonotonicityProfile {
    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.a).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("rho,mass_ratio,willmore_quarter,mean_remainder,boundary_remainder,A\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                r.rho, r.mass_ratio, r.willmore_quarter, r.mean_remainder, r.boundary_remainder, r.a
            )
            .unwrap();
        }
        s
    }
}

fn tri_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Area of the part of a triangle where the linear interpolant of `f` is negative.
fn linear_clip(area: f64, f: [f64; 3]) -> f64 {
    let inside = f.iter().filter(|v| **v <= 0.0).count();
    match inside {
        0 => 0.0,
        3 => area,
        _ => {
            // The lone vertex on one side cuts off a corner triangle.
            let lone_inside = inside == 1;
            let k = (0..3).find(|&i| (f[i] <= 0.0) == lone_inside).unwrap();
            let (f0, f1, f2) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            let corner = area * (f0 / (f0 - f1)) * (f0 / (f0 - f2));
            if lone_inside {
                corner
            } else {
                area - corner
            }
        }
    }
}

struct Ball {
    center: Vec3,
    rho: f64,
}

impl Ball {
    fn f(&self, p: &Vec3) -> f64 {
        (p - self.center).norm_squared() - self.rho * self.rho
    }

    /// Area of `abc ∩ B_ρ` by recursive midpoint subdivision of straddling pieces.
    /// A piece is closed off by linear clipping once its chord-sagitta error
    /// estimate `h³/(8ρ)` drops below its share of the budget.
    fn area(&self, a: &Vec3, b: &Vec3, c: &Vec3, budget: f64, depth: usize) -> Result<f64> {
        let f = [self.f(a), self.f(b), self.f(c)];
        let area = tri_area(a, b, c);
        if f.iter().all(|v| *v <= 0.0) {
            return Ok(area);
        }
        if (closest_on_triangle(&self.center, a, b, c) - self.center).norm() >= self.rho {
            return Ok(0.0);
        }
        let h = (b - a).norm().max((c - b).norm()).max((a - c).norm());
        if h * h * h / (8.0 * self.rho) <= budget {
            return Ok(linear_clip(area, f));
        }
        if depth == MAX_DEPTH {
            return Err(Error::Tolerance(MAX_DEPTH));
        }
        let (ab, bc, ca) = ((a + b) / 2.0, (b + c) / 2.0, (c + a) / 2.0);
        // About two of the four children straddle, so halving keeps the total bounded.
        let q = budget / 2.0;
        Ok(self.area(a, &ab, &ca, q, depth + 1)?
            + self.area(&ab, b, &bc, q, depth + 1)?
            + self.area(&ca, &bc, c, q, depth + 1)?
            + self.area(&ab, &bc, &ca, q, depth + 1)?)
    }

    fn straddles(&self, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
        let inside = [a, b, c].iter().all(|p| self.f(p) <= 0.0);
        !inside && (closest_on_triangle(&self.center, a, b, c) - self.center).norm() < self.rho
    }

    /// Portion of segment `ab` inside the ball, as parameters `[t0, t1]`.
    fn clip_segment(&self, a: &Vec3, b: &Vec3) -> Option<(f64, f64)> {
        let d = b - a;
        let m = a - self.center;
        let (qa, qb, qc) = (d.norm_squared(), 2.0 * m.dot(&d), m.norm_squared() - self.rho * self.rho);
        let disc = qb * qb - 4.0 * qa * qc;
        if disc <= 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let (t0, t1) = (((-qb - s) / (2.0 * qa)).max(0.0), ((-qb + s) / (2.0 * qa)).min(1.0));
        (t1 > t0).then_some((t0, t1))
    }
}

/// Barycentric cells of a face: vertex `k`'s cell is the quad
/// (vertex, edge midpoint, centroid, edge midpoint), split into two triangles.
fn cells(p: &[Vec3; 3]) -> [[Vec3; 3]; 6] {
    let g = (p[0] + p[1] + p[2]) / 3.0;
    let m = |i: usize, j: usize| (p[i] + p[j]) / 2.0;
    let mut out = [[Vec3::zeros(); 3]; 6];
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        out[2 * k] = [p[k], m(k, i), g];
        out[2 * k + 1] = [p[k], g, m(k, j)];
    }
    out
}

/// Fraction of each vertex's barycentric cell inside the ball, and the ball mass.
fn cell_fractions(mesh: &TriMesh, ball: &Ball) -> Result<(Vec<f64>, f64)> {
    let nf = mesh.num_faces();
    let mut straddling = 0usize;
    for f in 0..nf {
        for c in cells(&mesh.face_positions(f)) {
            if ball.straddles(&c[0], &c[1], &c[2]) {
                straddling += 1;
            }
        }
    }
    let pi_rho2 = std::f64::consts::PI * ball.rho * ball.rho;
    let budget = MASS_TOL * pi_rho2 / straddling.max(1) as f64;

    let mut inside = vec![0.0; mesh.num_vertices()];
    let mut cell = vec![0.0; mesh.num_vertices()];
    let mut mass = 0.0;
    for f in 0..nf {
        let p = mesh.face_positions(f);
        let tri = mesh.triangles()[f];
        let third = tri_area(&p[0], &p[1], &p[2]) / 3.0;
        let all_out = (closest_on_triangle(&ball.center, &p[0], &p[1], &p[2]) - ball.center).norm() >= ball.rho;
        let all_in = p.iter().all(|q| ball.f(q) <= 0.0);
        for (k, &v) in tri.iter().enumerate() {
            cell[v] += third;
            let part = if all_out {
                0.0
            } else if all_in {
                third
            } else {
                let c = cells(&p);
                ball.area(&c[2 * k][0], &c[2 * k][1], &c[2 * k][2], budget, 0)?
                    + ball.area(&c[2 * k + 1][0], &c[2 * k + 1][1], &c[2 * k + 1][2], budget, 0)?
            };
            inside[v] += part;
            mass += part;
        }
    }
    let frac = inside.iter().zip(&cell).map(|(i, c)| if *c > 0.0 { i / c } else { 0.0 }).collect();
    Ok((frac, mass))
}

/// Outward unit conormal of each boundary edge, in the plane of its face.
fn boundary_edges(mesh: &TriMesh) -> Vec<(Vec3, Vec3, Vec3)> {
    let pos = mesh.vertices();
    mesh.edges()
        .iter()
        .filter(|e| e.boundary)
        .map(|e| {
            let (a, b) = (pos[e.v[0]], pos[e.v[1]]);
            let t = mesh.triangles()[e.faces[0]];
            let opp = t.iter().copied().find(|&w| w != e.v[0] && w != e.v[1]).unwrap();
            let d = (b - a).normalize();
            let to_opp = pos[opp] - a;
            let inward = to_opp - d * to_opp.dot(&d);
            (a, b, -inward.normalize())
        })
        .collect()
}

fn row(mesh: &TriMesh, field: &CurvatureField, edges: &[(Vec3, Vec3, Vec3)], center: &Vec3, rho: f64) -> Result<ProfileRow> {
    let ball = Ball { center: *center, rho };
    let (frac, mass) = cell_fractions(mesh, &ball)?;
    let (mut wq, mut mean) = (0.0, 0.0);
    for v in 0..mesh.num_vertices() {
        if !field.is_interior(v) || frac[v] == 0.0 {
            continue;
        }
        let h = field.mean_curvature[v];
        let w = field.vertex_area[v] * frac[v];
        wq += 0.25 * h.norm_squared() * w;
        mean += h.dot(&(mesh.vertices()[v] - center)) * w;
    }
    let rho2 = rho * rho;
    let mut t = 0.0;
    for (a, b, co) in edges {
        if let Some((t0, t1)) = ball.clip_segment(a, b) {
            let len = (b - a).norm() * (t1 - t0);
            for (s, w) in GAUSS5 {
                let x = a + (b - a) * (t0 + (t1 - t0) * s) - center;
                let r2 = x.norm_squared();
                t += w * len * (1.0 / r2 - 1.0 / rho2).max(0.0) * x.dot(co);
            }
        }
    }
    let (mass_ratio, mean_remainder, boundary_remainder) = (mass / rho2, mean / rho2, 0.5 * t);
    Ok(ProfileRow {
        rho,
        mass_ratio,
        willmore_quarter: wq,
        mean_remainder,
        boundary_remainder,
        a: mass_ratio + wq + mean_remainder + boundary_remainder,
    })
}

pub fn profile(mesh: &TriMesh, center: &Vec3, radii: &[f64]) -> Result<MonotonicityProfile> {
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("radii must be strictly increasing".into()));
    }
    let field = curvature_field(mesh)?;
    let edges = boundary_edges(mesh);
    let near_gamma = edges
        .iter()
        .map(|(a, b, _)| (crate::curve::closest_on_segment(center, a, b) - center).norm())
        .fold(f64::INFINITY, f64::min);
    if near_gamma < 1e-6 * mesh.diameter() {
        warn!("center lies on the boundary curve; boundary term taken as a principal value");
    }
    let rows = par::try_map_indexed(radii.len(), |i| row(mesh, &field, &edges, center, radii[i]))?;
    Ok(MonotonicityProfile { center: *center, rows })
}

/// `∫_{B_ρ∖B_σ} |H⃗/2 + (p−p₀)^⊥/|p−p₀|²|² dν`, evaluated vertex-wise.
pub fn annulus_defect(mesh: &TriMesh, center: &Vec3, sigma: f64, rho: f64) -> Result<f64> {
    let field = curvature_field(mesh)?;
    let (inner, _) = cell_fractions(mesh, &Ball { center: *center, rho: sigma })?;
    let (outer, _) = cell_fractions(mesh, &Ball { center: *center, rho })?;
    let mut sum = 0.0;
    for v in 0..mesh.num_vertices() {
        let w = outer[v] - inner[v];
        if !field.is_interior(v) || w <= 0.0 {
            continue;
        }
        let x = mesh.vertices()[v] - center;
        let n = mesh.vertex_normal(v);
        let perp = n * x.dot(&n) / x.norm_squared();
        sum += (field.mean_curvature[v] / 2.0 + perp).norm_squared() * field.vertex_area[v] * w;
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub monotone: bool,
    /// First index pair `(i, i+1)` with `A[i+1] < A[i] − slack`.
    pub first_violation: Option<(usize, usize)>,
}

pub fn check_monotone(profile: &MonotonicityProfile, slack: f64) -> MonotoneCheck {
    let a = profile.values();
    let first_violation = (0..a.len().saturating_sub(1)).find(|&i| a[i + 1] < a[i] - slack).map(|i| (i, i + 1));
    MonotoneCheck {
        monotone: first_violation.is_none(),
        first_violation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{make_clifford_torus, make_flat_disk, make_half_disk, make_sphere, CliffordParams};
    use crate::Circle;
    use std::f64::consts::PI;

    fn radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn linear_clip_cases() {
        assert_eq!(linear_clip(2.0, [-1.0, -1.0, -1.0]), 2.0);
        assert_eq!(linear_clip(2.0, [1.0, 1.0, 1.0]), 0.0);
        assert!((linear_clip(1.0, [-1.0, 1.0, 1.0]) - 0.25).abs() < 1e-15);
        assert!((linear_clip(1.0, [1.0, -1.0, -1.0]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn ball_area_of_large_flat_triangle() {
        // Disk of radius 1 entirely inside one big triangle.
        let ball = Ball { center: Vec3::zeros(), rho: 1.0 };
        let (a, b, c) = (Vec3::new(-10.0, -10.0, 0.0), Vec3::new(20.0, -10.0, 0.0), Vec3::new(-10.0, 20.0, 0.0));
        let area = ball.area(&a, &b, &c, 1e-7, 0).unwrap();
        assert!((area - PI).abs() < 1e-6, "{area}");
    }

    #[test]
    fn plane_profile_is_pi() {
        let d = make_flat_disk(&Circle::new(Vec3::zeros(), 4.0), 96).unwrap();
        let p = profile(&d, &Vec3::zeros(), &radii(0.5, 3.5, 7)).unwrap();
        for r in &p.rows {
            assert!((r.a - PI).abs() < 1e-3, "{r:?}");
        }
    }

    #[test]
    fn half_plane_profile_is_half_pi() {
        let h = make_half_disk(4.0, 96).unwrap();
        let p = profile(&h, &Vec3::zeros(), &radii(0.5, 3.5, 7)).unwrap();
        for r in &p.rows {
            assert!((r.a - PI / 2.0).abs() < 1e-3, "{r:?}");
            assert!(r.boundary_remainder.abs() < 1e-12);
        }
        assert!(check_monotone(&p, 1e-3).monotone);
    }

    #[test]
    fn sphere_profile_from_surface_point_is_flat() {
        // On a round sphere through p₀ the defect integrand vanishes, so A ≡ π.
        let s = make_sphere(5).unwrap();
        let p0 = s.vertices()[0];
        let p = profile(&s, &p0, &radii(0.1, 1.9, 10)).unwrap();
        for r in &p.rows {
            assert!((r.a - PI).abs() < 1e-2, "{r:?}");
            assert_eq!(r.boundary_remainder, 0.0);
        }
        assert!(check_monotone(&p, 1e-2).monotone);
    }

    #[test]
    fn reversed_profile_fails_at_zero() {
        let mut p = profile(&make_sphere(3).unwrap(), &Vec3::new(0.0, 0.0, 0.3), &radii(0.75, 1.25, 5)).unwrap();
        p.rows.reverse();
        let c = check_monotone(&p, 1e-3);
        assert!(!c.monotone);
        assert_eq!(c.first_violation, Some((0, 1)));
    }

    #[test]
    fn scale_covariance() {
        let t = make_clifford_torus(&CliffordParams::standard(32, 32)).unwrap();
        let c = Vec3::new(0.4, 0.2, 0.9);
        let rs = radii(0.5, 3.0, 5);
        let lambda = 3.7;
        let big = t.map_positions(|p| p * lambda).unwrap();
        let a = profile(&t, &c, &rs).unwrap();
        let b = profile(&big, &(c * lambda), &rs.iter().map(|r| r * lambda).collect::<Vec<_>>()).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            for (u, v) in [
                (x.mass_ratio, y.mass_ratio),
                (x.willmore_quarter, y.willmore_quarter),
                (x.mean_remainder, y.mean_remainder),
                (x.a, y.a),
            ] {
                assert!((u - v).abs() <= 1e-10 * u.abs().max(1e-3), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn torus_profile_is_monotone() {
        let t = make_clifford_torus(&CliffordParams::standard(160, 160)).unwrap();
        let p = profile(&t, &Vec3::new(1.2, -0.4, 0.3), &radii(0.2, 4.0, 12)).unwrap();
        let c = check_monotone(&p, 1e-2);
        assert!(c.monotone, "{:?}\n{}", c, p.to_csv());
    }

    #[test]
    fn telescoping_matches_defect_on_sphere() {
        let s = make_sphere(6).unwrap();
        let c = Vec3::new(0.0, 0.0, 0.5);
        let (sigma, rho) = (0.7, 1.4);
        let p = profile(&s, &c, &[sigma, rho]).unwrap();
        let lhs = p.rows[1].a - p.rows[0].a;
        let rhs = annulus_defect(&s, &c, sigma, rho).unwrap();
        assert!(lhs > 0.0);
        assert!((lhs - rhs).abs() <= 0.02 * rhs, "{lhs} vs {rhs}");
    }

    #[test]
    fn csv_header() {
        let d = make_flat_disk(&Circle::unit(), 32).unwrap();
        let p = profile(&d, &Vec3::zeros(), &[0.5]).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("rho,mass_ratio,willmore_quarter,mean_remainder,boundary_remainder,A\n"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn bad_radii_rejected() {
        let d = make_flat_disk(&Circle::unit(), 16).unwrap();
        assert!(profile(&d, &Vec3::zeros(), &[0.5, 0.4]).is_err());
        assert!(profile(&d, &Vec3::zeros(), &[-1.0]).is_err());
    }
}
