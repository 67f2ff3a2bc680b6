//! Clifford torus, its inversion at a point of positive curvature, and truncations.
//!
//! The inverted torus is meshed in two pieces. Far from the inversion point the
//! surface is a graph over the xy-plane, sampled on concentric rings of lateral
//! radius `ρ` whose heights are found by root finding. The remaining compact piece
//! is meshed in the torus parameter domain between the preimage of the innermost
//! graph ring and the boundary of the fundamental square, whose sides are then
//! identified.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use super::rings::{ring_angles, MeshBuilder};
use crate::error::{Error, Result};
use crate::mesh::{boundary_loops, TriMesh};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffordParams {
    pub n_u: usize,
    pub n_v: usize,
    /// Stereographic pole on S³; normalized before use.
    pub pole: [f64; 4],
}

impl CliffordParams {
    pub fn standard(n_u: usize, n_v: usize) -> Self {
        CliffordParams {
            n_u,
            n_v,
            pole: [0.0, 0.0, 0.0, 1.0],
        }
    }
}

/// Stereographic image of `(cos u, sin u, cos v, sin v)/√2`. With the standard pole
/// this is the torus of revolution with tube radius 1 around a circle of radius √2.
pub fn make_clifford_torus(params: &CliffordParams) -> Result<TriMesh> {
    let CliffordParams { n_u, n_v, pole } = *params;
    if n_u < 8 || n_v < 8 {
        return Err(Error::InvalidParameter(format!(
            "Clifford torus resolution must be at least 8x8, got {n_u}x{n_v}"
        )));
    }
    let norm = pole.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidParameter("pole must be a nonzero 4-vector".into()));
    }
    let n: [f64; 4] = pole.map(|x| x / norm);
    if (n[0] * n[0] + n[1] * n[1] - 0.5).abs() < 1e-9 {
        return Err(Error::PoleOnSurface);
    }
    let basis = complement_basis(&n);
    let mut verts = Vec::with_capacity(n_u * n_v);
    for i in 0..n_u {
        let u = TAU * i as f64 / n_u as f64;
        for j in 0..n_v {
            let v = TAU * j as f64 / n_v as f64;
            let x = [u.cos(), u.sin(), v.cos(), v.sin()].map(|c| c / SQRT_2);
            let xn: f64 = (0..4).map(|k| x[k] * n[k]).sum();
            let coord = |e: &[f64; 4]| (0..4).map(|k| x[k] * e[k]).sum::<f64>() / (1.0 - xn);
            verts.push(Vec3::new(coord(&basis[0]), coord(&basis[1]), coord(&basis[2])));
        }
    }
    let id = |i: usize, j: usize| (i % n_u) * n_v + (j % n_v);
    let mut tris = Vec::with_capacity(2 * n_u * n_v);
    for i in 0..n_u {
        for j in 0..n_v {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    orient_outward(&verts, &mut tris);
    TriMesh::new(verts, tris)
}

/// Three orthonormal vectors spanning the complement of the unit vector `n` in R⁴.
fn complement_basis(n: &[f64; 4]) -> [[f64; 4]; 3] {
    let mut out: Vec<[f64; 4]> = Vec::new();
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        let proj = |e: &mut [f64; 4], w: &[f64; 4]| {
            let d: f64 = (0..4).map(|i| e[i] * w[i]).sum();
            (0..4).for_each(|i| e[i] -= d * w[i]);
        };
        proj(&mut e, n);
        for w in &out {
            proj(&mut e, w);
        }
        let len = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 0.5 {
            out.push(e.map(|x| x / len));
        }
        if out.len() == 3 {
            break;
        }
    }
    [out[0], out[1], out[2]]
}

/// Flip every triangle if the enclosed signed volume is negative.
fn orient_outward(verts: &[Vec3], tris: &mut [[usize; 3]]) {
    let vol: f64 = tris
        .iter()
        .map(|t| verts[t[0]].dot(&verts[t[1]].cross(&verts[t[2]])))
        .sum();
    if vol < 0.0 {
        tris.iter_mut().for_each(|t| t.swap(1, 2));
    }
}

/// The standard Clifford torus at parameters `(u, v)`.
fn torus_point(u: f64, v: f64) -> Vec3 {
    Vec3::new(u.cos(), u.sin(), v.cos()) / (SQRT_2 - v.sin())
}

/// Implicit equation of the standard Clifford torus, negative inside.
fn torus_implicit(p: &Vec3) -> f64 {
    let r = (p.x * p.x + p.y * p.y).sqrt();
    (r - SQRT_2).powi(2) + p.z * p.z - 1.0
}

/// Parameters `(u, v)` of a point on the standard Clifford torus.
fn torus_params(p: &Vec3) -> (f64, f64) {
    let r = (p.x * p.x + p.y * p.y).sqrt();
    (p.y.atan2(p.x), (SQRT_2 - 1.0 / r).atan2(p.z / r))
}

/// Principal curvatures at the inversion point on the outer equator: along the
/// tube (1) and along the equator (√2 − 1).
const KAPPA_TUBE: f64 = 1.0;
const KAPPA_EQUATOR: f64 = SQRT_2 - 1.0;

/// The end of the inverted torus as a graph `Z(X, Y)` over the asymptotic plane.
///
/// The torus is inverted in the unit sphere around `q = (√2 + 1, 0, 0)` and rotated
/// so the asymptotic plane is horizontal: `(X, Y, Z) = (z', y', -x')`. Heights tend
/// to `½(κ_tube cos²θ + κ_equator sin²θ)` as `ρ → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndGraph {
    pub q: Vec3,
}

impl Default for EndGraph {
    fn default() -> Self {
        EndGraph {
            q: Vec3::new(SQRT_2 + 1.0, 0.0, 0.0),
        }
    }
}

impl EndGraph {
    /// Mean asymptotic height, the average of the direction-dependent limit.
    pub fn mean_level(&self) -> f64 {
        0.25 * (KAPPA_TUBE + KAPPA_EQUATOR)
    }

    /// Limit of the height in direction `θ` as `ρ → ∞`.
    pub fn asymptotic_height(&self, theta: f64) -> f64 {
        0.5 * (KAPPA_TUBE * theta.cos().powi(2) + KAPPA_EQUATOR * theta.sin().powi(2))
    }

    /// Graph coordinates of a torus point.
    pub fn to_graph(&self, p: &Vec3) -> Vec3 {
        let d = p - self.q;
        let ip = d / d.norm_squared();
        Vec3::new(ip.z, ip.y, -ip.x)
    }

    /// Torus point of graph coordinates.
    pub fn to_torus(&self, s: &Vec3) -> Vec3 {
        let ip = Vec3::new(-s.z, s.y, s.x);
        self.q + ip / ip.norm_squared()
    }

    /// Height of the end above `(X, Y)`, by bisection on `Z ∈ [0, 1]`.
    pub fn height(&self, x: f64, y: f64) -> Result<f64> {
        let f = |z: f64| torus_implicit(&self.to_torus(&Vec3::new(x, y, z)));
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let (flo, fhi) = (f(lo), f(hi));
        if !(flo > 0.0 && fhi < 0.0) {
            return Err(Error::Graphicality(format!(
                "no height bracket above ({x}, {y}): F(0) = {flo:e}, F(1) = {fhi:e}"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `(Z, ∂Z/∂ρ)` at lateral polar coordinates `(ρ, θ)`.
    pub fn height_and_slope(&self, rho: f64, theta: f64) -> Result<(f64, f64)> {
        let (c, s) = (theta.cos(), theta.sin());
        let z = self.height(rho * c, rho * s)?;
        let h = 1e-5 * rho;
        let zp = self.height((rho + h) * c, (rho + h) * s)?;
        let zm = self.height((rho - h) * c, (rho - h) * s)?;
        Ok((z, (zp - zm) / (2.0 * h)))
    }

    /// Graph point at lateral polar coordinates.
    pub fn point(&self, rho: f64, theta: f64) -> Result<Vec3> {
        let (x, y) = (rho * theta.cos(), rho * theta.sin());
        Ok(Vec3::new(x, y, self.height(x, y)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvertedTorusParams {
    /// Vertices per ring; a multiple of 8.
    pub m: usize,
    /// Lateral radius of the innermost graph ring.
    pub graph_radius: f64,
}

impl Default for InvertedTorusParams {
    fn default() -> Self {
        InvertedTorusParams {
            m: 128,
            graph_radius: 1.5,
        }
    }
}

/// The inverted Clifford torus, with its compact part meshed and its end available
/// as a graph. Rings appended by [`InvertedTorus::assemble`] complete the surface.
#[derive(Debug, Clone)]
pub struct InvertedTorus {
    pub params: InvertedTorusParams,
    pub end: EndGraph,
    compact: MeshBuilder,
    /// Vertex indices of the innermost graph ring, in order of increasing angle.
    graph_ring: Vec<usize>,
    flip_end: bool,
}

impl InvertedTorus {
    pub fn new(params: InvertedTorusParams) -> Result<Self> {
        let m = params.m;
        if m < 16 || !m.is_multiple_of(8) {
            return Err(Error::InvalidParameter(format!(
                "ring resolution must be a multiple of 8 and at least 16, got {m}"
            )));
        }
        if !(params.graph_radius >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "graph radius must be at least 1, got {}",
                params.graph_radius
            )));
        }
        let end = EndGraph::default();
        let growth = 1.0 + TAU / m as f64;

        // Innermost graph ring and its preimage in the torus parameter domain,
        // centred so the inversion point sits at the origin.
        let thetas = ring_angles(m, 0.0);
        let mut b = MeshBuilder::default();
        let mut c0 = Vec::with_capacity(m);
        let mut graph_ring = Vec::with_capacity(m);
        for &th in &thetas {
            let p = end.point(params.graph_radius, th)?;
            let (u, v) = torus_params(&end.to_torus(&p));
            c0.push([wrap(u), wrap(v - FRAC_PI_2)]);
            graph_ring.push(b.add(p));
        }

        // Order domain rings counter-clockwise in the parameter plane.
        let area: f64 = (0..m)
            .map(|i| {
                let (a, c) = (c0[i], c0[(i + 1) % m]);
                a[0] * c[1] - a[1] * c[0]
            })
            .sum();
        let order: Vec<usize> = if area > 0.0 {
            (0..m).collect()
        } else {
            (0..m).rev().collect()
        };
        let ray_ang: Vec<f64> = order.iter().map(|&i| c0[i][1].atan2(c0[i][0])).collect();
        check_increasing(&ray_ang)?;

        let place = |s: f64, t: f64| end.to_graph(&torus_point(s, t + FRAC_PI_2));
        let r0: Vec<f64> = order.iter().map(|&i| c0[i][0].hypot(c0[i][1])).collect();
        let r1: Vec<f64> = ray_ang.iter().map(|&a| square_radius(a)).collect();
        let mean_ratio = (r1.iter().sum::<f64>() / r0.iter().sum::<f64>()).ln();
        let n_domain = ((mean_ratio / growth.ln()).ceil() as usize).max(2);

        let mut prev: Vec<usize> = order.iter().map(|&i| graph_ring[i]).collect();
        for j in 1..n_domain {
            let tau = j as f64 / n_domain as f64;
            let ring: Vec<usize> = (0..m)
                .map(|k| {
                    let r = r0[k].powf(1.0 - tau) * r1[k].powf(tau);
                    b.add(place(r * ray_ang[k].cos(), r * ray_ang[k].sin()))
                })
                .collect();
            b.stitch_matched(&prev, &ring);
            prev = ring;
        }

        // Fundamental square along the same rays, plus its four corners, with the
        // identified vertices of opposite sides merged. The ray set is symmetric
        // under s -> -s and t -> -t, so both copies of each side point exist.
        let mut sq: Vec<(f64, f64, f64)> = ray_ang
            .iter()
            .zip(&r1)
            .map(|(&a, &r)| (a.rem_euclid(TAU), r * a.cos(), r * a.sin()))
            .collect();
        for (cs, ct) in [(PI, PI), (-PI, PI), (-PI, -PI), (PI, -PI)] {
            let a = f64::atan2(ct, cs).rem_euclid(TAU);
            if !sq.iter().any(|x| (x.0 - a).abs() < 1e-12) {
                sq.push((a, cs, ct));
            }
        }
        sq.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: HashMap<(i64, i64), usize> = HashMap::new();
        let mut sq_ring = Vec::with_capacity(sq.len());
        let mut sq_ang = Vec::with_capacity(sq.len());
        for &(a, s, t) in &sq {
            let (s, t) = (snap(s), snap(t));
            sq_ang.push(a);
            let key = (canonical(s), canonical(t));
            let idx = *merged.entry(key).or_insert_with(|| b.add(place(s, t)));
            sq_ring.push(idx);
        }
        let inner_ang: Vec<f64> = ray_ang.iter().map(|a| a.rem_euclid(TAU)).collect();
        b.stitch(&prev, &inner_ang, &sq_ring, &sq_ang, true);

        // The end rings use matched quads, which traverse the graph ring backwards
        // (`g[m+1] → g[m]`); the compact side must use the opposite direction.
        let (g0, g1) = (graph_ring[0], graph_ring[1]);
        let backwards = b
            .tris
            .iter()
            .any(|t| (0..3).any(|k| t[k] == g1 && t[(k + 1) % 3] == g0));
        Ok(InvertedTorus {
            params,
            end,
            compact: b,
            graph_ring,
            flip_end: backwards,
        })
    }

    /// Lateral radii of graph rings from the innermost one up to `outer`
    /// (inclusive), growing geometrically to keep triangles near equilateral.
    pub fn ring_radii(&self, outer: f64) -> Vec<f64> {
        geometric_radii(self.params.graph_radius, outer, self.params.m)
    }

    /// The angles shared by every appended ring.
    pub fn angles(&self) -> Vec<f64> {
        ring_angles(self.params.m, 0.0)
    }

    /// Innermost graph ring positions, in angle order.
    pub fn graph_ring_positions(&self) -> Vec<Vec3> {
        self.graph_ring.iter().map(|&i| self.compact.verts[i]).collect()
    }

    /// Complete the surface with `rings`, each holding `m` positions at
    /// [`Self::angles`], ordered outwards. All positions, including the compact
    /// part, are passed through `transform`.
    pub fn assemble<F: Fn(&Vec3) -> Vec3>(&self, rings: &[Vec<Vec3>], transform: F) -> Result<TriMesh> {
        let mut b = self.compact.clone();
        let n_compact = b.tris.len();
        let mut prev = self.graph_ring.clone();
        for ring in rings {
            if ring.len() != self.params.m {
                return Err(Error::InvalidParameter(format!(
                    "ring has {} vertices, expected {}",
                    ring.len(),
                    self.params.m
                )));
            }
            let idx = b.add_ring(ring.iter().copied());
            b.stitch_matched(&prev, &idx);
            prev = idx;
        }
        if self.flip_end {
            for t in &mut b.tris[n_compact..] {
                t.swap(1, 2);
            }
        }
        b.verts.iter_mut().for_each(|p| *p = transform(p));
        b.build()
    }

    /// The graph ring at lateral radius `rho`, exact heights.
    pub fn graph_ring_at(&self, rho: f64) -> Result<Vec<Vec3>> {
        self.angles().iter().map(|&th| self.end.point(rho, th)).collect()
    }
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

/// Radius of the square `[-π, π]²` in direction `a`.
fn square_radius(a: f64) -> f64 {
    PI / a.cos().abs().max(a.sin().abs())
}

/// Snap coordinates within rounding of ±π onto the square's sides.
fn snap(x: f64) -> f64 {
    if (x.abs() - PI).abs() < 1e-9 {
        PI.copysign(x)
    } else {
        x
    }
}

/// Identify opposite sides of the fundamental square.
fn canonical(x: f64) -> i64 {
    let w = if (x + PI).abs() < 1e-9 { PI } else { x };
    (w * 1e9).round() as i64
}

fn check_increasing(ang: &[f64]) -> Result<()> {
    let n = ang.len();
    for i in 0..n {
        let d = (ang[(i + 1) % n] - ang[i]).rem_euclid(TAU);
        if !(d > 0.0 && d < PI) {
            return Err(Error::Graphicality(format!(
                "inner ring is not star-shaped in the parameter domain at index {i}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn geometric_radii(from: f64, to: f64, m: usize) -> Vec<f64> {
    if !(to > from) {
        return vec![];
    }
    let growth = 1.0 + TAU / m as f64;
    let n = ((to / from).ln() / growth.ln()).ceil().max(1.0) as usize;
    (1..=n).map(|k| from * (to / from).powf(k as f64 / n as f64)).collect()
}

/// Quintic Hermite basis on `[0, 1]`: `p0` has value 1 and `p1` slope 1 at 0, and
/// both vanish with zero slope and curvature at 1.
pub(crate) fn hermite(t: f64) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let p0 = 1.0 - (10.0 * t3 - 15.0 * t2 * t2 + 6.0 * t3 * t2);
    let p1 = t - 6.0 * t3 + 8.0 * t2 * t2 - 3.0 * t3 * t2;
    (p0, p1)
}

/// Inverted Clifford torus with its end cut off at lateral radius `outer`, with
/// exact heights everywhere; the boundary is not planar.
pub fn make_inverted_torus(params: InvertedTorusParams, outer: f64) -> Result<TriMesh> {
    let it = InvertedTorus::new(params)?;
    let rings = it
        .ring_radii(outer)
        .iter()
        .map(|&r| it.graph_ring_at(r))
        .collect::<Result<Vec<_>>>()?;
    it.assemble(&rings, |p| *p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams {
    pub handle: InvertedTorusParams,
    /// Lateral radius where the collar starts; heights are exact inside it.
    pub collar_radius: f64,
    /// Lateral radius of the planar boundary circle.
    pub cut_radius: f64,
}

impl Default for TruncationParams {
    fn default() -> Self {
        TruncationParams {
            handle: InvertedTorusParams::default(),
            collar_radius: 6.0,
            cut_radius: 24.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TruncatedTorus {
    pub mesh: TriMesh,
    /// Height of the planar boundary loop.
    pub boundary_height: f64,
    /// Signed turning angle at each boundary vertex, in loop order.
    pub turning_angles: Vec<f64>,
}

/// The inverted Clifford torus truncated at a planar convex curve. Inside the
/// collar radius the surface is exact; across the collar its height is blended
/// (value and slope, quintic) to the mean asymptotic level, where the boundary
/// circle lies.
pub fn make_truncated_inverted_torus(params: &TruncationParams) -> Result<TruncatedTorus> {
    let TruncationParams {
        handle,
        collar_radius: rc,
        cut_radius: rcut,
    } = *params;
    if !(rc > handle.graph_radius && rcut > rc) {
        return Err(Error::InvalidParameter(format!(
            "need graph radius < collar radius < cut radius (got {}, {rc}, {rcut})",
            handle.graph_radius
        )));
    }
    let it = InvertedTorus::new(handle)?;
    let level = it.end.mean_level();
    let mut rings = Vec::new();
    for r in it.ring_radii(rc) {
        rings.push(it.graph_ring_at(r)?);
    }
    let data: Vec<(f64, f64)> = it
        .angles()
        .iter()
        .map(|&th| it.end.height_and_slope(rc, th))
        .collect::<Result<_>>()?;
    for r in geometric_radii(rc, rcut, handle.m) {
        let t = (r - rc) / (rcut - rc);
        let (p0, p1) = hermite(t);
        let ring = it
            .angles()
            .iter()
            .zip(&data)
            .map(|(&th, &(z, dz))| {
                let h = if t >= 1.0 {
                    level
                } else {
                    level + (z - level) * p0 + dz * (rcut - rc) * p1
                };
                Vec3::new(r * th.cos(), r * th.sin(), h)
            })
            .collect();
        rings.push(ring);
    }
    let mesh = it.assemble(&rings, |p| *p)?;
    let turning_angles = turning_profile(&mesh);
    if let Some(k) = first_sign_change(&turning_angles) {
        return Err(Error::NonConvexBoundary(k));
    }
    Ok(TruncatedTorus {
        mesh,
        boundary_height: level,
        turning_angles,
    })
}

/// Signed turning angles of the (first) boundary loop projected to the xy-plane.
pub fn turning_profile(mesh: &TriMesh) -> Vec<f64> {
    let Some(lp) = boundary_loops(mesh).into_iter().next() else {
        return vec![];
    };
    let idx = &lp.vertex_indices;
    let n = idx.len();
    (0..n)
        .map(|k| {
            let a = mesh.vertices()[idx[(k + n - 1) % n]];
            let b = mesh.vertices()[idx[k]];
            let c = mesh.vertices()[idx[(k + 1) % n]];
            let (e1, e2) = (b - a, c - b);
            let cross = e1.x * e2.y - e1.y * e2.x;
            let dot = e1.x * e2.x + e1.y * e2.y;
            cross.atan2(dot)
        })
        .collect()
}

pub(crate) fn first_sign_change(angles: &[f64]) -> Option<usize> {
    let sign = angles.iter().find(|a| a.abs() > 1e-14)?.signum();
    angles.iter().position(|a| a * sign < -1e-14)
}
