//! Gluing a scaled asymptotically flat handle into a planar region.

use serde::{Deserialize, Serialize};

use super::rings::{ring_angles, MeshBuilder};
use super::torus::{geometric_radii, hermite, InvertedTorus, InvertedTorusParams};
use super::disk_ring_counts;
use crate::curvature::curvature_field;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::Vec3;

/// Planar closed curve in z = 0, star-shaped with respect to the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StarCurve {
    Circle { radius: f64 },
    /// Vertices in counter-clockwise order.
    Polyline(Vec<[f64; 2]>),
}

impl StarCurve {
    /// Distance from the origin to the curve along direction `theta`.
    pub fn radius_at(&self, theta: f64) -> Result<f64> {
        match self {
            StarCurve::Circle { radius } => Ok(*radius),
            StarCurve::Polyline(pts) => {
                let d = [theta.cos(), theta.sin()];
                let n = pts.len();
                let mut best: Option<f64> = None;
                for i in 0..n {
                    let (a, b) = (pts[i], pts[(i + 1) % n]);
                    let e = [b[0] - a[0], b[1] - a[1]];
                    // Solve t·d = a + s·e.
                    let det = d[0] * (-e[1]) - d[1] * (-e[0]);
                    if det.abs() < 1e-15 {
                        continue;
                    }
                    let t = (a[0] * (-e[1]) - a[1] * (-e[0])) / det;
                    let s = (d[0] * a[1] - d[1] * a[0]) / det;
                    if (-1e-12..=1.0 + 1e-12).contains(&s) && t > 0.0 {
                        best = Some(best.map_or(t, |b: f64| b.min(t)));
                    }
                }
                best.ok_or_else(|| {
                    Error::InvalidParameter(format!("curve does not meet the ray at angle {theta}"))
                })
            }
        }
    }

    fn check_star_shaped(&self) -> Result<()> {
        if let StarCurve::Polyline(pts) = self {
            let n = pts.len();
            if n < 3 {
                return Err(Error::InvalidParameter("polyline needs at least 3 points".into()));
            }
            for i in 0..n {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                if a[0] * b[1] - a[1] * b[0] <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "polyline is not star-shaped about the origin at segment {i}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlueHandle {
    /// No handle: the result is planar.
    Flat,
    InvertedTorus(InvertedTorusParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueParams {
    pub handle: GlueHandle,
    /// Handle scale `s ∈ (0, 1/4)`.
    pub scale: f64,
    pub gamma: StarCurve,
    /// Vertices per ring when the handle is flat.
    pub flat_resolution: usize,
}

#[derive(Debug, Clone)]
pub struct GlueReport {
    pub mesh: TriMesh,
    /// W over interior vertices with lateral radius in `[1/2, 1]`.
    pub eps_annulus: f64,
    /// W over interior vertices inside radius 1/2.
    pub w_inner: f64,
    /// W over interior vertices outside radius 1.
    pub w_outer: f64,
    pub w: f64,
}

/// Scale the handle by `s` (its mean asymptotic level moved to z = 0), keep it
/// unchanged inside radius 1/2, blend its heights to zero over `1/2 ≤ r ≤ 1` with
/// a quintic in `r` matching value and radial slope at 1/2, and fill the plane
/// out to `Γ`.
pub fn glue_handle_into_disk(params: &GlueParams) -> Result<GlueReport> {
    let s = params.scale;
    if !(s > 0.0 && s < 0.25) {
        return Err(Error::InvalidParameter(format!("handle scale must be in (0, 1/4), got {s}")));
    }
    params.gamma.check_star_shaped()?;

    let (mut b, last_ring, m) = match params.handle {
        GlueHandle::Flat => {
            let m = params.flat_resolution;
            if m < 8 {
                return Err(Error::InvalidParameter(format!("flat resolution {m} below 8")));
            }
            let (b, ring) = flat_inner_disk(m);
            (b, ring, m)
        }
        GlueHandle::InvertedTorus(hp) => {
            let it = InvertedTorus::new(hp)?;
            let rho0 = 0.5 / s;
            if rho0 <= hp.graph_radius {
                return Err(Error::Graphicality(format!(
                    "scale {s} puts radius 1/2 at handle radius {rho0}, inside the graph radius {}",
                    hp.graph_radius
                )));
            }
            let level = it.end.mean_level();
            let to_glued = |p: &Vec3| (p - Vec3::new(0.0, 0.0, level)) * s;
            let from_glued = |p: Vec3| p / s + Vec3::new(0.0, 0.0, level);

            let mut rings = Vec::new();
            for r in it.ring_radii(rho0) {
                rings.push(it.graph_ring_at(r)?);
            }
            let angles = it.angles();
            let data: Vec<(f64, f64)> = angles
                .iter()
                .map(|&th| it.end.height_and_slope(rho0, th))
                .collect::<Result<_>>()?;
            for r in geometric_radii(0.5, 1.0, hp.m) {
                let t = (r - 0.5) / 0.5;
                let (p0, p1) = hermite(t);
                rings.push(
                    angles
                        .iter()
                        .zip(&data)
                        .map(|(&th, &(z, dz))| {
                            let h = if t >= 1.0 { 0.0 } else { s * (z - level) * p0 + dz * 0.5 * p1 };
                            from_glued(Vec3::new(r * th.cos(), r * th.sin(), h))
                        })
                        .collect(),
                );
            }
            let mesh = it.assemble(&rings, to_glued)?;
            // Re-enter the builder with the glued positions so the flat part can be added.
            let m = hp.m;
            let n = mesh.num_vertices();
            let b = MeshBuilder {
                verts: mesh.vertices().to_vec(),
                tris: mesh.triangles().to_vec(),
            };
            let ring: Vec<usize> = (n - m..n).collect();
            (b, ring, m)
        }
    };

    // Flat region from radius 1 out to Γ along rays.
    let angles = ring_angles(m, 0.0);
    let outer: Vec<f64> = angles
        .iter()
        .map(|&th| params.gamma.radius_at(th))
        .collect::<Result<_>>()?;
    if let Some(k) = outer.iter().position(|&r| !(r > 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "Γ does not enclose the unit disk (radius {} at angle {})",
            outer[k], angles[k]
        )));
    }
    let mean_outer = outer.iter().sum::<f64>() / m as f64;
    let n_flat = geometric_radii(1.0, mean_outer, m).len().max(1);
    let mut prev = last_ring;
    let existing_forward = ring_traversed_forward(&b, &prev);
    for k in 1..=n_flat {
        let f = k as f64 / n_flat as f64;
        let ring: Vec<usize> = angles
            .iter()
            .zip(&outer)
            .map(|(&th, &ro)| {
                let r = ro.powf(f);
                b.add(Vec3::new(r * th.cos(), r * th.sin(), 0.0))
            })
            .collect();
        let start = b.tris.len();
        b.stitch_matched(&prev, &ring);
        if !existing_forward {
            for t in &mut b.tris[start..] {
                t.swap(1, 2);
            }
        }
        prev = ring;
    }
    let mesh = b.build()?;
    let (eps_annulus, w_inner, w_outer) = split_energy(&mesh)?;
    Ok(GlueReport {
        mesh,
        eps_annulus,
        w_inner,
        w_outer,
        w: eps_annulus + w_inner + w_outer,
    })
}

/// Whether the triangles already present traverse `ring` forwards (`r[0] → r[1]`),
/// as a matched strip does along its outer ring. If not, new strips outside it
/// must be flipped.
fn ring_traversed_forward(b: &MeshBuilder, ring: &[usize]) -> bool {
    let (a, c) = (ring[0], ring[1]);
    b.tris
        .iter()
        .any(|t| (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == c))
}

/// Flat polar disk of radius 1/2 whose rim has `m` vertices at the standard angles.
fn flat_inner_disk(m: usize) -> (MeshBuilder, Vec<usize>) {
    let counts = disk_ring_counts(m);
    let k_rings = counts.len();
    let mut b = MeshBuilder::default();
    let center = b.add(Vec3::zeros());
    let mut prev: Option<(Vec<usize>, Vec<f64>)> = None;
    for (k, &n) in counts.iter().enumerate() {
        let r = 0.5 * (k + 1) as f64 / k_rings as f64;
        let n = if k + 1 == k_rings { m } else { n };
        let ang = ring_angles(n, 0.0);
        let ring = b.add_ring(ang.iter().map(|&t| Vec3::new(r * t.cos(), r * t.sin(), 0.0)));
        match &prev {
            None => b.fan(center, &ring, true),
            Some((pr, pa)) => b.stitch(pr, pa, &ring, &ang, true),
        }
        prev = Some((ring, ang));
    }
    let ring = prev.unwrap().0;
    // Continue outwards with matched strips at radii in (1/2, 1].
    let mut last = ring;
    let ang = ring_angles(m, 0.0);
    for r in geometric_radii(0.5, 1.0, m) {
        let ring = b.add_ring(ang.iter().map(|&t| Vec3::new(r * t.cos(), r * t.sin(), 0.0)));
        b.stitch_matched(&last, &ring);
        last = ring;
    }
    (b, last)
}

/// W split by lateral radius: `[1/2, 1]`, inside, outside.
fn split_energy(mesh: &TriMesh) -> Result<(f64, f64, f64)> {
    let f = curvature_field(mesh)?;
    let (mut ann, mut inner, mut outer) = (0.0, 0.0, 0.0);
    for v in 0..mesh.num_vertices() {
        if !f.is_interior(v) {
            continue;
        }
        let p = mesh.vertices()[v];
        let r = p.x.hypot(p.y);
        let w = f.mean_curvature[v].norm_squared() * f.vertex_area[v];
        if r < 0.5 - 1e-12 {
            inner += w;
        } else if r <= 1.0 + 1e-12 {
            ann += w;
        } else {
            outer += w;
        }
    }
    Ok((ann, inner, outer))
}
