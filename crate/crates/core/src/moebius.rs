//! Conformal maps of R³: isometries, homotheties and spherical inversions.
//!
//! A [`MoebiusMap`] is a composition chain stored outermost first, so
//! `[f, g, h]` means `f ∘ g ∘ h` and `h` is applied first. This is also the
//! JSON layout.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, Unit};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{energies, willmore_energy};
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::{par, Vec3};

pub const DEFAULT_GUARD: f64 = 1e-3;
pub const DEFAULT_DELTA: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Primitive {
    #[serde(rename = "rot")]
    Rotation([[f64; 3]; 3]),
    #[serde(rename = "tr")]
    Translation([f64; 3]),
    #[serde(rename = "scale")]
    Scaling(f64),
    /// `p ↦ c + r²(p−c)/|p−c|²`, an involution.
    #[serde(rename = "inv")]
    Inversion { r: f64, c: [f64; 3] },
}

/// A point of R³ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtPoint {
    Finite(Vec3),
    Infinity,
}

impl Primitive {
    pub fn rotation(m: &Matrix3<f64>) -> Self {
        Primitive::Rotation(std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])))
    }

    pub fn translation(t: Vec3) -> Self {
        Primitive::Translation([t.x, t.y, t.z])
    }

    pub fn inversion(r: f64, c: Vec3) -> Self {
        Primitive::Inversion { r, c: [c.x, c.y, c.z] }
    }

    fn matrix(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| m[i][j])
    }

    fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Primitive::Rotation(m) => {
                let m = Self::matrix(m);
                if !finite(m.as_slice())
                    || (m.transpose() * m - Matrix3::identity()).norm() > 1e-9
                    || (m.determinant() - 1.0).abs() > 1e-9
                {
                    return Err(Error::InvalidParameter("rotation matrix is not in SO(3)".into()));
                }
            }
            Primitive::Translation(t) if !finite(t) => {
                return Err(Error::InvalidParameter("translation is not finite".into()))
            }
            Primitive::Scaling(a) if !(a.is_finite() && *a > 0.0) => {
                return Err(Error::InvalidParameter(format!("scaling factor {a} must be positive")))
            }
            Primitive::Inversion { r, c } if !(r.is_finite() && *r > 0.0 && finite(c)) => {
                return Err(Error::InvalidParameter(format!("inversion radius {r} must be positive")))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn inverse(&self) -> Primitive {
        match self {
            Primitive::Rotation(m) => Primitive::rotation(&Self::matrix(m).transpose()),
            Primitive::Translation(t) => Primitive::Translation([-t[0], -t[1], -t[2]]),
            Primitive::Scaling(a) => Primitive::Scaling(1.0 / a),
            inv @ Primitive::Inversion { .. } => inv.clone(),
        }
    }

    pub fn eval(&self, p: ExtPoint) -> ExtPoint {
        let p = match (self, p) {
            (Primitive::Inversion { c, .. }, ExtPoint::Infinity) => {
                return ExtPoint::Finite(Vec3::from(*c))
            }
            (_, ExtPoint::Infinity) => return ExtPoint::Infinity,
            (_, ExtPoint::Finite(p)) => p,
        };
        ExtPoint::Finite(match self {
            Primitive::Rotation(m) => Self::matrix(m) * p,
            Primitive::Translation(t) => p + Vec3::from(*t),
            Primitive::Scaling(a) => p * *a,
            Primitive::Inversion { r, c } => {
                let c = Vec3::from(*c);
                let d = p - c;
                let d2 = d.norm_squared();
                if d2 == 0.0 {
                    return ExtPoint::Infinity;
                }
                c + d * (r * r / d2)
            }
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MoebiusMap {
    chain: Vec<Primitive>,
}

impl MoebiusMap {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Build from a chain written outermost first.
    pub fn new(chain: Vec<Primitive>) -> Result<Self> {
        for p in &chain {
            p.validate()?;
        }
        Ok(Self { chain })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: MoebiusMap = serde_json::from_str(s)?;
        Self::new(raw.chain)
    }

    pub fn chain(&self) -> &[Primitive] {
        &self.chain
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MoebiusMap) -> MoebiusMap {
        let mut chain = self.chain.clone();
        chain.extend(inner.chain.iter().cloned());
        MoebiusMap { chain }
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap {
            chain: self.chain.iter().rev().map(Primitive::inverse).collect(),
        }
    }

    pub fn eval_ext(&self, p: ExtPoint) -> ExtPoint {
        self.chain.iter().rev().fold(p, |acc, f| f.eval(acc))
    }

    /// `None` when `p` is sent to infinity.
    pub fn eval(&self, p: &Vec3) -> Option<Vec3> {
        match self.eval_ext(ExtPoint::Finite(*p)) {
            ExtPoint::Finite(q) => Some(q),
            ExtPoint::Infinity => None,
        }
    }

    /// Points of R³ sent to infinity. Intermediate passes through infinity that
    /// come back finite (a removable point such as `F(v) = v`) are not singular.
    pub fn singular_points(&self) -> Vec<Vec3> {
        match self.inverse().eval_ext(ExtPoint::Infinity) {
            ExtPoint::Finite(p) => vec![p],
            ExtPoint::Infinity => Vec::new(),
        }
    }

    /// Central-difference Jacobian at `p`.
    pub fn jacobian_fd(&self, p: &Vec3, h: f64) -> Option<Matrix3<f64>> {
        let mut j = Matrix3::zeros();
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            let d = (self.eval(&(p + e))? - self.eval(&(p - e))?) / (2.0 * h);
            j.set_column(k, &d);
        }
        Some(j)
    }
}

/// Vertices within `guard·diam` of a singular point, closest first.
fn guard_violations(map: &MoebiusMap, mesh: &TriMesh, guard: f64) -> Option<Error> {
    let limit = guard * mesh.diameter();
    for s in map.singular_points() {
        let mut bad: Vec<(usize, f64)> = mesh
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| (i, (v - s).norm()))
            .filter(|&(_, d)| d <= limit)
            .collect();
        if !bad.is_empty() {
            bad.sort_by(|a, b| a.1.total_cmp(&b.1));
            return Some(Error::Singularity { point: s, offending: bad });
        }
    }
    None
}

/// Map every vertex; connectivity and face order are kept as they are.
///
/// Möbius maps preserve angles, so a triangle of the image is only as degenerate
/// as its preimage. The image is checked for positive areas, not against the
/// diameter-relative floor, which an inverted multi-scale mesh cannot meet.
pub fn apply(map: &MoebiusMap, mesh: &TriMesh, guard: f64) -> Result<TriMesh> {
    if let Some(e) = guard_violations(map, mesh, guard) {
        return Err(e);
    }
    if map.chain.is_empty() {
        return Ok(mesh.clone());
    }
    let pts = par::map_slice(mesh.vertices(), |v| map.eval(v));
    let mut out = Vec::with_capacity(pts.len());
    for (i, p) in pts.into_iter().enumerate() {
        match p {
            Some(p) if p.iter().all(|x| x.is_finite()) => out.push(p),
            _ => {
                return Err(Error::Singularity {
                    point: mesh.vertices()[i],
                    offending: vec![(i, 0.0)],
                })
            }
        }
    }
    mesh.with_positions_and_floor(out, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StraighteningParams {
    pub v: Vec3,
    pub alpha: f64,
    /// Rotation angle about the y axis `{x = z = 0}`.
    pub angle: f64,
}

impl Default for StraighteningParams {
    fn default() -> Self {
        Self {
            v: Vec3::new(-1.0, 0.0, 0.0),
            alpha: 0.5,
            angle: 0.0,
        }
    }
}

/// `I⁻¹ ∘ T_{−v/2} ∘ R ∘ D_α ∘ T_{v/2} ∘ I` with `I(p) = (p−v)/|p−v|²`.
///
/// `I` is the unit inversion about `v` followed by `T_{−v}`, so both outer
/// translations fold into the neighbouring ones. Fixes the unit circle as a set
/// and `v` as a point, with differential `R/α` there.
pub fn straightening_map(params: &StraighteningParams) -> Result<MoebiusMap> {
    let StraighteningParams { v, alpha, angle } = *params;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let rot = Rotation3::from_axis_angle(&Vec3::y_axis(), angle);
    MoebiusMap::new(vec![
        Primitive::inversion(1.0, v),
        Primitive::translation(v / 2.0),
        Primitive::rotation(rot.matrix()),
        Primitive::Scaling(alpha),
        Primitive::translation(-v / 2.0),
        Primitive::inversion(1.0, v),
    ])
}

fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let p = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = p.norm();
        if n > 1e-3 && n <= 1.0 {
            return p / n;
        }
    }
}

/// A random inversion-containing map whose singular point stays at least
/// `min_distance·diam` away from every vertex.
pub fn random_map<R: Rng>(rng: &mut R, mesh: &TriMesh, min_distance: f64) -> MoebiusMap {
    let diam = mesh.diameter();
    let (lo, hi) = mesh.bounding_box();
    let center = (lo + hi) / 2.0;
    loop {
        let axis = Unit::new_normalize(random_unit(rng));
        let rot = Rotation3::from_axis_angle(&axis, rng.random_range(0.0..2.0 * PI));
        let c = center + random_unit(rng) * diam * rng.random_range(0.5..1.5);
        let map = MoebiusMap::new(vec![
            Primitive::translation(random_unit(rng) * diam * rng.random_range(0.0..1.0)),
            Primitive::rotation(rot.matrix()),
            Primitive::Scaling(rng.random_range(0.5..2.0)),
            Primitive::inversion(diam * rng.random_range(0.5..1.5), c),
        ])
        .expect("random primitives are valid");
        if guard_violations(&map, mesh, min_distance).is_none() {
            return map;
        }
    }
}

/// Closest point to `p` on triangle `abc`.
pub fn closest_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(&ap), ac.dot(&ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(&bp), ac.dot(&bp));
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(&cp), ac.dot(&cp));
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Edge-path distances from the seeds, explored only up to `radius`.
fn geodesic_ball(mesh: &TriMesh, seeds: &[(usize, f64)], radius: f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; mesh.num_vertices()];
    let mut heap = BinaryHeap::new();
    for &(v, d) in seeds {
        if d < dist[v] {
            dist[v] = d;
            heap.push(Reverse((d.to_bits(), v)));
        }
    }
    let pos = mesh.vertices();
    while let Some(Reverse((bits, v))) = heap.pop() {
        let d = f64::from_bits(bits);
        if d > dist[v] || d >= radius {
            continue;
        }
        for &u in mesh.vertex_neighbors(v) {
            let nd = d + (pos[u] - pos[v]).norm();
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Reverse((nd.to_bits(), u)));
            }
        }
    }
    dist
}

/// Drop the given faces, then keep dropping the fans of any vertex left as a
/// bowtie, so the result is again a manifold mesh.
fn remove_faces(mesh: &TriMesh, mut drop: Vec<bool>) -> Result<TriMesh> {
    let tris = mesh.triangles();
    loop {
        let mut changed = false;
        for v in 0..mesh.num_vertices() {
            let fan = mesh.vertex_faces(v);
            let kept: Vec<usize> = fan.iter().copied().filter(|&f| !drop[f]).collect();
            if kept.is_empty() || kept.len() == fan.len() {
                continue;
            }
            let mut others: Vec<usize> = kept
                .iter()
                .flat_map(|&f| tris[f].iter().copied().filter(move |&u| u != v))
                .collect();
            others.sort_unstable();
            let shared = others.windows(2).filter(|w| w[0] == w[1]).count();
            if kept.len() - shared > 1 {
                for &f in fan {
                    drop[f] = true;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let keep: Vec<bool> = drop.iter().map(|d| !d).collect();
    if !keep.iter().any(|&k| k) {
        return Err(Error::InvalidParameter("excision removes the whole mesh".into()));
    }
    Ok(mesh.submesh(&keep)?.0)
}

/// Remove a geodesic `δ`-disk around every sheet of `mesh` passing within `δ`
/// of `c`. Returns the excised mesh and the number of disks removed.
pub fn excise_near(mesh: &TriMesh, c: &Vec3, delta: f64) -> Result<(TriMesh, usize)> {
    let nf = mesh.num_faces();
    let near: Vec<f64> = par::map_indexed(nf, |f| {
        let [a, b, d] = mesh.face_positions(f);
        (closest_on_triangle(c, &a, &b, &d) - c).norm()
    });
    let close: Vec<bool> = near.iter().map(|&d| d < delta).collect();
    if !close.iter().any(|&x| x) {
        return Ok((mesh.clone(), 0));
    }

    // Sheets: components of the close faces under edge adjacency.
    let mut label = vec![usize::MAX; nf];
    let mut sheets = Vec::new();
    for start in 0..nf {
        if !close[start] || label[start] != usize::MAX {
            continue;
        }
        let id = sheets.len();
        let mut members = vec![start];
        label[start] = id;
        let mut i = 0;
        while i < members.len() {
            let f = members[i];
            i += 1;
            for &v in &mesh.triangles()[f] {
                for &g in mesh.vertex_faces(v) {
                    let shares_edge = mesh.triangles()[g].iter().filter(|u| mesh.triangles()[f].contains(u)).count() == 2;
                    if close[g] && label[g] == usize::MAX && shares_edge {
                        label[g] = id;
                        members.push(g);
                    }
                }
            }
        }
        sheets.push(members);
    }

    let pos = mesh.vertices();
    let mut drop = vec![false; nf];
    let mut seeds = Vec::new();
    for members in &sheets {
        let nearest = *members.iter().min_by(|&&a, &&b| near[a].total_cmp(&near[b])).unwrap();
        drop[nearest] = true;
        let v = *mesh.triangles()[nearest]
            .iter()
            .min_by(|&&a, &&b| (pos[a] - c).norm().total_cmp(&(pos[b] - c).norm()))
            .unwrap();
        seeds.push((v, (pos[v] - c).norm()));
    }
    let dist = geodesic_ball(mesh, &seeds, delta);
    for (v, d) in dist.iter().enumerate() {
        if *d < delta {
            for &f in mesh.vertex_faces(v) {
                drop[f] = true;
            }
        }
    }
    Ok((remove_faces(mesh, drop)?, sheets.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionCheck {
    pub w_before: f64,
    pub w_after: f64,
    pub preimage_count: usize,
}

/// Invert a closed mesh about `c`, excising geodesic `δ`-disks (absolute
/// length) where the surface passes near `c`.
pub fn inversion_energy_check(mesh: &TriMesh, c: &Vec3, delta: f64, guard: f64) -> Result<InversionCheck> {
    if !mesh.is_closed() {
        return Err(Error::InvalidParameter("inversion check needs a closed mesh".into()));
    }
    let w_before = willmore_energy(mesh)?;
    let (cut, preimage_count) = excise_near(mesh, c, delta)?;
    let inv = MoebiusMap::new(vec![Primitive::inversion(mesh.diameter(), *c)])?;
    let guard = guard * mesh.diameter() / cut.diameter();
    let out = apply(&inv, &cut, guard)?;
    Ok(InversionCheck {
        w_before,
        w_after: willmore_energy(&out)?,
        preimage_count,
    })
}

#[derive(Debug, Clone)]
pub struct LineInversion {
    pub mesh_out: TriMesh,
    pub lhs: f64,
    pub rhs: f64,
}

/// Excise the geodesic `δ`-ball around boundary point `p` and invert about it,
/// turning the boundary circle into a near-straight line.
/// `lhs = (W+G)(mesh)`, `rhs = W(mesh_out) + 2π`.
pub fn line_boundary_inversion(mesh: &TriMesh, p: &Vec3, delta: f64) -> Result<LineInversion> {
    let diam = mesh.diameter();
    let (vp, dp) = mesh
        .vertices()
        .iter()
        .enumerate()
        .filter(|(i, _)| mesh.is_boundary_vertex(*i))
        .map(|(i, v)| (i, (v - p).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InvalidParameter("mesh has no boundary".into()))?;
    if dp > 1e-9 * diam {
        return Err(Error::InvalidParameter(format!(
            "point is {dp:e} away from the nearest boundary vertex"
        )));
    }
    let report = energies(mesh)?;
    // A face sharing a cyclic quad with p maps to a segment, so p's neighbours
    // always go too.
    let ring = mesh
        .vertex_neighbors(vp)
        .iter()
        .map(|&u| (mesh.vertices()[u] - mesh.vertices()[vp]).norm())
        .fold(0.0, f64::max);
    let delta = delta.max(1.01 * ring);
    let dist = geodesic_ball(mesh, &[(vp, 0.0)], delta);
    let mut drop = vec![false; mesh.num_faces()];
    for (v, d) in dist.iter().enumerate() {
        if *d < delta {
            for &f in mesh.vertex_faces(v) {
                drop[f] = true;
            }
        }
    }
    let cut = remove_faces(mesh, drop)?;
    let inv = MoebiusMap::new(vec![Primitive::inversion(diam, mesh.vertices()[vp])])?;
    let mesh_out = apply(&inv, &cut, 0.0)?;
    Ok(LineInversion {
        lhs: report.w_plus_g(),
        rhs: willmore_energy(&mesh_out)? + 2.0 * PI,
        mesh_out,
    })
}
