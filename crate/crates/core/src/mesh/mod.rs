//! Indexed triangle mesh with boundary handling and validation.
//!
//! A [`TriMesh`] is immutable once built. Construction validates manifoldness,
//! orientation, boundary simplicity and triangle non-degeneracy, and caches the
//! half-edge style adjacency that the curvature operators need.

mod io;
mod topology;

use std::collections::HashMap;
use std::sync::Arc;

pub use io::{load_mesh, save_mesh, MeshFormat};
pub use topology::{boundary_loops, components, topology, BoundaryLoop, TopologyReport};

use crate::error::{Error, Result};
use crate::Vec3;

/// Default relative floor for triangle areas, in units of the squared mesh diameter.
pub const DEFAULT_AREA_FLOOR: f64 = 1e-12;

/// Undirected edge with its one or two incident faces.
#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub v: [usize; 2],
    pub faces: [usize; 2],
    /// `faces[1]` is meaningful only when this is false.
    pub boundary: bool,
}

#[derive(Debug)]
pub(crate) struct Connectivity {
    pub(crate) edges: Vec<Edge>,
    pub(crate) boundary: Vec<bool>,
    /// For a boundary vertex, the next vertex along its boundary loop (surface on the left).
    pub(crate) boundary_next: Vec<Option<usize>>,
    pub(crate) boundary_prev: Vec<Option<usize>>,
    /// CSR vertex -> incident faces.
    vf_offsets: Vec<usize>,
    vf_faces: Vec<usize>,
    /// CSR vertex -> neighbouring vertices.
    vv_offsets: Vec<usize>,
    vv_verts: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    conn: Arc<Connectivity>,
}

impl TriMesh {
    /// Build and validate a mesh using the default degeneracy floor.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::with_area_floor(vertices, triangles, DEFAULT_AREA_FLOOR)
    }

    pub fn with_area_floor(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        area_floor: f64,
    ) -> Result<Self> {
        let conn = build_connectivity(vertices.len(), &triangles)?;
        let mesh = TriMesh {
            vertices,
            triangles,
            conn: Arc::new(conn),
        };
        mesh.check_degenerate(area_floor)?;
        Ok(mesh)
    }

    /// Same connectivity, new positions. Only the degeneracy check is repeated.
    pub fn with_positions(&self, vertices: Vec<Vec3>) -> Result<Self> {
        self.with_positions_and_floor(vertices, DEFAULT_AREA_FLOOR)
    }

    pub fn with_positions_and_floor(&self, vertices: Vec<Vec3>, area_floor: f64) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} positions, got {}",
                self.vertices.len(),
                vertices.len()
            )));
        }
        let mesh = TriMesh {
            vertices,
            triangles: self.triangles.clone(),
            conn: Arc::clone(&self.conn),
        };
        mesh.check_degenerate(area_floor)?;
        Ok(mesh)
    }

    /// Apply `f` to every vertex position.
    pub fn map_positions<F: Fn(&Vec3) -> Vec3>(&self, f: F) -> Result<Self> {
        self.with_positions(self.vertices.iter().map(f).collect())
    }

    fn check_degenerate(&self, area_floor: f64) -> Result<()> {
        let d = self.diameter();
        let floor = area_floor * d * d;
        for (fi, _) in self.triangles.iter().enumerate() {
            let area = self.face_area(fi);
            if !(area > floor) {
                return Err(Error::Degenerate {
                    face: fi,
                    area,
                    floor,
                });
            }
        }
        if self.vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::Numerical("non-finite vertex coordinate".into()));
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.conn.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.conn.edges
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.conn.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.conn.boundary
    }

    pub fn is_closed(&self) -> bool {
        !self.conn.boundary.iter().any(|&b| b)
    }

    pub fn boundary_next(&self, v: usize) -> Option<usize> {
        self.conn.boundary_next[v]
    }

    pub fn boundary_prev(&self, v: usize) -> Option<usize> {
        self.conn.boundary_prev[v]
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.conn.vf_faces[self.conn.vf_offsets[v]..self.conn.vf_offsets[v + 1]]
    }

    pub fn vertex_neighbors(&self, v: usize) -> &[usize] {
        &self.conn.vv_verts[self.conn.vv_offsets[v]..self.conn.vv_offsets[v + 1]]
    }

    pub fn face_positions(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Unnormalized normal, twice the face area in length.
    pub fn face_normal_scaled(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_positions(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_normal_scaled(f).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_faces()).map(|f| self.face_area(f)).sum()
    }

    /// Area-weighted vertex normal.
    pub fn vertex_normal(&self, v: usize) -> Vec3 {
        let n: Vec3 = self
            .vertex_faces(v)
            .iter()
            .map(|&f| self.face_normal_scaled(f))
            .sum();
        n.normalize()
    }

    /// Bounding-box diagonal, used as the mesh diameter for relative tolerances.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn boundary_vertex_count(&self) -> usize {
        self.conn.boundary.iter().filter(|&&b| b).count()
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.conn.edges.iter().filter(|e| e.boundary).count()
    }

    /// Keep only the listed faces, dropping vertices no longer referenced.
    /// Returns the new mesh and the old-to-new vertex map.
    pub fn submesh(&self, keep_face: &[bool]) -> Result<(TriMesh, Vec<Option<usize>>)> {
        let mut remap = vec![None; self.num_vertices()];
        let mut verts = Vec::new();
        let mut tris = Vec::new();
        for (f, tri) in self.triangles.iter().enumerate() {
            if !keep_face[f] {
                continue;
            }
            let mut t = [0; 3];
            for k in 0..3 {
                let v = tri[k];
                t[k] = *remap[v].get_or_insert_with(|| {
                    verts.push(self.vertices[v]);
                    verts.len() - 1
                });
            }
            tris.push(t);
        }
        Ok((TriMesh::new(verts, tris)?, remap))
    }
}

fn build_connectivity(nv: usize, triangles: &[[usize; 3]]) -> Result<Connectivity> {
    let mut referenced = vec![false; nv];
    for (f, t) in triangles.iter().enumerate() {
        for &v in t {
            if v >= nv {
                return Err(Error::Topology(format!(
                    "face {f} references vertex {v} but there are only {nv}"
                )));
            }
            referenced[v] = true;
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(Error::Topology(format!("face {f} repeats a vertex: {t:?}")));
        }
    }
    if let Some(v) = referenced.iter().position(|&r| !r) {
        return Err(Error::Topology(format!("vertex {v} is not used by any face")));
    }
    if triangles.is_empty() {
        return Err(Error::Topology("mesh has no faces".into()));
    }

    // Undirected edges first so that a non-manifold edge is reported as such even
    // when it would also break orientation.
    let mut edge_index: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
    let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 3 / 2 + 3);
    let mut face_count: Vec<u8> = Vec::new();
    let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 3);
    for (f, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let e = *edge_index.entry(key).or_insert_with(|| {
                edges.push(Edge {
                    v: [key.0, key.1],
                    faces: [f, usize::MAX],
                    boundary: true,
                });
                face_count.push(0);
                edges.len() - 1
            });
            face_count[e] += 1;
            match face_count[e] {
                1 => {}
                2 => {
                    edges[e].faces[1] = f;
                    edges[e].boundary = false;
                }
                _ => {
                    return Err(Error::Topology(format!(
                        "non-manifold edge ({}, {}) shared by more than two faces",
                        key.0, key.1
                    )))
                }
            }
        }
    }
    for (f, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if let Some(g) = directed.insert((a, b), f) {
                return Err(Error::Topology(format!(
                    "inconsistent orientation: directed edge ({a}, {b}) appears in faces {g} and {f}"
                )));
            }
        }
    }

    let mut boundary = vec![false; nv];
    let mut boundary_next = vec![None; nv];
    let mut boundary_prev = vec![None; nv];
    for e in edges.iter().filter(|e| e.boundary) {
        // The face's own direction keeps the surface on the left.
        let (a, b) = if directed.contains_key(&(e.v[0], e.v[1])) {
            (e.v[0], e.v[1])
        } else {
            (e.v[1], e.v[0])
        };
        boundary[a] = true;
        boundary[b] = true;
        if boundary_next[a].replace(b).is_some() || boundary_prev[b].replace(a).is_some() {
            return Err(Error::Topology(format!(
                "boundary is not a union of simple loops at vertex {}",
                if boundary_next[a] == Some(b) { a } else { b }
            )));
        }
    }

    // CSR adjacency.
    let mut deg = vec![0usize; nv + 1];
    for t in triangles {
        for &v in t {
            deg[v + 1] += 1;
        }
    }
    for i in 0..nv {
        deg[i + 1] += deg[i];
    }
    let vf_offsets = deg.clone();
    let mut fill = deg;
    let mut vf_faces = vec![0; vf_offsets[nv]];
    for (f, t) in triangles.iter().enumerate() {
        for &v in t {
            vf_faces[fill[v]] = f;
            fill[v] += 1;
        }
    }

    let mut vv_offsets = vec![0usize; nv + 1];
    for e in &edges {
        vv_offsets[e.v[0] + 1] += 1;
        vv_offsets[e.v[1] + 1] += 1;
    }
    for i in 0..nv {
        vv_offsets[i + 1] += vv_offsets[i];
    }
    let mut fill = vv_offsets.clone();
    let mut vv_verts = vec![0; vv_offsets[nv]];
    for e in &edges {
        vv_verts[fill[e.v[0]]] = e.v[1];
        fill[e.v[0]] += 1;
        vv_verts[fill[e.v[1]]] = e.v[0];
        fill[e.v[1]] += 1;
    }

    let conn = Connectivity {
        edges,
        boundary,
        boundary_next,
        boundary_prev,
        vf_offsets,
        vf_faces,
        vv_offsets,
        vv_verts,
    };
    check_vertex_fans(&conn, triangles)?;
    Ok(conn)
}

/// Every vertex star must be a single fan: a cycle for interior vertices, a path
/// for boundary vertices.
fn check_vertex_fans(conn: &Connectivity, triangles: &[[usize; 3]]) -> Result<()> {
    let nv = conn.boundary.len();
    let mut next: HashMap<usize, usize> = HashMap::new();
    for v in 0..nv {
        next.clear();
        let faces = &conn.vf_faces[conn.vf_offsets[v]..conn.vf_offsets[v + 1]];
        for &f in faces {
            let t = triangles[f];
            let k = t.iter().position(|&x| x == v).unwrap();
            next.insert(t[(k + 1) % 3], t[(k + 2) % 3]);
        }
        let start = if conn.boundary[v] {
            conn.boundary_next[v].unwrap()
        } else {
            *next.keys().next().unwrap()
        };
        let mut cur = start;
        let mut steps = 0;
        while let Some(&n) = next.get(&cur) {
            steps += 1;
            cur = n;
            if cur == start || steps > faces.len() {
                break;
            }
        }
        if steps != faces.len() {
            return Err(Error::Topology(format!(
                "vertex {v} is non-manifold (its faces form more than one fan)"
            )));
        }
    }
    Ok(())
}
