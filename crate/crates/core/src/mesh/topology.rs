use serde::{Deserialize, Serialize};

use super::TriMesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub euler_characteristic: i64,
    pub boundary_loop_count: usize,
    pub genus: i64,
    pub orientable: bool,
}

/// A closed boundary polygon, ordered with the surface on its left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub vertex_indices: Vec<usize>,
    pub length: f64,
}

/// Component label per vertex and the number of components.
pub fn components(mesh: &TriMesh) -> (Vec<usize>, usize) {
    let n = mesh.num_vertices();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in mesh.edges() {
        let (a, b) = (find(&mut parent, e.v[0]), find(&mut parent, e.v[1]));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    for v in 0..n {
        let r = find(&mut parent, v);
        if label[r] == usize::MAX {
            label[r] = count;
            count += 1;
        }
        label[v] = label[r];
    }
    (label, count)
}

pub fn topology(mesh: &TriMesh) -> Result<TopologyReport> {
    let (_, ncomp) = components(mesh);
    if ncomp != 1 {
        return Err(Error::Disconnected(ncomp));
    }
    let chi = mesh.num_vertices() as i64 - mesh.num_edges() as i64 + mesh.num_faces() as i64;
    let b = boundary_loops(mesh).len();
    let twice_g = 2 - b as i64 - chi;
    if twice_g < 0 || twice_g % 2 != 0 {
        return Err(Error::Topology(format!(
            "chi = {chi} with {b} boundary loops does not describe an orientable surface"
        )));
    }
    Ok(TopologyReport {
        euler_characteristic: chi,
        boundary_loop_count: b,
        genus: twice_g / 2,
        // Validation rejects inconsistent orientation, so every TriMesh is oriented.
        orientable: true,
    })
}

pub fn boundary_loops(mesh: &TriMesh) -> Vec<BoundaryLoop> {
    let n = mesh.num_vertices();
    let mut seen = vec![false; n];
    let mut loops = Vec::new();
    for start in 0..n {
        if seen[start] || !mesh.is_boundary_vertex(start) {
            continue;
        }
        let mut idx = Vec::new();
        let mut length = 0.0;
        let mut cur = start;
        loop {
            seen[cur] = true;
            idx.push(cur);
            let next = mesh
                .boundary_next(cur)
                .expect("validated boundary vertices have a successor");
            length += (mesh.vertices()[next] - mesh.vertices()[cur]).norm();
            cur = next;
            if cur == start {
                break;
            }
        }
        loops.push(BoundaryLoop {
            vertex_indices: idx,
            length,
        });
    }
    loops
}
