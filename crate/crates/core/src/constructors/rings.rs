//! Incremental mesh assembly from concentric rings of vertices.

use std::f64::consts::TAU;

use crate::error::Result;
use crate::mesh::TriMesh;
use crate::Vec3;

#[derive(Debug, Default, Clone)]
pub(crate) struct MeshBuilder {
    pub verts: Vec<Vec3>,
    pub tris: Vec<[usize; 3]>,
}

impl MeshBuilder {
    pub fn add(&mut self, p: Vec3) -> usize {
        self.verts.push(p);
        self.verts.len() - 1
    }

    pub fn add_ring<I: IntoIterator<Item = Vec3>>(&mut self, pts: I) -> Vec<usize> {
        pts.into_iter().map(|p| self.add(p)).collect()
    }

    /// Triangles `(c, r_m, r_m+1)`; counter-clockwise when the ring is.
    pub fn fan(&mut self, center: usize, ring: &[usize], closed: bool) {
        let n = ring.len();
        let last = if closed { n } else { n - 1 };
        for m in 0..last {
            self.tris.push([center, ring[m], ring[(m + 1) % n]]);
        }
    }

    /// Triangulate the strip between two rings ordered by increasing angle, the
    /// outer one further from the centre. Angles must be increasing and span less
    /// than a full turn; for closed rings they are compared modulo 2π.
    pub fn stitch(
        &mut self,
        inner: &[usize],
        inner_ang: &[f64],
        outer: &[usize],
        outer_ang: &[f64],
        closed: bool,
    ) {
        let (ni, no) = (inner.len(), outer.len());
        if !closed {
            let (mut i, mut j) = (0, 0);
            while i + 1 < ni || j + 1 < no {
                let adv_inner = if i + 1 == ni {
                    false
                } else if j + 1 == no {
                    true
                } else {
                    inner_ang[i + 1] < outer_ang[j + 1]
                };
                if adv_inner {
                    self.tris.push([inner[i], outer[j], inner[i + 1]]);
                    i += 1;
                } else {
                    self.tris.push([inner[i], outer[j], outer[j + 1]]);
                    j += 1;
                }
            }
            return;
        }
        // Rotate the outer ring so it starts at the first angle at or after inner[0].
        let a0 = inner_ang[0];
        let rel = |x: f64| (x - a0).rem_euclid(TAU);
        let start = (0..no)
            .min_by(|&p, &q| rel(outer_ang[p]).total_cmp(&rel(outer_ang[q])))
            .unwrap();
        let o = |j: usize| outer[(start + j) % no];
        let oa = |j: usize| {
            if j == no {
                TAU + rel(outer_ang[start])
            } else {
                rel(outer_ang[(start + j) % no])
            }
        };
        let ia = |i: usize| if i == ni { TAU } else { rel(inner_ang[i]) };
        let (mut i, mut j) = (0, 0);
        while i < ni || j < no {
            let adv_inner = if i == ni {
                false
            } else if j == no {
                true
            } else {
                ia(i + 1) < oa(j + 1)
            };
            if adv_inner {
                self.tris.push([inner[i % ni], o(j), inner[(i + 1) % ni]]);
                i += 1;
            } else {
                self.tris.push([inner[i % ni], o(j), o(j + 1)]);
                j += 1;
            }
        }
    }

    /// Stitch two closed rings with the same vertex count whose `m`-th vertices
    /// are matched, splitting each quad along its shorter diagonal.
    pub fn stitch_matched(&mut self, inner: &[usize], outer: &[usize]) {
        let n = inner.len();
        debug_assert_eq!(n, outer.len());
        for m in 0..n {
            let (a, b) = (inner[m], inner[(m + 1) % n]);
            let (c, d) = (outer[m], outer[(m + 1) % n]);
            let ad = (self.verts[a] - self.verts[d]).norm();
            let bc = (self.verts[b] - self.verts[c]).norm();
            if ad <= bc {
                self.tris.push([a, c, d]);
                self.tris.push([a, d, b]);
            } else {
                self.tris.push([a, c, b]);
                self.tris.push([b, c, d]);
            }
        }
    }

    pub fn build(self) -> Result<TriMesh> {
        TriMesh::new(self.verts, self.tris)
    }
}

/// `n` equally spaced angles starting at `offset·(2π/n)`.
pub(crate) fn ring_angles(n: usize, offset: f64) -> Vec<f64> {
    (0..n).map(|m| TAU * (m as f64 + offset) / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::topology;

    #[test]
    fn stitching_rings_of_different_sizes_gives_annulus() {
        let mut b = MeshBuilder::default();
        let a1 = ring_angles(7, 0.3);
        let a2 = ring_angles(12, 0.9);
        let r1 = b.add_ring(a1.iter().map(|t| Vec3::new(t.cos(), t.sin(), 0.0)));
        let r2 = b.add_ring(a2.iter().map(|t| Vec3::new(2.0 * t.cos(), 2.0 * t.sin(), 0.0)));
        b.stitch(&r1, &a1, &r2, &a2, true);
        let m = b.build().unwrap();
        assert_eq!(m.num_faces(), 19);
        assert_eq!(topology(&m).unwrap().euler_characteristic, 0);
        for f in 0..m.num_faces() {
            assert!(m.face_normal_scaled(f).z > 0.0);
        }
    }
}
