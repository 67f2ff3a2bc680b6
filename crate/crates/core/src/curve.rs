//! Boundary curves: round circles and closed planar polylines.

use serde::{Deserialize, Serialize};

use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec3,
    pub radius: f64,
    /// Unit normal of the circle's plane.
    pub normal: Vec3,
}

impl Circle {
    pub fn new(center: Vec3, radius: f64) -> Self {
        Circle {
            center,
            radius,
            normal: Vec3::z(),
        }
    }

    /// The unit circle in the plane z = 0.
    pub fn unit() -> Self {
        Self::new(Vec3::zeros(), 1.0)
    }

    pub fn closest_point(&self, p: &Vec3) -> Vec3 {
        let d = p - self.center;
        let inplane = d - self.normal * d.dot(&self.normal);
        let n = inplane.norm();
        if n == 0.0 {
            // Every point of the circle is equidistant; pick a fixed one.
            let any = self.normal.cross(&Vec3::x());
            let any = if any.norm() < 1e-8 {
                self.normal.cross(&Vec3::y())
            } else {
                any
            };
            return self.center + any.normalize() * self.radius;
        }
        self.center + inplane * (self.radius / n)
    }

    /// Counter-clockwise unit tangent (about `normal`) at the point of the circle nearest `p`.
    pub fn tangent_at(&self, p: &Vec3) -> Vec3 {
        let r = self.closest_point(p) - self.center;
        self.normal.cross(&r).normalize()
    }

    pub fn distance(&self, p: &Vec3) -> f64 {
        (self.closest_point(p) - p).norm()
    }
}

/// The curve a surface boundary is constrained to during descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintCurve {
    Circle(Circle),
    /// Closed polyline; the last point connects back to the first.
    Polyline(Vec<Vec3>),
}

impl ConstraintCurve {
    pub fn closest_point(&self, p: &Vec3) -> Vec3 {
        match self {
            ConstraintCurve::Circle(c) => c.closest_point(p),
            ConstraintCurve::Polyline(pts) => {
                let mut best = pts[0];
                let mut best_d = f64::INFINITY;
                for i in 0..pts.len() {
                    let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
                    let q = closest_on_segment(p, &a, &b);
                    let d = (q - p).norm_squared();
                    if d < best_d {
                        best_d = d;
                        best = q;
                    }
                }
                best
            }
        }
    }

    /// Unit tangent of the curve near `p`.
    pub fn tangent_at(&self, p: &Vec3) -> Vec3 {
        match self {
            ConstraintCurve::Circle(c) => c.tangent_at(p),
            ConstraintCurve::Polyline(pts) => {
                let mut best = (f64::INFINITY, Vec3::x());
                for i in 0..pts.len() {
                    let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
                    let d = (closest_on_segment(p, &a, &b) - p).norm_squared();
                    if d < best.0 {
                        best = (d, (b - a).normalize());
                    }
                }
                best.1
            }
        }
    }

    pub fn distance(&self, p: &Vec3) -> f64 {
        (self.closest_point(p) - p).norm()
    }
}

pub fn closest_on_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> Vec3 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}
