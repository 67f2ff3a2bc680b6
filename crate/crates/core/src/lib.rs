//! Discrete Willmore energy for triangle meshes with boundary.
//!
//! The crate computes the energies `W`, `D` and `G` of a mesh, applies Möbius
//! transformations with singularity tracking, builds the competitor surfaces used
//! in the infimum argument (spheres, Clifford tori, inverted and truncated tori,
//! handles glued into disks), solves clamped-plate problems on annuli, evaluates
//! the boundary monotonicity formula, and minimizes `W` by gradient descent.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod biharmonic;
pub mod constructors;
pub mod curvature;
pub mod curve;
pub mod dual;
pub mod error;
pub mod mesh;
pub mod minimizer;
pub mod moebius;
pub mod monotonicity;
pub mod par;

pub use curvature::{curvature_field, energies, willmore_energy, CurvatureField, EnergyReport};
pub use curve::{Circle, ConstraintCurve};
pub use error::{Error, Result};
pub use mesh::{boundary_loops, load_mesh, save_mesh, topology, MeshFormat, TriMesh};

pub type Vec3 = nalgebra::Vector3<f64>;
