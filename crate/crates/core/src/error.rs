use thiserror::Error;

use crate::Vec3;

/// Everything that can go wrong inside the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("degenerate triangle {face}: area {area:e} below floor {floor:e}")]
    Degenerate { face: usize, area: f64, floor: f64 },

    #[error("mesh has {0} connected components, expected 1")]
    Disconnected(usize),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("boundary vertex {vertex} is {distance:e} away from the circle (limit {limit:e})")]
    BoundaryMismatch {
        vertex: usize,
        distance: f64,
        limit: f64,
    },

    #[error("{} vertices too close to a singular point (closest: vertex {} at distance {:e})",
        .offending.len(), .offending.first().map(|o| o.0).unwrap_or(0),
        .offending.first().map(|o| o.1).unwrap_or(0.0))]
    Singularity {
        point: Vec3,
        /// `(vertex, distance)` pairs, closest first.
        offending: Vec<(usize, f64)>,
    },

    #[error("stereographic pole lies on the torus")]
    PoleOnSurface,

    #[error("boundary is not convex: turning angle changes sign at loop position {0}")]
    NonConvexBoundary(usize),

    #[error("surface is not graphical over the annulus: {0}")]
    Graphicality(String),

    #[error("mode {mode}: 4x4 system condition number {cond:e} exceeds 1e12")]
    IllConditioned { mode: usize, cond: f64 },

    #[error("ball integration did not reach tolerance within depth {0}")]
    Tolerance(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed or out-of-contract input, as opposed to
    /// numerical breakdown during a computation.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Numerical(_)
                | Error::Singularity { .. }
                | Error::IllConditioned { .. }
                | Error::Tolerance(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
