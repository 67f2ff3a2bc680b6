//! Descent on vertex positions for the discrete Willmore energy with the
//! boundary held on a curve, and the bad-point concentration detector.

use std::fmt::Write as _;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_field, willmore_energy, willmore_gradient_exact};
use crate::curve::ConstraintCurve;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::{par, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    /// Exact derivative of the discrete energy.
    Analytic,
    /// Central differences with `h = 1e-6·diam`.
    CentralDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    Pinned,
    /// Boundary vertices move along the curve and are reprojected after each step.
    Sliding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    pub step: f64,
    pub backtrack: f64,
    pub armijo: f64,
    pub gradient: GradientMode,
    pub boundary: BoundaryMode,
    /// Needed for sliding; when present the boundary is checked against it.
    pub curve: Option<ConstraintCurve>,
    /// Tangential smoothing every `k` iterations; 0 turns it off.
    pub smoothing_interval: usize,
    /// Stop once the relative energy decrease of an accepted step falls below this.
    pub tolerance: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            step: 1e-3,
            backtrack: 0.5,
            armijo: 1e-4,
            gradient: GradientMode::Analytic,
            boundary: BoundaryMode::Pinned,
            curve: None,
            smoothing_interval: 0,
            tolerance: 1e-9,
        }
    }
}

impl MinimizeOptions {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("step and tolerance must be positive".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0 && self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(Error::InvalidParameter("backtracking factors must lie in (0, 1)".into()));
        }
        if self.boundary == BoundaryMode::Sliding && self.curve.is_none() {
            return Err(Error::InvalidParameter("sliding boundary needs a constraint curve".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Tolerance,
    MaxIters,
    StepUnderflow,
    MeshDegenerate,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Energy of the start mesh followed by each accepted iterate.
    pub energies: Vec<f64>,
    /// Largest vertex displacement of each accepted step.
    pub max_displacement: Vec<f64>,
    pub final_mesh: TriMesh,
    pub termination: Termination,
    /// Filled when descent stops on a degenerate mesh.
    pub bad_points: Option<BadPointReport>,
}

impl Trajectory {
    pub fn iterations(&self) -> usize {
        self.max_displacement.len()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,W,max_disp\n");
        for (i, w) in self.energies.iter().enumerate() {
            let d = if i == 0 { 0.0 } else { self.max_displacement[i - 1] };
            writeln!(s, "{i},{w},{d}").unwrap();
        }
        s
    }
}

/// What an observer sees after every accepted step.
pub struct IterationState<'a> {
    pub iter: usize,
    pub energy: f64,
    pub mesh: &'a TriMesh,
}

fn project_boundary(mesh: &TriMesh, grad: &mut [Vec3], mode: BoundaryMode, curve: Option<&ConstraintCurve>) {
    for (v, g) in grad.iter_mut().enumerate() {
        if !mesh.is_boundary_vertex(v) {
            continue;
        }
        *g = match (mode, curve) {
            (BoundaryMode::Sliding, Some(c)) => {
                let t = c.tangent_at(&mesh.vertices()[v]);
                t * g.dot(&t)
            }
            _ => Vec3::zeros(),
        };
    }
}

/// Central-difference gradient at the listed vertices, `h = 1e-6·diam`.
pub fn central_difference_at(mesh: &TriMesh, vertices: &[usize]) -> Result<Vec<Vec3>> {
    let h = 1e-6 * mesh.diameter();
    par::try_map_indexed(vertices.len(), |i| {
        let v = vertices[i];
        let mut g = Vec3::zeros();
        for c in 0..3 {
            let mut plus = mesh.vertices().to_vec();
            let mut minus = plus.clone();
            plus[v][c] += h;
            minus[v][c] -= h;
            let wp = willmore_energy(&mesh.with_positions(plus)?)?;
            let wm = willmore_energy(&mesh.with_positions(minus)?)?;
            g[c] = (wp - wm) / (2.0 * h);
        }
        Ok(g)
    })
}

fn energy_and_gradient(mesh: &TriMesh, mode: GradientMode) -> Result<(f64, Vec<Vec3>)> {
    match mode {
        GradientMode::Analytic => willmore_gradient_exact(mesh),
        GradientMode::CentralDifference => {
            let all: Vec<usize> = (0..mesh.num_vertices()).collect();
            Ok((willmore_energy(mesh)?, central_difference_at(mesh, &all)?))
        }
    }
}

/// Gradient of the discrete energy with boundary vertices pinned or slid.
pub fn willmore_gradient(mesh: &TriMesh, opts: &MinimizeOptions) -> Result<Vec<Vec3>> {
    opts.validate()?;
    let (_, mut g) = energy_and_gradient(mesh, opts.gradient)?;
    project_boundary(mesh, &mut g, opts.boundary, opts.curve.as_ref());
    Ok(g)
}

fn check_on_curve(mesh: &TriMesh, curve: &ConstraintCurve) -> Result<()> {
    let limit = 1e-9 * mesh.diameter().max(1.0);
    for v in (0..mesh.num_vertices()).filter(|&v| mesh.is_boundary_vertex(v)) {
        let d = curve.distance(&mesh.vertices()[v]);
        if d > limit {
            return Err(Error::BoundaryMismatch { vertex: v, distance: d, limit });
        }
    }
    Ok(())
}

/// Move interior vertices halfway toward the neighbour average, within the tangent plane.
fn tangential_smoothing(mesh: &TriMesh) -> Vec<Vec3> {
    let pos = mesh.vertices();
    par::map_indexed(mesh.num_vertices(), |v| {
        if mesh.is_boundary_vertex(v) {
            return pos[v];
        }
        let nb = mesh.vertex_neighbors(v);
        let avg = nb.iter().map(|&u| pos[u]).sum::<Vec3>() / nb.len() as f64;
        let n = mesh.vertex_normal(v);
        let d = avg - pos[v];
        pos[v] + (d - n * d.dot(&n)) * 0.5
    })
}

pub fn minimize(mesh: &TriMesh, opts: &MinimizeOptions) -> Result<Trajectory> {
    minimize_observed(mesh, opts, |_| {})
}

/// Armijo descent along the projected negative gradient. The trial step starts
/// from the Barzilai–Borwein estimate of the previous iteration.
pub fn minimize_observed<F>(mesh: &TriMesh, opts: &MinimizeOptions, mut observer: F) -> Result<Trajectory>
where
    F: FnMut(&IterationState),
{
    opts.validate()?;
    if let Some(c) = &opts.curve {
        check_on_curve(mesh, c)?;
    }
    let curve = opts.curve.as_ref();
    let min_step = 1e-16 * opts.step;

    let mut current = mesh.clone();
    let (mut w, mut g) = energy_and_gradient(&current, opts.gradient)?;
    project_boundary(&current, &mut g, opts.boundary, curve);
    let mut energies = vec![w];
    let mut max_displacement = Vec::new();
    let mut step = opts.step;
    let mut termination = Termination::MaxIters;

    for iter in 0..opts.max_iters {
        let g2: f64 = g.iter().map(|x| x.norm_squared()).sum();
        if w == 0.0 || g2.sqrt() <= 1e-14 * w.max(1.0) {
            termination = Termination::Tolerance;
            break;
        }

        let mut alpha = step;
        let mut all_degenerate = true;
        let accepted = loop {
            if alpha < min_step {
                break None;
            }
            let mut trial: Vec<Vec3> = current.vertices().iter().zip(&g).map(|(x, d)| x - d * alpha).collect();
            if let (BoundaryMode::Sliding, Some(c)) = (opts.boundary, curve) {
                for (v, p) in trial.iter_mut().enumerate() {
                    if current.is_boundary_vertex(v) {
                        *p = c.closest_point(p);
                    }
                }
            }
            let cand = current.with_positions(trial).and_then(|m| {
                let e = willmore_energy(&m)?;
                Ok((m, e))
            });
            match cand {
                Ok((m, e)) => {
                    all_degenerate = false;
                    if e <= w - opts.armijo * alpha * g2 && e < w {
                        break Some((m, e));
                    }
                }
                Err(err) => debug!("iteration {iter}: step {alpha:e} rejected: {err}"),
            }
            alpha *= opts.backtrack;
        };

        let Some((mut next, e)) = accepted else {
            termination = if all_degenerate {
                Termination::MeshDegenerate
            } else {
                Termination::StepUnderflow
            };
            break;
        };

        if opts.smoothing_interval > 0 && (iter + 1) % opts.smoothing_interval == 0 {
            if let Ok(m) = next.with_positions(tangential_smoothing(&next)) {
                if let Ok(es) = willmore_energy(&m) {
                    if es < e {
                        next = m;
                    }
                }
            }
        }

        let disp = current
            .vertices()
            .iter()
            .zip(next.vertices())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let (w_next, mut g_next) = match energy_and_gradient(&next, opts.gradient) {
            Ok(r) => r,
            Err(_) => {
                termination = Termination::MeshDegenerate;
                break;
            }
        };
        project_boundary(&next, &mut g_next, opts.boundary, curve);

        // Barzilai–Borwein: s = Δx, y = Δg, step = s·s / s·y.
        let (mut ss, mut sy) = (0.0, 0.0);
        for v in 0..next.num_vertices() {
            let s = next.vertices()[v] - current.vertices()[v];
            ss += s.norm_squared();
            sy += s.dot(&(g_next[v] - g[v]));
        }
        step = if sy > 0.0 { ss / sy } else { alpha * 2.0 };

        let rel = (w - w_next) / w.abs().max(1e-300);
        current = next;
        w = w_next;
        g = g_next;
        energies.push(w);
        max_displacement.push(disp);
        observer(&IterationState { iter: iter + 1, energy: w, mesh: &current });
        if rel < opts.tolerance {
            termination = Termination::Tolerance;
            break;
        }
    }

    let bad_points = if termination == Termination::MeshDegenerate {
        detect_bad_points(&current, &[0.1 * current.diameter()], 1.0).ok()
    } else {
        None
    };
    Ok(Trajectory {
        energies,
        max_displacement,
        final_mesh: current,
        termination,
        bad_points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadPointCandidate {
    pub vertex: usize,
    pub center: Vec3,
    /// `c(ξ, r)` for each radius.
    pub concentration: Vec<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadPointReport {
    pub radii: Vec<f64>,
    pub threshold: f64,
    pub candidates: Vec<BadPointCandidate>,
}

impl BadPointReport {
    pub fn flagged(&self) -> impl Iterator<Item = &BadPointCandidate> {
        self.candidates.iter().filter(|c| c.flagged)
    }
}

pub const MAX_CANDIDATES: usize = 8;

/// `c(ξ, r) = Σ_{|x_i − ξ| ≤ r} |A|²_i A_i`.
pub fn concentration(mesh: &TriMesh, density: &[f64], center: &Vec3, r: f64) -> f64 {
    mesh.vertices()
        .iter()
        .zip(density)
        .filter(|(x, _)| (*x - center).norm() <= r)
        .map(|(_, d)| d)
        .sum()
}

/// Candidates are the densest vertices (bending per unit area), greedily kept
/// at least `r_min` apart. A candidate is flagged when `c(ξ, r_min) ≥ ε²`.
pub fn detect_bad_points(mesh: &TriMesh, radii: &[f64], eps: f64) -> Result<BadPointReport> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("radii must be positive and increasing".into()));
    }
    let field = curvature_field(mesh)?;
    let density: Vec<f64> = (0..mesh.num_vertices()).map(|v| field.bending_density(v)).collect();
    let mut order: Vec<usize> = (0..mesh.num_vertices()).filter(|&v| density[v] > 0.0).collect();
    let per_area = |v: usize| density[v] / field.vertex_area[v];
    order.sort_by(|&a, &b| per_area(b).total_cmp(&per_area(a)));

    let pos = mesh.vertices();
    let mut picked: Vec<usize> = Vec::new();
    for v in order {
        if picked.len() == MAX_CANDIDATES {
            break;
        }
        if picked.iter().all(|&p| (pos[p] - pos[v]).norm() > radii[0]) {
            picked.push(v);
        }
    }
    let threshold = eps * eps;
    let candidates = picked
        .into_iter()
        .map(|v| {
            let conc: Vec<f64> = radii.iter().map(|&r| concentration(mesh, &density, &pos[v], r)).collect();
            BadPointCandidate {
                vertex: v,
                center: pos[v],
                flagged: conc[0] >= threshold,
                concentration: conc,
            }
        })
        .collect();
    Ok(BadPointReport {
        radii: radii.to_vec(),
        threshold,
        candidates,
    })
}
