//! Independent finite-difference solver for the radially symmetric clamped plate
//! on an annulus, used to check the spectral solver.
//!
//! `Δ²w = 0` for `w = w(r)` reads `w'''' + 2w'''/r − w''/r² + w'/r³ = 0`.
//! Second-order central differences on a uniform grid with one ghost node past
//! each end carry the slope conditions; the system is solved densely.

use nalgebra::{DMatrix, DVector};

pub struct RadialFd {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    h: f64,
    /// Values at the two ghost nodes.
    ghost: (f64, f64),
}

/// Clamped data `w(σ) = a`, `w'(σ) = b`, `w(R) = w'(R) = 0` on `n` intervals.
pub fn solve_radial(sigma: f64, big_r: f64, a: f64, b: f64, n: usize) -> RadialFd {
    let h = (big_r - sigma) / n as f64;
    // Unknown j holds node j − 1, so nodes run from −1 to n + 1.
    let size = n + 3;
    let col = |i: isize| (i + 1) as usize;
    let mut m = DMatrix::<f64>::zeros(size, size);
    let mut rhs = DVector::<f64>::zeros(size);

    let mut row = 0;
    for i in 1..n as isize {
        let r = sigma + i as f64 * h;
        let (h2, h3, h4) = (h * h, h * h * h, h * h * h * h);
        // Stencils for w'''', w''', w'', w' at node i, offsets −2..=2.
        let d4 = [1.0, -4.0, 6.0, -4.0, 1.0].map(|c| c / h4);
        let d3 = [-0.5, 1.0, 0.0, -1.0, 0.5].map(|c| c / h3);
        let d2 = [0.0, 1.0, -2.0, 1.0, 0.0].map(|c| c / h2);
        let d1 = [0.0, -0.5, 0.0, 0.5, 0.0].map(|c| c / h);
        for (o, off) in (-2..=2).enumerate() {
            m[(row, col(i + off))] = d4[o] + 2.0 / r * d3[o] - d2[o] / (r * r) + d1[o] / (r * r * r);
        }
        row += 1;
    }
    let nn = n as isize;
    m[(row, col(0))] = 1.0;
    rhs[row] = a;
    row += 1;
    m[(row, col(1))] = 0.5 / h;
    m[(row, col(-1))] = -0.5 / h;
    rhs[row] = b;
    row += 1;
    m[(row, col(nn))] = 1.0;
    row += 1;
    m[(row, col(nn + 1))] = 0.5 / h;
    m[(row, col(nn - 1))] = -0.5 / h;

    let x = m.lu().solve(&rhs).expect("finite-difference system is nonsingular");
    RadialFd {
        r: (0..=n).map(|i| sigma + i as f64 * h).collect(),
        w: (0..=n).map(|i| x[i + 1]).collect(),
        h,
        ghost: (x[0], x[n + 2]),
    }
}

impl RadialFd {
    fn node(&self, i: isize) -> f64 {
        let n = self.w.len() as isize - 1;
        match i {
            -1 => self.ghost.0,
            i if i == n + 1 => self.ghost.1,
            i => self.w[i as usize],
        }
    }

    /// `∫ |∇²w|²` over the annulus on an `n_r × n_θ` tensor grid (trapezoid in
    /// both directions). For a radial function the Hessian has eigenvalues
    /// `w''` and `w'/r`.
    pub fn hessian_energy(&self, n_theta: usize) -> f64 {
        let h = self.h;
        let n = self.w.len();
        let density: Vec<f64> = (0..n as isize)
            .map(|i| {
                let d1 = (self.node(i + 1) - self.node(i - 1)) / (2.0 * h);
                let d2 = (self.node(i + 1) - 2.0 * self.node(i) + self.node(i - 1)) / (h * h);
                let r = self.r[i as usize];
                (d2 * d2 + (d1 / r) * (d1 / r)) * r
            })
            .collect();
        let radial: f64 = h * (density.iter().sum::<f64>() - 0.5 * (density[0] + density[n - 1]));
        let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
        (0..n_theta).map(|_| radial * dtheta).sum()
    }
}
