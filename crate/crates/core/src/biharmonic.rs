//! Clamped-plate extension on a round annulus, solved mode by mode.
//!
//! Data on the inner circle is a Fourier series in θ; the outer circle is clamped
//! to zero value and zero gradient. Each mode `k` is a combination of four radial
//! biharmonic functions, normalized so the 4×4 collocation systems stay well
//! conditioned up to high modes.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::constructors::make_annulus;
use crate::curvature::willmore_energy;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::{par, Vec3};

pub const DEFAULT_MODES: usize = 64;
const MAX_COND: f64 = 1e12;
const QUAD_TOL: f64 = 1e-10;
const QUAD_DEPTH: usize = 40;

/// `u(θ) = Σ_k cos[k]·cos kθ + sin[k]·sin kθ`; `sin[0]` is unused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn zero(m_max: usize) -> Self {
        Self {
            cos: vec![0.0; m_max + 1],
            sin: vec![0.0; m_max + 1],
        }
    }

    pub fn constant(c: f64, m_max: usize) -> Self {
        let mut s = Self::zero(m_max);
        s.cos[0] = c;
        s
    }

    pub fn m_max(&self) -> usize {
        self.cos.len().saturating_sub(1)
    }

    /// Trapezoidal projection of equally spaced samples `f(2πj/N)`.
    pub fn from_samples(values: &[f64], m_max: usize) -> Self {
        let n = values.len() as f64;
        let mut s = Self::zero(m_max);
        for k in 0..=m_max {
            let (mut c, mut si) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let t = 2.0 * PI * (j * k) as f64 / n;
                c += v * t.cos();
                si += v * t.sin();
            }
            let w = if k == 0 { 1.0 / n } else { 2.0 / n };
            s.cos[k] = c * w;
            s.sin[k] = if k == 0 { 0.0 } else { si * w };
        }
        s
    }

    /// Sine series of the odd extension of `f` sampled at `πj/N`, `j = 0..=N`,
    /// so the solution vanishes on the x axis.
    pub fn odd_extension(upper: &[f64], m_max: usize) -> Self {
        let n = upper.len() - 1;
        let mut full: Vec<f64> = upper[..n].to_vec();
        full.push(0.0);
        full.extend(upper[1..n].iter().rev().map(|v| -v));
        full[0] = 0.0;
        let mut s = Self::from_samples(&full, m_max);
        s.cos.iter_mut().for_each(|c| *c = 0.0);
        s
    }

    pub fn eval(&self, theta: f64) -> f64 {
        (0..=self.m_max())
            .map(|k| {
                let t = k as f64 * theta;
                self.cos[k] * t.cos() + if k > 0 { self.sin[k] * t.sin() } else { 0.0 }
            })
            .sum()
    }

    fn is_finite(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusBVP {
    pub sigma: f64,
    pub r_outer: f64,
    pub value: FourierSeries,
    /// Radial derivative on the inner circle.
    pub normal: FourierSeries,
}

impl AnnulusBVP {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < self.r_outer && self.r_outer.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "annulus needs 0 < sigma < R (got {}, {})",
                self.sigma, self.r_outer
            )));
        }
        if self.value.cos.len() != self.value.sin.len()
            || self.normal.cos.len() != self.normal.sin.len()
            || self.value.cos.len() != self.normal.cos.len()
            || self.value.cos.is_empty()
        {
            return Err(Error::InvalidParameter("coefficient arrays have mismatched lengths".into()));
        }
        if !self.value.is_finite() || !self.normal.is_finite() {
            return Err(Error::InvalidParameter("boundary coefficients are not finite".into()));
        }
        Ok(())
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let sc = |s: &FourierSeries| FourierSeries {
            cos: s.cos.iter().map(|c| c * lambda).collect(),
            sin: s.sin.iter().map(|c| c * lambda).collect(),
        };
        Self {
            value: sc(&self.value),
            normal: sc(&self.normal),
            ..self.clone()
        }
    }
}

/// One radial basis function: `x^p` or `x^p ln x` with `x = r/s`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Radial {
    p: f64,
    s: f64,
    log: bool,
}

impl Radial {
    /// `(f, f', f'')` at `r`.
    fn eval(&self, r: f64) -> [f64; 3] {
        let x = r / self.s;
        let xp = x.powf(self.p);
        let p = self.p;
        if self.log {
            let l = x.ln();
            [
                xp * l,
                xp * (p * l + 1.0) / r,
                xp * (p * (p - 1.0) * l + 2.0 * p - 1.0) / (r * r),
            ]
        } else {
            [xp, p * xp / r, p * (p - 1.0) * xp / (r * r)]
        }
    }
}

/// Radial biharmonic basis of mode `k`: `{r^k, r^{k+2}, r^{-k}, r^{2-k}}`,
/// `{1, r², log r, r² log r}` for `k = 0` and `{r, r³, r^{-1}, r log r}` for `k = 1`,
/// each rescaled so its size is one on the circle where it is largest.
fn basis(k: usize, sigma: f64, big_r: f64) -> [Radial; 4] {
    let pw = |p: f64, s: f64| Radial { p, s, log: false };
    let lg = |p: f64, s: f64| Radial { p, s, log: true };
    let kf = k as f64;
    match k {
        0 => [pw(0.0, 1.0), pw(2.0, big_r), lg(0.0, big_r), lg(2.0, big_r)],
        1 => [pw(1.0, big_r), pw(3.0, big_r), pw(-1.0, sigma), lg(1.0, big_r)],
        _ => [pw(kf, big_r), pw(kf + 2.0, big_r), pw(-kf, sigma), pw(2.0 - kf, sigma)],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    pub k: usize,
    pub cos: [f64; 4],
    pub sin: [f64; 4],
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiharmonicSolution {
    pub sigma: f64,
    pub r_outer: f64,
    pub modes: Vec<ModeCoefficients>,
    /// `∫_B |∇²w|²` over the annulus.
    pub hessian_energy: f64,
}

fn radial_profile(k: usize, sigma: f64, big_r: f64, c: &[f64; 4], r: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (b, ci) in basis(k, sigma, big_r).iter().zip(c) {
        if *ci != 0.0 {
            let v = b.eval(r);
            for j in 0..3 {
                out[j] += ci * v[j];
            }
        }
    }
    out
}

/// `∫ |∇²(f(r) cos kθ)|² dθ / ∫cos²` at radius `r`, times `r`.
fn hessian_density(k: usize, [f, fp, fpp]: [f64; 3], r: f64) -> f64 {
    let k2 = (k * k) as f64;
    let a = fp / r - f / (r * r);
    let b = fp / r - k2 * f / (r * r);
    (fpp * fpp + 2.0 * k2 * a * a + b * b) * r
}

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| {
        let n = 10;
        let mut x = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n);
        for i in 0..n {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, z);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    x.push(z);
                    w.push(2.0 / ((1.0 - z * z) * dp * dp));
                    break;
                }
            }
        }
        (x, w)
    })
}

fn gl_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = gauss_legendre();
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    x.iter().zip(w).map(|(xi, wi)| wi * f(m + h * xi)).sum::<f64>() * h
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> Result<f64> {
    let m = (a + b) / 2.0;
    let (l, r) = (gl_panel(f, a, m), gl_panel(f, m, b));
    if (l + r - whole).abs() <= tol {
        return Ok(l + r);
    }
    if depth == 0 {
        return Err(Error::Tolerance(QUAD_DEPTH));
    }
    Ok(adaptive(f, a, m, l, tol / 2.0, depth - 1)? + adaptive(f, m, b, r, tol / 2.0, depth - 1)?)
}

/// Adaptive Gauss–Legendre on `[a, b]` to `QUAD_TOL` relative.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    let panels = 16;
    let h = (b - a) / panels as f64;
    let coarse: Vec<f64> = (0..panels).map(|i| gl_panel(&f, a + i as f64 * h, a + (i + 1) as f64 * h)).collect();
    let scale = coarse.iter().map(|v| v.abs()).sum::<f64>();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let tol = QUAD_TOL * scale / panels as f64;
    let mut total = 0.0;
    for (i, c) in coarse.iter().enumerate() {
        total += adaptive(&f, a + i as f64 * h, a + (i + 1) as f64 * h, *c, tol, QUAD_DEPTH)?;
    }
    Ok(total)
}

/// Hessian energy of `f(r)·cos kθ` on the annulus, for any radial profile.
pub(crate) fn mode_energy<F: Fn(f64) -> [f64; 3]>(k: usize, profile: F, sigma: f64, big_r: f64) -> Result<f64> {
    let angular = if k == 0 { 2.0 * PI } else { PI };
    Ok(angular * integrate(|r| hessian_density(k, profile(r), r), sigma, big_r)?)
}

fn solve_mode(bvp: &AnnulusBVP, k: usize) -> Result<ModeCoefficients> {
    let (sigma, big_r) = (bvp.sigma, bvp.r_outer);
    let b = basis(k, sigma, big_r);
    // Rows: value and r·∂r at σ, then at R.
    let mut m = Matrix4::zeros();
    for (j, f) in b.iter().enumerate() {
        let (s, o) = (f.eval(sigma), f.eval(big_r));
        m[(0, j)] = s[0];
        m[(1, j)] = sigma * s[1];
        m[(2, j)] = o[0];
        m[(3, j)] = big_r * o[1];
    }
    let sv = m.svd(false, false).singular_values;
    let condition = sv.max() / sv.min();
    if !(condition <= MAX_COND) {
        return Err(Error::IllConditioned { mode: k, cond: condition });
    }
    let lu = m.lu();
    let solve = |val: f64, dr: f64| -> Result<[f64; 4]> {
        if val == 0.0 && dr == 0.0 {
            return Ok([0.0; 4]);
        }
        let x = lu
            .solve(&Vector4::new(val, sigma * dr, 0.0, 0.0))
            .ok_or_else(|| Error::Numerical(format!("mode {k} system is singular")))?;
        Ok([x[0], x[1], x[2], x[3]])
    };
    Ok(ModeCoefficients {
        k,
        cos: solve(bvp.value.cos[k], bvp.normal.cos[k])?,
        sin: if k == 0 {
            [0.0; 4]
        } else {
            solve(bvp.value.sin[k], bvp.normal.sin[k])?
        },
        condition,
    })
}

pub fn solve_annulus(bvp: &AnnulusBVP) -> Result<BiharmonicSolution> {
    bvp.validate()?;
    let (sigma, big_r) = (bvp.sigma, bvp.r_outer);
    let n = bvp.value.m_max() + 1;
    let modes = par::try_map_indexed(n, |k| solve_mode(bvp, k))?;
    let energies = par::try_map_indexed(n, |k| {
        let md = &modes[k];
        let mut e = 0.0;
        for c in [&md.cos, &md.sin] {
            if c.iter().any(|x| *x != 0.0) {
                e += mode_energy(k, |r| radial_profile(k, sigma, big_r, c, r), sigma, big_r)?;
            }
        }
        Ok::<f64, Error>(e)
    })?;
    Ok(BiharmonicSolution {
        sigma,
        r_outer: big_r,
        modes,
        hessian_energy: energies.iter().sum(),
    })
}

impl BiharmonicSolution {
    /// `(w, ∂r w, ∂θ w)` at polar point `(r, θ)`.
    pub fn eval(&self, r: f64, theta: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for md in &self.modes {
            let kt = md.k as f64 * theta;
            let (c, s) = (kt.cos(), kt.sin());
            let fc = radial_profile(md.k, self.sigma, self.r_outer, &md.cos, r);
            let fs = radial_profile(md.k, self.sigma, self.r_outer, &md.sin, r);
            out[0] += fc[0] * c + fs[0] * s;
            out[1] += fc[1] * c + fs[1] * s;
            out[2] += md.k as f64 * (fs[0] * c - fc[0] * s);
        }
        out
    }

    /// Largest mismatch in value or radial derivative over `n` points on each circle.
    pub fn boundary_residual(&self, bvp: &AnnulusBVP, n: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let t = 2.0 * PI * j as f64 / n as f64;
            let inner = self.eval(self.sigma, t);
            let outer = self.eval(self.r_outer, t);
            worst = worst
                .max((inner[0] - bvp.value.eval(t)).abs())
                .max((inner[1] - bvp.normal.eval(t)).abs())
                .max(outer[0].abs())
                .max(outer[1].abs())
                .max((outer[2] / self.r_outer).abs());
        }
        worst
    }

    /// Largest slope `|∇w|` sampled on an `n_r × n_t` polar grid.
    pub fn max_slope(&self, n_r: usize, n_t: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=n_r {
            let r = self.sigma + (self.r_outer - self.sigma) * i as f64 / n_r as f64;
            for j in 0..n_t {
                let [_, dr, dt] = self.eval(r, 2.0 * PI * j as f64 / n_t as f64);
                worst = worst.max((dr * dr + dt * dt / (r * r)).sqrt());
            }
        }
        worst
    }

    /// `∫_{|x|=σ} |∇²w|² ds`.
    pub fn inner_hessian_norm(&self) -> f64 {
        let r = self.sigma;
        self.modes
            .iter()
            .map(|md| {
                let angular = if md.k == 0 { 2.0 * PI } else { PI };
                [md.cos, md.sin]
                    .iter()
                    .map(|c| hessian_density(md.k, radial_profile(md.k, r, self.r_outer, c, r), r))
                    .sum::<f64>()
                    * angular
            })
            .sum()
    }

    /// Ratio `∫_B|∇²w|² / (σ ∫_{∂B_σ}|∇²w|²)`, the empirical comparison constant.
    pub fn comparison_constant(&self) -> f64 {
        self.hessian_energy / (self.sigma * self.inner_hessian_norm())
    }
}

/// Graph of the solution over the annulus.
pub fn cap_mesh(sol: &BiharmonicSolution, n_angular: usize, n_rings: usize) -> Result<TriMesh> {
    let flat = make_annulus(sol.sigma, sol.r_outer, n_angular, n_rings)?;
    flat.map_positions(|p| {
        let r = (p.x * p.x + p.y * p.y).sqrt();
        Vec3::new(p.x, p.y, sol.eval(r, p.y.atan2(p.x))[0])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapEnergies {
    pub hessian_energy: f64,
    pub w_graph: f64,
}

pub fn cap_energies(sol: &BiharmonicSolution, n_angular: usize, n_rings: usize) -> Result<CapEnergies> {
    Ok(CapEnergies {
        hessian_energy: sol.hessian_energy,
        w_graph: willmore_energy(&cap_mesh(sol, n_angular, n_rings)?)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn radial_bvp(sigma: f64, big_r: f64) -> AnnulusBVP {
        AnnulusBVP {
            sigma,
            r_outer: big_r,
            value: FourierSeries::constant(1.0, 4),
            normal: FourierSeries::zero(4),
        }
    }

    fn random_bvp(rng: &mut ChaCha8Rng, m: usize) -> AnnulusBVP {
        let mut rnd = || FourierSeries {
            cos: (0..=m).map(|_| rng.random_range(-1.0..1.0)).collect(),
            sin: (0..=m).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let (value, normal) = (rnd(), rnd());
        AnnulusBVP { sigma: 0.7, r_outer: 3.0, value, normal }
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let v = integrate(|x| x.powi(19) + 3.0 * x * x, 0.0, 2.0).unwrap();
        assert!((v - (2f64.powi(20) / 20.0 + 8.0)).abs() < 1e-9);
        let l = integrate(|x| 1.0 / x, 1.0, 1e4).unwrap();
        assert!((l - 1e4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn zero_data_gives_zero() {
        let bvp = AnnulusBVP {
            sigma: 1.0,
            r_outer: 2.0,
            value: FourierSeries::zero(8),
            normal: FourierSeries::zero(8),
        };
        let sol = solve_annulus(&bvp).unwrap();
        assert_eq!(sol.hessian_energy, 0.0);
        let caps = cap_energies(&sol, 64, 8).unwrap();
        assert!(caps.w_graph < 1e-20);
    }

    #[test]
    fn radial_basis_functions_are_biharmonic() {
        // Δ_k f = f'' + f'/r − k²f/r²; check Δ_k(Δ_k f) = 0 by central differences.
        for k in [0usize, 1, 2, 5] {
            for b in basis(k, 1.0, 2.0) {
                let lap = |r: f64| {
                    let [f, fp, fpp] = b.eval(r);
                    fpp + fp / r - (k * k) as f64 * f / (r * r)
                };
                let (r, h) = (1.5, 1e-3);
                let l = lap(r);
                let lp = (lap(r + h) - lap(r - h)) / (2.0 * h);
                let lpp = (lap(r + h) - 2.0 * l + lap(r - h)) / (h * h);
                let bi = lpp + lp / r - (k * k) as f64 * l / (r * r);
                assert!(bi.abs() < 1e-4, "k={k} {b:?}: {bi}");
            }
        }
    }

    #[test]
    fn mode_two_residual() {
        let mut value = FourierSeries::zero(4);
        value.cos[2] = 1.0;
        let bvp = AnnulusBVP {
            sigma: 1.0,
            r_outer: 4.0,
            value,
            normal: FourierSeries::zero(4),
        };
        let sol = solve_annulus(&bvp).unwrap();
        assert!(sol.boundary_residual(&bvp, 64) <= 1e-9);
    }

    #[test]
    fn high_modes_stay_conditioned() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bvp = random_bvp(&mut rng, DEFAULT_MODES);
        let sol = solve_annulus(&bvp).unwrap();
        assert!(sol.modes.iter().all(|m| m.condition < 1e6));
        assert!(sol.boundary_residual(&bvp, 256) <= 1e-9);
    }

    #[test]
    fn thin_annulus_is_rejected_when_ill_conditioned() {
        let mut bvp = radial_bvp(1.0, 1.0 + 1e-9);
        bvp.value = FourierSeries::constant(1.0, 2);
        bvp.normal = FourierSeries::zero(2);
        assert!(matches!(solve_annulus(&bvp), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn energy_is_quadratic_in_data() {
        let bvp = radial_bvp(1.0, 2.0);
        let e1 = solve_annulus(&bvp).unwrap().hessian_energy;
        let e3 = solve_annulus(&bvp.scaled(3.0)).unwrap().hessian_energy;
        assert!((e3 - 9.0 * e1).abs() <= 1e-12 * e3);
    }

    #[test]
    fn radial_solution_minimizes_among_bumps() {
        let bvp = radial_bvp(1.0, 2.0);
        let sol = solve_annulus(&bvp).unwrap();
        let c = sol.modes[0].cos;
        let base = mode_energy(0, |r| radial_profile(0, 1.0, 2.0, &c, r), 1.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = rng.random_range(1.0..1.8);
            let b = rng.random_range(a + 0.05..2.0);
            let eps = rng.random_range(-50.0..50.0);
            // (r−a)³(b−r)³ has zero value and slope at both ends.
            let bump = |r: f64| -> [f64; 3] {
                if r <= a || r >= b {
                    return [0.0; 3];
                }
                let (u, v) = (r - a, b - r);
                [
                    u.powi(3) * v.powi(3),
                    3.0 * u * u * v * v * (v - u),
                    6.0 * u * v * (v * v - 3.0 * u * v + u * u),
                ]
            };
            let e = mode_energy(
                0,
                |r| {
                    let (f, g) = (radial_profile(0, 1.0, 2.0, &c, r), bump(r));
                    [f[0] + eps * g[0], f[1] + eps * g[1], f[2] + eps * g[2]]
                },
                1.0,
                2.0,
            )
            .unwrap();
            assert!(e > base, "bump [{a}, {b}] x {eps}: {e} <= {base}");
        }
    }

    #[test]
    fn small_slope_graph_energy_is_bounded_by_hessian() {
        let bvp = radial_bvp(1.0, 2.0);
        let unit = solve_annulus(&bvp).unwrap();
        let lambda = 0.1 / unit.max_slope(200, 4);
        let sol = solve_annulus(&bvp.scaled(lambda)).unwrap();
        assert!(sol.max_slope(200, 4) <= 0.1 + 1e-12);
        let caps = cap_energies(&sol, 256, 64).unwrap();
        assert!(caps.w_graph <= 1.05 * caps.hessian_energy, "{caps:?}");
    }

    #[test]
    fn odd_extension_vanishes_on_axis() {
        let upper: Vec<f64> = (0..=64).map(|j| (PI * j as f64 / 64.0).sin().powi(2)).collect();
        let value = FourierSeries::odd_extension(&upper, 16);
        let bvp = AnnulusBVP {
            sigma: 1.0,
            r_outer: 3.0,
            value,
            normal: FourierSeries::zero(16),
        };
        let sol = solve_annulus(&bvp).unwrap();
        for r in [1.0, 1.7, 2.4] {
            assert!(sol.eval(r, 0.0)[0].abs() < 1e-14);
            assert!(sol.eval(r, PI)[0].abs() < 1e-12);
        }
        assert!(sol.eval(1.0, PI / 2.0)[0] > 0.5);
    }

    #[test]
    fn samples_project_exactly_for_band_limited_data() {
        let f = |t: f64| 0.3 + 2.0 * (3.0 * t).cos() - 0.5 * (5.0 * t).sin();
        let samples: Vec<f64> = (0..64).map(|j| f(2.0 * PI * j as f64 / 64.0)).collect();
        let s = FourierSeries::from_samples(&samples, 8);
        assert!((s.cos[0] - 0.3).abs() < 1e-14 && (s.cos[3] - 2.0).abs() < 1e-13 && (s.sin[5] + 0.5).abs() < 1e-13);
        assert!((s.eval(0.7) - f(0.7)).abs() < 1e-12);
    }

    #[test]
    fn superposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let (a, b) = (random_bvp(&mut rng, 12), random_bvp(&mut rng, 12));
            let mut sum = a.clone();
            for (s, t) in [(&mut sum.value, &b.value), (&mut sum.normal, &b.normal)] {
                s.cos.iter_mut().zip(&t.cos).for_each(|(x, y)| *x += y);
                s.sin.iter_mut().zip(&t.sin).for_each(|(x, y)| *x += y);
            }
            let (sa, sb, ss) = (solve_annulus(&a).unwrap(), solve_annulus(&b).unwrap(), solve_annulus(&sum).unwrap());
            for (r, t) in [(0.9, 0.3), (1.6, 2.0), (2.7, 5.1)] {
                let (x, y, z) = (sa.eval(r, t)[0], sb.eval(r, t)[0], ss.eval(r, t)[0]);
                assert!((x + y - z).abs() <= 1e-10 * z.abs().max(1.0));
            }
        }
    }
}
