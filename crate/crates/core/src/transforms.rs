//! Sampled realizations of the substitution `U`, the Mellin transform
//! `M = ΦU`, the unitary map `F`, the weight `v` and the first-order
//! diagonalizing map `T`.
//!
//! # Grid conventions
//!
//! A [`LogGrid`] with half-width `L` and `N` nodes (a power of two) samples
//! the log variable `x = ln t` at
//!
//! ```text
//! xⱼ = −L + j·Δx,   Δx = 2L/N,   j = 0, …, N−1
//! ```
//!
//! and its dual frequency grid at
//!
//! ```text
//! ξₖ = (k − N/2)·Δξ,   Δξ = π/L,   k = 0, …, N−1
//! ```
//!
//! so that `ξ` covers `[−π/Δx, π/Δx)` in increasing order. The continuous
//! transform `(Φu)(ξ) = (2π)^{−1/2} ∫ u(x) e^{−ixξ} dx` is replaced by
//!
//! ```text
//! (Φu)(ξₖ) = (2π)^{−1/2} Δx Σⱼ u(xⱼ) e^{−ixⱼξₖ}
//!          = (2π)^{−1/2} Δx (−1)^{k + N/2} Σⱼ (−1)ʲ u(xⱼ) e^{−2πijk/N},
//! ```
//!
//! which is a single FFT. Because `N·Δx·Δξ = 2π` the discrete map is exactly
//! unitary between the norms `√(Δx Σ|u|²)` and `√(Δξ Σ|g|²)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::special_functions::{gamma_half_phase, ln_cosh};
use crate::{Error, Result};

/// Uniform grid in `x = ln t` together with its dual frequency grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    half_width: f64,
    n: usize,
}

impl LogGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "node count must be a power of two >= 4, got {n}"
            )));
        }
        Ok(Self { half_width, n })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn frequency_spacing(&self) -> f64 {
        PI / self.half_width
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    pub fn frequency(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.frequency_spacing()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.frequency(k)).collect()
    }

    /// Grid with the same `Δx` and `factor` times the half-width (and so a
    /// `factor` times finer frequency grid). `factor` must be a power of two.
    pub fn widened(&self, factor: usize) -> Result<Self> {
        Self::new(self.half_width * factor as f64, self.n * factor)
    }
}

impl Default for LogGrid {
    /// `L = 12`, `N = 1024`.
    fn default() -> Self {
        Self {
            half_width: 12.0,
            n: 1024,
        }
    }
}

/// Which of the two dual grids a [`GridFunction`] is sampled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Log,
    Frequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: LogGrid,
    domain: Domain,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: LogGrid, domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            domain,
            values,
        })
    }

    /// Samples `g` at the nodes of `domain`.
    pub fn from_fn(grid: LogGrid, domain: Domain, g: impl Fn(f64) -> Complex64) -> Self {
        let values = match domain {
            Domain::Log => grid.nodes(),
            Domain::Frequency => grid.frequencies(),
        }
        .into_iter()
        .map(g)
        .collect();
        Self {
            grid,
            domain,
            values,
        }
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Quadrature weight of the grid this function lives on.
    pub fn step(&self) -> f64 {
        match self.domain {
            Domain::Log => self.grid.spacing(),
            Domain::Frequency => self.grid.frequency_spacing(),
        }
    }

    /// Sample points of this function's domain.
    pub fn abscissae(&self) -> Vec<f64> {
        match self.domain {
            Domain::Log => self.grid.nodes(),
            Domain::Frequency => self.grid.frequencies(),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.step() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `Σ a·conj(b)·step`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.domain, other.domain);
        assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * self.step()
    }

    pub fn map_values(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            domain: self.domain,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| f(i, v))
                .collect(),
        }
    }
}

type PlanKey = (usize, bool);
type PlanCache = RwLock<HashMap<PlanKey, Arc<dyn Fft<f64>>>>;

fn plan_cache() -> &'static PlanCache {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Cached FFT plan; lookups take a shared lock, creation an exclusive one.
pub(crate) fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let key = (n, inverse);
    if let Some(plan) = plan_cache().read().unwrap().get(&key) {
        return Arc::clone(plan);
    }
    let mut cache = plan_cache().write().unwrap();
    Arc::clone(cache.entry(key).or_insert_with(|| {
        let mut planner = FftPlanner::new();
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    }))
}

fn alternating(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `v(ξ) = √(π / cosh(πξ))`.
pub fn v_eval(xi: f64) -> f64 {
    if xi.abs() <= 20.0 {
        (PI / (PI * xi).cosh()).sqrt()
    } else {
        (0.5 * (PI.ln() - ln_cosh(PI * xi))).exp()
    }
}

/// `(Uf)(xⱼ) = e^{xⱼ/2} f(e^{xⱼ})`.
pub fn u_map(f: impl Fn(f64) -> f64, grid: &LogGrid) -> Result<GridFunction> {
    let values = grid
        .nodes()
        .into_iter()
        .enumerate()
        .map(|(j, x)| {
            let t = x.exp();
            let v = (0.5 * x).exp() * f(t);
            if v.is_finite() {
                Ok(Complex64::new(v, 0.0))
            } else {
                Err(Error::NonFiniteSample { index: j, t })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(*grid, Domain::Log, values)
}

/// Discrete `Φ` applied to a function of the log variable.
pub fn mellin(u: &GridFunction) -> Result<GridFunction> {
    if u.domain() != Domain::Log {
        return Err(Error::InvalidInput(
            "mellin expects a function of the log variable".into(),
        ));
    }
    let grid = *u.grid();
    let n = grid.len();
    let mut buf: Vec<Complex64> = u
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| v * alternating(j))
        .collect();
    fft_plan(n, false).process(&mut buf);
    let scale = grid.spacing() / (2.0 * PI).sqrt();
    for (k, b) in buf.iter_mut().enumerate() {
        *b *= scale * alternating(k + n / 2);
    }
    GridFunction::new(grid, Domain::Frequency, buf)
}

/// Discrete `Φ*`, the exact inverse of [`mellin`].
pub fn inverse_mellin(g: &GridFunction) -> Result<GridFunction> {
    if g.domain() != Domain::Frequency {
        return Err(Error::InvalidInput(
            "inverse_mellin expects a function of the frequency variable".into(),
        ));
    }
    let grid = *g.grid();
    let n = grid.len();
    let mut buf: Vec<Complex64> = g
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| v * alternating(k + n / 2))
        .collect();
    fft_plan(n, true).process(&mut buf);
    let scale = grid.frequency_spacing() / (2.0 * PI).sqrt();
    for (j, b) in buf.iter_mut().enumerate() {
        *b *= scale * alternating(j);
    }
    GridFunction::new(grid, Domain::Log, buf)
}

/// Multiplies a frequency-domain function by `Γ(1/2 + iξ)/|Γ(1/2 + iξ)|`.
pub fn apply_gamma_phase(g: &GridFunction) -> GridFunction {
    let xi = g.grid().frequencies();
    g.map_values(|k, v| v * gamma_half_phase(xi[k]))
}

/// `F f = (Γ(1/2 + iξ)/|Γ(1/2 + iξ)|) · (M f)(ξ)`.
pub fn f_transform(f: impl Fn(f64) -> f64, grid: &LogGrid) -> Result<GridFunction> {
    Ok(apply_gamma_phase(&mellin(&u_map(f, grid)?)?))
}

/// `F*` back to the log variable (the result is `U f`, not `f` itself).
pub fn f_inverse(g: &GridFunction) -> Result<GridFunction> {
    let xi = g.grid().frequencies();
    inverse_mellin(&g.map_values(|k, v| v * gamma_half_phase(xi[k]).conj()))
}

/// `∫₀^ξ v(η)^{−2} dη = sinh(πξ)/π²`.
pub fn t_reparametrization(xi: f64) -> f64 {
    (PI * xi).sinh() / (PI * PI)
}

/// Whittaker–Shannon interpolation of frequency samples at an off-grid `y`.
fn sinc_interpolate(g: &GridFunction, y: f64) -> Complex64 {
    let h = g.step();
    let k0 = g.grid().frequency(0);
    let s = (y - k0) / h;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, v) in g.values().iter().enumerate() {
        let d = s - k as f64;
        let w = if d == 0.0 {
            1.0
        } else {
            (PI * d).sin() / (PI * d)
        };
        acc += v * w;
    }
    acc
}

/// `(Tg)(ξ) = v(ξ)^{−1} e^{i(q₀/q₁)ξ} g(sinh(πξ)/π²)`.
///
/// `g` is sampled on the frequency grid; its values at the reparametrized
/// points come from band-limited (sinc) interpolation. Points whose image
/// falls outside the sampled range are set to zero.
pub fn t_transform(g: &GridFunction, q0: f64, q1: f64) -> Result<GridFunction> {
    if q1 == 0.0 {
        return Err(Error::DegeneratePolynomial);
    }
    if g.domain() != Domain::Frequency {
        return Err(Error::InvalidInput(
            "t_transform expects a function of the frequency variable".into(),
        ));
    }
    let grid = *g.grid();
    let lo = grid.frequency(0);
    let hi = grid.frequency(grid.len() - 1);
    let shift = q0 / q1;
    let values = grid
        .frequencies()
        .into_iter()
        .map(|xi| {
            let y = t_reparametrization(xi);
            if y < lo || y > hi {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::from_polar(1.0 / v_eval(xi), shift * xi) * sinc_interpolate(g, y)
        })
        .collect();
    GridFunction::new(grid, Domain::Frequency, values)
}
