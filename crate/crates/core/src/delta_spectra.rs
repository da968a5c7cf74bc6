//! Kernels `h = Σ hₖ δ⁽ᵏ⁾(· − t₀)` and the reflected differential operator
//!
//! ```text
//! (Hf)(t) = Σₖ (−1)ᵏ hₖ f⁽ᵏ⁾(t₀ − t),   0 < t < t₀,
//! f(0) = f′(0) = … = f⁽ᴷ⁻¹⁾(0) = 0.
//! ```
//!
//! Discretized by Chebyshev–Gauss–Lobatto collocation. The nodes are
//! symmetric about `t₀/2`, so `t ↦ t₀ − t` is the index reversal `j ↦ N−1−j`.
//! The boundary conditions are built into the basis: the first `K` node
//! values are eliminated in favour of the remaining ones and the first `K`
//! collocation equations are dropped, which keeps the eigenproblem square.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use serde::Serialize;

use crate::{Complex64, Error, Result};

/// Largest `|Im λ| / |λ|` accepted on trusted modes.
pub const IMAG_TOLERANCE: f64 = 1e-6;

/// Relative spacing under which neighbouring eigenvalues form a cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaKernel {
    h: Vec<f64>,
    t0: f64,
}

impl DeltaKernel {
    /// Trailing zero coefficients are dropped, so `order()` is the index of
    /// the last nonzero `hₖ`.
    pub fn new(h: impl Into<Vec<f64>>, t0: f64) -> Result<Self> {
        let mut h = h.into();
        if h.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidKernel("non-finite coefficient".into()));
        }
        while h.last() == Some(&0.0) {
            h.pop();
        }
        if h.is_empty() {
            return Err(Error::InvalidKernel("all coefficients vanish".into()));
        }
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::InvalidKernel(format!("t0 must be positive, got {t0}")));
        }
        Ok(Self { h, t0 })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.h
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn order(&self) -> usize {
        self.h.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.h[self.order()]
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.h.iter().map(|h| c * h).collect::<Vec<_>>(), self.t0)
    }
}

/// Chebyshev–Gauss–Lobatto nodes on `[−1, 1]` (descending) and the
/// associated differentiation matrix.
fn chebyshev(n: usize) -> (Vec<f64>, Mat<f64>) {
    let m = (n - 1) as f64;
    // The sine form makes the nodes exactly antisymmetric.
    let x: Vec<f64> = (0..n)
        .map(|j| (PI * (m - 2.0 * j as f64) / (2.0 * m)).sin())
        .collect();
    let c = |i: usize| {
        let w = if i == 0 || i == n - 1 { 2.0 } else { 1.0 };
        if i % 2 == 0 {
            w
        } else {
            -w
        }
    };
    let mut d = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            if i != j {
                let v = c(i) / c(j) / (x[i] - x[j]);
                d[(i, j)] = v;
                row += v;
            }
        }
        d[(i, i)] = -row;
    }
    (x, d)
}

#[derive(Debug, Clone)]
pub struct CollocationModel {
    /// Nodes in `[0, t₀]`, increasing, with `nodes[0] = 0`.
    pub nodes: Vec<f64>,
    /// `diff[m] = Dᵐ` for `m = 0..=max_power`.
    pub diff: Vec<Mat<f64>>,
    /// `reflection[j]` is the index of the node `t₀ − tⱼ`.
    pub reflection: Vec<usize>,
    /// Rows of `Dᵏ` at `t = 0`, `k < K`.
    pub bc_rows: Mat<f64>,
}

impl CollocationModel {
    fn new(t0: f64, n: usize, k: usize, max_power: usize) -> Self {
        let (x, d) = chebyshev(n);
        let nodes = x.iter().map(|x| (1.0 - x) * t0 / 2.0).collect();
        let d1 = Mat::<f64>::from_fn(n, n, |i, j| -2.0 / t0 * d[(i, j)]);
        let mut diff = vec![Mat::<f64>::identity(n, n)];
        for m in 1..=max_power {
            let next = if m == 1 { d1.clone() } else { &diff[m - 1] * &d1 };
            diff.push(next);
        }
        let bc_rows = Mat::<f64>::from_fn(k, n, |r, j| diff[r][(0, j)]);
        Self {
            nodes,
            diff,
            reflection: (0..n).rev().collect(),
            bc_rows,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `Z` with `x = Z y`, where `y` are the kept node values, such that the
/// rows of `bc` vanish on `x`. `eliminated` lists the node indices solved for.
fn recombination(bc: &Mat<f64>, eliminated: &[usize]) -> Result<(Mat<f64>, Vec<usize>)> {
    let n = bc.ncols();
    let r = eliminated.len();
    let kept: Vec<usize> = (0..n).filter(|j| !eliminated.contains(j)).collect();
    // Rows of Dᵏ differ in scale by powers of n²; equilibrate before the rank test.
    let scale: Vec<f64> = (0..r)
        .map(|i| (0..n).map(|j| bc[(i, j)].abs()).fold(0.0, f64::max))
        .collect();
    if scale.iter().any(|&s| s == 0.0) {
        return Err(Error::ModelRank);
    }
    let b1 = Mat::<f64>::from_fn(r, r, |i, j| bc[(i, eliminated[j])] / scale[i]);
    let b2 = Mat::<f64>::from_fn(r, kept.len(), |i, j| bc[(i, kept[j])] / scale[i]);
    let sv = b1
        .singular_values()
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let (hi, lo) = (sv[0], sv[r - 1]);
    if !(lo > 1e-14 * hi) {
        return Err(Error::ModelRank);
    }
    let sol = b1.partial_piv_lu().solve(&b2);
    let mut z = Mat::<f64>::zeros(n, kept.len());
    for (col, &j) in kept.iter().enumerate() {
        z[(j, col)] = 1.0;
    }
    for (row, &j) in eliminated.iter().enumerate() {
        for col in 0..kept.len() {
            z[(j, col)] = -sol[(row, col)];
        }
    }
    Ok((z, kept))
}

/// Collocation model of `H` on `n` nodes and its reduced square matrix.
pub fn build_reflection_operator(kernel: &DeltaKernel, n: usize) -> Result<(CollocationModel, Mat<f64>)> {
    let k = kernel.order();
    if n < 4 * k + 8 {
        return Err(Error::InvalidInput(format!(
            "need at least {} nodes for order {k}, got {n}",
            4 * k + 8
        )));
    }
    let model = CollocationModel::new(kernel.t0, n, k, k);
    let mut m = Mat::<f64>::zeros(n, n);
    for (p, &h) in kernel.h.iter().enumerate() {
        let sign = if p % 2 == 0 { h } else { -h };
        for i in 0..n {
            let src = model.reflection[i];
            for j in 0..n {
                m[(i, j)] += sign * model.diff[p][(src, j)];
            }
        }
    }
    if k == 0 {
        return Ok((model, m));
    }
    let eliminated: Vec<usize> = (0..k).collect();
    let (z, kept) = recombination(&model.bc_rows, &eliminated)?;
    let mz = &m * &z;
    let reduced = Mat::<f64>::from_fn(kept.len(), kept.len(), |i, j| mz[(kept[i], j)]);
    Ok((model, reduced))
}

/// `(2π(n − 1/4)/t₀, −2π(n − 3/4)/t₀)` for `h = δ′(· − t₀)`.
pub fn exact_delta_prime_eigs(t0: f64, n: usize) -> (f64, f64) {
    let n = n as f64;
    (2.0 * PI * (n - 0.25) / t0, -2.0 * PI * (n - 0.75) / t0)
}

/// Leading-order `±|h_K| (2πn/t₀)^K`.
pub fn weyl_prediction(kernel: &DeltaKernel, n: usize) -> Result<(f64, f64)> {
    let k = kernel.order();
    if k == 0 {
        return Err(Error::NotApplicable(
            "order 0 has spectrum {h0, -h0}; there is no growth law".into(),
        ));
    }
    let w = kernel.leading().abs() * (2.0 * PI * n as f64 / kernel.t0).powi(k as i32);
    Ok((w, -w))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaSpectrum {
    pub order: usize,
    pub t0: f64,
    pub nodes: usize,
    /// Ascending.
    pub positive: Vec<f64>,
    /// Descending, i.e. `negative[0]` is closest to zero.
    pub negative: Vec<f64>,
    pub positive_residuals: Vec<f64>,
    pub negative_residuals: Vec<f64>,
    /// Groups of two or more trusted eigenvalues within the cluster tolerance.
    pub clusters: Vec<Cluster>,
    pub max_cluster_size: usize,
    /// `max_cluster_size ≤ K`; not applicable for `K = 0`.
    pub multiplicity_within_bound: Option<bool>,
}

impl DeltaSpectrum {
    pub fn residual_max(&self) -> f64 {
        self.positive_residuals
            .iter()
            .chain(&self.negative_residuals)
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Smallest trusted `|λ|`.
    pub fn min_abs(&self) -> f64 {
        let p = self.positive.first().copied().unwrap_or(f64::INFINITY);
        let n = self.negative.first().map(|l| -l).unwrap_or(f64::INFINITY);
        p.min(n)
    }
}

struct Mode {
    value: Complex64,
    residual: f64,
}

fn modes(a: &Mat<f64>) -> Result<Vec<Mode>> {
    let evd = a.eigen().map_err(|e| Error::Solver(format!("{e:?}")))?;
    let s: Vec<c64> = evd.S().column_vector().iter().copied().collect();
    let u = evd.U();
    let n = a.nrows();
    let ac = Mat::<c64>::from_fn(n, n, |i, j| c64::new(a[(i, j)], 0.0));
    let au = &ac * u;
    Ok(s.iter()
        .enumerate()
        .map(|(j, &l)| {
            let norm: f64 = (0..n).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            let r: f64 = (0..n)
                .map(|i| (au[(i, j)] - u[(i, j)] * l).norm_sqr())
                .sum::<f64>()
                .sqrt();
            Mode {
                value: l,
                residual: r / norm,
            }
        })
        .collect())
}

fn clusters(values: &[f64]) -> Vec<Cluster> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len()
            || (values[i] - values[i - 1]).abs() > CLUSTER_TOLERANCE * values[i].abs().max(values[i - 1].abs());
        if split {
            if i - start > 1 {
                out.push(Cluster {
                    value: values[start],
                    size: i - start,
                });
            }
            start = i;
        }
    }
    out
}

/// The `n_max` eigenvalues of each sign closest to zero, with residuals and
/// multiplicity clusters.
pub fn delta_spectrum(kernel: &DeltaKernel, n: usize, n_max: usize) -> Result<DeltaSpectrum> {
    if n_max == 0 || n_max > n / 4 {
        return Err(Error::InvalidInput(format!(
            "n_max must lie in 1..={} for {n} nodes",
            n / 4
        )));
    }
    let (_, reduced) = build_reflection_operator(kernel, n)?;
    let all = modes(&reduced)?;
    let mut pos: Vec<&Mode> = all.iter().filter(|m| m.value.re > 0.0).collect();
    let mut neg: Vec<&Mode> = all.iter().filter(|m| m.value.re < 0.0).collect();
    pos.sort_by(|a, b| a.value.re.total_cmp(&b.value.re));
    neg.sort_by(|a, b| b.value.re.total_cmp(&a.value.re));
    if pos.len() < n_max || neg.len() < n_max {
        return Err(Error::Solver(format!(
            "only {} positive and {} negative eigenvalues found",
            pos.len(),
            neg.len()
        )));
    }
    pos.truncate(n_max);
    neg.truncate(n_max);
    for (index, m) in pos.iter().chain(&neg).enumerate() {
        let modulus = m.value.norm();
        if m.value.im.abs() > IMAG_TOLERANCE * modulus {
            return Err(Error::Convergence {
                index,
                imag: m.value.im,
                modulus,
            });
        }
    }
    let positive: Vec<f64> = pos.iter().map(|m| m.value.re).collect();
    let negative: Vec<f64> = neg.iter().map(|m| m.value.re).collect();
    let mut found = clusters(&positive);
    found.extend(clusters(&negative));
    let max_cluster_size = found.iter().map(|c| c.size).max().unwrap_or(1);
    let k = kernel.order();
    Ok(DeltaSpectrum {
        order: k,
        t0: kernel.t0,
        nodes: n,
        positive_residuals: pos.iter().map(|m| m.residual).collect(),
        negative_residuals: neg.iter().map(|m| m.residual).collect(),
        positive,
        negative,
        clusters: found,
        max_cluster_size,
        multiplicity_within_bound: (k > 0).then_some(max_cluster_size <= k),
    })
}

/// Positive eigenvalues of the order-`2K` problem for `H²` with the
/// conditions at `0` and the adjoint conditions
/// `Σₗ (−1)ˡ hₗ f⁽ᵏ⁺ˡ⁾(t₀) = 0` at `t₀`, ascending.
///
/// Ill-conditioned for large `n` because of `D^{2K}`; moderate node counts
/// work best.
pub fn squared_spectrum(kernel: &DeltaKernel, n: usize) -> Result<Vec<f64>> {
    let k = kernel.order();
    if k == 0 {
        return Err(Error::NotApplicable("order 0 has no differential part".into()));
    }
    if n < 4 * k + 8 {
        return Err(Error::InvalidInput(format!(
            "need at least {} nodes for order {k}, got {n}",
            4 * k + 8
        )));
    }
    let model = CollocationModel::new(kernel.t0, n, k, 2 * k);
    let h = &kernel.h;
    let mut s = Mat::<f64>::zeros(n, n);
    for (a, &ha) in h.iter().enumerate() {
        for (b, &hb) in h.iter().enumerate() {
            let c = if b % 2 == 0 { ha * hb } else { -ha * hb };
            if c != 0.0 {
                s += c * &model.diff[a + b];
            }
        }
    }
    let bc = Mat::<f64>::from_fn(2 * k, n, |r, j| {
        if r < k {
            model.diff[r][(0, j)]
        } else {
            let r = r - k;
            h.iter()
                .enumerate()
                .map(|(l, &hl)| {
                    let sign = if l % 2 == 0 { hl } else { -hl };
                    sign * model.diff[r + l][(n - 1, j)]
                })
                .sum()
        }
    });
    let eliminated: Vec<usize> = (0..k).chain(n - k..n).collect();
    let (z, kept) = recombination(&bc, &eliminated)?;
    let sz = &s * &z;
    let reduced = Mat::<f64>::from_fn(kept.len(), kept.len(), |i, j| sz[(kept[i], j)]);
    let ev = reduced
        .eigenvalues()
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let mut mu: Vec<f64> = ev
        .into_iter()
        .filter(|z| z.re > 0.0 && z.im.abs() < 1e-8 * z.norm())
        .map(|z| z.re)
        .collect();
    mu.sort_by(f64::total_cmp);
    Ok(mu)
}

/// Largest relative deviation between the squares of the `modes` smallest
/// `|λ|` of the collocation model and the first `modes` eigenvalues of `H²`.
pub fn h2_cross_check(kernel: &DeltaKernel, n: usize, modes_count: usize) -> Result<f64> {
    let (_, reduced) = build_reflection_operator(kernel, n)?;
    let mut ev = reduced
        .eigenvalues()
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut lam2: Vec<f64> = ev.iter().take(modes_count).map(|z| z.re * z.re).collect();
    lam2.sort_by(f64::total_cmp);
    let mu = squared_spectrum(kernel, n)?;
    if mu.len() < modes_count {
        return Err(Error::Solver(format!(
            "squared problem produced {} admissible eigenvalues",
            mu.len()
        )));
    }
    Ok(lam2
        .iter()
        .zip(&mu)
        .map(|(a, b)| (b / a - 1.0).abs())
        .fold(0.0, f64::max))
}

/// `max n·|λₙ/weyl(n) − 1|` over the trusted modes of both signs, an
/// estimate of the constant in the `O(1/n)` correction.
pub fn weyl_constant(kernel: &DeltaKernel, spectrum: &DeltaSpectrum) -> Result<f64> {
    let mut c = 0.0f64;
    for (i, (&lp, &ln)) in spectrum.positive.iter().zip(&spectrum.negative).enumerate() {
        let n = i + 1;
        let (wp, wn) = weyl_prediction(kernel, n)?;
        c = c.max(n as f64 * (lp / wp - 1.0).abs());
        c = c.max(n as f64 * (ln / wn - 1.0).abs());
    }
    Ok(c)
}
