//! Finite matrix models of both sides of `H ≅ A = v Q(D) v`.
//!
//! The Hankel side is a Nyström matrix on the log grid. With
//! `s = ln(eˣ + eʸ)` the entry
//!
//! ```text
//! M(x, y) = Δx · e^{(x+y)/2} · P(s) / (eˣ + eʸ) = Δx · e^{(x+y)/2 − s} · P(s)
//! ```
//!
//! is evaluated as `s = max(x, y) + ln1p(e^{−|x−y|})`, which never overflows.
//!
//! The A side acts on samples over the frequency grid. `D = i d/dξ` is the
//! Fourier dual of multiplication by `x`, so the discrete
//! `Q(D_N) = Φ diag(Q(xⱼ)) Φ*` is the phase-twisted circulant
//!
//! ```text
//! Q(D_N)ₖₗ = (−1)^{k−l} · N⁻¹ Σⱼ Q(xⱼ) e^{−2πij(k−l)/N}.
//! ```
//!
//! Odd powers of `D` make this matrix complex Hermitian, not real symmetric.

use faer::{c64, Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeff_map::{p_to_q, QuasiCarlemanKernel};
use crate::polynomials::{is_nonnegative_on_reals, RealPolynomial};
use crate::transforms::{
    f_transform, fft_plan, inverse_mellin, mellin, u_map, v_eval, Domain, GridFunction, LogGrid,
};
use crate::{Complex64, Error, Result};

/// Asymmetry above this multiple of `max|M|` aborts A-side assembly.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-6;

/// Residuals above this multiple of `max|λ|` are reported as solver failure.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Relative gap above which the quadratic-form identity is flagged.
pub const IDENTITY_GAP_FLAG: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    HankelSide,
    ASide,
}

#[derive(Debug, Clone)]
pub enum OperatorMatrix {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        match self {
            Self::Real(m) => m.nrows(),
            Self::Complex(m) => m.nrows(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match self {
            Self::Real(m) => Complex64::new(m[(i, j)], 0.0),
            Self::Complex(m) => m[(i, j)],
        }
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut best = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                best = best.max(self.entry(i, j).norm());
            }
        }
        best
    }

    /// `max |Mᵢⱼ − conj(Mⱼᵢ)|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..j {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
            worst = worst.max(self.entry(j, j).im.abs());
        }
        worst
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j) * x[j]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssemblyInfo {
    pub kind: OperatorKind,
    pub quadrature: String,
    pub half_width: f64,
    pub nodes: usize,
    pub asymmetry: f64,
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub matrix: OperatorMatrix,
    pub grid: LogGrid,
    pub info: AssemblyInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EssentialSpectrum {
    /// All of ℝ.
    RealLine,
    /// `[0, ∞)`.
    HalfLine,
    Unknown,
}

/// Coarse picture of how eigenvalues populate the spectrum.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Filling {
    pub negative_count: usize,
    pub positive_count: usize,
    /// Widest gap between consecutive eigenvalues within `±max|λ|/2`.
    pub largest_inner_gap: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Verdicts {
    pub positivity: Option<bool>,
    pub essential_spectrum: EssentialSpectrum,
    pub min_eigenvalue: f64,
    /// Whether the sign of the smallest eigenvalue agrees with `positivity`.
    pub empirically_consistent: Option<bool>,
    pub filling: Filling,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub info: AssemblyInfo,
    pub verdicts: Verdicts,
}

impl SpectrumReport {
    pub fn residual_max(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    pub fn negative_count_below(&self, threshold: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < threshold).count()
    }
}

/// Nyström matrix of `U H U*` on the log grid with trapezoid weights.
pub fn build_hankel_matrix(kernel: &QuasiCarlemanKernel, grid: &LogGrid) -> Result<DiscreteOperator> {
    let n = grid.len();
    let dx = grid.spacing();
    let x = grid.nodes();
    let p = kernel.polynomial();
    let mut m = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let s = x[i].max(x[j]) + (-(x[i] - x[j]).abs()).exp().ln_1p();
            let value = dx * (0.5 * (x[i] + x[j]) - s).exp() * p.eval(s);
            if !value.is_finite() {
                return Err(Error::TruncationDomain { row: i, col: j });
            }
            m[(i, j)] = value;
            m[(j, i)] = value;
        }
    }
    Ok(DiscreteOperator {
        matrix: OperatorMatrix::Real(m),
        grid: *grid,
        info: AssemblyInfo {
            kind: OperatorKind::HankelSide,
            quadrature: "trapezoid-nystrom".into(),
            half_width: grid.half_width(),
            nodes: n,
            asymmetry: 0.0,
        },
    })
}

/// `V Q(D_N) V` on the frequency grid of `grid`.
pub fn build_a_matrix(q: &RealPolynomial, grid: &LogGrid) -> Result<DiscreteOperator> {
    build_a_matrix_with_weight(q, grid, v_eval)
}

/// As [`build_a_matrix`] with an arbitrary weight in place of `v`.
pub fn build_a_matrix_with_weight(
    q: &RealPolynomial,
    grid: &LogGrid,
    weight: impl Fn(f64) -> f64,
) -> Result<DiscreteOperator> {
    let n = grid.len();
    let mut c: Vec<Complex64> = grid
        .nodes()
        .into_iter()
        .map(|x| Complex64::new(q.eval(x), 0.0))
        .collect();
    fft_plan(n, false).process(&mut c);
    for (m, cm) in c.iter_mut().enumerate() {
        *cm *= if m % 2 == 0 { 1.0 } else { -1.0 } / n as f64;
    }
    let w: Vec<f64> = grid.frequencies().into_iter().map(weight).collect();
    let raw = Mat::<c64>::from_fn(n, n, |k, l| c[(k + n - l) % n] * (w[k] * w[l]));
    let raw = OperatorMatrix::Complex(raw);
    let asymmetry = raw.asymmetry();
    let scale = raw.max_abs();
    if asymmetry > ASYMMETRY_TOLERANCE * scale {
        return Err(Error::DiscretizationFailure {
            asymmetry,
            tolerance: ASYMMETRY_TOLERANCE * scale,
        });
    }
    let OperatorMatrix::Complex(raw) = raw else {
        unreachable!()
    };
    let sym = Mat::<c64>::from_fn(n, n, |i, j| 0.5 * (raw[(i, j)] + raw[(j, i)].conj()));
    Ok(DiscreteOperator {
        matrix: OperatorMatrix::Complex(sym),
        grid: *grid,
        info: AssemblyInfo {
            kind: OperatorKind::ASide,
            quadrature: "fourier-spectral".into(),
            half_width: grid.half_width(),
            nodes: n,
            asymmetry,
        },
    })
}

fn filling(eigenvalues: &[f64]) -> Filling {
    let top = eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let inner: Vec<f64> = eigenvalues
        .iter()
        .cloned()
        .filter(|l| l.abs() <= 0.5 * top)
        .collect();
    Filling {
        negative_count: eigenvalues.iter().filter(|&&l| l < 0.0).count(),
        positive_count: eigenvalues.iter().filter(|&&l| l > 0.0).count(),
        largest_inner_gap: inner.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
    }
}

fn unknown_verdicts(eigenvalues: &[f64]) -> Verdicts {
    Verdicts {
        positivity: None,
        essential_spectrum: EssentialSpectrum::Unknown,
        min_eigenvalue: eigenvalues.first().copied().unwrap_or(f64::NAN),
        empirically_consistent: None,
        filling: filling(eigenvalues),
    }
}

fn real_residuals(m: &Mat<f64>, u: faer::MatRef<'_, f64>, lambda: &[f64]) -> Vec<f64> {
    let mu = m * u;
    (0..lambda.len())
        .map(|j| {
            (0..u.nrows())
                .map(|i| (mu[(i, j)] - lambda[j] * u[(i, j)]).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

fn complex_residuals(m: &Mat<c64>, u: faer::MatRef<'_, c64>, lambda: &[f64]) -> Vec<f64> {
    let mu = m * u;
    (0..lambda.len())
        .map(|j| {
            (0..u.nrows())
                .map(|i| (mu[(i, j)] - u[(i, j)] * lambda[j]).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Full eigendecomposition with per-pair residuals `‖Mx − λx‖`.
pub fn eigen_sym(op: &DiscreteOperator) -> Result<SpectrumReport> {
    let solver = |e: faer::linalg::evd::EvdError| Error::Solver(format!("{e:?}"));
    let (eigenvalues, residuals) = match &op.matrix {
        OperatorMatrix::Real(m) => {
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(solver)?;
            let lambda: Vec<f64> = evd.S().column_vector().iter().copied().collect();
            let res = real_residuals(m, evd.U(), &lambda);
            (lambda, res)
        }
        OperatorMatrix::Complex(m) => {
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(solver)?;
            let lambda: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
            let res = complex_residuals(m, evd.U(), &lambda);
            (lambda, res)
        }
    };
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Solver("non-finite eigenvalue".into()));
    }
    let report = SpectrumReport {
        verdicts: unknown_verdicts(&eigenvalues),
        eigenvalues,
        residuals,
        info: op.info.clone(),
    };
    let bound = RESIDUAL_TOLERANCE * report.max_abs_eigenvalue().max(f64::MIN_POSITIVE);
    let worst = report.residual_max();
    if worst > bound {
        return Err(Error::Solver(format!(
            "residual {worst:e} exceeds {bound:e} after full decomposition"
        )));
    }
    Ok(report)
}

/// Eigenvalue of `op` near zero together with the diagnostics used to decide
/// whether it is a genuine null vector or an artifact of the region where
/// `v` has decayed.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroModeCandidate {
    pub eigenvalue: f64,
    pub residual: f64,
    /// Fraction of `|x|²` on nodes where `v(ξ)² · max|Q(xⱼ)| < delta`.
    pub boundary_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroModeAudit {
    pub candidates: Vec<ZeroModeCandidate>,
    /// Candidates whose residual and boundary mass are both below tolerance.
    pub genuine: usize,
}

/// Heuristic stand-in for "0 is not an eigenvalue of A": every eigenvector
/// with `|λ| < delta` should live where the weight has already silenced the
/// symbol `q`, i.e. be an artifact of truncation.
pub fn zero_mode_audit(
    op: &DiscreteOperator,
    q: &RealPolynomial,
    delta: f64,
    tol: f64,
) -> Result<ZeroModeAudit> {
    let OperatorMatrix::Complex(m) = &op.matrix else {
        return Err(Error::NotApplicable("zero-mode audit runs on the A side".into()));
    };
    let n = m.nrows();
    let q_max = op.grid.nodes().iter().map(|&x| q.eval(x).abs()).fold(0.0, f64::max);
    let edge: Vec<usize> = op
        .grid
        .frequencies()
        .iter()
        .enumerate()
        .filter(|(_, &xi)| v_eval(xi).powi(2) * q_max < delta)
        .map(|(k, _)| k)
        .collect();
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let lambda: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    let u = evd.U();
    let residuals = complex_residuals(m, u, &lambda);
    let mut candidates = Vec::new();
    for (j, &l) in lambda.iter().enumerate() {
        if l.abs() >= delta {
            continue;
        }
        let total: f64 = (0..n).map(|i| u[(i, j)].norm_sqr()).sum();
        let outer: f64 = edge.iter().map(|&i| u[(i, j)].norm_sqr()).sum();
        candidates.push(ZeroModeCandidate {
            eigenvalue: l,
            residual: residuals[j],
            boundary_mass: outer / total,
        });
    }
    let genuine = candidates
        .iter()
        .filter(|c| c.residual < tol && c.boundary_mass < tol)
        .count();
    Ok(ZeroModeAudit {
        candidates,
        genuine,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct FormIdentity {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub relative_gap: f64,
    /// `relative_gap > IDENTITY_GAP_FLAG`: the grid is too coarse.
    pub flagged: bool,
}

/// Zero-padding factor for the frequency-side evaluation. `Φ*(v·Ff)` decays
/// only like `e^{−|x|/2}`, which wraps around on the unpadded grid.
pub const FORM_PADDING: usize = 4;

/// Evaluates `(H f₁, f₂)` by double quadrature on the log grid and
/// `(A F f₁, F f₂)` on the frequency grid.
pub fn form_identity_check(
    p: &RealPolynomial,
    f1: impl Fn(f64) -> f64,
    f2: impl Fn(f64) -> f64,
    grid: &LogGrid,
) -> Result<FormIdentity> {
    let kernel = QuasiCarlemanKernel::new(p.clone())?;
    let q = p_to_q(p)?;

    let u1 = u_map(&f1, grid)?;
    let u2 = u_map(&f2, grid)?;
    let h = build_hankel_matrix(&kernel, grid)?;
    let hu1 = GridFunction::new(*grid, Domain::Log, h.matrix.apply(u1.values()))?;
    let lhs = hu1.inner(&u2);

    let wide = grid.widened(FORM_PADDING)?;
    let g1 = f_transform(&f1, &wide)?;
    let g2 = f_transform(&f2, &wide)?;
    let xi = wide.frequencies();
    let x = wide.nodes();
    let vg1 = g1.map_values(|k, z| z * v_eval(xi[k]));
    let in_x = inverse_mellin(&vg1)?.map_values(|j, z| z * q.eval(x[j]));
    let qd = mellin(&in_x)?.map_values(|k, z| z * v_eval(xi[k]));
    let rhs = qd.inner(&g2);

    let scale = lhs.norm().max(rhs.norm());
    let relative_gap = if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).norm() / scale
    };
    Ok(FormIdentity {
        lhs,
        rhs,
        relative_gap,
        flagged: relative_gap > IDENTITY_GAP_FLAG,
    })
}

/// Seeded test function `f(t) = t^{−1/2} φ(ln t)` with
/// `φ(x) = e^{−(x−c)²/(2σ²)} · sinc(B(x−c)) · cos(ωx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFunction {
    pub centre: f64,
    pub width: f64,
    pub bandwidth: f64,
    pub frequency: f64,
}

impl TestFunction {
    pub fn phi(&self, x: f64) -> f64 {
        let y = x - self.centre;
        let by = self.bandwidth * y;
        let sinc = if by == 0.0 { 1.0 } else { by.sin() / by };
        (-y * y / (2.0 * self.width * self.width)).exp() * sinc * (self.frequency * x).cos()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.phi(t.ln()) / t.sqrt()
    }

    pub fn as_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        move |t| self.eval(t)
    }
}

/// Deterministic test function for `seed`. The centre is kept well inside
/// the grid so the Gaussian window is negligible at the edges.
pub fn test_function_factory(seed: u64, grid: &LogGrid) -> TestFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = (grid.half_width() / 8.0).min(1.5);
    TestFunction {
        centre: rng.gen_range(-reach..=reach),
        width: rng.gen_range(0.8..=1.2),
        bandwidth: rng.gen_range(0.5..=2.0),
        frequency: rng.gen_range(0.0..=3.0),
    }
}

/// Fills the theorem-backed verdicts for kernel polynomial `p`.
pub fn spectral_rules(p: &RealPolynomial, mut report: SpectrumReport) -> Result<SpectrumReport> {
    let k = p.degree();
    let essential = if k == 0 {
        EssentialSpectrum::Unknown
    } else if k % 2 == 1 {
        EssentialSpectrum::RealLine
    } else if p.leading() > 0.0 {
        EssentialSpectrum::HalfLine
    } else {
        EssentialSpectrum::Unknown
    };
    let positive = is_nonnegative_on_reals(&p_to_q(p)?)?.nonnegative;
    let min = report.eigenvalues.first().copied().unwrap_or(f64::NAN);
    let tol = RESIDUAL_TOLERANCE * report.max_abs_eigenvalue();
    report.verdicts = Verdicts {
        positivity: Some(positive),
        essential_spectrum: essential,
        min_eigenvalue: min,
        empirically_consistent: Some(if positive { min >= -tol } else { min < -tol }),
        filling: filling(&report.eigenvalues),
    };
    Ok(report)
}
