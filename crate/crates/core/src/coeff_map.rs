//! The linear map between the kernel polynomial `P` of `h(t) = P(ln t)/t`
//! and the symbol polynomial `Q` of the equivalent differential operator
//! `A = v Q(D) v`.
//!
//! `q_k = Σ_{ℓ ≥ k} C(ℓ, k) ω⁽ℓ⁻ᵏ⁾(0) p_ℓ` with `ω(z) = 1/Γ(1 − z)`. The
//! matrix is unit upper-triangular, so `q_K = p_K` and the inverse is a
//! back-substitution.

use serde::Serialize;

use crate::polynomials::RealPolynomial;
use crate::special_functions::build_gamma_jet;
use crate::{Error, Result, EULER_GAMMA};

/// Largest degree for which the map is assembled.
pub const MAX_MAP_DEGREE: usize = 12;

/// Kernel `h(t) = P(ln t)/t` with real coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiCarlemanKernel {
    p: RealPolynomial,
}

impl QuasiCarlemanKernel {
    pub fn new(p: RealPolynomial) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if !p.is_finite() {
            return Err(Error::InvalidInput("non-finite kernel coefficient".into()));
        }
        Ok(Self { p })
    }

    /// The Carleman kernel `1/t`.
    pub fn carleman() -> Self {
        Self {
            p: RealPolynomial::constant(1.0),
        }
    }

    pub fn polynomial(&self) -> &RealPolynomial {
        &self.p
    }

    pub fn degree(&self) -> usize {
        self.p.degree()
    }

    /// `h(t)` for `t > 0`.
    pub fn eval(&self, t: f64) -> f64 {
        self.p.eval(t.ln()) / t
    }
}

/// Dense `(K+1)×(K+1)` unit upper-triangular matrix `M[k][ℓ] = C(ℓ,k)·ω⁽ℓ⁻ᵏ⁾(0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoeffMapMatrix {
    degree: usize,
    rows: Vec<Vec<f64>>,
}

impl CoeffMapMatrix {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.rows[k][l]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `q = M p`.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        assert_eq!(p.len(), self.degree + 1);
        self.rows
            .iter()
            .enumerate()
            .map(|(k, row)| (k..=self.degree).map(|l| row[l] * p[l]).sum())
            .collect()
    }

    /// Solves `M p = q` by back-substitution.
    pub fn solve(&self, q: &[f64]) -> Vec<f64> {
        assert_eq!(q.len(), self.degree + 1);
        let mut p = vec![0.0; q.len()];
        for k in (0..=self.degree).rev() {
            let tail: f64 = (k + 1..=self.degree).map(|l| self.rows[k][l] * p[l]).sum();
            p[k] = (q[k] - tail) / self.rows[k][k];
        }
        p
    }
}

fn binomial_rows(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let mut row = vec![1.0; l + 1];
        for k in 1..l {
            row[k] = rows[l - 1][k - 1] + rows[l - 1][k];
        }
        rows.push(row);
    }
    rows
}

pub fn build_map_matrix(degree: usize) -> Result<CoeffMapMatrix> {
    if degree > MAX_MAP_DEGREE {
        return Err(Error::UnsupportedOrder {
            order: degree,
            max: MAX_MAP_DEGREE,
        });
    }
    let jet = build_gamma_jet(degree)?;
    let binom = binomial_rows(degree);
    let rows = (0..=degree)
        .map(|k| {
            (0..=degree)
                .map(|l| {
                    if l < k {
                        0.0
                    } else {
                        binom[l][k] * jet.omega_derivs[l - k]
                    }
                })
                .collect()
        })
        .collect();
    Ok(CoeffMapMatrix { degree, rows })
}

/// Symbol polynomial `Q` for the kernel polynomial `P`.
pub fn p_to_q(p: &RealPolynomial) -> Result<RealPolynomial> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let m = build_map_matrix(p.degree())?;
    let mut q = m.apply(p.coeffs());
    // ω(0) = 1 exactly; keep the leading coefficient bit-identical.
    *q.last_mut().unwrap() = p.leading();
    Ok(RealPolynomial::new(q))
}

/// Kernel polynomial `P` recovered from the symbol polynomial `Q`.
pub fn q_to_p(q: &RealPolynomial) -> Result<RealPolynomial> {
    if q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let m = build_map_matrix(q.degree())?;
    Ok(RealPolynomial::new(m.solve(q.coeffs())))
}

/// Closed-form `Q` for `deg P ≤ 2`:
/// `q₀ = p₀ − γp₁ + (γ² − π²/6)p₂`, `q₁ = p₁ − 2γp₂`, `q₂ = p₂`.
pub fn p_to_q_closed_form(p: &RealPolynomial) -> Option<RealPolynomial> {
    let c = p.coeffs();
    let g = EULER_GAMMA;
    let z2 = std::f64::consts::PI.powi(2) / 6.0;
    match p.degree() {
        0 => Some(p.clone()),
        1 => Some(RealPolynomial::new(vec![c[0] - g * c[1], c[1]])),
        2 => Some(RealPolynomial::new(vec![
            c[0] - g * c[1] + (g * g - z2) * c[2],
            c[1] - 2.0 * g * c[2],
            c[2],
        ])),
        _ => None,
    }
}
