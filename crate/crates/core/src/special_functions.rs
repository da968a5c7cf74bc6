//! Gamma-function machinery: complex log-gamma, the unit-modulus phase
//! `Γ(1/2 + iξ)/|Γ(1/2 + iξ)|`, zeta values, and the Taylor jet of
//! `ω(z) = 1/Γ(1 − z)` at the origin.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result, EULER_GAMMA};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_78;

/// Largest jet order accepted by [`build_gamma_jet`].
pub const MAX_JET_ORDER: usize = 30;

/// `log Γ(z)` for `Re z > 0`.
///
/// The result is the analytic continuation of the real log-gamma off the
/// positive axis, so the imaginary part is continuous along vertical lines
/// rather than wrapped into `(−π, π]`. Uses the Lanczos approximation with
/// `g = 7` and nine terms; arguments with `Re z < 1/2` are first shifted
/// by the recurrence `Γ(z) = Γ(z + 1)/z`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re > 0.0) || !z.im.is_finite() {
        return Err(Error::Domain { re: z.re, im: z.im });
    }
    if z.re < 0.5 {
        return Ok(lanczos_log_gamma(z + 1.0) - z.ln());
    }
    Ok(lanczos_log_gamma(z))
}

fn lanczos_log_gamma(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (k, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (zm1 + k as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (zm1 + 0.5) * t.ln() - t + series.ln()
}

/// `ln cosh x` without overflow.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `Γ(1/2 + iξ)·√(cosh(πξ)/π)`, which has unit modulus because
/// `|Γ(1/2 + iξ)|² = π/cosh(πξ)`.
///
/// Only the argument of `Γ(1/2 + iξ)` is taken from [`log_gamma`]; the
/// modulus is exactly one up to the rounding of `cis`.
pub fn gamma_half_phase(xi: f64) -> Complex64 {
    if xi == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let lg = lanczos_log_gamma(Complex64::new(0.5, xi));
    Complex64::from_polar(1.0, lg.im)
}

/// Riemann zeta at an integer `s ≥ 2`, by Euler–Maclaurin summation with
/// ten explicit terms and eight Bernoulli corrections.
pub fn zeta(s: usize) -> f64 {
    assert!(s >= 2, "zeta is only provided for integer s >= 2");
    // B₂, B₄, …, B₁₆
    const BERNOULLI: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    const N: usize = 10;
    let sf = s as f64;
    let nf = N as f64;

    let head: f64 = (1..N).rev().map(|n| (n as f64).powf(-sf)).sum();
    let mut tail = nf.powf(1.0 - sf) / (sf - 1.0) + 0.5 * nf.powf(-sf);

    // B_{2j}/(2j)! · s(s+1)…(s+2j−2) · N^{−s−2j+1}
    let mut rising = sf; // s(s+1)…(s+2j−2), starting at j = 1
    let mut factorial = 2.0; // (2j)!
    let mut power = nf.powf(-sf - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        tail += b / factorial * rising * power;
        let next = 2.0 * (j + 1) as f64;
        rising *= (sf + next - 1.0) * (sf + next);
        factorial *= (next + 1.0) * (next + 2.0);
        power /= nf * nf;
    }
    head + tail
}

/// Taylor jet of `ω(z) = 1/Γ(1 − z)` at `z = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaJet {
    pub order: usize,
    /// `ω⁽ᵐ⁾(0)` for `m = 0..=order`.
    pub omega_derivs: Vec<f64>,
    pub euler_gamma: f64,
    /// `ζ(2), …, ζ(order)`.
    pub zeta_values: Vec<f64>,
}

impl GammaJet {
    /// Taylor coefficients `cₘ` of `1/Γ(1 + w) = Σ cₘ wᵐ`.
    pub fn reciprocal_gamma_coeffs(&self) -> Vec<f64> {
        let mut factorial = 1.0;
        self.omega_derivs
            .iter()
            .enumerate()
            .map(|(m, d)| {
                if m > 0 {
                    factorial *= m as f64;
                }
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * d / factorial
            })
            .collect()
    }
}

/// Builds `ω⁽⁰⁾(0), …, ω⁽ᵒʳᵈᵉʳ⁾(0)`.
///
/// With `1/Γ(1 + w) = exp(γw + Σ_{k≥2} (−1)ᵏ⁺¹ ζ(k) wᵏ / k) = Σ cₘ wᵐ`,
/// differentiating the exponential gives the recurrence
/// `m·cₘ = Σ_{k=1}^{m} k·sₖ·c_{m−k}` where `sₖ` are the exponent's
/// coefficients. Then `ω⁽ᵐ⁾(0) = (−1)ᵐ m! cₘ`.
pub fn build_gamma_jet(order: usize) -> Result<GammaJet> {
    if order > MAX_JET_ORDER {
        return Err(Error::UnsupportedOrder {
            order,
            max: MAX_JET_ORDER,
        });
    }
    let zeta_values: Vec<f64> = (2..=order).map(zeta).collect();

    // k·sₖ
    let weighted: Vec<f64> = (0..=order)
        .map(|k| match k {
            0 => 0.0,
            1 => EULER_GAMMA,
            _ => {
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                sign * zeta_values[k - 2]
            }
        })
        .collect();

    let mut c = vec![0.0; order + 1];
    c[0] = 1.0;
    for m in 1..=order {
        let acc: f64 = (1..=m).map(|k| weighted[k] * c[m - k]).sum();
        c[m] = acc / m as f64;
    }

    let mut factorial = 1.0;
    let omega_derivs = c
        .iter()
        .enumerate()
        .map(|(m, cm)| {
            if m > 0 {
                factorial *= m as f64;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * factorial * cm
        })
        .collect();

    Ok(GammaJet {
        order,
        omega_derivs,
        euler_gamma: EULER_GAMMA,
        zeta_values,
    })
}

/// `π/cosh(πξ)`, the Carleman multiplier.
pub fn carleman_multiplier(xi: f64) -> f64 {
    (PI.ln() - ln_cosh(PI * xi)).exp()
}
