//! Spectral analysis of unbounded Hankel operators.
//!
//! Two operator classes are covered:
//!
//! * quasi-Carleman kernels `h(t) = P(ln t) / t`, which are unitarily
//!   equivalent to the differential operator `A = v Q(D) v` acting on
//!   `L²(ℝ)` (see [`coeff_map`], [`transforms`] and [`discretization`]);
//! * delta-derivative kernels `h = Σ hₖ δ⁽ᵏ⁾(· − t₀)`, which reduce to a
//!   differential operator with the reflected argument `t ↦ t₀ − t` on
//!   `(0, t₀)` (see [`delta_spectra`]).
//!
//! The [`cli`] module wires everything into the `hankelscope` binary.

pub mod cli;
pub mod coeff_map;
pub mod delta_spectra;
pub mod discretization;
mod error;
pub mod polynomials;
pub mod special_functions;
pub mod transforms;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;
