//! Dense real polynomials and a global nonnegativity test on ℝ.
//!
//! Coefficients are stored lowest degree first. Trailing zeros are trimmed
//! after every operation, but only *exact* zeros: callers that want to
//! discard rounding noise must call [`RealPolynomial::scrub`] themselves.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::Mat;
use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

impl RealPolynomial {
    /// Builds a polynomial from coefficients `c[k]` of `xᵏ`. An empty vector
    /// is the zero polynomial.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c · xᵏ`
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// Monic polynomial with the given real roots (repeated roots allowed).
    pub fn from_roots(roots: &[f64]) -> Self {
        roots.iter().fold(Self::constant(1.0), |acc, &r| {
            &acc * &Self::new(vec![-r, 1.0])
        })
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Horner evaluation together with a running a-priori bound on its
    /// rounding error.
    pub fn eval_with_bound(&self, x: f64) -> (f64, f64) {
        let value = self.eval(x);
        let ax = x.abs();
        let magnitude = self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs());
        let m = 2.0 * self.coeffs.len() as f64 * f64::EPSILON / 2.0;
        (value, m / (1.0 - m) * magnitude)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect::<Vec<_>>(),
        )
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k + 1) as f64),
        );
        Self::new(coeffs)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect::<Vec<_>>())
    }

    /// Zeroes every coefficient with `|c| ≤ tol`.
    pub fn scrub(&self, tol: f64) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| if c.abs() <= tol { 0.0 } else { c })
                .collect::<Vec<_>>(),
        )
    }

    /// Euclidean division `self = q · divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        if divisor.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let dd = divisor.degree();
        if self.degree() < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd] / lead;
            quot[k] = c;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= c * d;
            }
            rem[k + dd] = 0.0;
        }
        rem.truncate(dd.max(1));
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Roots of the polynomial as eigenvalues of its companion matrix.
    pub fn companion_roots(&self) -> Result<Vec<crate::Complex64>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.leading();
        let companion = Mat::<f64>::from_fn(n, n, |i, j| {
            if i == 0 {
                -self.coeffs[n - 1 - j] / lead
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        companion
            .eigenvalues()
            .map_err(|e| Error::Solver(format!("companion matrix: {e:?}")))
    }
}

impl fmt::Display for RealPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}·x"),
                _ => format!("{c}·x^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Add for &RealPolynomial {
    type Output = RealPolynomial;

    fn add(self, rhs: Self) -> RealPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        RealPolynomial::new(
            (0..n)
                .map(|k| at(&self.coeffs, k) + at(&rhs.coeffs, k))
                .collect::<Vec<_>>(),
        )
    }
}

impl Neg for &RealPolynomial {
    type Output = RealPolynomial;

    fn neg(self) -> RealPolynomial {
        self.scale(-1.0)
    }
}

impl Sub for &RealPolynomial {
    type Output = RealPolynomial;

    fn sub(self, rhs: Self) -> RealPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &RealPolynomial {
    type Output = RealPolynomial;

    fn mul(self, rhs: Self) -> RealPolynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RealPolynomial::new(out)
    }
}

/// Relative threshold under which a Sturm-chain value is treated as an
/// unresolved sign.
const SIGN_TOLERANCE: f64 = 1e-12;
/// Imaginary-part and clustering tolerance for companion-matrix roots.
const CLUSTER_TOLERANCE: f64 = 1e-8;

/// Sturm chain `p₀ = p, p₁ = p', pᵢ₊₁ = −rem(pᵢ₋₁, pᵢ)`.
///
/// Each member is rescaled to unit max-norm; remainders are scrubbed at
/// `1e-12` relative to the dividend so that a numerically multiple root ends
/// the chain at the gcd.
#[derive(Debug, Clone)]
pub struct SturmSequence {
    chain: Vec<RealPolynomial>,
}

/// Outcome of counting sign changes at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignCount {
    Exact(usize),
    /// Some chain member was within rounding of zero at the point.
    Ambiguous,
}

impl SturmSequence {
    pub fn new(p: &RealPolynomial) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let normalize = |q: RealPolynomial| {
            let n = q.max_norm();
            q.scale(1.0 / n)
        };
        let mut chain = vec![normalize(p.clone())];
        let d = p.derivative();
        if !d.is_zero() {
            chain.push(normalize(d));
        }
        while chain.len() >= 2 && chain.last().unwrap().degree() > 0 {
            let n = chain.len();
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1])?;
            let r = r.scrub(SIGN_TOLERANCE * chain[n - 2].max_norm());
            if r.is_zero() {
                break;
            }
            chain.push(normalize(-&r));
        }
        Ok(Self { chain })
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn members(&self) -> &[RealPolynomial] {
        &self.chain
    }

    fn changes(signs: impl Iterator<Item = f64>) -> usize {
        let mut last = 0.0;
        let mut count = 0;
        for s in signs.filter(|s| *s != 0.0) {
            if last != 0.0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    pub fn sign_changes_at(&self, x: f64) -> SignCount {
        let mut signs = Vec::with_capacity(self.chain.len());
        for q in &self.chain {
            let (v, bound) = q.eval_with_bound(x);
            let magnitude = q
                .coeffs()
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * x.abs() + c.abs());
            if v.abs() <= bound.max(SIGN_TOLERANCE * magnitude) {
                return SignCount::Ambiguous;
            }
            signs.push(v.signum());
        }
        SignCount::Exact(Self::changes(signs.into_iter()))
    }

    /// Sign changes at `+∞` (`positive = true`) or `−∞`.
    pub fn sign_changes_at_infinity(&self, positive: bool) -> usize {
        Self::changes(self.chain.iter().map(|q| {
            let s = q.leading().signum();
            if positive || q.degree() % 2 == 0 {
                s
            } else {
                -s
            }
        }))
    }

    /// Number of distinct real roots.
    pub fn count_real_roots(&self) -> usize {
        self.sign_changes_at_infinity(false) - self.sign_changes_at_infinity(true)
    }

    /// Number of distinct roots in `(a, b]`, or `None` when a sign is
    /// unresolved at either end.
    pub fn count_roots_in(&self, a: f64, b: f64) -> Option<usize> {
        match (self.sign_changes_at(a), self.sign_changes_at(b)) {
            (SignCount::Exact(va), SignCount::Exact(vb)) => Some(va.saturating_sub(vb)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootMethod {
    Sturm,
    Companion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonnegativityCertificate {
    /// A point where the polynomial is certifiably negative.
    Witness { x: f64, value: f64 },
    /// Positive leading coefficient, even degree, and every one of the
    /// `distinct_real_roots` has even multiplicity.
    EvenRoots {
        distinct_real_roots: usize,
        method: RootMethod,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonnegativityVerdict {
    pub nonnegative: bool,
    pub certificate: NonnegativityCertificate,
}

impl NonnegativityVerdict {
    fn witness(x: f64, value: f64) -> Self {
        Self {
            nonnegative: false,
            certificate: NonnegativityCertificate::Witness { x, value },
        }
    }

    fn even_roots(distinct_real_roots: usize, method: RootMethod) -> Self {
        Self {
            nonnegative: true,
            certificate: NonnegativityCertificate::EvenRoots {
                distinct_real_roots,
                method,
            },
        }
    }
}

fn certified_negative(p: &RealPolynomial, x: f64) -> Option<f64> {
    let (v, bound) = p.eval_with_bound(x);
    (v < -bound).then_some(v)
}

/// Walks `x = dir·2ᵏ` until the polynomial is certifiably negative.
fn scan_for_witness(p: &RealPolynomial, dir: f64) -> NonnegativityVerdict {
    let mut x = dir;
    for _ in 0..1100 {
        if let Some(v) = certified_negative(p, x) {
            return NonnegativityVerdict::witness(x, v);
        }
        x *= 2.0;
    }
    // Unreachable for finite coefficients: the leading term dominates long
    // before 2¹¹⁰⁰ overflows.
    NonnegativityVerdict::witness(x, p.eval(x))
}

/// Decides whether `p(x) ≥ 0` for every real `x`.
///
/// A real root of even multiplicity (the polynomial touching zero) counts as
/// nonnegative.
pub fn is_nonnegative_on_reals(p: &RealPolynomial) -> Result<NonnegativityVerdict> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !p.is_finite() {
        return Err(Error::InvalidInput("non-finite coefficient".into()));
    }
    let lead = p.leading();
    let deg = p.degree();
    if deg == 0 {
        return Ok(if lead > 0.0 {
            NonnegativityVerdict::even_roots(0, RootMethod::Sturm)
        } else {
            NonnegativityVerdict::witness(0.0, lead)
        });
    }
    if deg % 2 == 1 {
        // Negative at −∞ for a positive leading coefficient, at +∞ otherwise.
        return Ok(scan_for_witness(p, if lead > 0.0 { -1.0 } else { 1.0 }));
    }
    if lead < 0.0 {
        return Ok(scan_for_witness(p, 1.0));
    }
    match sturm_decision(p)? {
        Some(verdict) => Ok(verdict),
        None => companion_decision(p),
    }
}

/// Sturm-based decision; `None` if a sign could not be resolved.
fn sturm_decision(p: &RealPolynomial) -> Result<Option<NonnegativityVerdict>> {
    let sturm = SturmSequence::new(p)?;
    let total = sturm.count_real_roots();
    if total == 0 {
        return Ok(Some(NonnegativityVerdict::even_roots(0, RootMethod::Sturm)));
    }
    let lead = p.leading();
    let cauchy = 1.0
        + p.coeffs()[..p.degree()]
            .iter()
            .fold(0.0_f64, |m, c| m.max((c / lead).abs()));
    // Power of two so that every bisection point is an exact dyadic rational.
    let bound = 2f64.powi(cauchy.log2().ceil() as i32 + 1);

    let mut isolated = Vec::with_capacity(total);
    let mut stack = vec![(-bound, bound)];
    while let Some((a, b)) = stack.pop() {
        let Some(count) = sturm.count_roots_in(a, b) else {
            return Ok(None);
        };
        if count == 0 {
            continue;
        }
        let width = b - a;
        if count == 1 || width <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
            isolated.push((a, b));
            continue;
        }
        let m = 0.5 * (a + b);
        stack.push((a, m));
        stack.push((m, b));
    }
    isolated.sort_by(|x, y| x.0.total_cmp(&y.0));

    // Shrink each isolating interval so that gaps between them are root-free
    // and well separated from the roots.
    let mut refined = Vec::with_capacity(isolated.len());
    for (mut a, mut b) in isolated {
        for _ in 0..40 {
            if b - a <= 1e-10 * (1.0 + a.abs().max(b.abs())) {
                break;
            }
            let m = 0.5 * (a + b);
            match sturm.count_roots_in(a, m) {
                Some(0) => a = m,
                Some(_) => b = m,
                None => break,
            }
        }
        refined.push((a, b));
    }

    for pair in refined.windows(2) {
        let x = 0.5 * (pair[0].1 + pair[1].0);
        let (v, err) = p.eval_with_bound(x);
        if v < -err {
            return Ok(Some(NonnegativityVerdict::witness(x, v)));
        }
        if v <= err {
            return Ok(None);
        }
    }
    Ok(Some(NonnegativityVerdict::even_roots(total, RootMethod::Sturm)))
}

fn companion_decision(p: &RealPolynomial) -> Result<NonnegativityVerdict> {
    let mut real: Vec<f64> = p
        .companion_roots()?
        .into_iter()
        .filter(|z| z.im.abs() <= CLUSTER_TOLERANCE * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    real.sort_by(f64::total_cmp);

    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for r in real {
        match clusters.last_mut() {
            Some(c) if (r - c.last().unwrap()).abs() <= CLUSTER_TOLERANCE * (1.0 + r.abs()) => {
                c.push(r)
            }
            _ => clusters.push(vec![r]),
        }
    }
    for c in &clusters {
        let centre = c.iter().sum::<f64>() / c.len() as f64;
        let spread = c.last().unwrap() - c.first().unwrap();
        let delta = (1e-6 * (1.0 + centre.abs())).max(4.0 * spread);
        for x in [centre - delta, centre + delta] {
            if let Some(v) = certified_negative(p, x) {
                return Ok(NonnegativityVerdict::witness(x, v));
            }
        }
    }
    Ok(NonnegativityVerdict::even_roots(
        clusters.len(),
        RootMethod::Companion,
    ))
}
