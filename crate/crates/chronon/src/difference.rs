//! The generalized two-point difference quotient acting on entire functions
//! of the complex evolution parameter, its truncated derivative-series form,
//! and the eigenvalue identity that ties it to the deformed spectra.
//!
//! The quotient is
//!
//! ```text
//! (δ_λ/δs f)(s) = [ f(s + δs) − f(s + δs − λ) ] / λ
//! ```
//!
//! For exponentials `f(s) = e^{sE}` this acts as multiplication by exactly
//! the deformed energy returned by [`crate::dispersion::ed_general`], which
//! is the identity [`eigen_ratio`] verifies numerically.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// An entire function of the complex parameter `s`. Polynomials and
/// exponentials carry exact derivative evaluators of every order, which the
/// series form requires; a user-supplied evaluator supports only the direct
/// quotient.
#[derive(Clone)]
pub enum AnalyticSignal {
    /// `c₀ + c₁s + … + c_d s^d`, coefficients in ascending order.
    Polynomial(Vec<C64>),
    /// `e^{sE}` for a real energy `E`.
    Exponential { energy: f64 },
    /// Arbitrary evaluator; no exact derivatives available.
    User(Arc<dyn Fn(C64) -> C64 + Send + Sync>),
}

impl AnalyticSignal {
    pub fn constant(c: C64) -> Self {
        AnalyticSignal::Polynomial(vec![c])
    }

    /// The identity function `f(s) = s`.
    pub fn linear() -> Self {
        AnalyticSignal::Polynomial(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
    }

    pub fn eval(&self, s: C64) -> C64 {
        match self {
            AnalyticSignal::Polynomial(coeffs) => horner(coeffs, s),
            AnalyticSignal::Exponential { energy } => (s * *energy).exp(),
            AnalyticSignal::User(f) => f(s),
        }
    }

    /// Exact `order`-th derivative at `s`. Order 0 is the value itself.
    /// User-supplied evaluators have no exact derivatives.
    pub fn derivative(&self, order: u32, s: C64) -> Result<C64> {
        match self {
            AnalyticSignal::Polynomial(coeffs) => {
                let mut d = coeffs.clone();
                for _ in 0..order {
                    d = differentiate(&d);
                }
                Ok(horner(&d, s))
            }
            AnalyticSignal::Exponential { energy } => {
                Ok(C64::new(*energy, 0.0).powu(order) * (s * *energy).exp())
            }
            AnalyticSignal::User(_) => Err(Error::Capability(
                "exact derivatives are available for the polynomial and exponential classes only"
                    .into(),
            )),
        }
    }

    fn supports_series(&self) -> bool {
        !matches!(self, AnalyticSignal::User(_))
    }
}

fn horner(coeffs: &[C64], s: C64) -> C64 {
    coeffs
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

fn differentiate(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// The two-point difference quotient `[f(s+δs) − f(s+δs−λ)]/λ`.
pub fn apply_delta(f: &AnalyticSignal, s: C64, delta_s: C64, lambda: C64) -> Result<C64> {
    if lambda == C64::new(0.0, 0.0) {
        return Err(Error::Domain("difference span lambda must be nonzero".into()));
    }
    let shifted = s + delta_s;
    Ok((f.eval(shifted) - f.eval(shifted - lambda)) / lambda)
}

/// Truncated derivative-series form of the quotient,
///
/// ```text
/// Σ_{n=1}^{n_max} λ^{n−1}/n! · f⁽ⁿ⁾(s*)      with  s* = s + δs − λ.
/// ```
///
/// The expansion point matters: summing the series at `s*` reproduces
/// [`apply_delta`] for every `(δs, λ)`, because the quotient is the Taylor
/// remainder of `f(s* + λ)` around `s*` divided by `λ`. When `δs = λ`
/// (the forward-difference case) the point collapses to `s` itself, which is
/// where the series is usually quoted; for any other scheme quoting it at `s`
/// would not converge to the quotient. Requires an exact-derivative class.
pub fn series_delta(
    f: &AnalyticSignal,
    s: C64,
    delta_s: C64,
    lambda: C64,
    n_max: u32,
) -> Result<C64> {
    if lambda == C64::new(0.0, 0.0) {
        return Err(Error::Domain("difference span lambda must be nonzero".into()));
    }
    if n_max < 1 {
        return Err(Error::Usage("series truncation order must be at least 1".into()));
    }
    if !f.supports_series() {
        return Err(Error::Capability(
            "series form needs exact derivatives; supply a polynomial or exponential".into(),
        ));
    }
    let expansion_point = s + delta_s - lambda;
    let mut sum = C64::new(0.0, 0.0);
    // coeff_n = λ^{n−1}/n!, built recursively to avoid explicit factorials.
    let mut coeff = C64::new(1.0, 0.0);
    for n in 1..=n_max {
        sum += coeff * f.derivative(n, expansion_point)?;
        coeff *= lambda / (n as f64 + 1.0);
    }
    Ok(sum)
}

/// The eigenvalue of the quotient on `e^{sE}`:
/// `apply_delta(e^{sE}) / e^{sE}`, which is independent of `s` and equals
/// `ed_general(E, λ, δs)`.
pub fn eigen_ratio(energy: f64, s: C64, delta_s: C64, lambda: C64) -> Result<C64> {
    let f = AnalyticSignal::Exponential { energy };
    Ok(apply_delta(&f, s, delta_s, lambda)? / f.eval(s))
}
