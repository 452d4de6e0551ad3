//! Deformed energy spectra for discrete-time evolution schemes, and the
//! kinematic quantities derived from them: group velocities, canonical
//! momentum factors, the rest-mass shift, and the superluminal threshold.
//!
//! Everything is expressed in natural units (`ħ = c = 1`) and in the momentum
//! representation, where the free Hamiltonian `H` acts as multiplication by
//! `E(p) = sqrt(p² + m²)` and any function of `H` acts as multiplication by
//! the same function of `E`. Two named schemes appear throughout:
//!
//! * **case a**: forward difference, span equal to the step (`λ = δs = τ₁`,
//!   real). The deformed spectrum is `E_D = (e^{τ₁E} − 1)/τ₁`, which grows
//!   faster than `E` and drives group velocities above 1.
//! * **case b**: symmetric difference (`δs = −iτ₀`, `λ = 2δs`). The spectrum
//!   is `E_D = sin(τ₀E)/τ₀`, bounded by `1/τ₀`, and the evolution is unitary.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Complex evolution parameter assembled from the laboratory time `t` and the
/// imaginary-time component `v`. With `ħ = 1` the combined parameter is
/// `s = −i(t + iv) = v − i·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexTime {
    pub t: f64,
    pub v: f64,
}

impl ComplexTime {
    pub fn new(t: f64, v: f64) -> Result<Self> {
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::Domain(format!(
                "complex time components must be finite, got t={t}, v={v}"
            )));
        }
        Ok(Self { t, v })
    }

    /// The combined parameter `s = v − i·t`.
    pub fn s(&self) -> C64 {
        C64::new(self.v, -self.t)
    }
}

/// A discretization scheme: the shift `δs` and span `λ` of the two-point
/// difference quotient that replaces `d/ds`.
///
/// Constructors validate the per-case constraints; pattern matching on the
/// variants is allowed but the parameters are trusted to satisfy them
/// (`τ₁ ≠ 0`, `τ₀ > 0`, `λ ≠ 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Forward difference: `λ = δs = τ₁` real. Negative `τ₁` is accepted
    /// (a damping step instead of a growing one); zero is not.
    CaseA { tau1: f64 },
    /// Symmetric difference: `δs = −i·τ₀`, `λ = 2δs`, with `τ₀ > 0`.
    CaseB { tau0: f64 },
    /// Arbitrary complex pair with `λ ≠ 0`. Generally violates the reality
    /// condition `Im E_D = 0`; used for residual diagnostics only.
    General { delta_s: C64, lambda: C64 },
}

impl Scheme {
    pub fn case_a(tau1: f64) -> Result<Self> {
        if !tau1.is_finite() || tau1 == 0.0 {
            return Err(Error::Domain(format!(
                "case-a step must be finite and nonzero, got tau1={tau1}"
            )));
        }
        Ok(Scheme::CaseA { tau1 })
    }

    pub fn case_b(tau0: f64) -> Result<Self> {
        if !tau0.is_finite() || tau0 <= 0.0 {
            return Err(Error::Domain(format!(
                "case-b step must be finite and positive, got tau0={tau0}"
            )));
        }
        Ok(Scheme::CaseB { tau0 })
    }

    pub fn general(delta_s: C64, lambda: C64) -> Result<Self> {
        if lambda == C64::new(0.0, 0.0) {
            return Err(Error::Domain("span lambda must be nonzero".into()));
        }
        Ok(Scheme::General { delta_s, lambda })
    }

    pub fn delta_s(&self) -> C64 {
        match *self {
            Scheme::CaseA { tau1 } => C64::new(tau1, 0.0),
            Scheme::CaseB { tau0 } => C64::new(0.0, -tau0),
            Scheme::General { delta_s, .. } => delta_s,
        }
    }

    pub fn lambda(&self) -> C64 {
        match *self {
            Scheme::CaseA { tau1 } => C64::new(tau1, 0.0),
            Scheme::CaseB { tau0 } => C64::new(0.0, -2.0 * tau0),
            Scheme::General { lambda, .. } => lambda,
        }
    }

    /// Deformed energy at ordinary energy `e`, as a complex number. Cases a
    /// and b go through their exact real closed forms, so the imaginary part
    /// is identically zero there.
    pub fn ed(&self, e: f64) -> Result<C64> {
        match *self {
            Scheme::CaseA { tau1 } => Ok(C64::new(ed_case_a(e, tau1)?, 0.0)),
            Scheme::CaseB { tau0 } => Ok(C64::new(ed_case_b(e, tau0)?, 0.0)),
            Scheme::General { delta_s, lambda } => ed_general(e, lambda, delta_s),
        }
    }
}

/// The two named discretization cases, for call sites that select a scheme
/// from a tag plus a single time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    A,
    B,
}

impl CaseKind {
    pub fn scheme(self, tau: f64) -> Result<Scheme> {
        match self {
            CaseKind::A => Scheme::case_a(tau),
            CaseKind::B => Scheme::case_b(tau),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CaseKind::A => "a",
            CaseKind::B => "b",
        }
    }
}

/// Relativistic free-particle energy `sqrt(p² + m²)`.
pub fn rel_energy(p_mag: f64, m: f64) -> Result<f64> {
    if !(p_mag.is_finite() && m.is_finite()) || p_mag < 0.0 || m < 0.0 {
        return Err(Error::Domain(format!(
            "momentum magnitude and mass must be finite and nonnegative, got p={p_mag}, m={m}"
        )));
    }
    Ok(p_mag.hypot(m))
}

/// Deformed energy for an arbitrary scheme:
/// `E_D = (2/λ) · exp((δs − λ/2)·E) · sinh(λE/2)`.
///
/// No limiting is applied as `λ → 0`; passing `λ = 0` is a domain error so
/// that parameterization bugs surface instead of being silently absorbed.
pub fn ed_general(e: f64, lambda: C64, delta_s: C64) -> Result<C64> {
    if lambda == C64::new(0.0, 0.0) {
        return Err(Error::Domain(
            "ed_general requires lambda != 0; use the per-case closed forms for the continuum limit"
                .into(),
        ));
    }
    let half = lambda * 0.5;
    Ok(2.0 / lambda * ((delta_s - half) * e).exp() * (half * e).sinh())
}

/// Case-a deformed energy `(e^{τ₁E} − 1)/τ₁`, evaluated through `exp_m1` so
/// small steps do not lose precision. `τ₁ = 0` returns the continuum value
/// `E` (the exact limit); negative `τ₁` gives the damping branch.
pub fn ed_case_a(e: f64, tau1: f64) -> Result<f64> {
    if !e.is_finite() || !tau1.is_finite() {
        return Err(Error::Domain(format!(
            "arguments must be finite, got e={e}, tau1={tau1}"
        )));
    }
    if tau1 == 0.0 {
        return Ok(e);
    }
    Ok((tau1 * e).exp_m1() / tau1)
}

/// Case-b deformed energy `sin(τ₀E)/τ₀`, bounded by `1/τ₀` in magnitude.
pub fn ed_case_b(e: f64, tau0: f64) -> Result<f64> {
    if !e.is_finite() || !tau0.is_finite() || tau0 <= 0.0 {
        return Err(Error::Domain(format!(
            "case-b step must be positive and arguments finite, got e={e}, tau0={tau0}"
        )));
    }
    Ok((tau0 * e).sin() / tau0)
}

/// `dE_D/dE` for the named cases: `e^{τ₁E}` (case a) or `cos(τ₀E)` (case b).
/// This is the scalar factor relating the deformed group velocity to the
/// ordinary one.
pub fn speed_factor(scheme: &Scheme, e: f64) -> Result<f64> {
    match *scheme {
        Scheme::CaseA { tau1 } => Ok((tau1 * e).exp()),
        Scheme::CaseB { tau0 } => Ok((tau0 * e).cos()),
        Scheme::General { .. } => Err(Error::Capability(
            "group-velocity factor is defined for the case-a/case-b schemes only".into(),
        )),
    }
}

/// Group velocity `∂E_D/∂p`: `e^{τ₁E}·p/E` (case a) or `cos(τ₀E)·p/E`
/// (case b). Errors when `E = 0`, where the direction `p/E` is undefined.
pub fn group_velocity(scheme: &Scheme, p_vec: [f64; 3], m: f64) -> Result<[f64; 3]> {
    let p_mag = vec_norm(p_vec);
    let e = rel_energy(p_mag, m)?;
    if e == 0.0 {
        return Err(Error::Domain(
            "group velocity is undefined at E = 0 (massless particle at rest)".into(),
        ));
    }
    let f = speed_factor(scheme, e)? / e;
    Ok([f * p_vec[0], f * p_vec[1], f * p_vec[2]])
}

/// Scalar factor `g(E)` of the deformed canonical momentum `p̂ = g·p`:
/// case a `g = (E_D/E)·e^{τ₁E}`, case b `g = sin(2τ₀E)/(2τ₀E)`.
pub fn canonical_factor(scheme: &Scheme, e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!(
            "canonical factor requires E > 0, got E={e}"
        )));
    }
    match *scheme {
        Scheme::CaseA { tau1 } => Ok(ed_case_a(e, tau1)? / e * (tau1 * e).exp()),
        Scheme::CaseB { tau0 } => {
            let y = 2.0 * tau0 * e;
            Ok(y.sin() / y)
        }
        Scheme::General { .. } => Err(Error::Capability(
            "canonical factor is defined for the case-a/case-b schemes only".into(),
        )),
    }
}

/// Closed-form derivative `g'(E)` of the canonical factor. Used to build the
/// exact commutator matrices.
pub fn canonical_factor_derivative(scheme: &Scheme, e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!(
            "canonical factor derivative requires E > 0, got E={e}"
        )));
    }
    match *scheme {
        // g(E) = (e^{2x} − e^{x}) / x with x = τ₁E, so
        // g'(E) = [ (2e^{2x} − e^{x})·x − (e^{2x} − e^{x}) ] / (τ₁ E²).
        Scheme::CaseA { tau1 } => {
            if tau1 == 0.0 {
                return Ok(0.0);
            }
            let x = tau1 * e;
            let u = x.exp();
            let num = (2.0 * u * u - u) * x - (u * u - u);
            Ok(num / (tau1 * e * e))
        }
        // g(E) = sin(y)/y with y = 2τ₀E, so g'(E) = [cos(y) − sin(y)/y] / E.
        Scheme::CaseB { tau0 } => {
            let y = 2.0 * tau0 * e;
            Ok((y.cos() - y.sin() / y) / e)
        }
        Scheme::General { .. } => Err(Error::Capability(
            "canonical factor is defined for the case-a/case-b schemes only".into(),
        )),
    }
}

/// Deformed rest energy `M = (e^{τ₁m} − 1)/τ₁ ≥ m`, which to first order is
/// `m + τ₁m²/2`. `τ₁ = 0` returns `m` exactly.
pub fn mass_shift(m: f64, tau1: f64) -> Result<f64> {
    if !m.is_finite() || m < 0.0 {
        return Err(Error::Domain(format!(
            "mass must be finite and nonnegative, got m={m}"
        )));
    }
    ed_case_a(m, tau1)
}

/// Absolute tolerance of the superluminal-threshold bisection.
pub const THRESHOLD_TOL: f64 = 1e-12;

/// Smallest momentum magnitude at which the case-a group speed reaches 1,
/// i.e. the root of `(p/E)·e^{τ₁E} = 1` with `E = sqrt(p² + m²)`.
///
/// For `m = 0` every positive momentum is already superluminal, so the
/// threshold is 0. The objective is strictly increasing in `p` and diverges,
/// so bisection on a doubled bracket always converges; `None` is returned
/// only if no sign change is found within the bracket cap, which cannot
/// happen for finite positive `τ₁`.
pub fn superluminal_threshold(m: f64, tau1: f64) -> Result<Option<f64>> {
    if !(tau1 > 0.0) || !tau1.is_finite() {
        return Err(Error::Domain(format!(
            "threshold search requires tau1 > 0, got {tau1}"
        )));
    }
    if !m.is_finite() || m < 0.0 {
        return Err(Error::Domain(format!("mass must be nonnegative, got {m}")));
    }
    if m == 0.0 {
        return Ok(Some(0.0));
    }
    // f(p) > 0 once the speed exceeds 1. f(0) = -1.
    let f = |p: f64| -> f64 {
        let e = p.hypot(m);
        p / e * (tau1 * e).exp() - 1.0
    };
    let mut hi = 1.0;
    let mut doublings = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 1100 {
            return Ok(None);
        }
    }
    let mut lo = 0.0;
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Location and value of the case-b spectrum maximum:
/// `E* = π/(2τ₀)`, `E_D(E*) = 1/τ₀`.
pub fn max_energy_case_b(tau0: f64) -> Result<(f64, f64)> {
    if !(tau0 > 0.0) || !tau0.is_finite() {
        return Err(Error::Domain(format!(
            "case-b step must be positive, got {tau0}"
        )));
    }
    Ok((std::f64::consts::FRAC_PI_2 / tau0, 1.0 / tau0))
}

/// Stationary-state evolution factor `e^{s·ε}` for a complex frequency
/// `ε = ε_R + i·ε_I`. Its modulus is `e^{t·ε_I + v·ε_R}` and its phase is
/// `−(t·ε_R − v·ε_I)` modulo 2π.
pub fn stationary_factor(s: ComplexTime, epsilon: C64) -> C64 {
    (s.s() * epsilon).exp()
}

/// `|Im E_D|` for an arbitrary scheme: the defect against the reality
/// condition. Identically zero for the case-a/case-b parameterizations and
/// strictly positive for generic complex ones.
pub fn reality_residual(e: f64, lambda: C64, delta_s: C64) -> Result<f64> {
    Ok(ed_general(e, lambda, delta_s)?.im.abs())
}

/// A momentum point with every derived dispersion quantity evaluated: the
/// ordinary energy, the deformed energy, the group velocity, and the
/// canonical momentum factor.
#[derive(Debug, Clone, Copy)]
pub struct KinematicPoint {
    pub p_vec: [f64; 3],
    pub m: f64,
    pub e: f64,
    pub e_d: C64,
    pub v_vec: [f64; 3],
    pub g: f64,
}

impl KinematicPoint {
    /// Requires `E > 0` and a case-a or case-b scheme (the velocity and
    /// canonical factor have no real form for generic complex schemes).
    pub fn evaluate(scheme: &Scheme, p_vec: [f64; 3], m: f64) -> Result<Self> {
        let e = rel_energy(vec_norm(p_vec), m)?;
        if e == 0.0 {
            return Err(Error::Domain(
                "kinematic point requires E > 0 (massless particle at rest has no direction)"
                    .into(),
            ));
        }
        Ok(Self {
            p_vec,
            m,
            e,
            e_d: scheme.ed(e)?,
            v_vec: group_velocity(scheme, p_vec, m)?,
            g: canonical_factor(scheme, e)?,
        })
    }

    pub fn speed(&self) -> f64 {
        vec_norm(self.v_vec)
    }
}

/// A labelled stationary mode: an opaque index `alpha` for the quantum
/// numbers, the complex frequency `ε` entering `e^{sε}`, and the ordinary
/// energy eigenvalue it belongs to.
#[derive(Debug, Clone, Copy)]
pub struct StationaryMode {
    pub alpha: usize,
    pub epsilon: C64,
    pub energy: f64,
}

impl StationaryMode {
    /// `(ε_R, ε_I)`, the unique real/imaginary split.
    pub fn epsilon_parts(&self) -> (f64, f64) {
        (self.epsilon.re, self.epsilon.im)
    }

    pub fn factor(&self, s: ComplexTime) -> C64 {
        stationary_factor(s, self.epsilon)
    }

    /// Modulus of the evolution factor by the split form `e^{tε_I + vε_R}`.
    pub fn factor_modulus(&self, s: ComplexTime) -> f64 {
        (s.t * self.epsilon.im + s.v * self.epsilon.re).exp()
    }

    /// Phase of the evolution factor by the split form `−(tε_R − vε_I)`.
    pub fn factor_phase(&self, s: ComplexTime) -> f64 {
        -(s.t * self.epsilon.re - s.v * self.epsilon.im)
    }
}

pub(crate) fn vec_norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
