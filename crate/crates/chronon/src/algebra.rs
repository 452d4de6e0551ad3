//! Operator-identity verification for the deformed canonical pairs.
//!
//! In the momentum representation the position operator is `q̂_i = i·∂/∂p_i`
//! and the deformed momentum is multiplication by `p̂_j = g(E)·p_j`, so the
//! commutator `[q̂_i, p̂_j]` is multiplication by `i·∂(g·p_j)/∂p_i`, a pure
//! function of the evaluation point, independent of the state it acts on.
//! This module evaluates that function three ways and checks they agree:
//!
//! 1. the gradient closed form `i(g·δ_ij + g'(E)·p_i p_j/E)`;
//! 2. the algebraically equivalent factored product forms of each case;
//! 3. a state-based numerical route that differentiates `g(E(p))·p_j` with
//!    swept Richardson central differences applied to an analytic Gaussian
//!    test state.
//!
//! It also evaluates the truncated small-step expansions of the commutator,
//! the time-energy commutator on exponential trajectories, and the
//! self-adjointness (hermiticity) defect of the deformed energy symbol.

use num_complex::Complex64 as C64;

use crate::dispersion::{
    canonical_factor, canonical_factor_derivative, ed_case_a, rel_energy, vec_norm, CaseKind,
    Scheme,
};
use crate::error::{Error, Result};
use crate::numeric::{order_fit, pairwise_sum_c64, swept_derivative};
use crate::wavepacket::MomentumGrid;

pub type Matrix3 = [[C64; 3]; 3];

/// Probe amplitudes below this magnitude make the ratio `(…ψ)/ψ` meaningless.
const PROBE_FLOOR: f64 = 1e-30;

/// Fixed complex-time probe point for the trajectory-level time-energy
/// commutator. Any point works (the result is `s`-independent); this one
/// keeps the intermediate magnitudes mild.
const TIME_ENERGY_PROBE: C64 = C64::new(0.2, -0.3);

/// A normalized 3-D Gaussian test state with exact first derivatives,
/// the vehicle for the numerical operator checks.
#[derive(Debug, Clone, Copy)]
pub struct GaussianTestState3D {
    pub center: [f64; 3],
    pub sigma: f64,
    norm_const: f64,
}

impl GaussianTestState3D {
    pub fn new(center: [f64; 3], sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!(
                "test-state width must be positive, got {sigma}"
            )));
        }
        let norm_const = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.75);
        Ok(Self {
            center,
            sigma,
            norm_const,
        })
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        let d2: f64 = (0..3).map(|i| (p[i] - self.center[i]).powi(2)).sum();
        self.norm_const * (-d2 / (4.0 * self.sigma * self.sigma)).exp()
    }

    /// Exact gradient `∂ψ/∂p_i = −(p_i − c_i)/(2σ²)·ψ`.
    pub fn grad(&self, p: [f64; 3]) -> [f64; 3] {
        let psi = self.eval(p);
        let mut g = [0.0; 3];
        for i in 0..3 {
            g[i] = -(p[i] - self.center[i]) / (2.0 * self.sigma * self.sigma) * psi;
        }
        g
    }

    /// Largest deviation of the analytic gradient from a swept central
    /// difference at `p`; the state's own consistency certificate.
    pub fn derivative_self_check(&self, p: [f64; 3]) -> f64 {
        let g = self.grad(p);
        let mut worst = 0.0f64;
        for i in 0..3 {
            let f = |x: f64| {
                let mut q = p;
                q[i] = x;
                self.eval(q)
            };
            worst = worst.max((swept_derivative(&f, p[i]) - g[i]).abs());
        }
        worst
    }
}

/// The deformed momentum symbol `g(E(q))·q_j` as a scalar function of one
/// varied component.
fn momentum_symbol(scheme: &Scheme, m: f64, q: [f64; 3], j: usize) -> f64 {
    let e = rel_energy(vec_norm(q), m).expect("validated inputs");
    canonical_factor(scheme, e).expect("validated inputs") * q[j]
}

fn symmetric_from_upper(mut mat: Matrix3) -> Matrix3 {
    for i in 0..3 {
        for j in (i + 1)..3 {
            mat[j][i] = mat[i][j];
        }
    }
    mat
}

/// Exact commutator `[q̂_i, p̂_j] = i(g·δ_ij + g'(E)·p_i p_j / E)` built from
/// the closed-form canonical factor and its derivative.
pub fn commutator_qp_closed(scheme: &Scheme, p_vec: [f64; 3], m: f64) -> Result<Matrix3> {
    let e = positive_energy(p_vec, m)?;
    let g = canonical_factor(scheme, e)?;
    let dg = canonical_factor_derivative(scheme, e)?;
    let mut mat = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let delta = if i == j { g } else { 0.0 };
            mat[i][j] = C64::new(0.0, delta + dg * p_vec[i] * p_vec[j] / e);
        }
    }
    Ok(symmetric_from_upper(mat))
}

/// The same commutator through the factored product forms:
///
/// * case a: `i(1 + τ₁E_D)·[(E_D/E)δ_ij + (1 − (1 − 2τ₁E)E_D/E)·p_i p_j/E²]`
/// * case b: `i·sinc(2τ₀E)·δ_ij + i(cos(2τ₀E) − sinc(2τ₀E))·p_i p_j/E²`
///
/// Provably equal to [`commutator_qp_closed`]; evaluating both guards
/// against transcription slips in either route.
pub fn commutator_qp_factored(scheme: &Scheme, p_vec: [f64; 3], m: f64) -> Result<Matrix3> {
    let e = positive_energy(p_vec, m)?;
    let (diag, off) = match *scheme {
        Scheme::CaseA { tau1 } => {
            let ed = ed_case_a(e, tau1)?;
            let grown = 1.0 + tau1 * ed; // = e^{τ₁E}
            let ratio = ed / e;
            (
                grown * ratio,
                grown * (1.0 - (1.0 - 2.0 * tau1 * e) * ratio) / (e * e),
            )
        }
        Scheme::CaseB { tau0 } => {
            let y = 2.0 * tau0 * e;
            let sinc = y.sin() / y;
            (sinc, (y.cos() - sinc) / (e * e))
        }
        Scheme::General { .. } => {
            return Err(Error::Capability(
                "factored commutator forms exist for the case-a/case-b schemes only".into(),
            ))
        }
    };
    let mut mat = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let delta = if i == j { diag } else { 0.0 };
            mat[i][j] = C64::new(0.0, delta + off * p_vec[i] * p_vec[j]);
        }
    }
    Ok(symmetric_from_upper(mat))
}

/// Numerical commutator: applies `[q̂_i, p̂_j]` to the test state at `p_vec`
/// and divides by the state value. The symbol derivative comes from swept
/// Richardson central differences; the state derivative is analytic, so the
/// two `g·p_j·∂ψ` contributions cancel and what remains is the
/// multiplication symbol, independent of the state, which is the property
/// the tests verify across distinct states.
pub fn commutator_qp_numeric(
    scheme: &Scheme,
    p_vec: [f64; 3],
    m: f64,
    test: &GaussianTestState3D,
) -> Result<Matrix3> {
    positive_energy(p_vec, m)?;
    let psi = test.eval(p_vec);
    if psi.abs() < PROBE_FLOOR {
        return Err(Error::Probe(format!(
            "test-state amplitude {psi:.3e} at the probe point is below {PROBE_FLOOR:.0e}"
        )));
    }
    let grad = test.grad(p_vec);
    let mut mat = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let f = |x: f64| {
                let mut q = p_vec;
                q[i] = x;
                momentum_symbol(scheme, m, q, j)
            };
            let symbol_deriv = swept_derivative(&f, p_vec[i]);
            let w = momentum_symbol(scheme, m, p_vec, j);
            // (q̂_i p̂_j ψ) and (p̂_j q̂_i ψ), then the ratio to ψ.
            let a = C64::new(0.0, 1.0) * (symbol_deriv * psi + w * grad[i]);
            let b = C64::new(0.0, 1.0) * (w * grad[i]);
            mat[i][j] = (a - b) / psi;
        }
    }
    Ok(symmetric_from_upper(mat))
}

/// Truncated small-step expansions of the commutator:
///
/// * case a: `i(1 + (3/2)τ₁E_D)·δ_ij + i(3/2)τ₁·p_i p_j/E_D`, remainder O(τ₁²)
/// * case b: `i(1 − (2/3)τ₀²E_D²)·δ_ij − i(4/3)τ₀²·p_i p_j`, remainder beyond O(τ₀²)
pub fn commutator_expansion(scheme: &Scheme, p_vec: [f64; 3], m: f64) -> Result<Matrix3> {
    let e = positive_energy(p_vec, m)?;
    let (diag, off) = match *scheme {
        Scheme::CaseA { tau1 } => {
            let ed = ed_case_a(e, tau1)?;
            if ed == 0.0 {
                return Err(Error::Domain(
                    "expansion is singular where the deformed energy vanishes".into(),
                ));
            }
            (1.0 + 1.5 * tau1 * ed, 1.5 * tau1 / ed)
        }
        Scheme::CaseB { tau0 } => {
            let ed = (tau0 * e).sin() / tau0;
            (
                1.0 - 2.0 / 3.0 * tau0 * tau0 * ed * ed,
                -4.0 / 3.0 * tau0 * tau0,
            )
        }
        Scheme::General { .. } => {
            return Err(Error::Capability(
                "expansions exist for the case-a/case-b schemes only".into(),
            ))
        }
    };
    let mut mat = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let delta = if i == j { diag } else { 0.0 };
            mat[i][j] = C64::new(0.0, delta + off * p_vec[i] * p_vec[j]);
        }
    }
    Ok(symmetric_from_upper(mat))
}

/// Slope of `log‖closed − expansion‖` against `log τ` under `halvings`
/// halvings of the base step: the observed remainder order.
pub fn expansion_order_fit(
    kind: CaseKind,
    tau_base: f64,
    p_vec: [f64; 3],
    m: f64,
    halvings: usize,
) -> Result<f64> {
    let mut taus = Vec::with_capacity(halvings + 1);
    let mut errs = Vec::with_capacity(halvings + 1);
    for k in 0..=halvings {
        let tau = tau_base / 2f64.powi(k as i32);
        let scheme = kind.scheme(tau)?;
        let closed = commutator_qp_closed(&scheme, p_vec, m)?;
        let expansion = commutator_expansion(&scheme, p_vec, m)?;
        taus.push(tau);
        errs.push(max_abs_diff(&closed, &expansion));
    }
    Ok(order_fit(&taus, &errs))
}

/// Max-abs of the numerically evaluated `[q̂_i, q̂_j]ψ` and `[p̂_i, p̂_j]ψ`
/// at the probe point. Both vanish identically; the returned value is the
/// numerical noise floor of the mixed partials.
pub fn commutator_null_checks(
    scheme: &Scheme,
    p_vec: [f64; 3],
    m: f64,
    test: &GaussianTestState3D,
) -> Result<f64> {
    positive_energy(p_vec, m)?;
    if test.eval(p_vec).abs() < PROBE_FLOOR {
        return Err(Error::Probe(
            "test-state amplitude at the probe point is too small".into(),
        ));
    }
    let mut worst = 0.0f64;
    // [p̂, p̂]: products of commuting multiplication symbols, evaluated
    // literally in both orders.
    let psi = test.eval(p_vec);
    for i in 0..3 {
        for j in 0..3 {
            let wi = momentum_symbol(scheme, m, p_vec, i);
            let wj = momentum_symbol(scheme, m, p_vec, j);
            worst = worst.max((wi * (wj * psi) - wj * (wi * psi)).abs());
        }
    }
    // [q̂, q̂]: antisymmetry of numeric mixed partials of ψ, outer derivative
    // numeric over the analytic inner gradient.
    let mixed = |i: usize, j: usize| -> f64 {
        let f = |x: f64| {
            let mut q = p_vec;
            q[i] = x;
            test.grad(q)[j]
        };
        swept_derivative(&f, p_vec[i])
    };
    for i in 0..3 {
        for j in (i + 1)..3 {
            worst = worst.max((mixed(i, j) - mixed(j, i)).abs());
        }
    }
    Ok(worst)
}

/// Time-energy commutator `[H_D, s]` evaluated literally on the exponential
/// trajectory `f(s) = e^{sE}` at a fixed probe point, divided by `f(s)`.
/// Equals `e^{τ₁E} = 1 + τ₁E_D` exactly; `τ₁ = 0` returns the continuum
/// value 1.
pub fn time_energy_commutator(energy: f64, tau1: f64) -> C64 {
    if tau1 == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let s = TIME_ENERGY_PROBE;
    let f = |at: C64| (at * energy).exp();
    let step = C64::new(tau1, 0.0);
    // H_D acts as the forward difference of span τ₁ on trajectories.
    let hd_f = (f(s + step) - f(s)) / tau1;
    let hd_sf = ((s + step) * f(s + step) - s * f(s)) / tau1;
    (hd_sf - s * hd_f) / f(s)
}

/// Self-adjointness defect `|⟨φ|A ψ⟩ − ⟨ψ|A φ⟩*|` of the deformed energy
/// symbol `A = E_D(E(p))` on two grid states, inner product `Σ ā·b·dp`.
/// Zero (to rounding) exactly when the sampled spectrum is real.
pub fn hermiticity_residual(
    scheme: &Scheme,
    m: f64,
    grid: &MomentumGrid,
    phi: &[C64],
    psi: &[C64],
) -> Result<f64> {
    if phi.len() != grid.len() || psi.len() != grid.len() {
        return Err(Error::Usage(format!(
            "state lengths {} and {} must both match the grid size {}",
            phi.len(),
            psi.len(),
            grid.len()
        )));
    }
    let dp = grid.dp();
    let mut forward = Vec::with_capacity(grid.len());
    let mut adjoint = Vec::with_capacity(grid.len());
    for (k, (a, b)) in phi.iter().zip(psi).enumerate() {
        let e = rel_energy(grid.p(k).abs(), m)?;
        let symbol = scheme.ed(e)?;
        forward.push(a.conj() * symbol * b);
        adjoint.push((symbol * a).conj() * b);
    }
    let lhs = pairwise_sum_c64(&forward) * dp;
    let rhs = pairwise_sum_c64(&adjoint) * dp;
    Ok((lhs - rhs).norm())
}

/// All three commutator routes at one evaluation point, with the residual
/// between the exact routes' consensus and the numeric oracle, and the
/// observed order of the truncated expansion.
#[derive(Debug, Clone)]
pub struct CommutatorReport {
    pub kind: CaseKind,
    pub p_vec: [f64; 3],
    pub m: f64,
    pub tau: f64,
    pub closed: Matrix3,
    pub numeric: Matrix3,
    pub expansion: Matrix3,
    pub max_abs_residual: f64,
    pub expansion_order_fit: f64,
}

pub fn commutator_report(
    kind: CaseKind,
    tau: f64,
    p_vec: [f64; 3],
    m: f64,
    test: &GaussianTestState3D,
) -> Result<CommutatorReport> {
    let scheme = kind.scheme(tau)?;
    let closed = commutator_qp_closed(&scheme, p_vec, m)?;
    let numeric = commutator_qp_numeric(&scheme, p_vec, m, test)?;
    let expansion = commutator_expansion(&scheme, p_vec, m)?;
    let max_abs_residual = max_abs_diff(&closed, &numeric);
    let order = expansion_order_fit(kind, tau, p_vec, m, 5)?;
    Ok(CommutatorReport {
        kind,
        p_vec,
        m,
        tau,
        closed,
        numeric,
        expansion,
        max_abs_residual,
        expansion_order_fit: order,
    })
}

pub fn max_abs_diff(a: &Matrix3, b: &Matrix3) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((a[i][j] - b[i][j]).norm());
        }
    }
    worst
}

fn positive_energy(p_vec: [f64; 3], m: f64) -> Result<f64> {
    let e = rel_energy(vec_norm(p_vec), m)?;
    if e == 0.0 {
        return Err(Error::Domain(
            "commutators require E > 0 (massless particle at rest is degenerate)".into(),
        ));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::{EvolutionScheme, PacketState};
    use crate::wavepacket::DispersionLaw;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SIN2_OVER_2: f64 = 0.454_648_713_412_840_85;
    const EXP_0_1: f64 = 1.105_170_918_075_647_7;

    fn random_point(rng: &mut ChaCha8Rng) -> ([f64; 3], f64, f64) {
        // |p| ≥ 0.3 keeps the finite-difference stencils clear of the E = |p|
        // kink at the massless origin.
        let p = loop {
            let p = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            if vec_norm(p) >= 0.3 {
                break p;
            }
        };
        let m = rng.gen_range(0.0..2.0);
        let tau = rng.gen_range(0.01..0.3);
        (p, m, tau)
    }

    fn random_kind(rng: &mut ChaCha8Rng) -> CaseKind {
        if rng.gen_bool(0.5) {
            CaseKind::A
        } else {
            CaseKind::B
        }
    }

    #[test]
    fn gaussian_state_derivatives_self_check() {
        let t = GaussianTestState3D::new([0.3, -0.5, 1.0], 0.8).unwrap();
        for p in [[0.0, 0.0, 0.0], [1.0, -0.2, 0.7], [-1.5, 0.4, 0.1]] {
            assert!(t.derivative_self_check(p) < 1e-8);
        }
        assert!(GaussianTestState3D::new([0.0; 3], 0.0).is_err());
    }

    #[test]
    fn closed_form_reaches_canonical_limit() {
        let s = Scheme::CaseA { tau1: 0.0 };
        let mat = commutator_qp_closed(&s, [0.7, -0.3, 0.2], 1.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) };
                assert_eq!(mat[i][j], want);
            }
        }
    }

    #[test]
    fn closed_form_case_b_at_rest() {
        let s = Scheme::case_b(1.0).unwrap();
        let mat = commutator_qp_closed(&s, [0.0; 3], 1.0).unwrap();
        for i in 0..3 {
            assert!((mat[i][i] - C64::new(0.0, SIN2_OVER_2)).norm() < 1e-15);
            for j in (i + 1)..3 {
                assert_eq!(mat[i][j], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn closed_form_axis_aligned_structure() {
        let s = Scheme::case_a(0.1).unwrap();
        let p = [1.3, 0.0, 0.0];
        let mat = commutator_qp_closed(&s, p, 0.5).unwrap();
        let e = rel_energy(1.3, 0.5).unwrap();
        let g = canonical_factor(&s, e).unwrap();
        assert_eq!(mat[0][1], C64::new(0.0, 0.0));
        assert_eq!(mat[0][2], C64::new(0.0, 0.0));
        assert_eq!(mat[1][2], C64::new(0.0, 0.0));
        assert!((mat[1][1] - C64::new(0.0, g)).norm() < 1e-15);
        assert!((mat[2][2] - C64::new(0.0, g)).norm() < 1e-15);
    }

    #[test]
    fn gradient_and_factored_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in [CaseKind::A, CaseKind::B] {
            for _ in 0..1000 {
                let (p, m, tau) = random_point(&mut rng);
                let s = kind.scheme(tau).unwrap();
                let a = commutator_qp_closed(&s, p, m).unwrap();
                let b = commutator_qp_factored(&s, p, m).unwrap();
                assert!(
                    max_abs_diff(&a, &b) <= 1e-12,
                    "{kind:?} p={p:?} m={m} tau={tau}: {}",
                    max_abs_diff(&a, &b)
                );
            }
        }
    }

    #[test]
    fn numeric_route_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let test = GaussianTestState3D::new([0.2, -0.1, 0.4], 1.0).unwrap();
        for _ in 0..100 {
            let (p, m, tau) = random_point(&mut rng);
            let kind = random_kind(&mut rng);
            let s = kind.scheme(tau).unwrap();
            let closed = commutator_qp_closed(&s, p, m).unwrap();
            let numeric = commutator_qp_numeric(&s, p, m, &test).unwrap();
            assert!(
                max_abs_diff(&closed, &numeric) <= 1e-8,
                "{kind:?} p={p:?} m={m} tau={tau}: {}",
                max_abs_diff(&closed, &numeric)
            );
        }
    }

    #[test]
    fn numeric_route_is_test_state_independent() {
        let s = Scheme::case_a(0.15).unwrap();
        let p = [0.8, -0.4, 0.3];
        let m = 0.7;
        let states = [
            GaussianTestState3D::new([0.0, 0.0, 0.0], 0.9).unwrap(),
            GaussianTestState3D::new([0.5, -0.8, 0.6], 1.4).unwrap(),
            GaussianTestState3D::new([-0.3, 0.2, -0.1], 0.6).unwrap(),
        ];
        let mats: Vec<Matrix3> = states
            .iter()
            .map(|t| commutator_qp_numeric(&s, p, m, t).unwrap())
            .collect();
        for pair in mats.windows(2) {
            assert!(max_abs_diff(&pair[0], &pair[1]) <= 1e-8);
        }
    }

    #[test]
    fn numeric_route_reaches_canonical_limit() {
        let s = Scheme::case_a(1e-9).unwrap();
        let test = GaussianTestState3D::new([0.0; 3], 1.0).unwrap();
        let mat = commutator_qp_numeric(&s, [0.6, 0.2, -0.5], 0.4, &test).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) };
                assert!((mat[i][j] - want).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn numeric_route_rejects_dead_probe_points() {
        let s = Scheme::case_a(0.1).unwrap();
        let test = GaussianTestState3D::new([0.0; 3], 0.05).unwrap();
        // 40σ out: the amplitude underflows
        let r = commutator_qp_numeric(&s, [3.0, 3.0, 3.0], 0.5, &test);
        assert!(matches!(r, Err(Error::Probe(_))));
    }

    #[test]
    fn reported_matrices_are_exactly_symmetric() {
        let test = GaussianTestState3D::new([0.1, 0.2, -0.3], 1.1).unwrap();
        let rep = commutator_report(CaseKind::B, 0.2, [0.9, -0.7, 0.5], 1.2, &test).unwrap();
        for mat in [&rep.closed, &rep.numeric, &rep.expansion] {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(mat[i][j], mat[j][i]);
                }
            }
        }
        assert!(rep.max_abs_residual <= 1e-8);
    }

    #[test]
    fn expansion_collapses_to_identity_at_zero_step() {
        let s = Scheme::CaseA { tau1: 0.0 };
        let mat = commutator_expansion(&s, [0.4, 0.1, -0.9], 0.8).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) };
                assert_eq!(mat[i][j], want);
            }
        }
    }

    #[test]
    fn expansion_remainder_orders() {
        let p = [0.8, -0.5, 0.3];
        let m = 1.0;
        let order_a = expansion_order_fit(CaseKind::A, 0.1, p, m, 5).unwrap();
        assert!(
            (order_a - 2.0).abs() <= 0.2,
            "case-a remainder order {order_a}"
        );
        let order_b = expansion_order_fit(CaseKind::B, 0.1, p, m, 5).unwrap();
        assert!(order_b >= 2.5, "case-b remainder order {order_b}");
    }

    #[test]
    fn null_commutators_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let test = GaussianTestState3D::new([0.3, 0.0, -0.2], 1.0).unwrap();
        for _ in 0..25 {
            let (p, m, tau) = random_point(&mut rng);
            let kind = random_kind(&mut rng);
            let s = kind.scheme(tau).unwrap();
            let worst = commutator_null_checks(&s, p, m, &test).unwrap();
            assert!(worst <= 1e-10, "null residual {worst}");
        }
    }

    #[test]
    fn time_energy_commutator_values() {
        let unit = time_energy_commutator(0.0, 0.5);
        assert!((unit - C64::new(1.0, 0.0)).norm() < 1e-15);
        let v = time_energy_commutator(1.0, 0.1);
        assert!((v.re - EXP_0_1).abs() < 1e-13, "{v}");
        assert!(v.im.abs() < 1e-13);
    }

    #[test]
    fn time_energy_identity_over_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let e: f64 = rng.gen_range(0.0..3.0);
            let tau1: f64 = rng.gen_range(0.05..1.0);
            let grown = (tau1 * e).exp();
            // right-hand side of the commutation relation
            let rhs = 1.0 + tau1 * ed_case_a(e, tau1).unwrap();
            assert!((rhs - grown).abs() <= 1e-13 * grown);
            // trajectory-level evaluation
            let traj = time_energy_commutator(e, tau1);
            assert!(
                (traj - C64::new(grown, 0.0)).norm() <= 1e-12 * grown,
                "E={e} tau={tau1}: {traj} vs {grown}"
            );
        }
    }

    #[test]
    fn hermiticity_residual_separates_real_from_complex_spectra() {
        let grid = MomentumGrid::new(1024, 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut random_state = || -> Vec<C64> {
            let amps: Vec<C64> = (0..grid.len())
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let scheme = EvolutionScheme::EffectiveDispersion {
                law: DispersionLaw::Continuum,
                dt: 1.0,
            };
            PacketState::from_amplitudes(grid, amps, 1.0, scheme)
                .unwrap()
                .amps()
                .to_vec()
        };
        let phi = random_state();
        let psi = random_state();
        for scheme in [Scheme::case_a(0.1).unwrap(), Scheme::case_b(0.1).unwrap()] {
            let r = hermiticity_residual(&scheme, 1.0, &grid, &phi, &psi).unwrap();
            assert!(r <= 1e-12, "real symbol residual {r}");
        }
        let bad = Scheme::general(C64::new(0.0, 1.0), C64::new(1.0, 0.0)).unwrap();
        let r = hermiticity_residual(&bad, 1.0, &grid, &phi, &psi).unwrap();
        assert!(r > 1e-3, "complex symbol residual {r}");
    }

    #[test]
    fn hermiticity_residual_tracks_the_reality_defect() {
        // The residual is exactly the reality defect's fingerprint: growing
        // max |Im E_D| over the grid drives a growing residual, and both
        // vanish together.
        let grid = MomentumGrid::new(256, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let amps = |rng: &mut ChaCha8Rng| -> Vec<C64> {
            let a: Vec<C64> = (0..grid.len())
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let dummy = EvolutionScheme::EffectiveDispersion {
                law: DispersionLaw::Continuum,
                dt: 1.0,
            };
            PacketState::from_amplitudes(grid, a, 0.5, dummy)
                .unwrap()
                .amps()
                .to_vec()
        };
        let phi = amps(&mut rng);
        let psi = amps(&mut rng);
        // For unit states Cauchy-Schwarz bounds the residual by twice the
        // worst imaginary part of the symbol, and both vanish together.
        for t in [0.0, 0.1, 0.3, 0.6] {
            let scheme = Scheme::general(C64::new(0.2, t), C64::new(0.4, 0.0)).unwrap();
            let defect = (0..grid.len())
                .map(|k| {
                    let e = rel_energy(grid.p(k).abs(), 0.5).unwrap();
                    scheme.ed(e).unwrap().im.abs()
                })
                .fold(0.0f64, f64::max);
            let residual = hermiticity_residual(&scheme, 0.5, &grid, &phi, &psi).unwrap();
            assert!(
                residual <= 2.0 * defect + 1e-12,
                "t={t}: residual {residual} above the reality-defect bound {defect}"
            );
            if t == 0.0 {
                assert!(defect <= 1e-15 && residual <= 1e-13);
            } else {
                assert!(defect > 0.01 && residual > 1e-6, "t={t}: {defect} / {residual}");
            }
        }
    }

    #[test]
    fn hermiticity_rejects_mismatched_grids() {
        let grid = MomentumGrid::new(64, 4.0).unwrap();
        let phi = vec![C64::new(1.0, 0.0); 64];
        let psi = vec![C64::new(1.0, 0.0); 32];
        let s = Scheme::case_a(0.1).unwrap();
        assert!(matches!(
            hermiticity_residual(&s, 0.0, &grid, &phi, &psi),
            Err(Error::Usage(_))
        ));
    }
}
