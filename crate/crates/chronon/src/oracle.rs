//! High-precision reference evaluations used as the trust anchor of the
//! validation suite.
//!
//! Everything here runs through big-float arithmetic with a configurable
//! digit count and is rounded to `f64` only at the very end, so the results
//! are independent of the double-precision code paths they certify.

use astro_float::{BigFloat, Consts, RoundingMode};

const RM: RoundingMode = RoundingMode::ToEven;

/// A big-float evaluation context with a fixed working precision.
pub struct HighPrecision {
    bits: usize,
    consts: Consts,
}

impl HighPrecision {
    /// Working precision of roughly `digits` significant decimal digits
    /// (plus guard bits). 40 digits is ample for every check in this crate.
    pub fn with_decimal_digits(digits: usize) -> Self {
        // log2(10) ≈ 3.3219; add guard bits for intermediate rounding.
        let bits = (digits as f64 * 3.322).ceil() as usize + 32;
        Self {
            bits,
            consts: Consts::new().expect("constants cache"),
        }
    }

    fn big(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.bits)
    }

    fn small(x: &BigFloat) -> f64 {
        // Display prints the full mantissa; Rust's parser rounds correctly.
        x.to_string().parse().expect("big-float to f64")
    }

    pub fn exp(&mut self, x: f64) -> f64 {
        let v = self.big(x).exp(self.bits, RM, &mut self.consts);
        Self::small(&v)
    }

    pub fn sin(&mut self, x: f64) -> f64 {
        let v = self.big(x).sin(self.bits, RM, &mut self.consts);
        Self::small(&v)
    }

    pub fn cos(&mut self, x: f64) -> f64 {
        let v = self.big(x).cos(self.bits, RM, &mut self.consts);
        Self::small(&v)
    }

    pub fn sinh(&mut self, x: f64) -> f64 {
        let v = self.big(x).sinh(self.bits, RM, &mut self.consts);
        Self::small(&v)
    }

    /// `(e^{τ₁E} − 1)/τ₁` with every step in big-float arithmetic.
    pub fn ed_case_a(&mut self, e: f64, tau1: f64) -> f64 {
        let x = self.big(tau1);
        let arg = x.mul(&self.big(e), self.bits, RM);
        let grown = arg.exp(self.bits, RM, &mut self.consts);
        let one = self.big(1.0);
        let v = grown.sub(&one, self.bits, RM).div(&x, self.bits, RM);
        Self::small(&v)
    }

    /// `sin(τ₀E)/τ₀` in big-float arithmetic.
    pub fn ed_case_b(&mut self, e: f64, tau0: f64) -> f64 {
        let t = self.big(tau0);
        let arg = t.mul(&self.big(e), self.bits, RM);
        let v = arg.sin(self.bits, RM, &mut self.consts).div(&t, self.bits, RM);
        Self::small(&v)
    }

    pub fn mass_shift(&mut self, m: f64, tau1: f64) -> f64 {
        self.ed_case_a(m, tau1)
    }

    /// Case-a canonical factor `(E_D/E)·e^{τ₁E}`.
    pub fn canonical_factor_a(&mut self, e: f64, tau1: f64) -> f64 {
        let t = self.big(tau1);
        let eb = self.big(e);
        let arg = t.mul(&eb, self.bits, RM);
        let grown = arg.exp(self.bits, RM, &mut self.consts);
        let one = self.big(1.0);
        let ed = grown.sub(&one, self.bits, RM).div(&t, self.bits, RM);
        let v = ed.div(&eb, self.bits, RM).mul(&grown, self.bits, RM);
        Self::small(&v)
    }

    /// Locates the first maximum of the case-b spectrum by golden-section
    /// search on `E ↦ sin(τ₀E)`, comparing big-float values so the flat top
    /// of the sine does not defeat the search at double precision. Returns
    /// `(E*, E_D(E*))` once the bracket is narrower than `tol`.
    pub fn locate_case_b_peak(&mut self, tau0: f64, tol: f64) -> (f64, f64) {
        let eval = |hp: &mut Self, e: f64| -> BigFloat {
            let arg = hp.big(tau0).mul(&hp.big(e), hp.bits, RM);
            arg.sin(hp.bits, RM, &mut hp.consts)
        };
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.0, std::f64::consts::PI / tau0);
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let mut f1 = eval(self, x1);
        let mut f2 = eval(self, x2);
        while b - a > tol {
            if f1.cmp(&f2).is_some_and(|c| c > 0) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = eval(self, x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = eval(self, x2);
            }
        }
        let e_star = 0.5 * (a + b);
        let peak = {
            let v = eval(self, e_star).div(&self.big(tau0), self.bits, RM);
            Self::small(&v)
        };
        (e_star, peak)
    }
}
