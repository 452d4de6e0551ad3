//! Numerical toolkit for discrete-time quantum evolution schemes.
//!
//! A two-point difference quotient in the complex evolution parameter turns
//! the free relativistic Hamiltonian into a *deformed* one, whose spectrum
//! depends on the discretization. This crate implements the two physically
//! distinguished schemes (the forward difference with its exponential,
//! faster-than-light dispersion, and the symmetric difference with its
//! bounded sine dispersion) along with the machinery to stress-test them:
//!
//! * [`dispersion`]: deformed spectra, group velocities, canonical momentum
//!   factors, the rest-mass shift, and the superluminal threshold;
//! * [`difference`]: the difference quotient on entire functions, its
//!   derivative-series form, and the exponential eigenvalue identity;
//! * [`wavepacket`]: 1-D momentum-grid packets evolved three ways (literal
//!   forward step, symmetric-difference leapfrog, effective real-time
//!   phases), with observables and light-cone analysis;
//! * [`algebra`]: closed-form versus numerically differentiated canonical
//!   commutators, the time-energy commutator, and self-adjointness checks;
//! * [`cli`]: scenario configuration, deterministic execution, and
//!   byte-stable CSV/JSON emission;
//! * [`oracle`]: big-float reference evaluations anchoring the test suite.
//!
//! All internal computation uses natural units (`ħ = c = 1`).

// `!(x > 0.0)` deliberately sends NaN down the error path; spelling it
// `x <= 0.0` would accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// 3x3 operator matrices read best with explicit index loops.
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod cli;
pub mod difference;
pub mod dispersion;
pub mod error;
pub mod numeric;
pub mod oracle;
pub mod wavepacket;

pub use error::{Error, Result};
