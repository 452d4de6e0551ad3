//! 1-D momentum-grid evolution of free relativistic wave packets.
//!
//! A packet lives on a uniform, periodic momentum grid and is advanced
//! mode-by-mode under one of three rules:
//!
//! * **literal forward step**: multiply each mode by `e^{τ₁E(p)}`; this is
//!   one step of size `τ₁` along the imaginary-time direction, so amplitudes
//!   change but no phase accrues and the norm is not conserved;
//! * **leapfrog**: the two-step symmetric-difference recurrence
//!   `ψ_{n+1} = ψ_{n−1} − 2iτ₀E_D(p)ψ_n`, unitary because its characteristic
//!   roots sit on the unit circle;
//! * **effective dispersion**: real-time phases `e^{−i·dt·E_D(p)}`, whose
//!   packet centroid moves at exactly the deformed group velocity. This is
//!   the rule that realizes observable motion, including the superluminal
//!   case-a centroid speeds.
//!
//! Norms and centroids are reduced with fixed-order pairwise summation, so
//! emitted numbers are bit-stable regardless of thread count.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::dispersion::{self, rel_energy, Scheme};
use crate::error::{Error, Result};
use crate::numeric::{is_power_of_two, linear_fit, pairwise_sum};

/// Mode counts below this are advanced serially; rayon overhead only pays
/// off on large grids. Either path writes each element independently, so the
/// results are identical.
const PARALLEL_MODES_MIN: usize = 16384;

/// Relative probability allowed within four cells of the position-grid edge
/// before an evolution aborts (periodic wrap-around guard).
pub const BOUNDARY_GUARD_FRACTION: f64 = 1e-6;

/// Probability quantile defining the packet front.
pub const FRONT_QUANTILE: f64 = 0.999;

/// Tolerance on `|Im E_D|` above which effective evolution refuses a scheme.
pub const REALITY_TOL: f64 = 1e-12;

/// Uniform momentum grid with `n` modes (a power of two) spanning
/// `[−p_max, p_max)`, and its conjugate position grid of spacing `π/p_max`.
/// The pairing satisfies `dp·dx·n = 2π` exactly in exact arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumGrid {
    n: usize,
    p_max: f64,
}

impl MomentumGrid {
    pub fn new(n: usize, p_max: f64) -> Result<Self> {
        if !is_power_of_two(n) || n < 2 {
            return Err(Error::Config(format!(
                "grid size must be a power of two (>= 2), got {n}"
            )));
        }
        if !(p_max > 0.0) || !p_max.is_finite() {
            return Err(Error::Config(format!(
                "momentum cutoff must be positive and finite, got {p_max}"
            )));
        }
        Ok(Self { n, p_max })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn dp(&self) -> f64 {
        2.0 * self.p_max / self.n as f64
    }

    pub fn dx(&self) -> f64 {
        std::f64::consts::PI / self.p_max
    }

    /// Half-width of the position grid.
    pub fn x_max(&self) -> f64 {
        self.dx() * (self.n / 2) as f64
    }

    /// Momentum of mode `k`: `−p_max + k·dp`.
    pub fn p(&self, k: usize) -> f64 {
        -self.p_max + k as f64 * self.dp()
    }

    /// Position of cell `j`: `(j − n/2)·dx`.
    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dx()
    }

    pub fn momenta(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.p(k))
    }
}

/// Norm-preserving discrete Fourier pair between the centered momentum and
/// position grids. Plans are built once and reused across an evolution.
struct GridTransform {
    dp: f64,
    dx: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `i^n` – the global phase from centering both grids.
    center_phase: C64,
}

impl GridTransform {
    fn new(grid: &MomentumGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft(grid.len(), FftDirection::Forward);
        let inv = planner.plan_fft(grid.len(), FftDirection::Inverse);
        let center_phase = match grid.len() % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        Self {
            dp: grid.dp(),
            dx: grid.dx(),
            fwd,
            inv,
            center_phase,
        }
    }

    /// `ψ̃(x_j) = (dp/√2π) Σ_k ψ(p_k) e^{i p_k x_j}`, such that
    /// `Σ_j |ψ̃|² dx = Σ_k |ψ|² dp`.
    fn to_position(&self, amps: &[C64]) -> Vec<C64> {
        let mut buf: Vec<C64> = amps
            .iter()
            .enumerate()
            .map(|(k, &a)| if k % 2 == 0 { a } else { -a })
            .collect();
        self.inv.process(&mut buf);
        let scale = self.center_phase * (self.dp / (2.0 * std::f64::consts::PI).sqrt());
        for (j, v) in buf.iter_mut().enumerate() {
            *v *= if j % 2 == 0 { scale } else { -scale };
        }
        buf
    }

    /// Inverse of [`Self::to_position`].
    fn to_momentum(&self, pos: &[C64]) -> Vec<C64> {
        let mut buf: Vec<C64> = pos
            .iter()
            .enumerate()
            .map(|(j, &a)| if j % 2 == 0 { a } else { -a })
            .collect();
        self.fwd.process(&mut buf);
        let scale = self.center_phase.conj() * (self.dx / (2.0 * std::f64::consts::PI).sqrt());
        for (k, v) in buf.iter_mut().enumerate() {
            *v *= if k % 2 == 0 { scale } else { -scale };
        }
        buf
    }
}

/// Dispersion law driving effective real-time evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispersionLaw {
    /// `E_D = E`; the zero-step reference law.
    Continuum,
    /// Deformed spectrum of a discretization scheme.
    Deformed(Scheme),
}

impl DispersionLaw {
    pub fn ed(&self, e: f64) -> Result<C64> {
        match self {
            DispersionLaw::Continuum => Ok(C64::new(e, 0.0)),
            DispersionLaw::Deformed(s) => s.ed(e),
        }
    }

    /// `dE_D/dE`. For a general scheme this is the real part of the complex
    /// derivative, meaningful once the reality condition has been verified
    /// on the modes of interest.
    pub fn speed_factor(&self, e: f64) -> Result<f64> {
        match self {
            DispersionLaw::Continuum => Ok(1.0),
            DispersionLaw::Deformed(s) => match *s {
                Scheme::General { delta_s, lambda } => {
                    let half = lambda * 0.5;
                    let ed = dispersion::ed_general(e, lambda, delta_s)?;
                    let d = (delta_s - half) * ed + ((delta_s - half) * e).exp() * (half * e).cosh();
                    Ok(d.re)
                }
                _ => dispersion::speed_factor(s, e),
            },
        }
    }
}

/// Stepping rule attached to a packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvolutionScheme {
    /// One forward step of size `τ₁` along imaginary time per advance.
    CaseALiteral { tau1: f64 },
    /// Symmetric-difference two-step recurrence with step `τ₀`.
    CaseBLeapfrog { tau0: f64 },
    /// Per-mode phases `e^{−i·dt·E_D}` under the given law.
    EffectiveDispersion { law: DispersionLaw, dt: f64 },
}

impl EvolutionScheme {
    pub fn label(&self) -> &'static str {
        match self {
            EvolutionScheme::CaseALiteral { .. } => "literal",
            EvolutionScheme::CaseBLeapfrog { .. } => "leapfrog",
            EvolutionScheme::EffectiveDispersion { .. } => "effective",
        }
    }

    /// Evolution-parameter increment per step (`τ₁` along `v`, `τ₀` or `dt`
    /// along `t`).
    pub fn step_size(&self) -> f64 {
        match *self {
            EvolutionScheme::CaseALiteral { tau1 } => tau1,
            EvolutionScheme::CaseBLeapfrog { tau0 } => tau0,
            EvolutionScheme::EffectiveDispersion { dt, .. } => dt,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            EvolutionScheme::CaseALiteral { tau1 } => {
                if !tau1.is_finite() {
                    return Err(Error::Config(format!("literal step must be finite, got {tau1}")));
                }
            }
            EvolutionScheme::CaseBLeapfrog { tau0 } => {
                if !(tau0 > 0.0) || !tau0.is_finite() {
                    return Err(Error::Config(format!(
                        "leapfrog step must be positive, got {tau0}"
                    )));
                }
            }
            EvolutionScheme::EffectiveDispersion { law, dt } => {
                if !(dt > 0.0) || !dt.is_finite() {
                    return Err(Error::Config(format!("time step must be positive, got {dt}")));
                }
                if let DispersionLaw::Deformed(s) = law {
                    match s {
                        Scheme::CaseA { tau1 } => {
                            if !tau1.is_finite() {
                                return Err(Error::Config("case-a step must be finite".into()));
                            }
                        }
                        Scheme::CaseB { tau0 } => {
                            if !(tau0 > 0.0) {
                                return Err(Error::Config("case-b step must be positive".into()));
                            }
                        }
                        Scheme::General { lambda, .. } => {
                            if lambda == C64::new(0.0, 0.0) {
                                return Err(Error::Config("span lambda must be nonzero".into()));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Observables of a packet state. `norm` is the square root of
/// `Σ|ψ(p_k)|²·dp`; positions come from the conjugate-grid transform.
#[derive(Debug, Clone, Copy)]
pub struct Observables {
    pub norm: f64,
    pub centroid_x: f64,
    pub spectral_centroid_p: f64,
    pub quantile_front_x: f64,
}

/// One row of an evolution trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryRecord {
    pub step: u64,
    /// Accumulated evolution parameter: `v` for the literal scheme, `t`
    /// otherwise.
    pub elapsed: f64,
    pub norm: f64,
    pub centroid_x: f64,
    /// Backward-difference slope of the centroid; the first record borrows
    /// the slope of the second.
    pub centroid_v: f64,
    pub front_x: f64,
    /// Probability fraction inside `|x| ≤ front₀ + Δt`, the initial front
    /// expanded at light speed.
    pub cone_fraction: f64,
}

/// A recorded evolution, one record per step plus the initial state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub scheme: EvolutionScheme,
    pub mass: f64,
    pub records: Vec<TrajectoryRecord>,
    /// Momentum-density average of the group velocity at the start of the
    /// run; present for effective-dispersion evolutions.
    pub predicted_speed: Option<f64>,
}

/// Light-cone fit over the second half of a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct LightConeReport {
    pub fitted_centroid_speed: f64,
    pub fitted_front_speed: f64,
    pub predicted_speed: f64,
    /// Standard error of the centroid-speed fit.
    pub fit_error: f64,
    pub superluminal: bool,
}

impl Trajectory {
    /// Least-squares speeds from the second half of the records. Requires at
    /// least 10 records from an effective-dispersion run.
    pub fn light_cone_report(&self) -> Result<LightConeReport> {
        if !matches!(self.scheme, EvolutionScheme::EffectiveDispersion { .. }) {
            return Err(Error::Usage(
                "light-cone analysis applies to effective-dispersion trajectories".into(),
            ));
        }
        if self.records.len() < 10 {
            return Err(Error::Usage(format!(
                "light-cone fit needs at least 10 records, got {}",
                self.records.len()
            )));
        }
        let predicted_speed = self.predicted_speed.ok_or_else(|| {
            Error::Internal("effective trajectory lacks a predicted speed".into())
        })?;
        let half = self.records.len() / 2;
        let window = &self.records[half..];
        let ts: Vec<f64> = window.iter().map(|r| r.elapsed).collect();
        let xs: Vec<f64> = window.iter().map(|r| r.centroid_x).collect();
        let fronts: Vec<f64> = window.iter().map(|r| r.front_x).collect();
        let (_, centroid_speed, fit_error) = linear_fit(&ts, &xs);
        let (_, front_speed, _) = linear_fit(&ts, &fronts);
        Ok(LightConeReport {
            fitted_centroid_speed: centroid_speed,
            fitted_front_speed: front_speed,
            predicted_speed,
            fit_error,
            superluminal: centroid_speed > 1.0 + 3.0 * fit_error,
        })
    }
}

/// A complex amplitude array on a momentum grid, evolving under one scheme.
#[derive(Debug, Clone)]
pub struct PacketState {
    grid: MomentumGrid,
    amps: Vec<C64>,
    /// Previous-step amplitudes; populated by the leapfrog once running.
    amps_prev: Option<Vec<C64>>,
    step_index: u64,
    scheme: EvolutionScheme,
    mass: f64,
}

impl PacketState {
    /// Normalized Gaussian packet `ψ(p) ∝ exp(−(p−p₀)²/(4σ²))`, so the
    /// momentum density has standard deviation `σ`. The band `p₀ ± 4σ` must
    /// fit inside the grid.
    pub fn gaussian(
        grid: MomentumGrid,
        p0: f64,
        sigma: f64,
        mass: f64,
        scheme: EvolutionScheme,
    ) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Config(format!("packet width must be positive, got {sigma}")));
        }
        if p0.abs() + 4.0 * sigma >= grid.p_max() {
            return Err(Error::Config(format!(
                "packet band |p0| + 4σ = {} does not fit inside p_max = {}",
                p0.abs() + 4.0 * sigma,
                grid.p_max()
            )));
        }
        let amps: Vec<C64> = grid
            .momenta()
            .map(|p| {
                let d = p - p0;
                C64::new((-d * d / (4.0 * sigma * sigma)).exp(), 0.0)
            })
            .collect();
        Self::from_amplitudes(grid, amps, mass, scheme)
    }

    /// Wraps raw amplitudes, normalizing them to unit norm.
    pub fn from_amplitudes(
        grid: MomentumGrid,
        mut amps: Vec<C64>,
        mass: f64,
        scheme: EvolutionScheme,
    ) -> Result<Self> {
        scheme.validate()?;
        if !mass.is_finite() || mass < 0.0 {
            return Err(Error::Config(format!("mass must be nonnegative, got {mass}")));
        }
        if amps.len() != grid.len() {
            return Err(Error::Config(format!(
                "amplitude count {} does not match grid size {}",
                amps.len(),
                grid.len()
            )));
        }
        let norm2 = norm_squared_of(&amps, grid.dp());
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::Degenerate(
                "cannot normalize a state with zero or non-finite norm".into(),
            ));
        }
        let inv = 1.0 / norm2.sqrt();
        for a in &mut amps {
            *a *= inv;
        }
        Ok(Self {
            grid,
            amps,
            amps_prev: None,
            step_index: 0,
            scheme,
            mass,
        })
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn scheme(&self) -> &EvolutionScheme {
        &self.scheme
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn norm_squared(&self) -> f64 {
        norm_squared_of(&self.amps, self.grid.dp())
    }

    /// `|ψ(p_k)|²` for every mode.
    pub fn momentum_density(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Position-space amplitudes on the conjugate grid.
    pub fn to_position(&self) -> Vec<C64> {
        GridTransform::new(&self.grid).to_position(&self.amps)
    }

    /// Rebuilds momentum amplitudes from position amplitudes, the inverse
    /// of [`Self::to_position`], provided for round-trip verification.
    pub fn position_to_momentum(grid: &MomentumGrid, pos: &[C64]) -> Vec<C64> {
        GridTransform::new(grid).to_momentum(pos)
    }

    fn energies(&self) -> Result<Vec<f64>> {
        self.grid
            .momenta()
            .map(|p| rel_energy(p.abs(), self.mass))
            .collect()
    }

    /// One literal forward step: every mode multiplied by `e^{τ₁E(p)}`.
    /// The packet's scheme must be [`EvolutionScheme::CaseALiteral`].
    pub fn step_case_a(&mut self) -> Result<()> {
        let EvolutionScheme::CaseALiteral { tau1 } = self.scheme else {
            return Err(Error::Usage(format!(
                "literal step requires the literal scheme, state uses '{}'",
                self.scheme.label()
            )));
        };
        let energies = self.energies()?;
        let factors: Vec<C64> = energies
            .iter()
            .map(|&e| C64::new((tau1 * e).exp(), 0.0))
            .collect();
        apply_factors(&mut self.amps, &factors);
        self.step_index += 1;
        Ok(())
    }

    /// Leapfrog evolution for `steps` steps, recording observables each step.
    pub fn evolve_case_b(&mut self, steps: usize) -> Result<Trajectory> {
        if !matches!(self.scheme, EvolutionScheme::CaseBLeapfrog { .. }) {
            return Err(Error::Usage(format!(
                "leapfrog evolution requires the leapfrog scheme, state uses '{}'",
                self.scheme.label()
            )));
        }
        self.run(steps)
    }

    /// Effective-dispersion evolution for `steps` steps. Refuses schemes
    /// whose spectrum is complex on the grid.
    pub fn evolve_effective(&mut self, steps: usize) -> Result<Trajectory> {
        if !matches!(self.scheme, EvolutionScheme::EffectiveDispersion { .. }) {
            return Err(Error::Usage(format!(
                "effective evolution requires the effective scheme, state uses '{}'",
                self.scheme.label()
            )));
        }
        self.run(steps)
    }

    /// Evolution under whatever scheme the state carries.
    pub fn evolve(&mut self, steps: usize) -> Result<Trajectory> {
        self.run(steps)
    }

    /// Advances the state without recording observables. Unlike the
    /// trajectory-producing evolutions this never touches the position grid,
    /// so it also serves delocalized states (single modes, random vectors)
    /// that the wrap-around guard would reject.
    pub fn advance(&mut self, steps: usize) -> Result<()> {
        if steps < 1 {
            return Err(Error::Usage(format!(
                "evolution needs at least one step, got {steps}"
            )));
        }
        self.scheme.validate()?;
        let energies = self.energies()?;
        let stepper = Stepper::prepare(&self.scheme, &energies)?;
        for _ in 0..steps {
            stepper.advance(&mut self.amps, &mut self.amps_prev);
            self.step_index += 1;
        }
        Ok(())
    }

    pub fn observables(&self) -> Result<Observables> {
        let transform = GridTransform::new(&self.grid);
        let (obs, _) = self.snapshot(&transform)?;
        Ok(obs)
    }

    /// Observables plus the position density they were computed from.
    fn snapshot(&self, transform: &GridTransform) -> Result<(Observables, Vec<f64>)> {
        let dp = self.grid.dp();
        let dx = self.grid.dx();
        let density_p = self.momentum_density();
        let norm2 = pairwise_sum(&density_p) * dp;
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::Degenerate(format!(
                "state norm² is {norm2}; no observables can be formed"
            )));
        }
        let weighted_p: Vec<f64> = density_p
            .iter()
            .enumerate()
            .map(|(k, &d)| self.grid.p(k) * d)
            .collect();
        let spectral_centroid_p = pairwise_sum(&weighted_p) * dp / norm2;

        let pos = transform.to_position(&self.amps);
        let density_x: Vec<f64> = pos.iter().map(|a| a.norm_sqr()).collect();
        let weighted_x: Vec<f64> = density_x
            .iter()
            .enumerate()
            .map(|(j, &d)| self.grid.x(j) * d)
            .collect();
        let centroid_x = pairwise_sum(&weighted_x) * dx / norm2;
        let quantile_front_x = front_radius(&density_x, dx, norm2);

        Ok((
            Observables {
                norm: norm2.sqrt(),
                centroid_x,
                spectral_centroid_p,
                quantile_front_x,
            },
            density_x,
        ))
    }

    /// The shared evolution loop: prepares per-mode factors once, advances
    /// step by step, and records observables after every step. Aborts (with
    /// the state left at the failing step) if the wrap-around guard trips.
    fn run(&mut self, steps: usize) -> Result<Trajectory> {
        if steps < 1 {
            return Err(Error::Usage(format!("evolution needs at least one step, got {steps}")));
        }
        self.scheme.validate()?;
        let energies = self.energies()?;
        let stepper = Stepper::prepare(&self.scheme, &energies)?;
        let predicted_speed = match self.scheme {
            EvolutionScheme::EffectiveDispersion { law, .. } => {
                Some(self.density_weighted_speed(&law, &energies)?)
            }
            _ => None,
        };
        let transform = GridTransform::new(&self.grid);
        let step_size = self.scheme.step_size();
        let base_elapsed = self.step_index as f64 * step_size;

        let mut records: Vec<TrajectoryRecord> = Vec::with_capacity(steps + 1);
        let (obs0, density0) = self.snapshot(&transform)?;
        let front0 = obs0.quantile_front_x;
        records.push(TrajectoryRecord {
            step: self.step_index,
            elapsed: base_elapsed,
            norm: obs0.norm,
            centroid_x: obs0.centroid_x,
            centroid_v: 0.0,
            front_x: obs0.quantile_front_x,
            cone_fraction: cone_fraction(&density0, self.grid.dx(), front0, obs0.norm * obs0.norm),
        });

        for _ in 0..steps {
            stepper.advance(&mut self.amps, &mut self.amps_prev);
            self.step_index += 1;
            let elapsed = self.step_index as f64 * step_size;
            let (obs, density_x) = self.snapshot(&transform)?;
            self.check_boundary(&density_x, obs.norm * obs.norm)?;
            let prev = records.last().expect("at least the initial record");
            let dt = elapsed - prev.elapsed;
            let centroid_v = if dt != 0.0 {
                (obs.centroid_x - prev.centroid_x) / dt
            } else {
                0.0
            };
            let radius = front0 + (elapsed - base_elapsed).abs();
            records.push(TrajectoryRecord {
                step: self.step_index,
                elapsed,
                norm: obs.norm,
                centroid_x: obs.centroid_x,
                centroid_v,
                front_x: obs.quantile_front_x,
                cone_fraction: cone_fraction(&density_x, self.grid.dx(), radius, obs.norm * obs.norm),
            });
        }
        if records.len() > 1 {
            records[0].centroid_v = records[1].centroid_v;
        }
        Ok(Trajectory {
            scheme: self.scheme,
            mass: self.mass,
            records,
            predicted_speed,
        })
    }

    /// `⟨∂E_D/∂p⟩` over the current momentum density. The `E = 0` mode (a
    /// massless packet's zero-momentum sample) carries no direction and
    /// contributes zero velocity.
    fn density_weighted_speed(&self, law: &DispersionLaw, energies: &[f64]) -> Result<f64> {
        let density = self.momentum_density();
        let dp = self.grid.dp();
        let norm2 = pairwise_sum(&density) * dp;
        let mut weighted = Vec::with_capacity(density.len());
        for (k, (&rho, &e)) in density.iter().zip(energies).enumerate() {
            let v = if e == 0.0 {
                0.0
            } else {
                law.speed_factor(e)? * self.grid.p(k) / e
            };
            weighted.push(rho * v);
        }
        Ok(pairwise_sum(&weighted) * dp / norm2)
    }

    fn check_boundary(&self, density_x: &[f64], norm2: f64) -> Result<()> {
        let n = density_x.len();
        let guard_cells = 4.min(n / 2);
        let edge = pairwise_sum(&density_x[..guard_cells])
            + pairwise_sum(&density_x[n - guard_cells..]);
        let fraction = edge * self.grid.dx() / norm2;
        if fraction > BOUNDARY_GUARD_FRACTION {
            return Err(Error::BoundaryGuard(format!(
                "probability fraction {fraction:.3e} within {guard_cells} cells of the position \
                 boundary at step {} (limit {BOUNDARY_GUARD_FRACTION:.0e}); enlarge p_max or n, \
                 or shorten the run",
                self.step_index
            )));
        }
        Ok(())
    }
}

/// Prepared per-mode update factors for one evolution scheme.
enum Stepper {
    Literal { factors: Vec<C64> },
    Leapfrog { kick: Vec<C64>, root: Vec<C64> },
    Phases { factors: Vec<C64> },
}

impl Stepper {
    fn prepare(scheme: &EvolutionScheme, energies: &[f64]) -> Result<Self> {
        match *scheme {
            EvolutionScheme::CaseALiteral { tau1 } => Ok(Stepper::Literal {
                factors: energies
                    .iter()
                    .map(|&e| C64::new((tau1 * e).exp(), 0.0))
                    .collect(),
            }),
            EvolutionScheme::CaseBLeapfrog { tau0 } => {
                // θ = τ₀·E_D = sin(τ₀E); the physical root z = √(1−θ²) − iθ
                // has unit modulus and reduces to e^{−iτ₀E} while τ₀E < π/2.
                let mut kick = Vec::with_capacity(energies.len());
                let mut root = Vec::with_capacity(energies.len());
                for &e in energies {
                    let theta = (tau0 * e).sin();
                    kick.push(C64::new(0.0, -2.0 * theta));
                    root.push(C64::new((1.0 - theta * theta).max(0.0).sqrt(), -theta));
                }
                Ok(Stepper::Leapfrog { kick, root })
            }
            EvolutionScheme::EffectiveDispersion { law, dt } => {
                let mut worst = 0.0f64;
                let mut factors = Vec::with_capacity(energies.len());
                for &e in energies {
                    let ed = law.ed(e)?;
                    let defect = ed.im.abs() / ed.norm().max(1.0);
                    if defect > worst {
                        worst = defect;
                    }
                    factors.push(C64::from_polar(1.0, -dt * ed.re));
                }
                if worst > REALITY_TOL {
                    return Err(Error::RealityViolated(format!(
                        "scheme has max |Im E_D|/|E_D| = {worst:.3e} on the grid \
                         (limit {REALITY_TOL:.0e}); only real spectra evolve unitarily"
                    )));
                }
                Ok(Stepper::Phases { factors })
            }
        }
    }

    fn advance(&self, amps: &mut Vec<C64>, amps_prev: &mut Option<Vec<C64>>) {
        match self {
            Stepper::Literal { factors } | Stepper::Phases { factors } => {
                apply_factors(amps, factors);
            }
            Stepper::Leapfrog { kick, root } => match amps_prev.take() {
                None => {
                    // First advance: seed the recurrence with the physical
                    // root so the parasitic branch never enters.
                    let prev = amps.clone();
                    apply_factors(amps, root);
                    *amps_prev = Some(prev);
                }
                Some(mut prev) => {
                    // ψ_{n+1} = ψ_{n−1} − 2iθψ_n, then shift the window.
                    if amps.len() >= PARALLEL_MODES_MIN {
                        prev.par_iter_mut()
                            .zip(amps.par_iter_mut())
                            .zip(kick.par_iter())
                            .for_each(|((p, c), k)| {
                                let new = *p + *k * *c;
                                *p = *c;
                                *c = new;
                            });
                    } else {
                        for ((p, c), k) in prev.iter_mut().zip(amps.iter_mut()).zip(kick) {
                            let new = *p + *k * *c;
                            *p = *c;
                            *c = new;
                        }
                    }
                    *amps_prev = Some(prev);
                }
            },
        }
    }
}

fn apply_factors(amps: &mut [C64], factors: &[C64]) {
    if amps.len() >= PARALLEL_MODES_MIN {
        amps.par_iter_mut()
            .zip(factors.par_iter())
            .for_each(|(a, f)| *a *= f);
    } else {
        for (a, f) in amps.iter_mut().zip(factors) {
            *a *= f;
        }
    }
}

fn norm_squared_of(amps: &[C64], dp: f64) -> f64 {
    let density: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
    pairwise_sum(&density) * dp
}

/// Smallest radius `X = r·dx` whose symmetric interval `|x| ≤ X` holds at
/// least [`FRONT_QUANTILE`] of the probability.
fn front_radius(density_x: &[f64], dx: f64, norm2: f64) -> f64 {
    let n = density_x.len();
    let j0 = n / 2;
    let target = FRONT_QUANTILE * norm2;
    let mut cum = 0.0;
    for r in 0..=j0 {
        if r == 0 {
            cum += density_x[j0];
        } else {
            if j0 + r < n {
                cum += density_x[j0 + r];
            }
            cum += density_x[j0 - r];
        }
        if cum * dx >= target {
            return r as f64 * dx;
        }
    }
    j0 as f64 * dx
}

/// Probability fraction within `|x| ≤ radius`.
fn cone_fraction(density_x: &[f64], dx: f64, radius: f64, norm2: f64) -> f64 {
    let n = density_x.len();
    let j0 = n / 2;
    let cells = (radius / dx).floor() as usize;
    let lo = j0.saturating_sub(cells);
    let hi = (j0 + cells + 1).min(n);
    pairwise_sum(&density_x[lo..hi]) * dx / norm2
}

/// Closed-form single-mode amplitude after `steps` steps, the brute-force
/// reference every stepper is tested against.
///
/// * literal: `e^{steps·τ₁·E}`
/// * leapfrog: `z(p)^steps` with the physical root `z`
/// * effective: `e^{−i·steps·dt·E_D}`
pub fn mode_oracle(p: f64, m: f64, scheme: &EvolutionScheme, steps: u64) -> Result<C64> {
    let e = rel_energy(p.abs(), m)?;
    match *scheme {
        EvolutionScheme::CaseALiteral { tau1 } => {
            Ok(C64::new((steps as f64 * tau1 * e).exp(), 0.0))
        }
        EvolutionScheme::CaseBLeapfrog { tau0 } => {
            let theta = (tau0 * e).sin();
            let re = (1.0 - theta * theta).max(0.0).sqrt();
            let phase = theta.atan2(re);
            Ok(C64::from_polar(1.0, -(steps as f64) * phase))
        }
        EvolutionScheme::EffectiveDispersion { law, dt } => {
            let ed = law.ed(e)?;
            if ed.im.abs() > REALITY_TOL * ed.norm().max(1.0) {
                return Err(Error::RealityViolated(format!(
                    "mode at p = {p} has complex deformed energy {ed}"
                )));
            }
            Ok(C64::from_polar(1.0, -(steps as f64) * dt * ed.re))
        }
    }
}
