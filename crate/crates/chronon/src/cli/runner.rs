//! Scenario execution: dispatches a validated configuration to the physics
//! modules and assembles the flat output rows. Runs are deterministic given
//! `(config, seed)`; random draws are generated sequentially up front and
//! only the per-draw evaluations run in parallel, collected in draw order.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{CaseSelect, Command, ScenarioConfig, SchemeSelect, SweepSpec};
use super::output::{RecordSet, Value};
use crate::algebra::{commutator_qp_closed, commutator_qp_numeric, GaussianTestState3D, Matrix3};
use crate::difference::eigen_ratio;
use crate::dispersion::{
    ed_general, reality_residual, rel_energy, vec_norm, CaseKind, KinematicPoint, Scheme,
};
use crate::error::{Error, Result};
use crate::wavepacket::{DispersionLaw, EvolutionScheme, MomentumGrid, PacketState};

/// Fixed probe point for the eigenvalue-identity rows; the ratio is
/// `s`-independent, so any point serves.
const DERIVATIVE_PROBE: C64 = C64::new(0.3, -0.2);

/// Commutator draws sample `|p| ≥ 0.3` so the finite-difference stencils
/// stay clear of the massless `E = |p|` kink at the origin.
const DRAW_P_MIN: f64 = 0.3;

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RecordSet> {
    let result = match cfg.command {
        Command::Dispersion => run_dispersion(cfg),
        Command::Evolve => run_evolve(cfg),
        Command::Commutators => run_commutators(cfg),
        Command::Derivative => run_derivative(cfg),
    };
    result.map_err(|e| attach_context(cfg.command.label(), e))
}

fn attach_context(label: &str, e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Domain(format!("{label}: {m}")),
        Error::Usage(m) => Error::Usage(format!("{label}: {m}")),
        Error::Config(m) => Error::Config(format!("{label}: {m}")),
        Error::Capability(m) => Error::Capability(format!("{label}: {m}")),
        Error::Probe(m) => Error::Probe(format!("{label}: {m}")),
        Error::Degenerate(m) => Error::Degenerate(format!("{label}: {m}")),
        Error::RealityViolated(m) => Error::RealityViolated(format!("{label}: {m}")),
        Error::BoundaryGuard(m) => Error::BoundaryGuard(format!("{label}: {m}")),
        Error::Internal(m) => Error::Internal(format!("{label}: {m}")),
        Error::Io(e) => Error::Io(e),
    }
}

fn case_kind(case: CaseSelect) -> CaseKind {
    match case {
        CaseSelect::B => CaseKind::B,
        _ => CaseKind::A,
    }
}

fn run_dispersion(cfg: &ScenarioConfig) -> Result<RecordSet> {
    let sweep = cfg.sweep.clone().unwrap_or(SweepSpec {
        param: "p".into(),
        start: 0.0,
        stop: 4.0,
        count: 81,
        log: false,
    });
    let kind = case_kind(cfg.case);
    let mut records = RecordSet::new(
        vec![
            "case",
            "tau",
            "m",
            "p",
            "E",
            "E_D",
            "v_group",
            "g_factor",
            "im_ed_residual",
        ],
        cfg.key_values(),
    );
    for value in sweep.values() {
        let (p, tau) = match sweep.param.as_str() {
            "tau" => (cfg.p0, value),
            _ => (value, cfg.tau.expect("validated")),
        };
        let scheme = kind.scheme(tau)?;
        let e = rel_energy(p.abs(), cfg.mass)?;
        // E = 0 has no propagation direction; emit the limiting values
        // (zero velocity, unit canonical factor) for that single row.
        let (ed, v_group, g_factor) = if e == 0.0 {
            (0.0, 0.0, 1.0)
        } else {
            let point = KinematicPoint::evaluate(&scheme, [p, 0.0, 0.0], cfg.mass)?;
            (point.e_d.re, point.v_vec[0], point.g)
        };
        let residual = reality_residual(e, scheme.lambda(), scheme.delta_s())?;
        records.push(vec![
            Value::Text(kind.label().into()),
            Value::Float(tau),
            Value::Float(cfg.mass),
            Value::Float(p),
            Value::Float(e),
            Value::Float(ed),
            Value::Float(v_group),
            Value::Float(g_factor),
            Value::Float(residual),
        ])?;
    }
    Ok(records)
}

fn evolution_scheme(cfg: &ScenarioConfig) -> Result<EvolutionScheme> {
    Ok(match cfg.scheme {
        SchemeSelect::Literal => EvolutionScheme::CaseALiteral {
            tau1: cfg.tau.expect("validated for literal evolve"),
        },
        SchemeSelect::Leapfrog => EvolutionScheme::CaseBLeapfrog {
            tau0: cfg.tau.expect("validated for leapfrog evolve"),
        },
        SchemeSelect::Effective => {
            let law = if cfg.case == CaseSelect::General {
                DispersionLaw::Deformed(Scheme::general(cfg.delta_s, cfg.lambda)?)
            } else {
                let tau = cfg.tau.expect("validated for effective evolve");
                if tau == 0.0 {
                    DispersionLaw::Continuum
                } else {
                    DispersionLaw::Deformed(case_kind(cfg.case).scheme(tau)?)
                }
            };
            EvolutionScheme::EffectiveDispersion { law, dt: cfg.dt }
        }
    })
}

fn run_evolve(cfg: &ScenarioConfig) -> Result<RecordSet> {
    let grid = MomentumGrid::new(cfg.grid_n, cfg.p_max)?;
    let scheme = evolution_scheme(cfg)?;
    let mut packet = PacketState::gaussian(grid, cfg.p0, cfg.sigma, cfg.mass, scheme)?;
    let trajectory = packet.evolve(cfg.steps)?;
    let mut records = RecordSet::new(
        vec![
            "step",
            "t",
            "norm",
            "centroid_x",
            "centroid_v",
            "front_x",
            "cone_fraction",
        ],
        cfg.key_values(),
    );
    for r in &trajectory.records {
        records.push(vec![
            Value::Int(r.step as i64),
            Value::Float(r.elapsed),
            Value::Float(r.norm),
            Value::Float(r.centroid_x),
            Value::Float(r.centroid_v),
            Value::Float(r.front_x),
            Value::Float(r.cone_fraction),
        ])?;
    }
    Ok(records)
}

struct CommutatorDraw {
    kind: CaseKind,
    p_vec: [f64; 3],
    m: f64,
    tau: f64,
}

fn run_commutators(cfg: &ScenarioConfig) -> Result<RecordSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draws = Vec::with_capacity(cfg.draws);
    for _ in 0..cfg.draws {
        let kind = match cfg.case {
            CaseSelect::A => CaseKind::A,
            CaseSelect::B => CaseKind::B,
            _ => {
                if rng.gen_bool(0.5) {
                    CaseKind::A
                } else {
                    CaseKind::B
                }
            }
        };
        let p_vec = loop {
            let p = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            if vec_norm(p) >= DRAW_P_MIN {
                break p;
            }
        };
        let m = rng.gen_range(0.0..2.0);
        let tau = cfg.tau.unwrap_or_else(|| rng.gen_range(0.01..0.3));
        draws.push(CommutatorDraw {
            kind,
            p_vec,
            m,
            tau,
        });
    }

    let test = GaussianTestState3D::new([0.2, -0.1, 0.4], 1.0)?;
    let evaluated: Vec<Result<(Matrix3, Matrix3)>> = draws
        .par_iter()
        .map(|d| {
            let scheme = d.kind.scheme(d.tau)?;
            let closed = commutator_qp_closed(&scheme, d.p_vec, d.m)?;
            let numeric = commutator_qp_numeric(&scheme, d.p_vec, d.m, &test)?;
            Ok((closed, numeric))
        })
        .collect();

    let mut records = RecordSet::new(
        vec![
            "case",
            "px",
            "py",
            "pz",
            "m",
            "tau",
            "ij",
            "closed_re",
            "closed_im",
            "numeric_re",
            "numeric_im",
            "abs_err",
        ],
        cfg.key_values(),
    );
    for (draw, pair) in draws.iter().zip(evaluated) {
        let (closed, numeric) = pair?;
        for i in 0..3 {
            for j in 0..3 {
                records.push(vec![
                    Value::Text(draw.kind.label().into()),
                    Value::Float(draw.p_vec[0]),
                    Value::Float(draw.p_vec[1]),
                    Value::Float(draw.p_vec[2]),
                    Value::Float(draw.m),
                    Value::Float(draw.tau),
                    Value::Text(format!("{}{}", i + 1, j + 1)),
                    Value::Float(closed[i][j].re),
                    Value::Float(closed[i][j].im),
                    Value::Float(numeric[i][j].re),
                    Value::Float(numeric[i][j].im),
                    Value::Float((closed[i][j] - numeric[i][j]).norm()),
                ])?;
            }
        }
    }
    Ok(records)
}

fn run_derivative(cfg: &ScenarioConfig) -> Result<RecordSet> {
    let sweep = cfg.sweep.clone().unwrap_or(SweepSpec {
        param: "e".into(),
        start: 0.0,
        stop: 2.0,
        count: 41,
        log: false,
    });
    let (lambda, delta_s) = match cfg.case {
        CaseSelect::General => (cfg.lambda, cfg.delta_s),
        other => {
            let scheme = case_kind(other).scheme(cfg.tau.expect("validated"))?;
            (scheme.lambda(), scheme.delta_s())
        }
    };
    let mut records = RecordSet::new(
        vec![
            "E",
            "lambda_re",
            "lambda_im",
            "ds_re",
            "ds_im",
            "eigen_ratio_re",
            "eigen_ratio_im",
            "ed_general_re",
            "ed_general_im",
            "residual",
        ],
        cfg.key_values(),
    );
    for e in sweep.values() {
        let ratio = eigen_ratio(e, DERIVATIVE_PROBE, delta_s, lambda)?;
        let ed = ed_general(e, lambda, delta_s)?;
        records.push(vec![
            Value::Float(e),
            Value::Float(lambda.re),
            Value::Float(lambda.im),
            Value::Float(delta_s.re),
            Value::Float(delta_s.im),
            Value::Float(ratio.re),
            Value::Float(ratio.im),
            Value::Float(ed.re),
            Value::Float(ed.im),
            Value::Float((ratio - ed).norm()),
        ])?;
    }
    Ok(records)
}
