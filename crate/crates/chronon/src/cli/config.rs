//! Scenario configuration: clap argument definitions, the flat `key=value`
//! configuration file, flag-over-file merging, and invariant validation.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numeric::is_power_of_two;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Dispersion,
    Evolve,
    Commutators,
    Derivative,
}

impl Command {
    pub fn label(&self) -> &'static str {
        match self {
            Command::Dispersion => "dispersion",
            Command::Evolve => "evolve",
            Command::Commutators => "commutators",
            Command::Derivative => "derivative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseSelect {
    A,
    B,
    /// Arbitrary complex `(λ, δs)` supplied through the lambda/ds flags.
    General,
    /// Commutator sweeps only: draw the case per row.
    Both,
}

impl CaseSelect {
    pub fn label(&self) -> &'static str {
        match self {
            CaseSelect::A => "a",
            CaseSelect::B => "b",
            CaseSelect::General => "general",
            CaseSelect::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeSelect {
    Literal,
    Leapfrog,
    Effective,
}

impl SchemeSelect {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeSelect::Literal => "literal",
            SchemeSelect::Leapfrog => "leapfrog",
            SchemeSelect::Effective => "effective",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn label(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// A swept parameter: `name:start:stop:count[:log]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let frac = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                if self.log {
                    self.start * (self.stop / self.start).powf(frac)
                } else {
                    self.start + frac * (self.stop - self.start)
                }
            })
            .collect()
    }

    pub fn spec_string(&self) -> String {
        format!(
            "{}:{}:{}:{}{}",
            self.param,
            self.start,
            self.stop,
            self.count,
            if self.log { ":log" } else { "" }
        )
    }
}

/// Fully validated scenario description.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub command: Command,
    pub case: CaseSelect,
    /// Time step; `None` only for commutator runs, where it is then drawn.
    pub tau: Option<f64>,
    /// General-case difference span and shift (case = general only).
    pub lambda: C64,
    pub delta_s: C64,
    pub mass: f64,
    pub p0: f64,
    pub sigma: f64,
    pub grid_n: usize,
    pub p_max: f64,
    pub steps: usize,
    pub dt: f64,
    pub scheme: SchemeSelect,
    pub draws: usize,
    pub sweep: Option<SweepSpec>,
    pub out_path: PathBuf,
    pub format: OutputFormat,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Every governing parameter as ordered key/value text, mirroring the
    /// configuration-file spelling. Embedded in JSON output so files are
    /// self-describing.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("command".into(), self.command.label().to_string()),
            ("case".into(), self.case.label().to_string()),
        ];
        match self.tau {
            Some(t) => kv.push(("tau".into(), format!("{t}"))),
            None => kv.push(("tau".into(), "drawn".into())),
        }
        if self.case == CaseSelect::General {
            kv.push(("lambda-re".into(), format!("{}", self.lambda.re)));
            kv.push(("lambda-im".into(), format!("{}", self.lambda.im)));
            kv.push(("ds-re".into(), format!("{}", self.delta_s.re)));
            kv.push(("ds-im".into(), format!("{}", self.delta_s.im)));
        }
        kv.push(("mass".into(), format!("{}", self.mass)));
        if self.command == Command::Evolve {
            kv.push(("p0".into(), format!("{}", self.p0)));
            kv.push(("sigma".into(), format!("{}", self.sigma)));
            kv.push(("grid-n".into(), format!("{}", self.grid_n)));
            kv.push(("p-max".into(), format!("{}", self.p_max)));
            kv.push(("steps".into(), format!("{}", self.steps)));
            kv.push(("dt".into(), format!("{}", self.dt)));
            kv.push(("scheme".into(), self.scheme.label().to_string()));
        }
        if self.command == Command::Commutators {
            kv.push(("draws".into(), format!("{}", self.draws)));
        }
        if let Some(s) = &self.sweep {
            kv.push(("sweep".into(), s.spec_string()));
        }
        kv.push(("seed".into(), format!("{}", self.seed)));
        kv.push(("format".into(), self.format.label().to_string()));
        kv
    }
}

/// Verify deformed dispersion relations and wave-packet dynamics of
/// discrete-time evolution schemes.
#[derive(Debug, Parser)]
#[command(name = "chronon", version, about)]
pub struct CliArgs {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Tabulate E, E_D, group velocity and canonical factor over a momentum
    /// or step sweep
    Dispersion(CommonArgs),
    /// Evolve a Gaussian wave packet and record its trajectory
    Evolve(CommonArgs),
    /// Compare closed-form and numerically differentiated canonical
    /// commutators over random draws
    Commutators(CommonArgs),
    /// Check the difference-quotient eigenvalue identity against the
    /// deformed-energy map
    Derivative(CommonArgs),
}

/// One flat flag set shared by all subcommands, mirroring the configuration
/// file keys one-to-one.
#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Flat key=value configuration file; flags override file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Discretization case: a, b, general (derivative/evolve-effective) or
    /// both (commutators)
    #[arg(long)]
    pub case: Option<String>,
    /// Time step (tau1 for case a, tau0 for case b)
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Particle mass
    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,
    #[arg(long = "lambda-re", allow_negative_numbers = true)]
    pub lambda_re: Option<f64>,
    #[arg(long = "lambda-im", allow_negative_numbers = true)]
    pub lambda_im: Option<f64>,
    #[arg(long = "ds-re", allow_negative_numbers = true)]
    pub ds_re: Option<f64>,
    #[arg(long = "ds-im", allow_negative_numbers = true)]
    pub ds_im: Option<f64>,
    /// Packet momentum centroid
    #[arg(long, allow_negative_numbers = true)]
    pub p0: Option<f64>,
    /// Packet momentum width
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Number of grid modes (power of two)
    #[arg(long = "grid-n")]
    pub grid_n: Option<usize>,
    /// Momentum cutoff of the grid
    #[arg(long = "p-max", allow_negative_numbers = true)]
    pub p_max: Option<f64>,
    /// Number of evolution steps
    #[arg(long)]
    pub steps: Option<usize>,
    /// Real-time step of the effective scheme
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Stepping rule: literal, leapfrog or effective
    #[arg(long)]
    pub scheme: Option<String>,
    /// Number of random commutator draws
    #[arg(long)]
    pub draws: Option<usize>,
    /// Swept parameter as name:start:stop:count[:log]
    #[arg(long)]
    pub sweep: Option<String>,
    /// Output file path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Seed for random draws
    #[arg(long)]
    pub seed: Option<u64>,
}

const KNOWN_KEYS: &[&str] = &[
    "case", "tau", "mass", "lambda-re", "lambda-im", "ds-re", "ds-im", "p0", "sigma", "grid-n",
    "p-max", "steps", "dt", "scheme", "draws", "sweep", "out", "format", "seed",
];

/// Parses a flat `key=value` file. Blank lines and lines starting with `#`
/// are skipped; unknown keys are rejected by name.
fn load_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Usage(format!("cannot read config file {}: {e}", path.display()))
    })?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Usage(format!(
                "config file line {} is not key=value: '{line}'",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Usage(format!("unknown config file key '{key}'")));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn file_value<T: std::str::FromStr>(
    file: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>> {
    match file.get(key) {
        None => Ok(None),
        Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
            Error::Usage(format!("config file key '{key}': cannot parse value '{raw}'"))
        }),
    }
}

impl CommonArgs {
    /// Flags override file values; remaining holes take the documented
    /// defaults (grid-n 4096, p-max 16, sigma 0.25, p0 1, mass 0, steps
    /// 1000, dt 0.01, draws 100, seed 0, format csv).
    fn merged(self, command: Command) -> Result<ScenarioConfig> {
        let file = match &self.config {
            Some(path) => load_config_file(path)?,
            None => HashMap::new(),
        };
        let case_raw: Option<String> = self.case.or(file_value(&file, "case")?);
        let tau = self.tau.or(file_value(&file, "tau")?);
        let mass = self.mass.or(file_value(&file, "mass")?).unwrap_or(0.0);
        let lambda_re = self.lambda_re.or(file_value(&file, "lambda-re")?);
        let lambda_im = self.lambda_im.or(file_value(&file, "lambda-im")?);
        let ds_re = self.ds_re.or(file_value(&file, "ds-re")?);
        let ds_im = self.ds_im.or(file_value(&file, "ds-im")?);
        let p0 = self.p0.or(file_value(&file, "p0")?).unwrap_or(1.0);
        let sigma = self.sigma.or(file_value(&file, "sigma")?).unwrap_or(0.25);
        let grid_n = self.grid_n.or(file_value(&file, "grid-n")?).unwrap_or(4096);
        let p_max = self.p_max.or(file_value(&file, "p-max")?).unwrap_or(16.0);
        let steps = self.steps.or(file_value(&file, "steps")?).unwrap_or(1000);
        let dt = self.dt.or(file_value(&file, "dt")?).unwrap_or(0.01);
        let scheme_raw: Option<String> = self.scheme.or(file_value(&file, "scheme")?);
        let draws = self.draws.or(file_value(&file, "draws")?).unwrap_or(100);
        let sweep_raw: Option<String> = self.sweep.or(file_value(&file, "sweep")?);
        let out = self
            .out
            .or(file.get("out").map(PathBuf::from))
            .ok_or_else(|| Error::Usage("missing required option '--out'".into()))?;
        let format_raw: Option<String> = self.format.or(file_value(&file, "format")?);
        let seed = self.seed.or(file_value(&file, "seed")?).unwrap_or(0);

        let scheme = match scheme_raw.as_deref() {
            None | Some("effective") => SchemeSelect::Effective,
            Some("literal") => SchemeSelect::Literal,
            Some("leapfrog") => SchemeSelect::Leapfrog,
            Some(other) => {
                return Err(Error::Usage(format!(
                    "key 'scheme': expected literal|leapfrog|effective, got '{other}'"
                )))
            }
        };
        let format = match format_raw.as_deref() {
            None | Some("csv") => OutputFormat::Csv,
            Some("json") => OutputFormat::Json,
            Some(other) => {
                return Err(Error::Usage(format!(
                    "key 'format': expected csv|json, got '{other}'"
                )))
            }
        };
        let case = parse_case(command, scheme, case_raw.as_deref())?;
        let sweep = match sweep_raw {
            Some(raw) => Some(parse_sweep(&raw)?),
            None => None,
        };

        let lambda = C64::new(lambda_re.unwrap_or(0.0), lambda_im.unwrap_or(0.0));
        let delta_s = C64::new(ds_re.unwrap_or(0.0), ds_im.unwrap_or(0.0));
        if case == CaseSelect::General {
            let given = lambda_re.is_some() || lambda_im.is_some();
            if !given {
                return Err(Error::Usage(
                    "case 'general' needs --lambda-re/--lambda-im and --ds-re/--ds-im".into(),
                ));
            }
            if lambda == C64::new(0.0, 0.0) {
                return Err(Error::Usage("key 'lambda-re': span lambda must be nonzero".into()));
            }
        }

        let cfg = ScenarioConfig {
            command,
            case,
            tau,
            lambda,
            delta_s,
            mass,
            p0,
            sigma,
            grid_n,
            p_max,
            steps,
            dt,
            scheme,
            draws,
            sweep,
            out_path: out,
            format,
            seed,
        };
        validate(&cfg)?;
        Ok(cfg)
    }
}

fn parse_case(
    command: Command,
    scheme: SchemeSelect,
    raw: Option<&str>,
) -> Result<CaseSelect> {
    let parsed = match raw {
        None => None,
        Some("a") => Some(CaseSelect::A),
        Some("b") => Some(CaseSelect::B),
        Some("general") => Some(CaseSelect::General),
        Some("both") => Some(CaseSelect::Both),
        Some(other) => {
            return Err(Error::Usage(format!(
                "key 'case': expected a|b|general|both, got '{other}'"
            )))
        }
    };
    match command {
        Command::Dispersion => match parsed {
            Some(c @ (CaseSelect::A | CaseSelect::B)) => Ok(c),
            Some(other) => Err(Error::Usage(format!(
                "key 'case': dispersion supports a|b, got '{}'",
                other.label()
            ))),
            None => Err(Error::Usage("key 'case' is required for dispersion".into())),
        },
        Command::Evolve => match (scheme, parsed) {
            (SchemeSelect::Literal, None | Some(CaseSelect::A)) => Ok(CaseSelect::A),
            (SchemeSelect::Literal, Some(other)) => Err(Error::Usage(format!(
                "key 'case': the literal scheme is case a, got '{}'",
                other.label()
            ))),
            (SchemeSelect::Leapfrog, None | Some(CaseSelect::B)) => Ok(CaseSelect::B),
            (SchemeSelect::Leapfrog, Some(other)) => Err(Error::Usage(format!(
                "key 'case': the leapfrog scheme is case b, got '{}'",
                other.label()
            ))),
            (SchemeSelect::Effective, Some(c @ (CaseSelect::A | CaseSelect::B | CaseSelect::General))) => {
                Ok(c)
            }
            (SchemeSelect::Effective, Some(CaseSelect::Both)) => Err(Error::Usage(
                "key 'case': effective evolution needs a single case (a|b|general)".into(),
            )),
            (SchemeSelect::Effective, None) => Err(Error::Usage(
                "key 'case' is required for effective evolution".into(),
            )),
        },
        Command::Commutators => match parsed {
            None => Ok(CaseSelect::Both),
            Some(c @ (CaseSelect::A | CaseSelect::B | CaseSelect::Both)) => Ok(c),
            Some(CaseSelect::General) => Err(Error::Usage(
                "key 'case': commutators support a|b|both".into(),
            )),
        },
        Command::Derivative => match parsed {
            Some(c @ (CaseSelect::A | CaseSelect::B | CaseSelect::General)) => Ok(c),
            Some(CaseSelect::Both) => Err(Error::Usage(
                "key 'case': derivative supports a|b|general".into(),
            )),
            None => Err(Error::Usage("key 'case' is required for derivative".into())),
        },
    }
}

fn parse_sweep(raw: &str) -> Result<SweepSpec> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 4 && parts.len() != 5 {
        return Err(Error::Usage(format!(
            "key 'sweep': expected name:start:stop:count[:log], got '{raw}'"
        )));
    }
    let log = match parts.get(4) {
        None => false,
        Some(&"log") => true,
        Some(other) => {
            return Err(Error::Usage(format!(
                "key 'sweep': spacing must be 'log', got '{other}'"
            )))
        }
    };
    let parse_f = |s: &str, what: &str| -> Result<f64> {
        s.parse().map_err(|_| {
            Error::Usage(format!("key 'sweep': cannot parse {what} value '{s}'"))
        })
    };
    let start = parse_f(parts[1], "start")?;
    let stop = parse_f(parts[2], "stop")?;
    let count: usize = parts[3].parse().map_err(|_| {
        Error::Usage(format!("key 'sweep': cannot parse count '{}'", parts[3]))
    })?;
    if count < 2 {
        return Err(Error::Usage(format!(
            "key 'sweep': count must be at least 2, got {count}"
        )));
    }
    if log && (start <= 0.0 || stop <= 0.0) {
        return Err(Error::Usage(
            "key 'sweep': log spacing needs positive start and stop".into(),
        ));
    }
    Ok(SweepSpec {
        param: parts[0].to_string(),
        start,
        stop,
        count,
        log,
    })
}

fn validate(cfg: &ScenarioConfig) -> Result<()> {
    if !is_power_of_two(cfg.grid_n) {
        return Err(Error::Usage(format!(
            "key 'grid-n': must be a power of two, got {}",
            cfg.grid_n
        )));
    }
    if !(cfg.p_max > 0.0) {
        return Err(Error::Usage(format!(
            "key 'p-max': must be positive, got {}",
            cfg.p_max
        )));
    }
    if !(cfg.sigma > 0.0) {
        return Err(Error::Usage(format!(
            "key 'sigma': must be positive, got {}",
            cfg.sigma
        )));
    }
    if cfg.mass < 0.0 {
        return Err(Error::Usage(format!(
            "key 'mass': must be nonnegative, got {}",
            cfg.mass
        )));
    }
    if cfg.steps < 1 {
        return Err(Error::Usage("key 'steps': must be at least 1".into()));
    }
    if !(cfg.dt > 0.0) {
        return Err(Error::Usage(format!("key 'dt': must be positive, got {}", cfg.dt)));
    }
    if cfg.draws < 1 {
        return Err(Error::Usage("key 'draws': must be at least 1".into()));
    }

    // Per-command step-sign rules. The effective scheme accepts tau = 0 as
    // the continuum baseline; dispersion case a accepts signed steps.
    match cfg.command {
        Command::Dispersion => {
            let tau = required_tau(cfg)?;
            match cfg.case {
                CaseSelect::A => {
                    if tau == 0.0 {
                        return Err(Error::Usage(
                            "key 'tau': dispersion case a needs a nonzero step".into(),
                        ));
                    }
                }
                _ => {
                    if !(tau > 0.0) {
                        return Err(Error::Usage(format!(
                            "key 'tau': case b needs a positive step, got {tau}"
                        )));
                    }
                }
            }
        }
        Command::Evolve => match cfg.scheme {
            SchemeSelect::Literal => {
                let tau = required_tau(cfg)?;
                if !tau.is_finite() {
                    return Err(Error::Usage("key 'tau': must be finite".into()));
                }
            }
            SchemeSelect::Leapfrog => {
                let tau = required_tau(cfg)?;
                if !(tau > 0.0) {
                    return Err(Error::Usage(format!(
                        "key 'tau': leapfrog needs a positive step, got {tau}"
                    )));
                }
            }
            SchemeSelect::Effective => {
                // general-case evolution takes its span from the lambda/ds
                // flags; tau is not consulted
                if cfg.case != CaseSelect::General {
                    let tau = required_tau(cfg)?;
                    if cfg.case == CaseSelect::B && tau < 0.0 {
                        return Err(Error::Usage(format!(
                            "key 'tau': case b needs a nonnegative step, got {tau}"
                        )));
                    }
                }
            }
        },
        Command::Commutators => {
            if let Some(tau) = cfg.tau {
                if !(tau > 0.0) {
                    return Err(Error::Usage(format!(
                        "key 'tau': commutator draws need a positive step, got {tau}"
                    )));
                }
            }
        }
        Command::Derivative => {
            if cfg.case != CaseSelect::General {
                let tau = required_tau(cfg)?;
                let bad_a = cfg.case == CaseSelect::A && tau == 0.0;
                let bad_b = cfg.case == CaseSelect::B && !(tau > 0.0);
                if bad_a || bad_b {
                    return Err(Error::Usage(format!(
                        "key 'tau': invalid step {tau} for case {}",
                        cfg.case.label()
                    )));
                }
            }
        }
    }

    if let Some(sweep) = &cfg.sweep {
        let allowed: &[&str] = match cfg.command {
            Command::Dispersion => &["p", "tau"],
            Command::Derivative => &["e"],
            Command::Evolve | Command::Commutators => &[],
        };
        if !allowed.contains(&sweep.param.as_str()) {
            return Err(Error::Usage(format!(
                "key 'sweep': parameter '{}' is not sweepable for {} (allowed: {})",
                sweep.param,
                cfg.command.label(),
                if allowed.is_empty() { "none" } else { "p, tau / e" }
            )));
        }
        if sweep.param == "tau" {
            let positive_needed = cfg.case == CaseSelect::B;
            if positive_needed && sweep.start <= 0.0 {
                return Err(Error::Usage(
                    "key 'sweep': case-b tau sweep needs positive values".into(),
                ));
            }
            if sweep.values().contains(&0.0) && cfg.case == CaseSelect::A {
                return Err(Error::Usage(
                    "key 'sweep': case-a tau sweep must avoid zero".into(),
                ));
            }
        }
    }
    Ok(())
}

fn required_tau(cfg: &ScenarioConfig) -> Result<f64> {
    // A tau sweep supplies the step per row.
    if matches!(&cfg.sweep, Some(s) if s.param == "tau") {
        return Ok(cfg.sweep.as_ref().unwrap().start);
    }
    cfg.tau
        .ok_or_else(|| Error::Usage("missing required option '--tau'".into()))
}

impl CliArgs {
    pub fn into_config(self) -> Result<ScenarioConfig> {
        match self.command {
            CommandArgs::Dispersion(a) => a.merged(Command::Dispersion),
            CommandArgs::Evolve(a) => a.merged(Command::Evolve),
            CommandArgs::Commutators(a) => a.merged(Command::Commutators),
            CommandArgs::Derivative(a) => a.merged(Command::Derivative),
        }
    }
}

/// Parses an argv-style list into a validated scenario configuration.
/// Clap-level failures (unknown flags, type mismatches, help requests) come
/// back as usage errors carrying clap's message.
pub fn parse_config<I, T>(argv: I) -> Result<ScenarioConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = CliArgs::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
    cli.into_config()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("chronon".to_string())
            .chain(s.split_whitespace().map(|w| w.to_string()))
            .collect()
    }

    #[test]
    fn happy_path_leapfrog() {
        let cfg = parse_config(argv(
            "evolve --scheme leapfrog --tau 0.05 --mass 1 --p0 1 --steps 2000 --out x.csv",
        ))
        .unwrap();
        assert_eq!(cfg.command, Command::Evolve);
        assert_eq!(cfg.case, CaseSelect::B);
        assert_eq!(cfg.tau, Some(0.05));
        assert_eq!(cfg.steps, 2000);
        assert_eq!(cfg.grid_n, 4096);
        assert_eq!(cfg.p_max, 16.0);
        assert_eq!(cfg.sigma, 0.25);
        assert_eq!(cfg.format, OutputFormat::Csv);
    }

    #[test]
    fn grid_size_must_be_power_of_two() {
        let err = parse_config(argv(
            "evolve --scheme effective --case a --tau 0.1 --grid-n 1000 --out x.csv",
        ))
        .unwrap_err();
        assert!(err.to_string().contains("grid-n"), "{err}");
        assert!(err.is_usage());
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let err = parse_config(argv("evolve --bogus 3 --out x.csv")).unwrap_err();
        assert!(err.is_usage());
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# comment line").unwrap();
        writeln!(f, "tau=0.1").unwrap();
        writeln!(f, "mass=1").unwrap();
        writeln!(f, "out=from_file.csv").unwrap();
        drop(f);
        let cfg = parse_config(argv(&format!(
            "dispersion --case a --config {} --tau 0.2",
            path.display()
        )))
        .unwrap();
        assert_eq!(cfg.tau, Some(0.2)); // flag wins
        assert_eq!(cfg.mass, 1.0); // file fills the hole
        assert_eq!(cfg.out_path, PathBuf::from("from_file.csv"));
    }

    #[test]
    fn unknown_file_key_is_rejected_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        std::fs::write(&path, "taus=0.1\n").unwrap();
        let err = parse_config(argv(&format!(
            "dispersion --case a --tau 0.1 --out x.csv --config {}",
            path.display()
        )))
        .unwrap_err();
        assert!(err.to_string().contains("taus"), "{err}");
    }

    #[test]
    fn file_type_mismatch_names_the_key() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        std::fs::write(&path, "steps=soon\n").unwrap();
        let err = parse_config(argv(&format!(
            "evolve --scheme leapfrog --tau 0.1 --out x.csv --config {}",
            path.display()
        )))
        .unwrap_err();
        assert!(err.to_string().contains("steps"), "{err}");
    }

    #[test]
    fn case_rules_per_command() {
        assert!(parse_config(argv("dispersion --case general --tau 0.1 --out x.csv")).is_err());
        assert!(parse_config(argv("dispersion --tau 0.1 --out x.csv")).is_err());
        assert!(parse_config(argv(
            "evolve --scheme leapfrog --case a --tau 0.1 --out x.csv"
        ))
        .is_err());
        // commutators default to drawing the case
        let cfg = parse_config(argv("commutators --out x.csv")).unwrap();
        assert_eq!(cfg.case, CaseSelect::Both);
        assert_eq!(cfg.tau, None);
    }

    #[test]
    fn tau_sign_rules() {
        // dispersion case a allows a signed step
        assert!(parse_config(argv("dispersion --case a --tau -0.1 --out x.csv")).is_ok());
        assert!(parse_config(argv("dispersion --case a --tau 0 --out x.csv")).is_err());
        assert!(parse_config(argv("dispersion --case b --tau -0.1 --out x.csv")).is_err());
        // effective evolution allows tau = 0 (continuum baseline)
        assert!(parse_config(argv(
            "evolve --scheme effective --case a --tau 0 --out x.csv"
        ))
        .is_ok());
        assert!(parse_config(argv("evolve --scheme leapfrog --tau 0 --out x.csv")).is_err());
    }

    #[test]
    fn general_case_needs_span() {
        let err =
            parse_config(argv("derivative --case general --out x.csv")).unwrap_err();
        assert!(err.to_string().contains("lambda"), "{err}");
        let cfg = parse_config(argv(
            "derivative --case general --lambda-re 1 --ds-im 1 --out x.csv",
        ))
        .unwrap();
        assert_eq!(cfg.lambda, C64::new(1.0, 0.0));
        assert_eq!(cfg.delta_s, C64::new(0.0, 1.0));
    }

    #[test]
    fn sweep_parsing_and_rules() {
        let cfg = parse_config(argv(
            "dispersion --case b --tau 1 --sweep p:0:4:81 --out x.csv",
        ))
        .unwrap();
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.count, 81);
        assert!(!sweep.log);
        let vals = sweep.values();
        assert_eq!(vals.len(), 81);
        assert_eq!(vals[0], 0.0);
        assert_eq!(vals[80], 4.0);

        assert!(parse_config(argv(
            "dispersion --case b --tau 1 --sweep p:0:4:1 --out x.csv"
        ))
        .is_err());
        assert!(parse_config(argv(
            "evolve --scheme leapfrog --tau 0.1 --sweep p:0:4:10 --out x.csv"
        ))
        .is_err());
        assert!(parse_config(argv(
            "dispersion --case b --tau 1 --sweep tau:0:1:5:log --out x.csv"
        ))
        .is_err());
        let log = parse_sweep("tau:0.01:1:5:log").unwrap();
        let vals = log.values();
        assert!((vals[0] - 0.01).abs() < 1e-15);
        assert!((vals[4] - 1.0).abs() < 1e-12);
        let ratio0 = vals[1] / vals[0];
        let ratio1 = vals[2] / vals[1];
        assert!((ratio0 - ratio1).abs() < 1e-9);
    }

    #[test]
    fn missing_out_is_required() {
        let err = parse_config(argv("dispersion --case a --tau 0.1")).unwrap_err();
        assert!(err.to_string().contains("--out"), "{err}");
    }
}
