//! Command-line scenario layer: configuration parsing with file/flag
//! merging, deterministic scenario execution, and byte-stable CSV/JSON
//! emission.

mod config;
mod output;
mod runner;

pub use config::{
    parse_config, CaseSelect, CliArgs, Command, OutputFormat, ScenarioConfig, SchemeSelect,
    SweepSpec,
};
pub use output::{emit, RecordSet, Value};
pub use runner::run_scenario;

/// Builds the global worker pool from the `CHRONON_THREADS` environment
/// variable. Call once at process start; later calls are no-ops. Worker
/// count never changes emitted bytes (reductions use a fixed order), it
/// only caps parallelism.
pub fn init_threads() {
    if let Ok(v) = std::env::var("CHRONON_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
