use clap::Parser;

use chronon::cli::{self, CliArgs};

/// Exit status: 0 success, 1 runtime failure, 2 bad usage or configuration.
fn main() {
    cli::init_threads();
    let args = CliArgs::parse();
    match run(args) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(if e.is_usage() { 2 } else { 1 });
        }
    }
}

fn run(args: CliArgs) -> chronon::Result<()> {
    let cfg = args.into_config()?;
    let records = cli::run_scenario(&cfg)?;
    cli::emit(&records, cfg.format, &cfg.out_path)?;
    Ok(())
}
