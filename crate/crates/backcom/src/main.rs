use std::path::PathBuf;
use std::process::ExitCode;

use backcom::config;
use backcom::emit::{emit, Format};
use backcom::runner::default_workers;
use backcom::scenario::{run_scenario, RunSettings, Scenario, SweepSpec};
use backcom::{Error, Result};
use backcom_core::simulator::SimOptions;
use clap::error::ErrorKind;
use clap::Parser;

/// Analytic and Monte Carlo link metrics for TH-SS backscatter networks.
#[derive(Debug, Parser)]
#[command(name = "backcom", version)]
struct Cli {
    /// TOML configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// two_link_sync, two_link_async or k_link.
    #[arg(long)]
    scenario: String,

    /// Monte Carlo trials per sweep point.
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// param=start:stop:steps or param=v1,v2,... over rho, N, beta, K, P, E0.
    /// At most one.
    #[arg(long)]
    sweep: Vec<String>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, default_value = "csv")]
    format: String,

    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,

    /// Config override, key=value or section.key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Tags reflect only in the chip they detected.
    #[arg(long)]
    couple_tag_detection: bool,
}

fn run(cli: Cli) -> Result<()> {
    let scenario: Scenario = cli.scenario.parse()?;
    let format: Format = cli.format.parse()?;
    let sweep = match cli.sweep.as_slice() {
        [] => None,
        [one] => Some(one.parse::<SweepSpec>()?),
        _ => return Err(Error::Sweep("at most one --sweep per run".into())),
    };
    let cfg = config::load(cli.config.as_deref(), &cli.overrides)?;
    let settings = RunSettings {
        trials: cli.trials,
        seed: cli.seed,
        workers: cli.workers.unwrap_or_else(default_workers),
        opts: SimOptions {
            couple_tag_detection: cli.couple_tag_detection,
        },
    };
    let rows = run_scenario(scenario, &cfg, sweep.as_ref(), &settings)?;
    emit(&rows, format, cli.out.as_deref())
}

fn fail(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            return fail("usage", msg.lines().next().unwrap_or_default().trim_start_matches("error: "));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}
