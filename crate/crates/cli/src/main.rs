//! `qotto` - command-line driver for the two-spin quantum Otto engine.
//!
//! Subcommands: `cycle` (single cycle report), `sweep` (tau sweep to
//! CSV/JSON), `validate` (oracle cross-check battery). Exit codes:
//! 0 success, 1 validation failure, 2 config error, 3 numeric error.

mod config;
mod output;
mod sweep;
mod validate;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{log_resolved, resolve, OutputFormat, Overrides};
use qotto_core::{run_constant_delta_b_cycle, run_cycle, EngineError};

#[derive(Parser)]
#[command(
    name = "qotto",
    about = "Two-spin Heisenberg quantum Otto engine simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Flat key = value config file; flags override file values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Total time allotted to both driving branches (0 = sudden limit)
    #[arg(long, value_name = "X")]
    tau: Option<f64>,
    /// Drive B1 in lockstep with B2 so Delta B stays constant (frictionless)
    #[arg(long)]
    constant_delta_b: bool,
    /// Integrator step policy: auto or fixed:H
    #[arg(long, value_name = "POLICY")]
    step_policy: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single cycle and print a flat key = value report
    Cycle {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep tau and write one row per point to CSV or JSON
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Sweep grid MIN:MAX:N, optionally :log
        #[arg(long, value_name = "MIN:MAX:N[:log]")]
        tau_range: Option<String>,
        /// Output path (default: standard output)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Output format
        #[arg(long, value_name = "csv|json")]
        format: Option<String>,
        /// Worker threads for sweep points (default: available parallelism)
        #[arg(long, value_name = "N")]
        workers: Option<usize>,
    },
    /// Run the oracle cross-check battery and print a pass/fail table
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn overrides_from(common: &CommonArgs) -> Overrides {
    Overrides {
        config_path: common.config.clone(),
        tau: common.tau,
        constant_delta_b: common.constant_delta_b,
        step_policy: common.step_policy.clone(),
        ..Overrides::default()
    }
}

fn exit_code_for(err: &EngineError) -> i32 {
    match err {
        EngineError::InvalidParameter(_) | EngineError::InvalidTemperature(_) => 2,
        _ => 3,
    }
}

fn cmd_cycle(common: &CommonArgs) -> i32 {
    let settings = match resolve(&overrides_from(common)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    log_resolved(&settings);
    let result = if settings.constant_delta_b {
        run_constant_delta_b_cycle(&settings.cycle)
    } else {
        run_cycle(&settings.cycle)
    };
    match result {
        Ok(report) => {
            print!("{}", output::render_cycle_report(settings.cycle.tau_total, &report));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn cmd_sweep(
    common: &CommonArgs,
    tau_range: &Option<String>,
    out: &Option<PathBuf>,
    format: &Option<String>,
    workers: Option<usize>,
) -> i32 {
    let format = match format.as_deref().map(str::parse::<OutputFormat>) {
        Some(Ok(f)) => Some(f),
        Some(Err(e)) => {
            eprintln!("{e}");
            return 2;
        }
        None => None,
    };
    let mut overrides = overrides_from(common);
    overrides.tau_range = tau_range.clone();
    overrides.out = out.clone();
    overrides.format = format;
    overrides.workers = workers;
    let settings = match resolve(&overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    log_resolved(&settings);
    match sweep::run(&settings) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

fn cmd_validate(common: &CommonArgs) -> i32 {
    let settings = match resolve(&overrides_from(common)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    log_resolved(&settings);
    validate::run(&settings)
}

fn main() {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Cycle { common } => cmd_cycle(common),
        Command::Sweep {
            common,
            tau_range,
            out,
            format,
            workers,
        } => cmd_sweep(common, tau_range, out, format, *workers),
        Command::Validate { common } => cmd_validate(common),
    };
    std::process::exit(code);
}
