//! The `sweep` subcommand: run one cycle per tau value on a worker pool and
//! write the rows, in ascending tau order, as CSV or JSON.
//!
//! A failed point does not abort the sweep: its row carries the error in the
//! status column and the run continues. The exit code is 0 only if every
//! point succeeded.

use std::io::Write;

use rayon::prelude::*;

use crate::config::{OutputFormat, Settings};
use crate::output::{render_csv, render_json, SweepRow};
use qotto_core::{run_constant_delta_b_cycle, run_cycle};

pub fn run(settings: &Settings) -> Result<i32, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers.unwrap_or(0))
        .build()
        .map_err(|e| format!("cannot build worker pool: {e}"))?;

    let rows: Vec<SweepRow> = pool.install(|| {
        settings
            .tau_values
            .par_iter()
            .map(|&tau| {
                let mut cfg = settings.cycle;
                cfg.tau_total = tau;
                let result = if settings.constant_delta_b {
                    run_constant_delta_b_cycle(&cfg)
                } else {
                    run_cycle(&cfg)
                };
                match result {
                    Ok(report) => SweepRow::ok(tau, &report),
                    Err(e) => SweepRow::failed(tau, &e.to_string()),
                }
            })
            .collect()
    });

    let rendered = match settings.format {
        OutputFormat::Csv => render_csv(&rows),
        OutputFormat::Json => render_json(&rows),
    };
    match &settings.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
            file.write_all(rendered.as_bytes())
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
        None => {
            print!("{rendered}");
        }
    }

    let failed = rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        eprintln!("{failed} of {} sweep points failed", rows.len());
        Ok(3)
    } else {
        Ok(0)
    }
}
