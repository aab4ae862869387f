use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use squeezenm_cli::compare::compare_files;
use squeezenm_cli::presets::{resolve, PRESETS};
use squeezenm_cli::{run_scenario, Engine, RunOptions};

#[derive(Parser)]
#[command(name = "squeezenm", version, about = "Mechanical squeezing in a non-Markovian optomechanical system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a named preset.
    Run {
        scenario: String,
        /// Output directory.
        #[arg(long, env = "SQUEEZENM_OUT_DIR", default_value = "out")]
        out_dir: PathBuf,
        /// Worker threads for sweep points (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Override the time step, keeping t_max and the output count.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the end time, keeping dt and the output spacing.
        #[arg(long)]
        t_max: Option<f64>,
        /// Override the engine list, e.g. `volterra,oracle`.
        #[arg(long, value_delimiter = ',')]
        engines: Option<Vec<String>>,
    },
    /// List the built-in scenarios.
    ListPresets,
    /// Compare two CSV files column by column; fails above the tolerance.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Largest accepted absolute difference.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { scenario, out_dir, jobs, dt, t_max, engines } => {
            let mut scn = resolve(&scenario)?;
            if let Some(dt) = dt {
                scn.grid = scn.grid.with_dt(dt)?;
            }
            if let Some(t_max) = t_max {
                scn.grid = scn.grid.with_t_max(t_max)?;
            }
            if let Some(names) = engines {
                scn.engines = names.iter().map(|n| Engine::parse(n)).collect::<Result<_, _>>()?;
            }
            scn.validate().context("after command-line overrides")?;
            let report = run_scenario(&scn, &RunOptions { out_dir, jobs })?;
            println!("{report}");
            Ok(true)
        }
        Command::ListPresets => {
            for p in PRESETS {
                println!("{:<10} {}", p.name, p.description());
            }
            Ok(true)
        }
        Command::Compare { a, b, tol } => {
            let report = compare_files(&a, &b, tol)?;
            for c in &report.columns {
                println!("{:<20} max |Δ| = {:.3e} (row {})", c.column, c.max_abs, c.row);
            }
            let ok = report.within_tolerance();
            println!("{} within tolerance {tol:e}", if ok { "PASS" } else { "FAIL" });
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

