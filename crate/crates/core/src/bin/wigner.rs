use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wigner_parity::cli::{
    boundary_presets, error_json, load_config, refine_study, run, run_presets,
};
use wigner_parity::error::WignerError;

/// Stationary Wigner equation solver (parity decomposition + direct oracle).
#[derive(Parser)]
#[command(name = "wigner", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run config and write field, moments, diagnostics, manifest.
    Run { config: PathBuf },
    /// Rerun a config with (dx, dv) halved per level and report convergence.
    Refine {
        config: PathBuf,
        #[arg(long)]
        levels: usize,
    },
    /// List named run and boundary presets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

#[derive(Subcommand)]
enum PresetsAction {
    List,
}

fn execute(cli: Cli) -> Result<(), WignerError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let artifacts = run(&cfg)?;
            println!("wrote artifacts to {}", artifacts.output_dir.display());
            if let Some(report) = artifacts.compare {
                println!(
                    "pipeline vs oracle: global relative L2 difference {:.3e}",
                    report.global_rel_l2
                );
            }
            Ok(())
        }
        Command::Refine { config, levels } => {
            let cfg = load_config(&config)?;
            let report = refine_study(&cfg, levels)?;
            for (k, (d_p, d_o)) in report
                .pipeline_diffs
                .iter()
                .zip(&report.oracle_diffs)
                .enumerate()
            {
                println!(
                    "level {k} -> {}: pipeline diff {d_p:.3e}, oracle diff {d_o:.3e}",
                    k + 1
                );
            }
            let fmt = |o: &Option<f64>| match o {
                Some(p) => format!("{p:.2}"),
                None => "n/a (round-off)".into(),
            };
            for (k, (p, o)) in report
                .pipeline_orders
                .iter()
                .zip(&report.oracle_orders)
                .enumerate()
            {
                println!("order estimate {k}: pipeline {}, oracle {}", fmt(p), fmt(o));
            }
            Ok(())
        }
        Command::Presets {
            action: PresetsAction::List,
        } => {
            println!("run presets:");
            for (name, desc) in run_presets() {
                println!("  {name:<18} {desc}");
            }
            println!("boundary presets:");
            for (name, desc) in boundary_presets() {
                println!("  {name:<18} {desc}");
            }
            Ok(())
        }
        Command::Validate { config } => {
            load_config(&config)?;
            println!("ok");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", error_json(&err));
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
