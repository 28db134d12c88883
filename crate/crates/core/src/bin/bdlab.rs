use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bdlab::harness::csv::{emit_csv, render_csv};
use bdlab::harness::{suites, sweep, verify, Report, SweepConfig};
use bdlab::{LabError, Result};

#[derive(Parser)]
#[command(name = "bdlab", version, about = "Duhamel inner products, commutator chains and approximating-Hamiltonian bounds")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file for the report or CSV.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for size sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite; exit 1 if any check fails.
    Verify,
    /// Sweep the size grid and write CSV.
    Sweep,
    /// Dicke identities and bounds over the size grid.
    DickeSuite,
    /// Variational gap against its bounds over the size grid.
    AhmGap,
}

fn load(global: &Global) -> Result<SweepConfig> {
    let mut cfg = match &global.config {
        Some(path) => SweepConfig::from_path(path)?,
        None => SweepConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    cfg.output_path = global.out.clone();
    if global.threads == 0 {
        return Err(LabError::Config("--threads must be positive".into()));
    }
    Ok(cfg)
}

fn emit_report(report: &Report, cfg: &SweepConfig) -> Result<bool> {
    let text = report.render();
    match &cfg.output_path {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(report.pass())
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = load(&cli.global)?;
    let threads = cli.global.threads;
    match cli.command {
        Command::Verify => emit_report(&verify::run_verify(&cfg)?, &cfg),
        Command::DickeSuite => emit_report(&suites::run_dicke_suite(&cfg, threads)?, &cfg),
        Command::Sweep => {
            let out = sweep::run_sweep(&cfg, threads)?;
            match &cfg.output_path {
                Some(path) => emit_csv(&out.rows, path)?,
                None => print!("{}", render_csv(&out.rows)),
            }
            for s in &out.series {
                eprintln!("{}", s.describe());
            }
            for f in &out.failures {
                eprintln!("size {} skipped: {}", f.size, f.error);
            }
            Ok(true)
        }
        Command::AhmGap => {
            let out = suites::run_ahm_gap(&cfg, threads)?;
            if let Some(path) = &cfg.output_path {
                emit_csv(&out.rows, path)?;
            }
            print!("{}", out.report.render());
            Ok(out.report.pass())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
