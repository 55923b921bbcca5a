//! `attractor-dim`: batch front-end for dimension experiments.
//!
//! Exit codes: 0 ok, 1 usage or configuration error, 2 hypothesis violated,
//! 3 numerical failure, 4 inconclusive.

mod commands;
mod config;
mod plot;
mod record;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{Command, Context};
use crate::config::{parse_config, parse_constants_file, CONSTANTS_ENV};
use crate::record::{now_ms, OutDir, Outputs, RunRecord, Status, Timestamps};

#[derive(Parser)]
#[command(name = "attractor-dim", version, about = "Dimension bounds and estimates for reaction-diffusion invariant sets")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `[output] directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for ensembles, random bundles and verification samples.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one trajectory and write norms and field snapshots.
    Simulate,
    /// Lowest eigenvalues of A and proper values of A_delta.
    Spectrum,
    /// Analytic Hausdorff dimension bound.
    Bound,
    /// Numerical dimension estimate from tangent-volume contraction.
    DimEstimate,
    /// Randomized checks of the analytic inequalities.
    Verify,
    /// Compare run.json records.
    Report {
        /// run.json files to compare.
        records: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors; that code is taken
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let cmd = match cli.command {
        Cmd::Simulate => Command::Simulate,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Bound => Command::Bound,
        Cmd::DimEstimate => Command::DimEstimate,
        Cmd::Verify => Command::Verify,
        Cmd::Report { ref records } => return run_report(records, cli.out),
    };
    ExitCode::from(run_command(cmd, &cli) as u8)
}

fn run_report(records: &[PathBuf], out: Option<PathBuf>) -> ExitCode {
    if records.is_empty() {
        eprintln!("error: report needs at least one run.json record");
        eprintln!("usage: attractor-dim report <RECORDS>... [--out <DIR>]");
        return ExitCode::from(1);
    }
    let out = out.unwrap_or_else(|| PathBuf::from("report"));
    match report::write_report(records, &out) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run_command(cmd: Command, cli: &Cli) -> i32 {
    let started = now_ms();
    let Some(path) = &cli.config else {
        eprintln!("error: {} needs --config <PATH>", cmd.name());
        return 1;
    };
    let env_constants = match std::env::var_os(CONSTANTS_ENV) {
        Some(p) if !p.is_empty() => match parse_constants_file(&PathBuf::from(p)) {
            Ok(t) => Some(t),
            Err(e) => {
                eprint!("error: {CONSTANTS_ENV}: {e}");
                return 1;
            }
        },
        _ => None,
    };
    let cfg = match parse_config(path, env_constants.as_ref()) {
        Ok(c) => c,
        Err(e) => {
            eprint!("error: {e}");
            return 1;
        }
    };
    let seed = cli.seed.unwrap_or(cfg.dimension.seed);
    let dir = cli.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    let out = match OutDir::create(dir, cfg.output.formats) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };

    let mut outputs = Outputs::default();
    let result = Context::new(&cfg, seed, &out).and_then(|ctx| commands::run(cmd, &ctx, &mut outputs));
    let (status, error) = match result {
        Ok(s) => (s, None),
        Err(f) => (f.status, Some(f.message)),
    };
    let record = RunRecord {
        tool: "attractor-dim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cmd.name().into(),
        label: cfg.output.label.clone(),
        config_hash: cfg.hash(),
        seed,
        status,
        exit_code: status.exit_code(),
        error: error.clone(),
        grid: cfg.grid,
        config: cfg.canonical.clone(),
        outputs,
        timestamps: Timestamps {
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
        },
    };
    match out.record(&record) {
        Ok(p) => eprintln!("{}: {:?}, record written to {}", cmd.name(), status, p.display()),
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    }
    if let Some(msg) = error {
        eprintln!("error: {msg}");
    }
    summarize(&record);
    if status == Status::Ok {
        0
    } else {
        status.exit_code()
    }
}

/// One-line human summary on stdout.
fn summarize(r: &RunRecord) {
    let o = &r.outputs;
    if let Some(t) = &o.trajectory {
        println!("t = {}: |u|_L2 = {}, |u|_H1 = {}", t.t_end, t.last.l2, t.last.h1);
    }
    if let Some(s) = &o.spectrum {
        println!("eigenvalues of A: {:?}", s.eigenvalues);
    }
    if let Some(b) = &o.bound {
        println!("d_final = {} (d1 = {}, d2 = {}, N = {})", b.d_final, b.d1, b.d2, b.n_count);
    }
    if let Some(d) = &o.dimension {
        println!("dimension estimate: {:?}", d.outcome);
    }
    if let Some(v) = &o.verify {
        for c in &v.checks {
            println!("{:<26} {} worst slack {}", c.name, if c.passed { "pass" } else { "FAIL" }, c.worst_slack);
        }
    }
}
