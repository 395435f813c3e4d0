//! Config-driven experiment runner: reproduces the library's headline
//! figure data as CSV/JSON tables.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 when a sweep
//! completed with per-point failures (NaN rows in the output).

mod config;
mod experiments;
mod report;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "worklab", version, about = "Experiment runner for the worklab library")]
struct Cli {
    /// Experiment name (alternative to the subcommand form).
    #[arg(long)]
    experiment: Option<String>,
    /// JSON config file; defaults apply for absent fields.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Comma-separated seed list (overrides the config).
    #[arg(long, global = true, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Worker-pool size; 0 uses all cores (overrides the config).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Inverse temperature (overrides the config).
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Strategy-variant work rates over a (p, r) grid.
    PhaseDiagram,
    /// Rate hierarchy w_LO <= f_TO vs the discrimination lower bound.
    TofeCompare,
    /// Extract-while-learning dissipation scaling vs the baseline.
    BanditScaling,
    /// Causal dissipation of multi-time states.
    CausalDissipation,
    /// Reachable-belief-graph dump.
    MspGraph,
    /// Monte-Carlo self-test of the finite-repetition protocol.
    ProtocolCheck,
}

fn fail_config(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match ExperimentConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return fail_config(&e),
    };
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(seeds) = cli.seeds {
        cfg.seeds = seeds;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    if let Some(beta) = cli.beta {
        cfg.beta = beta;
    }
    if let Err(e) = cfg.validate() {
        return fail_config(&e);
    }
    let name = match (&cli.command, cli.experiment.as_deref()) {
        (Some(c), _) => match c {
            Command::PhaseDiagram => "phase-diagram",
            Command::TofeCompare => "tofe-compare",
            Command::BanditScaling => "bandit-scaling",
            Command::CausalDissipation => "causal-dissipation",
            Command::MspGraph => "msp-graph",
            Command::ProtocolCheck => "protocol-check",
        },
        (None, Some(name)) => name,
        (None, None) => return fail_config("no experiment selected (subcommand or --experiment)"),
    };
    if cfg.threads > 0 {
        // Ignore the error when a global pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let run = match name {
        "phase-diagram" => experiments::run_phase_diagram(&cfg),
        "tofe-compare" => experiments::run_tofe_compare(&cfg),
        "bandit-scaling" => experiments::run_bandit_scaling(&cfg),
        "causal-dissipation" => experiments::run_causal_dissipation(&cfg),
        "msp-graph" => experiments::run_msp_graph(&cfg),
        "protocol-check" => experiments::run_protocol_check(&cfg),
        other => return fail_config(&format!("unknown experiment {other:?}")),
    };
    match run {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("warning: {failed} grid point(s) failed; NaN rows emitted");
            ExitCode::from(3)
        }
        Err(e) => fail_config(&e),
    }
}
