//! `stpat`: file-in/file-out driver for the point-pattern toolkit.
//!
//! One binary, seven subcommands covering the pipeline end to end: simulate
//! patterns, estimate second-order statistics globally and per point, run
//! the permutation test, fit intensity models, and score goodness of fit.
//! Every run that writes an output also drops a `*.runconfig.txt` sidecar
//! holding the effective settings in `--config` syntax, so any artifact can
//! be regenerated bit-for-bit from the file sitting next to it.
//!
//! Exit codes: 0 on success, 2 on usage errors (clap's own), and 1 on
//! computational errors, which additionally land on stderr as one JSON
//! object `{"error": <stable code>, "message": <text>}`.

mod commands;
mod config;
mod inputs;
mod plot;

use clap::{ArgAction, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "stpat",
    version,
    about = "Spatio-temporal point patterns: simulation, estimation, testing, diagnostics",
    args_override_self = true
)]
struct Cli {
    /// Worker threads (fallback: STPAT_THREADS; default: all cores).
    /// Results never depend on this.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// key=value file applied before explicit flags, which win; repeatable.
    /// A runconfig sidecar written by an earlier run works here as-is.
    #[arg(long, global = true, value_name = "FILE", action = ArgAction::Append)]
    config: Vec<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the descriptive block of a pattern file
    Summary(commands::SummaryArgs),
    /// Simulate Poisson or ETAS patterns on a window or a network
    Sim(commands::SimArgs),
    /// Global K-function surface of a planar pattern
    K(commands::KArgs),
    /// Per-point K or pair-correlation surfaces
    Lista(commands::ListaArgs),
    /// Permutation test for local differences between two patterns
    Localtest(commands::LocaltestArgs),
    /// Fit an intensity model (Poisson, local Poisson, separable, or Cox)
    Fit(commands::FitArgs),
    /// Global or per-point goodness-of-fit for a fitted intensity
    Diag(commands::DiagArgs),
}

fn main() {
    let argv = match config::expand_argv(std::env::args().collect()) {
        Ok(argv) => argv,
        Err(err) => fail(err),
    };
    let cli = Cli::parse_from(argv);
    init_threads(cli.threads);
    let outcome = match &cli.command {
        Command::Summary(args) => commands::run_summary(args),
        Command::Sim(args) => commands::run_sim(args),
        Command::K(args) => commands::run_k(args),
        Command::Lista(args) => commands::run_lista(args),
        Command::Localtest(args) => commands::run_localtest(args),
        Command::Fit(args) => commands::run_fit(args),
        Command::Diag(args) => commands::run_diag(args),
    };
    if let Err(err) = outcome {
        fail(err);
    }
}

fn fail(err: stpat::Error) -> ! {
    eprintln!(
        "{}",
        serde_json::json!({ "error": err.code(), "message": err.to_string() })
    );
    std::process::exit(1);
}

fn init_threads(flag: Option<usize>) {
    let n = flag.or_else(|| std::env::var("STPAT_THREADS").ok().and_then(|s| s.parse().ok()));
    if let Some(n) = n.filter(|&n| n > 0) {
        // failure means a pool already exists, which only happens when a
        // test harness calls in twice; the estimators are deterministic
        // under any pool size, so it is safe to keep going
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
