//! `gtsfde`: runs convergence sweeps described by a TOML file and writes
//! CSV tables.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 solver
//! failure, 4 failed check in `--verify` mode.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gtsfde::experiment::{
    compare_schemes, run_experiment, verify, write_outputs, ExperimentConfig, ExperimentReport,
    RunnerOptions,
};

#[derive(Debug, Parser)]
#[command(name = "gtsfde", version, about = "Fractional diffusion convergence experiments")]
struct Cli {
    /// Experiment description (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir` from the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for right-hand-side assembly and transforms.
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
    /// Relative residual tolerance of the Krylov solver.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
    /// Seed for the randomized `--verify` instances.
    #[arg(long, value_name = "X", default_value_t = 0)]
    seed: u64,
    /// Run dense-oracle cross checks before the sweep; a failed check, or
    /// a direct/fast disagreement in compare mode, exits with code 4.
    #[arg(long)]
    verify: bool,
    /// Run both the direct and the fast scheme on every grid.
    #[arg(long)]
    compare: bool,
    /// Timed repetitions per run; overrides `repetitions` from the config.
    #[arg(long, value_name = "K")]
    repeat: Option<usize>,
    /// Leave the wall-time column empty so reruns give identical tables.
    #[arg(long)]
    no_timings: bool,
}

const IO_FAILURE: u8 = 1;
const CONFIG_ERROR: u8 = 2;
const VERIFY_FAILURE: u8 = 4;

fn print_summary(report: &ExperimentReport) {
    println!(
        "{:>8} {:>5} {:>5} {:>5} {:>5} {:>6} {:>7} {:>7} {:>12} {:>8} {:>12} {:>8} {:>7}",
        "example", "gamma", "alpha", "b", "p", "scheme", "N", "M", "err_inf", "rate", "err_l2", "rate", "iters"
    );
    let rate = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_else(|| "--".into());
    for r in &report.rows {
        println!(
            "{:>8} {:>5} {:>5} {:>5} {:>5} {:>6} {:>7} {:>7} {:>12.4e} {:>8} {:>12.4e} {:>8} {:>7.1}",
            r.example.label(),
            r.gamma,
            r.alpha,
            r.b,
            r.p,
            r.scheme.label(),
            r.n,
            r.m,
            r.err_inf,
            rate(r.rate_inf),
            r.err_l2,
            rate(r.rate_l2),
            r.iters_avg
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(CONFIG_ERROR);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    }

    let mut verify_failed = false;
    if cli.verify {
        for c in verify(cli.seed) {
            let status = if c.passed { "ok" } else { "FAILED" };
            eprintln!("verify {status:>6}  {}: {}", c.name, c.detail);
            verify_failed |= !c.passed;
        }
        if verify_failed {
            return ExitCode::from(VERIFY_FAILURE);
        }
    }

    let Some(path) = cli.config.as_ref() else {
        if cli.verify {
            return ExitCode::SUCCESS;
        }
        eprintln!("error: --config is required unless only --verify is requested");
        return ExitCode::from(CONFIG_ERROR);
    };
    let mut cfg = match ExperimentConfig::from_file(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(tol) = cli.tol {
        cfg.solver.rtol = tol;
        cfg.solver.accept_rtol = cfg.solver.accept_rtol.max(tol);
    }
    let opts = RunnerOptions {
        timings: !cli.no_timings,
        repetitions: cli.repeat,
    };
    let result = if cli.compare {
        compare_schemes(&cfg, &opts)
    } else {
        run_experiment(&cfg, &opts)
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    print_summary(&report);

    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    match write_outputs(&report, &dir, &cfg.output.stem, cfg.output.plots) {
        Ok(files) => eprintln!("wrote {}", files.table.display()),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(IO_FAILURE);
        }
    }

    let mut disagreements = 0;
    for c in report.disagreements() {
        disagreements += 1;
        eprintln!(
            "warning: fast and direct schemes differ by {:.3e} > {:.1e} at gamma={} alpha={} b={} p={} N={} M={}",
            c.max_difference, cfg.agreement, c.gamma, c.alpha, c.b, c.p, c.n, c.m
        );
    }
    if cli.verify && disagreements > 0 {
        return ExitCode::from(VERIFY_FAILURE);
    }
    ExitCode::SUCCESS
}
