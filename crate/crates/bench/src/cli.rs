//! Command line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use truncreg::{
    effective_dimension, empirical_coefficients, gram_matrix, minmax_truncated_fit, ridge_fit,
    select_alpha_and_fit, AlphaGrid, Dataset, DesignKind, FitResult, NoiseKind, NoiseSpec,
    TruncationParams, DEFAULT_ETA_RANKS, DEFAULT_TAIL_EXPONENT,
};

use crate::scenario::{append_rows, csv_record, run_scenario, ScenarioConfig};
use crate::tables::Suite;
use crate::{BenchError, Result};

#[derive(Debug, Parser)]
#[command(name = "truncreg", version, about = "Robust least squares by soft truncation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the min-max truncated estimator to a CSV dataset.
    Fit {
        csv: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// Fixed truncation scale.
        #[arg(long, conflicts_with = "alpha_grid")]
        alpha: Option<f64>,
        /// `center,ratio,count`; center `auto` uses the inverse OLS residual variance.
        #[arg(long, value_parser = parse_grid)]
        alpha_grid: Option<AlphaGrid<f64>>,
        #[arg(long, value_delimiter = ',')]
        eta_ranks: Option<Vec<usize>>,
        /// Print every iterate.
        #[arg(long)]
        trace: bool,
    },
    /// Run a replicated synthetic scenario and append a summary row.
    Scenario {
        #[arg(long, value_parser = parse_design)]
        design: DesignKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_parser = parse_noise)]
        noise: NoiseKind,
        #[arg(long, default_value_t = DEFAULT_TAIL_EXPONENT)]
        q: f64,
        #[arg(long, default_value_t = 0.005)]
        p: f64,
        #[arg(long, default_value_t = 0.1)]
        rho: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        reps: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print moment diagnostics of a CSV dataset.
    Coefficients {
        csv: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// Radius of the coefficient ball; defaults to twice the norm of the ridge fit.
        #[arg(long)]
        theta_radius: Option<f64>,
        /// Seed for the random directions.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run every row of a reference table.
    Table {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long)]
        reps: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_design(s: &str) -> std::result::Result<DesignKind, String> {
    s.parse().map_err(|e: truncreg::Error| e.to_string())
}

fn parse_noise(s: &str) -> std::result::Result<NoiseKind, String> {
    s.parse().map_err(|e: truncreg::Error| e.to_string())
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: BenchError| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<AlphaGrid<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [center, ratio, count] = parts[..] else {
        return Err("expected center,ratio,count".into());
    };
    let center = match center {
        "auto" => None,
        c => Some(c.parse::<f64>().map_err(|e| format!("center: {e}"))?),
    };
    let ratio = ratio.parse::<f64>().map_err(|e| format!("ratio: {e}"))?;
    let count = count.parse::<usize>().map_err(|e| format!("count: {e}"))?;
    AlphaGrid::new(center, ratio, count).map_err(|e| e.to_string())
}

fn load(path: &Path) -> Result<Dataset<f64>> {
    Dataset::load(path).map_err(|e| BenchError::Input(format!("{}: {e}", path.display())))
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn print_fit(out: &mut dyn Write, fit: &FitResult<f64>, n: usize, trace: bool) -> Result<()> {
    writeln!(out, "theta: {}", join(&fit.theta))?;
    writeln!(out, "support: {} of {}", fit.support.len(), n)?;
    writeln!(out, "iterations: {}", fit.iterations())?;
    match fit.alpha_used {
        Some(a) => writeln!(out, "alpha: {a}")?,
        None => writeln!(out, "alpha: none")?,
    }
    writeln!(out, "equals_erm: {}", fit.equals_erm)?;
    writeln!(out, "removed: {}", join(&fit.removed(n)))?;
    if trace {
        for (k, it) in fit.trace.iter().enumerate() {
            let step = match &it.step {
                Some(s) => format!("eta={} refinement={}", s.eta, s.refinement as u8),
                None => "initial".to_string(),
            };
            let mut keep = vec![false; n];
            it.support.iter().for_each(|&i| keep[i] = true);
            let removed: Vec<usize> = (0..n).filter(|&i| !keep[i]).collect();
            writeln!(
                out,
                "iterate {k}: {step} support={} theta=[{}] removed=[{}]",
                it.support.len(),
                join(&it.theta),
                join(&removed)
            )?;
        }
    }
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Fit { csv, lambda, alpha, alpha_grid, eta_ranks, trace } => {
            let data = load(&csv)?;
            let ranks = eta_ranks.unwrap_or_else(|| DEFAULT_ETA_RANKS.to_vec());
            let fit = match alpha {
                Some(a) => minmax_truncated_fit(&data, &TruncationParams::new(a, lambda)?, &ranks)?,
                None => select_alpha_and_fit(&data, lambda, &alpha_grid.unwrap_or_default(), &ranks)?,
            };
            print_fit(out, &fit, data.n(), trace)
        }
        Command::Scenario {
            design, n, d, noise, q, p, rho, sigma, reps, seed, lambda, out: path,
        } => {
            let spec = NoiseSpec { kind: noise, q, p, rho }.validated()?;
            let mut cfg = ScenarioConfig::new(design, n, d, spec, sigma, reps, seed);
            cfg.lambda = lambda;
            let summary = run_scenario(&cfg)?;
            if summary.failures > 0 {
                eprintln!("warning: {} replications failed", summary.failures);
            }
            append_rows(&path, &[csv_record(&cfg, &summary)])?;
            writeln!(
                out,
                "{} {}: {} reps, {} differ, {} better, ols {} (+-{}), trunc {} (+-{})",
                cfg.design,
                cfg.noise.kind,
                summary.replications,
                summary.n_differ,
                summary.n_better,
                summary.excess_ols.mean,
                summary.excess_ols.half_width,
                summary.excess_trunc.mean,
                summary.excess_trunc.half_width
            )?;
            Ok(())
        }
        Command::Coefficients { csv, lambda, theta_radius, seed } => {
            let data = load(&csv)?;
            let theta_ref = ridge_fit(&data, lambda)?;
            let radius = match theta_radius {
                Some(r) => r,
                None => {
                    let norm = theta_ref.iter().map(|t| t * t).sum::<f64>().sqrt();
                    if norm > 0.0 { 2.0 * norm } else { 1.0 }
                }
            };
            let c = empirical_coefficients(&data, &theta_ref, lambda, radius, seed)?;
            let d_eff = effective_dimension(&gram_matrix(&data).with_lambda(lambda));
            writeln!(out, "theta_ref: {}", join(&theta_ref))?;
            writeln!(out, "sigma: {}", c.sigma)?;
            writeln!(out, "chi: {}", c.chi)?;
            writeln!(out, "kappa: {}", c.kappa)?;
            writeln!(out, "kappa_prime: {}", c.kappa_prime)?;
            writeln!(out, "t_diameter: {}", c.t_diameter)?;
            writeln!(out, "effective_dimension: {d_eff}")?;
            writeln!(out, "degenerate: {}", c.degenerate)?;
            Ok(())
        }
        Command::Table { suite, reps, seed, out: path } => {
            for cfg in suite.configs(reps, seed) {
                let summary = run_scenario(&cfg)?;
                if summary.failures > 0 {
                    eprintln!("warning: {} replications failed", summary.failures);
                }
                append_rows(&path, &[csv_record(&cfg, &summary)])?;
                writeln!(
                    out,
                    "{}({},{}): {} differ, ols {:.3}, trunc {:.3}",
                    cfg.design, cfg.n, cfg.d, summary.n_differ,
                    summary.excess_ols.mean, summary.excess_trunc.mean
                )?;
            }
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(err, "{line}");
            return 2;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
