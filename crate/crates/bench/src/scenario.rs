//! Seeded replications of one synthetic scenario.

use std::fs::OpenOptions;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use rayon::prelude::*;
use truncreg::{
    build_oracle, least_squares_fit, select_alpha_and_fit, stream_rng, AlphaGrid, DesignKind,
    NoiseSpec, DEFAULT_ETA_RANKS,
};

use crate::{BenchError, Result};

pub const CSV_HEADER: [&str; 17] = [
    "design",
    "n",
    "d",
    "noise",
    "params",
    "reps",
    "n_differ",
    "n_better",
    "mean_excess_ols",
    "ci_ols",
    "mean_excess_trunc",
    "ci_trunc",
    "cond_ols",
    "cond_ci_ols",
    "cond_trunc",
    "cond_ci_trunc",
    "mean_removed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub design: DesignKind,
    pub n: usize,
    pub d: usize,
    pub noise: NoiseSpec,
    pub noise_sigma: f64,
    /// Replication indices to run; each one seeds its own stream.
    pub replications: Range<u64>,
    pub base_seed: u64,
    pub lambda: f64,
    pub alpha_grid: AlphaGrid<f64>,
    pub eta_ranks: Vec<usize>,
}

impl ScenarioConfig {
    /// Replications `0..reps` with the default grid, eta ranks and `lambda = 0`.
    pub fn new(
        design: DesignKind,
        n: usize,
        d: usize,
        noise: NoiseSpec,
        noise_sigma: f64,
        reps: u64,
        base_seed: u64,
    ) -> Self {
        Self {
            design,
            n,
            d,
            noise,
            noise_sigma,
            replications: 0..reps,
            base_seed,
            lambda: 0.0,
            alpha_grid: AlphaGrid::default(),
            eta_ranks: DEFAULT_ETA_RANKS.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications.is_empty() {
            return Err(BenchError::Config("at least one replication is required".into()));
        }
        if self.n == 0 || self.d == 0 {
            return Err(BenchError::Config("n and d must be positive".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(BenchError::Config(format!(
                "noise sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(BenchError::Config(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        if self.eta_ranks.is_empty() || self.eta_ranks.contains(&0) {
            return Err(BenchError::Config("eta ranks must be positive and non-empty".into()));
        }
        AlphaGrid::new(self.alpha_grid.center, self.alpha_grid.ratio, self.alpha_grid.count)?;
        self.noise.validate()?;
        Ok(())
    }
}

/// Outcome of one successful replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replication {
    pub index: u64,
    pub excess_ols: f64,
    pub excess_trunc: f64,
    pub differs: bool,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationFailure {
    pub index: u64,
    pub message: String,
}

/// Per-replication results of a run, ordered by replication index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioRun {
    pub records: Vec<Replication>,
    pub failures: Vec<ReplicationFailure>,
}

impl ScenarioRun {
    /// Combines two runs over disjoint replication ranges.
    pub fn merge(mut self, other: ScenarioRun) -> ScenarioRun {
        self.records.extend(other.records);
        self.failures.extend(other.failures);
        self.records.sort_by_key(|r| r.index);
        self.failures.sort_by_key(|f| f.index);
        self
    }

    pub fn summary(&self) -> ScenarioSummary {
        let ols: Vec<f64> = self.records.iter().map(|r| r.excess_ols).collect();
        let trunc: Vec<f64> = self.records.iter().map(|r| r.excess_trunc).collect();
        let differing: Vec<&Replication> = self.records.iter().filter(|r| r.differs).collect();
        let cond_ols: Vec<f64> = differing.iter().map(|r| r.excess_ols).collect();
        let cond_trunc: Vec<f64> = differing.iter().map(|r| r.excess_trunc).collect();
        let mean_removed = if differing.is_empty() {
            0.0
        } else {
            differing.iter().map(|r| r.removed as f64).sum::<f64>() / differing.len() as f64
        };
        ScenarioSummary {
            replications: self.records.len(),
            failures: self.failures.len(),
            n_differ: differing.len(),
            n_better: differing.iter().filter(|r| r.excess_trunc < r.excess_ols).count(),
            excess_ols: summarize_ci(&ols),
            excess_trunc: summarize_ci(&trunc),
            cond_excess_ols: summarize_ci(&cond_ols),
            cond_excess_trunc: summarize_ci(&cond_trunc),
            mean_removed,
        }
    }
}

/// Sample mean with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    /// Fewer than two samples; `half_width` is then 0.
    pub degenerate: bool,
}

/// `(mean, 1.96 * sd / sqrt(m))` with the `m - 1` divisor for `sd`.
/// An empty sample has mean 0.
pub fn summarize_ci(samples: &[f64]) -> MeanCi {
    let m = samples.len();
    if m == 0 {
        return MeanCi { mean: 0.0, half_width: 0.0, degenerate: true };
    }
    let mean = samples.iter().sum::<f64>() / m as f64;
    if m < 2 {
        return MeanCi { mean, half_width: 0.0, degenerate: true };
    }
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (m - 1) as f64).sqrt();
    MeanCi {
        mean,
        half_width: 1.96 * sd / (m as f64).sqrt(),
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    /// Successful replications.
    pub replications: usize,
    pub failures: usize,
    pub n_differ: usize,
    pub n_better: usize,
    pub excess_ols: MeanCi,
    pub excess_trunc: MeanCi,
    /// Over the differing replications only.
    pub cond_excess_ols: MeanCi,
    pub cond_excess_trunc: MeanCi,
    pub mean_removed: f64,
}

fn replicate(config: &ScenarioConfig, index: u64) -> Result<Replication> {
    let mut rng = stream_rng(config.base_seed, index);
    let oracle = build_oracle::<f64, _>(
        config.design,
        config.n,
        config.d,
        config.noise,
        config.noise_sigma,
        &mut rng,
    )?;
    let data = oracle.generate(config.n, &mut rng)?;
    let all: Vec<usize> = (0..config.n).collect();
    let ols = least_squares_fit(&data, &all)?;
    let fit = select_alpha_and_fit(&data, config.lambda, &config.alpha_grid, &config.eta_ranks)?;
    let excess_ols = oracle.excess_risk(&ols)?;
    let excess_trunc = oracle.excess_risk(&fit.theta)?;
    if !(excess_ols.is_finite() && excess_trunc.is_finite()) {
        return Err(BenchError::Replication("non-finite excess risk".into()));
    }
    Ok(Replication {
        index,
        excess_ols,
        excess_trunc,
        differs: !fit.equals_erm,
        removed: config.n - fit.support.len(),
    })
}

/// Runs every replication in `config.replications`, in parallel.
pub fn run_replications(config: &ScenarioConfig) -> Result<ScenarioRun> {
    config.validate()?;
    let outcomes: Vec<(u64, Result<Replication>)> = config
        .replications
        .clone()
        .into_par_iter()
        .map(|r| (r, replicate(config, r)))
        .collect();
    let mut run = ScenarioRun::default();
    for (index, outcome) in outcomes {
        match outcome {
            Ok(rec) => run.records.push(rec),
            Err(e) => run.failures.push(ReplicationFailure { index, message: e.to_string() }),
        }
    }
    Ok(run)
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioSummary> {
    Ok(run_replications(config)?.summary())
}

/// One result row in [`CSV_HEADER`] order.
pub fn csv_record(config: &ScenarioConfig, s: &ScenarioSummary) -> Vec<String> {
    let f = |x: f64| x.to_string();
    vec![
        config.design.to_string(),
        config.n.to_string(),
        config.d.to_string(),
        config.noise.kind.to_string(),
        config.noise.describe(),
        s.replications.to_string(),
        s.n_differ.to_string(),
        s.n_better.to_string(),
        f(s.excess_ols.mean),
        f(s.excess_ols.half_width),
        f(s.excess_trunc.mean),
        f(s.excess_trunc.half_width),
        f(s.cond_excess_ols.mean),
        f(s.cond_excess_ols.half_width),
        f(s.cond_excess_trunc.mean),
        f(s.cond_excess_trunc.half_width),
        f(s.mean_removed),
    ]
}

/// Appends rows to `path`, writing the header first if the file is empty.
pub fn append_rows(path: &Path, rows: &[Vec<String>]) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        if fresh {
            w.write_record(CSV_HEADER)?;
        }
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    file.write_all(&buf)?;
    Ok(())
}
