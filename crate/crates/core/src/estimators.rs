//! Least-squares baselines, the soft-truncated mean and the iterative
//! min-max truncated estimator.
//!
//! Index sets are 0-based and kept sorted ascending.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_pinv, MomentSums};
use crate::scalar::{norm_sq, Real};
use crate::truncation::{
    criterion_from_losses, quadratic_form, residuals, scaled_losses, score_from_parts,
    TruncationParams,
};

/// Ranks (1-based, in decreasing score order) whose scores are tried as
/// removal thresholds at each step.
pub const DEFAULT_ETA_RANKS: [usize; 3] = [1, 5, 25];

/// Which of the two candidate fits of a step was accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Refinement {
    /// Fit on the points whose score is below the threshold.
    Reduced = 1,
    /// Fit on the points whose loss moved by at most one unit under the
    /// reduced fit.
    Readjusted = 2,
}

/// The threshold and refinement that produced an accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step<T> {
    pub eta: T,
    pub refinement: Refinement,
}

/// One accepted iterate of the min-max loop.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<T> {
    pub theta: Vec<T>,
    pub support: Vec<usize>,
    /// `None` for the initial least-squares iterate.
    pub step: Option<Step<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub theta: Vec<T>,
    /// Observations used by the final fit.
    pub support: Vec<usize>,
    pub trace: Vec<IterationRecord<T>>,
    /// `None` when no truncation scale was needed (exactly interpolating
    /// data in [`select_alpha_and_fit`]).
    pub alpha_used: Option<T>,
    pub lambda_used: T,
    /// True iff the loop stopped after its first iterate, i.e. the result
    /// is the (ridge) least-squares fit on the whole sample.
    pub equals_erm: bool,
}

impl<T: Real> FitResult<T> {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// Indices in `0..n` that the final fit does not use.
    pub fn removed(&self, n: usize) -> Vec<usize> {
        let mut keep = vec![false; n];
        for &i in &self.support {
            keep[i] = true;
        }
        (0..n).filter(|&i| !keep[i]).collect()
    }

    fn erm(theta: Vec<T>, n: usize, alpha: Option<T>, lambda: T) -> Self {
        let support: Vec<usize> = (0..n).collect();
        Self {
            trace: vec![IterationRecord {
                theta: theta.clone(),
                support: support.clone(),
                step: None,
            }],
            theta,
            support,
            alpha_used: alpha,
            lambda_used: lambda,
            equals_erm: true,
        }
    }
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda.is_finite() && lambda >= T::zero() {
        Ok(())
    } else {
        Err(Error::domain(format!("lambda must be non-negative and finite, got {lambda}")))
    }
}

fn validated_subset(subset: &[usize], n: usize) -> Result<Vec<usize>> {
    if subset.is_empty() {
        return Err(Error::domain("index subset is empty"));
    }
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&last) = s.last() {
        if last >= n {
            return Err(Error::domain(format!("index {last} out of range for {n} observations")));
        }
    }
    Ok(s)
}

/// Minimum-norm least-squares coefficients on the rows in `subset`.
pub fn least_squares_fit<T: Real>(data: &Dataset<T>, subset: &[usize]) -> Result<Vec<T>> {
    let subset = validated_subset(subset, data.n())?;
    Ok(MomentSums::over(data, &subset)
        .penalized_solution(T::zero())
        .as_slice()
        .to_vec())
}

/// Minimiser of `(1/n) sum (<theta, x_i> - y_i)^2 + lambda |theta|^2`.
pub fn ridge_fit<T: Real>(data: &Dataset<T>, lambda: T) -> Result<Vec<T>> {
    check_lambda(lambda)?;
    let all: Vec<usize> = (0..data.n()).collect();
    Ok(MomentSums::over(data, &all)
        .penalized_solution(lambda)
        .as_slice()
        .to_vec())
}

/// Mean estimate that averages soft-truncated outputs.
///
/// With `l = sqrt(2 log(1/epsilon) / n)` it returns
/// `(1/(n l)) sum log(1 + l y + l^2 y^2 / 2)`, which overshoots the true mean
/// by more than `l` with probability at most `epsilon` whenever the outputs
/// have unit second moment.
pub fn robust_mean<T: Real>(ys: &[T], epsilon: T) -> Result<T> {
    if ys.is_empty() {
        return Err(Error::domain("robust mean of an empty sample"));
    }
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if let Some(v) = ys.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("non-finite output {v}")));
    }
    let n = T::from_usize_lossy(ys.len());
    let scale = (T::lit(2.0) * (T::one() / epsilon).ln() / n).sqrt();
    let half = T::lit(0.5);
    let total = ys.iter().fold(T::zero(), |acc, &y| {
        let u = scale * y;
        acc + (u + half * u * u).ln_1p()
    });
    Ok(total / (n * scale))
}

struct Iterate<T> {
    theta: Vec<T>,
    support: Vec<usize>,
    sums: MomentSums<T>,
    losses: Vec<T>,
    norm_sq: T,
}

struct Candidate<T> {
    value: T,
    eta: T,
    refinement: Refinement,
    iterate: Iterate<T>,
}

impl<T: Real> Candidate<T> {
    // smaller criterion, then the readjusted fit, then the smaller threshold
    fn beats(&self, other: &Candidate<T>) -> bool {
        if self.value != other.value {
            return self.value < other.value;
        }
        if self.refinement != other.refinement {
            return self.refinement > other.refinement;
        }
        self.eta < other.eta
    }
}

fn fit_on<T: Real>(
    data: &Dataset<T>,
    parent: &Iterate<T>,
    keep: Vec<usize>,
    params: &TruncationParams<T>,
) -> Iterate<T> {
    let mut drop = Vec::with_capacity(parent.support.len() - keep.len());
    let mut k = 0;
    for &i in &parent.support {
        if keep.get(k) == Some(&i) {
            k += 1;
        } else {
            drop.push(i);
        }
    }
    let sums = parent.sums.restricted(data, &keep, &drop);
    let theta = sums.penalized_solution(params.lambda()).as_slice().to_vec();
    let losses = scaled_losses(&theta, data, params.alpha());
    Iterate {
        norm_sq: norm_sq(&theta),
        theta,
        support: keep,
        sums,
        losses,
    }
}

/// Largest criterion of `cand` against the accepted iterates, abandoning
/// the scan once it strictly exceeds `bound`.
fn worst_case<T: Real>(
    cand: &Iterate<T>,
    history: &[Iterate<T>],
    params: &TruncationParams<T>,
    bound: Option<T>,
) -> T {
    let mut worst = -T::max_value().unwrap_or_else(T::one);
    for past in history {
        let v = criterion_from_losses(&cand.losses, cand.norm_sq, &past.losses, past.norm_sq, params);
        worst = worst.max(v);
        if bound.is_some_and(|b| worst > b) {
            break;
        }
    }
    worst
}

/// Iterative approximation of the min-max truncated estimator.
///
/// Starting from the (ridge) least-squares fit on the whole sample, each
/// step ranks the current points by [`influence_score`](crate::influence_score),
/// drops the highest-ranked ones at each threshold in `eta_ranks`, refits,
/// readjusts the kept set to the points whose loss moved by at most one
/// unit, refits again, and accepts the candidate whose worst criterion
/// against every earlier iterate is smallest. The loop stops as soon as that
/// worst criterion is non-negative and returns the last accepted iterate.
pub fn minmax_truncated_fit<T: Real>(
    data: &Dataset<T>,
    params: &TruncationParams<T>,
    eta_ranks: &[usize],
) -> Result<FitResult<T>> {
    if eta_ranks.is_empty() {
        return Err(Error::domain("eta_ranks must not be empty"));
    }
    if eta_ranks.contains(&0) {
        return Err(Error::domain("eta ranks are 1-based"));
    }
    let n = data.n();
    let all: Vec<usize> = (0..n).collect();
    let sums = MomentSums::over(data, &all);
    let theta = sums.penalized_solution(params.lambda()).as_slice().to_vec();
    let mut history = vec![Iterate {
        losses: scaled_losses(&theta, data, params.alpha()),
        norm_sq: norm_sq(&theta),
        theta,
        support: all,
        sums,
    }];
    let mut steps: Vec<Option<Step<T>>> = vec![None];

    // |I_k| strictly decreases, so this runs at most n times.
    while history.len() < n {
        let current = history.last().expect("history starts non-empty");
        let m = current.support.len();
        let q_inv = symmetric_pinv(&current.sums.second_moment());
        let scores: Vec<T> = current
            .support
            .iter()
            .map(|&i| score_from_parts(current.losses[i], quadratic_form(&q_inv, data.row(i))))
            .collect();
        let mut sorted = scores.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let mut thresholds: Vec<T> = eta_ranks
            .iter()
            .map(|&r| sorted[r.min(m) - 1])
            .collect();
        thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        thresholds.dedup();

        let mut best: Option<Candidate<T>> = None;
        let mut consider = |iterate: Iterate<T>, eta: T, refinement: Refinement| {
            let bound = best.as_ref().map(|b| b.value);
            let value = worst_case(&iterate, &history, params, bound);
            let cand = Candidate { value, eta, refinement, iterate };
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(cand);
            }
        };
        for &eta in &thresholds {
            let reduced: Vec<usize> = current
                .support
                .iter()
                .zip(&scores)
                .filter(|(_, &s)| s < eta)
                .map(|(&i, _)| i)
                .collect();
            if reduced.is_empty() {
                continue;
            }
            let first = fit_on(data, current, reduced, params);
            let readjusted: Vec<usize> = current
                .support
                .iter()
                .copied()
                .filter(|&i| (first.losses[i] - current.losses[i]).abs() <= T::one())
                .collect();
            let second = (!readjusted.is_empty()).then(|| fit_on(data, current, readjusted, params));
            consider(first, eta, Refinement::Reduced);
            if let Some(second) = second {
                consider(second, eta, Refinement::Readjusted);
            }
        }

        let Some(best) = best else { break };
        if best.value >= T::zero() || best.iterate.support.len() >= m {
            break;
        }
        steps.push(Some(Step {
            eta: best.eta,
            refinement: best.refinement,
        }));
        history.push(best.iterate);
    }

    let trace: Vec<IterationRecord<T>> = history
        .iter()
        .zip(steps)
        .map(|(it, step)| IterationRecord {
            theta: it.theta.clone(),
            support: it.support.clone(),
            step,
        })
        .collect();
    let last = history.pop().expect("history starts non-empty");
    Ok(FitResult {
        equals_erm: trace.len() == 1,
        theta: last.theta,
        support: last.support,
        trace,
        alpha_used: Some(params.alpha()),
        lambda_used: params.lambda(),
    })
}

/// Geometric grid of truncation scales, `center * ratio^j` for
/// `j = -(count/2), ..., count - 1 - count/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGrid<T> {
    /// Fixed grid center; `None` centers at the inverse OLS residual variance.
    pub center: Option<T>,
    pub ratio: T,
    pub count: usize,
}

impl<T: Real> Default for AlphaGrid<T> {
    fn default() -> Self {
        Self {
            center: None,
            ratio: T::lit(3.0),
            count: 8,
        }
    }
}

impl<T: Real> AlphaGrid<T> {
    pub fn new(center: Option<T>, ratio: T, count: usize) -> Result<Self> {
        let grid = Self { center, ratio, count };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        if let Some(c) = self.center {
            if !(c.is_finite() && c > T::zero()) {
                return Err(Error::domain(format!("grid center must be positive, got {c}")));
            }
        }
        if !(self.ratio.is_finite() && self.ratio > T::one()) {
            return Err(Error::domain(format!("grid ratio must exceed 1, got {}", self.ratio)));
        }
        if self.count == 0 {
            return Err(Error::domain("grid needs at least one point"));
        }
        Ok(())
    }

    /// Exponents applied to the ratio, ascending.
    pub fn offsets(&self) -> std::ops::RangeInclusive<i32> {
        let lo = -((self.count / 2) as i32);
        lo..=lo + self.count as i32 - 1
    }

    /// Grid points around `center`, strictly increasing.
    pub fn points(&self, center: T) -> Vec<T> {
        self.offsets().map(|j| center * self.ratio.powi(j)).collect()
    }
}

/// Fits the min-max estimator over an increasing grid of truncation scales
/// and returns the first fit that departs from least squares.
///
/// The grid is centered at `1 / sigma2` where `sigma2` is the mean squared
/// OLS residual, unless the grid fixes its own center. When every grid point
/// reproduces the least-squares fit, or the data are interpolated exactly,
/// the full-sample (ridge) least-squares fit is returned with
/// `equals_erm = true`.
pub fn select_alpha_and_fit<T: Real>(
    data: &Dataset<T>,
    lambda: T,
    grid: &AlphaGrid<T>,
    eta_ranks: &[usize],
) -> Result<FitResult<T>> {
    check_lambda(lambda)?;
    grid.validate()?;
    let n = data.n();
    let center = match grid.center {
        Some(c) => c,
        None => {
            let all: Vec<usize> = (0..n).collect();
            let ols = least_squares_fit(data, &all)?;
            let nf = T::from_usize_lossy(n);
            let sigma2 = residuals(&ols, data)
                .iter()
                .fold(T::zero(), |acc, &r| acc + r * r)
                / nf;
            let scale = data.ys().iter().fold(T::zero(), |acc, &y| acc + y * y) / nf;
            if sigma2 <= T::eps() * scale {
                return Ok(FitResult::erm(ridge_fit(data, lambda)?, n, None, lambda));
            }
            T::one() / sigma2
        }
    };
    let mut last = None;
    for alpha in grid.points(center) {
        let params = TruncationParams::new(alpha, lambda)?;
        let fit = minmax_truncated_fit(data, &params, eta_ranks)?;
        if !fit.equals_erm {
            return Ok(fit);
        }
        last = Some(fit);
    }
    Ok(last.expect("grid has at least one point"))
}
