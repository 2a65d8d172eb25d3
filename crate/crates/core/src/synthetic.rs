//! Synthetic regression designs whose excess risk is known in closed form.
//!
//! Three designs are provided: independent standard normal covariates
//! (`Inc`), correlated normal covariates with a random mixing matrix
//! (`Hcc`) and a trigonometric feature map of a uniform input fitting a
//! quadratic target (`Ts`). In all three the target coefficients are the
//! `L2` projection of the regression function onto the features, so the
//! excess risk of any coefficient vector is a quadratic form in the exact
//! Gram matrix.
//!
//! Randomness comes from ChaCha8 streams. [`stream_rng`] keys a generator by
//! `(seed, stream)`; distinct stream numbers give independent sequences, so
//! replication `r` of an experiment can be regenerated on its own.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

/// Default heavy-tail exponent, just above the finite-variance threshold.
pub const DEFAULT_TAIL_EXPONENT: f64 = 2.01;

/// Default output noise scale.
pub const DEFAULT_NOISE_SIGMA: f64 = 10.0;

/// Generator for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    Gaussian,
    /// `sign(V) / |V|^(1/q)` with `V` standard normal.
    HeavyTailed,
    /// `|V|^(-1/q)` when `V > 0`, else `-q / (q - 1)`.
    AsymHeavyTailed,
    /// A point mass at `sqrt((1 - rho) / p)` with probability `p`, otherwise
    /// a Gaussian chosen so the mixture has mean 0 and variance 1.
    DiracGaussianMixture,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gauss",
            NoiseKind::HeavyTailed => "heavy",
            NoiseKind::AsymHeavyTailed => "asym",
            NoiseKind::DiracGaussianMixture => "mixture",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gauss" | "gaussian" => Ok(NoiseKind::Gaussian),
            "heavy" | "heavy_tailed" => Ok(NoiseKind::HeavyTailed),
            "asym" | "asym_heavy_tailed" => Ok(NoiseKind::AsymHeavyTailed),
            "mixture" | "dirac_gaussian_mixture" => Ok(NoiseKind::DiracGaussianMixture),
            other => Err(Error::domain(format!("unknown noise kind {other:?}"))),
        }
    }
}

/// Noise distribution and its parameters. Parameters that do not apply to
/// `kind` are carried but ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub q: f64,
    pub p: f64,
    pub rho: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::gaussian()
    }
}

impl NoiseSpec {
    pub fn gaussian() -> Self {
        Self {
            kind: NoiseKind::Gaussian,
            q: DEFAULT_TAIL_EXPONENT,
            p: 0.005,
            rho: 0.1,
        }
    }

    pub fn heavy_tailed(q: f64) -> Result<Self> {
        Self { kind: NoiseKind::HeavyTailed, q, ..Self::gaussian() }.validated()
    }

    pub fn asym_heavy_tailed(q: f64) -> Result<Self> {
        Self { kind: NoiseKind::AsymHeavyTailed, q, ..Self::gaussian() }.validated()
    }

    pub fn mixture(p: f64, rho: f64) -> Result<Self> {
        Self { kind: NoiseKind::DiracGaussianMixture, p, rho, ..Self::gaussian() }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            NoiseKind::Gaussian => Ok(()),
            NoiseKind::HeavyTailed | NoiseKind::AsymHeavyTailed => {
                if self.q.is_finite() && self.q > 2.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("tail exponent q must exceed 2, got {}", self.q)))
                }
            }
            NoiseKind::DiracGaussianMixture => {
                if !(self.p > 0.0 && self.p < 1.0) {
                    return Err(Error::domain(format!("mixture p must lie in (0, 1), got {}", self.p)));
                }
                if !(self.rho >= self.p && self.rho <= 1.0) {
                    return Err(Error::domain(format!(
                        "mixture rho must lie in [p, 1], got {}",
                        self.rho
                    )));
                }
                if self.mixture_gaussian_variance() < 0.0 {
                    return Err(Error::domain("mixture Gaussian part has negative variance"));
                }
                Ok(())
            }
        }
    }

    /// Location of the point mass of the mixture.
    pub fn mixture_atom(&self) -> f64 {
        ((1.0 - self.rho) / self.p).sqrt()
    }

    pub fn mixture_gaussian_mean(&self) -> f64 {
        -(self.p * (1.0 - self.rho)).sqrt() / (1.0 - self.p)
    }

    pub fn mixture_gaussian_variance(&self) -> f64 {
        let p = self.p;
        self.rho / (1.0 - p) - p * (1.0 - self.rho) / ((1.0 - p) * (1.0 - p))
    }

    /// One draw; assumes the spec is valid.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            NoiseKind::Gaussian => rng.sample(StandardNormal),
            NoiseKind::HeavyTailed => {
                let v = nonzero_normal(rng);
                v.signum() / v.abs().powf(1.0 / self.q)
            }
            NoiseKind::AsymHeavyTailed => {
                let v: f64 = rng.sample(StandardNormal);
                if v > 0.0 {
                    v.powf(-1.0 / self.q)
                } else {
                    -self.q / (self.q - 1.0)
                }
            }
            NoiseKind::DiracGaussianMixture => {
                if rng.random::<f64>() < self.p {
                    self.mixture_atom()
                } else {
                    let sd = self.mixture_gaussian_variance().max(0.0).sqrt();
                    let z: f64 = rng.sample(StandardNormal);
                    self.mixture_gaussian_mean() + sd * z
                }
            }
        }
    }

    /// Short `key=value` description of the parameters that apply.
    pub fn describe(&self) -> String {
        match self.kind {
            NoiseKind::Gaussian => String::new(),
            NoiseKind::HeavyTailed | NoiseKind::AsymHeavyTailed => format!("q={}", self.q),
            NoiseKind::DiracGaussianMixture => format!("p={};rho={}", self.p, self.rho),
        }
    }
}

fn nonzero_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let v: f64 = rng.sample(StandardNormal);
        if v != 0.0 {
            return v;
        }
    }
}

/// One draw of the noise variable `W`.
pub fn sample_noise<R: Rng + ?Sized>(spec: &NoiseSpec, rng: &mut R) -> Result<f64> {
    spec.validate()?;
    Ok(spec.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignKind {
    /// Independent standard normal covariates.
    Inc,
    /// Normal covariates with Gram matrix `A A^T`, `A` uniform on `[0,1]`.
    Hcc,
    /// Cosines then sines of `2 pi k U`, `U` uniform on `[0,1]`.
    Ts,
}

impl DesignKind {
    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Inc => "inc",
            DesignKind::Hcc => "hcc",
            DesignKind::Ts => "ts",
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inc" => Ok(DesignKind::Inc),
            "hcc" => Ok(DesignKind::Hcc),
            "ts" => Ok(DesignKind::Ts),
            other => Err(Error::domain(format!("unknown design {other:?}"))),
        }
    }
}

/// A fully specified synthetic scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOracle<T> {
    pub kind: DesignKind,
    pub n: usize,
    pub d: usize,
    pub theta_star: DVector<T>,
    /// Exact Gram matrix of the feature vector.
    pub gram: DMatrix<T>,
    pub noise_sigma: T,
    pub noise: NoiseSpec,
    /// `A` with `gram = A A^T`; only for `Hcc`.
    pub mixing_matrix: Option<DMatrix<T>>,
}

/// Coefficients of `20 x^2 - 10 x - 5/3` on the cosine/sine features.
pub fn trigonometric_theta_star(d: usize) -> Result<Vec<f64>> {
    if d == 0 || !d.is_multiple_of(2) {
        return Err(Error::domain(format!("trigonometric design needs even d, got {d}")));
    }
    let half = d / 2;
    let cos = (1..=half).map(|k| 20.0 / (PI * PI * (k * k) as f64));
    let sin = (1..=half).map(|k| -10.0 / (PI * k as f64));
    Ok(cos.chain(sin).collect())
}

/// Builds a scenario. `Hcc` draws its mixing matrix from `rng`; the other
/// designs do not consume randomness.
pub fn build_oracle<T: Real, R: Rng + ?Sized>(
    kind: DesignKind,
    n: usize,
    d: usize,
    noise: NoiseSpec,
    noise_sigma: T,
    rng: &mut R,
) -> Result<DesignOracle<T>> {
    noise.validate()?;
    if n == 0 || d == 0 {
        return Err(Error::domain("n and d must be positive"));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= T::zero()) {
        return Err(Error::domain(format!("noise sigma must be non-negative, got {noise_sigma}")));
    }
    let tens = DVector::from_element(d, T::lit(10.0));
    let (theta_star, gram, mixing_matrix) = match kind {
        DesignKind::Inc => (tens, DMatrix::identity(d, d), None),
        DesignKind::Hcc => {
            let a = DMatrix::from_fn(d, d, |_, _| T::lit(rng.random::<f64>()));
            let gram = &a * a.transpose();
            (tens, gram, Some(a))
        }
        DesignKind::Ts => {
            let theta = trigonometric_theta_star(d)?;
            (
                DVector::from_iterator(d, theta.into_iter().map(T::lit)),
                DMatrix::from_diagonal_element(d, d, T::lit(0.5)),
                None,
            )
        }
    };
    Ok(DesignOracle {
        kind,
        n,
        d,
        theta_star,
        gram,
        noise_sigma,
        noise,
        mixing_matrix,
    })
}

impl<T: Real> DesignOracle<T> {
    /// Fills `features` with one draw of the feature vector and returns the
    /// noiseless output `E[Y | X]`.
    fn draw_point<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], features: &mut [T]) -> f64 {
        match self.kind {
            DesignKind::Inc => {
                for f in features.iter_mut() {
                    *f = T::lit(rng.sample(StandardNormal));
                }
                features.iter().fold(0.0, |acc, f| acc + f.as_f64() * 10.0)
            }
            DesignKind::Hcc => {
                let a = self.mixing_matrix.as_ref().expect("HCC oracle carries its mixing matrix");
                for v in z.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let mut mean = 0.0;
                for (r, f) in features.iter_mut().enumerate() {
                    let x: f64 = z.iter().enumerate().map(|(c, v)| a[(r, c)].as_f64() * v).sum();
                    *f = T::lit(x);
                    mean += 10.0 * x;
                }
                mean
            }
            DesignKind::Ts => {
                let u: f64 = rng.random();
                let half = self.d / 2;
                for k in 1..=half {
                    let w = 2.0 * PI * k as f64 * u;
                    features[k - 1] = T::lit(w.cos());
                    features[half + k - 1] = T::lit(w.sin());
                }
                20.0 * u * u - 10.0 * u - 5.0 / 3.0
            }
        }
    }

    /// Draws `n` observations.
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset<T>> {
        let d = self.d;
        let sigma = self.noise_sigma.as_f64();
        let mut x = vec![T::zero(); n * d];
        let mut y = Vec::with_capacity(n);
        let mut z = vec![0.0; d];
        for row in x.chunks_exact_mut(d) {
            let mean = self.draw_point(rng, &mut z, row);
            let w = self.noise.sample(rng);
            y.push(T::lit(mean + sigma * w));
        }
        Dataset::from_rows(x, y, d)
    }

    /// `(theta - theta*)^T Q (theta - theta*)`.
    pub fn excess_risk(&self, theta: &[T]) -> Result<T> {
        check_len("theta", self.d, theta.len())?;
        let diff = DVector::from_column_slice(theta) - &self.theta_star;
        Ok((diff.transpose() * &self.gram * &diff)[(0, 0)])
    }
}

/// Draws the training sample of `oracle.n` observations.
pub fn generate_dataset<T: Real, R: Rng + ?Sized>(
    oracle: &DesignOracle<T>,
    rng: &mut R,
) -> Result<Dataset<T>> {
    oracle.generate(oracle.n, rng)
}

/// Exact excess quadratic risk of `theta` over the best linear predictor.
pub fn excess_risk<T: Real>(oracle: &DesignOracle<T>, theta: &[T]) -> Result<T> {
    oracle.excess_risk(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::least_squares_fit;
    use crate::moments::gram_matrix;
    use approx::assert_relative_eq;

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn gaussian_noise_moments() {
        let spec = NoiseSpec::gaussian();
        let mut rng = stream_rng(1, 0);
        let v: Vec<f64> = (0..1_000_000).map(|_| spec.sample(&mut rng)).collect();
        let (m, var) = mean_var(&v);
        assert!(m.abs() < 4.0 / 1000.0);
        assert!((var - 1.0).abs() < 0.01);
    }

    #[test]
    fn mixture_noise_moments() {
        let spec = NoiseSpec::mixture(0.005, 0.1).unwrap();
        let mut rng = stream_rng(2, 0);
        let v: Vec<f64> = (0..1_000_000).map(|_| spec.sample(&mut rng)).collect();
        let (m, var) = mean_var(&v);
        assert!(m.abs() < 4.0 * (1.0f64 / 1e6).sqrt());
        // standard error of the sample variance from the exact fourth moment
        let (mu, s2) = (spec.mixture_gaussian_mean(), spec.mixture_gaussian_variance());
        let m4 = spec.p * spec.mixture_atom().powi(4)
            + (1.0 - spec.p) * (mu.powi(4) + 6.0 * mu * mu * s2 + 3.0 * s2 * s2);
        let se = ((m4 - 1.0) / 1e6).sqrt();
        assert!((var - 1.0).abs() < 4.0 * se, "variance {var}, se {se}");
    }

    #[test]
    fn mixture_moments_are_exact() {
        for (p, rho) in [(0.005, 0.1), (0.005, 0.4), (0.2, 0.5), (0.3, 0.3)] {
            let s = NoiseSpec::mixture(p, rho).unwrap();
            let mean = p * s.mixture_atom() + (1.0 - p) * s.mixture_gaussian_mean();
            assert!(mean.abs() < 1e-15);
            let second = p * s.mixture_atom().powi(2)
                + (1.0 - p) * (s.mixture_gaussian_variance() + s.mixture_gaussian_mean().powi(2));
            assert_relative_eq!(second, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn heavy_noise_is_symmetric() {
        let spec = NoiseSpec::heavy_tailed(2.01).unwrap();
        let mut rng = stream_rng(3, 0);
        let mut v: Vec<f64> = (0..100_000).map(|_| spec.sample(&mut rng)).collect();
        let positive = v.iter().filter(|x| **x > 0.0).count() as f64 / v.len() as f64;
        assert!((0.49..=0.51).contains(&positive));
        // W has no mass near zero (|W| < 0.05 needs |V| > 400), so compare
        // mirrored quantiles instead of the median
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = |f: f64| v[(f * (v.len() - 1) as f64) as usize];
        for f in [0.1, 0.25, 0.4] {
            assert!((q(f) + q(1.0 - f)).abs() < 0.05, "quantile {f}");
        }
        assert!(v.iter().all(|w| w.abs() > 0.05));
    }

    #[test]
    fn asym_noise_negative_branch_is_constant() {
        let spec = NoiseSpec::asym_heavy_tailed(2.01).unwrap();
        let mut rng = stream_rng(4, 0);
        for _ in 0..1000 {
            let w = spec.sample(&mut rng);
            assert!(w > 0.0 || w == -2.01 / (2.01 - 1.0));
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(NoiseSpec::heavy_tailed(2.0).is_err());
        assert!(NoiseSpec::asym_heavy_tailed(1.5).is_err());
        assert!(NoiseSpec::mixture(0.0, 0.5).is_err());
        assert!(NoiseSpec::mixture(0.5, 0.1).is_err());
        assert!(NoiseSpec::mixture(0.1, 1.5).is_err());
        let bad = NoiseSpec { q: 1.0, ..NoiseSpec::heavy_tailed(3.0).unwrap() };
        assert!(sample_noise(&bad, &mut stream_rng(0, 0)).is_err());
    }

    #[test]
    fn same_seed_same_stream() {
        for spec in [
            NoiseSpec::gaussian(),
            NoiseSpec::heavy_tailed(2.01).unwrap(),
            NoiseSpec::asym_heavy_tailed(2.01).unwrap(),
            NoiseSpec::mixture(0.005, 0.1).unwrap(),
        ] {
            let mut a = stream_rng(42, 7);
            let mut b = stream_rng(42, 7);
            for _ in 0..1000 {
                assert_eq!(spec.sample(&mut a).to_bits(), spec.sample(&mut b).to_bits());
            }
        }
        let mut a = stream_rng(42, 7);
        let mut b = stream_rng(42, 8);
        let va: Vec<f64> = (0..4).map(|_| a.random()).collect();
        let vb: Vec<f64> = (0..4).map(|_| b.random()).collect();
        assert_ne!(va, vb);
    }

    #[test]
    fn oracle_targets() {
        let mut rng = stream_rng(0, 0);
        let inc: DesignOracle<f64> =
            build_oracle(DesignKind::Inc, 10, 3, NoiseSpec::gaussian(), 10.0, &mut rng).unwrap();
        assert_eq!(inc.theta_star.as_slice(), &[10.0, 10.0, 10.0]);
        assert_eq!(inc.gram, DMatrix::identity(3, 3));

        let ts: DesignOracle<f64> =
            build_oracle(DesignKind::Ts, 10, 4, NoiseSpec::gaussian(), 10.0, &mut rng).unwrap();
        let want = [2.026_423_672_846_756, 0.506_605_918_211_689, -3.183_098_861_837_907, -1.591_549_430_918_953_4];
        for (a, b) in ts.theta_star.iter().zip(want) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
        assert!(build_oracle::<f64, _>(DesignKind::Ts, 10, 3, NoiseSpec::gaussian(), 10.0, &mut rng).is_err());

        let hcc: DesignOracle<f64> =
            build_oracle(DesignKind::Hcc, 10, 3, NoiseSpec::gaussian(), 10.0, &mut rng).unwrap();
        let a = hcc.mixing_matrix.as_ref().unwrap();
        assert!(a.iter().all(|v| (0.0..1.0).contains(v)));
        assert_relative_eq!(hcc.gram, a * a.transpose(), epsilon = 1e-15);
    }

    #[test]
    fn excess_risk_closed_forms() {
        let mut rng = stream_rng(0, 0);
        let inc: DesignOracle<f64> =
            build_oracle(DesignKind::Inc, 10, 3, NoiseSpec::gaussian(), 10.0, &mut rng).unwrap();
        assert_eq!(inc.excess_risk(&[10.0, 10.0, 10.0]).unwrap(), 0.0);
        assert_relative_eq!(inc.excess_risk(&[11.0, 10.0, 10.0]).unwrap(), 1.0);
        let ts: DesignOracle<f64> =
            build_oracle(DesignKind::Ts, 10, 2, NoiseSpec::gaussian(), 10.0, &mut rng).unwrap();
        let mut t = ts.theta_star.as_slice().to_vec();
        t[0] += 1.0;
        assert_relative_eq!(ts.excess_risk(&t).unwrap(), 0.5, epsilon = 1e-14);
        assert!(matches!(inc.excess_risk(&[1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn excess_risk_is_quadratic() {
        let mut rng = stream_rng(5, 0);
        let hcc: DesignOracle<f64> =
            build_oracle(DesignKind::Hcc, 10, 4, NoiseSpec::gaussian(), 10.0, &mut rng).unwrap();
        let v = [0.3, -1.0, 2.0, 0.5];
        let at = |t: f64| {
            let th: Vec<f64> = hcc.theta_star.iter().zip(v).map(|(a, b)| a + t * b).collect();
            hcc.excess_risk(&th).unwrap()
        };
        let base = at(1.0);
        assert!(base > 0.0);
        for t in [-3.0, 0.5, 2.0, 7.5] {
            assert_relative_eq!(at(t), t * t * base, max_relative = 1e-10);
        }
    }

    #[test]
    fn noiseless_inc_is_recovered() {
        let mut rng = stream_rng(6, 0);
        let oracle: DesignOracle<f64> =
            build_oracle(DesignKind::Inc, 50, 4, NoiseSpec::gaussian(), 0.0, &mut rng).unwrap();
        let data = generate_dataset(&oracle, &mut rng).unwrap();
        for i in 0..data.n() {
            let mean: f64 = data.row(i).iter().map(|v| 10.0 * v).sum();
            assert_eq!(data.ys()[i], mean);
        }
        let all: Vec<usize> = (0..50).collect();
        let t = least_squares_fit(&data, &all).unwrap();
        for v in t {
            assert_relative_eq!(v, 10.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn noiseless_ts_has_approximation_error_that_shrinks() {
        let mut rng = stream_rng(7, 0);
        let oracle: DesignOracle<f64> =
            build_oracle(DesignKind::Ts, 10, 4, NoiseSpec::gaussian(), 0.0, &mut rng).unwrap();
        let mut errs = Vec::new();
        for n in [40, 400, 40_000] {
            let data = oracle.generate(n, &mut rng).unwrap();
            let all: Vec<usize> = (0..n).collect();
            let t = least_squares_fit(&data, &all).unwrap();
            errs.push(oracle.excess_risk(&t).unwrap());
        }
        assert!(errs[0] > 0.0);
        assert!(errs[2] < errs[0] && errs[2] < 1e-2);
    }

    #[test]
    fn ts_gram_is_half_identity() {
        let mut rng = stream_rng(8, 0);
        let oracle: DesignOracle<f64> =
            build_oracle(DesignKind::Ts, 10, 6, NoiseSpec::gaussian(), 10.0, &mut rng).unwrap();
        let data = oracle.generate(100_000, &mut rng).unwrap();
        let g = gram_matrix(&data);
        let err = (&g.q - &oracle.gram).amax();
        assert!(err < 0.01, "max deviation {err}");
    }

    #[test]
    fn inc_gram_is_identity() {
        let mut rng = stream_rng(9, 0);
        let oracle: DesignOracle<f64> =
            build_oracle(DesignKind::Inc, 10, 3, NoiseSpec::gaussian(), 10.0, &mut rng).unwrap();
        let data = oracle.generate(100_000, &mut rng).unwrap();
        assert!((&gram_matrix(&data).q - DMatrix::identity(3, 3)).amax() < 0.05);
    }

    #[test]
    fn fixed_seed_reproduces_dataset() {
        let make = || {
            let mut rng = stream_rng(11, 3);
            let o: DesignOracle<f64> = build_oracle(
                DesignKind::Hcc,
                30,
                3,
                NoiseSpec::mixture(0.005, 0.1).unwrap(),
                10.0,
                &mut rng,
            )
            .unwrap();
            generate_dataset(&o, &mut rng).unwrap()
        };
        let (a, b) = (make(), make());
        assert_eq!(a.xs().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   b.xs().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(a, b);
    }

    #[test]
    fn names_parse_back() {
        for k in [DesignKind::Inc, DesignKind::Hcc, DesignKind::Ts] {
            assert_eq!(k.name().parse::<DesignKind>().unwrap(), k);
        }
        for k in [
            NoiseKind::Gaussian,
            NoiseKind::HeavyTailed,
            NoiseKind::AsymHeavyTailed,
            NoiseKind::DiracGaussianMixture,
        ] {
            assert_eq!(k.name().parse::<NoiseKind>().unwrap(), k);
        }
        assert!("foo".parse::<DesignKind>().is_err());
    }
}
