//! Soft truncation of loss differences and the quantities built on it.
//!
//! The truncated criterion compares two coefficient vectors by summing the
//! soft-truncated differences of their scaled squared losses. A single
//! observation can move the criterion by at most `log 2`, which is what makes
//! the min-max estimator insensitive to a handful of extreme outputs.

use crate::dataset::Dataset;
use crate::error::{check_len, Error, Result};
use crate::scalar::{dot, norm_sq, Real};

/// Loss scale `alpha` and ridge weight `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationParams<T> {
    alpha: T,
    lambda: T,
}

impl<T: Real> TruncationParams<T> {
    pub fn new(alpha: T, lambda: T) -> Result<Self> {
        if !(alpha.is_finite() && alpha > T::zero()) {
            return Err(Error::domain(format!("alpha must be positive and finite, got {alpha}")));
        }
        if !(lambda.is_finite() && lambda >= T::zero()) {
            return Err(Error::domain(format!(
                "lambda must be non-negative and finite, got {lambda}"
            )));
        }
        Ok(Self { alpha, lambda })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }
}

/// The soft truncation function.
///
/// `-log(1 - x + x^2/2)` on `[0, 1]`, constant `log 2` beyond, extended to
/// negative arguments by oddness.
pub fn psi<T: Real>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::domain(format!("psi is undefined at {x}")));
    }
    Ok(psi_unchecked(x))
}

#[inline]
pub(crate) fn psi_unchecked<T: Real>(x: T) -> T {
    let a = x.abs();
    let v = if a >= T::one() {
        T::ln_2()
    } else {
        -(T::one() - a + a * a * T::lit(0.5)).ln()
    };
    if x < T::zero() {
        -v
    } else {
        v
    }
}

/// `y_i - <theta, x_i>` for every observation.
pub(crate) fn residuals<T: Real>(theta: &[T], data: &Dataset<T>) -> Vec<T> {
    (0..data.n())
        .map(|i| data.ys()[i] - dot(theta, data.row(i)))
        .collect()
}

/// Scaled losses `alpha * (y_i - <theta, x_i>)^2`.
pub(crate) fn scaled_losses<T: Real>(theta: &[T], data: &Dataset<T>, alpha: T) -> Vec<T> {
    residuals(theta, data)
        .into_iter()
        .map(|r| alpha * r * r)
        .collect()
}

/// Criterion evaluated from precomputed scaled losses and squared norms.
pub(crate) fn criterion_from_losses<T: Real>(
    losses: &[T],
    norm_sq_theta: T,
    losses_prime: &[T],
    norm_sq_prime: T,
    params: &TruncationParams<T>,
) -> T {
    let n = T::from_usize_lossy(losses.len());
    let penalty = n * params.alpha * params.lambda * (norm_sq_theta - norm_sq_prime);
    losses
        .iter()
        .zip(losses_prime)
        .fold(penalty, |acc, (&a, &b)| acc + psi_unchecked(a - b))
}

/// Penalised truncated criterion comparing `theta` against `theta_prime`.
///
/// Negative values mean `theta` fits the sample better than `theta_prime`
/// once each observation's contribution is truncated.
pub fn criterion<T: Real>(
    theta: &[T],
    theta_prime: &[T],
    data: &Dataset<T>,
    params: &TruncationParams<T>,
) -> Result<T> {
    check_len("theta", data.d(), theta.len())?;
    check_len("theta_prime", data.d(), theta_prime.len())?;
    let la = scaled_losses(theta, data, params.alpha);
    let lb = scaled_losses(theta_prime, data, params.alpha);
    Ok(criterion_from_losses(
        &la,
        norm_sq(theta),
        &lb,
        norm_sq(theta_prime),
        params,
    ))
}

fn check_subset(subset: &[usize], n: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::domain("index subset is empty"));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= n) {
        return Err(Error::domain(format!("index {bad} out of range for {n} observations")));
    }
    Ok(())
}

/// Ridge-penalised mean squared error of `theta` over the rows in `subset`.
pub fn penalized_risk_subset<T: Real>(
    theta: &[T],
    subset: &[usize],
    data: &Dataset<T>,
    params: &TruncationParams<T>,
) -> Result<T> {
    check_len("theta", data.d(), theta.len())?;
    check_subset(subset, data.n())?;
    let sse = subset.iter().fold(T::zero(), |acc, &i| {
        let r = dot(theta, data.row(i)) - data.ys()[i];
        acc + r * r
    });
    Ok(params.lambda * norm_sq(theta) + sse / T::from_usize_lossy(subset.len()))
}

/// Influence score from a point's scaled loss and its leverage
/// `x^T Q^-1 x`.
///
/// Written as `(sqrt(L) + sqrt(L + 1))^2 * h`, which equals
/// `L (1 + sqrt(1 + 1/L))^2 * h` for `L > 0` and has the finite limit `h`
/// at `L = 0`.
#[inline]
pub(crate) fn score_from_parts<T: Real>(loss: T, leverage: T) -> T {
    let s = loss.sqrt() + (loss + T::one()).sqrt();
    s * s * leverage
}

/// `x^T A x` for a symmetric `A` stored as an nalgebra matrix.
#[inline]
pub(crate) fn quadratic_form<T: Real>(a: &nalgebra::DMatrix<T>, x: &[T]) -> T {
    let d = x.len();
    let mut acc = T::zero();
    for c in 0..d {
        let mut col = T::zero();
        for r in 0..d {
            col += a[(r, c)] * x[r];
        }
        acc += col * x[c];
    }
    acc
}

/// Score ranking observation `i` for removal at the current iterate.
///
/// It is the squared inverse distance (in the `Q`-norm) from `theta_hat` to
/// the nearest hyperplane where the truncated contribution of point `i`
/// changes regime; large values flag low signal-to-noise points.
pub fn influence_score<T: Real>(
    i: usize,
    theta_hat: &[T],
    q_hat_inv: &nalgebra::DMatrix<T>,
    data: &Dataset<T>,
    params: &TruncationParams<T>,
) -> Result<T> {
    if i >= data.n() {
        return Err(Error::domain(format!(
            "index {i} out of range for {} observations",
            data.n()
        )));
    }
    check_len("theta_hat", data.d(), theta_hat.len())?;
    check_len("q_hat_inv rows", data.d(), q_hat_inv.nrows())?;
    check_len("q_hat_inv cols", data.d(), q_hat_inv.ncols())?;
    let x = data.row(i);
    let r = data.ys()[i] - dot(theta_hat, x);
    let loss = params.alpha * r * r;
    Ok(score_from_parts(loss, quadratic_form(q_hat_inv, x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn params(alpha: f64, lambda: f64) -> TruncationParams<f64> {
        TruncationParams::new(alpha, lambda).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(TruncationParams::new(0.0, 0.0).is_err());
        assert!(TruncationParams::new(-1.0, 0.0).is_err());
        assert!(TruncationParams::new(f64::INFINITY, 0.0).is_err());
        assert!(TruncationParams::new(1.0, -1e-3).is_err());
        assert!(TruncationParams::new(1.0, f64::NAN).is_err());
        assert!(TruncationParams::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn psi_reference_values() {
        assert_eq!(psi(0.0).unwrap(), 0.0);
        assert_relative_eq!(psi(1.0).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
        // -ln(1 - 0.5 + 0.125) = -ln(0.625)
        assert_relative_eq!(psi(0.5).unwrap(), 0.470_003_629_245_735_5, epsilon = 1e-15);
        assert_relative_eq!(psi(-2.0).unwrap(), -std::f64::consts::LN_2, epsilon = 1e-15);
        assert!(psi(f64::NAN).is_err());
        assert!(psi(f64::INFINITY).is_err());
    }

    #[test]
    fn psi_continuous_at_one() {
        let below = psi(1.0 - 1e-12).unwrap();
        assert_relative_eq!(below, std::f64::consts::LN_2, epsilon = 1e-11);
        // closed form evaluated exactly at the knot
        assert_relative_eq!(-(0.5f64).ln(), std::f64::consts::LN_2, epsilon = 1e-16);
    }

    #[test]
    fn psi_below_soft_upper_envelope() {
        for k in 0..=2000 {
            let x = -1.0 + k as f64 * 1e-3;
            let upper = (1.0 + x + x * x / 2.0).ln();
            assert!(psi(x).unwrap() <= upper + 1e-15, "x = {x}");
        }
    }

    #[test]
    fn psi_works_in_f32() {
        assert!((psi(0.5f32).unwrap() - 0.470_003_6).abs() < 1e-6);
    }

    #[test]
    fn criterion_hand_example() {
        let data = Dataset::from_vecs(&[vec![1.0]], vec![0.0]).unwrap();
        let v = criterion(&[0.0], &[1.0], &data, &params(1.0, 0.0)).unwrap();
        assert_relative_eq!(v, -std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn criterion_penalty_term() {
        // losses equal, so only n * alpha * lambda * (|t|^2 - |t'|^2) remains
        let data = Dataset::from_vecs(&[vec![1.0], vec![-1.0]], vec![0.0, 0.0]).unwrap();
        let v = criterion(&[1.0], &[-1.0], &data, &params(2.0, 3.0)).unwrap();
        assert_eq!(v, 0.0);
        let data = Dataset::from_vecs(&[vec![0.0], vec![0.0]], vec![0.0, 0.0]).unwrap();
        let v = criterion(&[2.0], &[1.0], &data, &params(0.5, 3.0)).unwrap();
        assert_relative_eq!(v, 2.0 * 0.5 * 3.0 * 3.0, epsilon = 1e-14);
    }

    #[test]
    fn criterion_shape_errors() {
        let data = Dataset::from_vecs(&[vec![1.0, 2.0]], vec![0.0]).unwrap();
        assert!(matches!(
            criterion(&[1.0], &[1.0, 2.0], &data, &params(1.0, 0.0)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn penalized_risk_examples() {
        let data = Dataset::from_vecs(&[vec![1.0], vec![1.0]], vec![1.0, 3.0]).unwrap();
        let v = penalized_risk_subset(&[2.0], &[0, 1], &data, &params(1.0, 0.0)).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-15);
        let one = Dataset::from_vecs(&[vec![1.0]], vec![1.0]).unwrap();
        let v = penalized_risk_subset(&[0.5], &[0], &one, &params(1.0, 1.0)).unwrap();
        assert_relative_eq!(v, 0.5, epsilon = 1e-15);
        // exact interpolation on the subset
        let v = penalized_risk_subset(&[1.0], &[0], &data, &params(7.0, 0.0)).unwrap();
        assert_eq!(v, 0.0);
        assert!(penalized_risk_subset(&[1.0], &[], &data, &params(1.0, 0.0)).is_err());
        assert!(penalized_risk_subset(&[1.0], &[2], &data, &params(1.0, 0.0)).is_err());
    }

    #[test]
    fn penalized_risk_is_alpha_free() {
        let data = Dataset::from_vecs(&[vec![1.0], vec![2.0]], vec![1.0, 3.0]).unwrap();
        let a = penalized_risk_subset(&[0.3], &[0, 1], &data, &params(0.01, 0.2)).unwrap();
        let b = penalized_risk_subset(&[0.3], &[0, 1], &data, &params(100.0, 0.2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn influence_score_examples() {
        let q_inv = DMatrix::from_element(1, 1, 1.0);
        // residual 1, alpha 1 => L = 1, leverage 1 => (1 + sqrt 2)^2
        let data = Dataset::from_vecs(&[vec![1.0], vec![1.0]], vec![1.0, 0.0]).unwrap();
        let s = influence_score(0, &[0.0], &q_inv, &data, &params(1.0, 0.0)).unwrap();
        assert_relative_eq!(s, (1.0 + 2f64.sqrt()).powi(2), epsilon = 1e-13);
        assert_relative_eq!(s, 5.828_427_124_746_19, epsilon = 1e-12);
        // zero loss => leverage, here x^T Q^-1 x = 2
        let q_inv = DMatrix::from_element(1, 1, 2.0);
        let s = influence_score(1, &[0.0], &q_inv, &data, &params(1.0, 0.0)).unwrap();
        assert_relative_eq!(s, 2.0, epsilon = 1e-15);
        assert!(influence_score(2, &[0.0], &q_inv, &data, &params(1.0, 0.0)).is_err());
    }

    #[test]
    fn influence_score_alpha_scaling() {
        let q_inv = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let data = Dataset::from_vecs(&[vec![0.7, -1.2]], vec![0.9]).unwrap();
        let theta = [0.1, 0.4];
        let r: f64 = 0.9 - (0.07 - 0.48);
        let h = 2.0 * 0.49 + 2.0 * 0.5 * 0.7 * -1.2 + 1.44;
        for alpha in [0.3, 0.6] {
            let s = influence_score(0, &theta, &q_inv, &data, &params(alpha, 0.0)).unwrap();
            let l = alpha * r * r;
            let direct = l * h * (1.0 + (1.0 + 1.0 / l).sqrt()).powi(2);
            assert_relative_eq!(s, direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn score_limit_is_continuous() {
        let tiny = score_from_parts(1e-300, 3.0);
        assert_relative_eq!(tiny, 3.0, max_relative = 1e-12);
    }

    fn small_dataset() -> impl Strategy<Value = (Dataset<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..4, 2usize..12).prop_flat_map(|(d, n)| {
            (
                prop::collection::vec(-5.0..5.0f64, n * d),
                prop::collection::vec(-20.0..20.0f64, n),
                prop::collection::vec(-5.0..5.0f64, d),
                prop::collection::vec(-5.0..5.0f64, d),
            )
                .prop_map(move |(x, y, a, b)| (Dataset::from_rows(x, y, d).unwrap(), a, b))
        })
    }

    proptest! {
        #[test]
        fn psi_is_odd(x in -10.0..10.0f64) {
            prop_assert_eq!(psi(-x).unwrap(), -psi(x).unwrap());
        }

        #[test]
        fn psi_monotone_and_bounded(x in -10.0..10.0f64, dx in 0.0..5.0f64) {
            let (a, b) = (psi(x).unwrap(), psi(x + dx).unwrap());
            prop_assert!(a <= b);
            prop_assert!(a.abs() <= std::f64::consts::LN_2);
        }

        #[test]
        fn criterion_self_is_zero(
            (data, a, _b) in small_dataset(),
            alpha in 1e-3..10.0f64,
            lambda in 0.0..5.0f64,
        ) {
            prop_assert_eq!(criterion(&a, &a, &data, &params(alpha, lambda)).unwrap(), 0.0);
        }

        #[test]
        fn criterion_antisymmetric_without_ridge(
            (data, a, b) in small_dataset(),
            alpha in 1e-3..10.0f64,
        ) {
            let p = params(alpha, 0.0);
            let ab = criterion(&a, &b, &data, &p).unwrap();
            let ba = criterion(&b, &a, &data, &p).unwrap();
            prop_assert!((ab + ba).abs() <= 1e-12 * (1.0 + ab.abs()));
        }

        #[test]
        fn full_subset_risk_matches_ridge_objective(
            (data, a, _b) in small_dataset(),
            lambda in 0.0..5.0f64,
        ) {
            let all: Vec<usize> = (0..data.n()).collect();
            let v = penalized_risk_subset(&a, &all, &data, &params(1.0, lambda)).unwrap();
            // independent route: matrix form |X a - y|^2 / n + lambda |a|^2
            let x = data.x_matrix();
            let r = &x * nalgebra::DVector::from_column_slice(&a)
                - nalgebra::DVector::from_column_slice(data.ys());
            let direct = r.norm_squared() / data.n() as f64
                + lambda * a.iter().map(|v| v * v).sum::<f64>();
            prop_assert!((v - direct).abs() <= 1e-10 * (1.0 + direct));
        }

        #[test]
        fn influence_score_ignores_other_points(
            (data, a, _b) in small_dataset(),
            alpha in 1e-3..10.0f64,
            shift in 1usize..7,
        ) {
            let d = data.d();
            let n = data.n();
            let q_inv = DMatrix::<f64>::identity(d, d);
            let p = params(alpha, 0.0);
            let s0 = influence_score(0, &a, &q_inv, &data, &p).unwrap();
            // rotate the sample so point 0 lands at a different index and
            // scramble every other output
            let k = shift % n;
            let mut x = Vec::with_capacity(n * d);
            let mut y = Vec::with_capacity(n);
            for j in 0..n {
                let src = (j + n - k) % n;
                x.extend_from_slice(data.row(src));
                y.push(if src == 0 { data.ys()[0] } else { data.ys()[src] * 3.0 + 1.0 });
            }
            let moved = Dataset::from_rows(x, y, d).unwrap();
            let s1 = influence_score(k, &a, &q_inv, &moved, &p).unwrap();
            prop_assert_eq!(s0, s1);
        }
    }
}
