//! Gram matrix spectrum, effective ridge dimension and the kurtosis-type
//! coefficients that govern the truncation scale.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::{check_len, Error, Result};
use crate::linalg::{symmetric_eigen_desc, symmetric_pinv, MomentSums};
use crate::scalar::{dot, Real};
use crate::truncation::{quadratic_form, residuals};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const EIGEN_CLAMP_REL: f64 = 1e-12;

/// Number of random unit directions tried when estimating `chi`.
pub const CHI_RANDOM_DIRECTIONS: usize = 256;

/// Gram matrix with its spectrum and the ridge weight it is paired with.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSpectrum<T> {
    pub q: DMatrix<T>,
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<T>,
    /// Columns match `eigenvalues`.
    pub eigenvectors: DMatrix<T>,
    pub lambda: T,
}

impl<T: Real> GramSpectrum<T> {
    /// Decomposes a symmetric positive-semidefinite matrix.
    pub fn from_matrix(q: DMatrix<T>, lambda: T) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::domain("Gram matrix must be square"));
        }
        if !(lambda.is_finite() && lambda >= T::zero()) {
            return Err(Error::domain(format!("lambda must be non-negative, got {lambda}")));
        }
        let scale = q.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tol = T::lit(1e-10) * scale.max(T::min_value().unwrap_or_else(T::zero));
        for c in 0..q.ncols() {
            for r in 0..c {
                if (q[(r, c)] - q[(c, r)]).abs() > tol {
                    return Err(Error::domain("Gram matrix is not symmetric"));
                }
            }
        }
        let (values, vectors) = symmetric_eigen_desc(&q);
        Ok(Self {
            eigenvalues: clamp_spectrum(&values),
            eigenvectors: vectors,
            q,
            lambda,
        })
    }

    /// Spectrum only, for closed-form computations. The matrix is the
    /// diagonal one with these eigenvalues.
    pub fn from_eigenvalues(eigenvalues: &[T], lambda: T) -> Result<Self> {
        let mut v = eigenvalues.to_vec();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(v)), lambda)
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|v| **v > T::zero()).count()
    }
}

/// Zeroes negative eigenvalues and those below `EIGEN_CLAMP_REL * nu_1`.
fn clamp_spectrum<T: Real>(values: &[T]) -> Vec<T> {
    let top = values.iter().fold(T::zero(), |m, v| m.max(*v));
    let floor = T::lit(EIGEN_CLAMP_REL) * top;
    values
        .iter()
        .map(|&v| if v > floor && v > T::zero() { v } else { T::zero() })
        .collect()
}

/// Empirical Gram matrix `(1/n) sum x_i x_i^T`.
pub fn gram_matrix<T: Real>(data: &Dataset<T>) -> GramSpectrum<T> {
    let all: Vec<usize> = (0..data.n()).collect();
    let q = MomentSums::over(data, &all).second_moment();
    GramSpectrum::from_matrix(q, T::zero()).expect("empirical Gram matrix is symmetric")
}

/// Effective ridge dimension `sum nu / (nu + lambda)` over positive
/// eigenvalues; the rank of `Q` when `lambda = 0`.
pub fn effective_dimension<T: Real>(spectrum: &GramSpectrum<T>) -> T {
    spectrum
        .eigenvalues
        .iter()
        .filter(|v| **v > T::zero())
        .fold(T::zero(), |acc, &v| acc + v / (v + spectrum.lambda))
}

/// `sum nu^2 / (nu + lambda)^2` over positive eigenvalues.
fn second_effective_dimension<T: Real>(spectrum: &GramSpectrum<T>) -> T {
    spectrum
        .eigenvalues
        .iter()
        .filter(|v| **v > T::zero())
        .fold(T::zero(), |acc, &v| {
            let r = v / (v + spectrum.lambda);
            acc + r * r
        })
}

/// Plug-in estimates of the noise level and kurtosis coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet<T> {
    /// RMS residual of the reference coefficients.
    pub sigma: T,
    /// Largest `sqrt(E <u,x>^4) / E <u,x>^2` found over the candidate
    /// directions. A lower estimate of the supremum over all directions.
    pub chi: T,
    pub kappa: T,
    /// Residual kurtosis `sqrt(E r^4) / E r^2`; set to 1 when the
    /// residuals vanish (see `degenerate`).
    pub kappa_prime: T,
    /// Diameter of the coefficient ball in the ridge-augmented `Q` norm.
    pub t_diameter: T,
    pub d_eff: T,
    /// True when the residuals are identically zero.
    pub degenerate: bool,
}

/// `sqrt(mean v^4) / mean v^2`, or `None` when `mean v^2 = 0`.
fn fourth_moment_ratio<T: Real>(values: impl Iterator<Item = T>) -> Option<T> {
    let (mut m2, mut m4, mut count) = (T::zero(), T::zero(), 0usize);
    for v in values {
        let s = v * v;
        m2 += s;
        m4 += s * s;
        count += 1;
    }
    if count == 0 || m2 <= T::zero() {
        return None;
    }
    let c = T::from_usize_lossy(count);
    Some((m4 / c).sqrt() / (m2 / c))
}

/// Maximum of the fourth-moment ratio of `<u, x_i>` over the given
/// directions. Directions along which every projection vanishes are
/// skipped; returns 1 if all of them are.
pub fn chi_over_directions<T: Real>(data: &Dataset<T>, directions: &[Vec<T>]) -> Result<T> {
    let mut best = T::one();
    for u in directions {
        check_len("direction", data.d(), u.len())?;
        if let Some(r) = fourth_moment_ratio((0..data.n()).map(|i| dot(u, data.row(i)))) {
            best = best.max(r);
        }
    }
    Ok(best)
}

/// Candidate directions for `chi`: whitened eigenvectors of the Gram
/// matrix, the coordinate axes, and seeded random unit vectors.
pub fn chi_candidate_directions<T: Real>(spectrum: &GramSpectrum<T>, seed: u64) -> Vec<Vec<T>> {
    let d = spectrum.dim();
    let mut dirs = Vec::with_capacity(2 * d + CHI_RANDOM_DIRECTIONS);
    for k in 0..d {
        let nu = spectrum.eigenvalues[k];
        if nu > T::zero() {
            let s = T::one() / nu.sqrt();
            dirs.push(spectrum.eigenvectors.column(k).iter().map(|&v| v * s).collect());
        }
    }
    for j in 0..d {
        let mut e = vec![T::zero(); d];
        e[j] = T::one();
        dirs.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while dirs.len() < 2 * d + CHI_RANDOM_DIRECTIONS {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            dirs.push(g.iter().map(|v| T::lit(v / norm)).collect());
        }
    }
    dirs
}

/// Plug-in estimates of the coefficient set on a sample.
///
/// `theta_ref` stands in for the ridge-optimal coefficients and
/// `theta_radius` bounds the coefficient set as a Euclidean ball. `seed`
/// drives the random directions used for `chi`.
pub fn empirical_coefficients<T: Real>(
    data: &Dataset<T>,
    theta_ref: &[T],
    lambda: T,
    theta_radius: T,
    seed: u64,
) -> Result<CoefficientSet<T>> {
    check_len("theta_ref", data.d(), theta_ref.len())?;
    if !(lambda.is_finite() && lambda >= T::zero()) {
        return Err(Error::domain(format!("lambda must be non-negative, got {lambda}")));
    }
    if !(theta_radius.is_finite() && theta_radius > T::zero()) {
        return Err(Error::domain(format!("theta radius must be positive, got {theta_radius}")));
    }
    let spectrum = gram_matrix(data).with_lambda(lambda);
    let nf = T::from_usize_lossy(data.n());

    let res = residuals(theta_ref, data);
    let m2 = res.iter().fold(T::zero(), |a, &r| a + r * r) / nf;
    let sigma = m2.sqrt();
    let (kappa_prime, degenerate) = match fourth_moment_ratio(res.iter().copied()) {
        Some(k) => (k, false),
        None => (T::one(), true),
    };

    let mut q_lambda = spectrum.q.clone();
    for k in 0..q_lambda.nrows() {
        q_lambda[(k, k)] += lambda;
    }
    let q_lambda_inv = symmetric_pinv(&q_lambda);
    let leverages: Vec<T> = (0..data.n())
        .map(|i| quadratic_form(&q_lambda_inv, data.row(i)))
        .collect();
    let lev_mean = leverages.iter().fold(T::zero(), |a, &v| a + v) / nf;
    let lev_sq = leverages.iter().fold(T::zero(), |a, &v| a + v * v) / nf;
    let kappa = if lev_mean > T::zero() {
        lev_sq.sqrt() / lev_mean
    } else {
        T::one()
    };

    let chi = chi_over_directions(data, &chi_candidate_directions(&spectrum, seed))?;
    let top = spectrum.eigenvalues.first().copied().unwrap_or_else(T::zero);
    let t_diameter = T::lit(2.0) * theta_radius * (lambda + top).sqrt();

    Ok(CoefficientSet {
        sigma,
        chi,
        kappa,
        kappa_prime,
        t_diameter,
        d_eff: effective_dimension(&spectrum),
        degenerate,
    })
}

/// Truncation scale suggested by the risk bound,
/// `(1 - c kappa chi D / n) / (2 chi (2 sqrt(kappa') sigma + sqrt(chi) T)^2)`.
///
/// `c` is the unspecified numerical constant of the bound. Errors when
/// `n <= c kappa chi D`, where the bound does not apply.
pub fn theoretical_alpha<T: Real>(coeffs: &CoefficientSet<T>, n: usize, c: T) -> Result<T> {
    if !(c.is_finite() && c > T::zero()) {
        return Err(Error::domain(format!("constant c must be positive, got {c}")));
    }
    let factor = T::one() - c * coeffs.kappa * coeffs.chi * coeffs.d_eff / T::from_usize_lossy(n);
    if factor <= T::zero() {
        return Err(Error::domain(format!(
            "n = {n} too small: need n > c * kappa * chi * D"
        )));
    }
    let spread =
        T::lit(2.0) * coeffs.kappa_prime.sqrt() * coeffs.sigma + coeffs.chi.sqrt() * coeffs.t_diameter;
    let denom = T::lit(2.0) * coeffs.chi * spread * spread;
    if denom <= T::zero() {
        return Err(Error::domain("noise level and diameter are both zero"));
    }
    Ok(factor / denom)
}

/// `(chi, kappa)` for a centered Gaussian design with the given Gram
/// spectrum: `chi = sqrt 3` and `kappa = sqrt(1 + 2 D2 / D^2)`.
pub fn gaussian_design_coeffs<T: Real>(eigenvalues: &[T], lambda: T) -> Result<(T, T)> {
    let spectrum = GramSpectrum::from_eigenvalues(eigenvalues, lambda)?;
    if spectrum.rank() == 0 {
        return Err(Error::domain("spectrum has no positive eigenvalue"));
    }
    let d = effective_dimension(&spectrum);
    let d2 = second_effective_dimension(&spectrum);
    let three = T::lit(3.0);
    Ok((three.sqrt(), (T::one() + T::lit(2.0) * d2 / (d * d)).sqrt()))
}

/// Upper bound on `chi` for a design with independent coordinates whose
/// largest per-coordinate fourth-moment ratio is `chi_star`. With
/// `skew_free` the coordinates are assumed to have zero third moment.
pub fn independent_design_chi_bound<T: Real>(chi_star: T, d: usize, skew_free: bool) -> Result<T> {
    if !(chi_star.is_finite() && chi_star >= T::one()) {
        return Err(Error::domain(format!("chi_star must be at least 1, got {chi_star}")));
    }
    if d == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let three = T::lit(3.0);
    let root3 = three.sqrt();
    let df = T::from_usize_lossy(d);
    let skew = three.powf(T::lit(1.5)) / T::lit(4.0);
    let v = match (skew_free, chi_star >= root3) {
        (true, true) => chi_star,
        (true, false) => (three + (chi_star * chi_star - three) / df).sqrt(),
        (false, true) => chi_star * (T::one() + skew / chi_star.sqrt()).sqrt(),
        (false, false) => {
            (three + skew * chi_star.powf(T::lit(1.5)) + (chi_star * chi_star - three) / df).sqrt()
        }
    };
    Ok(v)
}

/// `(A B, A B / sqrt((1 + lambda A^2) D))` for a design bounded by `B` in
/// norm whose Gram matrix dominates `A^-2 I`.
pub fn bounded_design_bounds<T: Real>(a: T, b: T, lambda: T, d_eff: T) -> Result<(T, T)> {
    if !(a > T::zero() && b > T::zero()) {
        return Err(Error::domain("A and B must be positive"));
    }
    if !(d_eff > T::zero()) {
        return Err(Error::domain(format!("effective dimension must be positive, got {d_eff}")));
    }
    if !(lambda >= T::zero()) {
        return Err(Error::domain("lambda must be non-negative"));
    }
    let ab = a * b;
    Ok((ab, ab / ((T::one() + lambda * a * a) * d_eff).sqrt()))
}

/// Transfers `(chi, kappa)` from a reference design to one whose density
/// ratio against it stays within `(1/eta, eta)`.
pub fn density_ratio_rescale<T: Real>(chi_tilde: T, kappa_tilde: T, eta: T) -> Result<(T, T)> {
    if !(eta.is_finite() && eta >= T::one()) {
        return Err(Error::domain(format!("eta must be at least 1, got {eta}")));
    }
    Ok((eta.powf(T::lit(1.5)) * chi_tilde, eta.powf(T::lit(3.5)) * kappa_tilde))
}
