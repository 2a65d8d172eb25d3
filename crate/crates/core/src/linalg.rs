//! Small dense helpers: symmetric eigendecomposition, pseudo-inverse and
//! running second-moment sums over a subset of rows.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dataset::Dataset;
use crate::scalar::Real;

/// Singular values below this fraction of the largest one are treated as zero
/// when pseudo-inverting.
pub const PINV_REL_TOL: f64 = 1e-10;

/// Relative cutoff for pseudo-inversion in type `T`.
///
/// `f64` uses [`PINV_REL_TOL`]; `f32` cannot resolve that level, so the
/// cutoff is raised to a few ulps scaled by the dimension.
pub fn pinv_cutoff<T: Real>(dim: usize) -> T {
    let floor = T::eps() * T::lit(10.0) * T::from_usize_lossy(dim.max(1));
    T::lit(PINV_REL_TOL).max(floor)
}

/// Eigenvalues (descending) and matching eigenvectors (as columns) of a
/// symmetric matrix.
pub fn symmetric_eigen_desc<T: Real>(a: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let eig = SymmetricEigen::new(a.clone());
    let dim = a.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix.
pub fn symmetric_pinv<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let dim = a.nrows();
    let eig = SymmetricEigen::new(a.clone());
    let largest = eig
        .eigenvalues
        .iter()
        .fold(T::zero(), |m, v| m.max(v.abs()));
    let cutoff = pinv_cutoff::<T>(dim) * largest;
    let mut out = DMatrix::zeros(dim, dim);
    if largest == T::zero() {
        return out;
    }
    for k in 0..dim {
        let nu = eig.eigenvalues[k];
        if nu.abs() <= cutoff {
            continue;
        }
        let inv = T::one() / nu;
        let v = eig.eigenvectors.column(k);
        for c in 0..dim {
            let vc = v[c] * inv;
            for r in 0..dim {
                out[(r, c)] += v[r] * vc;
            }
        }
    }
    out
}

/// Unnormalised sums `sum x x^T` and `sum y x` over a set of rows.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MomentSums<T> {
    pub xx: DMatrix<T>,
    pub xy: DVector<T>,
    pub count: usize,
}

impl<T: Real> MomentSums<T> {
    pub fn zeros(d: usize) -> Self {
        Self {
            xx: DMatrix::zeros(d, d),
            xy: DVector::zeros(d),
            count: 0,
        }
    }

    pub fn over(data: &Dataset<T>, subset: &[usize]) -> Self {
        let mut s = Self::zeros(data.d());
        for &i in subset {
            s.accumulate(data, i, T::one());
        }
        s.count = subset.len();
        s.symmetrize();
        s
    }

    /// Sums over `subset`, which must be contained in the rows summed by
    /// `self`. Whichever of direct summation or downdating touches fewer
    /// rows is used.
    pub fn restricted(&self, data: &Dataset<T>, subset: &[usize], removed: &[usize]) -> Self {
        debug_assert_eq!(subset.len() + removed.len(), self.count);
        if removed.is_empty() {
            return self.clone();
        }
        if removed.len() >= subset.len() {
            return Self::over(data, subset);
        }
        let mut s = self.clone();
        for &i in removed {
            s.accumulate(data, i, -T::one());
        }
        s.count = subset.len();
        s.symmetrize();
        s
    }

    // Upper triangle only; `symmetrize` mirrors it.
    fn accumulate(&mut self, data: &Dataset<T>, i: usize, sign: T) {
        let x = data.row(i);
        let y = data.ys()[i] * sign;
        let d = x.len();
        for c in 0..d {
            let xc = x[c] * sign;
            self.xy[c] += y * x[c];
            for r in 0..=c {
                self.xx[(r, c)] += x[r] * xc;
            }
        }
    }

    fn symmetrize(&mut self) {
        let d = self.xx.nrows();
        for c in 0..d {
            for r in 0..c {
                self.xx[(c, r)] = self.xx[(r, c)];
            }
        }
    }

    /// Empirical second-moment matrix `(1/m) sum x x^T`.
    pub fn second_moment(&self) -> DMatrix<T> {
        &self.xx / T::from_usize_lossy(self.count)
    }

    /// Minimiser of `lambda |theta|^2 + (1/m) sum (<theta, x> - y)^2`,
    /// taking the minimum-norm solution when the system is singular.
    pub fn penalized_solution(&self, lambda: T) -> DVector<T> {
        let m = T::from_usize_lossy(self.count);
        let mut a = &self.xx / m;
        for k in 0..a.nrows() {
            a[(k, k)] += lambda;
        }
        let b = &self.xy / m;
        symmetric_pinv(&a) * b
    }
}
