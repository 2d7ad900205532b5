//! Autocorrelation statistics of the input and what they predict about LMS.
//!
//! The autocorrelation estimator is the biased time average
//! `r(t) = (1/len) * sum_n x(n) x(n-t)`, which keeps every Toeplitz matrix built
//! from it positive semidefinite. All signals are real, so no conjugation appears.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signals::Signal;

/// Condition number above which the normal equations are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Default frequency grid size for PSD evaluation.
pub const DEFAULT_PSD_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrSeq<T> {
    pub lags: Vec<T>,
    pub sample_count: usize,
}

impl<T: Real> AutocorrSeq<T> {
    /// Wraps explicit lag values, e.g. analytic ones.
    pub fn from_lags(lags: Vec<T>) -> Result<Self> {
        if lags.is_empty() {
            return Err(Error::invalid("autocorrelation needs at least lag 0"));
        }
        if lags.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("autocorrelation lags must be finite"));
        }
        Ok(Self {
            lags,
            sample_count: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }
}

/// `r(t)` for `t = 0..max_lag-1`.
pub fn autocorr_estimate<T: Real>(x: &Signal<T>, max_lag: usize) -> Result<AutocorrSeq<T>> {
    let len = x.len();
    if max_lag == 0 {
        return Err(Error::invalid("max_lag must be at least 1"));
    }
    if max_lag >= len {
        return Err(Error::invalid(format!(
            "max_lag {max_lag} must be smaller than the signal length {len}"
        )));
    }
    let xs = x.as_slice();
    let scale = T::from_usize_lossy(len);
    let lags = (0..max_lag)
        .map(|t| dot(&xs[t..], &xs[..len - t]) / scale)
        .collect();
    Ok(AutocorrSeq {
        lags,
        sample_count: len,
    })
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    crate::scalar::dot(a, b)
}

/// Symmetric Toeplitz matrix with `M[i][j] = r(|i - j|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzMatrix<T> {
    first_row: Vec<T>,
}

impl<T: Real> ToeplitzMatrix<T> {
    pub fn order(&self) -> usize {
        self.first_row.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.first_row[i.abs_diff(j)]
    }

    pub fn first_row(&self) -> &[T] {
        &self.first_row
    }

    pub fn trace(&self) -> T {
        self.first_row[0] * T::from_usize_lossy(self.order())
    }

    pub fn to_dense(&self) -> SymMatrix<T> {
        let n = self.order();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.get(i, j));
            }
        }
        SymMatrix { n, data }
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        jacobi_eigenvalues(self.to_dense())
    }
}

pub fn toeplitz_from_autocorr<T: Real>(
    r: &AutocorrSeq<T>,
    order: usize,
) -> Result<ToeplitzMatrix<T>> {
    if order == 0 {
        return Err(Error::invalid("Toeplitz order must be at least 1"));
    }
    if order > r.len() {
        return Err(Error::invalid(format!(
            "order {order} exceeds the {} available lags",
            r.len()
        )));
    }
    Ok(ToeplitzMatrix {
        first_row: r.lags[..order].to_vec(),
    })
}

/// Dense square matrix, row-major. Symmetry is checked where it matters.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix must be square and non-empty"));
        }
        let data: Vec<T> = rows.iter().flatten().copied().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Self { n, data })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    fn frobenius_sq(&self) -> T {
        self.data.iter().map(|&v| v * v).sum()
    }

    fn off_diagonal_sq(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    acc = acc + self.get(i, j) * self.get(i, j);
                }
            }
        }
        acc
    }

    fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// Rejects matrices whose asymmetry exceeds `1e-10` relative to the largest entry.
pub fn sym_eigenvalues<T: Real>(m: &SymMatrix<T>) -> Result<Vec<T>> {
    let scale = m.data.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let tol = T::c(1e-10).max(T::epsilon() * T::c(16.0)) * scale.max(T::one());
    if m.max_asymmetry() > tol {
        return Err(Error::invalid("matrix is not symmetric"));
    }
    Ok(jacobi_eigenvalues(m.clone()))
}

/// Cyclic Jacobi rotations until the off-diagonal norm falls below
/// `1e-12` of the Frobenius norm (or the scalar type's resolution, if coarser).
fn jacobi_eigenvalues<T: Real>(mut a: SymMatrix<T>) -> Vec<T> {
    let n = a.n;
    let rel = T::c(1e-12).max(T::epsilon() * T::c(4.0));
    let frob = a.frobenius_sq().sqrt();
    let two = T::c(2.0);

    for _sweep in 0..100 {
        if a.off_diagonal_sq().sqrt() <= rel * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == T::zero() {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, T::zero());
                a.set(q, p, T::zero());
            }
        }
    }

    let mut eigs: Vec<T> = (0..n).map(|i| a.get(i, i)).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    eigs
}

/// Power spectral density sampled on a uniform grid over `[0, pi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdCurve<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> PsdCurve<T> {
    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// `X(w) = r(0) + 2 * sum_{t>=1} r(t) cos(w t)` on `grid_size` points.
pub fn psd_from_autocorr<T: Real>(r: &AutocorrSeq<T>, grid_size: usize) -> Result<PsdCurve<T>> {
    if grid_size < 2 {
        return Err(Error::invalid("PSD grid needs at least two points"));
    }
    let pi = T::c(std::f64::consts::PI);
    let step = pi / T::from_usize_lossy(grid_size - 1);
    let two = T::c(2.0);
    let mut grid = Vec::with_capacity(grid_size);
    let mut values = Vec::with_capacity(grid_size);
    for k in 0..grid_size {
        let w = if k == grid_size - 1 {
            pi
        } else {
            step * T::from_usize_lossy(k)
        };
        let mut x = r.lags.first().copied().unwrap_or_else(T::zero);
        for (t, &rt) in r.lags.iter().enumerate().skip(1) {
            x = x + two * rt * (w * T::from_usize_lossy(t)).cos();
        }
        grid.push(w);
        values.push(x);
    }
    Ok(PsdCurve { grid, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEstimate<T> {
    pub lambda_min: T,
    pub lambda_max: T,
    /// `lambda_max / lambda_min`.
    pub disparity: T,
    /// Predicted convergence time in iterations, `1 / (mu * lambda_min)`.
    pub tau: T,
    /// Largest stable step size, `1 / lambda_max`.
    pub mu_bound: T,
}

pub fn convergence_estimate<T: Real>(eigs: &[T], mu: T) -> Result<ConvergenceEstimate<T>> {
    if eigs.is_empty() {
        return Err(Error::DegenerateSpectrum("no eigenvalues".into()));
    }
    if !(mu > T::zero()) {
        return Err(Error::invalid("step size must be positive"));
    }
    let lambda_min = eigs.iter().copied().fold(T::infinity(), T::min);
    let lambda_max = eigs.iter().copied().fold(T::neg_infinity(), T::max);
    if !(lambda_min > T::zero()) {
        return Err(Error::DegenerateSpectrum(format!(
            "non-positive eigenvalue {lambda_min}"
        )));
    }
    Ok(ConvergenceEstimate {
        lambda_min,
        lambda_max,
        disparity: lambda_max / lambda_min,
        tau: T::one() / (mu * lambda_min),
        mu_bound: T::one() / lambda_max,
    })
}

/// Cross-correlation `p(k) = (1/len) * sum_n d(n) x(n-k)` for `k = 0..order-1`.
pub fn cross_correlation<T: Real>(x: &Signal<T>, d: &Signal<T>, order: usize) -> Result<Vec<T>> {
    if x.len() != d.len() {
        return Err(Error::invalid("input and desired signals differ in length"));
    }
    if order == 0 || order >= x.len() {
        return Err(Error::invalid("order must be in 1..len"));
    }
    let len = x.len();
    let scale = T::from_usize_lossy(len);
    let xs = x.as_slice();
    let ds = d.as_slice();
    Ok((0..order)
        .map(|k| dot(&ds[k..], &xs[..len - k]) / scale)
        .collect())
}

/// Wiener-Hopf weights from the estimated statistics of `(x, d)`.
///
/// Solves `R C = P` by Cholesky factorization after checking the spectral
/// condition number of `R` against [`MAX_CONDITION`].
pub fn wiener_solution<T: Real>(x: &Signal<T>, d: &Signal<T>, order: usize) -> Result<Vec<T>> {
    let p = cross_correlation(x, d, order)?;
    let r = autocorr_estimate(x, order)?;
    let rm = toeplitz_from_autocorr(&r, order)?;
    let eigs = rm.eigenvalues();
    let lmin = eigs[0];
    let lmax = eigs[order - 1];
    let condition = if lmin > T::zero() {
        (lmax / lmin).to_f64_lossy()
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularMatrix { condition });
    }
    cholesky_solve(&rm.to_dense(), &p).ok_or(Error::SingularMatrix { condition })
}

fn cholesky_solve<T: Real>(m: &SymMatrix<T>, rhs: &[T]) -> Option<Vec<T>> {
    let n = m.order();
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s = s - l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut c = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s = s - l[k * n + i] * c[k];
        }
        c[i] = s / l[i * n + i];
    }
    Some(c)
}
