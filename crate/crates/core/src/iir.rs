//! Recursive adaptive filter
//!
//! ```text
//! y(n) = sum_{k=0..M} b_k x(n-k) + sum_{k=1..L} a_k y(n-k)
//! ```
//!
//! adapted by LMS on the output error. The gradient of `y(n)` with respect to
//! each coefficient is carried by the recursions
//!
//! ```text
//! alpha_k(n) = x(n-k) + sum_l a_l alpha_k(n-l)    k = 0..M
//! beta_k(n)  = y(n-k) + sum_l a_l beta_k(n-l)     k = 1..L
//! ```
//!
//! evaluated with the current feedback coefficients.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::adapt::{drive, report_from, AdaptiveFilter, LmsRunConfig, Step};
use crate::error::{Error, Result};
use crate::scalar::{dot, push_front, Real};
use crate::signals::Signal;
use crate::sysid::{ExperimentReport, FilterCoefficients};

/// Largest pole radius the adaptive filter is allowed to keep.
pub const POLE_RADIUS_LIMIT: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IirFilter<T> {
    b: Vec<T>,
    a: Vec<T>,
    /// `x(n), ..., x(n-M)`
    input_line: Vec<T>,
    /// `y(n-1), ..., y(n-L)`
    output_line: Vec<T>,
    /// `alpha[k] = [alpha_k(n-1), ..., alpha_k(n-L)]`
    alpha: Vec<Vec<T>>,
    /// `beta[k-1] = [beta_k(n-1), ..., beta_k(n-L)]`
    beta: Vec<Vec<T>>,
    /// Latest `[alpha_0(n) .. alpha_M(n), beta_1(n) .. beta_L(n)]`.
    gradient: Vec<T>,
}

impl<T: Real> IirFilter<T> {
    /// Zero-initialized filter with `M + 1` feedforward and `L` feedback coefficients.
    pub fn new(m: usize, l: usize) -> Self {
        Self {
            b: vec![T::zero(); m + 1],
            a: vec![T::zero(); l],
            input_line: vec![T::zero(); m + 1],
            output_line: vec![T::zero(); l],
            alpha: vec![vec![T::zero(); l]; m + 1],
            beta: vec![vec![T::zero(); l]; l],
            gradient: vec![T::zero(); m + 1 + l],
        }
    }

    /// Filter at rest with the given coefficients; `a` is stabilized.
    pub fn with_coefficients(b: Vec<T>, a: Vec<T>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::invalid("an IIR filter needs at least b_0"));
        }
        if b.iter().chain(&a).any(|v| !v.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        let mut f = Self::new(b.len() - 1, a.len());
        f.b = b;
        f.a = stabilize_poles(&a);
        Ok(f)
    }

    /// Filter at rest with `a` taken as-is (no pole clamping); used for plants.
    pub(crate) fn from_raw(b: Vec<T>, a: Vec<T>) -> Self {
        let mut f = Self::new(b.len().saturating_sub(1), a.len());
        f.b = b;
        f.a = a;
        f
    }

    /// Feedforward order `M`.
    pub fn m(&self) -> usize {
        self.b.len() - 1
    }

    /// Feedback order `L`.
    pub fn l(&self) -> usize {
        self.a.len()
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn gradient(&self) -> &[T] {
        &self.gradient
    }

    pub fn max_pole_radius(&self) -> T {
        max_pole_radius(&self.a)
    }

    /// Filters one sample with frozen coefficients.
    pub fn iir_output(&mut self, x_new: T) -> Result<T> {
        if !x_new.is_finite() {
            return Err(Error::InvalidSample { index: None });
        }
        push_front(&mut self.input_line, x_new);
        let y = dot(&self.b, &self.input_line) + dot(&self.a, &self.output_line);
        if !y.is_finite() {
            return Err(Error::Divergence { iteration: None });
        }
        push_front(&mut self.output_line, y);
        Ok(y)
    }

    /// One output-error LMS step followed by pole stabilization.
    pub fn iir_gradient_step(&mut self, x_new: T, d: T, mu: T) -> Result<Step<T>> {
        if !x_new.is_finite() || !d.is_finite() {
            return Err(Error::InvalidSample { index: None });
        }
        if !mu.is_finite() {
            return Err(Error::invalid("step size must be finite"));
        }
        push_front(&mut self.input_line, x_new);
        let y = dot(&self.b, &self.input_line) + dot(&self.a, &self.output_line);
        let eps = d - y;

        let nb = self.b.len();
        for k in 0..nb {
            self.gradient[k] = self.input_line[k] + dot(&self.a, &self.alpha[k]);
        }
        for k in 0..self.a.len() {
            self.gradient[nb + k] = self.output_line[k] + dot(&self.a, &self.beta[k]);
        }

        let gain = T::c(2.0) * mu * eps;
        for (c, &g) in self
            .b
            .iter_mut()
            .chain(self.a.iter_mut())
            .zip(&self.gradient)
        {
            *c = *c + gain * g;
        }

        for k in 0..nb {
            push_front(&mut self.alpha[k], self.gradient[k]);
        }
        for k in 0..self.beta.len() {
            push_front(&mut self.beta[k], self.gradient[nb + k]);
        }
        push_front(&mut self.output_line, y);

        if !y.is_finite() || self.b.iter().chain(&self.a).any(|c| !c.is_finite()) {
            return Err(Error::Divergence { iteration: None });
        }
        self.a = stabilize_poles(&self.a);
        Ok(Step { y, eps })
    }
}

impl<T: Real> AdaptiveFilter<T> for IirFilter<T> {
    fn adapt(&mut self, x_new: T, d: T, mu: T) -> Result<Step<T>> {
        self.iir_gradient_step(x_new, d, mu)
    }

    fn filter(&mut self, x_new: T) -> Result<T> {
        self.iir_output(x_new)
    }

    fn genes(&self) -> Vec<T> {
        self.b.iter().chain(&self.a).copied().collect()
    }

    fn set_genes(&mut self, genes: &[T]) -> Result<()> {
        let nb = self.b.len();
        if genes.len() != nb + self.a.len() {
            return Err(Error::invalid(
                "gene count does not match the filter structure",
            ));
        }
        self.b.copy_from_slice(&genes[..nb]);
        self.a = stabilize_poles(&genes[nb..]);
        Ok(())
    }

    fn coefficients(&self) -> FilterCoefficients<T> {
        FilterCoefficients {
            b: self.b.clone(),
            a: self.a.clone(),
        }
    }
}

/// Roots of `z^L - a_1 z^(L-1) - ... - a_L`, i.e. the poles of `1 / (1 - sum a_k z^-k)`.
pub fn poles<T: Real>(a: &[T]) -> Vec<Complex<T>> {
    match a.len() {
        0 => Vec::new(),
        1 => vec![Complex::new(a[0], T::zero())],
        2 => {
            let two = T::c(2.0);
            let half = a[0] / two;
            let disc = half * half + a[1];
            if disc >= T::zero() {
                let s = disc.sqrt();
                vec![
                    Complex::new(half + s, T::zero()),
                    Complex::new(half - s, T::zero()),
                ]
            } else {
                let s = (-disc).sqrt();
                vec![Complex::new(half, s), Complex::new(half, -s)]
            }
        }
        _ => durand_kerner(a),
    }
}

/// Simultaneous Weierstrass iteration on the monic feedback polynomial.
fn durand_kerner<T: Real>(a: &[T]) -> Vec<Complex<T>> {
    let l = a.len();
    // Monic coefficients, highest power first: 1, -a_1, ..., -a_L.
    let coeffs: Vec<Complex<T>> = std::iter::once(T::one())
        .chain(a.iter().map(|&v| -v))
        .map(|v| Complex::new(v, T::zero()))
        .collect();
    let eval = |z: Complex<T>| {
        coeffs
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c)
    };

    let bound = T::one() + a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let seed = Complex::new(T::c(0.4), T::c(0.9));
    let mut roots: Vec<Complex<T>> = (0..l)
        .map(|i| seed.powu(i as u32) * Complex::new(bound, T::zero()))
        .collect();
    let tol = T::epsilon() * T::c(64.0) * bound;
    for _ in 0..500 {
        let mut moved = T::zero();
        for i in 0..l {
            let mut denom = Complex::new(T::one(), T::zero());
            for j in 0..l {
                if i != j {
                    denom = denom * (roots[i] - roots[j]);
                }
            }
            if denom.norm() == T::zero() {
                denom = Complex::new(tol, T::zero());
            }
            let delta = eval(roots[i]) / denom;
            roots[i] = roots[i] - delta;
            moved = moved.max(delta.norm());
        }
        if moved <= tol {
            break;
        }
    }
    roots
}

pub fn max_pole_radius<T: Real>(a: &[T]) -> T {
    poles(a).iter().map(|p| p.norm()).fold(T::zero(), T::max)
}

/// Pulls every pole with radius above [`POLE_RADIUS_LIMIT`] onto that radius,
/// keeping its angle, and rebuilds the feedback coefficients. Feedback vectors
/// already inside the limit are returned unchanged.
pub fn stabilize_poles<T: Real>(a: &[T]) -> Vec<T> {
    let rho = T::c(POLE_RADIUS_LIMIT);
    if a.iter().any(|v| !v.is_finite()) {
        return a.to_vec();
    }
    let roots = poles(a);
    if roots.iter().all(|p| p.norm() <= rho) {
        return a.to_vec();
    }
    let clamped: Vec<Complex<T>> = roots
        .into_iter()
        .map(|p| {
            let r = p.norm();
            if r > rho {
                p * (rho / r)
            } else {
                p
            }
        })
        .collect();
    // prod (z - p_i) = z^L + c_1 z^(L-1) + ... + c_L, and a_k = -c_k.
    let mut poly = vec![Complex::new(T::one(), T::zero())];
    for p in &clamped {
        let mut next = vec![Complex::new(T::zero(), T::zero()); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i] = next[i] + c;
            next[i + 1] = next[i + 1] - c * p;
        }
        poly = next;
    }
    poly[1..].iter().map(|c| -c.re).collect()
}

/// Output-error LMS identification with `M + 1` zeros and `L` poles.
pub fn run_iir_lms<T: Real>(
    x: &Signal<T>,
    d: &Signal<T>,
    m: usize,
    l: usize,
    cfg: &LmsRunConfig<T>,
    initial: Option<&FilterCoefficients<T>>,
) -> Result<ExperimentReport<T>> {
    if x.len() != d.len() {
        return Err(Error::invalid("input and desired signals differ in length"));
    }
    let mut filter = match initial {
        Some(c) => {
            if c.b.len() != m + 1 || c.a.len() != l {
                return Err(Error::invalid("initial coefficients do not match (M, L)"));
            }
            IirFilter::with_coefficients(c.b.clone(), c.a.clone())?
        }
        None => IirFilter::new(m, l),
    };
    let (rec, converged, _) =
        drive::<T, _, _, ()>(&mut filter, x.as_slice(), d.as_slice(), cfg, |_, _, _| {
            Ok(None)
        })?;
    Ok(report_from(&filter, rec, converged))
}
