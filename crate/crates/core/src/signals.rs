//! Training signals: the four-level random scheme and FIR-colored variants of it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::Real;

/// Finite real sample sequence; sample `n` is at position `n`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signal<T> {
    samples: Vec<T>,
}

impl<T: Real> Signal<T> {
    /// Builds a signal, rejecting NaN and infinite samples.
    pub fn new(samples: Vec<T>) -> Result<Self> {
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSample { index: Some(index) });
        }
        Ok(Self { samples })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            samples: vec![T::zero(); len],
        }
    }

    /// Unit impulse of length `len` (empty when `len == 0`).
    pub fn impulse(len: usize) -> Self {
        let mut s = Self::zeros(len);
        if let Some(first) = s.samples.first_mut() {
            *first = T::one();
        }
        s
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.samples
    }

    pub fn into_vec(self) -> Vec<T> {
        self.samples
    }

    /// Mean of squared samples; zero for an empty signal.
    pub fn power(&self) -> T {
        if self.samples.is_empty() {
            return T::zero();
        }
        self.samples.iter().map(|&s| s * s).sum::<T>() / T::from_usize_lossy(self.len())
    }

    pub fn mean(&self) -> T {
        if self.samples.is_empty() {
            return T::zero();
        }
        self.samples.iter().copied().sum::<T>() / T::from_usize_lossy(self.len())
    }
}

/// FIR impulse response `h(0..P-1)`, `P >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FilterTaps<T> {
    taps: Vec<T>,
}

impl<T: Real> FilterTaps<T> {
    pub fn new(taps: Vec<T>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::invalid("filter taps must not be empty"));
        }
        if let Some(index) = taps.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidSample { index: Some(index) });
        }
        Ok(Self { taps })
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.taps
    }

    pub fn dc_gain(&self) -> T {
        self.taps.iter().copied().sum()
    }

    pub fn energy(&self) -> T {
        self.taps.iter().map(|&h| h * h).sum()
    }
}

/// Amplitude for a uniform draw `r` in `[0, 1]`: quartiles map to -3, -1, +1, +3.
/// Intervals are half-open on the right except the last, which is closed at 1.
pub fn four_level_symbol(r: f64) -> f64 {
    if r < 0.25 {
        -3.0
    } else if r < 0.5 {
        -1.0
    } else if r < 0.75 {
        1.0
    } else {
        3.0
    }
}

/// Four-level training sequence, one uniform draw per sample.
pub fn gen_four_level<T: Real>(n_samples: usize, rng: &mut RngStream) -> Signal<T> {
    let samples = (0..n_samples)
        .map(|_| T::c(four_level_symbol(rng.uniform())))
        .collect();
    Signal { samples }
}

/// Causal convolution with zero pre-history; output has the input's length.
pub fn color<T: Real>(x: &Signal<T>, lpf: &FilterTaps<T>) -> Result<Signal<T>> {
    if lpf.is_empty() {
        return Err(Error::invalid("filter taps must not be empty"));
    }
    Ok(Signal {
        samples: convolve_causal(x.as_slice(), lpf.as_slice()),
    })
}

pub(crate) fn convolve_causal<T: Real>(x: &[T], h: &[T]) -> Vec<T> {
    (0..x.len())
        .map(|n| {
            h.iter()
                .enumerate()
                .take(n + 1)
                .fold(T::zero(), |acc, (k, &hk)| acc + hk * x[n - k])
        })
        .collect()
}

/// The 8-tap low-pass filter used to color the training input.
pub fn standard_lpf_8tap<T: Real>() -> FilterTaps<T> {
    const TAPS: [f64; 8] = [
        0.0012654, -0.0052341, -0.0019735, -0.0023009, 0.022366, 0.12833, 0.0013, 0.0012,
    ];
    FilterTaps {
        taps: TAPS.iter().map(|&h| T::c(h)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symbol_quartiles() {
        assert_eq!(four_level_symbol(0.1), -3.0);
        assert_eq!(four_level_symbol(0.0), -3.0);
        assert_eq!(four_level_symbol(0.25), -1.0);
        assert_eq!(four_level_symbol(0.5), 1.0);
        assert_eq!(four_level_symbol(0.74999), 1.0);
        assert_eq!(four_level_symbol(0.75), 3.0);
        assert_eq!(four_level_symbol(1.0), 3.0);
    }

    #[test]
    fn empty_request_gives_empty_signal() {
        let s: Signal<f64> = gen_four_level(0, &mut RngStream::new(1));
        assert!(s.is_empty());
    }

    #[test]
    fn generated_samples_follow_draws() {
        let mut rng = RngStream::new(11);
        let mut mirror = rng.clone();
        let s: Signal<f64> = gen_four_level(500, &mut rng);
        for &v in s.as_slice() {
            assert_eq!(v, four_level_symbol(mirror.uniform()));
        }
    }

    #[test]
    fn monte_carlo_moments() {
        let s: Signal<f64> = gen_four_level(1_000_000, &mut RngStream::new(2024));
        let mean = s.mean();
        let power = s.power();
        assert!(mean.abs() <= 0.02, "mean {mean}");
        assert!((4.95..=5.05).contains(&power), "power {power}");
    }

    #[test]
    fn quartile_frequencies_within_three_sigma() {
        let n = 100_000usize;
        let s: Signal<f64> = gen_four_level(n, &mut RngStream::new(5));
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        for level in [-3.0, -1.0, 1.0, 3.0] {
            let freq = s.as_slice().iter().filter(|&&v| v == level).count() as f64 / n as f64;
            assert!((freq - 0.25).abs() <= 3.0 * sigma, "level {level}: {freq}");
        }
    }

    #[test]
    fn standard_lpf_values() {
        let h = standard_lpf_8tap::<f64>();
        assert_eq!(h.len(), 8);
        assert_eq!(h.as_slice()[0], 0.0012654);
        assert_eq!(h.as_slice()[5], 0.12833);
        // Hand sum of the eight listed taps.
        let oracle =
            0.0012654 - 0.0052341 - 0.0019735 - 0.0023009 + 0.022366 + 0.12833 + 0.0013 + 0.0012;
        assert_relative_eq!(h.dc_gain(), oracle, epsilon = 1e-15);
        assert_relative_eq!(h.dc_gain(), 0.1449529, epsilon = 1e-12);
    }

    #[test]
    fn color_zero_and_impulse() {
        let h = standard_lpf_8tap::<f64>();
        let z = color(&Signal::zeros(20), &h).unwrap();
        assert!(z.as_slice().iter().all(|&v| v == 0.0));

        let y = color(&Signal::impulse(12), &h).unwrap();
        assert_eq!(&y.as_slice()[..8], h.as_slice());
        assert!(y.as_slice()[8..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_taps_rejected() {
        assert!(matches!(
            FilterTaps::<f64>::new(vec![]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn nonfinite_sample_rejected() {
        assert_eq!(
            Signal::new(vec![1.0, f64::NAN]).unwrap_err(),
            Error::InvalidSample { index: Some(1) }
        );
    }

    #[test]
    fn colored_power_matches_filtered_white_noise() {
        let n = 1_000_000;
        let h = standard_lpf_8tap::<f64>();
        let x: Signal<f64> = gen_four_level(n, &mut RngStream::new(99));
        let y = color(&x, &h).unwrap();
        // Direct-averaging oracle, independent of `color`.
        let xs = x.as_slice();
        let mut acc = 0.0;
        for t in 0..n {
            let mut v = 0.0;
            for k in 0..8 {
                if t >= k {
                    v += h.as_slice()[k] * xs[t - k];
                }
            }
            acc += v * v;
        }
        let direct = acc / n as f64;
        let analytic = 5.0 * h.energy();
        assert_relative_eq!(y.power(), direct, max_relative = 1e-12);
        assert!((direct - analytic).abs() <= 0.05 * analytic);
    }

    #[test]
    fn f32_signals_work() {
        let s: Signal<f32> = gen_four_level(1000, &mut RngStream::new(1));
        assert!(s
            .as_slice()
            .iter()
            .all(|v| [-3.0f32, -1.0, 1.0, 3.0].contains(v)));
    }
}
