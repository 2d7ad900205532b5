#![allow(clippy::needless_range_loop)]

use adaptid::spectral::{cross_correlation, SymMatrix};
use adaptid::*;
use proptest::prelude::*;

fn white(n: usize, seed: u64) -> Signal64 {
    gen_four_level(n, &mut RngStream::new(seed))
}

/// Number of eigenvalues of `m` below `s`, from the signs of the LDL^T pivots of m - sI.
fn count_below(m: &[Vec<f64>], s: f64) -> usize {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= s;
    }
    let mut neg = 0;
    for k in 0..n {
        let mut p = a[k][k];
        if p == 0.0 {
            p = -1e-300;
        }
        if p < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let f = a[i][k] / p;
            for j in k + 1..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    neg
}

/// Eigenvalues by bisection on the inertia count.
fn bisection_eigs(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let bound: f64 = m
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(m, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

#[test]
fn jacobi_matches_inertia_bisection() {
    let mut rng = RngStream::new(99);
    for _ in 0..10 {
        let mut rows = vec![vec![0.0; 6]; 6];
        for i in 0..6 {
            for j in i..6 {
                let v = rng.uniform_range(-2.0, 2.0);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        let mut got = sym_eigenvalues(&SymMatrix::from_rows(&rows).unwrap()).unwrap();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = bisection_eigs(&rows);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn trace_equals_eigenvalue_sum() {
    for seed in 0..5 {
        let x = color(&white(20_000, seed), &standard_lpf_8tap()).unwrap();
        let r = autocorr_estimate(&x, 8).unwrap();
        let t = toeplitz_from_autocorr(&r, 8).unwrap();
        let sum: f64 = t.eigenvalues().iter().sum();
        assert!((sum - t.trace()).abs() <= 1e-10 * t.trace().abs());
        assert!((t.trace() - 8.0 * r.lags[0]).abs() <= 1e-12 * t.trace());
    }
}

#[test]
fn coloring_raises_disparity() {
    let x = white(100_000, 3);
    let xc = color(&x, &standard_lpf_8tap()).unwrap();
    let disparity = |s: &Signal64| {
        let r = autocorr_estimate(s, 4).unwrap();
        let eigs = toeplitz_from_autocorr(&r, 4).unwrap().eigenvalues();
        convergence_estimate(&eigs, 0.01).unwrap().disparity
    };
    let dw = disparity(&x);
    let dc = disparity(&xc);
    assert!((1.0..=1.2).contains(&dw), "white disparity {dw}");
    assert!(dc > dw, "colored {dc} vs white {dw}");
}

#[test]
fn wiener_recovers_plant_and_is_orthogonal() {
    let x = white(100_000, 11);
    let d = plant_response(&Plant::eq31(), &x).unwrap();
    let c = wiener_solution(&x, &d, 4).unwrap();
    for (w, p) in c.iter().zip([0.03, 0.24, 0.54, 0.8]) {
        assert!((w - p).abs() < 1e-2, "{c:?}");
    }

    // Residual over the full convolution support, d zero-padded past the record,
    // is orthogonal to every delayed input under the same biased estimator.
    let xs = x.as_slice();
    let n = xs.len();
    let len = n + 3;
    let at = |v: &[f64], i: isize| {
        if i >= 0 && (i as usize) < v.len() {
            v[i as usize]
        } else {
            0.0
        }
    };
    let e: Vec<f64> = (0..len as isize)
        .map(|i| {
            let y: f64 = (0..4).map(|k| c[k] * at(xs, i - k as isize)).sum();
            at(d.as_slice(), i) - y
        })
        .collect();
    for k in 0..4 {
        let dot: f64 = (0..len as isize)
            .map(|i| e[i as usize] * at(xs, i - k as isize))
            .sum();
        assert!(
            (dot / n as f64).abs() < 1e-10,
            "lag {k}: {}",
            dot / n as f64
        );
    }

    // Brute-force cross-correlation oracle.
    let p = cross_correlation(&x, &d, 4).unwrap();
    for (k, pk) in p.iter().enumerate() {
        let direct: f64 = (k..n).map(|i| d.as_slice()[i] * xs[i - k]).sum::<f64>() / n as f64;
        assert!((pk - direct).abs() < 1e-12);
    }
}

#[test]
fn lms_agrees_with_wiener() {
    let x = white(100_000, 12);
    let d = plant_response(&Plant::eq31(), &x).unwrap();
    let c = wiener_solution(&x, &d, 4).unwrap();
    let rep = run_fir_lms(&x, &d, 4, &LmsRunConfig::new(0.02), None).unwrap();
    for (w, v) in rep.final_weights.b.iter().zip(&c) {
        assert!((w - v).abs() < 1e-2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigenvalues_within_psd_bounds(seed in any::<u64>(), colored in any::<bool>(), order_ix in 0usize..3) {
        let order = [2usize, 4, 8][order_ix];
        let x = white(4_000, seed);
        let x = if colored { color(&x, &standard_lpf_8tap()).unwrap() } else { x };
        let r = autocorr_estimate(&x, order).unwrap();
        let psd = psd_from_autocorr(&r, 4096).unwrap();
        for l in toeplitz_from_autocorr(&r, order).unwrap().eigenvalues() {
            prop_assert!(l >= psd.min() - 1e-6 && l <= psd.max() + 1e-6);
        }
    }

    #[test]
    fn toeplitz_is_symmetric_with_constant_diagonals(lags in prop::collection::vec(-5.0f64..5.0, 1..7)) {
        let mut lags = lags;
        lags[0] = lags[0].abs() + 10.0;
        let r = AutocorrSeq::from_lags(lags.clone()).unwrap();
        let t = toeplitz_from_autocorr(&r, lags.len()).unwrap();
        for i in 0..lags.len() {
            for j in 0..lags.len() {
                prop_assert_eq!(t.get(i, j), t.get(j, i));
                prop_assert_eq!(t.get(i, j), lags[i.abs_diff(j)]);
            }
        }
    }
}
