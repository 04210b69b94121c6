//! Signal conditioning: smoothing, numerical differentiation, and the
//! force ratios the slip checks are built on.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::trace::ForceTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SignalError {
    #[error("smoothing window must be odd")]
    EvenWindow,
    #[error("smoothing window must be >= 3")]
    WindowTooSmall,
    #[error("smoothing window exceeds series length")]
    WindowTooLarge,
    #[error("series too short to differentiate (need >= 3 samples)")]
    TooShort,
    #[error("time step must be positive and finite")]
    BadTimeStep,
    #[error("normal force must be positive for a friction ratio")]
    ZeroNormalForce,
    #[error("window selects no samples")]
    EmptyWindow,
}

/// Centered moving average with window `window` (odd, >= 3).
///
/// Keeps the series length: near the ends the window shrinks
/// symmetrically, so the first and last samples pass through unchanged.
pub fn smooth<T: Real>(series: &[T], window: usize) -> Result<Vec<T>, SignalError> {
    if window.is_multiple_of(2) {
        return Err(SignalError::EvenWindow);
    }
    if window < 3 {
        return Err(SignalError::WindowTooSmall);
    }
    if window > series.len() {
        return Err(SignalError::WindowTooLarge);
    }
    let n = series.len();
    let half = (window - 1) / 2;
    // Prefix sums make every window mean O(1).
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    prefix.push(acc);
    for &x in series {
        acc += x;
        prefix.push(acc);
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let k = half.min(i).min(n - 1 - i);
        let lo = i - k;
        let hi = i + k + 1;
        let count = T::from_usize(hi - lo).expect("window count fits scalar");
        out.push((prefix[hi] - prefix[lo]) / count);
    }
    Ok(out)
}

/// First derivative over a uniform grid.
///
/// Interior points use central differences `(x[i+1] - x[i-1]) / (2 dt)`.
/// Ends use a one-sided four-point formula chosen so its truncation error
/// has the same leading term as the central difference; this keeps a
/// twice-applied derivative second-order accurate over the whole series.
/// Exact for polynomials up to degree two.
pub fn derivative<T: Real>(series: &[T], dt: T) -> Result<Vec<T>, SignalError> {
    if series.len() < 3 {
        return Err(SignalError::TooShort);
    }
    if !dt.is_finite() || dt <= T::zero() {
        return Err(SignalError::BadTimeStep);
    }
    let n = series.len();
    let two_dt = dt + dt;
    let mut out = Vec::with_capacity(n);
    out.push(forward_edge(series, dt));
    for i in 1..n - 1 {
        out.push((series[i + 1] - series[i - 1]) / two_dt);
    }
    out.push(backward_edge(series, dt));
    Ok(out)
}

fn forward_edge<T: Real>(series: &[T], dt: T) -> T {
    if series.len() >= 4 {
        // (-2 x0 + 7/2 x1 - 2 x2 + 1/2 x3) / dt: second-order one-sided
        // difference with the same +dt^2/6 f''' leading error as the
        // central difference.
        (T::lit(-2.0) * series[0] + T::lit(3.5) * series[1] - T::lit(2.0) * series[2]
            + T::lit(0.5) * series[3])
            / dt
    } else {
        // Three samples: classic second-order one-sided difference.
        (T::lit(-1.5) * series[0] + T::lit(2.0) * series[1] - T::lit(0.5) * series[2]) / dt
    }
}

fn backward_edge<T: Real>(series: &[T], dt: T) -> T {
    let n = series.len();
    if n >= 4 {
        -(T::lit(-2.0) * series[n - 1] + T::lit(3.5) * series[n - 2] - T::lit(2.0) * series[n - 3]
            + T::lit(0.5) * series[n - 4])
            / dt
    } else {
        -(T::lit(-1.5) * series[n - 1] + T::lit(2.0) * series[n - 2] - T::lit(0.5) * series[n - 3])
            / dt
    }
}

/// Slip ratio `f_n / max(f_t, floor)`.
///
/// The floor keeps the ratio finite while the object is gripped but not
/// yet loaded tangentially.
pub fn slip_ratio<T: Real>(f_n: T, f_t: T, ft_floor: T) -> T {
    f_n / f_t.max(ft_floor)
}

/// Friction ratio `f_t / f_n`: the effective coefficient of friction when
/// evaluated at slip. Inputs are magnitudes.
pub fn friction_ratio<T: Real>(f_n: T, f_t: T) -> Result<T, SignalError> {
    if f_n <= T::zero() {
        return Err(SignalError::ZeroNormalForce);
    }
    Ok(f_t / f_n)
}

/// Per-sample conditioned signals derived from a force trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedSeries<T> {
    pub t: Vec<T>,
    /// Moving-average smoothed tangential force.
    pub ft_smooth: Vec<T>,
    /// First derivative of `ft_smooth` (N/s).
    pub dft: Vec<T>,
    /// Second derivative of `ft_smooth` (N/s^2).
    pub d2ft: Vec<T>,
    /// Raw per-sample slip ratio `f_n / max(f_t, floor)`.
    pub sr: Vec<T>,
}

impl<T> Default for DerivedSeries<T> {
    fn default() -> Self {
        Self {
            t: Vec::new(),
            ft_smooth: Vec::new(),
            dft: Vec::new(),
            d2ft: Vec::new(),
            sr: Vec::new(),
        }
    }
}

impl<T> DerivedSeries<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Computes the full derived-series bundle for a trace.
pub fn derive_series<T: Real>(
    trace: &ForceTrace<T>,
    smooth_window: usize,
    ft_floor: T,
) -> Result<DerivedSeries<T>, SignalError> {
    derive_series_from_parts(
        &trace.times(),
        &trace.normal(),
        &trace.tangential(),
        trace.dt(),
        smooth_window,
        ft_floor,
    )
}

/// Same as [`derive_series`] but from raw channel slices, for callers that
/// accumulated samples without a trace container.
pub fn derive_series_from_parts<T: Real>(
    t: &[T],
    f_n: &[T],
    f_t: &[T],
    dt: T,
    smooth_window: usize,
    ft_floor: T,
) -> Result<DerivedSeries<T>, SignalError> {
    assert!(
        t.len() == f_n.len() && t.len() == f_t.len(),
        "channel lengths must agree"
    );
    let ft_smooth = smooth(f_t, smooth_window)?;
    let dft = derivative(&ft_smooth, dt)?;
    let d2ft = derivative(&dft, dt)?;
    let sr = f_n
        .iter()
        .zip(f_t)
        .map(|(&n, &ft)| slip_ratio(n, ft, ft_floor))
        .collect();
    Ok(DerivedSeries {
        t: t.to_vec(),
        ft_smooth,
        dft,
        d2ft,
        sr,
    })
}

/// Slip ratio at the instant of maximum smoothed tangential force within
/// `[window.0, window.1]` (first maximum on ties).
pub fn peak_slip_ratio<T: Real>(
    trace: &ForceTrace<T>,
    derived: &DerivedSeries<T>,
    window: (T, T),
) -> Result<T, SignalError> {
    assert_eq!(
        trace.len(),
        derived.len(),
        "derived series must align with trace"
    );
    let (t0, t1) = window;
    if t0 >= t1 {
        return Err(SignalError::EmptyWindow);
    }
    let mut best: Option<(usize, T)> = None;
    for (i, s) in trace.samples.iter().enumerate() {
        if s.t < t0 || s.t > t1 {
            continue;
        }
        let v = derived.ft_smooth[i];
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    let (idx, _) = best.ok_or(SignalError::EmptyWindow)?;
    Ok(derived.sr[idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{ForceSample, TraceSource};
    use proptest::prelude::*;

    #[test]
    fn smooth_preserves_constant() {
        let xs = vec![2.5f64; 40];
        let out = smooth(&xs, 11).unwrap();
        for v in out {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_keeps_ramp_interior() {
        let xs: Vec<f64> = (0..50).map(|k| 0.1 * k as f64).collect();
        let out = smooth(&xs, 7).unwrap();
        for i in 3..47 {
            assert!((out[i] - xs[i]).abs() < 1e-12, "index {i}");
        }
    }

    #[test]
    fn smooth_spreads_impulse() {
        let mut xs = vec![0.0f64; 9];
        xs[4] = 1.0;
        let out = smooth(&xs, 3).unwrap();
        assert!((out[3] - 1.0 / 3.0).abs() < 1e-12);
        assert!((out[4] - 1.0 / 3.0).abs() < 1e-12);
        assert!((out[5] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(out[0], 0.0);
    }

    #[test]
    fn smooth_rejects_bad_windows() {
        let xs = vec![0.0f64; 10];
        assert_eq!(smooth(&xs, 4).unwrap_err(), SignalError::EvenWindow);
        assert_eq!(smooth(&xs, 1).unwrap_err(), SignalError::WindowTooSmall);
        assert_eq!(smooth(&xs, 11).unwrap_err(), SignalError::WindowTooLarge);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let xs = vec![3.0f64; 20];
        for d in derivative(&xs, 0.01).unwrap() {
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_exact_for_quadratic() {
        // x(t) = 0.5 t^2 -> x'' = 1 exactly, ends included.
        let dt = 1e-3f64;
        let xs: Vec<f64> = (0..1001).map(|k| 0.5 * (k as f64 * dt).powi(2)).collect();
        let d1 = derivative(&xs, dt).unwrap();
        let d2 = derivative(&d1, dt).unwrap();
        for (i, v) in d2.iter().enumerate() {
            assert!((v - 1.0).abs() < 1e-6, "index {i}: {v}");
        }
    }

    #[test]
    fn second_derivative_of_sine_matches_closed_form() {
        let dt = 1e-3f64;
        let xs: Vec<f64> = (0..=1000).map(|k| (k as f64 * dt).sin()).collect();
        let d1 = derivative(&xs, dt).unwrap();
        let d2 = derivative(&d1, dt).unwrap();
        let mut max_err = 0.0f64;
        for (k, v) in d2.iter().enumerate() {
            let expected = -(k as f64 * dt).sin();
            max_err = max_err.max((v - expected).abs());
        }
        assert!(max_err < 1e-5, "max error {max_err}");
    }

    #[test]
    fn derivative_needs_three_samples() {
        assert_eq!(
            derivative(&[1.0f64, 2.0], 0.1).unwrap_err(),
            SignalError::TooShort
        );
    }

    #[test]
    fn slip_ratio_examples() {
        assert_eq!(slip_ratio(3.5f64, 1.75, 0.05), 2.0);
        assert_eq!(slip_ratio(3.5f64, 0.0, 0.05), 70.0);
        let sr = slip_ratio(3.5f64, 0.61, 0.05);
        assert!((sr - 5.737704918032787).abs() < 1e-12);
    }

    #[test]
    fn friction_ratio_examples() {
        assert_eq!(friction_ratio(3.5f64, 0.875).unwrap(), 0.25);
        assert_eq!(friction_ratio(2.0f64, 0.0).unwrap(), 0.0);
        assert!((friction_ratio(3.5f64, 3.325).unwrap() - 0.95).abs() < 1e-12);
        assert_eq!(
            friction_ratio(0.0f64, 1.0).unwrap_err(),
            SignalError::ZeroNormalForce
        );
    }

    fn toy_trace(ft: &[f64]) -> ForceTrace<f64> {
        let samples = ft
            .iter()
            .enumerate()
            .map(|(k, &f_t)| ForceSample {
                t: k as f64 / 1000.0,
                f_n: 3.5,
                f_t,
            })
            .collect();
        ForceTrace::new(samples, 1000.0, TraceSource::Simulated).unwrap()
    }

    #[test]
    fn peak_slip_ratio_finds_tangential_peak() {
        // Tangential force peaks at sample 30 with value 0.61.
        let ft: Vec<f64> = (0..60)
            .map(|k| 0.61 * (1.0 - ((k as f64 - 30.0) / 30.0).powi(2)))
            .collect();
        let trace = toy_trace(&ft);
        let derived = derive_series(&trace, 3, 0.05).unwrap();
        let sr = peak_slip_ratio(&trace, &derived, (0.0, 0.059)).unwrap();
        assert!((sr - 3.5 / 0.61).abs() < 0.05, "sr {sr}");
    }

    #[test]
    fn peak_slip_ratio_degenerate_window() {
        let ft = vec![0.61f64; 50];
        let trace = toy_trace(&ft);
        let derived = derive_series(&trace, 5, 0.05).unwrap();
        let sr = peak_slip_ratio(&trace, &derived, (0.0, 0.049)).unwrap();
        assert!((sr - 3.5 / 0.61).abs() < 1e-9);
    }

    #[test]
    fn peak_slip_ratio_empty_window() {
        let ft = vec![0.61f64; 50];
        let trace = toy_trace(&ft);
        let derived = derive_series(&trace, 5, 0.05).unwrap();
        assert_eq!(
            peak_slip_ratio(&trace, &derived, (1.0, 2.0)).unwrap_err(),
            SignalError::EmptyWindow
        );
        assert_eq!(
            peak_slip_ratio(&trace, &derived, (0.04, 0.01)).unwrap_err(),
            SignalError::EmptyWindow
        );
    }

    proptest! {
        #[test]
        fn smooth_is_linear(
            xs in proptest::collection::vec(-10.0f64..10.0, 9..40),
            a in -3.0f64..3.0,
        ) {
            let scaled: Vec<f64> = xs.iter().map(|x| a * x).collect();
            let s1 = smooth(&xs, 5).unwrap();
            let s2 = smooth(&scaled, 5).unwrap();
            for (u, v) in s1.iter().zip(&s2) {
                prop_assert!((a * u - v).abs() < 1e-9);
            }
        }

        #[test]
        fn smooth_stays_within_bounds(
            xs in proptest::collection::vec(-5.0f64..5.0, 7..30),
        ) {
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for v in smooth(&xs, 7).unwrap() {
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }

        #[test]
        fn derivative_is_linear(
            xs in proptest::collection::vec(-10.0f64..10.0, 4..40),
            ys in proptest::collection::vec(-10.0f64..10.0, 4..40),
        ) {
            let n = xs.len().min(ys.len());
            let xs = &xs[..n];
            let ys = &ys[..n];
            let sum: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x + y).collect();
            let dx = derivative(xs, 0.01).unwrap();
            let dy = derivative(ys, 0.01).unwrap();
            let ds = derivative(&sum, 0.01).unwrap();
            for i in 0..n {
                prop_assert!((dx[i] + dy[i] - ds[i]).abs() < 1e-6);
            }
        }

        #[test]
        fn ratio_reciprocal_identity(
            f_n in 0.1f64..10.0,
            f_t in 0.05f64..10.0,
        ) {
            // Above the floor, slip ratio and friction ratio are inverses.
            let sr = slip_ratio(f_n, f_t, 0.05);
            let fr = friction_ratio(f_n, f_t).unwrap();
            prop_assert!((sr * fr - 1.0).abs() < 1e-9);
        }
    }
}
