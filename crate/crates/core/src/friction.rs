//! Offline friction measurement: find where a lifted object actually let
//! go, read the effective coefficient of friction there, and bin it into
//! the three surface classes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::signal::{self, DerivedSeries, SignalError};
use crate::trace::ForceTrace;

/// Surface class by static coefficient of friction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrictionLevel {
    Low,
    Medium,
    High,
}

impl FrictionLevel {
    pub const ALL: [FrictionLevel; 3] = [FrictionLevel::Low, FrictionLevel::Medium, FrictionLevel::High];

    pub fn as_str(self) -> &'static str {
        match self {
            FrictionLevel::Low => "low",
            FrictionLevel::Medium => "medium",
            FrictionLevel::High => "high",
        }
    }

    /// Index used for confusion-matrix rows/columns.
    pub fn index(self) -> usize {
        match self {
            FrictionLevel::Low => 0,
            FrictionLevel::Medium => 1,
            FrictionLevel::High => 2,
        }
    }
}

/// Class boundary between low and medium friction (inclusive on the
/// medium side).
pub const LOW_MEDIUM_BOUNDARY: f64 = 0.40;
/// Class boundary between medium and high friction (inclusive on the
/// high side).
pub const MEDIUM_HIGH_BOUNDARY: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrictionError {
    #[error("no sustained tangential-force decrease found")]
    NoSlipFound,
    #[error("coefficient of friction must be positive and finite")]
    NonPositiveMu,
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// Parameters of the macro-slip onset rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroSlipParams<T> {
    /// Number of consecutive negative-slope samples that count as a
    /// sustained decrease.
    pub run_len: usize,
    /// How far the smoothed tangential force must fall below its global
    /// maximum before a decrease counts as real. Zero keeps the rule
    /// purely slope-based; noisy recordings want a small positive value.
    pub drop_tolerance: T,
}

impl<T: Real> Default for MacroSlipParams<T> {
    fn default() -> Self {
        Self {
            run_len: 5,
            drop_tolerance: T::zero(),
        }
    }
}

/// Returns the timestamp where the tangential force starts its sustained
/// decrease after the global maximum of the smoothed series.
///
/// "Sustained" means the series never recovers to within
/// `drop_tolerance` of the maximum afterwards, and the slope stays
/// negative for `run_len` consecutive samples. Monotone or recovering
/// traces yield [`FrictionError::NoSlipFound`].
pub fn detect_macro_slip_onset<T: Real>(
    trace: &ForceTrace<T>,
    derived: &DerivedSeries<T>,
    params: &MacroSlipParams<T>,
) -> Result<T, FrictionError> {
    assert_eq!(trace.len(), derived.len(), "derived series must align with trace");
    let n = derived.len();
    if n == 0 {
        return Err(FrictionError::NoSlipFound);
    }
    let ft = &derived.ft_smooth;
    let mut i_max = 0;
    for i in 1..n {
        if ft[i] > ft[i_max] {
            i_max = i;
        }
    }
    // Numerical slack so a flat noise-free plateau (equal up to rounding)
    // counts as "at the maximum" throughout.
    let eps = T::epsilon().sqrt() * (T::one() + ft[i_max].abs());
    let level = ft[i_max] - params.drop_tolerance - eps;
    let mut last_at_level = i_max;
    for (i, &v) in ft.iter().enumerate().skip(i_max) {
        if v >= level {
            last_at_level = i;
        }
    }
    if last_at_level + params.run_len >= n {
        return Err(FrictionError::NoSlipFound);
    }
    let start = last_at_level + 1;
    for j in start..=n - params.run_len {
        if derived.dft[j..j + params.run_len].iter().all(|&d| d < T::zero()) {
            return Ok(derived.t[j]);
        }
    }
    Err(FrictionError::NoSlipFound)
}

/// Options for [`measure_static_cof`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CofParams<T> {
    /// Smoothing window used to condition the tangential force.
    pub smooth_window: usize,
    /// Tangential floor for the derived slip-ratio channel.
    pub ft_floor_n: T,
    pub onset: MacroSlipParams<T>,
}

impl<T: Real> Default for CofParams<T> {
    fn default() -> Self {
        Self {
            smooth_window: 11,
            ft_floor_n: T::lit(0.05),
            onset: MacroSlipParams::default(),
        }
    }
}

/// A static coefficient-of-friction measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CofMeasurement<T> {
    pub mu_s: T,
    /// Where the sustained decrease began.
    pub onset_t: T,
}

/// Measures the static coefficient of friction of a recorded or simulated
/// lift: the ratio of tangential to normal force at the instant the
/// tangential force starts its sustained decrease.
pub fn measure_static_cof<T: Real>(
    trace: &ForceTrace<T>,
    params: &CofParams<T>,
) -> Result<CofMeasurement<T>, FrictionError> {
    let derived = signal::derive_series(trace, params.smooth_window, params.ft_floor_n)?;
    let onset_t = detect_macro_slip_onset(trace, &derived, &params.onset)?;
    let idx = trace
        .samples
        .iter()
        .position(|s| s.t == onset_t)
        .expect("onset timestamp comes from the trace");
    let s = trace.samples[idx];
    let mu_s = signal::friction_ratio(s.f_n, s.f_t)?;
    Ok(CofMeasurement { mu_s, onset_t })
}

/// Bins a measured coefficient into the three surface classes.
pub fn classify_friction<T: Real>(mu: T) -> Result<FrictionLevel, FrictionError> {
    if !mu.is_finite() || mu <= T::zero() {
        return Err(FrictionError::NonPositiveMu);
    }
    if mu < T::lit(LOW_MEDIUM_BOUNDARY) {
        Ok(FrictionLevel::Low)
    } else if mu < T::lit(MEDIUM_HIGH_BOUNDARY) {
        Ok(FrictionLevel::Medium)
    } else {
        Ok(FrictionLevel::High)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::derive_series;
    use crate::trace::{ForceSample, TraceSource};

    #[test]
    fn classification_bins() {
        assert_eq!(classify_friction(0.25f64).unwrap(), FrictionLevel::Low);
        assert_eq!(classify_friction(0.55f64).unwrap(), FrictionLevel::Medium);
        assert_eq!(classify_friction(0.95f64).unwrap(), FrictionLevel::High);
        // Boundaries are inclusive upward.
        assert_eq!(classify_friction(0.40f64).unwrap(), FrictionLevel::Medium);
        assert_eq!(classify_friction(0.75f64).unwrap(), FrictionLevel::High);
    }

    #[test]
    fn degenerate_mu_rejected() {
        assert_eq!(classify_friction(0.0f64).unwrap_err(), FrictionError::NonPositiveMu);
        assert_eq!(classify_friction(-0.3f64).unwrap_err(), FrictionError::NonPositiveMu);
        assert_eq!(
            classify_friction(f64::NAN).unwrap_err(),
            FrictionError::NonPositiveMu
        );
    }

    fn trace_from_ft(ft: &[f64], f_n: f64) -> ForceTrace<f64> {
        let samples = ft
            .iter()
            .enumerate()
            .map(|(k, &f_t)| ForceSample {
                t: k as f64 / 1000.0,
                f_n,
                f_t,
            })
            .collect();
        ForceTrace::new(samples, 1000.0, TraceSource::Simulated).unwrap()
    }

    #[test]
    fn onset_found_at_plateau_end() {
        // Rise to 1.0 over 200 samples, plateau to sample 600, then decay.
        let ft: Vec<f64> = (0..1000)
            .map(|k| {
                if k < 200 {
                    k as f64 / 200.0
                } else if k < 600 {
                    1.0
                } else {
                    (1.0 - (k - 600) as f64 / 500.0).max(0.0)
                }
            })
            .collect();
        let trace = trace_from_ft(&ft, 3.5);
        let derived = derive_series(&trace, 11, 0.05).unwrap();
        let onset = detect_macro_slip_onset(&trace, &derived, &MacroSlipParams::default()).unwrap();
        // True decay start at t = 0.600; smoothing pulls the detected
        // start at most half a window early.
        assert!((onset - 0.600).abs() < 0.010, "onset {onset}");
    }

    #[test]
    fn monotone_rise_has_no_onset() {
        let ft: Vec<f64> = (0..500).map(|k| k as f64 * 1e-3).collect();
        let trace = trace_from_ft(&ft, 3.5);
        let derived = derive_series(&trace, 11, 0.05).unwrap();
        assert_eq!(
            detect_macro_slip_onset(&trace, &derived, &MacroSlipParams::default()).unwrap_err(),
            FrictionError::NoSlipFound
        );
    }

    #[test]
    fn single_dip_is_not_an_onset() {
        let mut ft: Vec<f64> = (0..500).map(|k| k as f64 * 1e-3).collect();
        ft[250] -= 0.2;
        let trace = trace_from_ft(&ft, 3.5);
        let derived = derive_series(&trace, 11, 0.05).unwrap();
        assert_eq!(
            detect_macro_slip_onset(&trace, &derived, &MacroSlipParams::default()).unwrap_err(),
            FrictionError::NoSlipFound
        );
    }

    #[test]
    fn cof_on_synthetic_plateau() {
        // f_t holds at 0.875 N under f_n = 3.5 N, then decays: mu = 0.25.
        let ft: Vec<f64> = (0..2000)
            .map(|k| {
                if k < 300 {
                    0.875 * k as f64 / 300.0
                } else if k < 1200 {
                    0.875
                } else {
                    (0.875 - (k - 1200) as f64 * 5e-4).max(0.0)
                }
            })
            .collect();
        let trace = trace_from_ft(&ft, 3.5);
        let m = measure_static_cof(&trace, &CofParams::default()).unwrap();
        assert!((m.mu_s - 0.25).abs() < 0.005, "mu {}", m.mu_s);
        assert!((m.onset_t - 1.2).abs() < 0.010, "onset {}", m.onset_t);
    }

    #[test]
    fn prepended_idle_does_not_change_mu() {
        let decay = |k: usize| -> f64 {
            if k < 300 {
                0.875 * k as f64 / 300.0
            } else if k < 1200 {
                0.875
            } else {
                (0.875 - (k - 1200) as f64 * 5e-4).max(0.0)
            }
        };
        let short: Vec<f64> = (0..2000).map(decay).collect();
        let mut long = vec![0.0f64; 500];
        long.extend_from_slice(&short);
        let mu_short = measure_static_cof(&trace_from_ft(&short, 3.5), &CofParams::default())
            .unwrap()
            .mu_s;
        let mu_long = measure_static_cof(&trace_from_ft(&long, 3.5), &CofParams::default())
            .unwrap()
            .mu_s;
        assert!((mu_short - mu_long).abs() < 1e-9);
    }
}
