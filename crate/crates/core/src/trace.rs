//! Force traces: timestamped normal/tangential force magnitudes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Where a trace came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    Recorded,
    Simulated,
}

/// One sensor sample. Forces are magnitudes (newtons), time is seconds
/// from stream start; sign handling happens at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSample<T> {
    pub t: T,
    pub f_n: T,
    pub f_t: T,
}

/// Reasons a trace is rejected at construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("trace has no samples")]
    Empty,
    #[error("sample {index}: {reason}")]
    InvalidSample { index: usize, reason: String },
    #[error("timestamps not strictly increasing at sample {index}")]
    NonMonotonicTime { index: usize },
    #[error(
        "spacing at sample {index} deviates more than 1% from 1/sample_rate ({actual} vs {nominal})"
    )]
    IrregularSpacing {
        index: usize,
        actual: f64,
        nominal: f64,
    },
    #[error("sample rate must be positive and finite")]
    BadSampleRate,
}

impl<T: Real> ForceSample<T> {
    /// Validates one sample: finite fields, non-negative force magnitudes.
    pub fn new(t: T, f_n: T, f_t: T) -> Result<Self, String> {
        if !t.is_finite() {
            return Err("timestamp must be finite".into());
        }
        if !f_n.is_finite() || !f_t.is_finite() {
            return Err("forces must be finite".into());
        }
        if f_n < T::zero() || f_t < T::zero() {
            return Err("force magnitudes must be >= 0".into());
        }
        Ok(Self { t, f_n, f_t })
    }
}

/// A uniformly sampled force recording plus optional simulation truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceTrace<T> {
    pub samples: Vec<ForceSample<T>>,
    pub sample_rate_hz: T,
    pub source: TraceSource,
    /// Present only for simulated traces.
    pub ground_truth: Option<GroundTruth<T>>,
}

impl<T: Real> ForceTrace<T> {
    /// Builds a trace, enforcing monotone timestamps and near-uniform
    /// spacing (within 1% of `1 / sample_rate_hz`).
    pub fn new(
        samples: Vec<ForceSample<T>>,
        sample_rate_hz: T,
        source: TraceSource,
    ) -> Result<Self, TraceError> {
        if samples.is_empty() {
            return Err(TraceError::Empty);
        }
        if !sample_rate_hz.is_finite() || sample_rate_hz <= T::zero() {
            return Err(TraceError::BadSampleRate);
        }
        for (index, s) in samples.iter().enumerate() {
            ForceSample::new(s.t, s.f_n, s.f_t)
                .map_err(|reason| TraceError::InvalidSample { index, reason })?;
        }
        let nominal = 1.0 / sample_rate_hz.as_f64();
        for index in 1..samples.len() {
            let dt = (samples[index].t - samples[index - 1].t).as_f64();
            if dt <= 0.0 {
                return Err(TraceError::NonMonotonicTime { index });
            }
            if (dt - nominal).abs() > 0.01 * nominal {
                return Err(TraceError::IrregularSpacing {
                    index,
                    actual: dt,
                    nominal,
                });
            }
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            source,
            ground_truth: None,
        })
    }

    pub fn with_ground_truth(mut self, truth: GroundTruth<T>) -> Self {
        self.ground_truth = Some(truth);
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Nominal sample period.
    pub fn dt(&self) -> T {
        T::one() / self.sample_rate_hz
    }

    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn normal(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.f_n).collect()
    }

    pub fn tangential(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.f_t).collect()
    }
}

/// Simulation ground truth attached to synthetic traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth<T> {
    /// Static coefficient of friction of the simulated surface.
    pub mu_s: T,
    /// Kinetic coefficient.
    pub mu_k: T,
    /// Object mass in kilograms.
    pub mass_kg: T,
    /// First instant the static friction capacity falls below the held
    /// load; `None` when the trace never slips.
    pub slip_onset_t: Option<T>,
    /// First instant of fully kinetic sliding; `None` when no slip.
    pub macro_slip_t: Option<T>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, f_n: f64, f_t: f64) -> ForceSample<f64> {
        ForceSample { t, f_n, f_t }
    }

    #[test]
    fn rejects_nan_and_negative() {
        assert!(ForceSample::new(0.0, f64::NAN, 0.0).is_err());
        assert!(ForceSample::new(0.0, 1.0, -0.2).is_err());
        assert!(ForceSample::new(f64::INFINITY, 1.0, 0.2).is_err());
        assert!(ForceSample::new(0.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn empty_trace_rejected() {
        assert_eq!(
            ForceTrace::<f64>::new(vec![], 1000.0, TraceSource::Recorded).unwrap_err(),
            TraceError::Empty
        );
    }

    #[test]
    fn monotone_time_enforced() {
        let samples = vec![sample(0.0, 1.0, 0.0), sample(0.001, 1.0, 0.0), sample(0.001, 1.0, 0.0)];
        match ForceTrace::new(samples, 1000.0, TraceSource::Recorded) {
            Err(TraceError::NonMonotonicTime { index }) => assert_eq!(index, 2),
            other => panic!("expected NonMonotonicTime, got {other:?}"),
        }
    }

    #[test]
    fn spacing_tolerance_enforced() {
        let samples = vec![sample(0.0, 1.0, 0.0), sample(0.0012, 1.0, 0.0)];
        assert!(matches!(
            ForceTrace::new(samples, 1000.0, TraceSource::Recorded),
            Err(TraceError::IrregularSpacing { index: 1, .. })
        ));
    }

    #[test]
    fn uniform_trace_accepted() {
        let samples: Vec<_> = (0..100).map(|k| sample(k as f64 / 1000.0, 2.0, 0.5)).collect();
        let trace = ForceTrace::new(samples, 1000.0, TraceSource::Simulated).unwrap();
        assert_eq!(trace.len(), 100);
        assert_eq!(trace.dt(), 0.001);
    }
}
