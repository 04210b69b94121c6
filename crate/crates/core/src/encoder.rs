//! Maps slip measurements to vibrotactile drive intensities.
//!
//! All paths clamp nonzero outputs into `[u_min, u_max]` so the motor
//! never receives a drive below its response floor or above its rail.
//! Intensity scales inversely with the captured peak slip ratio, which is
//! what makes slippery surfaces feel weaker than grippy ones.

use thiserror::Error;

use crate::config::DetectorConfig;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EncoderError {
    #[error("delta_a has the wrong sign for this branch")]
    WrongBranch,
    #[error("combined intensity needs a nonzero delta_a")]
    ZeroDelta,
    #[error("peak slip ratio must be positive")]
    NonPositiveSrPeak,
}

/// Inputs shared by the intensity equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityInputs<T> {
    /// Signed distance of the tangential-force acceleration from its
    /// threshold: `accel_threshold - d2ft`. Negative once the
    /// acceleration has crossed the threshold.
    pub delta_a: T,
    /// Peak slip ratio captured when monitoring armed (> 0).
    pub sr_peak: T,
    /// Peak drive constant.
    pub f_peak: T,
    /// Scale constant for the slip-ratio path.
    pub k_const: T,
    /// Smallest nonzero drive.
    pub u_min: T,
    /// Largest drive.
    pub u_max: T,
}

impl<T: Real> IntensityInputs<T> {
    /// Bundles the encoder constants from a detector config with the
    /// per-sample measurement.
    pub fn from_config(cfg: &DetectorConfig<T>, delta_a: T, sr_peak: T) -> Self {
        Self {
            delta_a,
            sr_peak,
            f_peak: cfg.f_peak,
            k_const: cfg.k_const,
            u_min: cfg.u_min,
            u_max: cfg.u_max,
        }
    }

    fn check_sr_peak(&self) -> Result<(), EncoderError> {
        if self.sr_peak <= T::zero() {
            return Err(EncoderError::NonPositiveSrPeak);
        }
        Ok(())
    }
}

/// Clamps a raw drive value into the usable band.
pub fn clamp_drive<T: Real>(raw: T, u_min: T, u_max: T) -> T {
    raw.min(u_max).max(u_min)
}

/// Unclamped acceleration-excess drive: `f_peak / (sr_peak * |delta_a|)`
/// for `delta_a < 0`. Exposed so callers can apply a control gain before
/// clamping.
pub fn accel_excess_raw<T: Real>(inputs: &IntensityInputs<T>) -> Result<T, EncoderError> {
    inputs.check_sr_peak()?;
    if inputs.delta_a >= T::zero() {
        return Err(EncoderError::WrongBranch);
    }
    Ok(inputs.f_peak / (inputs.sr_peak * -inputs.delta_a))
}

/// Intensity once the tangential-force acceleration has crossed its
/// threshold (`delta_a < 0`): inversely proportional to the overshoot and
/// to the peak slip ratio, clamped into `[u_min, u_max]`.
pub fn accel_excess_intensity<T: Real>(inputs: &IntensityInputs<T>) -> Result<T, EncoderError> {
    let raw = accel_excess_raw(inputs)?;
    Ok(clamp_drive(raw, inputs.u_min, inputs.u_max))
}

/// Intensity while the acceleration is still below its threshold
/// (`delta_a > 0`): proportional to the remaining margin, scaled down by
/// the peak slip ratio, clamped into `[u_min, u_max]`.
pub fn accel_margin_intensity<T: Real>(inputs: &IntensityInputs<T>) -> Result<T, EncoderError> {
    inputs.check_sr_peak()?;
    if inputs.delta_a <= T::zero() {
        return Err(EncoderError::WrongBranch);
    }
    Ok(clamp_drive(
        inputs.f_peak * inputs.delta_a / inputs.sr_peak,
        inputs.u_min,
        inputs.u_max,
    ))
}

/// Combined acceleration intensity: evaluates the excess branch at
/// `-|delta_a|` and the margin branch at `+|delta_a|`, and returns the
/// smaller drive.
pub fn combined_accel_intensity<T: Real>(inputs: &IntensityInputs<T>) -> Result<T, EncoderError> {
    inputs.check_sr_peak()?;
    if inputs.delta_a == T::zero() {
        return Err(EncoderError::ZeroDelta);
    }
    let mag = inputs.delta_a.abs();
    let low = accel_excess_intensity(&IntensityInputs {
        delta_a: -mag,
        ..*inputs
    })?;
    let high = accel_margin_intensity(&IntensityInputs {
        delta_a: mag,
        ..*inputs
    })?;
    Ok(low.min(high))
}

/// Slip-ratio path: fires only when the slip ratio has deviated from its
/// captured peak by at least `threshold`; the drive `f_peak * k / sr_peak`
/// is clamped into `[u_min, u_max]`. Below threshold the motor stays
/// silent (0).
pub fn slip_ratio_intensity<T: Real>(
    inputs: &IntensityInputs<T>,
    delta_sr: T,
    threshold: T,
) -> Result<T, EncoderError> {
    inputs.check_sr_peak()?;
    if delta_sr < threshold {
        return Ok(T::zero());
    }
    Ok(clamp_drive(
        inputs.f_peak * inputs.k_const / inputs.sr_peak,
        inputs.u_min,
        inputs.u_max,
    ))
}

/// Slip-ratio drive with the clamp bounds applied in inverted roles
/// (`min` against the floor, `max` against the ceiling). Degenerate: the
/// result is always `u_min`. Kept only so the difference against
/// [`slip_ratio_intensity`] stays documented and testable.
pub fn slip_ratio_intensity_inverted_clamp<T: Real>(
    inputs: &IntensityInputs<T>,
) -> Result<T, EncoderError> {
    inputs.check_sr_peak()?;
    let raw = inputs.f_peak * inputs.k_const / inputs.sr_peak;
    Ok(inputs.u_min.min(raw.max(inputs.u_max)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs(delta_a: f64, sr_peak: f64) -> IntensityInputs<f64> {
        IntensityInputs {
            delta_a,
            sr_peak,
            f_peak: 255.0,
            k_const: 1.0,
            u_min: 30.0,
            u_max: 255.0,
        }
    }

    #[test]
    fn excess_branch_examples() {
        assert_eq!(accel_excess_intensity(&inputs(-1.0, 1.0)).unwrap(), 255.0);
        assert_eq!(accel_excess_intensity(&inputs(-100.0, 5.74)).unwrap(), 30.0);
        assert_eq!(accel_excess_intensity(&inputs(-2.0, 2.0)).unwrap(), 63.75);
        assert_eq!(
            accel_excess_intensity(&inputs(0.5, 1.0)).unwrap_err(),
            EncoderError::WrongBranch
        );
    }

    #[test]
    fn margin_branch_examples() {
        assert_eq!(accel_margin_intensity(&inputs(0.3, 1.0)).unwrap(), 76.5);
        assert_eq!(accel_margin_intensity(&inputs(10.0, 1.0)).unwrap(), 255.0);
        assert_eq!(accel_margin_intensity(&inputs(0.001, 5.0)).unwrap(), 30.0);
        assert_eq!(
            accel_margin_intensity(&inputs(-1.0, 1.0)).unwrap_err(),
            EncoderError::WrongBranch
        );
    }

    #[test]
    fn combined_takes_smaller_drive() {
        assert_eq!(combined_accel_intensity(&inputs(1.0, 1.0)).unwrap(), 255.0);
        assert_eq!(combined_accel_intensity(&inputs(0.5, 2.0)).unwrap(), 63.75);
        assert_eq!(combined_accel_intensity(&inputs(-3.0, 2.0)).unwrap(), 42.5);
        assert_eq!(
            combined_accel_intensity(&inputs(0.0, 1.0)).unwrap_err(),
            EncoderError::ZeroDelta
        );
    }

    #[test]
    fn slip_ratio_path_examples() {
        let i = inputs(0.0, 2.38);
        assert_eq!(slip_ratio_intensity(&i, 0.4, 0.5).unwrap(), 0.0);
        let v = slip_ratio_intensity(&i, 0.6, 0.5).unwrap();
        assert!((v - 255.0 / 2.38).abs() < 1e-9, "got {v}");
        let i = inputs(0.0, 5.74);
        let v = slip_ratio_intensity(&i, 0.5, 0.5).unwrap();
        assert!((v - 255.0 / 5.74).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn inverted_clamp_is_degenerate() {
        for sr in [0.1, 1.0, 2.38, 5.74, 100.0] {
            let v = slip_ratio_intensity_inverted_clamp(&inputs(0.0, sr)).unwrap();
            assert_eq!(v, 30.0);
        }
    }

    #[test]
    fn nonpositive_sr_peak_rejected() {
        assert_eq!(
            accel_excess_intensity(&inputs(-1.0, 0.0)).unwrap_err(),
            EncoderError::NonPositiveSrPeak
        );
    }

    proptest! {
        #[test]
        fn nonzero_outputs_stay_in_band(
            delta_a in prop::num::f64::NORMAL.prop_filter("nonzero", |x| *x != 0.0 && x.abs() < 1e12),
            sr_peak in 1e-3f64..1e3,
        ) {
            let i = inputs(delta_a, sr_peak);
            let v = combined_accel_intensity(&i).unwrap();
            prop_assert!((30.0..=255.0).contains(&v));
        }

        #[test]
        fn excess_drive_weakens_with_overshoot(
            a1 in 0.01f64..50.0,
            factor in 1.01f64..10.0,
            sr_peak in 0.1f64..10.0,
        ) {
            let weak = accel_excess_intensity(&inputs(-(a1 * factor), sr_peak)).unwrap();
            let strong = accel_excess_intensity(&inputs(-a1, sr_peak)).unwrap();
            prop_assert!(weak <= strong);
        }

        #[test]
        fn slip_ratio_drive_weakens_with_sr_peak(
            sr1 in 0.1f64..50.0,
            factor in 1.01f64..10.0,
        ) {
            let weak = slip_ratio_intensity(&inputs(0.0, sr1 * factor), 1.0, 0.5).unwrap();
            let strong = slip_ratio_intensity(&inputs(0.0, sr1), 1.0, 0.5).unwrap();
            prop_assert!(weak <= strong);
        }
    }
}
