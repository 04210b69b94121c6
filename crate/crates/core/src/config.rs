//! Detector configuration.
//!
//! Every tunable constant used by the streaming detector lives here, under
//! the same names the on-disk config files use. Defaults match the
//! reference hardware setup; tests and the CLI override fields as needed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Configuration rejected by [`DetectorConfig::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid config field `{field}`: {reason}")]
pub struct ConfigError {
    /// Name of the offending field as it appears in config files.
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

/// All constants consumed by the slip detector.
///
/// Drive intensities (`u_min`, `u_max`, `f_peak`, `contact_cue_intensity`)
/// are in the 0-255 motor drive scale; forces are newtons, times seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig<T> {
    /// Normal force that counts as object contact and fires the one-shot
    /// contact cue.
    #[serde(rename = "contact_threshold_N")]
    pub contact_threshold_n: T,
    /// Grip force the protocol servoes to before lifting.
    #[serde(rename = "grip_target_N")]
    pub grip_target_n: T,
    /// Threshold on the second derivative of smoothed tangential force
    /// (N/s^2). Crossing it while armed signals slip.
    pub accel_threshold: T,
    /// Delay between the last normal-force peak and the start of slip
    /// monitoring.
    pub arming_delay_s: T,
    /// Threshold on the absolute deviation of the slip ratio from its
    /// captured peak value.
    pub sr_diff_threshold: T,
    /// Smallest nonzero drive intensity the motor responds to.
    pub u_min: T,
    /// Largest drive intensity.
    pub u_max: T,
    /// Peak drive constant used by the intensity equations.
    pub f_peak: T,
    /// Scale constant for the slip-ratio intensity path.
    pub k_const: T,
    /// Initial control gain applied to the acceleration intensity path.
    #[serde(rename = "K_gain")]
    pub k_gain: T,
    /// Multiplier applied to the gain whenever an emitted intensity
    /// saturates at `u_max`; keeps the drive from oscillating at the rail.
    pub gain_backoff: T,
    /// Floor for the tangential force in ratio denominators.
    #[serde(rename = "ft_floor_N")]
    pub ft_floor_n: T,
    /// Moving-average window (samples, odd) applied to tangential force
    /// before differentiation.
    pub smooth_window: usize,
    /// Nominal duration of the contact cue pulse. Carried for consumers
    /// that shape the pulse; the detector emits a single cue command.
    pub contact_cue_duration_s: T,
    /// Drive intensity of the contact cue.
    pub contact_cue_intensity: T,
    /// A new normal-force maximum re-arms the monitoring timer only when
    /// it exceeds the previous maximum by more than this guard, so sensor
    /// noise on a held grip cannot push the timer back indefinitely.
    #[serde(rename = "peak_hysteresis_N")]
    pub peak_hysteresis_n: T,
}

impl<T: Real> Default for DetectorConfig<T> {
    fn default() -> Self {
        Self {
            contact_threshold_n: T::lit(0.5),
            grip_target_n: T::lit(3.5),
            accel_threshold: T::lit(0.3),
            arming_delay_s: T::lit(10.0),
            sr_diff_threshold: T::lit(0.5),
            u_min: T::lit(30.0),
            u_max: T::lit(255.0),
            f_peak: T::lit(255.0),
            k_const: T::lit(1.0),
            k_gain: T::lit(1.0),
            gain_backoff: T::lit(0.5),
            ft_floor_n: T::lit(0.05),
            smooth_window: 11,
            contact_cue_duration_s: T::lit(0.1),
            contact_cue_intensity: T::lit(200.0),
            peak_hysteresis_n: T::lit(0.02),
        }
    }
}

impl<T: Real> DetectorConfig<T> {
    /// Checks every field; returns the first violation found.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite: [(&'static str, T); 14] = [
            ("contact_threshold_N", self.contact_threshold_n),
            ("grip_target_N", self.grip_target_n),
            ("accel_threshold", self.accel_threshold),
            ("arming_delay_s", self.arming_delay_s),
            ("sr_diff_threshold", self.sr_diff_threshold),
            ("u_min", self.u_min),
            ("u_max", self.u_max),
            ("f_peak", self.f_peak),
            ("k_const", self.k_const),
            ("K_gain", self.k_gain),
            ("gain_backoff", self.gain_backoff),
            ("ft_floor_N", self.ft_floor_n),
            ("contact_cue_duration_s", self.contact_cue_duration_s),
            ("contact_cue_intensity", self.contact_cue_intensity),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(ConfigError::new(name, "must be finite"));
            }
        }
        if self.contact_threshold_n <= T::zero() {
            return Err(ConfigError::new("contact_threshold_N", "must be > 0"));
        }
        if self.grip_target_n < self.contact_threshold_n {
            return Err(ConfigError::new(
                "grip_target_N",
                "must be >= contact_threshold_N",
            ));
        }
        if self.accel_threshold <= T::zero() {
            return Err(ConfigError::new("accel_threshold", "must be > 0"));
        }
        if self.arming_delay_s < T::zero() {
            return Err(ConfigError::new("arming_delay_s", "must be >= 0"));
        }
        if self.sr_diff_threshold <= T::zero() {
            return Err(ConfigError::new("sr_diff_threshold", "must be > 0"));
        }
        if self.u_min <= T::zero() {
            return Err(ConfigError::new("u_min", "must be > 0"));
        }
        if self.u_min >= self.u_max {
            return Err(ConfigError::new("u_min", "must be < u_max"));
        }
        if self.u_max > self.f_peak {
            return Err(ConfigError::new("u_max", "must be <= f_peak"));
        }
        if self.k_const <= T::zero() {
            return Err(ConfigError::new("k_const", "must be > 0"));
        }
        if self.k_gain <= T::zero() {
            return Err(ConfigError::new("K_gain", "must be > 0"));
        }
        if self.gain_backoff <= T::zero() || self.gain_backoff >= T::one() {
            return Err(ConfigError::new("gain_backoff", "must be in (0, 1)"));
        }
        if self.ft_floor_n <= T::zero() {
            return Err(ConfigError::new("ft_floor_N", "must be > 0"));
        }
        if self.smooth_window < 3 || self.smooth_window.is_multiple_of(2) {
            return Err(ConfigError::new("smooth_window", "must be odd and >= 3"));
        }
        if self.contact_cue_duration_s < T::zero() {
            return Err(ConfigError::new("contact_cue_duration_s", "must be >= 0"));
        }
        let cue = self.contact_cue_intensity;
        if cue != T::zero() && (cue < self.u_min || cue > self.u_max) {
            return Err(ConfigError::new(
                "contact_cue_intensity",
                "must be 0 or within [u_min, u_max]",
            ));
        }
        if !self.peak_hysteresis_n.is_finite() || self.peak_hysteresis_n < T::zero() {
            return Err(ConfigError::new("peak_hysteresis_N", "must be >= 0"));
        }
        Ok(())
    }

    /// Validating constructor for call chains.
    pub fn validated(self) -> Result<Self, ConfigError> {
        self.validate()?;
        Ok(self)
    }

    /// Streaming delay of the smoothing stage, in samples.
    pub fn smoothing_delay_samples(&self) -> usize {
        (self.smooth_window - 1) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        DetectorConfig::<f64>::default().validate().unwrap();
        DetectorConfig::<f32>::default().validate().unwrap();
    }

    #[test]
    fn default_values_pinned() {
        let cfg = DetectorConfig::<f64>::default();
        assert_eq!(cfg.contact_threshold_n, 0.5);
        assert_eq!(cfg.grip_target_n, 3.5);
        assert_eq!(cfg.accel_threshold, 0.3);
        assert_eq!(cfg.arming_delay_s, 10.0);
        assert_eq!(cfg.sr_diff_threshold, 0.5);
        assert_eq!(cfg.u_min, 30.0);
        assert_eq!(cfg.u_max, 255.0);
        assert_eq!(cfg.f_peak, 255.0);
        assert_eq!(cfg.smooth_window, 11);
        assert_eq!(cfg.smoothing_delay_samples(), 5);
    }

    #[test]
    fn swapped_drive_bounds_rejected() {
        let cfg = DetectorConfig::<f64> {
            u_min: 300.0,
            u_max: 255.0,
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.field, "u_min");
    }

    #[test]
    fn even_window_rejected() {
        let cfg = DetectorConfig::<f64> {
            smooth_window: 10,
            ..Default::default()
        };
        assert_eq!(cfg.validate().unwrap_err().field, "smooth_window");
    }

    #[test]
    fn backoff_must_shrink() {
        let cfg = DetectorConfig::<f64> {
            gain_backoff: 1.0,
            ..Default::default()
        };
        assert_eq!(cfg.validate().unwrap_err().field, "gain_backoff");
    }

    #[test]
    fn cue_intensity_zero_or_in_range() {
        let silent = DetectorConfig::<f64> {
            contact_cue_intensity: 0.0,
            ..DetectorConfig::default()
        };
        silent.validate().unwrap();
        let weak = DetectorConfig::<f64> {
            contact_cue_intensity: 10.0,
            ..DetectorConfig::default()
        };
        assert_eq!(weak.validate().unwrap_err().field, "contact_cue_intensity");
    }

    #[test]
    fn config_file_field_names_stable() {
        let json = serde_json::to_string(&DetectorConfig::<f64>::default()).unwrap();
        for key in [
            "contact_threshold_N",
            "grip_target_N",
            "K_gain",
            "ft_floor_N",
            "peak_hysteresis_N",
            "smooth_window",
        ] {
            assert!(json.contains(key), "missing key {key} in {json}");
        }
    }
}
