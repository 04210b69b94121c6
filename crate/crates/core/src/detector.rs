//! Streaming slip detector and vibration-command generator.
//!
//! Samples go in one at a time; phase changes, slip events, and per-sample
//! drive commands come out. Smoothing and the two derivative stages give
//! the decision pipeline a fixed lag of `(window - 1) / 2 + 2` samples:
//! a decision made while consuming sample `i` looks at the conditioned
//! signals centered on sample `i - lag`, and any resulting command is
//! stamped with the current sample time.

use std::collections::VecDeque;

use thiserror::Error;

use crate::config::{ConfigError, DetectorConfig};
use crate::encoder::{self, IntensityInputs};
use crate::scalar::Real;
use crate::session::{
    CommandCause, Phase, PhaseChange, SessionLog, SlipEvent, TriggerKind, VibrationCommand,
};
use crate::signal::{self, DerivedSeries};
use crate::trace::{ForceSample, ForceTrace};

/// Fraction of the grip target that counts as "holding".
const HOLD_ENTRY_FRACTION: f64 = 0.95;
/// How often the running window sum is recomputed exactly, to stop
/// incremental rounding drift on long sessions.
const SUM_REFRESH_INTERVAL: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectorError {
    #[error("sample {index} (t = {t}) does not advance the timestamp")]
    NonMonotoneTimestamp { index: usize, t: f64 },
    #[error("sample {index} invalid: {reason}")]
    InvalidSample { index: usize, reason: String },
    #[error("no samples were processed")]
    EmptySession,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// What one processed sample produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput<T> {
    /// Phase after the sample was absorbed.
    pub phase: Phase,
    pub command: Option<VibrationCommand<T>>,
    pub event: Option<SlipEvent<T>>,
}

/// Smoothed value re-attached to its center sample.
#[derive(Clone, Copy)]
struct Center<T> {
    t: T,
    sm: T,
    f_n: T,
    f_t: T,
}

/// First-derivative value at a center sample.
#[derive(Clone, Copy)]
struct Slope<T> {
    t: T,
    dft: T,
    sm: T,
    f_n: T,
    f_t: T,
}

/// Fully conditioned signals at the decision index.
#[derive(Clone, Copy)]
struct Decision<T> {
    d2: T,
    sr: T,
    sm: T,
    f_t: T,
}

pub struct SlipDetector<T: Real> {
    cfg: DetectorConfig<T>,
    half: usize,

    // Complete history, kept for the canonical offline recompute.
    t_hist: Vec<T>,
    fn_hist: Vec<T>,
    ft_hist: Vec<T>,

    // Streaming pipeline.
    window: VecDeque<ForceSample<T>>,
    window_sum: T,
    pushes: u64,
    centers: VecDeque<Center<T>>,
    slopes: VecDeque<Slope<T>>,

    // Grip state machine.
    phase: Phase,
    log: SessionLog<T>,
    cue_until: Option<T>,
    /// Normal-force benchmark the arming timer is measured from.
    hold_bench: T,
    /// When the benchmark last advanced.
    peak_time: T,
    /// Running (smoothed tangential max, slip ratio there) while holding.
    sr_best: Option<(T, T)>,
    sr_peak: Option<T>,
    gain: T,
    last_cause: CommandCause,
}

impl<T: Real> SlipDetector<T> {
    pub fn new(cfg: DetectorConfig<T>) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let half = cfg.smoothing_delay_samples();
        let gain = cfg.k_gain;
        Ok(Self {
            cfg,
            half,
            t_hist: Vec::new(),
            fn_hist: Vec::new(),
            ft_hist: Vec::new(),
            window: VecDeque::new(),
            window_sum: T::zero(),
            pushes: 0,
            centers: VecDeque::new(),
            slopes: VecDeque::new(),
            phase: Phase::Idle,
            log: SessionLog::default(),
            cue_until: None,
            hold_bench: T::zero(),
            peak_time: T::zero(),
            sr_best: None,
            sr_peak: None,
            gain,
            last_cause: CommandCause::Silent,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Slip-ratio peak captured at arming, if the session got that far.
    pub fn sr_peak(&self) -> Option<T> {
        self.sr_peak
    }

    /// Current acceleration-path gain (starts at the configured value and
    /// backs off whenever a ceiling-level command is emitted).
    pub fn gain(&self) -> T {
        self.gain
    }

    pub fn log(&self) -> &SessionLog<T> {
        &self.log
    }

    /// Absorbs one sample and reports what it caused.
    pub fn step(&mut self, sample: ForceSample<T>) -> Result<StepOutput<T>, DetectorError> {
        let index = self.t_hist.len();
        self.validate_sample(index, sample)?;
        self.t_hist.push(sample.t);
        self.fn_hist.push(sample.f_n);
        self.ft_hist.push(sample.f_t);

        let decision = self.advance_pipeline(sample);
        let mut out = StepOutput {
            phase: self.phase,
            command: None,
            event: None,
        };
        self.transition(sample, decision, &mut out);
        out.phase = self.phase;
        Ok(out)
    }

    /// Closes the session: recomputes the conditioned signals offline over
    /// the full history (so edge samples get proper shrunken-window
    /// treatment) and hands the log over.
    pub fn finish(mut self) -> Result<SessionLog<T>, DetectorError> {
        let n = self.t_hist.len();
        if n == 0 {
            return Err(DetectorError::EmptySession);
        }
        let w_max = if n % 2 == 1 { n } else { n - 1 };
        let w_eff = self.cfg.smooth_window.min(w_max);
        self.log.derived = if n >= 3 && w_eff >= 3 {
            let dt = median_dt(&self.t_hist);
            signal::derive_series_from_parts(
                &self.t_hist,
                &self.fn_hist,
                &self.ft_hist,
                dt,
                w_eff,
                self.cfg.ft_floor_n,
            )
            .expect("window and length are pre-checked")
        } else {
            DerivedSeries::default()
        };
        Ok(self.log)
    }

    fn validate_sample(&self, index: usize, s: ForceSample<T>) -> Result<(), DetectorError> {
        if !(s.t.is_finite() && s.f_n.is_finite() && s.f_t.is_finite()) {
            return Err(DetectorError::InvalidSample {
                index,
                reason: "non-finite field".into(),
            });
        }
        if s.f_n < T::zero() || s.f_t < T::zero() {
            return Err(DetectorError::InvalidSample {
                index,
                reason: "force magnitudes must be non-negative".into(),
            });
        }
        if let Some(&last) = self.t_hist.last() {
            if s.t <= last {
                return Err(DetectorError::NonMonotoneTimestamp {
                    index,
                    t: s.t.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Pushes a raw sample through smoothing and both derivative stages.
    /// Returns the decision-point signals once the pipeline is warm.
    fn advance_pipeline(&mut self, sample: ForceSample<T>) -> Option<Decision<T>> {
        let w = self.cfg.smooth_window;
        self.window.push_back(sample);
        self.window_sum += sample.f_t;
        if self.window.len() > w {
            let old = self.window.pop_front().expect("window non-empty");
            self.window_sum -= old.f_t;
        }
        self.pushes += 1;
        if self.pushes.is_multiple_of(SUM_REFRESH_INTERVAL) {
            self.window_sum = self.window.iter().map(|s| s.f_t).sum();
        }
        if self.window.len() < w {
            return None;
        }

        let center = self.window[self.half];
        let sm = self.window_sum / T::from_usize(w).expect("window fits scalar");
        self.centers.push_back(Center {
            t: center.t,
            sm,
            f_n: center.f_n,
            f_t: center.f_t,
        });
        if self.centers.len() > 3 {
            self.centers.pop_front();
        }
        if self.centers.len() < 3 {
            return None;
        }
        let (a, b, c) = (self.centers[0], self.centers[1], self.centers[2]);
        self.slopes.push_back(Slope {
            t: b.t,
            dft: (c.sm - a.sm) / (c.t - a.t),
            sm: b.sm,
            f_n: b.f_n,
            f_t: b.f_t,
        });
        if self.slopes.len() > 3 {
            self.slopes.pop_front();
        }
        if self.slopes.len() < 3 {
            return None;
        }
        let (p, q, r) = (self.slopes[0], self.slopes[1], self.slopes[2]);
        Some(Decision {
            d2: (r.dft - p.dft) / (r.t - p.t),
            sr: signal::slip_ratio(q.f_n, q.f_t, self.cfg.ft_floor_n),
            sm: q.sm,
            f_t: q.f_t,
        })
    }

    fn set_phase(&mut self, t: T, phase: Phase) {
        debug_assert!(phase > self.phase, "phases only move forward");
        self.phase = phase;
        self.log.phases.push(PhaseChange { t, phase });
    }

    fn push_command(&mut self, cmd: VibrationCommand<T>, out: &mut StepOutput<T>) {
        self.log.commands.push(cmd);
        out.command = Some(cmd);
    }

    fn transition(&mut self, s: ForceSample<T>, decision: Option<Decision<T>>, out: &mut StepOutput<T>) {
        if self.phase == Phase::Idle {
            self.set_phase(s.t, Phase::Approach);
        }
        if self.phase == Phase::Approach && s.f_n >= self.cfg.contact_threshold_n {
            self.set_phase(s.t, Phase::Contact);
            self.cue_until = Some(s.t + self.cfg.contact_cue_duration_s);
        }
        if self.phase == Phase::Contact {
            let until = self.cue_until.expect("set on contact");
            if s.t >= until {
                self.set_phase(s.t, Phase::Gripping);
            } else if self.cfg.contact_cue_intensity > T::zero() {
                let cmd = VibrationCommand {
                    t: s.t,
                    u: self.cfg.contact_cue_intensity,
                    cause: CommandCause::ContactCue,
                };
                self.push_command(cmd, out);
            }
        }
        if self.phase == Phase::Gripping
            && s.f_n >= T::lit(HOLD_ENTRY_FRACTION) * self.cfg.grip_target_n
        {
            self.set_phase(s.t, Phase::Hold);
            self.hold_bench = s.f_n;
            self.peak_time = s.t;
            self.sr_best = None;
        }
        if self.phase == Phase::Hold {
            // The arming timer restarts whenever the normal force clearly
            // exceeds the benchmark; the hysteresis margin keeps sensor
            // noise on a plateau from restarting it forever.
            if s.f_n > self.hold_bench + self.cfg.peak_hysteresis_n {
                self.hold_bench = s.f_n;
                self.peak_time = s.t;
            }
            if let Some(d) = decision {
                match self.sr_best {
                    Some((best_sm, _)) if d.sm <= best_sm => {}
                    _ => self.sr_best = Some((d.sm, d.sr)),
                }
            }
            if s.t >= self.peak_time + self.cfg.arming_delay_s {
                // Arming also waits for the pipeline so a slip-ratio peak
                // is always on record before the checks go live.
                if let Some((_, sr)) = self.sr_best {
                    self.sr_peak = Some(sr);
                    self.set_phase(s.t, Phase::Armed);
                }
            }
        }
        if self.phase >= Phase::Gripping
            && self.phase < Phase::Released
            && s.f_n < self.cfg.contact_threshold_n
        {
            self.set_phase(s.t, Phase::Released);
        }
        if self.phase == Phase::Armed || self.phase == Phase::Slipping {
            if let Some(d) = decision {
                self.evaluate(s.t, d, out);
            }
        }
    }

    /// Runs both slip checks at the decision index. The acceleration check
    /// wins when both fire on the same sample.
    fn evaluate(&mut self, now: T, d: Decision<T>, out: &mut StepOutput<T>) {
        let sr_peak = self.sr_peak.expect("armed sessions have a captured peak");
        let delta_a = self.cfg.accel_threshold - d.d2;
        let delta_sr = (sr_peak - d.sr).abs();
        let (cause, trigger, u) = if delta_a < T::zero() {
            let inputs = IntensityInputs::from_config(&self.cfg, delta_a, sr_peak);
            let raw = encoder::accel_excess_raw(&inputs).expect("delta_a is negative here");
            let u = encoder::clamp_drive(self.gain * raw, self.cfg.u_min, self.cfg.u_max);
            (CommandCause::AccelTrigger, Some(TriggerKind::Accel), u)
        } else if delta_sr >= self.cfg.sr_diff_threshold && d.f_t > self.cfg.ft_floor_n {
            // Below the measurement floor the ratio is an artifact of the
            // clamp, so an empty-handed release stays quiet.
            let inputs = IntensityInputs::from_config(&self.cfg, delta_a, sr_peak);
            let u = encoder::slip_ratio_intensity(&inputs, delta_sr, self.cfg.sr_diff_threshold)
                .expect("captured slip-ratio peak is positive");
            (CommandCause::SlipRatioTrigger, Some(TriggerKind::SlipRatio), u)
        } else {
            (CommandCause::Silent, None, T::zero())
        };

        if let Some(trigger) = trigger {
            if cause != self.last_cause {
                let event = SlipEvent {
                    t: now,
                    trigger,
                    delta_a,
                    delta_sr,
                    sr_peak,
                    intensity: u,
                };
                self.log.events.push(event);
                out.event = Some(event);
                if self.phase == Phase::Armed {
                    self.set_phase(now, Phase::Slipping);
                }
            }
        }
        self.push_command(VibrationCommand { t: now, u, cause }, out);
        if cause == CommandCause::AccelTrigger && u == self.cfg.u_max {
            self.gain *= self.cfg.gain_backoff;
        }
        self.last_cause = cause;
    }
}

/// Median sample spacing of a strictly increasing timestamp series.
fn median_dt<T: Real>(t: &[T]) -> T {
    let mut gaps: Vec<T> = t.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite gaps"));
    gaps[gaps.len() / 2]
}

/// Runs the detector over a complete trace.
pub fn detect_trace<T: Real>(
    trace: &ForceTrace<T>,
    cfg: DetectorConfig<T>,
) -> Result<SessionLog<T>, DetectorError> {
    let mut det = SlipDetector::new(cfg)?;
    for &s in &trace.samples {
        det.step(s)?;
    }
    det.finish()
}
