//! Virtual discrimination experiment: simulated lifts run through the
//! detector, first-slip intensities judged by a noisy observer in a
//! two-alternative forced-choice protocol.
//!
//! Everything is seeded and the per-trial seeds are derived canonically
//! from (surface pair, repetition, role), so listing a pair as (high,
//! medium) or (medium, high) produces the identical experiment.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::DetectorConfig;
use crate::detector::{self, DetectorError};
use crate::friction::FrictionLevel;
use crate::session::{SessionLog, TriggerKind};
use crate::simulate::{self, LiftScenario, ScenarioError};
use crate::trace::ForceTrace;

/// The three ordered surface pairs of the discrimination protocol.
pub const PAIRS: [(FrictionLevel, FrictionLevel); 3] = [
    (FrictionLevel::High, FrictionLevel::Medium),
    (FrictionLevel::Medium, FrictionLevel::Low),
    (FrictionLevel::High, FrictionLevel::Low),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error("trial on {surface:?} (seed {seed}) produced no slip event")]
    NoSlip { surface: FrictionLevel, seed: u64 },
    #[error("repetitions per pair must be even and positive, got {0}")]
    OddReps(usize),
    #[error("a pair must name two different surfaces")]
    EqualPair,
}

/// Shared parameters for one simulated trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub detector: DetectorConfig<f64>,
    pub sample_rate_hz: f64,
    pub noise_sigma_n: f64,
    pub release_rate_nps: f64,
    pub slip_time_constant_s: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            detector: DetectorConfig::default(),
            sample_rate_hz: 1000.0,
            noise_sigma_n: 0.003,
            release_rate_nps: 1.0,
            slip_time_constant_s: 0.2,
        }
    }
}

impl TrialConfig {
    /// Trial parameters sized so the acceleration check stays usable on
    /// noisy data: white sensor noise passed through the smoothing window
    /// and two difference stages has a second-derivative deviation of
    /// about `sqrt(8) * sigma / (4 w dt^2)`, which these values keep a
    /// factor of six under the 0.3 N/s^2 threshold. The short arming
    /// delay fits the preset lift timeline.
    pub fn quiet_50hz() -> Self {
        Self {
            detector: DetectorConfig {
                arming_delay_s: 1.0,
                smooth_window: 15,
                ..DetectorConfig::default()
            },
            sample_rate_hz: 50.0,
            noise_sigma_n: 4e-4,
            release_rate_nps: 1.0,
            slip_time_constant_s: 0.2,
        }
    }

    /// Scenario for one surface under these trial parameters.
    pub fn scenario(&self, surface: FrictionLevel, seed: u64) -> LiftScenario<f64> {
        LiftScenario {
            sample_rate_hz: self.sample_rate_hz,
            noise_sigma_n: self.noise_sigma_n,
            release_rate_nps: self.release_rate_nps,
            slip_time_constant_s: self.slip_time_constant_s,
            seed,
            ..simulate::surface_preset(surface)
        }
    }
}

/// First slip feedback of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipOutcome {
    pub first_intensity: f64,
    /// First slip event time minus release start.
    pub latency_s: f64,
    pub trigger: TriggerKind,
}

/// One simulated lift, summarized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub surface: FrictionLevel,
    pub seed: u64,
    pub peak_tangential_n: f64,
    /// `None` when the session never produced a slip event.
    pub slip: Option<SlipOutcome>,
}

/// Runs one lift and keeps the full log and trace alongside the summary.
pub fn run_trial_full(
    cfg: &TrialConfig,
    surface: FrictionLevel,
    seed: u64,
) -> Result<(TrialRecord, SessionLog<f64>, ForceTrace<f64>), HarnessError> {
    let scenario = cfg.scenario(surface, seed);
    let trace = simulate::simulate_lift(&scenario)?;
    let log = detector::detect_trace(&trace, cfg.detector.clone())?;
    let peak_tangential_n = trace.tangential().into_iter().fold(f64::MIN, f64::max);
    let slip = log.first_slip_event().map(|e| SlipOutcome {
        first_intensity: e.intensity,
        latency_s: e.t - scenario.release_start_t,
        trigger: e.trigger,
    });
    let record = TrialRecord {
        surface,
        seed,
        peak_tangential_n,
        slip,
    };
    Ok((record, log, trace))
}

/// Runs one lift and returns just the summary.
pub fn run_trial(
    cfg: &TrialConfig,
    surface: FrictionLevel,
    seed: u64,
) -> Result<TrialRecord, HarnessError> {
    run_trial_full(cfg, surface, seed).map(|(record, _, _)| record)
}

/// Observer whose perceived magnitude of a drive level `u` is
/// `u * (1 + weber_fraction * z)` with standard normal `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserverModel {
    pub weber_fraction: f64,
}

impl ObserverModel {
    pub fn perceive(&self, intensity: f64, rng: &mut impl Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        intensity * (1.0 + self.weber_fraction * z)
    }
}

/// One forced-choice presentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoAfcTrial {
    pub higher: FrictionLevel,
    pub lower: FrictionLevel,
    pub rep: usize,
    pub higher_presented_first: bool,
    pub intensity_higher: f64,
    pub intensity_lower: f64,
    pub perceived_higher: f64,
    pub perceived_lower: f64,
    /// Whether the observer named the higher-friction surface stronger.
    pub correct: bool,
}

/// Per-pair accuracy summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub higher: FrictionLevel,
    pub lower: FrictionLevel,
    pub reps: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Full experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoAfcReport {
    pub seed: u64,
    pub reps_per_pair: usize,
    pub weber_fraction: f64,
    pub trials: Vec<TwoAfcTrial>,
    pub pairs: Vec<PairSummary>,
    /// Rows are true surfaces, columns judged surfaces, both in
    /// low/medium/high order. A correct trial credits both surfaces on
    /// the diagonal; an error swaps the pair labels.
    pub confusion: [[usize; 3]; 3],
}

impl TwoAfcReport {
    pub fn overall_accuracy(&self) -> f64 {
        let correct: usize = self.pairs.iter().map(|p| p.correct).sum();
        let total: usize = self.pairs.iter().map(|p| p.reps).sum();
        correct as f64 / total as f64
    }

    pub fn pair(&self, a: FrictionLevel, b: FrictionLevel) -> Option<&PairSummary> {
        let (hi, lo) = orient(a, b);
        self.pairs
            .iter()
            .find(|p| p.higher == hi && p.lower == lo)
    }
}

/// Runs the standard three-pair experiment.
pub fn run_2afc(
    cfg: &TrialConfig,
    observer: ObserverModel,
    reps_per_pair: usize,
    seed: u64,
) -> Result<TwoAfcReport, HarnessError> {
    run_2afc_pairs(cfg, observer, &PAIRS, reps_per_pair, seed)
}

/// Runs the experiment over an explicit pair list. Pair orientation does
/// not matter: (high, low) and (low, high) are the same condition.
pub fn run_2afc_pairs(
    cfg: &TrialConfig,
    observer: ObserverModel,
    pairs: &[(FrictionLevel, FrictionLevel)],
    reps_per_pair: usize,
    seed: u64,
) -> Result<TwoAfcReport, HarnessError> {
    if reps_per_pair == 0 || !reps_per_pair.is_multiple_of(2) {
        return Err(HarnessError::OddReps(reps_per_pair));
    }
    let mut trials = Vec::with_capacity(pairs.len() * reps_per_pair);
    let mut summaries = Vec::with_capacity(pairs.len());
    let mut confusion = [[0usize; 3]; 3];
    for &(a, b) in pairs {
        if a == b {
            return Err(HarnessError::EqualPair);
        }
        let (hi, lo) = orient(a, b);
        let pair_id = (hi.index() * 3 + lo.index()) as u64;
        // Half the repetitions present the higher-friction surface first.
        let mut first_slots: Vec<bool> = (0..reps_per_pair)
            .map(|r| r < reps_per_pair / 2)
            .collect();
        let mut order_rng =
            ChaCha8Rng::seed_from_u64(mix_seed([seed, pair_id, 0, ROLE_ORDER]));
        first_slots.shuffle(&mut order_rng);

        let mut correct_count = 0usize;
        for (rep, &higher_first) in first_slots.iter().enumerate() {
            let trial = run_pair_trial(cfg, observer, hi, lo, pair_id, rep, higher_first, seed)?;
            if trial.correct {
                correct_count += 1;
                confusion[hi.index()][hi.index()] += 1;
                confusion[lo.index()][lo.index()] += 1;
            } else {
                confusion[hi.index()][lo.index()] += 1;
                confusion[lo.index()][hi.index()] += 1;
            }
            trials.push(trial);
        }
        summaries.push(PairSummary {
            higher: hi,
            lower: lo,
            reps: reps_per_pair,
            correct: correct_count,
            accuracy: correct_count as f64 / reps_per_pair as f64,
        });
    }
    Ok(TwoAfcReport {
        seed,
        reps_per_pair,
        weber_fraction: observer.weber_fraction,
        trials,
        pairs: summaries,
        confusion,
    })
}

const ROLE_HIGHER: u64 = 0;
const ROLE_LOWER: u64 = 1;
const ROLE_PERCEPTION: u64 = 2;
const ROLE_ORDER: u64 = 3;

#[allow(clippy::too_many_arguments)]
fn run_pair_trial(
    cfg: &TrialConfig,
    observer: ObserverModel,
    hi: FrictionLevel,
    lo: FrictionLevel,
    pair_id: u64,
    rep: usize,
    higher_first: bool,
    seed: u64,
) -> Result<TwoAfcTrial, HarnessError> {
    let seed_hi = mix_seed([seed, pair_id, rep as u64, ROLE_HIGHER]);
    let seed_lo = mix_seed([seed, pair_id, rep as u64, ROLE_LOWER]);
    let intensity_higher = first_intensity(cfg, hi, seed_hi)?;
    let intensity_lower = first_intensity(cfg, lo, seed_lo)?;
    let mut percept_rng =
        ChaCha8Rng::seed_from_u64(mix_seed([seed, pair_id, rep as u64, ROLE_PERCEPTION]));
    // Perception draws follow presentation order.
    let (perceived_first, perceived_second) = if higher_first {
        (
            observer.perceive(intensity_higher, &mut percept_rng),
            observer.perceive(intensity_lower, &mut percept_rng),
        )
    } else {
        (
            observer.perceive(intensity_lower, &mut percept_rng),
            observer.perceive(intensity_higher, &mut percept_rng),
        )
    };
    let (perceived_higher, perceived_lower) = if higher_first {
        (perceived_first, perceived_second)
    } else {
        (perceived_second, perceived_first)
    };
    Ok(TwoAfcTrial {
        higher: hi,
        lower: lo,
        rep,
        higher_presented_first: higher_first,
        intensity_higher,
        intensity_lower,
        perceived_higher,
        perceived_lower,
        correct: perceived_higher > perceived_lower,
    })
}

fn first_intensity(
    cfg: &TrialConfig,
    surface: FrictionLevel,
    seed: u64,
) -> Result<f64, HarnessError> {
    let record = run_trial(cfg, surface, seed)?;
    record
        .slip
        .map(|s| s.first_intensity)
        .ok_or(HarnessError::NoSlip { surface, seed })
}

fn orient(a: FrictionLevel, b: FrictionLevel) -> (FrictionLevel, FrictionLevel) {
    if a.index() >= b.index() {
        (a, b)
    } else {
        (b, a)
    }
}

/// Deterministic seed mixer (splitmix64 folded over the parts).
fn mix_seed(parts: [u64; 4]) -> u64 {
    let mut x: u64 = 0x243F_6A88_85A3_08D3;
    for p in parts {
        x ^= p.wrapping_mul(0xBF58_476D_1CE4_E5B9).rotate_left(31);
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x = z ^ (z >> 31);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intensities_and_latencies_follow_friction_order() {
        let cfg = TrialConfig::quiet_50hz();
        for seed in 1..=5u64 {
            let low = run_trial(&cfg, FrictionLevel::Low, seed).unwrap().slip.unwrap();
            let med = run_trial(&cfg, FrictionLevel::Medium, seed).unwrap().slip.unwrap();
            let high = run_trial(&cfg, FrictionLevel::High, seed).unwrap().slip.unwrap();
            assert!(
                low.first_intensity < med.first_intensity
                    && med.first_intensity < high.first_intensity,
                "seed {seed}: {} {} {}",
                low.first_intensity,
                med.first_intensity,
                high.first_intensity
            );
            assert!(
                low.latency_s < med.latency_s && med.latency_s < high.latency_s,
                "seed {seed}: {} {} {}",
                low.latency_s,
                med.latency_s,
                high.latency_s
            );
        }
    }

    #[test]
    fn perfect_observer_never_errs() {
        let report = run_2afc(
            &TrialConfig::quiet_50hz(),
            ObserverModel { weber_fraction: 0.0 },
            4,
            11,
        )
        .unwrap();
        assert!(report.trials.iter().all(|t| t.correct));
        assert_eq!(report.overall_accuracy(), 1.0);
        // Each surface sits in two pairs, so 2 * 4 diagonal counts.
        assert_eq!(report.confusion[0], [8, 0, 0]);
        assert_eq!(report.confusion[1], [0, 8, 0]);
        assert_eq!(report.confusion[2], [0, 0, 8]);
    }

    #[test]
    fn overwhelmed_observer_sits_near_chance() {
        let report = run_2afc(
            &TrialConfig::quiet_50hz(),
            ObserverModel { weber_fraction: 10.0 },
            40,
            5,
        )
        .unwrap();
        let acc = report.overall_accuracy();
        assert!(acc > 0.3 && acc < 0.7, "accuracy {acc}");
    }

    #[test]
    fn presentation_order_is_balanced() {
        let report = run_2afc(
            &TrialConfig::quiet_50hz(),
            ObserverModel { weber_fraction: 0.15 },
            6,
            3,
        )
        .unwrap();
        for pair in &report.pairs {
            let firsts = report
                .trials
                .iter()
                .filter(|t| t.higher == pair.higher && t.lower == pair.lower)
                .filter(|t| t.higher_presented_first)
                .count();
            assert_eq!(firsts, 3);
        }
    }

    #[test]
    fn pair_orientation_does_not_matter() {
        let cfg = TrialConfig::quiet_50hz();
        let obs = ObserverModel { weber_fraction: 0.15 };
        let forward = run_2afc_pairs(
            &cfg,
            obs,
            &[(FrictionLevel::High, FrictionLevel::Medium)],
            4,
            21,
        )
        .unwrap();
        let reversed = run_2afc_pairs(
            &cfg,
            obs,
            &[(FrictionLevel::Medium, FrictionLevel::High)],
            4,
            21,
        )
        .unwrap();
        assert_eq!(forward.trials, reversed.trials);
        assert_eq!(forward.confusion, reversed.confusion);
    }

    #[test]
    fn odd_reps_rejected() {
        let err = run_2afc(
            &TrialConfig::quiet_50hz(),
            ObserverModel { weber_fraction: 0.0 },
            5,
            1,
        )
        .unwrap_err();
        assert_eq!(err, HarnessError::OddReps(5));
    }

    #[test]
    fn unsupported_object_reports_no_slip() {
        let cfg = TrialConfig::quiet_50hz();
        let mut scenario = cfg.scenario(FrictionLevel::Medium, 1);
        scenario.support_fraction = 1.0;
        scenario.load_n = None;
        let trace = simulate::simulate_lift(&scenario).unwrap();
        let log = detector::detect_trace(&trace, cfg.detector.clone()).unwrap();
        assert!(log.first_slip_event().is_none());
    }

    #[test]
    fn report_roundtrips_through_serde() {
        let report = run_2afc(
            &TrialConfig::quiet_50hz(),
            ObserverModel { weber_fraction: 0.15 },
            2,
            9,
        )
        .unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let back: TwoAfcReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
    }
}
