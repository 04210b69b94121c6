//! Synthetic grip-and-lift force traces with known ground truth.
//!
//! A trial ramps the grip to its target, loads the tangential channel with
//! the held weight, then bleeds the normal force away until friction can
//! no longer carry the load. The tangential force then relaxes from the
//! static capacity down to the kinetic level over a short incipient-slip
//! phase, after which the contact slides. Every phase boundary uses a
//! smoothstep ramp so the envelope stays twice differentiable except at
//! the slip onset itself.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::friction::FrictionLevel;
use crate::scalar::Real;
use crate::trace::{ForceSample, ForceTrace, GroundTruth, TraceSource};

pub const GRAVITY_MPS2: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid scenario field `{field}`: {reason}")]
pub struct ScenarioError {
    pub field: &'static str,
    pub reason: String,
}

impl ScenarioError {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

/// Everything that defines one simulated grip-and-lift trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiftScenario<T> {
    /// Static coefficient of friction at the finger pad.
    pub mu_s: T,
    /// Kinetic coefficient, at most `mu_s`.
    pub mu_k: T,
    pub mass_kg: T,
    /// Normal force the grip ramps to and holds.
    pub grip_target_n: T,
    /// Fraction of the object weight carried elsewhere; the fingers hold
    /// the rest.
    pub support_fraction: T,
    /// Direct override of the held tangential load. When set, mass and
    /// support fraction are ignored for the load computation.
    pub load_n: Option<T>,
    /// When the grip ramp starts.
    pub contact_t: T,
    /// When the tangential load ramp starts; must leave the grip ramp
    /// finished first.
    pub lift_t: T,
    /// When the normal force starts to decay.
    pub release_start_t: T,
    /// Normal-force decay rate during release, N/s.
    pub release_rate_nps: T,
    /// Duration of each smoothstep ramp.
    pub ramp_s: T,
    /// Time constant of the incipient-slip relaxation from static to
    /// kinetic friction.
    pub slip_time_constant_s: T,
    /// Extra recording time after the normal force reaches zero.
    pub tail_s: T,
    /// Standard deviation of the white sensor noise, N.
    pub noise_sigma_n: T,
    pub sample_rate_hz: T,
    pub seed: u64,
}

impl<T: Real> Default for LiftScenario<T> {
    fn default() -> Self {
        Self {
            mu_s: T::lit(0.55),
            mu_k: T::lit(0.44),
            mass_kg: T::lit(0.280),
            grip_target_n: T::lit(3.5),
            support_fraction: T::lit(0.5),
            load_n: None,
            contact_t: T::lit(0.5),
            lift_t: T::lit(1.1),
            release_start_t: T::lit(3.0),
            release_rate_nps: T::one(),
            ramp_s: T::lit(0.5),
            slip_time_constant_s: T::lit(0.2),
            tail_s: T::lit(0.3),
            noise_sigma_n: T::lit(0.003),
            sample_rate_hz: T::lit(1000.0),
            seed: 0,
        }
    }
}

impl<T: Real> LiftScenario<T> {
    /// Tangential load the fingers carry once the object hangs.
    pub fn held_load_n(&self) -> T {
        self.load_n.unwrap_or_else(|| {
            (T::one() - self.support_fraction) * self.mass_kg * T::lit(GRAVITY_MPS2)
        })
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let finite_pos = |field, v: T| {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(ScenarioError::new(field, format!("must be positive and finite, got {v}")))
            }
        };
        finite_pos("mu_s", self.mu_s)?;
        finite_pos("mu_k", self.mu_k)?;
        if self.mu_k > self.mu_s {
            return Err(ScenarioError::new("mu_k", "must not exceed mu_s"));
        }
        finite_pos("mass_kg", self.mass_kg)?;
        finite_pos("grip_target_N", self.grip_target_n)?;
        if !(self.support_fraction >= T::zero() && self.support_fraction <= T::one()) {
            return Err(ScenarioError::new("support_fraction", "must lie in [0, 1]"));
        }
        if let Some(load) = self.load_n {
            if !(load.is_finite() && load >= T::zero()) {
                return Err(ScenarioError::new("load_N", "must be non-negative and finite"));
            }
        }
        if !(self.contact_t.is_finite() && self.contact_t >= T::zero()) {
            return Err(ScenarioError::new("contact_t", "must be non-negative"));
        }
        finite_pos("ramp_s", self.ramp_s)?;
        if self.lift_t < self.contact_t + self.ramp_s {
            return Err(ScenarioError::new(
                "lift_t",
                "lift must start after the grip ramp completes",
            ));
        }
        if self.release_start_t < self.lift_t + self.ramp_s {
            return Err(ScenarioError::new(
                "release_start_t",
                "release must start after the load ramp completes",
            ));
        }
        finite_pos("release_rate_nps", self.release_rate_nps)?;
        finite_pos("slip_time_constant_s", self.slip_time_constant_s)?;
        if !(self.tail_s.is_finite() && self.tail_s >= T::zero()) {
            return Err(ScenarioError::new("tail_s", "must be non-negative"));
        }
        if !(self.noise_sigma_n.is_finite() && self.noise_sigma_n >= T::zero()) {
            return Err(ScenarioError::new("noise_sigma_N", "must be non-negative"));
        }
        finite_pos("sample_rate_hz", self.sample_rate_hz)?;
        Ok(())
    }

    fn normal_envelope(&self, t: T) -> T {
        if t < self.contact_t {
            T::zero()
        } else if t < self.release_start_t {
            self.grip_target_n * smoothstep((t - self.contact_t) / self.ramp_s)
        } else {
            (self.grip_target_n - self.release_rate_nps * (t - self.release_start_t)).max(T::zero())
        }
    }

    /// Tangential load the contact is asked to carry at time `t`.
    fn demand_envelope(&self, t: T) -> T {
        self.held_load_n() * smoothstep((t - self.lift_t) / self.ramp_s)
    }
}

fn smoothstep<T: Real>(u: T) -> T {
    let u = u.max(T::zero()).min(T::one());
    u * u * (T::lit(3.0) - T::lit(2.0) * u)
}

/// Sample count covering the release ramp plus the configured tail.
fn grid_len<T: Real>(scenario: &LiftScenario<T>) -> usize {
    let duration = scenario.release_start_t
        + scenario.grip_target_n / scenario.release_rate_nps
        + scenario.tail_s;
    (duration * scenario.sample_rate_hz)
        .floor()
        .to_usize()
        .expect("finite duration")
        + 1
}

/// Runs one grip-and-lift trial and returns the force trace with ground
/// truth attached.
pub fn simulate_lift<T: Real>(scenario: &LiftScenario<T>) -> Result<ForceTrace<T>, ScenarioError> {
    scenario.validate()?;
    let n = grid_len(scenario);
    let fs = scenario.sample_rate_hz;
    let times: Vec<T> = (0..n).map(|k| T::from_usize(k).unwrap() / fs).collect();

    let mut onset_idx = None;
    for (k, &t) in times.iter().enumerate() {
        if scenario.mu_s * scenario.normal_envelope(t) < scenario.demand_envelope(t) {
            onset_idx = Some(k);
            break;
        }
    }
    let tau = scenario.slip_time_constant_s;
    // The incipient phase lasts three time constants, counted in whole
    // samples so the macro transition lands exactly on a grid point.
    let relax_len = (T::lit(3.0) * tau * fs).round().to_usize().unwrap_or(0);
    let macro_idx = onset_idx
        .map(|j| j + relax_len)
        .filter(|&m| m < n);
    let macro_t = macro_idx.map(|m| times[m]);

    let mut noise = if scenario.noise_sigma_n > T::zero() {
        let rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let dist = Normal::new(0.0f64, 1.0).expect("unit normal");
        Some((rng, dist))
    } else {
        None
    };

    let mut samples = Vec::with_capacity(n);
    for (k, &t) in times.iter().enumerate() {
        let fn_env = scenario.normal_envelope(t);
        let demand = scenario.demand_envelope(t);
        let ft_env = match onset_idx {
            Some(j) if k >= j => {
                let relaxed = if k < j + relax_len {
                    let s = t - times[j];
                    let fn_onset = scenario.normal_envelope(times[j]);
                    let excess = (scenario.mu_s - scenario.mu_k) * fn_onset;
                    scenario.mu_k * fn_env + excess * (-s / tau).exp()
                } else {
                    scenario.mu_k * fn_env
                };
                relaxed.min(scenario.mu_s * fn_env).min(demand)
            }
            _ => demand,
        };
        let (f_n, f_t) = match &mut noise {
            Some((rng, dist)) => {
                let zn = T::lit(dist.sample(rng));
                let zt = T::lit(dist.sample(rng));
                (
                    (fn_env + scenario.noise_sigma_n * zn).abs(),
                    (ft_env + scenario.noise_sigma_n * zt).abs(),
                )
            }
            None => (fn_env, ft_env),
        };
        samples.push(ForceSample { t, f_n, f_t });
    }

    let truth = GroundTruth {
        mu_s: scenario.mu_s,
        mu_k: scenario.mu_k,
        mass_kg: scenario.mass_kg,
        slip_onset_t: onset_idx.map(|k| times[k]),
        macro_slip_t: macro_t,
    };
    let trace = ForceTrace::new(samples, fs, TraceSource::Simulated)
        .expect("simulated grid is uniform and finite");
    Ok(trace.with_ground_truth(truth))
}

/// Scenario preset for one of the three measured surfaces: static
/// coefficient and held load per surface, kinetic coefficient at 80% of
/// static.
pub fn surface_preset<T: Real>(level: FrictionLevel) -> LiftScenario<T> {
    let (mu_s, load) = match level {
        FrictionLevel::Low => (0.25, 0.61),
        FrictionLevel::Medium => (0.55, 1.26),
        FrictionLevel::High => (0.95, 1.47),
    };
    LiftScenario {
        mu_s: T::lit(mu_s),
        mu_k: T::lit(0.8 * mu_s),
        load_n: Some(T::lit(load)),
        ..LiftScenario::default()
    }
}
