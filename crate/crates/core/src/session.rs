//! Session-level records produced by the detector: grip phases, slip
//! events, and the vibration command stream.

use serde::{Deserialize, Serialize};

use crate::signal::DerivedSeries;

/// Grip phases in protocol order. A session only ever moves forward
/// through this sequence (phases may be skipped, never revisited).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Approach,
    Contact,
    Gripping,
    Hold,
    Armed,
    Slipping,
    Released,
}

/// Which slip check fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerKind {
    /// Second derivative of smoothed tangential force crossed the
    /// acceleration threshold.
    Accel,
    /// Slip ratio deviated from its captured peak by more than the
    /// configured threshold.
    SlipRatio,
}

/// Why a command was emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandCause {
    ContactCue,
    AccelTrigger,
    SlipRatioTrigger,
    Silent,
}

/// One drive command for the vibrotactile actuator.
///
/// `u` is zero exactly when `cause` is [`CommandCause::Silent`]; nonzero
/// intensities always lie within the configured `[u_min, u_max]` band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VibrationCommand<T> {
    pub t: T,
    pub u: T,
    pub cause: CommandCause,
}

/// Logged at the moment a slip check newly takes over the command stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipEvent<T> {
    pub t: T,
    pub trigger: TriggerKind,
    /// `accel_threshold - d2ft` at the evaluated signal index.
    pub delta_a: T,
    /// `|sr_peak - sr|` at the evaluated signal index.
    pub delta_sr: T,
    /// Peak slip ratio captured when monitoring armed.
    pub sr_peak: T,
    /// Intensity of the command emitted with this event.
    pub intensity: T,
}

/// Phase transition record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseChange<T> {
    pub t: T,
    pub phase: Phase,
}

/// Everything a detector run produces, sufficient to reconstruct plots
/// and re-derive summary statistics without rerunning the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog<T> {
    /// Phase transitions in time order, starting with the first sample.
    pub phases: Vec<PhaseChange<T>>,
    /// Trigger takeovers (accel or slip-ratio), in time order.
    pub events: Vec<SlipEvent<T>>,
    /// Full command stream: the contact cue plus one command per armed
    /// sample (silent commands included).
    pub commands: Vec<VibrationCommand<T>>,
    /// Per-sample conditioned signals for the whole session.
    pub derived: DerivedSeries<T>,
}

impl<T> Default for SessionLog<T> {
    fn default() -> Self {
        Self {
            phases: Vec::new(),
            events: Vec::new(),
            commands: Vec::new(),
            derived: DerivedSeries::default(),
        }
    }
}

impl<T: Copy> SessionLog<T> {
    /// First slip-triggered command, if the session ever slipped.
    pub fn first_slip_event(&self) -> Option<&SlipEvent<T>> {
        self.events.first()
    }

    /// First event of a specific trigger kind.
    pub fn first_event_of(&self, kind: TriggerKind) -> Option<&SlipEvent<T>> {
        self.events.iter().find(|e| e.trigger == kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_order_is_total() {
        use Phase::*;
        let chain = [Idle, Approach, Contact, Gripping, Hold, Armed, Slipping, Released];
        for pair in chain.windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn serialized_names_are_snake_case() {
        let json = serde_json::to_string(&Phase::Slipping).unwrap();
        assert_eq!(json, "\"slipping\"");
        let json = serde_json::to_string(&CommandCause::SlipRatioTrigger).unwrap();
        assert_eq!(json, "\"slip_ratio_trigger\"");
    }
}
