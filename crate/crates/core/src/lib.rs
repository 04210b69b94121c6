//! Slip detection and friction-scaled vibrotactile feedback for
//! force-sensing grippers.
//!
//! The crate covers the full loop around a grip-and-lift session:
//!
//! * [`detector`]: a streaming state machine that watches normal and
//!   tangential force, arms itself once the grip has settled, fires on
//!   either a tangential-force acceleration crossing or a slip-ratio
//!   deviation, and emits per-sample vibration commands.
//! * [`encoder`]: the intensity laws that map trigger margins and the
//!   captured slip-ratio peak into drive levels inside a fixed band.
//! * [`simulate`]: a Coulomb grip-lift simulator with smoothstep ramps,
//!   an incipient-slip relaxation phase, sensor noise, and ground truth
//!   attached to every trace.
//! * [`friction`]: offline measurement of the static coefficient of
//!   friction from a recorded lift, plus the three-way surface
//!   classification.
//! * [`harness`]: a virtual two-alternative forced-choice experiment that
//!   scores whether slip-onset intensities discriminate the surfaces.
//!
//! Numeric code is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases at the crate root pin everything to `f64`, which is what the
//! command-line tools use.

pub mod config;
pub mod detector;
pub mod encoder;
pub mod friction;
pub mod harness;
pub mod scalar;
pub mod session;
pub mod signal;
pub mod simulate;
pub mod trace;

pub use config::ConfigError;
pub use detector::{detect_trace, DetectorError};
pub use encoder::EncoderError;
pub use friction::{classify_friction, measure_static_cof, FrictionError, FrictionLevel};
pub use scalar::Real;
pub use session::{CommandCause, Phase, TriggerKind};
pub use signal::{derive_series, SignalError};
pub use simulate::{simulate_lift, surface_preset, ScenarioError, GRAVITY_MPS2};
pub use trace::{TraceError, TraceSource};

/// Scalar used by the concrete aliases below.
pub type Scalar = f64;

pub type ForceSample = trace::ForceSample<Scalar>;
pub type ForceTrace = trace::ForceTrace<Scalar>;
pub type GroundTruth = trace::GroundTruth<Scalar>;
pub type DetectorConfig = config::DetectorConfig<Scalar>;
pub type SlipDetector = detector::SlipDetector<Scalar>;
pub type StepOutput = detector::StepOutput<Scalar>;
pub type SessionLog = session::SessionLog<Scalar>;
pub type SlipEvent = session::SlipEvent<Scalar>;
pub type VibrationCommand = session::VibrationCommand<Scalar>;
pub type PhaseChange = session::PhaseChange<Scalar>;
pub type DerivedSeries = signal::DerivedSeries<Scalar>;
pub type LiftScenario = simulate::LiftScenario<Scalar>;
pub type MacroSlipParams = friction::MacroSlipParams<Scalar>;
pub type CofParams = friction::CofParams<Scalar>;
pub type CofMeasurement = friction::CofMeasurement<Scalar>;
