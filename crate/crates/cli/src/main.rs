//! Command line front end for the slip detector: simulate lifts, stream
//! recorded traces through the detector, measure friction coefficients,
//! and run the seeded discrimination experiment.
//!
//! Exit codes: 0 on success, 1 on file system trouble, 2 for invalid
//! input or configuration, 3 when a required slip was not found.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use slipcue_cli::io::{self, IoError};
use slipcue_cli::replay::{replay_trace, Rate};
use slipcue_core::harness::{run_2afc, ObserverModel, TrialConfig};
use slipcue_core::{
    classify_friction, detect_trace, measure_static_cof, simulate_lift, surface_preset,
    CofParams, DetectorConfig, ForceTrace, FrictionError, FrictionLevel, GroundTruth,
    LiftScenario, MacroSlipParams, SessionLog, TriggerKind,
};

#[derive(Parser)]
#[command(
    name = "slipcue",
    version,
    about = "Slip detection and friction scaled vibrotactile feedback tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a grip and lift trial and write the force trace as CSV.
    Simulate(SimulateArgs),
    /// Run the streaming slip detector over a trace in one batch.
    Detect(DetectArgs),
    /// Estimate the static friction coefficient from a lift trace.
    MeasureFriction(MeasureArgs),
    /// Run the seeded two alternative forced choice experiment.
    Experiment(ExperimentArgs),
    /// Stream a trace through the detector with wall clock pacing.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceArg {
    Low,
    Medium,
    High,
}

impl From<SurfaceArg> for FrictionLevel {
    fn from(value: SurfaceArg) -> Self {
        match value {
            SurfaceArg::Low => FrictionLevel::Low,
            SurfaceArg::Medium => FrictionLevel::Medium,
            SurfaceArg::High => FrictionLevel::High,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Surface preset to simulate.
    #[arg(long, value_enum, conflicts_with = "scenario", required_unless_present = "scenario")]
    surface: Option<SurfaceArg>,
    /// Full scenario description as TOML instead of a preset.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Noise seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Sample rate override in Hz.
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Sensor noise sigma override in N.
    #[arg(long)]
    noise: Option<f64>,
    /// Grip release rate override in N/s.
    #[arg(long)]
    release_rate: Option<f64>,
    /// Incipient slip time constant override in s.
    #[arg(long)]
    slip_tau: Option<f64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON sidecar with the simulation ground truth.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Input trace CSV.
    #[arg(long)]
    trace: PathBuf,
    /// Detector settings as TOML; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the session log as JSON lines.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Ground truth sidecar for --verify.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Check the session against the ground truth sidecar.
    #[arg(long, requires = "truth")]
    verify: bool,
    /// Exit with status 3 when no slip event fires.
    #[arg(long)]
    require_slip: bool,
}

#[derive(Args)]
struct MeasureArgs {
    /// Input trace CSV.
    #[arg(long)]
    trace: PathBuf,
    /// Smoothing window in samples; the default suits 1 kHz recordings.
    #[arg(long, default_value_t = 101)]
    window: usize,
    /// Drop below the tangential peak that counts as leaving it, in N.
    #[arg(long, default_value_t = 0.02)]
    drop_tolerance: f64,
    /// Consecutive decreasing samples that confirm the slip.
    #[arg(long, default_value_t = 5)]
    run_len: usize,
    /// Print the result as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Observer noise as a fraction of perceived intensity.
    #[arg(long, default_value_t = 0.15)]
    weber: f64,
    /// Repetitions per surface pair (must be even).
    #[arg(long, default_value_t = 50)]
    reps: usize,
    /// Experiment seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Detector settings as TOML; the desk scale defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sample rate override in Hz.
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Sensor noise sigma override in N.
    #[arg(long)]
    noise: Option<f64>,
    /// Grip release rate override in N/s.
    #[arg(long)]
    release_rate: Option<f64>,
    /// Write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Input trace CSV.
    #[arg(long)]
    trace: PathBuf,
    /// Detector settings as TOML; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Playback speed factor, or 'inf' for no pacing.
    #[arg(long, default_value = "1.0")]
    rate: Rate,
    /// Write the session log as JSON lines.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    /// File system failure. Exit code 1.
    Io(String),
    /// Bad input data or settings. Exit code 2.
    Invalid(String),
    /// A slip was required and none was found. Exit code 3.
    NoSlip(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) | CliError::Invalid(m) | CliError::NoSlip(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::NoSlip(_) => 3,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::File { .. } => CliError::Io(e.to_string()),
            IoError::Format { .. } => CliError::Invalid(e.to_string()),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Detect(args) => detect(args),
        Command::MeasureFriction(args) => measure(args),
        Command::Experiment(args) => experiment(args),
        Command::Replay(args) => replay(args),
    }
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut scenario: LiftScenario = match (&args.scenario, args.surface) {
        (Some(path), _) => io::read_scenario(path)?,
        (None, Some(surface)) => surface_preset(surface.into()),
        (None, None) => unreachable!("clap enforces one source"),
    };
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(fs) = args.sample_rate {
        scenario.sample_rate_hz = fs;
    }
    if let Some(sigma) = args.noise {
        scenario.noise_sigma_n = sigma;
    }
    if let Some(rate) = args.release_rate {
        scenario.release_rate_nps = rate;
    }
    if let Some(tau) = args.slip_tau {
        scenario.slip_time_constant_s = tau;
    }
    let trace = simulate_lift(&scenario).map_err(invalid)?;
    io::write_trace(&args.out, &trace)?;
    let truth = trace.ground_truth.as_ref().expect("simulation keeps truth");
    if let Some(path) = &args.truth {
        io::write_truth(path, truth)?;
    }
    println!(
        "wrote {} samples at {} Hz to {}",
        trace.len(),
        trace.sample_rate_hz,
        args.out.display()
    );
    match (truth.slip_onset_t, truth.macro_slip_t) {
        (Some(onset), Some(macro_t)) => {
            println!("slip onset {onset:.4} s, macro slip {macro_t:.4} s")
        }
        (Some(onset), None) => println!("slip onset {onset:.4} s, macro slip past trace end"),
        _ => println!("no slip in this scenario"),
    }
    Ok(())
}

fn load_config(path: &Option<PathBuf>) -> Result<DetectorConfig, CliError> {
    match path {
        Some(p) => Ok(io::read_detector_config(p)?),
        None => Ok(DetectorConfig::default()),
    }
}

fn detect(args: DetectArgs) -> Result<(), CliError> {
    let trace = io::read_trace(&args.trace)?;
    let cfg = load_config(&args.config)?;
    let log = detect_trace(&trace, cfg).map_err(invalid)?;
    report_session(&trace, &log, args.events.as_deref())?;
    if args.verify {
        let truth = io::read_truth(args.truth.as_ref().expect("clap requires truth"))?;
        verify_session(&log, &truth)?;
    }
    if args.require_slip && log.first_slip_event().is_none() {
        return Err(CliError::NoSlip("no slip event in this session".into()));
    }
    Ok(())
}

fn replay(args: ReplayArgs) -> Result<(), CliError> {
    let trace = io::read_trace(&args.trace)?;
    let cfg = load_config(&args.config)?;
    let log = replay_trace(&trace, cfg, args.rate).map_err(invalid)?;
    report_session(&trace, &log, args.events.as_deref())?;
    Ok(())
}

fn report_session(
    trace: &ForceTrace,
    log: &SessionLog,
    events_path: Option<&Path>,
) -> Result<(), CliError> {
    if let Some(path) = events_path {
        io::write_events_file(path, trace, log)?;
    }
    for p in &log.phases {
        println!("phase {:?} at {:.4} s", p.phase, p.t);
    }
    for e in &log.events {
        let kind = match e.trigger {
            TriggerKind::Accel => "accel",
            TriggerKind::SlipRatio => "slip-ratio",
        };
        println!(
            "event {kind} at {:.4} s  intensity {:.1}  delta_a {:.3}  delta_sr {:.3}",
            e.t, e.intensity, e.delta_a, e.delta_sr
        );
    }
    println!("{} vibration commands", log.commands.len());
    match log.first_slip_event() {
        Some(e) => println!("first slip at {:.4} s with intensity {:.1}", e.t, e.intensity),
        None => println!("no slip events"),
    }
    Ok(())
}

/// Checks a session against simulation ground truth: a slipping trial
/// must produce events and its first acceleration alarm must come before
/// the macroscopic slip, while a stable trial must stay silent.
fn verify_session(log: &SessionLog, truth: &GroundTruth) -> Result<(), CliError> {
    match truth.slip_onset_t {
        Some(_) => {
            if log.first_slip_event().is_none() {
                return Err(CliError::NoSlip(
                    "truth says the load slips but no event fired".into(),
                ));
            }
            if let Some(macro_t) = truth.macro_slip_t {
                match log.first_event_of(TriggerKind::Accel) {
                    Some(e) if e.t < macro_t => {
                        println!(
                            "verify: accel alarm at {:.4} s beats macro slip at {:.4} s",
                            e.t, macro_t
                        );
                    }
                    Some(e) => {
                        return Err(CliError::NoSlip(format!(
                            "accel alarm at {:.4} s missed macro slip at {:.4} s",
                            e.t, macro_t
                        )));
                    }
                    None => {
                        return Err(CliError::NoSlip(
                            "truth says the load slips but no accel alarm fired".into(),
                        ));
                    }
                }
            }
            println!("verify: ok");
            Ok(())
        }
        None => {
            if log.first_slip_event().is_some() {
                return Err(CliError::NoSlip(
                    "truth says the load holds but a slip event fired".into(),
                ));
            }
            println!("verify: ok (stable trial, no events)");
            Ok(())
        }
    }
}

fn measure(args: MeasureArgs) -> Result<(), CliError> {
    let trace = io::read_trace(&args.trace)?;
    let params = CofParams {
        smooth_window: args.window,
        onset: MacroSlipParams {
            run_len: args.run_len,
            drop_tolerance: args.drop_tolerance,
        },
        ..CofParams::default()
    };
    let measurement = measure_static_cof(&trace, &params).map_err(|e| match e {
        FrictionError::NoSlipFound => {
            CliError::NoSlip("no slip found in this trace; cannot measure friction".into())
        }
        other => invalid(other),
    })?;
    let class = classify_friction(measurement.mu_s).map_err(invalid)?;
    if args.json {
        println!(
            "{}",
            serde_json::json!({
                "mu_s": measurement.mu_s,
                "class": class.as_str(),
                "onset_t": measurement.onset_t,
            })
        );
    } else {
        println!(
            "mu_s {:.4}  class {}  onset {:.4} s",
            measurement.mu_s,
            class.as_str(),
            measurement.onset_t
        );
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let mut cfg = TrialConfig::quiet_50hz();
    if let Some(path) = &args.config {
        cfg.detector = io::read_detector_config(path)?;
    }
    if let Some(fs) = args.sample_rate {
        cfg.sample_rate_hz = fs;
    }
    if let Some(sigma) = args.noise {
        cfg.noise_sigma_n = sigma;
    }
    if let Some(rate) = args.release_rate {
        cfg.release_rate_nps = rate;
    }
    let observer = ObserverModel {
        weber_fraction: args.weber,
    };
    let report = run_2afc(&cfg, observer, args.reps, args.seed).map_err(|e| match e {
        slipcue_core::harness::HarnessError::NoSlip { .. } => CliError::NoSlip(e.to_string()),
        other => invalid(other),
    })?;
    for pair in &report.pairs {
        println!(
            "pair {} > {}: {}/{} correct ({:.3})",
            pair.higher.as_str(),
            pair.lower.as_str(),
            pair.correct,
            pair.reps,
            pair.accuracy
        );
    }
    println!(
        "overall {:.3} over {} trials (weber {}, seed {})",
        report.overall_accuracy(),
        report.trials.len(),
        report.weber_fraction,
        report.seed
    );
    let order: Vec<&str> = FrictionLevel::ALL.iter().map(|l| l.as_str()).collect();
    println!("confusion rows {}: {:?}", order.join("/"), report.confusion);
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&report).map_err(invalid)?;
        std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        println!("report written to {}", path.display());
    }
    Ok(())
}
