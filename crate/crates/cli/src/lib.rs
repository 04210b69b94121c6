//! File formats and streaming replay for the slip detection tools.
//!
//! Traces travel as CSV, detector and scenario settings as TOML, ground
//! truth as JSON and session logs as JSON lines. Everything round-trips
//! exactly so a replayed session can be compared byte for byte against a
//! batch run.

pub mod io {
    use std::fs::File;
    use std::io::{BufRead, BufReader, BufWriter, Write};
    use std::path::Path;

    use serde::{Deserialize, Serialize};
    use slipcue_core::{
        DetectorConfig, ForceSample, ForceTrace, GroundTruth, LiftScenario, PhaseChange,
        SessionLog, SlipEvent, TraceSource, VibrationCommand,
    };
    use thiserror::Error;

    #[derive(Debug, Error)]
    pub enum IoError {
        #[error("{path}: {source}")]
        File {
            path: String,
            source: std::io::Error,
        },
        #[error("{path}: {message}")]
        Format { path: String, message: String },
    }

    impl IoError {
        fn format(path: &Path, message: impl Into<String>) -> Self {
            IoError::Format {
                path: path.display().to_string(),
                message: message.into(),
            }
        }

        fn file(path: &Path, source: std::io::Error) -> Self {
            IoError::File {
                path: path.display().to_string(),
                source,
            }
        }
    }

    /// Columns of the narrow trace format.
    const NARROW: [&str; 3] = ["time_s", "fn_N", "ft_N"];
    /// Leading columns of the six axis format; torque columns after the
    /// forces are ignored.
    const WIDE: [&str; 4] = ["time_s", "fx_N", "fy_N", "fz_N"];

    /// Reads a force trace from CSV.
    ///
    /// Two layouts are accepted: `time_s,fn_N,ft_N` with the normal and
    /// tangential components already split, or a six axis layout starting
    /// with `time_s,fx_N,fy_N,fz_N` where the normal force is `|fz|` and
    /// the tangential force is `sqrt(fx^2 + fy^2)`. The sample rate comes
    /// from the median timestamp spacing.
    pub fn read_trace(path: &Path) -> Result<ForceTrace, IoError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| IoError::format(path, e.to_string()))?;
        let headers = reader
            .headers()
            .map_err(|e| IoError::format(path, e.to_string()))?
            .clone();
        let names: Vec<&str> = headers.iter().collect();
        let wide = if names.len() >= NARROW.len() && names[..3] == NARROW {
            false
        } else if names.len() >= WIDE.len() && names[..4] == WIDE {
            true
        } else {
            return Err(IoError::format(
                path,
                format!(
                    "unrecognized columns {names:?}; expected {NARROW:?} or {WIDE:?} \
                     (torque columns after the forces are ignored)"
                ),
            ));
        };

        let mut samples = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| IoError::format(path, e.to_string()))?;
            let field = |i: usize| -> Result<f64, IoError> {
                record
                    .get(i)
                    .ok_or_else(|| IoError::format(path, format!("row {}: missing column {i}", line + 2)))?
                    .parse::<f64>()
                    .map_err(|e| IoError::format(path, format!("row {}: {e}", line + 2)))
            };
            let t = field(0)?;
            let (f_n, f_t) = if wide {
                let fx = field(1)?;
                let fy = field(2)?;
                let fz = field(3)?;
                (fz.abs(), fx.hypot(fy))
            } else {
                (field(1)?, field(2)?)
            };
            let sample = ForceSample::new(t, f_n, f_t)
                .map_err(|e| IoError::format(path, format!("row {}: {e}", line + 2)))?;
            samples.push(sample);
        }
        if samples.len() < 2 {
            return Err(IoError::format(path, "need at least two samples"));
        }
        let mut gaps: Vec<f64> = samples.windows(2).map(|w| w[1].t - w[0].t).collect();
        gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite timestamps"));
        let median_dt = gaps[gaps.len() / 2];
        if median_dt <= 0.0 {
            return Err(IoError::format(path, "timestamps must increase"));
        }
        ForceTrace::new(samples, 1.0 / median_dt, TraceSource::Recorded)
            .map_err(|e| IoError::format(path, e.to_string()))
    }

    /// Writes a trace in the narrow CSV layout.
    pub fn write_trace(path: &Path, trace: &ForceTrace) -> Result<(), IoError> {
        let mut writer =
            csv::Writer::from_path(path).map_err(|e| IoError::format(path, e.to_string()))?;
        writer
            .write_record(NARROW)
            .map_err(|e| IoError::format(path, e.to_string()))?;
        for s in &trace.samples {
            writer
                .write_record([s.t.to_string(), s.f_n.to_string(), s.f_t.to_string()])
                .map_err(|e| IoError::format(path, e.to_string()))?;
        }
        writer
            .flush()
            .map_err(|e| IoError::file(path, e))?;
        Ok(())
    }

    pub fn read_truth(path: &Path) -> Result<GroundTruth, IoError> {
        let file = File::open(path).map_err(|e| IoError::file(path, e))?;
        serde_json::from_reader(BufReader::new(file))
            .map_err(|e| IoError::format(path, e.to_string()))
    }

    pub fn write_truth(path: &Path, truth: &GroundTruth) -> Result<(), IoError> {
        let file = File::create(path).map_err(|e| IoError::file(path, e))?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut writer, truth)
            .map_err(|e| IoError::format(path, e.to_string()))?;
        writer.write_all(b"\n").map_err(|e| IoError::file(path, e))?;
        writer.flush().map_err(|e| IoError::file(path, e))
    }

    /// Detector settings from a TOML file. Unknown keys are rejected so a
    /// typo cannot silently fall back to a default.
    pub fn read_detector_config(path: &Path) -> Result<DetectorConfig, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
        let cfg: DetectorConfig =
            toml::from_str(&text).map_err(|e| IoError::format(path, e.to_string()))?;
        cfg.validate()
            .map_err(|e| IoError::format(path, e.to_string()))?;
        Ok(cfg)
    }

    pub fn write_detector_config(path: &Path, cfg: &DetectorConfig) -> Result<(), IoError> {
        let text = toml::to_string_pretty(cfg).map_err(|e| IoError::format(path, e.to_string()))?;
        std::fs::write(path, text).map_err(|e| IoError::file(path, e))
    }

    /// Lift scenario from a TOML file.
    pub fn read_scenario(path: &Path) -> Result<LiftScenario, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
        let scenario: LiftScenario =
            toml::from_str(&text).map_err(|e| IoError::format(path, e.to_string()))?;
        scenario
            .validate()
            .map_err(|e| IoError::format(path, e.to_string()))?;
        Ok(scenario)
    }

    /// One line of the session log stream.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(tag = "record", rename_all = "snake_case", deny_unknown_fields)]
    pub enum LogLine {
        Header {
            sample_rate_hz: f64,
            samples: usize,
            source: TraceSource,
        },
        Phase(PhaseChange),
        Event(SlipEvent),
        Command(VibrationCommand),
    }

    /// Writes a session log as JSON lines: one header record, then phase
    /// changes, slip events and vibration commands in session order. The
    /// derived signal block stays out of the stream; it can always be
    /// recomputed from the trace.
    pub fn write_events(
        out: &mut impl Write,
        trace: &ForceTrace,
        log: &SessionLog,
    ) -> Result<(), std::io::Error> {
        let mut emit = |line: &LogLine| -> Result<(), std::io::Error> {
            let text = serde_json::to_string(line).expect("log records serialize");
            out.write_all(text.as_bytes())?;
            out.write_all(b"\n")
        };
        emit(&LogLine::Header {
            sample_rate_hz: trace.sample_rate_hz,
            samples: trace.len(),
            source: trace.source,
        })?;
        for p in &log.phases {
            emit(&LogLine::Phase(*p))?;
        }
        for e in &log.events {
            emit(&LogLine::Event(*e))?;
        }
        for c in &log.commands {
            emit(&LogLine::Command(*c))?;
        }
        Ok(())
    }

    pub fn write_events_file(
        path: &Path,
        trace: &ForceTrace,
        log: &SessionLog,
    ) -> Result<(), IoError> {
        let file = File::create(path).map_err(|e| IoError::file(path, e))?;
        let mut writer = BufWriter::new(file);
        write_events(&mut writer, trace, log).map_err(|e| IoError::file(path, e))?;
        writer.flush().map_err(|e| IoError::file(path, e))
    }

    /// Reads a JSON lines session log back.
    pub fn read_events(path: &Path) -> Result<Vec<LogLine>, IoError> {
        let file = File::open(path).map_err(|e| IoError::file(path, e))?;
        let mut lines = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| IoError::file(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: LogLine = serde_json::from_str(&line)
                .map_err(|e| IoError::format(path, format!("line {}: {e}", i + 1)))?;
            lines.push(parsed);
        }
        Ok(lines)
    }
}

pub mod replay {
    use std::str::FromStr;
    use std::time::{Duration, Instant};

    use slipcue_core::{DetectorConfig, DetectorError, ForceTrace, SessionLog, SlipDetector};

    /// Playback speed for streaming a recorded trace.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub enum Rate {
        /// Wall clock pacing scaled by this factor (1.0 is real time).
        Timed(f64),
        /// No pacing; feed samples as fast as possible.
        Unlimited,
    }

    impl FromStr for Rate {
        type Err = String;

        fn from_str(s: &str) -> Result<Self, Self::Err> {
            if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("unlimited") {
                return Ok(Rate::Unlimited);
            }
            let factor: f64 = s
                .parse()
                .map_err(|_| format!("rate must be a positive number or 'inf', got {s:?}"))?;
            if !(factor.is_finite() && factor > 0.0) {
                return Err(format!("rate must be a positive number or 'inf', got {s:?}"));
            }
            Ok(Rate::Timed(factor))
        }
    }

    /// Streams a trace through the detector one sample at a time.
    ///
    /// With a timed rate each sample waits for its absolute deadline
    /// `start + (t - t0) / factor`, so sleep jitter does not accumulate.
    /// The resulting log is identical to a batch run over the same trace
    /// because pacing never touches the sample values.
    pub fn replay_trace(
        trace: &ForceTrace,
        cfg: DetectorConfig,
        rate: Rate,
    ) -> Result<SessionLog, DetectorError> {
        let mut detector = SlipDetector::new(cfg)?;
        let start = Instant::now();
        let t0 = trace.samples[0].t;
        for &sample in &trace.samples {
            if let Rate::Timed(factor) = rate {
                let offset = Duration::from_secs_f64((sample.t - t0) / factor);
                let deadline = start + offset;
                let now = Instant::now();
                if deadline > now {
                    std::thread::sleep(deadline - now);
                }
            }
            detector.step(sample)?;
        }
        detector.finish()
    }

}
