//! Accelerometer signal processing: framing, voicing, f0, H1-H2 and NSAM.
//!
//! A recording is cut into non-overlapping frames (50 ms by default, the
//! trailing partial frame is dropped). Each frame gets an NSAM level; frames
//! judged voiced additionally get an f0 estimate and an H1-H2 value.

mod calibration;
mod harmonics;
mod pitch;

pub use calibration::{apply_calibration, fit_calibration, CalibrationModel};
pub use harmonics::compute_h1h2;
pub use pitch::{detect_voicing, estimate_f0, normalized_autocorrelation};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nominal sample rate of the ambulatory accelerometer.
pub const NOMINAL_SAMPLE_RATE_HZ: u32 = 11_025;

/// Recording condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    LabRainbow,
    LabSpontaneous,
    Field,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::LabRainbow => "lab_rainbow",
            Condition::LabSpontaneous => "lab_spontaneous",
            Condition::Field => "field",
        }
    }

    pub fn is_lab(self) -> bool {
        !matches!(self, Condition::Field)
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lab_rainbow" => Ok(Condition::LabRainbow),
            "lab_spontaneous" => Ok(Condition::LabSpontaneous),
            "field" => Ok(Condition::Field),
            other => Err(Error::Parse(format!("unknown condition {other:?}"))),
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One mono accelerometer signal with its identity.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelRecording {
    samples: Vec<f64>,
    sample_rate_hz: u32,
    pub subject_id: String,
    pub condition: Condition,
    pub day_index: Option<u32>,
}

impl AccelRecording {
    /// Validates and wraps a decoded signal. Samples must be finite and in
    /// `[-1, 1]`; field recordings must carry a day index.
    pub fn new(
        samples: Vec<f64>,
        sample_rate_hz: u32,
        subject_id: impl Into<String>,
        condition: Condition,
        day_index: Option<u32>,
    ) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidRecording("sample rate is zero".into()));
        }
        if let Some(i) = samples
            .iter()
            .position(|s| !s.is_finite() || s.abs() > 1.0)
        {
            return Err(Error::InvalidRecording(format!(
                "sample {i} = {} outside [-1, 1]",
                samples[i]
            )));
        }
        if condition == Condition::Field && day_index.is_none() {
            return Err(Error::InvalidRecording(
                "field recording without day index".into(),
            ));
        }
        Ok(AccelRecording {
            samples,
            sample_rate_hz,
            subject_id: subject_id.into(),
            condition,
            day_index,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

/// A view of one analysis frame.
#[derive(Debug, Clone, Copy)]
pub struct Frame<'a> {
    pub index: usize,
    pub samples: &'a [f64],
    pub sample_rate_hz: u32,
}

/// Per-frame measurements.
///
/// `nsam_db` is `None` only for digitally silent frames, where the log of
/// the RMS is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameFeatureRow {
    pub frame_index: u64,
    pub voiced: bool,
    pub f0_hz: Option<f64>,
    pub h1h2_db: Option<f64>,
    pub nsam_db: Option<f64>,
}

impl FrameFeatureRow {
    pub fn unvoiced(frame_index: u64, nsam_db: Option<f64>) -> Self {
        FrameFeatureRow {
            frame_index,
            voiced: false,
            f0_hz: None,
            h1h2_db: None,
            nsam_db,
        }
    }
}

/// Voice activity and pitch search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VoicingConfig {
    /// Minimum frame RMS in dB re full scale.
    pub energy_floor_db: f64,
    /// Minimum normalized autocorrelation inside the f0 lag range.
    pub periodicity_threshold: f64,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
}

impl Default for VoicingConfig {
    fn default() -> Self {
        VoicingConfig {
            energy_floor_db: -50.0,
            periodicity_threshold: 0.5,
            f0_min_hz: 70.0,
            f0_max_hz: 600.0,
        }
    }
}

/// Settings for [`extract_frame_features`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    pub frame_ms: f64,
    pub voicing: VoicingConfig,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            frame_ms: 50.0,
            voicing: VoicingConfig::default(),
        }
    }
}

/// Frame length in samples: `round(frame_ms / 1000 * fs)`.
pub fn frame_length(frame_ms: f64, sample_rate_hz: u32) -> usize {
    (frame_ms / 1000.0 * sample_rate_hz as f64).round() as usize
}

/// Cuts a recording into consecutive non-overlapping frames.
pub fn frame_signal(rec: &AccelRecording, frame_ms: f64) -> Result<Vec<Frame<'_>>> {
    if rec.samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    let len = frame_length(frame_ms, rec.sample_rate_hz);
    if len == 0 {
        return Err(Error::InvalidRecording(format!(
            "frame of {frame_ms} ms is shorter than one sample"
        )));
    }
    Ok(rec
        .samples
        .chunks_exact(len)
        .enumerate()
        .map(|(index, samples)| Frame {
            index,
            samples,
            sample_rate_hz: rec.sample_rate_hz,
        })
        .collect())
}

pub(crate) fn rms(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
}

/// NSAM of a frame: `20 log10(RMS)`, dB re full scale.
pub fn compute_nsam(frame: &Frame<'_>) -> Result<f64> {
    let r = rms(frame.samples);
    if r == 0.0 {
        return Err(Error::SilentFrame);
    }
    Ok(20.0 * r.log10())
}

/// Output of [`extract_frame_features`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeatures {
    pub rows: Vec<FrameFeatureRow>,
    /// Frames that passed voicing but whose f0 or H2 could not be resolved;
    /// they are reported as unvoiced.
    pub demoted_frames: usize,
}

impl FrameFeatures {
    pub fn voiced_count(&self) -> usize {
        self.rows.iter().filter(|r| r.voiced).count()
    }
}

fn frame_row(frame: &Frame<'_>, cfg: &VoicingConfig) -> (FrameFeatureRow, bool) {
    let nsam = compute_nsam(frame).ok();
    let index = frame.index as u64;
    if !detect_voicing(frame, cfg) {
        return (FrameFeatureRow::unvoiced(index, nsam), false);
    }
    let measured = estimate_f0(frame, cfg)
        .and_then(|f0| compute_h1h2(frame, f0).map(|h| (f0, h)));
    match measured {
        Ok((f0, h1h2)) => (
            FrameFeatureRow {
                frame_index: index,
                voiced: true,
                f0_hz: Some(f0),
                h1h2_db: Some(h1h2),
                nsam_db: nsam,
            },
            false,
        ),
        Err(_) => (FrameFeatureRow::unvoiced(index, nsam), true),
    }
}

/// Runs framing, voicing, f0, H1-H2 and NSAM over a whole recording.
pub fn extract_frame_features(rec: &AccelRecording, cfg: &ExtractionConfig) -> Result<FrameFeatures> {
    let frames = frame_signal(rec, cfg.frame_ms)?;
    let mut rows = Vec::with_capacity(frames.len());
    let mut demoted_frames = 0;
    for frame in &frames {
        let (row, demoted) = frame_row(frame, &cfg.voicing);
        demoted_frames += demoted as usize;
        rows.push(row);
    }
    if demoted_frames > 0 {
        log::debug!(
            "{}: {demoted_frames} voiced frames demoted (f0/H2 unresolved)",
            rec.subject_id
        );
    }
    Ok(FrameFeatures {
        rows,
        demoted_frames,
    })
}
