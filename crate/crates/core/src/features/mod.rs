//! Day-level distributional features and their aggregation across days.
//!
//! A day is summarized by the standard deviation of its voiced-frame H1-H2
//! values and the skewness of its voiced-frame NSAM values. A subject's
//! feature vector is the mean of those two statistics over the days used.

mod windows;

pub use windows::{
    sample_fixed_duration_windows, summarize_window, window_length_frames, DayMoments,
    DayVoicing, WindowConfig, WindowSpec,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::FrameFeatureRow;

/// Frame duration used for all duration bookkeeping.
pub const FRAME_SECONDS: f64 = 0.050;

/// Diagnostic group of a subject. `Pvh` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Pvh,
    Control,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Pvh => "pvh",
            Group::Control => "control",
        }
    }

    pub fn is_positive(self) -> bool {
        self == Group::Pvh
    }
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pvh" => Ok(Group::Pvh),
            "control" => Ok(Group::Control),
            other => Err(Error::Parse(format!("unknown group {other:?}"))),
        }
    }
}

/// Identity of a subject.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectMeta {
    pub id: String,
    pub group: Group,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayFeatures {
    pub subject_id: String,
    pub day_index: u32,
    pub h1h2_std: f64,
    pub nsam_skewness: f64,
    pub voiced_frame_count: usize,
    pub total_frame_count: usize,
}

impl DayFeatures {
    pub fn duration_seconds(&self) -> f64 {
        self.total_frame_count as f64 * FRAME_SECONDS
    }
}

/// Subject-level features: `[mean H1-H2 std, mean NSAM skewness]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectFeatures {
    pub subject_id: String,
    pub group: Group,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_id: Option<String>,
    pub feature_vector: [f64; 2],
    pub days_used: usize,
}

impl SubjectFeatures {
    pub fn new(meta: &SubjectMeta, feature_vector: [f64; 2], days_used: usize) -> Self {
        SubjectFeatures {
            subject_id: meta.id.clone(),
            group: meta.group,
            pair_id: meta.pair_id.clone(),
            feature_vector,
            days_used,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation with the n - 1 denominator.
pub fn sample_std(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: xs.len() });
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Ok((ss / (xs.len() - 1) as f64).sqrt())
}

/// Adjusted Fisher-Pearson skewness
/// `G1 = sqrt(n (n - 1)) / (n - 2) * m3 / m2^(3/2)`.
pub fn skewness(xs: &[f64]) -> Result<f64> {
    let n = xs.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    let m = mean(xs);
    let (mut m2, mut m3) = (0.0, 0.0);
    for x in xs {
        let d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n as f64;
    m3 /= n as f64;
    // Rounding in the mean leaves a residue of order eps * |x| on
    // constant input; anything at that scale is zero variance.
    let scale = xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if m2.sqrt() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ZeroVariance);
    }
    let nf = n as f64;
    Ok((nf * (nf - 1.0)).sqrt() / (nf - 2.0) * m3 / m2.powf(1.5))
}

/// Minimum voiced frames for a day summary.
pub const MIN_VOICED_PER_DAY: usize = 3;

/// Statistics of the voiced frames of one day (or one in-lab recording).
pub fn summarize_day(rows: &[FrameFeatureRow], subject_id: &str, day_index: u32) -> Result<DayFeatures> {
    let mut h1h2 = Vec::new();
    let mut nsam = Vec::new();
    for row in rows.iter().filter(|r| r.voiced) {
        if let (Some(h), Some(n)) = (row.h1h2_db, row.nsam_db) {
            h1h2.push(h);
            nsam.push(n);
        }
    }
    if h1h2.len() < MIN_VOICED_PER_DAY {
        return Err(Error::InsufficientVoicing {
            needed: MIN_VOICED_PER_DAY,
            got: h1h2.len(),
        });
    }
    Ok(DayFeatures {
        subject_id: subject_id.to_owned(),
        day_index,
        h1h2_std: sample_std(&h1h2)?,
        nsam_skewness: skewness(&nsam)?,
        voiced_frame_count: h1h2.len(),
        total_frame_count: rows.len(),
    })
}

/// Frames in `hours`, rounded to whole frames.
pub fn frames_in_hours(hours: f64) -> usize {
    (hours * 3600.0 / FRAME_SECONDS).round() as usize
}

/// Keeps days lasting at least `min_hours`, in input order.
pub fn filter_valid_days(days: &[DayFeatures], min_hours: f64) -> Vec<DayFeatures> {
    let min_frames = frames_in_hours(min_hours);
    days.iter()
        .filter(|d| d.total_frame_count >= min_frames)
        .cloned()
        .collect()
}

/// Mean that reproduces a repeated value bit-for-bit.
fn anchored_mean(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = xs.clone();
    let Some(first) = it.next() else { return f64::NAN };
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + (x - first), n + 1));
    first + sum / n as f64
}

/// Averages the first `k` days (monitoring order) into a subject feature vector.
pub fn aggregate_days(meta: &SubjectMeta, days: &[DayFeatures], k: usize) -> Result<SubjectFeatures> {
    if k == 0 || days.len() < k {
        return Err(Error::NotEnoughDays { needed: k.max(1), got: days.len() });
    }
    let used = &days[..k];
    let h = anchored_mean(used.iter().map(|d| d.h1h2_std));
    let s = anchored_mean(used.iter().map(|d| d.nsam_skewness));
    Ok(SubjectFeatures::new(meta, [h, s], k))
}
