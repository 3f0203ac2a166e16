//! Fixed-duration window sampling: a total recording budget split evenly
//! over `k` randomly chosen days, one contiguous window per day.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{frames_in_hours, sample_std, skewness, DayFeatures, MIN_VOICED_PER_DAY};
use crate::error::{Error, Result};
use crate::rng::rng_from;
use crate::signal::FrameFeatureRow;

/// Window draws tried within one day before moving to another day.
const TRIES_PER_DAY: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub total_hours: f64,
    pub min_voiced_frames: usize,
    /// Rejected draws tolerated before giving up.
    pub max_retries: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            total_hours: 6.0,
            min_voiced_frames: 6000,
            max_retries: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub day_index: u32,
    pub start_frame: usize,
    pub length_frames: usize,
    pub voiced_frame_count: usize,
}

/// Per-day window length: the total budget in frames split over `k` days.
pub fn window_length_frames(total_hours: f64, k: usize) -> usize {
    frames_in_hours(total_hours) / k.max(1)
}

fn counts_as_voiced(row: &FrameFeatureRow) -> bool {
    row.voiced && row.h1h2_db.is_some() && row.nsam_db.is_some()
}

/// Voiced-frame prefix counts of one day.
#[derive(Debug, Clone, PartialEq)]
pub struct DayVoicing {
    pub day_index: u32,
    prefix: Vec<u32>,
}

impl DayVoicing {
    pub fn from_rows(day_index: u32, rows: &[FrameFeatureRow]) -> Self {
        let mut prefix = Vec::with_capacity(rows.len() + 1);
        let mut acc = 0u32;
        prefix.push(0);
        for row in rows {
            acc += counts_as_voiced(row) as u32;
            prefix.push(acc);
        }
        DayVoicing { day_index, prefix }
    }

    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn voiced_in(&self, start: usize, len: usize) -> usize {
        (self.prefix[start + len] - self.prefix[start]) as usize
    }
}

/// Draws `k` distinct days and one window per day.
///
/// Each window holds `window_length_frames(total_hours, k)` frames. A window
/// with fewer than `min_voiced_frames` voiced frames is redrawn within the
/// same day; after a few failures the day itself is swapped for an unused
/// one. More than `max_retries` rejections ends the search.
pub fn sample_fixed_duration_windows(
    days: &[DayVoicing],
    k: usize,
    cfg: &WindowConfig,
    seed: u64,
) -> Result<Vec<WindowSpec>> {
    let length = window_length_frames(cfg.total_hours, k);
    let hosts: Vec<usize> = (0..days.len())
        .filter(|&d| days[d].len() >= length && length > 0)
        .collect();
    if k == 0 || hosts.len() < k {
        return Err(Error::NotEnoughDays { needed: k.max(1), got: hosts.len() });
    }
    let mut rng = rng_from(seed);
    let picked = sample_indices(&mut rng, hosts.len(), k).into_vec();
    let mut used = vec![false; hosts.len()];
    for &p in &picked {
        used[p] = true;
    }

    let mut rejections = 0usize;
    let mut windows = Vec::with_capacity(k);
    for mut slot in picked {
        'day: loop {
            let day = &days[hosts[slot]];
            for _ in 0..TRIES_PER_DAY {
                let start = rng.random_range(0..=day.len() - length);
                let voiced = day.voiced_in(start, length);
                if voiced >= cfg.min_voiced_frames {
                    windows.push(WindowSpec {
                        day_index: day.day_index,
                        start_frame: start,
                        length_frames: length,
                        voiced_frame_count: voiced,
                    });
                    break 'day;
                }
                rejections += 1;
                if rejections > cfg.max_retries {
                    return Err(Error::WindowSearchExhausted { attempts: rejections });
                }
            }
            let unused: Vec<usize> = (0..hosts.len()).filter(|&i| !used[i]).collect();
            if unused.is_empty() {
                return Err(Error::WindowSearchExhausted { attempts: rejections });
            }
            slot = unused[rng.random_range(0..unused.len())];
            used[slot] = true;
        }
    }
    Ok(windows)
}

/// Day statistics of the frames inside a window (direct computation).
pub fn summarize_window(rows: &[FrameFeatureRow], subject_id: &str, window: &WindowSpec) -> Result<DayFeatures> {
    let slice = &rows[window.start_frame..window.start_frame + window.length_frames];
    super::summarize_day(slice, subject_id, window.day_index)
}

/// Prefix power sums of one day's voiced frames, so window statistics cost
/// O(1) per window.
///
/// Values are shifted by the day's first voiced value before summation to
/// keep the raw-moment formulas well conditioned.
#[derive(Debug, Clone)]
pub struct DayMoments {
    pub voicing: DayVoicing,
    n_shift: f64,
    h1: Vec<f64>,
    h2: Vec<f64>,
    n1: Vec<f64>,
    n2: Vec<f64>,
    n3: Vec<f64>,
}

impl DayMoments {
    pub fn from_rows(day_index: u32, rows: &[FrameFeatureRow]) -> Self {
        let first = rows.iter().find(|r| counts_as_voiced(r));
        let h_shift = first.and_then(|r| r.h1h2_db).unwrap_or(0.0);
        let n_shift = first.and_then(|r| r.nsam_db).unwrap_or(0.0);
        let cap = rows.len() + 1;
        let mut m = DayMoments {
            voicing: DayVoicing::from_rows(day_index, rows),
            n_shift,
            h1: Vec::with_capacity(cap),
            h2: Vec::with_capacity(cap),
            n1: Vec::with_capacity(cap),
            n2: Vec::with_capacity(cap),
            n3: Vec::with_capacity(cap),
        };
        let mut acc = [0.0f64; 5];
        m.push(acc);
        for row in rows {
            if counts_as_voiced(row) {
                let h = row.h1h2_db.unwrap() - h_shift;
                let n = row.nsam_db.unwrap() - n_shift;
                acc[0] += h;
                acc[1] += h * h;
                acc[2] += n;
                acc[3] += n * n;
                acc[4] += n * n * n;
            }
            m.push(acc);
        }
        m
    }

    fn push(&mut self, acc: [f64; 5]) {
        self.h1.push(acc[0]);
        self.h2.push(acc[1]);
        self.n1.push(acc[2]);
        self.n2.push(acc[3]);
        self.n3.push(acc[4]);
    }

    /// `[H1-H2 std, NSAM skewness]` of the voiced frames in a window,
    /// matching [`summarize_window`] up to rounding.
    pub fn window_features(&self, window: &WindowSpec) -> Result<[f64; 2]> {
        let (a, b) = (window.start_frame, window.start_frame + window.length_frames);
        let n = self.voicing.voiced_in(a, window.length_frames);
        if n < MIN_VOICED_PER_DAY {
            return Err(Error::InsufficientVoicing { needed: MIN_VOICED_PER_DAY, got: n });
        }
        let nf = n as f64;
        let d = |v: &Vec<f64>| v[b] - v[a];

        let hm = d(&self.h1) / nf;
        let hvar = ((d(&self.h2) - nf * hm * hm) / (nf - 1.0)).max(0.0);

        let mu = d(&self.n1) / nf;
        let s2 = d(&self.n2) / nf;
        let s3 = d(&self.n3) / nf;
        let m2 = s2 - mu * mu;
        let m3 = s3 - 3.0 * mu * s2 + 2.0 * mu * mu * mu;
        if !(m2 > 1e-24 * (1.0 + self.n_shift.abs()).powi(2)) {
            return Err(Error::ZeroVariance);
        }
        let skew = (nf * (nf - 1.0)).sqrt() / (nf - 2.0) * m3 / m2.powf(1.5);
        Ok([hvar.sqrt(), skew])
    }
}

/// Two-pass reference used by tests of [`DayMoments`].
#[allow(dead_code)]
pub(crate) fn window_features_direct(rows: &[FrameFeatureRow], window: &WindowSpec) -> Result<[f64; 2]> {
    let slice = &rows[window.start_frame..window.start_frame + window.length_frames];
    let (h, n): (Vec<f64>, Vec<f64>) = slice
        .iter()
        .filter(|r| counts_as_voiced(r))
        .map(|r| (r.h1h2_db.unwrap(), r.nsam_db.unwrap()))
        .unzip();
    Ok([sample_std(&h)?, skewness(&n)?])
}
