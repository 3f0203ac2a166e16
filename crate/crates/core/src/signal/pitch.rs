//! Autocorrelation voicing decision and f0 estimation.

use super::{rms, Frame, VoicingConfig};
use crate::error::{Error, Result};

/// Peaks within this fraction of the best peak count as candidates; the
/// shortest such lag wins, which keeps multiples of the period from being
/// chosen over the period itself.
const OCTAVE_TOLERANCE: f64 = 0.9;

/// Normalized autocorrelation of the mean-removed frame at `lag`:
/// `sum x[i] x[i+lag] / sqrt(sum x[i]^2 * sum x[i+lag]^2)` over the overlap.
/// Returns 0 when either overlap segment has no energy.
pub fn normalized_autocorrelation(xs: &[f64], lag: usize) -> f64 {
    if lag >= xs.len() {
        return 0.0;
    }
    let n = xs.len() - lag;
    let (mut cross, mut head, mut tail) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let a = xs[i];
        let b = xs[i + lag];
        cross += a * b;
        head += a * a;
        tail += b * b;
    }
    let denom = (head * tail).sqrt();
    if denom > 0.0 {
        cross / denom
    } else {
        0.0
    }
}

fn centered(xs: &[f64]) -> Vec<f64> {
    let mean = xs.iter().sum::<f64>() / xs.len().max(1) as f64;
    xs.iter().map(|x| x - mean).collect()
}

fn lag_range(sample_rate_hz: u32, frame_len: usize, cfg: &VoicingConfig) -> Option<(usize, usize)> {
    let fs = sample_rate_hz as f64;
    let lo = (fs / cfg.f0_max_hz).floor().max(1.0) as usize;
    let hi = ((fs / cfg.f0_min_hz).ceil() as usize).min(frame_len.saturating_sub(2));
    (lo <= hi).then_some((lo, hi))
}

/// Autocorrelation values for lags `lo - 1 ..= hi + 1`.
fn autocorrelation_curve(xs: &[f64], lo: usize, hi: usize) -> Vec<f64> {
    (lo - 1..=hi + 1)
        .map(|lag| normalized_autocorrelation(xs, lag))
        .collect()
}

/// Voiced iff the frame RMS reaches the energy floor and the normalized
/// autocorrelation somewhere in the f0 lag range reaches the periodicity
/// threshold.
pub fn detect_voicing(frame: &Frame<'_>, cfg: &VoicingConfig) -> bool {
    let level = rms(frame.samples);
    if level == 0.0 || 20.0 * level.log10() < cfg.energy_floor_db {
        return false;
    }
    let Some((lo, hi)) = lag_range(frame.sample_rate_hz, frame.samples.len(), cfg) else {
        return false;
    };
    let xs = centered(frame.samples);
    (lo..=hi).any(|lag| normalized_autocorrelation(&xs, lag) >= cfg.periodicity_threshold)
}

/// Fundamental frequency from the autocorrelation peak, refined by a
/// parabola through the peak and its two neighbouring lags.
pub fn estimate_f0(frame: &Frame<'_>, cfg: &VoicingConfig) -> Result<f64> {
    let (lo, hi) = lag_range(frame.sample_rate_hz, frame.samples.len(), cfg)
        .ok_or(Error::NoPeriodicity)?;
    let xs = centered(frame.samples);
    let curve = autocorrelation_curve(&xs, lo, hi);
    // curve[j] holds lag lo - 1 + j
    let peaks: Vec<usize> = (1..curve.len() - 1)
        .filter(|&j| curve[j] >= curve[j - 1] && curve[j] > curve[j + 1])
        .collect();
    let best = peaks
        .iter()
        .map(|&j| curve[j])
        .fold(f64::NEG_INFINITY, f64::max);
    if !(best >= cfg.periodicity_threshold) {
        return Err(Error::NoPeriodicity);
    }
    let j = peaks
        .into_iter()
        .find(|&j| curve[j] >= OCTAVE_TOLERANCE * best)
        .expect("best peak satisfies its own tolerance");

    let (y0, y1, y2) = (curve[j - 1], curve[j], curve[j + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    let offset = if denom != 0.0 { 0.5 * (y0 - y2) / denom } else { 0.0 };
    let lag = (lo - 1 + j) as f64 + offset.clamp(-0.5, 0.5);
    let f0 = frame.sample_rate_hz as f64 / lag;
    if f0 < cfg.f0_min_hz || f0 > cfg.f0_max_hz {
        return Err(Error::NoPeriodicity);
    }
    Ok(f0)
}
