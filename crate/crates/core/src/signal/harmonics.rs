//! H1-H2 from a windowed, zero-padded magnitude spectrum.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::Frame;
use crate::error::{Error, Result};

/// The spectrum is zero-padded to at least this many times the frame length.
const PAD_FACTOR: usize = 8;
/// Harmonic search half-width as a fraction of f0.
const BAND_FRACTION: f64 = 0.2;
/// Peaks more than this far below the spectral maximum are treated as noise.
const DYNAMIC_RANGE_DB: f64 = 60.0;
/// Peaks must also clear the median spectral magnitude by this factor.
const MEDIAN_FACTOR: f64 = 2.0;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// 4-term Blackman-Harris window (sidelobes below -92 dB).
fn blackman_harris(n: usize) -> Vec<f64> {
    const A: [f64; 4] = [0.35875, 0.48829, 0.14128, 0.01168];
    if n == 1 {
        return vec![1.0];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = 2.0 * PI * i as f64 / m;
            A[0] - A[1] * x.cos() + A[2] * (2.0 * x).cos() - A[3] * (3.0 * x).cos()
        })
        .collect()
}

fn magnitude_spectrum(xs: &[f64]) -> (Vec<f64>, usize) {
    let size = (xs.len() * PAD_FACTOR).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); size];
    for ((slot, x), w) in buf.iter_mut().zip(xs).zip(blackman_harris(xs.len())) {
        slot.re = x * w;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(size));
    fft.process(&mut buf);
    let mags = buf[..=size / 2].iter().map(|c| c.norm()).collect();
    (mags, size)
}

struct Spectrum {
    mags: Vec<f64>,
    bin_hz: f64,
    floor: f64,
}

impl Spectrum {
    fn new(frame: &Frame<'_>) -> Self {
        let (mags, size) = magnitude_spectrum(frame.samples);
        let peak = mags.iter().copied().fold(0.0, f64::max);
        let mut sorted = mags.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let floor = (peak * 10f64.powf(-DYNAMIC_RANGE_DB / 20.0)).max(MEDIAN_FACTOR * median);
        Spectrum {
            mags,
            bin_hz: frame.sample_rate_hz as f64 / size as f64,
            floor,
        }
    }

    /// Interpolated peak level (dB) of the strongest local maximum within
    /// `center +- half_width` Hz.
    fn harmonic_db(&self, center: f64, half_width: f64) -> Result<f64> {
        let not_found = Error::HarmonicNotFound { freq_hz: center };
        let last = self.mags.len() - 1;
        let lo = (((center - half_width) / self.bin_hz).ceil().max(1.0)) as usize;
        let hi = ((center + half_width) / self.bin_hz).floor() as usize;
        if hi >= last || lo > hi {
            return Err(not_found);
        }
        let m = &self.mags;
        let k = (lo..=hi)
            .filter(|&k| m[k] > m[k - 1] && m[k] >= m[k + 1] && m[k] > self.floor)
            .max_by(|&a, &b| m[a].total_cmp(&m[b]))
            .ok_or(not_found)?;
        let db = |v: f64| 20.0 * v.log10();
        let (y0, y1, y2) = (db(m[k - 1]), db(m[k]), db(m[k + 1]));
        let denom = y0 - 2.0 * y1 + y2;
        if denom == 0.0 {
            return Ok(y1);
        }
        let delta = 0.5 * (y0 - y2) / denom;
        Ok(y1 - 0.25 * (y0 - y2) * delta)
    }
}

/// H1-H2 in dB: level of the first harmonic minus level of the second,
/// each located as the interpolated spectral peak within +-20 % of f0
/// around `f0` and `2 f0`.
pub fn compute_h1h2(frame: &Frame<'_>, f0_hz: f64) -> Result<f64> {
    if !(f0_hz > 0.0) || frame.samples.is_empty() {
        return Err(Error::HarmonicNotFound { freq_hz: f0_hz });
    }
    let spectrum = Spectrum::new(frame);
    let half = BAND_FRACTION * f0_hz;
    let h1 = spectrum.harmonic_db(f0_hz, half)?;
    let h2 = spectrum.harmonic_db(2.0 * f0_hz, half)?;
    Ok(h1 - h2)
}
