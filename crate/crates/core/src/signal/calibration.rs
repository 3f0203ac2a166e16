use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear map from NSAM (dB re full scale) to SPL (dB).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationModel {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

/// Ordinary least squares of SPL on NSAM over `(nsam_db, spl_db)` pairs.
pub fn fit_calibration(pairs: &[(f64, f64)]) -> Result<CalibrationModel> {
    if pairs.len() < 2 {
        return Err(Error::DegenerateCalibration("fewer than two pairs"));
    }
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in pairs {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if !(sxx > 0.0) {
        return Err(Error::DegenerateCalibration("NSAM has zero variance"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = pairs
        .iter()
        .map(|&(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(CalibrationModel {
        slope,
        intercept,
        residual_rms: (sse / n).sqrt(),
    })
}

pub fn apply_calibration(model: &CalibrationModel, nsam_db: f64) -> f64 {
    model.slope * nsam_db + model.intercept
}
