//! Saturating learning curve `y = a * x^b + c`.
//!
//! For a fixed exponent the model is linear in `(a, c)`, so the fit profiles
//! `b`: a grid over the bracket locates the basin, golden-section search
//! refines it, and each evaluation solves the 2-parameter least squares in
//! closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub sse: f64,
}

impl PowerFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.a * x.powf(self.b) + self.c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerFitConfig {
    pub b_min: f64,
    pub b_max: f64,
    pub grid_points: usize,
    pub b_tol: f64,
}

impl Default for PowerFitConfig {
    fn default() -> Self {
        PowerFitConfig {
            b_min: -6.0,
            b_max: -0.01,
            grid_points: 600,
            b_tol: 1e-12,
        }
    }
}

/// Least-squares `(a, c)` for a fixed exponent.
fn profile(points: &[(f64, f64)], b: f64) -> PowerFit {
    let n = points.len() as f64;
    let u: Vec<f64> = points.iter().map(|(x, _)| x.powf(b)).collect();
    let mu = u.iter().sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut suu, mut suy) = (0.0, 0.0);
    for (ui, (_, y)) in u.iter().zip(points) {
        suu += (ui - mu) * (ui - mu);
        suy += (ui - mu) * (y - my);
    }
    let a = if suu > 0.0 { suy / suu } else { 0.0 };
    let c = my - a * mu;
    let sse = u
        .iter()
        .zip(points)
        .map(|(ui, (_, y))| (y - a * ui - c).powi(2))
        .sum();
    PowerFit { a, b, c, sse }
}

fn better(p: PowerFit, q: PowerFit) -> PowerFit {
    if q.sse < p.sse {
        q
    } else {
        p
    }
}

/// Fits `y = a x^b + c` with `b` restricted to the configured bracket.
///
/// Constant `y` yields `a = 0`, `c = mean(y)` at the first grid exponent.
pub fn fit_power_law(points: &[(f64, f64)], cfg: &PowerFitConfig) -> Result<PowerFit> {
    if points.iter().any(|(x, y)| !(*x > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(Error::DegenerateInput("x must be positive and all values finite".into()));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::DegenerateInput(format!("{} distinct x values, need 3", xs.len())));
    }
    if !(cfg.b_min < cfg.b_max) || cfg.grid_points < 2 {
        return Err(Error::DegenerateInput("empty exponent bracket".into()));
    }

    let step = (cfg.b_max - cfg.b_min) / (cfg.grid_points - 1) as f64;
    let grid: Vec<PowerFit> = (0..cfg.grid_points)
        .map(|i| profile(points, cfg.b_min + step * i as f64))
        .collect();
    let best_i = (0..grid.len())
        .min_by(|&i, &j| grid[i].sse.total_cmp(&grid[j].sse).then(i.cmp(&j)))
        .unwrap();
    let mut best = grid[best_i];

    let mut lo = cfg.b_min + step * best_i.saturating_sub(1) as f64;
    let mut hi = (cfg.b_min + step * (best_i + 1) as f64).min(cfg.b_max);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = profile(points, x1);
    let mut f2 = profile(points, x2);
    for _ in 0..200 {
        if hi - lo <= cfg.b_tol {
            break;
        }
        if f1.sse <= f2.sse {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = profile(points, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = profile(points, x2);
        }
    }
    best = better(best, better(f1, f2));
    Ok(best)
}

/// Predicted gain from day `x` to day `x + 1`.
pub fn marginal_gain(fit: &PowerFit, x: u32) -> f64 {
    fit.predict(x as f64 + 1.0) - fit.predict(x as f64)
}

/// Default search horizon for [`threshold_day`].
pub const DEFAULT_HORIZON_DAYS: u32 = 365;

/// Smallest day `d >= 1` whose marginal gain falls below `threshold`.
pub fn threshold_day(fit: &PowerFit, threshold: f64, horizon: u32) -> Result<u32> {
    (1..=horizon)
        .find(|&d| marginal_gain(fit, d) < threshold)
        .ok_or(Error::NotReached { horizon })
}
