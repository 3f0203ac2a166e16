//! Group comparisons, rank correlation and the learning-curve power fit.

mod power;

pub use power::{fit_power_law, marginal_gain, threshold_day, PowerFit, PowerFitConfig, DEFAULT_HORIZON_DAYS};

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

fn need_two(xs: &[f64]) -> Result<()> {
    if xs.len() < 2 {
        Err(Error::TooFewSamples { needed: 2, got: xs.len() })
    } else {
        Ok(())
    }
}

/// Standardized mean difference `(mean(x) - mean(y)) / pooled std`.
pub fn cohens_d(x: &[f64], y: &[f64]) -> Result<f64> {
    need_two(x)?;
    need_two(y)?;
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let pooled = (((n1 - 1.0) * variance(x) + (n2 - 1.0) * variance(y)) / (n1 + n2 - 2.0)).sqrt();
    if !(pooled > 0.0) {
        return Err(Error::ZeroPooledStd);
    }
    Ok((mean(x) - mean(y)) / pooled)
}

/// Two-sided tail probability `P(|T| >= |t|)` for Student's t with `df`
/// degrees of freedom, via the regularized incomplete beta function.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    beta_reg(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// One-sided upper tail `P(T >= t)`.
pub fn t_upper_p(t: f64, df: f64) -> f64 {
    let half = 0.5 * t_two_sided_p(t, df);
    if t >= 0.0 {
        half
    } else {
        1.0 - half
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

impl TTest {
    /// One-sided p-value for the alternative `mean(x) > mean(y)`.
    pub fn p_greater(&self) -> f64 {
        t_upper_p(self.t, self.df)
    }
}

/// Welch's unequal-variance t-test with Welch-Satterthwaite df.
pub fn welch_t_test(x: &[f64], y: &[f64]) -> Result<TTest> {
    need_two(x)?;
    need_two(y)?;
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let (a, b) = (variance(x) / n1, variance(y) / n2);
    let se2 = a + b;
    if !(se2 > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let t = (mean(x) - mean(y)) / se2.sqrt();
    let df = se2 * se2 / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0));
    Ok(TTest { t, df, p: t_two_sided_p(t, df) })
}

/// Average ranks (1-based); tied values share the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    /// Two-sided p-value from the t approximation with n - 2 df.
    pub p: f64,
    pub n: usize,
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::DegenerateInput(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: x.len() });
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y))?;
    let df = (x.len() - 2) as f64;
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        t_two_sided_p(rho * (df / (1.0 - rho * rho)).sqrt(), df)
    };
    Ok(Correlation { rho, p, n: x.len() })
}
