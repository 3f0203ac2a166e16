use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Group;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredLabel {
    pub score: f64,
    pub label: Group,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// Cumulative `(fp, tp)` counts at each distinct score threshold, highest
/// first, preceded by `(0, 0)`. Returns the counts and the class totals.
fn threshold_counts(data: &[ScoredLabel]) -> Result<(Vec<(u64, u64)>, u64, u64)> {
    let pos = data.iter().filter(|s| s.label.is_positive()).count() as u64;
    let neg = data.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut sorted: Vec<&ScoredLabel> = data.iter().collect();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut counts = vec![(0u64, 0u64)];
    let (mut fp, mut tp) = (0u64, 0u64);
    for (i, s) in sorted.iter().enumerate() {
        if s.label.is_positive() {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_tie = sorted.get(i + 1).is_none_or(|next| next.score != s.score);
        if last_of_tie {
            counts.push((fp, tp));
        }
    }
    Ok((counts, pos, neg))
}

/// ROC points from a sweep over the distinct scores (predict PVH when
/// `score >= threshold`), from `(0, 0)` to `(1, 1)`, sorted by FPR.
pub fn roc_curve(data: &[ScoredLabel]) -> Result<Vec<RocPoint>> {
    let (counts, pos, neg) = threshold_counts(data)?;
    Ok(counts
        .into_iter()
        .map(|(fp, tp)| RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        })
        .collect())
}

/// Trapezoidal area under [`roc_curve`], accumulated in integer counts so
/// it agrees with the Mann-Whitney pair statistic (ties count 1/2).
pub fn auc(data: &[ScoredLabel]) -> Result<f64> {
    let (counts, pos, neg) = threshold_counts(data)?;
    let twice_area: u128 = counts
        .windows(2)
        .map(|w| ((w[1].0 - w[0].0) as u128) * ((w[0].1 + w[1].1) as u128))
        .sum();
    Ok(twice_area as f64 / (2 * pos as u128 * neg as u128) as f64)
}
