use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{run_cross_validation, MeanStd};
use crate::features::{Group, SubjectFeatures};
use crate::model::LogisticConfig;
use crate::rng::{derive_seed, repetition_seed, rng_from, stream, DpiRng};

/// Distribution of the uninformative features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NullDistribution {
    #[default]
    Normal,
    Uniform,
}

impl NullDistribution {
    fn draw(self, rng: &mut DpiRng) -> f64 {
        match self {
            NullDistribution::Normal => rng.sample(StandardNormal),
            NullDistribution::Uniform => rng.random::<f64>(),
        }
    }
}

/// One-percentage-point histogram bin; `bin` is the lower edge in percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistBin {
    pub bin: i64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullResult {
    pub n_pairs: usize,
    pub n_reps: usize,
    pub folds: usize,
    pub distribution: NullDistribution,
    /// Fractions in `[0, 1]`.
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    /// Empirical 95th percentile: the one-sided 95% chance bound.
    pub upper_95: f64,
    pub accuracies: Vec<f64>,
    pub histogram: Vec<HistBin>,
}

/// Linear-interpolation percentile (`q` in `[0, 1]`) of unsorted data.
pub fn percentile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

fn histogram(accuracies: &[f64]) -> Vec<HistBin> {
    let bins: Vec<i64> = accuracies.iter().map(|a| (a * 100.0 + 1e-9).floor() as i64).collect();
    let (Some(&lo), Some(&hi)) = (bins.iter().min(), bins.iter().max()) else {
        return Vec::new();
    };
    (lo..=hi)
        .map(|b| HistBin { bin: b, count: bins.iter().filter(|&&x| x == b).count() })
        .collect()
}

fn random_cohort(n_pairs: usize, dist: NullDistribution, seed: u64) -> Vec<SubjectFeatures> {
    let mut rng = rng_from(seed);
    (0..2 * n_pairs)
        .map(|i| {
            let group = if i < n_pairs { Group::Pvh } else { Group::Control };
            SubjectFeatures {
                subject_id: format!("r{i}"),
                group,
                pair_id: None,
                feature_vector: [dist.draw(&mut rng), dist.draw(&mut rng)],
                days_used: 0,
            }
        })
        .collect()
}

/// Cross-validated accuracy of a balanced cohort whose two features carry
/// no class information, repeated `n_reps` times with fresh features and
/// fresh fold splits.
pub fn run_null_baseline(
    n_pairs: usize,
    n_reps: usize,
    folds: usize,
    seed: u64,
    dist: NullDistribution,
    cfg: &LogisticConfig,
) -> Result<NullResult> {
    if n_pairs < folds {
        return Err(Error::ClassTooSmall { class: Group::Pvh.as_str(), size: n_pairs, folds });
    }
    let accuracies = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let rep_seed = repetition_seed(seed, r as u64);
            let cohort = random_cohort(n_pairs, dist, derive_seed(rep_seed, stream::NULL_FEATURES));
            let report = run_cross_validation(&cohort, folds, rep_seed, cfg)?;
            Ok(MeanStd::of(&report.fold_accuracies()).mean)
        })
        .collect::<Result<Vec<f64>>>()?;
    let summary = MeanStd::of(&accuracies);
    Ok(NullResult {
        n_pairs,
        n_reps,
        folds,
        distribution: dist,
        mean_accuracy: summary.mean,
        std_accuracy: summary.std,
        upper_95: percentile(&accuracies, 0.95),
        histogram: histogram(&accuracies),
        accuracies,
    })
}
