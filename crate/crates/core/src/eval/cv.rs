use std::collections::BTreeMap;

use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roc::{auc, ScoredLabel};
use super::EvalMetrics;
use crate::error::{Error, Result};
use crate::features::{Group, SubjectFeatures};
use crate::model::{classify_score, dpi_score, fit_dpi, DpiModel, LogisticConfig};
use crate::rng::{repetition_seed, rng_from};

/// Fold index of every subject, aligned with the input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    /// The assignment keyed by subject id.
    pub fn by_id(&self, subjects: &[SubjectFeatures]) -> BTreeMap<String, usize> {
        subjects
            .iter()
            .zip(&self.fold_of)
            .map(|(s, &f)| (s.subject_id.clone(), f))
            .collect()
    }
}

fn class_indices(labels: &[Group], group: Group) -> Vec<usize> {
    (0..labels.len()).filter(|&i| labels[i] == group).collect()
}

/// Shuffles each class with the seeded RNG (PVH first, then controls) and
/// deals it round-robin into `k` folds.
pub fn stratified_kfold_split(labels: &[Group], k: usize, seed: u64) -> Result<FoldAssignment> {
    let mut rng = rng_from(seed);
    let mut fold_of = vec![usize::MAX; labels.len()];
    for group in [Group::Pvh, Group::Control] {
        let mut idx = class_indices(labels, group);
        if k < 2 || idx.len() < k {
            return Err(Error::ClassTooSmall { class: group.as_str(), size: idx.len(), folds: k });
        }
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            fold_of[i] = pos % k;
        }
    }
    Ok(FoldAssignment { k, fold_of })
}

/// Indices (in input order) of a class-balanced subset: every minority
/// subject plus a uniform random draw of the same number from the majority.
pub fn undersample_indices(labels: &[Group], seed: u64) -> Vec<usize> {
    let pvh = class_indices(labels, Group::Pvh);
    let ctl = class_indices(labels, Group::Control);
    let (minority, majority) = if pvh.len() <= ctl.len() { (pvh, ctl) } else { (ctl, pvh) };
    let mut rng = rng_from(seed);
    let mut keep = minority;
    keep.extend(
        sample_indices(&mut rng, majority.len(), keep.len())
            .into_iter()
            .map(|j| majority[j]),
    );
    keep.sort_unstable();
    keep
}

pub fn undersample_balance(subjects: &[SubjectFeatures], seed: u64) -> Vec<SubjectFeatures> {
    let labels: Vec<Group> = subjects.iter().map(|s| s.group).collect();
    undersample_indices(&labels, seed)
        .into_iter()
        .map(|i| subjects[i].clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub repetition: usize,
    pub fold: usize,
    pub test_size: usize,
    pub metrics: Option<EvalMetrics>,
    pub model: Option<DpiModel>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// n - 1 denominator; 0 for fewer than two values.
    pub std: f64,
}

impl MeanStd {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanStd { mean: f64::NAN, std: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub accuracy: MeanStd,
    pub sensitivity: MeanStd,
    pub specificity: MeanStd,
    pub n_folds: usize,
    pub failed_folds: usize,
}

impl Summary {
    pub fn of(folds: &[FoldResult]) -> Self {
        let ok: Vec<&EvalMetrics> = folds.iter().filter_map(|f| f.metrics.as_ref()).collect();
        let col = |f: fn(&EvalMetrics) -> f64| ok.iter().map(|m| f(m)).collect::<Vec<_>>();
        Summary {
            accuracy: MeanStd::of(&col(|m| m.accuracy)),
            sensitivity: MeanStd::of(&col(|m| m.sensitivity)),
            specificity: MeanStd::of(&col(|m| m.specificity)),
            n_folds: folds.len(),
            failed_folds: folds.len() - ok.len(),
        }
    }
}

/// Cross-validation outcome, possibly pooled over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub folds: Vec<FoldResult>,
    /// Held-out scores of every fold, in fold order.
    pub pooled: Vec<ScoredLabel>,
    pub summary: Summary,
    pub auc: Option<f64>,
}

impl EvalReport {
    fn assemble(folds: Vec<FoldResult>, pooled: Vec<ScoredLabel>) -> Self {
        let summary = Summary::of(&folds);
        let auc = auc(&pooled).ok();
        EvalReport { folds, pooled, summary, auc }
    }

    /// Concatenates reports in the given order.
    pub fn pool(reports: Vec<EvalReport>) -> Self {
        let mut folds = Vec::new();
        let mut pooled = Vec::new();
        for r in reports {
            folds.extend(r.folds);
            pooled.extend(r.pooled);
        }
        Self::assemble(folds, pooled)
    }

    pub fn fold_accuracies(&self) -> Vec<f64> {
        self.folds.iter().filter_map(|f| f.metrics.map(|m| m.accuracy)).collect()
    }

    pub fn has_failures(&self) -> bool {
        self.summary.failed_folds > 0
    }
}

/// Trains on every fold but `fold` and scores the held-out fold.
///
/// Only training rows reach the normalizer and the optimizer; the held-out
/// rows are read after the model is frozen.
pub fn run_fold(
    subjects: &[SubjectFeatures],
    assignment: &FoldAssignment,
    fold: usize,
    cfg: &LogisticConfig,
) -> (FoldResult, Vec<ScoredLabel>) {
    let train: Vec<_> = subjects
        .iter()
        .zip(&assignment.fold_of)
        .filter(|(_, &f)| f != fold)
        .map(|(s, _)| (s.feature_vector, s.group))
        .collect();
    let test: Vec<&SubjectFeatures> = subjects
        .iter()
        .zip(&assignment.fold_of)
        .filter(|(_, &f)| f == fold)
        .map(|(s, _)| s)
        .collect();
    let mut result = FoldResult {
        repetition: 0,
        fold,
        test_size: test.len(),
        metrics: None,
        model: None,
        error: None,
    };
    match fit_dpi(&train, cfg) {
        Ok(model) => {
            let scored: Vec<ScoredLabel> = test
                .iter()
                .map(|s| ScoredLabel { score: dpi_score(&model, &s.feature_vector), label: s.group })
                .collect();
            result.metrics = Some(EvalMetrics::from_predictions(
                scored.iter().map(|s| (classify_score(s.score), s.label)),
            ));
            result.model = Some(model);
            (result, scored)
        }
        Err(e) => {
            log::warn!("fold {fold} failed: {e}");
            result.error = Some(e.to_string());
            (result, Vec::new())
        }
    }
}

/// Stratified k-fold cross-validation of the DPI model.
pub fn run_cross_validation(
    subjects: &[SubjectFeatures],
    k: usize,
    seed: u64,
    cfg: &LogisticConfig,
) -> Result<EvalReport> {
    let labels: Vec<Group> = subjects.iter().map(|s| s.group).collect();
    let assignment = stratified_kfold_split(&labels, k, seed)?;
    let mut folds = Vec::with_capacity(k);
    let mut pooled = Vec::with_capacity(subjects.len());
    for fold in 0..k {
        let (res, scored) = run_fold(subjects, &assignment, fold, cfg);
        folds.push(res);
        pooled.extend(scored);
    }
    Ok(EvalReport::assemble(folds, pooled))
}

/// `n_reps` cross-validations with seeds `base_seed ^ r`, pooled in
/// repetition order. Repetitions run on the ambient rayon pool.
pub fn repeat_cross_validation(
    subjects: &[SubjectFeatures],
    k: usize,
    n_reps: usize,
    base_seed: u64,
    cfg: &LogisticConfig,
) -> Result<EvalReport> {
    let reports = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rep = run_cross_validation(subjects, k, repetition_seed(base_seed, r as u64), cfg)?;
            for f in &mut rep.folds {
                f.repetition = r;
            }
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::pool(reports))
}
