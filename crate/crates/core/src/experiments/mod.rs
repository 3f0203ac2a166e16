//! Experiment drivers: in-lab vs in-field comparison, the day-count and
//! fixed-duration learning curves, and the random-feature null baseline.
//!
//! Every driver reads frame rows through [`CohortSource`], so the same code
//! runs on a synthetic cohort or on a manifest of recordings.

mod daycount;
mod exp1;
mod fixed;
mod null;

pub use daycount::run_experiment2_daycount;
pub use exp1::run_experiment1;
pub use fixed::run_experiment2_fixed_duration;
pub use null::{percentile, run_null_baseline, HistBin, NullDistribution, NullResult};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{run_cross_validation, undersample_indices, EvalReport, FoldResult, MeanStd, RocPoint, Summary};
use crate::features::{summarize_day, DayFeatures, Group, SubjectFeatures, SubjectMeta, WindowConfig};
use crate::model::LogisticConfig;
use crate::rng::{derive_seed, repetition_seed, stream};
use crate::signal::{Condition, FrameFeatureRow};
use crate::stats::{cohens_d, fit_power_law, threshold_day, welch_t_test, Correlation, PowerFit, PowerFitConfig, TTest};
use crate::synth::Cohort;

/// Read access to a cohort's frame rows.
pub trait CohortSource: Sync {
    fn subjects(&self) -> Vec<SubjectMeta>;
    /// Field day indices of a subject in monitoring order.
    fn field_days(&self, subject: usize) -> Vec<u32>;
    fn field_rows(&self, subject: usize, day: u32) -> Result<Vec<FrameFeatureRow>>;
    /// `None` when the subject has no recording for `condition`.
    fn lab_rows(&self, subject: usize, condition: Condition) -> Result<Option<Vec<FrameFeatureRow>>>;
}

impl CohortSource for Cohort {
    fn subjects(&self) -> Vec<SubjectMeta> {
        self.subjects.iter().map(|s| s.meta.clone()).collect()
    }

    fn field_days(&self, _subject: usize) -> Vec<u32> {
        (0..self.spec.days_per_subject as u32).collect()
    }

    fn field_rows(&self, subject: usize, day: u32) -> Result<Vec<FrameFeatureRow>> {
        Ok(self.day_rows(subject, day))
    }

    fn lab_rows(&self, subject: usize, condition: Condition) -> Result<Option<Vec<FrameFeatureRow>>> {
        Ok(condition.is_lab().then(|| Cohort::lab_rows(self, subject, condition)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub folds: usize,
    pub min_hours: f64,
    pub max_days: usize,
    pub logistic: LogisticConfig,
    pub windows: WindowConfig,
    pub power: PowerFitConfig,
    /// Marginal-gain thresholds in percentage points.
    pub gain_thresholds_pp: Vec<f64>,
    pub horizon_days: u32,
    /// Window-search failures tolerated per subject draw before aborting.
    pub window_redraw_limit: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            folds: 10,
            min_hours: 6.0,
            max_days: 7,
            logistic: LogisticConfig::default(),
            windows: WindowConfig::default(),
            power: PowerFitConfig::default(),
            gain_thresholds_pp: vec![1.0, 0.5],
            horizon_days: crate::stats::DEFAULT_HORIZON_DAYS,
            window_redraw_limit: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub subject_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct CohortAccounting {
    pub input: usize,
    pub included: Vec<String>,
    pub excluded: Vec<Exclusion>,
}

/// Cross-validation outcome of one feature condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: String,
    pub summary: Summary,
    pub auc: Option<f64>,
    pub roc: Vec<RocPoint>,
    pub folds: Vec<FoldResult>,
}

impl ConditionResult {
    pub fn from_report(condition: &str, report: EvalReport) -> Self {
        ConditionResult {
            condition: condition.to_owned(),
            summary: report.summary,
            auc: report.auc,
            roc: crate::eval::roc_curve(&report.pooled).unwrap_or_default(),
            folds: report.folds,
        }
    }

    pub fn fold_accuracies(&self) -> Vec<f64> {
        self.folds.iter().filter_map(|f| f.metrics.map(|m| m.accuracy)).collect()
    }
}

/// Welch test and Cohen's D of `a` against `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub t_test: Option<TTest>,
    pub cohens_d: Option<f64>,
}

impl Comparison {
    pub fn of(name: impl Into<String>, a: &[f64], b: &[f64]) -> Self {
        Comparison {
            name: name.into(),
            t_test: welch_t_test(a, b).ok(),
            cohens_d: cohens_d(a, b).ok(),
        }
    }
}

/// One point of a learning curve. Accuracies are in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub days: usize,
    /// Mean and std over repetition means.
    pub accuracy_pct: MeanStd,
    /// Mean and std over every fold of every repetition.
    pub fold_accuracy_pct: MeanStd,
    /// Cohen's D of control vs PVH per feature, averaged over repetitions;
    /// positive when PVH is lower.
    pub d_h1h2_std: Option<f64>,
    pub d_nsam_skewness: Option<f64>,
    pub rep_accuracy_pct: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDay {
    pub threshold_pp: f64,
    /// `None` when the gain never drops below the threshold within the horizon.
    pub day: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct WindowAudit {
    pub windows: usize,
    pub required_voiced_frames: usize,
    pub min_voiced_frames_seen: usize,
    pub violations: usize,
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub n_reps: usize,
    pub cohort: CohortAccounting,
    pub conditions: Vec<ConditionResult>,
    pub comparisons: Vec<Comparison>,
    pub curve: Vec<CurvePoint>,
    pub correlation: Option<Correlation>,
    pub power_fit: Option<PowerFit>,
    pub thresholds: Vec<ThresholdDay>,
    pub window_audit: Option<WindowAudit>,
    pub null: Option<NullResult>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: &ExperimentConfig, seed: u64, n_reps: usize) -> Self {
        ExperimentReport {
            experiment: experiment.to_owned(),
            config: config.clone(),
            seed,
            n_reps,
            cohort: CohortAccounting::default(),
            conditions: Vec::new(),
            comparisons: Vec::new(),
            curve: Vec::new(),
            correlation: None,
            power_fit: None,
            thresholds: Vec::new(),
            window_audit: None,
            null: None,
        }
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.condition == name)
    }

    pub fn comparison(&self, name: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.name == name)
    }
}

fn skippable(e: &Error) -> bool {
    matches!(e, Error::InsufficientVoicing { .. } | Error::ZeroVariance | Error::TooFewSamples { .. })
}

/// Day summaries of every field day of a subject, in monitoring order.
/// Days without enough voicing to summarize are dropped.
pub fn field_day_features<S: CohortSource + ?Sized>(source: &S, subject: usize, meta: &SubjectMeta) -> Result<Vec<DayFeatures>> {
    let mut days = Vec::new();
    for day in source.field_days(subject) {
        let rows = source.field_rows(subject, day)?;
        match summarize_day(&rows, &meta.id, day) {
            Ok(d) => days.push(d),
            Err(e) if skippable(&e) => log::debug!("{} day {day} skipped: {e}", meta.id),
            Err(e) => return Err(e),
        }
    }
    Ok(days)
}

/// Undersamples with a stream derived from `rep_seed`, then runs one
/// stratified cross-validation seeded with `rep_seed`.
pub fn balanced_cv(subjects: &[SubjectFeatures], rep_seed: u64, folds: usize, cfg: &LogisticConfig) -> Result<(Vec<SubjectFeatures>, EvalReport)> {
    let labels: Vec<Group> = subjects.iter().map(|s| s.group).collect();
    let subset: Vec<SubjectFeatures> = undersample_indices(&labels, derive_seed(rep_seed, stream::UNDERSAMPLE))
        .into_iter()
        .map(|i| subjects[i].clone())
        .collect();
    let report = run_cross_validation(&subset, folds, rep_seed, cfg)?;
    Ok((subset, report))
}

struct RepOutcome {
    fold_accuracies: Vec<f64>,
    mean_accuracy: f64,
    d: [Option<f64>; 2],
}

fn feature_d(subjects: &[SubjectFeatures], j: usize) -> Option<f64> {
    let (pvh, ctl): (Vec<&SubjectFeatures>, Vec<&SubjectFeatures>) = subjects.iter().partition(|s| s.group == Group::Pvh);
    let col = |v: Vec<&SubjectFeatures>| v.iter().map(|s| s.feature_vector[j]).collect::<Vec<f64>>();
    cohens_d(&col(ctl), &col(pvh)).ok()
}

fn rep_outcome(subjects: &[SubjectFeatures], rep_seed: u64, cfg: &ExperimentConfig) -> Result<RepOutcome> {
    let (subset, report) = balanced_cv(subjects, rep_seed, cfg.folds, &cfg.logistic)?;
    let fold_accuracies = report.fold_accuracies();
    Ok(RepOutcome {
        mean_accuracy: MeanStd::of(&fold_accuracies).mean,
        fold_accuracies,
        d: [feature_d(&subset, 0), feature_d(&subset, 1)],
    })
}

fn mean_some(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.collect::<Option<Vec<f64>>>()?;
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Runs every (k, repetition) cell in parallel; `features_for(k, r)` yields
/// the subject features of that cell.
fn learning_curve<F>(n_days: usize, n_reps: usize, seed: u64, cfg: &ExperimentConfig, features_for: F) -> Result<Vec<CurvePoint>>
where
    F: Fn(usize, usize) -> Vec<SubjectFeatures> + Sync,
{
    let cells: Vec<(usize, usize)> = (1..=n_days).flat_map(|k| (0..n_reps).map(move |r| (k, r))).collect();
    let outcomes = cells
        .par_iter()
        .map(|&(k, r)| rep_outcome(&features_for(k, r), repetition_seed(seed, r as u64), cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(outcomes
        .chunks(n_reps.max(1))
        .take(n_days)
        .enumerate()
        .map(|(i, reps)| {
            let pct = |x: f64| 100.0 * x;
            let rep_acc: Vec<f64> = reps.iter().map(|o| pct(o.mean_accuracy)).collect();
            let folds: Vec<f64> = reps.iter().flat_map(|o| o.fold_accuracies.iter().map(|&a| pct(a))).collect();
            CurvePoint {
                days: i + 1,
                accuracy_pct: MeanStd::of(&rep_acc),
                fold_accuracy_pct: MeanStd::of(&folds),
                d_h1h2_std: mean_some(reps.iter().map(|o| o.d[0])),
                d_nsam_skewness: mean_some(reps.iter().map(|o| o.d[1])),
                rep_accuracy_pct: rep_acc,
            }
        })
        .collect())
}

/// Correlation, power fit, gain thresholds and per-day comparisons for a
/// finished curve.
fn analyze_curve(report: &mut ExperimentReport) {
    let curve = &report.curve;
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .iter()
        .flat_map(|p| p.rep_accuracy_pct.iter().map(move |&a| (p.days as f64, a)))
        .unzip();
    report.correlation = crate::stats::spearman_rho(&xs, &ys).ok();

    let means: Vec<(f64, f64)> = curve.iter().map(|p| (p.days as f64, p.accuracy_pct.mean)).collect();
    report.power_fit = fit_power_law(&means, &report.config.power)
        .map_err(|e| log::warn!("power fit skipped: {e}"))
        .ok();
    if let Some(fit) = &report.power_fit {
        report.thresholds = report
            .config
            .gain_thresholds_pp
            .iter()
            .map(|&t| ThresholdDay { threshold_pp: t, day: threshold_day(fit, t, report.config.horizon_days).ok() })
            .collect();
    }
    if let Some(first) = curve.first() {
        report.comparisons = curve[1..]
            .iter()
            .map(|p| Comparison::of(format!("days{}_vs_days{}", p.days, first.days), &p.rep_accuracy_pct, &first.rep_accuracy_pct))
            .collect();
    }
}
