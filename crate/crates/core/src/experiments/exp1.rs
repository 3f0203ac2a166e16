use rayon::prelude::*;

use super::{field_day_features, skippable, Comparison, ConditionResult, CohortSource, Exclusion, ExperimentConfig, ExperimentReport};
use crate::error::{Error, Result};
use crate::eval::repeat_cross_validation;
use crate::features::{aggregate_days, filter_valid_days, summarize_day, SubjectFeatures};
use crate::signal::Condition;

enum Screened {
    Included { lab: SubjectFeatures, field: SubjectFeatures },
    Excluded(Exclusion),
}

fn screen<S: CohortSource + ?Sized>(source: &S, i: usize, lab_condition: Condition, cfg: &ExperimentConfig) -> Result<Screened> {
    let meta = &source.subjects()[i];
    let exclude = |reason: String| {
        log::info!("{} excluded: {reason}", meta.id);
        Ok(Screened::Excluded(Exclusion { subject_id: meta.id.clone(), reason }))
    };
    let Some(rows) = source.lab_rows(i, lab_condition)? else {
        return exclude(format!("missing condition {lab_condition}"));
    };
    let lab_day = match summarize_day(&rows, &meta.id, 0) {
        Ok(d) => d,
        Err(e) if skippable(&e) => return exclude(format!("{lab_condition}: {e}")),
        Err(e) => return Err(e),
    };
    let valid = filter_valid_days(&field_day_features(source, i, meta)?, cfg.min_hours);
    if valid.is_empty() {
        return exclude(Error::NotEnoughDays { needed: 1, got: 0 }.to_string());
    }
    Ok(Screened::Included {
        lab: SubjectFeatures::new(meta, [lab_day.h1h2_std, lab_day.nsam_skewness], 1),
        field: aggregate_days(meta, &valid, valid.len())?,
    })
}

/// In-lab versus in-field DPI.
///
/// Lab features come from the single `lab_condition` recording, field
/// features from averaging every valid field day. Both conditions share the
/// repetition seeds, so they see identical fold splits.
pub fn run_experiment1<S: CohortSource + ?Sized>(
    source: &S,
    lab_condition: Condition,
    n_reps: usize,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if !lab_condition.is_lab() {
        return Err(Error::Usage(format!("{lab_condition} is not an in-lab condition")));
    }
    let n = source.subjects().len();
    let screened = (0..n)
        .into_par_iter()
        .map(|i| screen(source, i, lab_condition, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new("exp1", cfg, seed, n_reps);
    report.cohort.input = n;
    let (mut lab, mut field) = (Vec::new(), Vec::new());
    for s in screened {
        match s {
            Screened::Included { lab: l, field: f } => {
                report.cohort.included.push(f.subject_id.clone());
                lab.push(l);
                field.push(f);
            }
            Screened::Excluded(x) => report.cohort.excluded.push(x),
        }
    }

    let field_res = ConditionResult::from_report("field", repeat_cross_validation(&field, cfg.folds, n_reps, seed, &cfg.logistic)?);
    let lab_res = ConditionResult::from_report(lab_condition.as_str(), repeat_cross_validation(&lab, cfg.folds, n_reps, seed, &cfg.logistic)?);
    report.comparisons.push(Comparison::of(
        format!("field_vs_{lab_condition}"),
        &field_res.fold_accuracies(),
        &lab_res.fold_accuracies(),
    ));
    report.conditions = vec![field_res, lab_res];
    Ok(report)
}
