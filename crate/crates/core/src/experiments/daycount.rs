use rayon::prelude::*;

use super::{analyze_curve, field_day_features, learning_curve, CohortSource, Exclusion, ExperimentConfig, ExperimentReport};
use crate::error::{Error, Result};
use crate::features::{aggregate_days, filter_valid_days, DayFeatures, SubjectFeatures, SubjectMeta};

/// Valid field days of every subject, or why the subject was excluded.
pub(super) fn screen_days<S: CohortSource + ?Sized>(
    source: &S,
    cfg: &ExperimentConfig,
) -> Result<Vec<(SubjectMeta, std::result::Result<Vec<DayFeatures>, Exclusion>)>> {
    source
        .subjects()
        .into_par_iter()
        .enumerate()
        .map(|(i, meta)| {
            let valid = filter_valid_days(&field_day_features(source, i, &meta)?, cfg.min_hours);
            let outcome = if valid.len() < cfg.max_days {
                let reason = Error::NotEnoughDays { needed: cfg.max_days, got: valid.len() }.to_string();
                log::info!("{} excluded: {reason}", meta.id);
                Err(Exclusion { subject_id: meta.id.clone(), reason })
            } else {
                Ok(valid)
            };
            Ok((meta, outcome))
        })
        .collect()
}

/// Accuracy as a function of the number of monitoring days averaged
/// (days `1..=max_days`, first valid days first).
pub fn run_experiment2_daycount<S: CohortSource + ?Sized>(
    source: &S,
    n_reps: usize,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let screened = screen_days(source, cfg)?;
    let mut report = ExperimentReport::new("exp2a", cfg, seed, n_reps);
    report.cohort.input = screened.len();
    let mut included: Vec<(SubjectMeta, Vec<DayFeatures>)> = Vec::new();
    for (meta, outcome) in screened {
        match outcome {
            Ok(days) => {
                report.cohort.included.push(meta.id.clone());
                included.push((meta, days));
            }
            Err(x) => report.cohort.excluded.push(x),
        }
    }

    let by_k: Vec<Vec<SubjectFeatures>> = (1..=cfg.max_days)
        .map(|k| included.iter().map(|(m, d)| aggregate_days(m, d, k)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    report.curve = learning_curve(cfg.max_days, n_reps, seed, cfg, |k, _| by_k[k - 1].clone())?;
    analyze_curve(&mut report);
    Ok(report)
}
