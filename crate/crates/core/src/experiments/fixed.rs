use rayon::prelude::*;

use super::{analyze_curve, learning_curve, skippable, CohortSource, Exclusion, ExperimentConfig, ExperimentReport, WindowAudit};
use crate::error::{Error, Result};
use crate::features::{frames_in_hours, sample_fixed_duration_windows, summarize_day, DayMoments, DayVoicing, SubjectFeatures, SubjectMeta};
use crate::rng::{derive_seed, repetition_seed, stream};

/// Window seed of one (repetition, day count, subject, attempt) cell.
fn window_seed(rep_seed: u64, k: usize, subject: usize, attempt: usize) -> u64 {
    let s = derive_seed(rep_seed, stream::WINDOWS);
    let s = derive_seed(s, k as u64);
    let s = derive_seed(s, subject as u64);
    derive_seed(s, attempt as u64)
}

struct SubjectDraws {
    /// Feature vectors indexed by `(k - 1) * n_reps + r`.
    features: Vec<[f64; 2]>,
    audit: WindowAudit,
}

fn empty_audit(cfg: &ExperimentConfig) -> WindowAudit {
    WindowAudit { required_voiced_frames: cfg.windows.min_voiced_frames, min_voiced_frames_seen: usize::MAX, ..Default::default() }
}

/// Valid-day moments of one subject; days are screened exactly as in the
/// day-count analysis.
fn valid_moments<S: CohortSource + ?Sized>(source: &S, subject: usize, meta: &SubjectMeta, cfg: &ExperimentConfig) -> Result<Vec<DayMoments>> {
    let min_frames = frames_in_hours(cfg.min_hours);
    let mut out = Vec::new();
    for day in source.field_days(subject) {
        let rows = source.field_rows(subject, day)?;
        match summarize_day(&rows, &meta.id, day) {
            Ok(d) if d.total_frame_count >= min_frames => out.push(DayMoments::from_rows(day, &rows)),
            Ok(_) => {}
            Err(e) if skippable(&e) => log::debug!("{} day {day} skipped: {e}", meta.id),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn draw_subject(moments: &[DayMoments], subject: usize, n_reps: usize, seed: u64, cfg: &ExperimentConfig) -> Result<SubjectDraws> {
    let voicing: Vec<DayVoicing> = moments.iter().map(|m| m.voicing.clone()).collect();
    let required = cfg.windows.min_voiced_frames;
    let mut audit = empty_audit(cfg);
    let mut features = Vec::with_capacity(cfg.max_days * n_reps);
    for k in 1..=cfg.max_days {
        for r in 0..n_reps {
            let rep_seed = repetition_seed(seed, r as u64);
            let mut attempt = 0;
            let windows = loop {
                match sample_fixed_duration_windows(&voicing, k, &cfg.windows, window_seed(rep_seed, k, subject, attempt)) {
                    Err(Error::WindowSearchExhausted { .. }) if attempt < cfg.window_redraw_limit => {
                        attempt += 1;
                        audit.redraws += 1;
                    }
                    other => break other?,
                }
            };
            let mut sum = [0.0; 2];
            for w in &windows {
                audit.windows += 1;
                audit.min_voiced_frames_seen = audit.min_voiced_frames_seen.min(w.voiced_frame_count);
                audit.violations += (w.voiced_frame_count < required) as usize;
                let m = moments.iter().find(|m| m.voicing.day_index == w.day_index).expect("window day is hosted");
                let f = m.window_features(w)?;
                sum[0] += f[0];
                sum[1] += f[1];
            }
            features.push([sum[0] / k as f64, sum[1] / k as f64]);
        }
    }
    Ok(SubjectDraws { features, audit })
}

fn process_subject<S: CohortSource + ?Sized>(
    source: &S,
    subject: usize,
    meta: &SubjectMeta,
    n_reps: usize,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<std::result::Result<SubjectDraws, Exclusion>> {
    let moments = valid_moments(source, subject, meta, cfg)?;
    if moments.len() < cfg.max_days {
        let reason = Error::NotEnoughDays { needed: cfg.max_days, got: moments.len() }.to_string();
        log::info!("{} excluded: {reason}", meta.id);
        return Ok(Err(Exclusion { subject_id: meta.id.clone(), reason }));
    }
    draw_subject(&moments, subject, n_reps, seed, cfg).map(Ok)
}

/// Accuracy as a function of the number of days a fixed recording budget
/// is spread over: `k` windows of `total_hours / k` each on distinct days.
///
/// Subjects are processed one at a time per worker, so only one subject's
/// day moments are resident per worker.
pub fn run_experiment2_fixed_duration<S: CohortSource + ?Sized>(
    source: &S,
    n_reps: usize,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let subjects = source.subjects();
    let outcomes = subjects
        .par_iter()
        .enumerate()
        .map(|(i, meta)| process_subject(source, i, meta, n_reps, seed, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new("exp2b", cfg, seed, n_reps);
    report.cohort.input = subjects.len();
    let mut audit = empty_audit(cfg);
    let mut included: Vec<(&SubjectMeta, SubjectDraws)> = Vec::new();
    for (meta, outcome) in subjects.iter().zip(outcomes) {
        match outcome {
            Ok(d) => {
                audit.windows += d.audit.windows;
                audit.violations += d.audit.violations;
                audit.redraws += d.audit.redraws;
                audit.min_voiced_frames_seen = audit.min_voiced_frames_seen.min(d.audit.min_voiced_frames_seen);
                report.cohort.included.push(meta.id.clone());
                included.push((meta, d));
            }
            Err(x) => report.cohort.excluded.push(x),
        }
    }
    if audit.windows == 0 {
        audit.min_voiced_frames_seen = 0;
    }
    report.window_audit = Some(audit);

    report.curve = learning_curve(cfg.max_days, n_reps, seed, cfg, |k, r| {
        included
            .iter()
            .map(|(meta, d)| SubjectFeatures::new(meta, d.features[(k - 1) * n_reps + r], k))
            .collect()
    })?;
    analyze_curve(&mut report);
    Ok(report)
}
