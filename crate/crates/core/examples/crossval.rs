//! Leakage-safe repeated stratified cross-validation with ROC/AUC on
//! two-feature synthetic subjects.

use dpi::eval::{repeat_cross_validation, roc_curve, undersample_balance};
use dpi::features::{Group, SubjectFeatures};
use dpi::model::{fit_dpi, LogisticConfig};
use dpi::rng::rng_from;
use rand_distr::{Distribution, Normal};

fn main() -> dpi::Result<()> {
    let mut rng = rng_from(5);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let subjects: Vec<SubjectFeatures> = (0..204)
        .map(|i| {
            let group = if i < 92 { Group::Pvh } else { Group::Control };
            let shift = if group == Group::Pvh { -0.6 } else { 0.0 };
            SubjectFeatures {
                subject_id: format!("s{i}"),
                group,
                pair_id: None,
                feature_vector: [3.0 + shift + noise.sample(&mut rng), -0.3 + 0.3 * shift + 0.5 * noise.sample(&mut rng)],
                days_used: 7,
            }
        })
        .collect();
    let balanced = undersample_balance(&subjects, 1);
    println!("{} subjects, {} after undersampling", subjects.len(), balanced.len());

    let cfg = LogisticConfig::default();
    let report = repeat_cross_validation(&balanced, 10, 10, 42, &cfg)?;
    let s = report.summary;
    println!(
        "accuracy {:.1} +/- {:.1} %  sensitivity {:.1} %  specificity {:.1} %  ({} folds)",
        100.0 * s.accuracy.mean,
        100.0 * s.accuracy.std,
        100.0 * s.sensitivity.mean,
        100.0 * s.specificity.mean,
        s.n_folds
    );
    println!("pooled AUC {:.3}, {} ROC points", report.auc.unwrap_or(f64::NAN), roc_curve(&report.pooled)?.len());

    let data: Vec<_> = balanced.iter().map(|s| (s.feature_vector, s.group)).collect();
    let model = fit_dpi(&data, &cfg)?;
    println!("full-data model: weights {:.3?}, bias {:.3}, {} iterations", model.weights, model.bias, model.training_meta.iterations);
    Ok(())
}
