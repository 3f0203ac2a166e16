//! Leakage-safe stratified cross-validation, class balancing and
//! classification metrics.

mod cv;
mod roc;

pub use cv::{
    repeat_cross_validation, run_cross_validation, run_fold, stratified_kfold_split,
    undersample_balance, undersample_indices, EvalReport, FoldAssignment, FoldResult, MeanStd,
    Summary,
};
pub use roc::{auc, roc_curve, RocPoint, ScoredLabel};

use serde::{Deserialize, Serialize};

use crate::features::Group;

/// Confusion counts and the rates derived from them. PVH is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

impl EvalMetrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        EvalMetrics {
            accuracy: ratio(tp + tn, tp + fp + tn + fn_),
            sensitivity: ratio(tp, tp + fn_),
            specificity: ratio(tn, tn + fp),
            tp,
            fp,
            tn,
            fn_,
        }
    }

    /// Tallies `(predicted, actual)` pairs.
    pub fn from_predictions(pairs: impl IntoIterator<Item = (Group, Group)>) -> Self {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (pred, actual) in pairs {
            match (pred.is_positive(), actual.is_positive()) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        Self::from_counts(tp, fp, tn, fn_)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_identities() {
        let m = EvalMetrics::from_counts(7, 2, 9, 3);
        assert_eq!(m.accuracy, 16.0 / 21.0);
        assert_eq!(m.sensitivity, 0.7);
        assert_eq!(m.specificity, 9.0 / 11.0);
        let p = EvalMetrics::from_predictions([
            (Group::Pvh, Group::Pvh),
            (Group::Pvh, Group::Control),
            (Group::Control, Group::Control),
            (Group::Control, Group::Pvh),
            (Group::Control, Group::Pvh),
        ]);
        assert_eq!((p.tp, p.fp, p.tn, p.fn_), (1, 1, 1, 2));
    }
}
