//! The DPI classifier: per-fold z-scoring and two-feature logistic regression.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Group;

pub type FeatureVector = [f64; 2];

/// Per-feature z-score parameters, fitted on training rows only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZScoreNormalizer {
    pub means: FeatureVector,
    pub stds: FeatureVector,
    /// Set for each feature whose training std was zero and replaced by 1.
    pub std_guarded: [bool; 2],
}

impl ZScoreNormalizer {
    pub fn identity() -> Self {
        ZScoreNormalizer {
            means: [0.0; 2],
            stds: [1.0; 2],
            std_guarded: [false; 2],
        }
    }
}

pub fn fit_normalizer(train: &[FeatureVector]) -> Result<ZScoreNormalizer> {
    if train.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: train.len() });
    }
    let n = train.len() as f64;
    let mut norm = ZScoreNormalizer::identity();
    for j in 0..2 {
        let mean = train.iter().map(|x| x[j]).sum::<f64>() / n;
        let ss: f64 = train.iter().map(|x| (x[j] - mean).powi(2)).sum();
        let std = (ss / (n - 1.0)).sqrt();
        norm.means[j] = mean;
        if std > 0.0 {
            norm.stds[j] = std;
        } else {
            norm.std_guarded[j] = true;
        }
    }
    Ok(norm)
}

pub fn apply_normalizer(norm: &ZScoreNormalizer, x: &FeatureVector) -> FeatureVector {
    [
        (x[0] - norm.means[0]) / norm.stds[0],
        (x[1] - norm.means[1]) / norm.stds[1],
    ]
}

/// Logistic regression hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticConfig {
    /// Ridge on the weights (not the bias).
    pub l2_lambda: f64,
    /// Convergence threshold on the gradient norm.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            l2_lambda: 1e-4,
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub l2_lambda: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpiModel {
    pub weights: FeatureVector,
    pub bias: f64,
    pub normalizer: ZScoreNormalizer,
    pub training_meta: TrainingMeta,
}

/// One training example: normalized features and class.
pub type Example = (FeatureVector, Group);

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn target(g: Group) -> f64 {
    if g.is_positive() {
        1.0
    } else {
        0.0
    }
}

/// Parameters are `[w1, w2, b]`.
pub type Params = [f64; 3];

fn linear(theta: &Params, x: &FeatureVector) -> f64 {
    theta[0] * x[0] + theta[1] * x[1] + theta[2]
}

/// Mean log-likelihood minus `(l2_lambda / 2) * |w|^2`.
pub fn objective(data: &[Example], theta: &Params, l2_lambda: f64) -> f64 {
    let ll: f64 = data
        .iter()
        .map(|(x, g)| {
            let z = linear(theta, x);
            target(*g) * z - softplus(z)
        })
        .sum();
    ll / data.len() as f64 - 0.5 * l2_lambda * (theta[0] * theta[0] + theta[1] * theta[1])
}

/// Gradient of [`objective`].
pub fn gradient(data: &[Example], theta: &Params, l2_lambda: f64) -> Params {
    let n = data.len() as f64;
    let mut g = [0.0; 3];
    for (x, grp) in data {
        let r = target(*grp) - sigmoid(linear(theta, x));
        g[0] += r * x[0];
        g[1] += r * x[1];
        g[2] += r;
    }
    [
        g[0] / n - l2_lambda * theta[0],
        g[1] / n - l2_lambda * theta[1],
        g[2] / n,
    ]
}

/// Negative Hessian of [`objective`] (positive definite for l2_lambda > 0).
fn neg_hessian(data: &[Example], theta: &Params, l2_lambda: f64) -> [[f64; 3]; 3] {
    let n = data.len() as f64;
    let mut h = [[0.0; 3]; 3];
    for (x, _) in data {
        let p = sigmoid(linear(theta, x));
        let w = p * (1.0 - p);
        let v = [x[0], x[1], 1.0];
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] += w * v[i] * v[j];
            }
        }
    }
    for row in h.iter_mut() {
        for v in row.iter_mut() {
            *v /= n;
        }
    }
    h[0][0] += l2_lambda;
    h[1][1] += l2_lambda;
    h
}

/// Solves `a x = b` for a 3x3 system by Gaussian elimination with pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn norm3(v: &Params) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// A fitted model together with the objective value after every iteration.
#[derive(Debug, Clone)]
pub struct TrainingTrace {
    pub model: DpiModel,
    pub objective_history: Vec<f64>,
}

/// Damped Newton ascent from the zero vector.
///
/// `train` holds already-normalized features; `normalizer` is stored in the
/// returned model so it can score raw vectors. Hitting `max_iter` is not an
/// error: the best iterate is returned with `converged = false`.
pub fn train_logistic_traced(
    train: &[Example],
    normalizer: ZScoreNormalizer,
    cfg: &LogisticConfig,
) -> Result<TrainingTrace> {
    let has_pos = train.iter().any(|(_, g)| g.is_positive());
    let has_neg = train.iter().any(|(_, g)| !g.is_positive());
    if !(has_pos && has_neg) {
        return Err(Error::SingleClass);
    }
    let lambda = cfg.l2_lambda;
    let mut theta: Params = [0.0; 3];
    let mut value = objective(train, &theta, lambda);
    let mut history = vec![value];
    let mut grad = gradient(train, &theta, lambda);
    let mut iterations = 0;

    while norm3(&grad) > cfg.tol && iterations < cfg.max_iter {
        iterations += 1;
        let step = solve3(neg_hessian(train, &theta, lambda), grad).unwrap_or(grad);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = [
                theta[0] + scale * step[0],
                theta[1] + scale * step[1],
                theta[2] + scale * step[2],
            ];
            let v = objective(train, &cand, lambda);
            if v >= value {
                theta = cand;
                value = v;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        history.push(value);
        grad = gradient(train, &theta, lambda);
        if !accepted {
            // no ascent possible at machine precision
            break;
        }
    }
    let gnorm = norm3(&grad);
    Ok(TrainingTrace {
        model: DpiModel {
            weights: [theta[0], theta[1]],
            bias: theta[2],
            normalizer,
            training_meta: TrainingMeta {
                iterations,
                final_gradient_norm: gnorm,
                l2_lambda: lambda,
                converged: gnorm <= cfg.tol,
            },
        },
        objective_history: history,
    })
}

pub fn train_logistic(train: &[Example], normalizer: ZScoreNormalizer, cfg: &LogisticConfig) -> Result<DpiModel> {
    let trace = train_logistic_traced(train, normalizer, cfg)?;
    if !trace.model.training_meta.converged {
        log::warn!(
            "logistic regression stopped after {} iterations, |grad| = {:.3e}",
            trace.model.training_meta.iterations,
            trace.model.training_meta.final_gradient_norm
        );
    }
    Ok(trace.model)
}

/// Fits the normalizer on raw training vectors, then the logistic model.
pub fn fit_dpi(train: &[(FeatureVector, Group)], cfg: &LogisticConfig) -> Result<DpiModel> {
    let raw: Vec<FeatureVector> = train.iter().map(|(x, _)| *x).collect();
    let norm = fit_normalizer(&raw)?;
    let normalized: Vec<Example> = train
        .iter()
        .map(|(x, g)| (apply_normalizer(&norm, x), *g))
        .collect();
    train_logistic(&normalized, norm, cfg)
}

/// DPI score in (0, 1) for a raw feature vector.
pub fn dpi_score(model: &DpiModel, x_raw: &FeatureVector) -> f64 {
    let z = apply_normalizer(&model.normalizer, x_raw);
    sigmoid(model.weights[0] * z[0] + model.weights[1] * z[1] + model.bias)
}

/// Decision rule on a score: PVH at or above 0.5.
pub fn classify_score(score: f64) -> Group {
    if score >= 0.5 {
        Group::Pvh
    } else {
        Group::Control
    }
}

pub fn classify(model: &DpiModel, x_raw: &FeatureVector) -> Group {
    classify_score(dpi_score(model, x_raw))
}
