//! Ridge-regularized linear classifier on per-channel log-variance features.
//! A fast, deterministic in-process stand-in for a trained network.

use nalgebra::{DMatrix, DVector};

use super::{ChannelSubset, EvalContext, EvalError, EvalOutcome, EvalRequest, Evaluator};
use crate::tensorio::Dataset;

const RIDGE_LAMBDA: f64 = 1.0;

/// `trials × channels` matrix of `ln(var(series))`. Constant series map to
/// `-inf` and are reported only if a subset selects them.
pub fn log_variance_features(d: &Dataset) -> DMatrix<f64> {
    let (n, c, _) = d.shape();
    DMatrix::from_fn(n, c, |t, ch| {
        let s = d.series(t, ch);
        let len = s.len() as f64;
        let mean = s.iter().map(|&x| x as f64).sum::<f64>() / len;
        let var = s.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / len;
        if var > 0.0 {
            var.ln()
        } else {
            f64::NEG_INFINITY
        }
    })
}

fn gather(features: &DMatrix<f64>, channels: &[usize]) -> Result<DMatrix<f64>, EvalError> {
    let m = features.select_columns(channels);
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        let col = pos / m.nrows().max(1);
        return Err(EvalError::DegenerateFeatures(format!(
            "channel {} is constant in at least one trial",
            channels[col]
        )));
    }
    Ok(m)
}

/// Fits on the train features and returns accuracy on the validation features.
fn fit_and_score(
    train_x: &DMatrix<f64>,
    train_y: &[u16],
    valid_x: &DMatrix<f64>,
    valid_y: &[u16],
) -> Result<f64, EvalError> {
    if valid_y.is_empty() {
        return Err(EvalError::DegenerateFeatures("empty validation set".into()));
    }
    let n_classes = train_y
        .iter()
        .chain(valid_y)
        .map(|&l| l as usize + 1)
        .max()
        .unwrap_or(0);
    let mut counts = vec![0usize; n_classes];
    for &l in train_y {
        counts[l as usize] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(EvalError::DegenerateFeatures(
            "training set needs at least two classes".into(),
        ));
    }
    if let Some(class) = counts.iter().position(|&c| c == 1) {
        return Err(EvalError::DegenerateFeatures(format!(
            "class {class} has a single training trial"
        )));
    }

    let n = train_x.nrows();
    let d = train_x.ncols();
    // Standardize with training statistics.
    let mut mean = DVector::zeros(d);
    let mut scale = DVector::from_element(d, 1.0);
    for j in 0..d {
        let col = train_x.column(j);
        let mu = col.mean();
        let sd = (col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64).sqrt();
        mean[j] = mu;
        if sd > 1e-12 {
            scale[j] = sd;
        }
    }
    let design = |x: &DMatrix<f64>| {
        DMatrix::from_fn(x.nrows(), d + 1, |i, j| {
            if j == d {
                1.0
            } else {
                (x[(i, j)] - mean[j]) / scale[j]
            }
        })
    };
    let a = design(train_x);
    let targets = DMatrix::from_fn(n, n_classes, |i, k| {
        if train_y[i] as usize == k {
            1.0
        } else {
            0.0
        }
    });
    let mut gram = a.transpose() * &a;
    for j in 0..d {
        gram[(j, j)] += RIDGE_LAMBDA;
    }
    // Tiny jitter on the unpenalized bias keeps the system positive definite.
    gram[(d, d)] += 1e-9;
    let rhs = a.transpose() * targets;
    let weights = gram
        .cholesky()
        .ok_or_else(|| EvalError::DegenerateFeatures("singular normal equations".into()))?
        .solve(&rhs);

    let scores = design(valid_x) * weights;
    let correct = scores
        .row_iter()
        .zip(valid_y)
        .filter(|(row, &y)| {
            let mut best = 0;
            for k in 1..row.len() {
                if row[k] > row[best] {
                    best = k;
                }
            }
            best == y as usize
        })
        .count();
    Ok(correct as f64 / valid_y.len() as f64)
}

fn datasets(ctx: &EvalContext) -> Result<(&Dataset, &Dataset), EvalError> {
    match (&ctx.train, &ctx.valid) {
        (Some(t), Some(v)) => Ok((t, v)),
        _ => Err(EvalError::EvaluatorFailure(
            "linear probe needs in-memory train and validation sets".into(),
        )),
    }
}

/// Validation accuracy of the linear probe restricted to `s`.
pub fn linear_probe_fitness(s: &ChannelSubset, ctx: &EvalContext) -> Result<f64, EvalError> {
    let (train, valid) = datasets(ctx)?;
    let tf = log_variance_features(train);
    let vf = log_variance_features(valid);
    fit_and_score(
        &gather(&tf, s.members())?,
        train.labels(),
        &gather(&vf, s.members())?,
        valid.labels(),
    )
}

/// Linear-probe evaluator with features precomputed once per context.
pub struct LinearProbeEvaluator {
    train_features: DMatrix<f64>,
    valid_features: DMatrix<f64>,
    train_labels: Vec<u16>,
    valid_labels: Vec<u16>,
}

impl LinearProbeEvaluator {
    pub fn new(ctx: &EvalContext) -> Result<Self, EvalError> {
        let (train, valid) = datasets(ctx)?;
        if train.n_channels() != valid.n_channels() {
            return Err(EvalError::EvaluatorFailure(format!(
                "train has {} channels, validation {}",
                train.n_channels(),
                valid.n_channels()
            )));
        }
        Ok(Self {
            train_features: log_variance_features(train),
            valid_features: log_variance_features(valid),
            train_labels: train.labels().to_vec(),
            valid_labels: valid.labels().to_vec(),
        })
    }
}

impl Evaluator for LinearProbeEvaluator {
    fn name(&self) -> String {
        "linear-probe".into()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn evaluate(&self, req: &EvalRequest<'_>) -> Result<EvalOutcome, EvalError> {
        let score = fit_and_score(
            &gather(&self.train_features, req.subset.members())?,
            &self.train_labels,
            &gather(&self.valid_features, req.subset.members())?,
            &self.valid_labels,
        )?;
        Ok(EvalOutcome {
            score,
            state_key: None,
        })
    }
}
