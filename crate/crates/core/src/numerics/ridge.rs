//! One-vs-rest ridge classification with a closed-form solve.
//!
//! Features and one-hot targets are centered by their training means, the
//! regularized normal equations `(XcᵀXc + αI) W = XcᵀYc` are solved through a
//! Cholesky factorization of the `d × d` Gram matrix, and the intercept stays
//! unpenalized. Scores for a row `x` are `(x − x̄)ᵀW + ȳ`, which equals
//! `xᵀW + b` with `b = ȳ − x̄ᵀW`.

use serde::{Deserialize, Serialize};

use super::matrix::{centered_gram, cholesky, cholesky_solve, Matrix};
use crate::dataset::SampleSet;
use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    /// `dims × k`, one column per entry of `class_labels`.
    weights: Matrix,
    /// Per-class mean of the one-hot targets (the class frequencies).
    target_mean: Vec<f64>,
    feature_mean: Vec<f64>,
    alpha: f64,
    /// Sorted ascending; column `j` of `weights` scores `class_labels[j]`.
    class_labels: Vec<usize>,
}

impl RidgeModel {
    pub fn fit(x: &Matrix, y: &[usize], alpha: f64, class_labels: Option<&[usize]>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch {
                context: "ridge labels".into(),
                expected: x.rows(),
                found: y.len(),
            });
        }
        if x.rows() < 2 {
            return Err(Error::Numeric(format!(
                "ridge fit needs at least 2 samples, got {}",
                x.rows()
            )));
        }

        let mut classes: Vec<usize> = match class_labels {
            Some(c) => c.to_vec(),
            None => y.to_vec(),
        };
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::Numeric(format!(
                "ridge classifier needs at least 2 classes, got {}",
                classes.len()
            )));
        }

        let k = classes.len();
        let mut targets = Matrix::zeros(y.len(), k);
        for (r, label) in y.iter().enumerate() {
            let c = classes.binary_search(label).map_err(|_| {
                Error::Numeric(format!("label {label} is not in the class list"))
            })?;
            targets.set(r, c, 1.0);
        }

        let (weights, feature_mean, target_mean) = solve_centered(x, &targets, alpha)?;
        Ok(RidgeModel {
            weights,
            target_mean,
            feature_mean,
            alpha,
            class_labels: classes,
        })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn feature_mean(&self) -> &[f64] {
        &self.feature_mean
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn class_labels(&self) -> &[usize] {
        &self.class_labels
    }

    pub fn dims(&self) -> usize {
        self.weights.rows()
    }

    /// Scores at `x = x̄`, i.e. the training class frequencies.
    pub fn target_mean(&self) -> &[f64] {
        &self.target_mean
    }

    /// `b = ȳ − x̄ᵀW`, the intercept for uncentered inputs.
    pub fn intercept(&self) -> Vec<f64> {
        (0..self.class_labels.len())
            .map(|c| {
                let shift: f64 = self
                    .feature_mean
                    .iter()
                    .enumerate()
                    .map(|(i, m)| m * self.weights.get(i, c))
                    .sum();
                self.target_mean[c] - shift
            })
            .collect()
    }

    pub fn decision_function(&self, x: &Matrix) -> Result<Matrix> {
        self.check_dims(x)?;
        let k = self.class_labels.len();
        let mut scores = Matrix::zeros(x.rows(), k);
        let mut centered = vec![0.0; self.dims()];
        for (r, row) in x.iter_rows().enumerate() {
            self.score_row(row, &mut centered, scores.row_mut(r));
        }
        Ok(scores)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        self.check_dims(x)?;
        let mut centered = vec![0.0; self.dims()];
        let mut scores = vec![0.0; self.class_labels.len()];
        Ok(x.iter_rows()
            .map(|row| {
                self.score_row(row, &mut centered, &mut scores);
                self.class_labels[argmax_first(&scores)]
            })
            .collect())
    }

    /// Fraction of rows whose prediction equals the label.
    pub fn accuracy(&self, x: &Matrix, y: &[usize]) -> Result<f64> {
        if y.is_empty() {
            return Err(Error::EmptySamples("accuracy on an empty test set".into()));
        }
        let pred = self.predict(x)?;
        let hits = pred.iter().zip(y).filter(|(p, t)| p == t).count();
        Ok(hits as f64 / y.len() as f64)
    }

    fn score_row(&self, row: &[f64], centered: &mut [f64], out: &mut [f64]) {
        for ((c, v), m) in centered.iter_mut().zip(row).zip(&self.feature_mean) {
            *c = v - m;
        }
        out.copy_from_slice(&self.target_mean);
        for (i, ci) in centered.iter().enumerate() {
            if *ci == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(self.weights.row(i)) {
                *o += ci * w;
            }
        }
    }

    fn check_dims(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.dims() {
            return Err(Error::DimensionMismatch {
                context: "ridge input".into(),
                expected: self.dims(),
                found: x.cols(),
            });
        }
        Ok(())
    }
}

/// Index of the largest score; the first one wins ties.
pub(crate) fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// Centered ridge solve shared by the classifier and the covariate projector.
/// Returns `(W, x̄, ȳ)` with `W` of shape `dims × targets`.
pub(crate) fn solve_centered(
    x: &Matrix,
    targets: &Matrix,
    alpha: f64,
) -> Result<(Matrix, Vec<f64>, Vec<f64>)> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("ridge alpha must be positive, got {alpha}")));
    }
    if let Some((row, col)) = x.first_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    if let Some((row, col)) = targets.first_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    let d = x.cols();
    let k = targets.cols();
    let x_mean = x.column_means();
    let y_mean = targets.column_means();

    let mut gram = centered_gram(x, &x_mean);
    for i in 0..d {
        gram.set(i, i, gram.get(i, i) + alpha);
    }

    let mut rhs = Matrix::zeros(d, k);
    let mut xc = vec![0.0; d];
    let mut yc = vec![0.0; k];
    for r in 0..x.rows() {
        for ((c, v), m) in xc.iter_mut().zip(x.row(r)).zip(&x_mean) {
            *c = v - m;
        }
        for ((c, v), m) in yc.iter_mut().zip(targets.row(r)).zip(&y_mean) {
            *c = v - m;
        }
        for (i, xi) in xc.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for (o, t) in rhs.row_mut(i).iter_mut().zip(&yc) {
                *o += xi * t;
            }
        }
    }

    let l = cholesky(&gram)?;
    Ok((cholesky_solve(&l, &rhs), x_mean, y_mean))
}

pub fn ridge_fit(samples: &SampleSet, alpha: f64, class_labels: Option<&[usize]>) -> Result<RidgeModel> {
    RidgeModel::fit(&samples.x, &samples.y, alpha, class_labels)
}

pub fn ridge_predict(model: &RidgeModel, x: &Matrix) -> Result<Vec<usize>> {
    model.predict(x)
}
