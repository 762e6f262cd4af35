//! Removal of covariate-predictive directions from feature vectors.
//!
//! One ridge regression per covariate predicts that covariate from the
//! features; the coefficient vectors are orthonormalized and every feature
//! row is projected onto their orthogonal complement.

use serde::{Deserialize, Serialize};

use super::matrix::{dot, Matrix};
use super::ridge::solve_centered;
use crate::{Error, Result};

/// Coefficient vectors whose Gram–Schmidt residual falls below this are dropped.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariateProjector {
    directions: Vec<Vec<f64>>,
    feature_mean: Vec<f64>,
    /// Ridge coefficient vector per covariate, before orthonormalization.
    coefficients: Vec<Vec<f64>>,
}

impl CovariateProjector {
    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn feature_mean(&self) -> &[f64] {
        &self.feature_mean
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn dims(&self) -> usize {
        self.feature_mean.len()
    }

    pub fn project_row(&self, row: &mut [f64]) {
        for d in &self.directions {
            let p = dot(row, d);
            for (v, di) in row.iter_mut().zip(d) {
                *v -= p * di;
            }
        }
    }
}

/// Fits one ridge regression per covariate column and orthonormalizes the
/// coefficient vectors. `covariates[c][r]` is covariate `c` at row `r` of `x`.
pub fn fit_projector(x: &Matrix, covariates: &[Vec<f64>], alpha: f64) -> Result<CovariateProjector> {
    if covariates.is_empty() {
        return Err(Error::Config("no covariates to project out".into()));
    }
    if x.rows() < 2 {
        return Err(Error::Numeric("projector fit needs at least 2 rows".into()));
    }
    let mut targets = Matrix::zeros(x.rows(), covariates.len());
    for (c, series) in covariates.iter().enumerate() {
        if series.len() != x.rows() {
            return Err(Error::DimensionMismatch {
                context: format!("covariate {c}"),
                expected: x.rows(),
                found: series.len(),
            });
        }
        for (r, v) in series.iter().enumerate() {
            targets.set(r, c, *v);
        }
    }

    let (w, feature_mean, _) = solve_centered(x, &targets, alpha)?;
    let coefficients: Vec<Vec<f64>> = (0..covariates.len()).map(|c| w.column(c)).collect();
    let directions = orthonormalize(&coefficients);
    if directions.is_empty() {
        return Err(Error::Numeric(
            "every covariate coefficient vector is zero; nothing to project out".into(),
        ));
    }
    Ok(CovariateProjector {
        directions,
        feature_mean,
        coefficients,
    })
}

/// Modified Gram–Schmidt with one reorthogonalization pass.
fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale = dot(v, v).sqrt();
        if scale == 0.0 || !scale.is_finite() {
            continue;
        }
        let mut u: Vec<f64> = v.iter().map(|x| x / scale).collect();
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&u, b);
                for (ui, bi) in u.iter_mut().zip(b) {
                    *ui -= p * bi;
                }
            }
        }
        let norm = dot(&u, &u).sqrt();
        if norm < RESIDUAL_TOLERANCE {
            continue;
        }
        u.iter_mut().for_each(|x| *x /= norm);
        basis.push(u);
    }
    basis
}

/// `x' = x − Σ (x·d) d` for every row.
pub fn project_out(projector: &CovariateProjector, x: &Matrix) -> Result<Matrix> {
    if x.cols() != projector.dims() {
        return Err(Error::DimensionMismatch {
            context: "project_out input".into(),
            expected: projector.dims(),
            found: x.cols(),
        });
    }
    let mut out = x.clone();
    for r in 0..out.rows() {
        projector.project_row(out.row_mut(r));
    }
    Ok(out)
}
