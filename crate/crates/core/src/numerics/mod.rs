//! Ridge decoding, majority baselines, covariate removal and summary statistics.

mod baseline;
mod matrix;
mod projector;
mod ridge;
mod stats;

pub use baseline::{label_counts, majority_baseline, majority_label};
pub use matrix::Matrix;
pub use projector::{fit_projector, project_out, CovariateProjector, RESIDUAL_TOLERANCE};
pub use ridge::{ridge_fit, ridge_predict, RidgeModel, DEFAULT_ALPHA};
pub use stats::{label_entropy, pearson, pearson_p_value};
