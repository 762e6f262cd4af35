use std::collections::BTreeMap;

use crate::acoustic::UtteranceCovariates;
use crate::dataset::Dataset;
use crate::numerics::{fit_projector, project_out, CovariateProjector, Matrix};
use crate::{Error, Result};

/// Removes from every feature frame the directions along which amplitude and
/// pitch are linearly predictable.
///
/// The projector is fitted on all frames of all utterances, stacked; frames
/// beyond the shorter of the feature and covariate streams of an utterance are
/// left out of the fit but still projected.
pub fn regress_out(
    dataset: &Dataset,
    covariates: &BTreeMap<String, UtteranceCovariates>,
    alpha: f64,
) -> Result<(Dataset, CovariateProjector)> {
    // TODO: accumulate the centered Gram matrix per utterance instead of
    // stacking every frame; the stacked copy doubles peak memory on large sets.
    let dims = dataset.dims();
    let mut data = Vec::new();
    let mut amplitude = Vec::new();
    let mut pitch = Vec::new();
    for utt in dataset.utterances() {
        let cov = covariates
            .get(&utt.id)
            .ok_or_else(|| Error::Covariates {
                line: 0,
                message: format!("no covariates for utterance {:?}", utt.id),
            })?;
        let n = utt.features.frames().min(cov.frames());
        for f in 0..n {
            data.extend_from_slice(utt.features.frame(f));
        }
        amplitude.extend_from_slice(&cov.amplitude.values[..n]);
        pitch.extend_from_slice(&cov.pitch_hz.values[..n]);
    }
    let x = Matrix::from_vec(amplitude.len(), dims, data)?;
    let projector = fit_projector(&x, &[amplitude, pitch], alpha)?;
    let projected = dataset.map_features(|u| project_out(&projector, u.features.matrix()))?;
    Ok((projected, projector))
}
