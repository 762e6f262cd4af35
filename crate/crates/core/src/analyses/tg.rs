use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::window::{fit, prepare_tokens, rows_at, score, WindowConfig};
use crate::dataset::{Dataset, TokenId};
use crate::numerics::{label_counts, label_entropy, majority_baseline, Matrix};
use crate::{Error, Result};

/// Token counts and label statistics for one word position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionStats {
    pub n_train_tokens: usize,
    pub n_test_tokens: usize,
    /// Entropy in bits of the label distribution over train and test tokens.
    pub entropy_bits: f64,
    pub mean_duration_ms: f64,
    /// Label → token count over train and test tokens.
    pub class_counts: BTreeMap<String, usize>,
}

impl PositionStats {
    fn from_tokens(dataset: &Dataset, train: &[TokenId], test: &[TokenId]) -> Result<Self> {
        let all: Vec<TokenId> = train.iter().chain(test).copied().collect();
        let labels: Vec<usize> = all.iter().map(|&id| dataset.token(id).label_index).collect();
        let class_counts = label_counts(&labels)
            .into_iter()
            .map(|(l, c)| (dataset.vocab().label(l).to_string(), c))
            .collect();
        Ok(PositionStats {
            n_train_tokens: train.len(),
            n_test_tokens: test.len(),
            entropy_bits: label_entropy(&labels)?,
            mean_duration_ms: dataset.mean_duration_ms(&all).unwrap_or(0.0),
            class_counts,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TGMatrix {
    /// 1-based word position the tokens were filtered to.
    pub position: u32,
    pub offsets: Vec<i64>,
    pub frame_period_ms: f64,
    /// `accuracy[(train, test)]`, indexed by position in `offsets`.
    pub accuracy: Matrix,
    /// Majority-class accuracy over the token labels (offset independent).
    pub baseline: f64,
    /// Majority-class accuracy on the in-range rows at each test offset.
    pub offset_baselines: Vec<f64>,
    pub stats: PositionStats,
}

impl TGMatrix {
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.offsets.len()).map(|i| self.accuracy.get(i, i)).collect()
    }

    pub fn offset_ms(&self, index: usize) -> f64 {
        self.offsets[index] as f64 * self.frame_period_ms
    }
}

/// Trains a decoder per offset on tokens at word `position` and evaluates
/// every decoder at every offset.
///
/// The window config's filter is narrowed to `position`; with the same config,
/// the diagonal reproduces [`super::decoding_window`] exactly.
pub fn temporal_generalization(dataset: &Dataset, cfg: &WindowConfig, position: u32) -> Result<TGMatrix> {
    if position == 0 {
        return Err(Error::Config("word positions are 1-based".into()));
    }
    let mut cfg = cfg.clone();
    cfg.filter.word_position = Some(position);
    let prepared = prepare_tokens(dataset, &cfg)?;
    let offsets = cfg.offsets.to_vec();

    let test_sets = offsets
        .par_iter()
        .map(|&o| rows_at(dataset, &prepared.test, o, "test"))
        .collect::<Result<Vec<_>>>()?;
    let models = offsets
        .par_iter()
        .map(|&o| fit(&rows_at(dataset, &prepared.train, o, "training")?, cfg.alpha))
        .collect::<Result<Vec<_>>>()?;
    let rows = models
        .par_iter()
        .map(|model| test_sets.iter().map(|t| score(model, t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    let n = offsets.len();
    let accuracy = Matrix::from_vec(n, n, rows.into_iter().flatten().collect())?;
    let label = |ids: &[TokenId]| -> Vec<usize> { ids.iter().map(|&id| dataset.token(id).label_index).collect() };
    let train_labels = label(&prepared.train);
    let (_, baseline) = majority_baseline(&train_labels, &label(&prepared.test))?;
    let offset_baselines = test_sets
        .iter()
        .map(|t| majority_baseline(&train_labels, &t.y).map(|(_, b)| b))
        .collect::<Result<Vec<_>>>()?;

    Ok(TGMatrix {
        position,
        offsets,
        frame_period_ms: dataset.frame_period_ms(),
        accuracy,
        baseline,
        offset_baselines,
        stats: PositionStats::from_tokens(dataset, &prepared.train, &prepared.test)?,
    })
}
