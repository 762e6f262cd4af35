use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::{split_utterances, SplitStrategy, UtteranceSplit};
use crate::dataset::{assemble_rows, Dataset, SampleSet, TokenFilter, TokenId};
use crate::numerics::{majority_baseline, RidgeModel, DEFAULT_ALPHA};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Offsets
// ---------------------------------------------------------------------------

/// Inclusive range of frame offsets relative to phone onset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetRange {
    pub lo: i64,
    pub hi: i64,
}

/// Largest number of offsets a range may span; every offset gets its own fit.
pub const MAX_OFFSET_SPAN: i64 = 100_000;

impl OffsetRange {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Config(format!("empty offset range {lo}..{hi}")));
        }
        if hi.checked_sub(lo).is_none_or(|span| span >= MAX_OFFSET_SPAN) {
            return Err(Error::Config(format!(
                "offset range {lo}..{hi} spans more than {MAX_OFFSET_SPAN} frames"
            )));
        }
        Ok(OffsetRange { lo, hi })
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + Clone {
        self.lo..=self.hi
    }

    pub fn to_vec(&self) -> Vec<i64> {
        self.iter().collect()
    }
}

impl Default for OffsetRange {
    /// 160 offsets: 800 ms either side of onset at a 10 ms frame period.
    fn default() -> Self {
        OffsetRange { lo: -80, hi: 79 }
    }
}

impl fmt::Display for OffsetRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for OffsetRange {
    type Err = Error;

    /// Parses `lo..hi` (both inclusive, either may be negative).
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| Error::Config(format!("expected lo..hi, got {s:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| Error::Config(format!("bad offset {v:?} in {s:?}")))
        };
        OffsetRange::new(parse(lo)?, parse(hi)?)
    }
}

// ---------------------------------------------------------------------------
// Configuration and results
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub offsets: OffsetRange,
    pub split: SplitStrategy,
    pub alpha: f64,
    pub filter: TokenFilter,
    pub seed: u64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            offsets: OffsetRange::default(),
            split: SplitStrategy::default(),
            alpha: DEFAULT_ALPHA,
            filter: TokenFilter::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub offset_frames: i64,
    pub offset_ms: f64,
    pub accuracy: f64,
    pub baseline: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Train plus test tokens whose frame fell outside their utterance.
    pub n_dropped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodingCurve {
    pub frame_period_ms: f64,
    pub points: Vec<CurvePoint>,
    pub split: UtteranceSplit,
}

impl DecodingCurve {
    pub fn accuracies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.accuracy).collect()
    }

    pub fn point(&self, offset_frames: i64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.offset_frames == offset_frames)
    }
}

// ---------------------------------------------------------------------------
// Shared fitting machinery (window sweep and temporal generalization)
// ---------------------------------------------------------------------------

/// Train/test token lists fixed once per run, before any parallel phase.
pub(crate) struct PreparedTokens {
    pub split: UtteranceSplit,
    pub train: Vec<TokenId>,
    pub test: Vec<TokenId>,
}

pub(crate) fn prepare_tokens(dataset: &Dataset, cfg: &WindowConfig) -> Result<PreparedTokens> {
    if !(cfg.alpha > 0.0 && cfg.alpha.is_finite()) {
        return Err(Error::Config(format!("alpha must be positive, got {}", cfg.alpha)));
    }
    let split = split_utterances(dataset, &cfg.split, cfg.seed)?;
    let vocab = dataset.vocab();
    let pick = |utts: &[usize]| -> Vec<TokenId> {
        let mut ids: Vec<TokenId> = dataset
            .token_ids()
            .filter(|id| utts.binary_search(&id.utterance).is_ok())
            .filter(|&id| cfg.filter.matches(dataset.token(id), vocab))
            .collect();
        ids.sort_unstable();
        ids
    };
    let train = pick(&split.train);
    let test = pick(&split.test);
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptySamples(format!(
            "token filter leaves {} training and {} test tokens",
            train.len(),
            test.len()
        )));
    }
    Ok(PreparedTokens { split, train, test })
}

pub(crate) fn rows_at(dataset: &Dataset, tokens: &[TokenId], offset: i64, role: &str) -> Result<SampleSet> {
    let set = assemble_rows(dataset, tokens, offset);
    if set.is_empty() {
        return Err(Error::EmptySamples(format!(
            "no {role} samples at offset {offset} ({} tokens out of range)",
            set.dropped
        )));
    }
    Ok(set)
}

/// Fraction of `test` rows the model labels correctly.
pub(crate) fn score(model: &RidgeModel, test: &SampleSet) -> Result<f64> {
    model.accuracy(&test.x, &test.y)
}

pub(crate) fn fit(train: &SampleSet, alpha: f64) -> Result<RidgeModel> {
    RidgeModel::fit(&train.x, &train.y, alpha, None)
}

// ---------------------------------------------------------------------------
// Decodability window
// ---------------------------------------------------------------------------

/// Trains one decoder per offset on the training utterances and scores it on
/// the held-out utterances at the same offset.
pub fn decoding_window(dataset: &Dataset, cfg: &WindowConfig) -> Result<DecodingCurve> {
    let prepared = prepare_tokens(dataset, cfg)?;
    let period = dataset.frame_period_ms();
    let offsets = cfg.offsets.to_vec();
    let points = offsets
        .par_iter()
        .map(|&o| {
            let train = rows_at(dataset, &prepared.train, o, "training")?;
            let test = rows_at(dataset, &prepared.test, o, "test")?;
            let model = fit(&train, cfg.alpha)?;
            let (_, baseline) = majority_baseline(&train.y, &test.y)?;
            Ok(CurvePoint {
                offset_frames: o,
                offset_ms: o as f64 * period,
                accuracy: score(&model, &test)?,
                baseline,
                n_train: train.len(),
                n_test: test.len(),
                n_dropped: train.dropped + test.dropped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecodingCurve {
        frame_period_ms: period,
        points,
        split: prepared.split,
    })
}
