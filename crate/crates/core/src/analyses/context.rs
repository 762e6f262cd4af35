use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::window::{fit, rows_at, score, OffsetRange};
use crate::dataset::{Dataset, Manner, TokenId};
use crate::numerics::{label_counts, majority_baseline, pearson, DEFAULT_ALPHA};
use crate::rng::SeededRng;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Context definitions
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextMode {
    /// Contexts p1..p4 by position in the word; later positions are excluded.
    #[default]
    WordPosition,
    /// Vowels keyed by the manners of both neighbors, e.g. `plosive__nasal`.
    MannerPair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextSpec {
    pub mode: ContextMode,
    pub vowels_only: bool,
    pub subsample_n: usize,
    pub train_fraction: f64,
    /// Contexts with fewer tokens are dropped; defaults to `subsample_n`.
    pub min_class_size: Option<usize>,
    pub seed: u64,
    pub alpha: f64,
}

impl Default for ContextSpec {
    fn default() -> Self {
        ContextSpec {
            mode: ContextMode::WordPosition,
            vowels_only: true,
            subsample_n: 4500,
            train_fraction: 0.8,
            min_class_size: None,
            seed: 0,
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl ContextSpec {
    /// Contexts below this many tokens are dropped before subsampling.
    pub fn retention_threshold(&self) -> usize {
        self.min_class_size.unwrap_or(self.subsample_n).max(self.subsample_n)
    }

    fn validate(&self) -> Result<()> {
        if self.subsample_n < 2 {
            return Err(Error::Config("subsample_n must be at least 2".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedContext {
    pub context: String,
    pub tokens: usize,
    pub required: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextTokens {
    /// Retained contexts and their tokens, in dataset order.
    pub contexts: BTreeMap<String, Vec<TokenId>>,
    pub dropped: Vec<DroppedContext>,
}

const MANNER_CONTEXTS: [Manner; 3] = [Manner::Plosive, Manner::Fricative, Manner::Nasal];

fn context_of(dataset: &Dataset, id: TokenId, spec: &ContextSpec) -> Option<String> {
    let vocab = dataset.vocab();
    let token = dataset.token(id);
    match spec.mode {
        ContextMode::WordPosition => {
            if spec.vowels_only && !vocab.is_vowel(token.label_index) {
                return None;
            }
            (1..=4).contains(&token.word_position).then(|| format!("p{}", token.word_position))
        }
        ContextMode::MannerPair => {
            if !vocab.is_vowel(token.label_index) {
                return None;
            }
            let manner = |n: Option<TokenId>| {
                let m = vocab.manner(dataset.token(n?).label_index);
                MANNER_CONTEXTS.contains(&m).then_some(m)
            };
            let (prev, next) = dataset.neighbors(id);
            Some(format!("{}__{}", manner(prev)?, manner(next)?))
        }
    }
}

/// Groups tokens into contexts and drops those below the retention threshold.
pub fn split_contexts(dataset: &Dataset, spec: &ContextSpec) -> Result<ContextTokens> {
    let mut all: BTreeMap<String, Vec<TokenId>> = BTreeMap::new();
    for id in dataset.token_ids() {
        if let Some(ctx) = context_of(dataset, id, spec) {
            all.entry(ctx).or_default().push(id);
        }
    }
    let required = spec.retention_threshold();
    let mut contexts = BTreeMap::new();
    let mut dropped = Vec::new();
    for (ctx, ids) in all {
        if ids.len() >= required {
            contexts.insert(ctx, ids);
        } else {
            dropped.push(DroppedContext {
                context: ctx,
                tokens: ids.len(),
                required,
            });
        }
    }
    if contexts.is_empty() {
        return Err(Error::EmptySamples(format!(
            "no context has at least {required} tokens ({} dropped)",
            dropped.len()
        )));
    }
    Ok(ContextTokens { contexts, dropped })
}

// ---------------------------------------------------------------------------
// Cross-context generalization
// ---------------------------------------------------------------------------

/// Subsampled tokens of one context, split into disjoint train and test parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextPartition {
    pub train: Vec<TokenId>,
    pub test: Vec<TokenId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCurve {
    pub train_context: String,
    pub test_context: String,
    /// One value per report offset.
    pub accuracy: Vec<f64>,
    /// Majority label of the training context, scored on the test context.
    pub baseline: Vec<f64>,
}

/// One `(train, test, offset)` cell of a report, as written to and read from CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub train_context: String,
    pub test_context: String,
    pub offset_ms: f64,
    pub accuracy: f64,
    pub baseline: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationReport {
    pub offsets_ms: Vec<f64>,
    pub contexts: Vec<String>,
    /// Every ordered `(train, test)` pair, sorted by train then test context.
    pub pairs: Vec<PairCurve>,
    /// Context → label → count over the subsampled tokens.
    pub class_histograms: BTreeMap<String, BTreeMap<String, usize>>,
    pub partitions: BTreeMap<String, ContextPartition>,
    pub dropped: Vec<DroppedContext>,
}

impl GeneralizationReport {
    pub fn pair(&self, train: &str, test: &str) -> Option<&PairCurve> {
        self.pairs
            .iter()
            .find(|p| p.train_context == train && p.test_context == test)
    }

    pub fn curve_rows(&self) -> Vec<CurveRow> {
        self.pairs
            .iter()
            .flat_map(|p| {
                self.offsets_ms.iter().enumerate().map(move |(i, &ms)| CurveRow {
                    train_context: p.train_context.clone(),
                    test_context: p.test_context.clone(),
                    offset_ms: ms,
                    accuracy: p.accuracy[i],
                    baseline: p.baseline[i],
                })
            })
            .collect()
    }

    /// Rebuilds the curves of a report from its CSV rows. Histograms,
    /// partitions and drop lists are not part of the rows and come back empty.
    pub fn from_curve_rows(rows: &[CurveRow]) -> Result<Self> {
        let mut curves: BTreeMap<(String, String), Vec<(f64, f64, f64)>> = BTreeMap::new();
        for r in rows {
            curves
                .entry((r.train_context.clone(), r.test_context.clone()))
                .or_default()
                .push((r.offset_ms, r.accuracy, r.baseline));
        }
        let mut offsets_ms: Option<Vec<f64>> = None;
        let mut contexts = BTreeSet::new();
        let mut pairs = Vec::new();
        for ((train, test), mut points) in curves {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let offs: Vec<f64> = points.iter().map(|p| p.0).collect();
            match &offsets_ms {
                None => offsets_ms = Some(offs),
                Some(o) if *o != offs => {
                    return Err(Error::Config(format!(
                        "pair {train} -> {test} has different offsets from the other pairs"
                    )))
                }
                _ => {}
            }
            contexts.insert(train.clone());
            contexts.insert(test.clone());
            pairs.push(PairCurve {
                train_context: train,
                test_context: test,
                accuracy: points.iter().map(|p| p.1).collect(),
                baseline: points.iter().map(|p| p.2).collect(),
            });
        }
        let contexts: Vec<String> = contexts.into_iter().collect();
        if pairs.len() != contexts.len() * contexts.len() {
            return Err(Error::Config(format!(
                "{} pairs do not cover all {} x {} context combinations",
                pairs.len(),
                contexts.len(),
                contexts.len()
            )));
        }
        Ok(GeneralizationReport {
            offsets_ms: offsets_ms.unwrap_or_default(),
            contexts,
            pairs,
            class_histograms: BTreeMap::new(),
            partitions: BTreeMap::new(),
            dropped: Vec::new(),
        })
    }
}

/// Subsamples each context to `subsample_n` tokens, splits it into train and
/// test parts, and evaluates every context's per-offset decoders on every
/// context's test part. All randomness is drawn before fitting begins.
pub fn cross_context_generalization(
    dataset: &Dataset,
    spec: &ContextSpec,
    offsets: OffsetRange,
) -> Result<GeneralizationReport> {
    spec.validate()?;
    let grouped = split_contexts(dataset, spec)?;
    if grouped.contexts.len() < 2 {
        return Err(Error::EmptySamples(format!(
            "cross-context generalization needs 2 contexts, {} retained",
            grouped.contexts.len()
        )));
    }

    let mut rng = SeededRng::new(spec.seed);
    let n_train = ((spec.train_fraction * spec.subsample_n as f64).round() as usize).clamp(1, spec.subsample_n - 1);
    let mut partitions = BTreeMap::new();
    let mut class_histograms = BTreeMap::new();
    for (ctx, ids) in &grouped.contexts {
        let mut pool = ids.clone();
        rng.shuffle(&mut pool);
        pool.truncate(spec.subsample_n);
        let labels: Vec<usize> = pool.iter().map(|&id| dataset.token(id).label_index).collect();
        class_histograms.insert(
            ctx.clone(),
            label_counts(&labels)
                .into_iter()
                .map(|(l, c)| (dataset.vocab().label(l).to_string(), c))
                .collect(),
        );
        let mut test = pool.split_off(n_train);
        pool.sort_unstable();
        test.sort_unstable();
        partitions.insert(ctx.clone(), ContextPartition { train: pool, test });
    }

    let contexts: Vec<String> = grouped.contexts.keys().cloned().collect();
    let offset_list = offsets.to_vec();
    let k = contexts.len();
    // cells[offset][train * k + test] = (accuracy, baseline)
    let cells = offset_list
        .par_iter()
        .map(|&o| {
            let tests = contexts
                .iter()
                .map(|c| rows_at(dataset, &partitions[c].test, o, &format!("{c} test")))
                .collect::<Result<Vec<_>>>()?;
            let mut out = Vec::with_capacity(k * k);
            for c in &contexts {
                let train = rows_at(dataset, &partitions[c].train, o, &format!("{c} training"))?;
                let model = fit(&train, spec.alpha)?;
                for t in &tests {
                    let (_, baseline) = majority_baseline(&train.y, &t.y)?;
                    out.push((score(&model, t)?, baseline));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let period = dataset.frame_period_ms();
    let mut pairs = Vec::with_capacity(k * k);
    for (i, train) in contexts.iter().enumerate() {
        for (j, test) in contexts.iter().enumerate() {
            pairs.push(PairCurve {
                train_context: train.clone(),
                test_context: test.clone(),
                accuracy: cells.iter().map(|c| c[i * k + j].0).collect(),
                baseline: cells.iter().map(|c| c[i * k + j].1).collect(),
            });
        }
    }
    Ok(GeneralizationReport {
        offsets_ms: offset_list.iter().map(|&o| o as f64 * period).collect(),
        contexts,
        pairs,
        class_histograms,
        partitions,
        dropped: grouped.dropped,
    })
}

// ---------------------------------------------------------------------------
// Effects
// ---------------------------------------------------------------------------

/// Default effect window: the first 100 ms after onset, about one phone.
pub const DEFAULT_EFFECT_WINDOW_MS: (f64, f64) = (0.0, 100.0);

/// Mean of `accuracy − baseline` over offsets in the inclusive `window_ms`.
pub fn generalization_effect(
    report: &GeneralizationReport,
    train: &str,
    test: &str,
    window_ms: (f64, f64),
) -> Result<f64> {
    let pair = report
        .pair(train, test)
        .ok_or_else(|| Error::Config(format!("report has no pair {train} -> {test}")))?;
    let (lo, hi) = window_ms;
    let tol = 1e-9;
    let diffs: Vec<f64> = report
        .offsets_ms
        .iter()
        .enumerate()
        .filter(|(_, &ms)| ms >= lo - tol && ms <= hi + tol)
        .map(|(i, _)| pair.accuracy[i] - pair.baseline[i])
        .collect();
    if diffs.is_empty() {
        return Err(Error::Config(format!(
            "effect window {lo}..{hi} ms contains no report offsets"
        )));
    }
    Ok(diffs.iter().sum::<f64>() / diffs.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectPair {
    pub train_context: String,
    pub test_context: String,
    pub effect_a: f64,
    pub effect_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectCorrelation {
    pub r: f64,
    pub p: f64,
    pub pairs: Vec<EffectPair>,
}

/// Pearson correlation of off-diagonal effects between two reports over the
/// same context set.
pub fn effect_correlation(
    a: &GeneralizationReport,
    b: &GeneralizationReport,
    window_ms: (f64, f64),
) -> Result<EffectCorrelation> {
    if a.contexts != b.contexts {
        return Err(Error::Config(format!(
            "reports cover different contexts: {:?} vs {:?}",
            a.contexts, b.contexts
        )));
    }
    let mut pairs = Vec::new();
    for train in &a.contexts {
        for test in a.contexts.iter().filter(|t| *t != train) {
            pairs.push(EffectPair {
                train_context: train.clone(),
                test_context: test.clone(),
                effect_a: generalization_effect(a, train, test, window_ms)?,
                effect_b: generalization_effect(b, train, test, window_ms)?,
            });
        }
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.effect_a).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.effect_b).collect();
    let (r, p) = pearson(&xs, &ys)?;
    Ok(EffectCorrelation { r, p, pairs })
}
