//! Feature streams, phone alignments and the frame arithmetic that links them.

mod alignment;
mod manifest;
pub mod npy;
mod vocab;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use alignment::{alignment_to_tsv, parse_alignment, parse_alignment_str, PhoneToken};
pub(crate) use alignment::assign_word_positions as assign_positions;
pub use manifest::{
    parse_audio_manifest, parse_manifest, DatasetManifest, FeatureKind, ManifestFile, OneOrMany,
};
pub use vocab::{Manner, PhoneClass, PhonemeVocab, VocabEntry};

use crate::numerics::Matrix;
use crate::{Error, Result};

pub const DEFAULT_FRAME_PERIOD_MS: f64 = 10.0;

/// Frames × dims feature stream with a fixed frame period.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    data: Matrix,
    frame_period_ms: f64,
}

impl FeatureMatrix {
    pub fn new(data: Matrix, frame_period_ms: f64) -> Result<Self> {
        if data.rows() == 0 || data.cols() == 0 {
            return Err(Error::Npy(format!(
                "feature matrix must have at least one frame and one dimension, got {}x{}",
                data.rows(),
                data.cols()
            )));
        }
        if !(frame_period_ms > 0.0 && frame_period_ms.is_finite()) {
            return Err(Error::Config(format!(
                "frame period must be positive, got {frame_period_ms}"
            )));
        }
        if let Some((row, col)) = data.first_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        Ok(FeatureMatrix {
            data,
            frame_period_ms,
        })
    }

    pub fn frames(&self) -> usize {
        self.data.rows()
    }

    pub fn dims(&self) -> usize {
        self.data.cols()
    }

    pub fn frame_period_ms(&self) -> f64 {
        self.frame_period_ms
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }
}

/// Loads a ".npy" feature file at the default 10 ms frame period.
pub fn load_features(path: &Path) -> Result<FeatureMatrix> {
    FeatureMatrix::new(npy::read_matrix(path)?, DEFAULT_FRAME_PERIOD_MS)
}

pub fn write_features(path: &Path, features: &FeatureMatrix) -> Result<()> {
    npy::write_matrix(path, features.matrix())
}

/// Round-half-up frame index of a time point.
///
/// The product is nudged by 1e-9 frames so that decimal inputs such as
/// 0.845 s, which land a hair below the half in binary, still round up.
pub fn onset_frame(time_s: f64, frame_period_ms: f64) -> usize {
    let frames = time_s * 1000.0 / frame_period_ms;
    (frames + 0.5 + 1e-9).floor().max(0.0) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct Utterance {
    pub id: String,
    pub speaker_id: String,
    pub features: FeatureMatrix,
    /// Sorted by onset, non-overlapping.
    pub tokens: Vec<PhoneToken>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TokenId {
    pub utterance: usize,
    pub token: usize,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    vocab: PhonemeVocab,
    frame_period_ms: f64,
    dims: usize,
    utterances: Vec<Utterance>,
}

impl Dataset {
    pub fn new(vocab: PhonemeVocab, frame_period_ms: f64, utterances: Vec<Utterance>) -> Result<Self> {
        let dims = utterances
            .first()
            .map(|u| u.features.dims())
            .ok_or_else(|| Error::Manifest("dataset has no utterances".into()))?;
        for u in &utterances {
            if u.features.dims() != dims {
                return Err(Error::DimensionMismatch {
                    context: format!("features of {:?}", u.id),
                    expected: dims,
                    found: u.features.dims(),
                });
            }
            if u.features.frame_period_ms() != frame_period_ms {
                return Err(Error::Config(format!(
                    "utterance {:?} has frame period {} ms, dataset uses {frame_period_ms} ms",
                    u.id,
                    u.features.frame_period_ms()
                )));
            }
            alignment::check_non_overlapping(&u.id, &u.tokens)?;
            for t in &u.tokens {
                if t.label_index >= vocab.len() {
                    return Err(Error::Config(format!(
                        "utterance {:?}: label index {} outside vocabulary",
                        u.id, t.label_index
                    )));
                }
                if t.word_position == 0 || !(t.onset_s >= 0.0 && t.onset_s < t.offset_s) {
                    return Err(Error::Config(format!(
                        "utterance {:?}: malformed token at {}s",
                        u.id, t.onset_s
                    )));
                }
            }
        }
        Ok(Dataset {
            vocab,
            frame_period_ms,
            dims,
            utterances,
        })
    }

    /// Loads every feature file of a validated manifest (files are read in parallel).
    pub fn load(manifest: &DatasetManifest) -> Result<Self> {
        let vocab = manifest.load_vocab()?;
        let tokens = manifest.load_tokens(&vocab)?;
        let mut by_utt: BTreeMap<&str, Vec<PhoneToken>> = BTreeMap::new();
        for t in &tokens {
            if !manifest.features.contains_key(&t.utterance_id) {
                return Err(Error::DanglingUtterance(t.utterance_id.clone()));
            }
            by_utt.entry(t.utterance_id.as_str()).or_default().push(t.clone());
        }
        let declared = manifest.dims;
        let entries: Vec<(&String, &std::path::PathBuf)> = manifest.features.iter().collect();
        let utterances = entries
            .par_iter()
            .map(|(id, path)| {
                let data = npy::read_matrix(path)?;
                if let Some(d) = declared {
                    if data.cols() != d {
                        return Err(Error::DimensionMismatch {
                            context: format!("features of {id:?}"),
                            expected: d,
                            found: data.cols(),
                        });
                    }
                }
                let features = FeatureMatrix::new(data, manifest.frame_period_ms)?;
                let tokens = by_utt.get(id.as_str()).cloned().unwrap_or_default();
                let speaker_id = tokens.first().map(|t| t.speaker_id.clone()).unwrap_or_default();
                Ok(Utterance {
                    id: (*id).clone(),
                    speaker_id,
                    features,
                    tokens,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(vocab, manifest.frame_period_ms, utterances)
    }

    pub fn vocab(&self) -> &PhonemeVocab {
        &self.vocab
    }

    pub fn frame_period_ms(&self) -> f64 {
        self.frame_period_ms
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn token(&self, id: TokenId) -> &PhoneToken {
        &self.utterances[id.utterance].tokens[id.token]
    }

    pub fn token_ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.utterances.iter().enumerate().flat_map(|(u, utt)| {
            (0..utt.tokens.len()).map(move |t| TokenId {
                utterance: u,
                token: t,
            })
        })
    }

    pub fn token_count(&self) -> usize {
        self.utterances.iter().map(|u| u.tokens.len()).sum()
    }

    pub fn frame_count(&self) -> usize {
        self.utterances.iter().map(|u| u.features.frames()).sum()
    }

    /// Tokens immediately before and after `id` within its utterance.
    pub fn neighbors(&self, id: TokenId) -> (Option<TokenId>, Option<TokenId>) {
        let n = self.utterances[id.utterance].tokens.len();
        let prev = id.token.checked_sub(1).map(|t| TokenId { token: t, ..id });
        let next = (id.token + 1 < n).then_some(TokenId {
            token: id.token + 1,
            ..id
        });
        (prev, next)
    }

    pub fn select(&self, filter: impl Fn(&PhoneToken) -> bool) -> Vec<TokenId> {
        self.token_ids().filter(|&id| filter(self.token(id))).collect()
    }

    pub fn onset_frame_of(&self, id: TokenId) -> usize {
        onset_frame(self.token(id).onset_s, self.frame_period_ms)
    }

    /// Mean `offset_s − onset_s` over the given tokens, in milliseconds.
    pub fn mean_duration_ms(&self, ids: &[TokenId]) -> Option<f64> {
        if ids.is_empty() {
            return None;
        }
        let total: f64 = ids.iter().map(|&id| self.token(id).duration_s()).sum();
        Some(total / ids.len() as f64 * 1000.0)
    }

    /// Replaces every utterance's features through `f`, keeping alignments.
    pub fn map_features(&self, f: impl Fn(&Utterance) -> Result<Matrix> + Sync) -> Result<Dataset> {
        let utterances = self
            .utterances
            .par_iter()
            .map(|u| {
                Ok(Utterance {
                    features: FeatureMatrix::new(f(u)?, self.frame_period_ms)?,
                    ..u.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(self.vocab.clone(), self.frame_period_ms, utterances)
    }
}

/// Token selection shared by the analyses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenFilter {
    #[serde(default)]
    pub vowels_only: bool,
    /// Keep only this 1-based word position.
    #[serde(default)]
    pub word_position: Option<u32>,
}

impl TokenFilter {
    pub fn matches(&self, token: &PhoneToken, vocab: &PhonemeVocab) -> bool {
        if self.vowels_only && !vocab.is_vowel(token.label_index) {
            return false;
        }
        if let Some(p) = self.word_position {
            if token.word_position != p {
                return false;
            }
        }
        true
    }
}

/// Design matrix of frames taken at a fixed offset from each token's onset.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub x: Matrix,
    pub y: Vec<usize>,
    pub offset_frames: i64,
    /// Source token of each row.
    pub provenance: Vec<TokenId>,
    /// Tokens skipped because the frame fell outside their utterance.
    pub dropped: usize,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// One row per token whose `onset_frame + offset` lies inside its utterance.
/// Out-of-range tokens are counted in `dropped`. May return an empty set.
pub fn assemble_rows(dataset: &Dataset, tokens: &[TokenId], offset_frames: i64) -> SampleSet {
    let dims = dataset.dims();
    let mut data = Vec::with_capacity(tokens.len() * dims);
    let mut y = Vec::with_capacity(tokens.len());
    let mut provenance = Vec::with_capacity(tokens.len());
    let mut dropped = 0;
    for &id in tokens {
        let utt = &dataset.utterances[id.utterance];
        let frame = dataset.onset_frame_of(id) as i64 + offset_frames;
        if frame < 0 || frame >= utt.features.frames() as i64 {
            dropped += 1;
            continue;
        }
        data.extend_from_slice(utt.features.frame(frame as usize));
        y.push(utt.tokens[id.token].label_index);
        provenance.push(id);
    }
    let rows = y.len();
    SampleSet {
        x: Matrix::from_vec(rows, dims, data).expect("rows are dims wide"),
        y,
        offset_frames,
        provenance,
        dropped,
    }
}

/// [`assemble_rows`] over every token passing `filter`; an empty result is an error.
pub fn assemble_samples(
    dataset: &Dataset,
    offset_frames: i64,
    filter: impl Fn(&PhoneToken) -> bool,
) -> Result<SampleSet> {
    let tokens = dataset.select(filter);
    let set = assemble_rows(dataset, &tokens, offset_frames);
    if set.is_empty() {
        return Err(Error::EmptySamples(format!(
            "no in-bounds samples at offset {offset_frames} ({} tokens dropped)",
            set.dropped
        )));
    }
    Ok(set)
}
