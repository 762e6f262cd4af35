//! Seeded synthetic datasets with known encoding dynamics.
//!
//! Phones are laid out back to back between noise-only margins. Every frame
//! is Gaussian noise of standard deviation `noise_sigma`; frames inside a
//! phone's signal window (offsets relative to its onset) additionally carry a
//! unit-norm pattern drawn from one orthonormal basis:
//!
//! | mode                | pattern at window frame `k` for label `l`, context `c` |
//! |---------------------|---------------------------------------------------------|
//! | `static`            | `e[l]`                                                  |
//! | `rotating`          | `e[(l + k·n) mod B]`, `B = min(dims, n·window_len)`     |
//! | `context_invariant` | `e[l] + e[n + c]`                                       |
//! | `context_entangled` | `e[l + c·n]`                                            |
//!
//! with `n = n_phonemes`. Contexts are the word position (p1..p4, positions
//! beyond 4 share p4) or, in manner mode, the (previous, next) manner pair of
//! a vowel flanked by plosives, fricatives or nasals (9 contexts). Tokens
//! without a manner context get the label pattern alone (invariant mode) or
//! context 0 (entangled mode).
//!
//! Vowels are labelled `V00..`, consonants `C00..` with manners cycling
//! plosive, fricative, nasal.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{
    alignment_to_tsv, FeatureMatrix, ManifestFile, Manner, OneOrMany, PhoneClass, PhoneToken,
    PhonemeVocab, Utterance, VocabEntry,
};
use crate::dataset::{npy, Dataset, FeatureKind};
use crate::numerics::Matrix;
use crate::rng::SeededRng;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingMode {
    Static,
    Rotating,
    ContextInvariant,
    ContextEntangled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthContext {
    Position,
    Manner,
}

impl SynthContext {
    fn count(self) -> usize {
        match self {
            SynthContext::Position => 4,
            SynthContext::Manner => 9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_phonemes: usize,
    pub n_vowels: usize,
    pub dims: usize,
    pub n_utterances: usize,
    pub n_speakers: usize,
    pub phones_per_utterance: usize,
    pub min_duration_frames: usize,
    pub max_duration_frames: usize,
    pub min_word_len: usize,
    pub max_word_len: usize,
    pub encoding: EncodingMode,
    pub context: SynthContext,
    /// Inclusive frame offsets relative to onset that carry the pattern.
    pub signal_window: [i64; 2],
    pub noise_sigma: f64,
    /// Noise-only frames before the first and after the last phone.
    pub edge_frames: usize,
    /// Relative label frequencies; uniform when absent.
    pub label_weights: Option<Vec<f64>>,
    pub frame_period_ms: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_phonemes: 39,
            n_vowels: 15,
            dims: 64,
            n_utterances: 40,
            n_speakers: 10,
            phones_per_utterance: 40,
            min_duration_frames: 8,
            max_duration_frames: 10,
            min_word_len: 1,
            max_word_len: 5,
            encoding: EncodingMode::Static,
            context: SynthContext::Position,
            signal_window: [-2, 5],
            noise_sigma: 0.1,
            edge_frames: 20,
            label_weights: None,
            frame_period_ms: 10.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: SyntheticSpec =
            serde_json::from_str(text).map_err(|e| Error::Synth(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn window_len(&self) -> usize {
        (self.signal_window[1] - self.signal_window[0] + 1).max(0) as usize
    }

    fn basis_size(&self) -> usize {
        let n = self.n_phonemes;
        match self.encoding {
            EncodingMode::Static => n,
            EncodingMode::Rotating => self.dims.min(n * self.window_len()),
            EncodingMode::ContextInvariant => n + self.context.count(),
            EncodingMode::ContextEntangled => n * self.context.count(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_phonemes", self.n_phonemes),
            ("dims", self.dims),
            ("n_utterances", self.n_utterances),
            ("n_speakers", self.n_speakers),
            ("phones_per_utterance", self.phones_per_utterance),
            ("min_duration_frames", self.min_duration_frames),
            ("min_word_len", self.min_word_len),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Synth(format!("{name} must be positive")));
            }
        }
        if self.n_vowels > self.n_phonemes {
            return Err(Error::Synth("n_vowels exceeds n_phonemes".into()));
        }
        if self.dims < self.n_phonemes {
            return Err(Error::Synth(format!(
                "dims ({}) must be at least n_phonemes ({})",
                self.dims, self.n_phonemes
            )));
        }
        if self.dims < self.basis_size() {
            return Err(Error::Synth(format!(
                "{:?} encoding needs {} orthogonal patterns but dims is {}",
                self.encoding,
                self.basis_size(),
                self.dims
            )));
        }
        if self.min_duration_frames > self.max_duration_frames {
            return Err(Error::Synth("min_duration_frames exceeds max_duration_frames".into()));
        }
        if self.min_word_len > self.max_word_len {
            return Err(Error::Synth("min_word_len exceeds max_word_len".into()));
        }
        if self.signal_window[0] > self.signal_window[1] {
            return Err(Error::Synth("signal window is empty".into()));
        }
        if self.window_len() > self.min_duration_frames {
            return Err(Error::Synth(format!(
                "signal window of {} frames exceeds the minimum phone spacing of {} frames; windows would overlap",
                self.window_len(),
                self.min_duration_frames
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Synth("noise_sigma must be finite and non-negative".into()));
        }
        if !(self.frame_period_ms > 0.0 && self.frame_period_ms.is_finite()) {
            return Err(Error::Synth("frame_period_ms must be positive".into()));
        }
        if let Some(w) = &self.label_weights {
            if w.len() != self.n_phonemes {
                return Err(Error::Synth(format!(
                    "label_weights has {} entries, expected {}",
                    w.len(),
                    self.n_phonemes
                )));
            }
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::Synth("label_weights must be non-negative with a positive sum".into()));
            }
        }
        Ok(())
    }

    pub fn vocab(&self) -> PhonemeVocab {
        let manners = [Manner::Plosive, Manner::Fricative, Manner::Nasal];
        let entries = (0..self.n_phonemes)
            .map(|i| {
                if i < self.n_vowels {
                    VocabEntry {
                        label: format!("V{i:02}"),
                        class: PhoneClass::Vowel,
                        manner: Manner::Other,
                    }
                } else {
                    let j = i - self.n_vowels;
                    VocabEntry {
                        label: format!("C{j:02}"),
                        class: PhoneClass::Consonant,
                        manner: manners[j % 3],
                    }
                }
            })
            .collect();
        PhonemeVocab::new(entries).expect("generated labels are unique")
    }
}

/// Orthonormal vectors from Gaussian draws, modified Gram–Schmidt twice.
fn orthonormal_basis(rng: &mut SeededRng, dims: usize, count: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v: Vec<f64> = (0..dims).map(|_| rng.normal()).collect();
        for _ in 0..2 {
            for b in &basis {
                let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

fn manner_slot(m: Manner) -> Option<usize> {
    match m {
        Manner::Plosive => Some(0),
        Manner::Fricative => Some(1),
        Manner::Nasal => Some(2),
        Manner::Other => None,
    }
}

/// Builds the dataset in memory.
pub fn generate_dataset(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let vocab = spec.vocab();
    let mut rng = SeededRng::new(spec.seed);
    let basis = orthonormal_basis(&mut rng, spec.dims, spec.basis_size());

    let weights = spec
        .label_weights
        .clone()
        .unwrap_or_else(|| vec![1.0; spec.n_phonemes]);
    let cumulative: Vec<f64> = weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();

    let n = spec.n_phonemes;
    let period_s = spec.frame_period_ms / 1000.0;
    let mut utterances = Vec::with_capacity(spec.n_utterances);
    for u in 0..spec.n_utterances {
        let id = format!("utt{u:04}");
        let speaker = format!("spk{:02}", u % spec.n_speakers);

        // (label, onset frame, duration, word index)
        let mut phones: Vec<(usize, usize, usize, u32)> = Vec::with_capacity(spec.phones_per_utterance);
        let mut frame = spec.edge_frames;
        let mut word = 0u32;
        while phones.len() < spec.phones_per_utterance {
            let word_len = rng.range_inclusive(spec.min_word_len, spec.max_word_len);
            for _ in 0..word_len {
                if phones.len() == spec.phones_per_utterance {
                    break;
                }
                let label = rng.categorical(&cumulative);
                let dur = rng.range_inclusive(spec.min_duration_frames, spec.max_duration_frames);
                phones.push((label, frame, dur, word));
                frame += dur;
            }
            word += 1;
        }
        let total_frames = frame + spec.edge_frames;

        let mut data: Vec<f64> = (0..total_frames * spec.dims)
            .map(|_| spec.noise_sigma * rng.normal())
            .collect();

        let mut tokens: Vec<PhoneToken> = phones
            .iter()
            .map(|&(label, onset, dur, word_index)| PhoneToken {
                utterance_id: id.clone(),
                speaker_id: speaker.clone(),
                label_index: label,
                onset_s: onset as f64 * period_s,
                offset_s: (onset + dur) as f64 * period_s,
                word_index,
                word_position: 0,
            })
            .collect();
        crate::dataset::assign_positions(&mut tokens);

        for (i, &(label, onset, _, _)) in phones.iter().enumerate() {
            let context = match spec.context {
                SynthContext::Position => Some((tokens[i].word_position.min(4) - 1) as usize),
                SynthContext::Manner => {
                    let neighbour = |j: Option<usize>| {
                        j.and_then(|j| phones.get(j))
                            .filter(|p| !vocab.is_vowel(p.0))
                            .and_then(|p| manner_slot(vocab.manner(p.0)))
                    };
                    match (neighbour(i.checked_sub(1)), neighbour(Some(i + 1))) {
                        (Some(a), Some(b)) if vocab.is_vowel(label) => Some(3 * a + b),
                        _ => None,
                    }
                }
            };
            for k in 0..spec.window_len() {
                let f = onset as i64 + spec.signal_window[0] + k as i64;
                if f < 0 || f >= total_frames as i64 {
                    continue;
                }
                let row = &mut data[f as usize * spec.dims..(f as usize + 1) * spec.dims];
                let mut add = |v: &[f64]| row.iter_mut().zip(v).for_each(|(x, p)| *x += p);
                match spec.encoding {
                    EncodingMode::Static => add(&basis[label]),
                    EncodingMode::Rotating => add(&basis[(label + k * n) % basis.len()]),
                    EncodingMode::ContextInvariant => {
                        add(&basis[label]);
                        if let Some(c) = context {
                            add(&basis[n + c]);
                        }
                    }
                    EncodingMode::ContextEntangled => add(&basis[label + context.unwrap_or(0) * n]),
                }
            }
        }

        let features = FeatureMatrix::new(
            Matrix::from_vec(total_frames, spec.dims, data)?,
            spec.frame_period_ms,
        )?;
        utterances.push(Utterance {
            id,
            speaker_id: speaker,
            features,
            tokens,
        });
    }
    Dataset::new(vocab, spec.frame_period_ms, utterances)
}

/// Writes `manifest.json`, `vocab.tsv`, `alignments.tsv` and `features/*.npy`
/// under `dir` and returns the manifest path.
pub fn generate(spec: &SyntheticSpec, dir: &Path) -> Result<std::path::PathBuf> {
    let dataset = generate_dataset(spec)?;
    write_dataset(&dataset, dir)
}

/// Serializes any in-memory dataset in the manifest layout.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<std::path::PathBuf> {
    let features_dir = dir.join("features");
    std::fs::create_dir_all(&features_dir).map_err(|e| Error::io(&features_dir, e))?;

    let vocab_path = dir.join("vocab.tsv");
    std::fs::write(&vocab_path, dataset.vocab().to_tsv()).map_err(|e| Error::io(&vocab_path, e))?;

    let tokens: Vec<PhoneToken> = dataset
        .utterances()
        .iter()
        .flat_map(|u| u.tokens.iter().cloned())
        .collect();
    let align_path = dir.join("alignments.tsv");
    std::fs::write(&align_path, alignment_to_tsv(&tokens, dataset.vocab()))
        .map_err(|e| Error::io(&align_path, e))?;

    let mut features = std::collections::BTreeMap::new();
    for u in dataset.utterances() {
        let rel = format!("features/{}.npy", u.id);
        npy::write_matrix(&dir.join(&rel), u.features.matrix())?;
        features.insert(u.id.clone(), rel);
    }

    let manifest = ManifestFile {
        frame_period_ms: dataset.frame_period_ms(),
        dims: Some(dataset.dims()),
        vocab: Some("vocab.tsv".into()),
        alignments: OneOrMany::One("alignments.tsv".into()),
        features,
        wavs: Default::default(),
        covariates: None,
        kind: FeatureKind::Representation,
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
