//! JSON dataset manifest.
//!
//! ```json
//! {
//!   "frame_period_ms": 10,
//!   "dims": 512,
//!   "vocab": "vocab.tsv",
//!   "alignments": "alignments.tsv",
//!   "features": { "utt1": "features/utt1.npy" }
//! }
//! ```
//!
//! `alignments` may also be a list of paths. Optional keys: `wavs` (utterance
//! id → WAV path, consumed by logmel extraction), `covariates` (per-frame
//! amplitude/pitch TSV) and `kind` (`"representation"` or `"logmel"`).
//! Relative paths resolve against the manifest's directory; a missing
//! `vocab` selects the bundled ARPAbet table.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::alignment::{parse_alignment, PhoneToken};
use super::npy;
use super::vocab::PhonemeVocab;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    #[default]
    Representation,
    Logmel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn to_vec(&self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// On-disk manifest layout, with paths as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub frame_period_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab: Option<String>,
    pub alignments: OneOrMany,
    #[serde(default)]
    pub features: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub wavs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariates: Option<String>,
    #[serde(default)]
    pub kind: FeatureKind,
}

impl ManifestFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// A manifest with every path resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub source: Option<PathBuf>,
    pub frame_period_ms: f64,
    pub dims: Option<usize>,
    pub vocab: Option<PathBuf>,
    pub alignments: Vec<PathBuf>,
    pub features: BTreeMap<String, PathBuf>,
    pub wavs: BTreeMap<String, PathBuf>,
    pub covariates: Option<PathBuf>,
    pub kind: FeatureKind,
}

impl DatasetManifest {
    /// Parses manifest JSON and resolves paths against `base_dir`. No file is touched.
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: ManifestFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                Error::Manifest(inner.to_string())
            } else {
                Error::Manifest(format!("{path:?}: {inner}"))
            }
        })?;
        if !(raw.frame_period_ms > 0.0 && raw.frame_period_ms.is_finite()) {
            return Err(Error::Manifest(format!(
                "\"frame_period_ms\" must be positive, got {}",
                raw.frame_period_ms
            )));
        }
        if raw.dims == Some(0) {
            return Err(Error::Manifest("\"dims\" must be positive".into()));
        }
        let alignments = raw.alignments.to_vec();
        if alignments.is_empty() {
            return Err(Error::Manifest("\"alignments\" lists no files".into()));
        }
        let resolve = |p: &String| base_dir.join(p);
        Ok(DatasetManifest {
            source: None,
            frame_period_ms: raw.frame_period_ms,
            dims: raw.dims,
            vocab: raw.vocab.as_ref().map(resolve),
            alignments: alignments.iter().map(resolve).collect(),
            features: raw.features.iter().map(|(k, v)| (k.clone(), resolve(v))).collect(),
            wavs: raw.wavs.iter().map(|(k, v)| (k.clone(), resolve(v))).collect(),
            covariates: raw.covariates.as_ref().map(resolve),
            kind: raw.kind,
        })
    }

    /// Reads and resolves a manifest file without validating its references.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut m = Self::from_json_str(&text, base)?;
        m.source = Some(path.to_path_buf());
        Ok(m)
    }

    pub fn load_vocab(&self) -> Result<PhonemeVocab> {
        match &self.vocab {
            Some(p) => PhonemeVocab::load(p),
            None => Ok(PhonemeVocab::default_arpabet()),
        }
    }

    pub fn load_tokens(&self, vocab: &PhonemeVocab) -> Result<Vec<PhoneToken>> {
        let mut tokens = Vec::new();
        for path in &self.alignments {
            tokens.extend(parse_alignment(path, vocab)?);
        }
        Ok(tokens)
    }

    /// Utterance ids referenced by alignment rows, ascending.
    pub fn referenced_utterances(tokens: &[PhoneToken]) -> BTreeSet<&str> {
        tokens.iter().map(|t| t.utterance_id.as_str()).collect()
    }

    pub fn declared_dims(&self) -> Result<usize> {
        self.dims
            .ok_or_else(|| Error::Manifest("missing field \"dims\"".into()))
    }

    fn check_exists(&self) -> Result<()> {
        let mut paths: Vec<(&str, &Path)> = Vec::new();
        if let Some(v) = &self.vocab {
            paths.push(("vocab", v));
        }
        for a in &self.alignments {
            paths.push(("alignments", a));
        }
        if let Some(c) = &self.covariates {
            paths.push(("covariates", c));
        }
        for (k, p) in &self.features {
            paths.push((k, p));
        }
        for (k, p) in &self.wavs {
            paths.push((k, p));
        }
        for (key, p) in paths {
            if !p.exists() {
                return Err(Error::Manifest(format!(
                    "{key:?}: file {} does not exist",
                    p.display()
                )));
            }
        }
        Ok(())
    }
}

/// Reads a feature manifest and validates it: referenced files exist, every
/// aligned utterance has a feature entry and every feature file has the
/// declared number of columns.
pub fn parse_manifest(path: &Path) -> Result<DatasetManifest> {
    let manifest = DatasetManifest::read(path)?;
    manifest.check_exists()?;
    let dims = manifest.declared_dims()?;
    let vocab = manifest.load_vocab()?;
    let tokens = manifest.load_tokens(&vocab)?;
    for utt in DatasetManifest::referenced_utterances(&tokens) {
        if !manifest.features.contains_key(utt) {
            return Err(Error::DanglingUtterance(utt.to_string()));
        }
    }
    for (utt, p) in &manifest.features {
        let shape = npy::read_shape(p)?;
        if shape.len() != 2 {
            return Err(Error::Npy(format!(
                "{}: expected a 2-D array, found shape {shape:?}",
                p.display()
            )));
        }
        if shape[1] != dims {
            return Err(Error::DimensionMismatch {
                context: format!("features of {utt:?}"),
                expected: dims,
                found: shape[1],
            });
        }
    }
    Ok(manifest)
}

/// Like [`parse_manifest`] but for audio input: every aligned utterance needs a WAV.
pub fn parse_audio_manifest(path: &Path) -> Result<DatasetManifest> {
    let manifest = DatasetManifest::read(path)?;
    manifest.check_exists()?;
    let vocab = manifest.load_vocab()?;
    let tokens = manifest.load_tokens(&vocab)?;
    if manifest.wavs.is_empty() {
        return Err(Error::Manifest("\"wavs\" lists no audio files".into()));
    }
    for utt in DatasetManifest::referenced_utterances(&tokens) {
        if !manifest.wavs.contains_key(utt) {
            return Err(Error::DanglingUtterance(utt.to_string()));
        }
    }
    Ok(manifest)
}
