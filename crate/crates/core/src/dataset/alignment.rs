//! Phone alignment TSV: `utterance_id, speaker_id, phoneme_label, onset_s, offset_s, word_index`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::vocab::PhonemeVocab;
use crate::{Error, Result};

/// Slack allowed when comparing one token's offset with the next onset.
const OVERLAP_TOLERANCE_S: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhoneToken {
    pub utterance_id: String,
    pub speaker_id: String,
    pub label_index: usize,
    pub onset_s: f64,
    pub offset_s: f64,
    pub word_index: u32,
    /// 1-based position of the phone within its word.
    pub word_position: u32,
}

impl PhoneToken {
    pub fn duration_s(&self) -> f64 {
        self.offset_s - self.onset_s
    }
}

pub fn parse_alignment(path: &Path, vocab: &PhonemeVocab) -> Result<Vec<PhoneToken>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_alignment_str(&text, vocab)
}

/// Parses alignment rows, groups them by utterance (ascending id), sorts each
/// utterance by onset and assigns word positions.
pub fn parse_alignment_str(text: &str, vocab: &PhonemeVocab) -> Result<Vec<PhoneToken>> {
    let mut by_utt: BTreeMap<String, Vec<PhoneToken>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Alignment {
            line: lineno,
            message,
        };
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 6 {
            return Err(err(format!("expected 6 columns, found {}", cols.len())));
        }
        if cols[0].is_empty() {
            return Err(err("empty utterance id".into()));
        }
        let label_index = vocab.index_of(cols[2]).ok_or_else(|| Error::UnknownLabel {
            line: lineno,
            label: cols[2].to_string(),
        })?;
        let seconds = |s: &str, name: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(err(format!("{name} {s:?} is not a finite number"))),
            }
        };
        let onset_s = seconds(cols[3], "onset")?;
        let offset_s = seconds(cols[4], "offset")?;
        if onset_s < 0.0 {
            return Err(err(format!("negative onset {onset_s}")));
        }
        if onset_s >= offset_s {
            return Err(err(format!("onset {onset_s} is not before offset {offset_s}")));
        }
        let word_index = cols[5]
            .parse::<u32>()
            .map_err(|_| err(format!("word index {:?} is not a non-negative integer", cols[5])))?;

        by_utt.entry(cols[0].to_string()).or_default().push(PhoneToken {
            utterance_id: cols[0].to_string(),
            speaker_id: cols[1].to_string(),
            label_index,
            onset_s,
            offset_s,
            word_index,
            word_position: 0,
        });
    }

    let mut out = Vec::new();
    for (utt, mut tokens) in by_utt {
        tokens.sort_by(|a, b| a.onset_s.total_cmp(&b.onset_s));
        check_non_overlapping(&utt, &tokens)?;
        assign_word_positions(&mut tokens);
        out.extend(tokens);
    }
    Ok(out)
}

pub(crate) fn check_non_overlapping(utt: &str, tokens: &[PhoneToken]) -> Result<()> {
    for pair in tokens.windows(2) {
        if pair[0].offset_s > pair[1].onset_s + OVERLAP_TOLERANCE_S {
            return Err(Error::OverlappingTokens {
                utterance: utt.to_string(),
                onset_s: pair[1].onset_s,
            });
        }
    }
    Ok(())
}

/// Consecutive tokens sharing a word index form one word, numbered 1..k.
pub(crate) fn assign_word_positions(tokens: &mut [PhoneToken]) {
    let mut prev_word: Option<u32> = None;
    let mut position = 0;
    for t in tokens {
        position = if prev_word == Some(t.word_index) {
            position + 1
        } else {
            1
        };
        prev_word = Some(t.word_index);
        t.word_position = position;
    }
}

/// Serializes tokens back into alignment rows. Seconds use the shortest
/// representation that round-trips.
pub fn alignment_to_tsv(tokens: &[PhoneToken], vocab: &PhonemeVocab) -> String {
    let mut out = String::new();
    for t in tokens {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            t.utterance_id,
            t.speaker_id,
            vocab.label(t.label_index),
            t.onset_s,
            t.offset_s,
            t.word_index
        ));
    }
    out
}
