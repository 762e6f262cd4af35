use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// How utterances are divided into decoder training and test sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitStrategy {
    /// Per speaker when every speaker id is set and each speaker has at least
    /// two utterances; otherwise across utterances.
    Auto { train_fraction: f64 },
    PerSpeaker { train_fraction: f64 },
    Utterance { train_fraction: f64 },
    Explicit { train: Vec<String>, test: Vec<String> },
}

impl Default for SplitStrategy {
    fn default() -> Self {
        SplitStrategy::Auto { train_fraction: 0.5 }
    }
}

/// Utterance indices of the training and test sets, each ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Which rule produced the split ("per_speaker", "utterance", "explicit").
    pub rule: String,
}

fn n_train(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n - 1)
}

fn check_fraction(f: f64) -> Result<()> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::Config(format!("train fraction must be in (0, 1), got {f}")));
    }
    Ok(())
}

pub fn split_utterances(dataset: &Dataset, strategy: &SplitStrategy, seed: u64) -> Result<UtteranceSplit> {
    let utts = dataset.utterances();
    let mut rng = SeededRng::new(seed);
    let by_speaker = || {
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, u) in utts.iter().enumerate() {
            groups.entry(u.speaker_id.as_str()).or_default().push(i);
        }
        groups
    };

    let per_speaker = |rng: &mut SeededRng, fraction: f64| -> Result<UtteranceSplit> {
        check_fraction(fraction)?;
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (_, mut group) in by_speaker() {
            rng.shuffle(&mut group);
            let k = if group.len() >= 2 { n_train(group.len(), fraction) } else { group.len() };
            train.extend_from_slice(&group[..k]);
            test.extend_from_slice(&group[k..]);
        }
        Ok(UtteranceSplit {
            train,
            test,
            rule: "per_speaker".into(),
        })
    };
    let across = |rng: &mut SeededRng, fraction: f64| -> Result<UtteranceSplit> {
        check_fraction(fraction)?;
        if utts.len() < 2 {
            return Err(Error::Config("a train/test split needs at least 2 utterances".into()));
        }
        let mut all: Vec<usize> = (0..utts.len()).collect();
        rng.shuffle(&mut all);
        let k = n_train(all.len(), fraction);
        Ok(UtteranceSplit {
            train: all[..k].to_vec(),
            test: all[k..].to_vec(),
            rule: "utterance".into(),
        })
    };

    let mut split = match strategy {
        SplitStrategy::Auto { train_fraction } => {
            let groups = by_speaker();
            let usable = !groups.contains_key("") && groups.values().all(|g| g.len() >= 2);
            if usable {
                per_speaker(&mut rng, *train_fraction)?
            } else {
                across(&mut rng, *train_fraction)?
            }
        }
        SplitStrategy::PerSpeaker { train_fraction } => per_speaker(&mut rng, *train_fraction)?,
        SplitStrategy::Utterance { train_fraction } => across(&mut rng, *train_fraction)?,
        SplitStrategy::Explicit { train, test } => {
            let index: BTreeMap<&str, usize> =
                utts.iter().enumerate().map(|(i, u)| (u.id.as_str(), i)).collect();
            let lookup = |ids: &[String]| -> Result<Vec<usize>> {
                ids.iter()
                    .map(|id| {
                        index.get(id.as_str()).copied().ok_or_else(|| {
                            Error::Config(format!("split names unknown utterance {id:?}"))
                        })
                    })
                    .collect()
            };
            let (tr, te) = (lookup(train)?, lookup(test)?);
            let tr_set: BTreeSet<usize> = tr.iter().copied().collect();
            if let Some(dup) = te.iter().find(|i| tr_set.contains(i)) {
                return Err(Error::Config(format!(
                    "utterance {:?} is in both train and test",
                    utts[*dup].id
                )));
            }
            UtteranceSplit {
                train: tr,
                test: te,
                rule: "explicit".into(),
            }
        }
    };
    split.train.sort_unstable();
    split.train.dedup();
    split.test.sort_unstable();
    split.test.dedup();
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::Config("train/test split left one side empty".into()));
    }
    Ok(split)
}
