use std::collections::BTreeMap;

use crate::{Error, Result};

/// Most frequent label (lowest index on ties) and its accuracy on `test`.
pub fn majority_baseline(train: &[usize], test: &[usize]) -> Result<(usize, f64)> {
    let majority = majority_label(train)
        .ok_or_else(|| Error::EmptySamples("majority baseline on an empty training set".into()))?;
    if test.is_empty() {
        return Err(Error::EmptySamples(
            "majority baseline on an empty test set".into(),
        ));
    }
    let hits = test.iter().filter(|&&l| l == majority).count();
    Ok((majority, hits as f64 / test.len() as f64))
}

pub fn majority_label(labels: &[usize]) -> Option<usize> {
    let counts = label_counts(labels);
    let mut best: Option<(usize, usize)> = None;
    // BTreeMap iterates in ascending label order, so strict > keeps the lowest on ties
    for (label, count) in counts {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((label, count));
        }
    }
    best.map(|(l, _)| l)
}

pub fn label_counts(labels: &[usize]) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    counts
}
