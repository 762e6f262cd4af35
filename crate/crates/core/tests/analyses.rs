//! Analyses checked against synthetic datasets whose encoding is known by
//! construction.

use phonoprobe::analyses::{
    cross_context_generalization, decoding_window, effect_correlation, extract_contours, generalization_effect,
    split_contexts, temporal_generalization, ContextMode, ContextSpec, OffsetRange, SplitStrategy, WindowConfig,
};
use phonoprobe::dataset::TokenId;
use phonoprobe::numerics::{label_entropy, majority_baseline};
use phonoprobe::synth::{generate_dataset, EncodingMode, SynthContext, SyntheticSpec};
use std::collections::BTreeSet;

fn static_spec() -> SyntheticSpec {
    SyntheticSpec {
        n_utterances: 40,
        seed: 11,
        ..SyntheticSpec::default()
    }
}

fn window_cfg(lo: i64, hi: i64) -> WindowConfig {
    WindowConfig {
        offsets: OffsetRange::new(lo, hi).unwrap(),
        seed: 5,
        ..WindowConfig::default()
    }
}

#[test]
fn noiseless_static_is_perfect_inside_the_window() {
    let ds = generate_dataset(&SyntheticSpec {
        noise_sigma: 0.0,
        n_phonemes: 2,
        n_vowels: 1,
        dims: 8,
        ..static_spec()
    })
    .unwrap();
    let curve = decoding_window(&ds, &window_cfg(-2, 5)).unwrap();
    for p in &curve.points {
        assert_eq!(p.accuracy, 1.0, "offset {}", p.offset_frames);
    }
}

#[test]
fn window_curve_rises_only_where_the_signal_is() {
    let ds = generate_dataset(&static_spec()).unwrap();
    let curve = decoding_window(&ds, &window_cfg(-12, 15)).unwrap();
    assert_eq!(curve.points.len(), 28);
    for p in &curve.points {
        assert!((0.0..=1.0).contains(&p.accuracy));
        if (-2..=5).contains(&p.offset_frames) {
            assert!(p.accuracy >= 0.95, "offset {}: {}", p.offset_frames, p.accuracy);
        } else if !(-6..=9).contains(&p.offset_frames) {
            assert!(
                (p.accuracy - p.baseline).abs() <= 0.05,
                "offset {}: {} vs {}",
                p.offset_frames,
                p.accuracy,
                p.baseline
            );
        }
        assert_eq!(p.offset_ms, p.offset_frames as f64 * 10.0);
    }
}

#[test]
fn split_is_per_speaker_and_disjoint() {
    let ds = generate_dataset(&static_spec()).unwrap();
    let curve = decoding_window(&ds, &window_cfg(0, 0)).unwrap();
    assert_eq!(curve.split.rule, "per_speaker");
    let train: BTreeSet<_> = curve.split.train.iter().collect();
    assert!(curve.split.test.iter().all(|u| !train.contains(u)));
    assert_eq!(curve.split.train.len() + curve.split.test.len(), 40);
}

#[test]
fn single_speaker_utterances_fall_back_to_utterance_split() {
    let ds = generate_dataset(&SyntheticSpec {
        n_speakers: 40,
        ..static_spec()
    })
    .unwrap();
    let curve = decoding_window(&ds, &window_cfg(0, 0)).unwrap();
    assert_eq!(curve.split.rule, "utterance");
}

#[test]
fn explicit_split_must_be_disjoint() {
    let ds = generate_dataset(&static_spec()).unwrap();
    let cfg = WindowConfig {
        split: SplitStrategy::Explicit {
            train: vec!["utt0000".into(), "utt0001".into()],
            test: vec!["utt0001".into()],
        },
        ..window_cfg(0, 0)
    };
    assert!(decoding_window(&ds, &cfg).is_err());
}

#[test]
fn offsets_beyond_every_utterance_are_reported() {
    let ds = generate_dataset(&static_spec()).unwrap();
    let err = decoding_window(&ds, &window_cfg(10_000, 10_000)).unwrap_err();
    assert!(err.to_string().contains("10000"), "{err}");
}

#[test]
fn tg_diagonal_equals_window_curve() {
    let ds = generate_dataset(&static_spec()).unwrap();
    let mut cfg = window_cfg(-6, 8);
    let tg = temporal_generalization(&ds, &cfg, 1).unwrap();
    cfg.filter.word_position = Some(1);
    let curve = decoding_window(&ds, &cfg).unwrap();
    assert_eq!(tg.diagonal(), curve.accuracies());
}

#[test]
fn tg_stats_reconcile_with_direct_counts() {
    let ds = generate_dataset(&static_spec()).unwrap();
    let tg = temporal_generalization(&ds, &window_cfg(0, 1), 2).unwrap();
    let p2: Vec<TokenId> = ds.select(|t| t.word_position == 2);
    assert_eq!(tg.stats.n_train_tokens + tg.stats.n_test_tokens, p2.len());
    let labels: Vec<usize> = p2.iter().map(|&id| ds.token(id).label_index).collect();
    assert!((tg.stats.entropy_bits - label_entropy(&labels).unwrap()).abs() < 1e-12);
    assert_eq!(tg.stats.class_counts.values().sum::<usize>(), p2.len());
    let mean = p2.iter().map(|&id| ds.token(id).duration_s() * 1000.0).sum::<f64>() / p2.len() as f64;
    assert!((tg.stats.mean_duration_ms - mean).abs() < 1e-9);
}

#[test]
fn static_encoding_generalizes_across_the_window() {
    let ds = generate_dataset(&static_spec()).unwrap();
    let tg = temporal_generalization(&ds, &window_cfg(-2, 5), 1).unwrap();
    for i in 0..8 {
        for j in 0..8 {
            let (a, d) = (tg.accuracy.get(i, j), tg.accuracy.get(j, j));
            assert!((a - d).abs() <= 0.05, "({i},{j}) {a} vs diagonal {d}");
        }
    }
}

#[test]
fn rotating_encoding_stays_on_the_diagonal() {
    let ds = generate_dataset(&SyntheticSpec {
        encoding: EncodingMode::Rotating,
        dims: 39 * 8,
        n_utterances: 150,
        ..static_spec()
    })
    .unwrap();
    let tg = temporal_generalization(&ds, &window_cfg(-2, 5), 1).unwrap();
    for i in 0..8 {
        assert!(tg.accuracy.get(i, i) >= 0.95);
        for j in 0..8 {
            if i.abs_diff(j) >= 2 {
                let a = tg.accuracy.get(i, j);
                assert!((a - tg.offset_baselines[j]).abs() <= 0.05, "({i},{j}) {a}");
            }
        }
    }
}

#[test]
fn contours_surround_the_square_region() {
    let ds = generate_dataset(&static_spec()).unwrap();
    let tg = temporal_generalization(&ds, &window_cfg(-8, 10), 1).unwrap();
    let lines = extract_contours(&tg, 0.4).unwrap();
    assert!(!lines.is_empty());
    for line in &lines {
        for &(tr, te) in &line.points {
            assert!((-80.0..=100.0).contains(&tr) && (-80.0..=100.0).contains(&te));
        }
    }
    assert!(extract_contours(&tg, 1.5).is_err());
}

// ---------------------------------------------------------------------------
// Cross-context
// ---------------------------------------------------------------------------

fn context_spec(seed: u64) -> ContextSpec {
    ContextSpec {
        subsample_n: 1500,
        seed,
        ..ContextSpec::default()
    }
}

fn context_data(encoding: EncodingMode, seed: u64) -> phonoprobe::dataset::Dataset {
    generate_dataset(&SyntheticSpec {
        encoding,
        context: SynthContext::Position,
        n_phonemes: 20,
        n_vowels: 8,
        dims: 80,
        min_word_len: 4,
        max_word_len: 4,
        n_utterances: 400,
        seed,
        ..SyntheticSpec::default()
    })
    .unwrap()
}

#[test]
fn position_contexts_are_p1_to_p4() {
    let ds = context_data(EncodingMode::Static, 1);
    let groups = split_contexts(&ds, &context_spec(0)).unwrap();
    let keys: Vec<_> = groups.contexts.keys().cloned().collect();
    assert_eq!(keys, ["p1", "p2", "p3", "p4"]);
    for (ctx, ids) in &groups.contexts {
        for &id in ids {
            let t = ds.token(id);
            assert!(ds.vocab().is_vowel(t.label_index));
            assert_eq!(format!("p{}", t.word_position), *ctx);
        }
    }
}

#[test]
fn small_contexts_are_dropped_and_reported() {
    // Words of 1..5 phones make p4 the rarest position.
    let ds = generate_dataset(&SyntheticSpec {
        n_utterances: 300,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let spec = ContextSpec {
        min_class_size: Some(100_000),
        ..context_spec(0)
    };
    assert!(split_contexts(&ds, &spec).is_err());
    let all = ContextSpec {
        subsample_n: 2,
        ..context_spec(0)
    };
    let p4 = split_contexts(&ds, &all).unwrap().contexts["p4"].len();
    let spec = ContextSpec {
        subsample_n: p4 + 1,
        ..context_spec(0)
    };
    let groups = split_contexts(&ds, &spec).unwrap();
    assert!(!groups.contexts.contains_key("p4"));
    assert_eq!(groups.dropped.len(), 1);
    assert_eq!(groups.dropped[0].context, "p4");
    assert_eq!(groups.dropped[0].tokens, p4);
}

#[test]
fn subsampling_is_exact_disjoint_and_seeded() {
    let ds = context_data(EncodingMode::ContextInvariant, 2);
    let spec = context_spec(9);
    let a = cross_context_generalization(&ds, &spec, OffsetRange::new(0, 1).unwrap()).unwrap();
    let b = cross_context_generalization(&ds, &spec, OffsetRange::new(0, 1).unwrap()).unwrap();
    assert_eq!(a, b);
    for part in a.partitions.values() {
        assert_eq!(part.train.len() + part.test.len(), 1500);
        assert_eq!(part.train.len(), 1200);
        let train: BTreeSet<_> = part.train.iter().collect();
        assert!(part.test.iter().all(|t| !train.contains(t)));
    }
    for hist in a.class_histograms.values() {
        assert_eq!(hist.values().sum::<usize>(), 1500);
    }
    let c = cross_context_generalization(&ds, &context_spec(10), OffsetRange::new(0, 1).unwrap()).unwrap();
    assert_ne!(a.partitions, c.partitions);
}

#[test]
fn baseline_is_train_majority_scored_on_test_context() {
    let ds = context_data(EncodingMode::ContextInvariant, 2);
    let r = cross_context_generalization(&ds, &context_spec(3), OffsetRange::new(0, 0).unwrap()).unwrap();
    let labels = |ids: &[TokenId]| ids.iter().map(|&id| ds.token(id).label_index).collect::<Vec<_>>();
    let (_, expected) =
        majority_baseline(&labels(&r.partitions["p1"].train), &labels(&r.partitions["p3"].test)).unwrap();
    assert_eq!(r.pair("p1", "p3").unwrap().baseline[0], expected);
}

#[test]
fn invariant_encoding_transfers_and_entangled_does_not() {
    let offsets = OffsetRange::new(-4, 12).unwrap();
    let window = (0.0, 100.0);
    let inv = cross_context_generalization(&context_data(EncodingMode::ContextInvariant, 3), &context_spec(1), offsets)
        .unwrap();
    let ent = cross_context_generalization(&context_data(EncodingMode::ContextEntangled, 3), &context_spec(1), offsets)
        .unwrap();
    for train in &inv.contexts {
        for test in &inv.contexts {
            let e_inv = generalization_effect(&inv, train, test, window).unwrap();
            let e_ent = generalization_effect(&ent, train, test, window).unwrap();
            if train != test {
                assert!(e_inv > 0.2, "{train}->{test} invariant effect {e_inv}");
                assert!(e_ent.abs() <= 0.05, "{train}->{test} entangled effect {e_ent}");
                let within = inv.pair(test, test).unwrap();
                let across = inv.pair(train, test).unwrap();
                // Pointwise comparison where the label is encoded; elsewhere both
                // curves are independent estimates of chance.
                for (i, ms) in inv.offsets_ms.iter().enumerate() {
                    if (-20.0..=50.0).contains(ms) {
                        let (a, w) = (across.accuracy[i], within.accuracy[i]);
                        assert!((a - w).abs() <= 0.05, "{train}->{test} at {ms} ms: {a} vs {w}");
                    }
                }
            } else {
                assert!(e_ent > 0.2, "{train} within-context effect {e_ent}");
            }
        }
    }
    let corr = effect_correlation(&inv, &inv, window).unwrap();
    assert_eq!(corr.pairs.len(), 12);
    assert!((corr.r - 1.0).abs() < 1e-12);
}

#[test]
fn manner_pair_contexts_follow_neighbours() {
    let ds = generate_dataset(&SyntheticSpec {
        encoding: EncodingMode::ContextInvariant,
        context: SynthContext::Manner,
        n_utterances: 100,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let spec = ContextSpec {
        mode: ContextMode::MannerPair,
        subsample_n: 20,
        ..ContextSpec::default()
    };
    let groups = split_contexts(&ds, &spec).unwrap();
    assert!(groups.contexts.len() + groups.dropped.len() <= 9);
    for (ctx, ids) in &groups.contexts {
        for &id in ids {
            let (prev, next) = ds.neighbors(id);
            let m = |x: Option<TokenId>| ds.vocab().manner(ds.token(x.unwrap()).label_index).to_string();
            assert_eq!(format!("{}__{}", m(prev), m(next)), *ctx);
        }
    }
}

#[test]
fn correlation_needs_matching_contexts() {
    let ds = context_data(EncodingMode::ContextInvariant, 4);
    let offsets = OffsetRange::new(0, 2).unwrap();
    let a = cross_context_generalization(&ds, &context_spec(1), offsets).unwrap();
    let mut b = a.clone();
    b.contexts.pop();
    assert!(effect_correlation(&a, &b, (0.0, 20.0)).is_err());
}
