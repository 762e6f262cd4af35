//! Subcommand implementations. Each one validates its inputs, runs one
//! analysis and writes stamped CSV/JSON results into `--out`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use phonoprobe::acoustic::{covariates_to_tsv, extract_all, read_covariates, read_wav, LogmelConfig};
use phonoprobe::analyses::{
    cross_context_generalization, decoding_window, effect_correlation, extract_contours, generalization_effect,
    regress_out, temporal_generalization, ContextSpec, GeneralizationReport, SplitStrategy,
    UtteranceSplit, WindowConfig,
};
use phonoprobe::dataset::{
    parse_audio_manifest, parse_manifest, Dataset, DatasetManifest, FeatureKind, ManifestFile, PhoneToken, TokenFilter,
    TokenId, Utterance,
};
use phonoprobe::numerics::{label_counts, label_entropy};
use phonoprobe::synth::{generate, write_dataset, SyntheticSpec};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{
    ContextArgs, CorrelateArgs, DataArgs, LogmelArgs, PlotArgs, PlotKind, PreprocessArgs, SynthArgs, TgArgs, Toggle,
    ValidateArgs, WindowArgs,
};
use crate::error::{CliError, Result};
use crate::output::{create_dir, read_csv, read_json, read_text, write_csv, write_summary, write_text, RunConfig, Stamp};
use crate::plot;
use crate::records::{ContextRow, ContourRow, EffectPairRow, EffectRow, TgRow, WindowRow};

/// Contour levels written by `tg`: chance-adjacent and well above chance.
pub const CONTOUR_THRESHOLDS: [f64; 2] = [0.2, 0.4];

// ---------------------------------------------------------------------------
// Shared loading
// ---------------------------------------------------------------------------

struct Loaded {
    dataset: Dataset,
    preprocess: Value,
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

/// Loads a feature dataset, regressing covariates out when requested (or by
/// default for representation manifests that list covariates).
fn load_data(args: &DataArgs) -> Result<Loaded> {
    if !(args.alpha > 0.0 && args.alpha.is_finite()) {
        return Err(CliError::Usage(format!("--alpha must be positive, got {}", args.alpha)));
    }
    let manifest = parse_manifest(&args.manifest)?;
    let dataset = Dataset::load(&manifest)?;
    let apply = match args.preprocess {
        Some(Toggle::On) => true,
        Some(Toggle::Off) => false,
        None => manifest.kind == FeatureKind::Representation && manifest.covariates.is_some(),
    };
    if !apply {
        return Ok(Loaded {
            dataset,
            preprocess: json!({ "applied": false }),
        });
    }
    let path = manifest.covariates.as_ref().ok_or_else(|| {
        CliError::Usage("--preprocess on needs a manifest with a \"covariates\" entry".into())
    })?;
    let covariates = read_covariates(path)?;
    let (dataset, projector) = regress_out(&dataset, &covariates, args.alpha)?;
    Ok(Loaded {
        dataset,
        preprocess: json!({ "applied": true, "directions_removed": projector.directions().len() }),
    })
}

fn data_settings(config: RunConfig, args: &DataArgs) -> RunConfig {
    let preprocess = args.preprocess.map(|t| if t == Toggle::On { "on" } else { "off" });
    config
        .set("manifest", display(&args.manifest))
        .set("alpha", args.alpha)
        .set("preprocess", preprocess.unwrap_or("auto"))
}

fn dataset_counts(ds: &Dataset) -> Value {
    let speakers: std::collections::BTreeSet<&str> = ds.utterances().iter().map(|u| u.speaker_id.as_str()).collect();
    json!({
        "utterances": ds.utterances().len(),
        "speakers": speakers.len(),
        "tokens": ds.token_count(),
        "frames": ds.frame_count(),
        "dims": ds.dims(),
        "frame_period_ms": ds.frame_period_ms(),
    })
}

/// Label histogram, entropy and mean duration of a token selection.
fn selection_stats(ds: &Dataset, ids: &[TokenId]) -> Result<Value> {
    let labels: Vec<usize> = ids.iter().map(|&id| ds.token(id).label_index).collect();
    let counts: BTreeMap<String, usize> = label_counts(&labels)
        .into_iter()
        .map(|(l, c)| (ds.vocab().label(l).to_string(), c))
        .collect();
    let entropy = if labels.is_empty() { None } else { Some(label_entropy(&labels)?) };
    Ok(json!({
        "tokens": ids.len(),
        "label_entropy_bits": entropy,
        "mean_phone_duration_ms": ds.mean_duration_ms(ids),
        "class_counts": counts,
    }))
}

fn split_summary(ds: &Dataset, split: &UtteranceSplit) -> Value {
    let ids = |idx: &[usize]| -> Vec<String> { idx.iter().map(|&i| ds.utterances()[i].id.clone()).collect() };
    let note = match split.rule.as_str() {
        "per_speaker" => "each speaker's utterances are divided between train and test; no utterance is on both sides",
        "utterance" => "utterances are divided without regard to speaker; the same speaker may appear on both sides",
        _ => "train and test utterances were listed explicitly",
    };
    json!({
        "rule": split.rule,
        "note": note,
        "train_utterances": ids(&split.train),
        "test_utterances": ids(&split.test),
    })
}

fn out_file(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

pub fn validate(args: &ValidateArgs) -> Result<()> {
    let manifest = parse_manifest(&args.manifest)?;
    let ds = Dataset::load(&manifest)?;
    println!(
        "utterances={} tokens={} frames={} dims={}",
        ds.utterances().len(),
        ds.token_count(),
        ds.frame_count(),
        ds.dims()
    );
    if let Some(out) = &args.out {
        create_dir(out)?;
        let config = RunConfig::new("validate", args.common.seed).set("manifest", display(&args.manifest));
        let all: Vec<TokenId> = ds.token_ids().collect();
        let mut positions: BTreeMap<u32, usize> = BTreeMap::new();
        for &id in &all {
            *positions.entry(ds.token(id).word_position).or_default() += 1;
        }
        write_summary(
            &out_file(out, "summary.json"),
            &config,
            json!({
                "counts": dataset_counts(&ds),
                "kind": manifest.kind,
                "tokens": selection_stats(&ds, &all)?,
                "word_positions": positions,
            }),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// logmel
// ---------------------------------------------------------------------------

fn group_tokens(tokens: Vec<PhoneToken>) -> BTreeMap<String, Vec<PhoneToken>> {
    let mut by_utt: BTreeMap<String, Vec<PhoneToken>> = BTreeMap::new();
    for t in tokens {
        by_utt.entry(t.utterance_id.clone()).or_default().push(t);
    }
    by_utt
}

/// Rewrites the manifest `write_dataset` produced with extra fields.
fn patch_manifest(path: &Path, edit: impl FnOnce(&mut ManifestFile)) -> Result<()> {
    let mut file: ManifestFile =
        serde_json::from_str(&read_text(path)?).map_err(|e| CliError::input(path, e))?;
    edit(&mut file);
    write_text(path, &file.to_json())
}

pub fn logmel(args: &LogmelArgs) -> Result<()> {
    let manifest: DatasetManifest = parse_audio_manifest(&args.manifest)?;
    let vocab = manifest.load_vocab()?;
    let mut by_utt = group_tokens(manifest.load_tokens(&vocab)?);
    let wavs: Vec<(&String, &PathBuf)> = manifest.wavs.iter().collect();
    let extracted = wavs
        .par_iter()
        .map(|(_, path)| {
            let wave = read_wav(path)?;
            let cfg = LogmelConfig {
                hop_ms: manifest.frame_period_ms,
                ..LogmelConfig::new(wave.sample_rate_hz)
            };
            let (features, covariates) = extract_all(&wave, &cfg)?;
            Ok((features, covariates, wave.sample_rate_hz))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut utterances = Vec::with_capacity(wavs.len());
    let mut covariates = BTreeMap::new();
    let mut rates = std::collections::BTreeSet::new();
    for ((id, _), (features, cov, rate)) in wavs.iter().zip(extracted) {
        let tokens = by_utt.remove(id.as_str()).unwrap_or_default();
        let speaker_id = tokens.first().map(|t| t.speaker_id.clone()).unwrap_or_default();
        rates.insert(rate);
        covariates.insert((*id).clone(), cov);
        utterances.push(Utterance {
            id: (*id).clone(),
            speaker_id,
            features,
            tokens,
        });
    }
    let ds = Dataset::new(vocab, manifest.frame_period_ms, utterances)?;

    create_dir(&args.out)?;
    let manifest_path = write_dataset(&ds, &args.out)?;
    write_text(&out_file(&args.out, "covariates.tsv"), &covariates_to_tsv(&covariates))?;
    patch_manifest(&manifest_path, |m| {
        m.kind = FeatureKind::Logmel;
        m.covariates = Some("covariates.tsv".into());
    })?;
    let config = RunConfig::new("logmel", args.common.seed)
        .set("manifest", display(&args.manifest))
        .set("frame_period_ms", manifest.frame_period_ms);
    let all: Vec<TokenId> = ds.token_ids().collect();
    write_summary(
        &out_file(&args.out, "summary.json"),
        &config,
        json!({
            "counts": dataset_counts(&ds),
            "sample_rates_hz": rates,
            "logmel": LogmelConfig { hop_ms: manifest.frame_period_ms, ..LogmelConfig::new(rates.iter().next().copied().unwrap_or(16_000)) },
            "tokens": selection_stats(&ds, &all)?,
        }),
    )
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

pub fn preprocess(args: &PreprocessArgs) -> Result<()> {
    if !(args.alpha > 0.0 && args.alpha.is_finite()) {
        return Err(CliError::Usage(format!("--alpha must be positive, got {}", args.alpha)));
    }
    let manifest = parse_manifest(&args.manifest)?;
    let path = manifest
        .covariates
        .as_ref()
        .ok_or_else(|| CliError::Usage("preprocess needs a manifest with a \"covariates\" entry".into()))?;
    let covariates = read_covariates(path)?;
    let ds = Dataset::load(&manifest)?;
    let (projected, projector) = regress_out(&ds, &covariates, args.alpha)?;
    create_dir(&args.out)?;
    let manifest_path = write_dataset(&projected, &args.out)?;
    let kind = manifest.kind;
    patch_manifest(&manifest_path, |m| m.kind = kind)?;
    let config = RunConfig::new("preprocess", args.common.seed)
        .set("manifest", display(&args.manifest))
        .set("alpha", args.alpha);
    write_summary(
        &out_file(&args.out, "summary.json"),
        &config,
        json!({
            "counts": dataset_counts(&projected),
            "directions_removed": projector.directions().len(),
            "feature_mean": projector.feature_mean(),
        }),
    )
}

// ---------------------------------------------------------------------------
// window
// ---------------------------------------------------------------------------

pub fn window(args: &WindowArgs) -> Result<()> {
    let loaded = load_data(&args.data)?;
    let ds = &loaded.dataset;
    let filter = TokenFilter {
        vowels_only: args.vowels_only,
        word_position: args.position,
    };
    let cfg = WindowConfig {
        offsets: args.offsets,
        split: SplitStrategy::default(),
        alpha: args.data.alpha,
        filter: filter.clone(),
        seed: args.common.seed,
    };
    let curve = decoding_window(ds, &cfg)?;
    let config = data_settings(RunConfig::new("window", args.common.seed), &args.data)
        .set("offsets", args.offsets.to_string())
        .set("filter", &filter)
        .set("split", &cfg.split);

    create_dir(&args.out)?;
    let rows: Vec<WindowRow> = curve.points.iter().map(WindowRow::from).collect();
    write_csv(&out_file(&args.out, "decoding_window.csv"), &config.stamp(), &rows)?;
    let selected = ds.select(|t| filter.matches(t, ds.vocab()));
    let stats = selection_stats(ds, &selected)?;
    write_summary(
        &out_file(&args.out, "summary.json"),
        &config,
        json!({
            "counts": dataset_counts(ds),
            "selection": stats,
            "split": split_summary(ds, &curve.split),
            "preprocess": loaded.preprocess,
            "peak": curve.points.iter().max_by(|a, b| a.accuracy.total_cmp(&b.accuracy)).map(|p| json!({
                "offset_ms": p.offset_ms,
                "accuracy": p.accuracy,
            })),
        }),
    )
}

// ---------------------------------------------------------------------------
// tg
// ---------------------------------------------------------------------------

pub fn tg(args: &TgArgs) -> Result<()> {
    let loaded = load_data(&args.data)?;
    let ds = &loaded.dataset;
    let cfg = WindowConfig {
        offsets: args.offsets,
        split: SplitStrategy::default(),
        alpha: args.data.alpha,
        filter: TokenFilter {
            vowels_only: args.vowels_only,
            word_position: None,
        },
        seed: args.common.seed,
    };
    let config = data_settings(RunConfig::new("tg", args.common.seed), &args.data)
        .set("offsets", args.offsets.to_string())
        .set("positions", args.positions.to_string())
        .set("vowels_only", args.vowels_only)
        .set("contour_thresholds", CONTOUR_THRESHOLDS);

    let mut matrix_rows = Vec::new();
    let mut contour_rows = Vec::new();
    let mut positions = serde_json::Map::new();
    let mut shift_ms = 0.0;
    for &p in &args.positions.0 {
        let m = temporal_generalization(ds, &cfg, p)?;
        for i in 0..m.offsets.len() {
            for j in 0..m.offsets.len() {
                matrix_rows.push(TgRow {
                    position: p,
                    train_offset_ms: m.offset_ms(i),
                    test_offset_ms: m.offset_ms(j),
                    accuracy: m.accuracy.get(i, j),
                    baseline: m.offset_baselines[j],
                });
            }
        }
        let mut n_contours = BTreeMap::new();
        for t in CONTOUR_THRESHOLDS {
            let contours = extract_contours(&m, t)?;
            n_contours.insert(t.to_string(), contours.len());
            for (ci, c) in contours.iter().enumerate() {
                for (vi, &(train_ms, test_ms)) in c.points.iter().enumerate() {
                    contour_rows.push(ContourRow {
                        position: p,
                        threshold: t,
                        contour: ci,
                        closed: c.closed,
                        vertex: vi,
                        train_ms,
                        test_ms,
                        shift_ms,
                    });
                }
            }
        }
        let diag = m.diagonal();
        positions.insert(
            format!("p{p}"),
            json!({
                "stats": m.stats,
                "baseline": m.baseline,
                "shift_ms": shift_ms,
                "contours": n_contours,
                "diagonal_peak": diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            }),
        );
        shift_ms += m.stats.mean_duration_ms;
    }

    create_dir(&args.out)?;
    let stamp = config.stamp();
    write_csv(&out_file(&args.out, "tg_matrix.csv"), &stamp, &matrix_rows)?;
    write_csv(&out_file(&args.out, "contours.csv"), &stamp, &contour_rows)?;
    let split = phonoprobe::analyses::split_utterances(ds, &cfg.split, cfg.seed)?;
    write_summary(
        &out_file(&args.out, "summary.json"),
        &config,
        json!({
            "counts": dataset_counts(ds),
            "positions": positions,
            "split": split_summary(ds, &split),
            "preprocess": loaded.preprocess,
        }),
    )
}

// ---------------------------------------------------------------------------
// context
// ---------------------------------------------------------------------------

fn effect_rows(report: &GeneralizationReport, window: (f64, f64)) -> Result<Vec<EffectRow>> {
    let mut rows = Vec::new();
    for train in &report.contexts {
        for test in &report.contexts {
            rows.push(EffectRow {
                train_context: train.clone(),
                test_context: test.clone(),
                within: train == test,
                effect: generalization_effect(report, train, test, window)?,
            });
        }
    }
    Ok(rows)
}

pub fn context(args: &ContextArgs) -> Result<()> {
    let loaded = load_data(&args.data)?;
    let ds = &loaded.dataset;
    let spec = ContextSpec {
        mode: args.context_mode.into(),
        vowels_only: !args.all_phones,
        subsample_n: args.subsample_n,
        train_fraction: args.train_frac,
        min_class_size: args.min_class_size,
        seed: args.common.seed,
        alpha: args.data.alpha,
    };
    let window = (args.effect_window.0, args.effect_window.1);
    let report = cross_context_generalization(ds, &spec, args.offsets)?;
    let config = data_settings(RunConfig::new("context", args.common.seed), &args.data)
        .set("offsets", args.offsets.to_string())
        .set("context", &spec)
        .set("effect_window_ms", [window.0, window.1]);

    let warnings: Vec<String> = report
        .dropped
        .iter()
        .map(|d| {
            format!(
                "context {} dropped: {} tokens, {} required",
                d.context, d.tokens, d.required
            )
        })
        .collect();
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    create_dir(&args.out)?;
    let stamp = config.stamp();
    let rows: Vec<ContextRow> = report.curve_rows().into_iter().map(ContextRow::from).collect();
    write_csv(&out_file(&args.out, "context_gen.csv"), &stamp, &rows)?;
    let effects = effect_rows(&report, window)?;
    write_csv(&out_file(&args.out, "effects.csv"), &stamp, &effects)?;
    let partitions: BTreeMap<&String, Value> = report
        .partitions
        .iter()
        .map(|(c, p)| (c, json!({ "train": p.train.len(), "test": p.test.len() })))
        .collect();
    write_summary(
        &out_file(&args.out, "summary.json"),
        &config,
        json!({
            "counts": dataset_counts(ds),
            "contexts": report.contexts,
            "dropped": report.dropped,
            "warnings": warnings,
            "class_histograms": report.class_histograms,
            "partitions": partitions,
            "retention_threshold": spec.retention_threshold(),
            "preprocess": loaded.preprocess,
        }),
    )
}

// ---------------------------------------------------------------------------
// correlate
// ---------------------------------------------------------------------------

fn read_report(dir: &Path) -> Result<(GeneralizationReport, Option<Stamp>)> {
    let path = dir.join("context_gen.csv");
    let rows: Vec<ContextRow> = read_csv(&path)?;
    let curve_rows: Vec<_> = rows.iter().map(Into::into).collect();
    let report = GeneralizationReport::from_curve_rows(&curve_rows).map_err(|e| CliError::input(&path, e))?;
    let stamp = read_text(&path)?.lines().next().and_then(Stamp::parse_header);
    Ok((report, stamp))
}

pub fn correlate(args: &CorrelateArgs) -> Result<()> {
    let (a, stamp_a) = read_report(&args.primary)?;
    let (b, stamp_b) = read_report(&args.acoustic)?;
    let window = (args.effect_window.0, args.effect_window.1);
    let corr = effect_correlation(&a, &b, window)?;
    let config = RunConfig::new("correlate", args.common.seed)
        .set("primary", display(&args.primary))
        .set("acoustic", display(&args.acoustic))
        .set("primary_config_hash", stamp_a.map(|s| s.config_hash))
        .set("acoustic_config_hash", stamp_b.map(|s| s.config_hash))
        .set("effect_window_ms", [window.0, window.1]);
    create_dir(&args.out)?;
    let rows: Vec<EffectPairRow> = corr
        .pairs
        .iter()
        .map(|p| EffectPairRow {
            train_context: p.train_context.clone(),
            test_context: p.test_context.clone(),
            effect_primary: p.effect_a,
            effect_acoustic: p.effect_b,
        })
        .collect();
    write_csv(&out_file(&args.out, "effect_pairs.csv"), &config.stamp(), &rows)?;
    write_summary(
        &out_file(&args.out, "summary.json"),
        &config,
        json!({
            "r": corr.r,
            "p": corr.p,
            "n_pairs": corr.pairs.len(),
            "contexts": a.contexts,
        }),
    )
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

pub fn synth(args: &SynthArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(p) => SyntheticSpec::from_json_str(&read_text(p)?).map_err(|e| CliError::input(p, e))?,
        None => SyntheticSpec::default(),
    };
    if let Some(e) = args.encoding {
        spec.encoding = e.into();
    }
    if let Some(n) = args.utterances {
        spec.n_utterances = n;
    }
    if let Some(d) = args.dims {
        spec.dims = d;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    spec.validate()?;
    create_dir(&args.out)?;
    let manifest = generate(&spec, &args.out)?;
    let ds = Dataset::load(&parse_manifest(&manifest)?)?;
    let config = RunConfig::new("synth", spec.seed).set("spec", &spec);
    let all: Vec<TokenId> = ds.token_ids().collect();
    write_summary(
        &out_file(&args.out, "summary.json"),
        &config,
        json!({
            "counts": dataset_counts(&ds),
            "tokens": selection_stats(&ds, &all)?,
        }),
    )
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

fn require(path: PathBuf) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::input(&path, "required input is missing"))
    }
}

pub fn plot(args: &PlotArgs) -> Result<()> {
    let out = args.out.clone().unwrap_or_else(|| args.results.clone());
    let (name, svg) = match args.kind {
        PlotKind::Window => {
            let rows: Vec<WindowRow> = read_csv(&require(args.results.join("decoding_window.csv"))?)?;
            let summary = args.results.join("summary.json");
            let duration = if summary.is_file() {
                read_json(&summary)?
                    .pointer("/selection/mean_phone_duration_ms")
                    .and_then(Value::as_f64)
            } else {
                None
            };
            ("window.svg", plot::window_svg(&rows, duration))
        }
        PlotKind::Tg => {
            let contours: Vec<ContourRow> = read_csv(&require(args.results.join("contours.csv"))?)?;
            let matrix_path = require(args.results.join("tg_matrix.csv"))?;
            let matrix: Vec<TgRow> = read_csv(&matrix_path)?;
            let range = matrix
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r.train_offset_ms), hi.max(r.train_offset_ms))
                });
            if matrix.is_empty() {
                return Err(CliError::input(&matrix_path, "no rows"));
            }
            ("tg.svg", plot::tg_svg(&contours, range))
        }
        PlotKind::Effects => {
            let rows: Vec<EffectPairRow> = read_csv(&require(args.results.join("effect_pairs.csv"))?)?;
            ("effects.svg", plot::effects_svg(&rows))
        }
    };
    create_dir(&out)?;
    write_text(&out.join(name), &svg)
}
