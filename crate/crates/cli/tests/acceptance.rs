//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Each criterion is checked against an oracle that does not share code with
//! the implementation under test (explicit matrix inverses, numeric
//! integration, independently computed filter centers), or against datasets
//! whose encoding is known by construction.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use phonoprobe::acoustic::{logmel, write_wav, LogmelConfig, Waveform};
use phonoprobe::analyses::{temporal_generalization, OffsetRange, WindowConfig};
use phonoprobe::dataset::npy::read_matrix;
use phonoprobe::dataset::{SampleSet, TokenId};
use phonoprobe::numerics::{fit_projector, label_entropy, pearson, project_out, ridge_fit, ridge_predict, Matrix};
use phonoprobe::rng::SeededRng;
use phonoprobe::synth::{generate_dataset, EncodingMode, SyntheticSpec};
use phonoprobe_cli::records::{EffectRow, TgRow, WindowRow};
use serde_json::Value;

type Check = fn(&Path) -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> Result<(), String> {
    let mut argv = vec!["phonoprobe"];
    argv.extend_from_slice(args);
    match phonoprobe_cli::run(argv) {
        0 => Ok(()),
        code => Err(format!("`phonoprobe {}` exited with {code}", args.join(" "))),
    }
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn read_summary(dir: &Path) -> Result<Value, String> {
    let p = dir.join("summary.json");
    let text = fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// 1. Ridge against an explicit-inverse normal-equation oracle
// ---------------------------------------------------------------------------

/// `W = (XcᵀXc + αI)⁻¹ XcᵀYc` via an explicit inverse, and argmax predictions
/// of `(x − x̄)ᵀW + ȳ` for each test row.
fn normal_equation_oracle(x: &Matrix, y: &[usize], alpha: f64, test: &Matrix) -> (DMatrix<f64>, Vec<usize>) {
    let (n, d) = (x.rows(), x.cols());
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let xm = DMatrix::from_row_slice(n, d, x.as_slice());
    let ym = DMatrix::from_fn(n, classes.len(), |r, c| if y[r] == classes[c] { 1.0 } else { 0.0 });
    let (x_mean, y_mean) = (xm.row_mean(), ym.row_mean());
    let xc = DMatrix::from_fn(n, d, |r, c| xm[(r, c)] - x_mean[c]);
    let yc = DMatrix::from_fn(n, classes.len(), |r, c| ym[(r, c)] - y_mean[c]);
    let inverse = (xc.transpose() * &xc + DMatrix::identity(d, d) * alpha)
        .try_inverse()
        .expect("ridge Gram matrix is positive definite");
    let w = inverse * xc.transpose() * yc;
    let preds = (0..test.rows())
        .map(|r| {
            let scores: Vec<f64> = (0..classes.len())
                .map(|c| (0..d).map(|j| (test.get(r, j) - x_mean[j]) * w[(j, c)]).sum::<f64>() + y_mean[c])
                .collect();
            let mut best = 0;
            for c in 1..scores.len() {
                if scores[c] > scores[best] {
                    best = c;
                }
            }
            classes[best]
        })
        .collect();
    (w, preds)
}

fn criterion_1(_: &Path) -> Result<String, String> {
    let start = Instant::now();
    let mut rng = SeededRng::new(0x5eed);
    let (mut worst, mut labels) = (0.0f64, 0usize);
    for instance in 0..200 {
        let k = rng.range_inclusive(2, 5);
        let n = rng.range_inclusive(k.max(2), 50);
        let d = rng.range_inclusive(1, 8);
        let alpha = [0.01, 0.1, 1.0, 10.0][rng.below(4)];
        let mut draw = |rows: usize| {
            Matrix::from_vec(rows, d, (0..rows * d).map(|_| 3.0 * rng.normal() - 1.0).collect()).unwrap()
        };
        let (x, test) = (draw(n), draw(25));
        let y: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.below(k) }).collect();
        let samples = SampleSet {
            x: x.clone(),
            y: y.clone(),
            offset_frames: 0,
            provenance: (0..n).map(|i| TokenId { utterance: 0, token: i }).collect(),
            dropped: 0,
        };
        let model = ridge_fit(&samples, alpha, None).map_err(|e| e.to_string())?;
        let (w, preds) = normal_equation_oracle(&x, &y, alpha, &test);
        for r in 0..d {
            for c in 0..w.ncols() {
                let (a, b) = (model.weights().get(r, c), w[(r, c)]);
                let rel = (a - b).abs() / b.abs().max(1e-12);
                worst = worst.max(if b.abs() < 1e-12 { (a - b).abs() } else { rel });
            }
        }
        let got = ridge_predict(&model, &test).map_err(|e| e.to_string())?;
        ensure(got == preds, || format!("instance {instance}: predicted labels differ from the oracle"))?;
        labels += got.len();
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-8, || format!("max relative weight error {worst:e} > 1e-8"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}, limit 10 s"))?;
    Ok(format!("200 instances, max relative weight error {worst:.1e}, {labels} labels identical"))
}

// ---------------------------------------------------------------------------
// 2. Decodability window on static synthetic data
// ---------------------------------------------------------------------------

fn criterion_2(dir: &Path) -> Result<String, String> {
    let start = Instant::now();
    let data = dir.join("static");
    cli(&["synth", "--out", s(&data), "--utterances", "130", "--seed", "21"])?;
    let out = dir.join("window");
    cli(&[
        "window", "--manifest", s(&data.join("manifest.json")), "--out", s(&out), "--offsets", "-14..18", "--seed", "5",
    ])?;
    let tokens = read_summary(&data)?["counts"]["tokens"].as_u64().unwrap_or(0);
    ensure(tokens >= 5000, || format!("only {tokens} tokens"))?;
    let rows: Vec<WindowRow> = read_rows(&out.join("decoding_window.csv"))?;
    let (mut min_in, mut max_gap_out) = (f64::INFINITY, 0.0f64);
    for r in &rows {
        if (-2..=5).contains(&r.offset_frames) {
            min_in = min_in.min(r.accuracy);
        } else if !(-6..=9).contains(&r.offset_frames) {
            max_gap_out = max_gap_out.max((r.accuracy - r.baseline).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(min_in >= 0.95, || format!("min accuracy in [-2,5] is {min_in:.4}"))?;
    ensure(max_gap_out <= 0.05, || format!("max |accuracy - baseline| outside [-6,9] is {max_gap_out:.4}"))?;
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}, limit 2 min"))?;
    Ok(format!(
        "{tokens} tokens; min accuracy in window {min_in:.3}; max |acc-baseline| outside {max_gap_out:.3}"
    ))
}

// ---------------------------------------------------------------------------
// 3. TG diagonal equals the decoding curve
// ---------------------------------------------------------------------------

fn criterion_3(dir: &Path) -> Result<String, String> {
    let data = dir.join("static3");
    cli(&["synth", "--out", s(&data), "--utterances", "40", "--seed", "8"])?;
    let manifest = data.join("manifest.json");
    let (tg, win) = (dir.join("tg3"), dir.join("win3"));
    let common = ["--offsets", "-6..8", "--seed", "13"];
    let mut tg_args = vec!["tg", "--manifest", s(&manifest), "--out", s(&tg), "--positions", "1"];
    tg_args.extend_from_slice(&common);
    cli(&tg_args)?;
    let mut win_args = vec!["window", "--manifest", s(&manifest), "--out", s(&win), "--position", "1"];
    win_args.extend_from_slice(&common);
    cli(&win_args)?;

    let matrix: Vec<TgRow> = read_rows(&tg.join("tg_matrix.csv"))?;
    let diagonal: BTreeMap<u64, f64> = matrix
        .iter()
        .filter(|r| r.train_offset_ms == r.test_offset_ms)
        .map(|r| (r.train_offset_ms.to_bits(), r.accuracy))
        .collect();
    let curve: Vec<WindowRow> = read_rows(&win.join("decoding_window.csv"))?;
    ensure(curve.len() == 15 && diagonal.len() == 15, || "expected 15 offsets".into())?;
    for p in &curve {
        let d = diagonal[&p.offset_ms.to_bits()];
        ensure(d.to_bits() == p.accuracy.to_bits(), || {
            format!("offset {} ms: diagonal {d} vs curve {}", p.offset_ms, p.accuracy)
        })?;
    }

    // Library path as well, on a different dataset and seed.
    let ds = generate_dataset(&SyntheticSpec {
        n_utterances: 30,
        seed: 99,
        ..SyntheticSpec::default()
    })
    .map_err(|e| e.to_string())?;
    let mut cfg = WindowConfig {
        offsets: OffsetRange::new(-4, 9).unwrap(),
        seed: 77,
        ..WindowConfig::default()
    };
    let m = temporal_generalization(&ds, &cfg, 2).map_err(|e| e.to_string())?;
    cfg.filter.word_position = Some(2);
    let curve = phonoprobe::analyses::decoding_window(&ds, &cfg).map_err(|e| e.to_string())?;
    ensure(m.diagonal() == curve.accuracies(), || "library diagonal differs from curve".into())?;
    Ok("diagonal bit-identical to decoding curve (CLI: 15 offsets, library: 14 offsets)".into())
}

// ---------------------------------------------------------------------------
// 4. Diagonal versus square TG
// ---------------------------------------------------------------------------

fn criterion_4(_: &Path) -> Result<String, String> {
    let cfg = WindowConfig {
        offsets: OffsetRange::new(-2, 5).unwrap(),
        seed: 5,
        ..WindowConfig::default()
    };
    let rotating = generate_dataset(&SyntheticSpec {
        encoding: EncodingMode::Rotating,
        dims: 39 * 8,
        n_utterances: 150,
        seed: 11,
        ..SyntheticSpec::default()
    })
    .map_err(|e| e.to_string())?;
    let rot = temporal_generalization(&rotating, &cfg, 1).map_err(|e| e.to_string())?;
    let mut worst_rot = 0.0f64;
    for i in 0..8 {
        for j in 0..8 {
            if (i as i64 - j as i64).abs() >= 2 {
                worst_rot = worst_rot.max((rot.accuracy.get(i, j) - rot.offset_baselines[j]).abs());
            }
        }
    }

    let stat_ds = generate_dataset(&SyntheticSpec {
        n_utterances: 40,
        seed: 11,
        ..SyntheticSpec::default()
    })
    .map_err(|e| e.to_string())?;
    let stat = temporal_generalization(&stat_ds, &cfg, 1).map_err(|e| e.to_string())?;
    let mut worst_ratio = f64::INFINITY;
    for i in 0..8 {
        for j in 0..8 {
            if i != j {
                let diag = stat.accuracy.get(i, i).max(stat.accuracy.get(j, j));
                worst_ratio = worst_ratio.min(stat.accuracy.get(i, j) / diag);
            }
        }
    }
    ensure(worst_rot <= 0.05, || format!("rotating off-diagonal max |acc - chance| {worst_rot:.4}"))?;
    ensure(worst_ratio >= 0.9, || format!("static off-diagonal/diagonal min ratio {worst_ratio:.4}"))?;
    Ok(format!(
        "rotating: max |off-diagonal - chance| {worst_rot:.3}; static: min off-diagonal/diagonal {worst_ratio:.3}"
    ))
}

// ---------------------------------------------------------------------------
// 5. Context invariance
// ---------------------------------------------------------------------------

fn context_run(dir: &Path, name: &str, encoding: &str, data_seed: u64, seed: u64) -> Result<PathBuf, String> {
    let spec = dir.join(format!("{name}.json"));
    let text = format!(
        r#"{{"encoding": "{encoding}", "context": "position", "n_phonemes": 20, "n_vowels": 8, "dims": 80,
            "min_word_len": 4, "max_word_len": 4, "n_utterances": 400, "seed": {data_seed}}}"#
    );
    fs::write(&spec, text).map_err(|e| e.to_string())?;
    let data = dir.join(format!("{name}_data"));
    cli(&["synth", "--spec", s(&spec), "--out", s(&data)])?;
    let out = dir.join(name);
    cli(&[
        "context",
        "--manifest",
        s(&data.join("manifest.json")),
        "--out",
        s(&out),
        "--offsets",
        "-4..12",
        "--subsample-n",
        "1500",
        "--seed",
        &seed.to_string(),
    ])?;
    Ok(out)
}

fn criterion_5(dir: &Path) -> Result<String, String> {
    let inv = context_run(dir, "invariant", "context_invariant", 3, 1)?;
    let ent = context_run(dir, "entangled", "context_entangled", 3, 1)?;
    let inv2 = context_run(dir, "invariant2", "context_invariant", 4, 2)?;
    let off = |rows: Vec<EffectRow>| -> Vec<EffectRow> { rows.into_iter().filter(|r| !r.within).collect() };
    let inv_fx = off(read_rows(&inv.join("effects.csv"))?);
    let ent_fx = off(read_rows(&ent.join("effects.csv"))?);
    ensure(inv_fx.len() == 12 && ent_fx.len() == 12, || "expected 12 off-diagonal pairs".into())?;
    let min_inv = inv_fx.iter().map(|r| r.effect).fold(f64::INFINITY, f64::min);
    let max_ent = ent_fx.iter().map(|r| r.effect.abs()).fold(0.0, f64::max);
    ensure(min_inv > 0.2, || format!("smallest invariant effect {min_inv:.4}"))?;
    ensure(max_ent <= 0.05, || format!("largest entangled |effect| {max_ent:.4}"))?;

    let corr = dir.join("corr");
    cli(&["correlate", "--primary", s(&inv), "--acoustic", s(&inv2), "--out", s(&corr)])?;
    let sum = read_summary(&corr)?;
    let n = sum["n_pairs"].as_u64().unwrap_or(0);
    ensure(n == 12, || format!("{n} pairs"))?;
    let r = sum["r"].as_f64();
    let r_text = r.map_or("undefined".to_string(), |r| format!("{r:.3}"));
    Ok(format!(
        "invariant min effect {min_inv:.3}; entangled max |effect| {max_ent:.3}; correlation over {n} pairs, r = {r_text}"
    ))
}

// ---------------------------------------------------------------------------
// 6. Projector
// ---------------------------------------------------------------------------

fn criterion_6(_: &Path) -> Result<String, String> {
    let (mut worst_dot, mut worst_idem) = (0.0f64, 0.0f64);
    let mut rng = SeededRng::new(606);
    for (n, d) in [(200, 4), (500, 16), (1000, 64), (300, 39)] {
        let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.normal() * 1.5 + 0.3).collect()).unwrap();
        let amp: Vec<f64> = x.iter_rows().map(|r| 0.8 * r[0] - 1.3 * r[d - 1] + 0.2 * rng.normal()).collect();
        let pitch: Vec<f64> = x.iter_rows().map(|r| 120.0 + 30.0 * r[1 % d] + 5.0 * rng.normal()).collect();
        let p = fit_projector(&x, &[amp, pitch], 1.0).map_err(|e| e.to_string())?;
        let once = project_out(&p, &x).map_err(|e| e.to_string())?;
        for row in once.iter_rows() {
            for dir in p.directions() {
                worst_dot = worst_dot.max(row.iter().zip(dir).map(|(a, b)| a * b).sum::<f64>().abs());
            }
        }
        let twice = project_out(&p, &once).map_err(|e| e.to_string())?;
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            worst_idem = worst_idem.max((a - b).abs());
        }
    }
    ensure(worst_dot <= 1e-10, || format!("max |row · direction| {worst_dot:e}"))?;
    ensure(worst_idem <= 1e-12, || format!("max idempotence gap {worst_idem:e}"))?;
    Ok(format!("max |row · direction| {worst_dot:.1e}; max idempotence gap {worst_idem:.1e}"))
}

// ---------------------------------------------------------------------------
// 7. Statistics
// ---------------------------------------------------------------------------

fn ln_gamma_half_integer(twice: u32) -> f64 {
    // Γ(m/2) by the recurrence from Γ(1) = 1 or Γ(1/2) = √π.
    let (mut g, mut x): (f64, f64) = if twice.is_multiple_of(2) { (0.0, 1.0) } else { (std::f64::consts::PI.sqrt().ln(), 0.5) };
    while (2.0 * x) as u32 != twice {
        g += x.ln();
        x += 1.0;
    }
    g
}

/// Two-sided Student-t p-value by Simpson integration of the density over [0, |t|].
fn t_p_value_by_integration(t: f64, nu: u32) -> f64 {
    let nu_f = nu as f64;
    let ln_c = ln_gamma_half_integer(nu + 1) - ln_gamma_half_integer(nu) - 0.5 * (nu_f * std::f64::consts::PI).ln();
    let f = |x: f64| (ln_c - (nu_f + 1.0) / 2.0 * (1.0 + x * x / nu_f).ln()).exp();
    let steps = 40_000;
    let h = t.abs() / steps as f64;
    let mut sum = f(0.0) + f(t.abs());
    for i in 1..steps {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    1.0 - 2.0 * sum * h / 3.0
}

fn criterion_7(_: &Path) -> Result<String, String> {
    let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.7 - 2.0).collect();
    let up: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
    let down: Vec<f64> = x.iter().map(|v| -0.25 * v + 4.0).collect();
    let (r_up, _) = pearson(&x, &up).map_err(|e| e.to_string())?;
    let (r_down, _) = pearson(&x, &down).map_err(|e| e.to_string())?;
    let (r_small, _) = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).map_err(|e| e.to_string())?;
    ensure(r_small == 1.0, || format!("x=[1,2,3], y=[2,4,6] gave r = {r_small}"))?;
    // Floating-point rounding leaves at most a few ulps on longer series.
    ensure((r_up - 1.0).abs() <= 1e-12 && (r_down + 1.0).abs() <= 1e-12, || {
        format!("exact linear data gave r = {r_up}, {r_down}")
    })?;

    // y = 0.6·u + 0.8·v with u, v orthonormal and centered has r = 0.6 exactly.
    let center = |a: Vec<f64>| {
        let m = a.iter().sum::<f64>() / a.len() as f64;
        a.into_iter().map(|v| v - m).collect::<Vec<f64>>()
    };
    let norm = |a: &[f64]| a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u = center(x.clone());
    let u: Vec<f64> = u.iter().map(|v| v / norm(&u)).collect();
    let raw = center((0..10).map(|i| ((i * 7) % 10) as f64).collect());
    let dot: f64 = raw.iter().zip(&u).map(|(a, b)| a * b).sum();
    let v: Vec<f64> = raw.iter().zip(&u).map(|(a, b)| a - dot * b).collect();
    let v: Vec<f64> = v.iter().map(|e| e / norm(&v)).collect();
    let y: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.6 * a + 0.8 * b).collect();
    let (r, p) = pearson(&u, &y).map_err(|e| e.to_string())?;
    let t = r * (8.0 / (1.0 - r * r)).sqrt();
    let oracle = t_p_value_by_integration(t, 8);
    ensure((r - 0.6).abs() < 1e-12, || format!("constructed r = {r}"))?;
    ensure((p - 0.0667).abs() <= 0.0005, || format!("p = {p:.5}, expected 0.0667 ± 0.0005"))?;
    ensure((p - oracle).abs() <= 0.0005, || format!("p = {p:.6} vs integration oracle {oracle:.6}"))?;

    let labels: Vec<usize> = (0..39 * 7).map(|i| i % 39).collect();
    let h = label_entropy(&labels).map_err(|e| e.to_string())?;
    ensure((h - 39f64.log2()).abs() <= 1e-6 && (h - 5.2854).abs() <= 1e-4, || format!("entropy {h}"))?;
    Ok(format!("r = ±1 (within 1e-12); p(n=10, r=0.6) = {p:.5} (oracle {oracle:.5}); H(uniform 39) = {h:.6} bits"))
}

// ---------------------------------------------------------------------------
// 8. Logmel
// ---------------------------------------------------------------------------

fn sine(freq: f64, n: usize) -> Waveform {
    Waveform {
        samples: (0..n)
            .map(|i| 0.5 * (2.0 * std::f64::consts::PI * freq * i as f64 / 16_000.0).sin())
            .collect(),
        sample_rate_hz: 16_000,
    }
}

fn criterion_8(dir: &Path) -> Result<String, String> {
    // Filter centers: 42 points evenly spaced on the HTK mel scale between 20 Hz
    // and Nyquist; the inner 40 are the band centers.
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let (lo, hi) = (mel(20.0), mel(8000.0));
    let centers: Vec<f64> = (1..=40)
        .map(|i| 700.0 * (10f64.powf((lo + (hi - lo) * i as f64 / 41.0) / 2595.0) - 1.0))
        .collect();
    let expected_bin = (0..40)
        .min_by(|&a, &b| (centers[a] - 1000.0).abs().total_cmp(&(centers[b] - 1000.0).abs()))
        .unwrap();

    // Through the CLI: WAV + alignment + audio manifest -> logmel features.
    let audio = dir.join("audio");
    fs::create_dir_all(&audio).map_err(|e| e.to_string())?;
    write_wav(&audio.join("tone.wav"), &sine(1000.0, 8000)).map_err(|e| e.to_string())?;
    fs::write(audio.join("ali.tsv"), "tone\ts1\tAA\t0.10\t0.30\t0\ntone\ts1\tB\t0.30\t0.40\t0\n")
        .map_err(|e| e.to_string())?;
    fs::write(
        audio.join("manifest.json"),
        r#"{"frame_period_ms": 10, "alignments": "ali.tsv", "wavs": {"tone": "tone.wav"}}"#,
    )
    .map_err(|e| e.to_string())?;
    let out = dir.join("logmel");
    cli(&["logmel", "--manifest", s(&audio.join("manifest.json")), "--out", s(&out)])?;
    let m = read_matrix(&out.join("features/tone.npy")).map_err(|e| e.to_string())?;
    ensure(m.cols() == 40, || format!("{} mel bins", m.cols()))?;
    ensure(m.rows() == 1 + (8000 - 400) / 160, || format!("{} frames", m.rows()))?;
    for (f, row) in m.iter_rows().enumerate() {
        let argmax = (0..40).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        ensure(argmax == expected_bin, || format!("frame {f}: argmax bin {argmax}, expected {expected_bin}"))?;
    }

    let cfg = LogmelConfig::new(16_000);
    for n in [400usize, 401, 559, 560, 561, 4321, 16_000] {
        let frames = logmel(&sine(440.0, n), &cfg).map_err(|e| e.to_string())?.frames();
        ensure(frames == 1 + (n - 400) / 160, || format!("{n} samples gave {frames} frames"))?;
    }
    ensure(logmel(&sine(440.0, 399), &cfg).is_err(), || "399 samples accepted".into())?;
    Ok(format!(
        "40 bins; every frame peaks in bin {expected_bin} (center {:.1} Hz); frame counts exact",
        centers[expected_bin]
    ))
}

// ---------------------------------------------------------------------------
// 9. Determinism across runs and worker counts
// ---------------------------------------------------------------------------

/// Six short utterances from two speakers: each phone is a tone whose pitch
/// and level depend on its label.
fn write_audio_corpus(dir: &Path) -> Result<PathBuf, String> {
    fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let labels = ["AA", "IY", "UW", "B", "S", "N"];
    let mut rng = SeededRng::new(9);
    let mut ali = String::new();
    let mut wavs = serde_json::Map::new();
    for u in 0..6 {
        let id = format!("a{u}");
        let mut samples = vec![0.0; 1600];
        for p in 0..10 {
            let label = rng.below(labels.len());
            let (f0, amp) = (110.0 + 40.0 * label as f64, 0.1 + 0.05 * label as f64);
            let onset = samples.len();
            for i in 0..1600 {
                let t = i as f64 / 16_000.0;
                let v = amp * (2.0 * std::f64::consts::PI * f0 * t).sin()
                    + 0.3 * amp * (2.0 * std::f64::consts::PI * 3.0 * f0 * t).sin()
                    + 0.01 * rng.normal();
                samples.push(v);
            }
            ali.push_str(&format!(
                "{id}\ts{}\t{}\t{:.2}\t{:.2}\t{}\n",
                u % 2,
                labels[label],
                onset as f64 / 16_000.0,
                samples.len() as f64 / 16_000.0,
                p / 2
            ));
        }
        samples.extend(std::iter::repeat_n(0.0, 1600));
        let wav = format!("{id}.wav");
        write_wav(&dir.join(&wav), &Waveform { samples, sample_rate_hz: 16_000 }).map_err(|e| e.to_string())?;
        wavs.insert(id, Value::String(wav));
    }
    fs::write(dir.join("ali.tsv"), ali).map_err(|e| e.to_string())?;
    let manifest = serde_json::json!({"frame_period_ms": 10, "alignments": "ali.tsv", "wavs": wavs});
    let path = dir.join("manifest.json");
    fs::write(&path, manifest.to_string()).map_err(|e| e.to_string())?;
    Ok(path)
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = entry.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = fs::read(&p).unwrap_or_default();
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), bytes);
            }
        }
    }
    out
}

fn criterion_9(dir: &Path) -> Result<String, String> {
    // Inputs shared by every run, at fixed paths.
    let shared = dir.join("shared");
    let audio = write_audio_corpus(&shared.join("audio"))?;
    let synth_dir = shared.join("synth");
    cli(&["synth", "--out", s(&synth_dir), "--utterances", "24", "--seed", "2"])?;
    let syn = synth_dir.join("manifest.json");
    let logmel_dir = shared.join("logmel");
    cli(&["logmel", "--manifest", s(&audio), "--out", s(&logmel_dir)])?;
    let lm = logmel_dir.join("manifest.json");
    let (ctx_a, ctx_b) = (shared.join("ctx_a"), shared.join("ctx_b"));
    for (out, seed) in [(&ctx_a, "1"), (&ctx_b, "2")] {
        cli(&[
            "context", "--manifest", s(&syn), "--out", s(out), "--offsets", "-2..6", "--subsample-n", "60",
            "--all-phones", "--seed", seed,
        ])?;
    }

    let run = |root: &Path, workers: &str| -> Result<(), String> {
        let o = |name: &str| root.join(name);
        let w = ["--workers", workers];
        let with = |args: &[&str]| -> Result<(), String> {
            let mut all = w.to_vec();
            all.extend_from_slice(args);
            cli(&all)
        };
        with(&["synth", "--out", s(&o("synth")), "--utterances", "12", "--seed", "4"])?;
        with(&["validate", "--manifest", s(&syn), "--out", s(&o("validate"))])?;
        with(&["logmel", "--manifest", s(&audio), "--out", s(&o("logmel"))])?;
        with(&["preprocess", "--manifest", s(&lm), "--out", s(&o("preprocess"))])?;
        with(&["window", "--manifest", s(&syn), "--out", s(&o("window")), "--offsets", "-4..8", "--seed", "3"])?;
        with(&[
            "window", "--manifest", s(&lm), "--out", s(&o("window_logmel")), "--offsets", "-2..3", "--preprocess", "on",
        ])?;
        with(&["tg", "--manifest", s(&syn), "--out", s(&o("tg")), "--offsets", "-3..6", "--positions", "1..3"])?;
        with(&[
            "context", "--manifest", s(&syn), "--out", s(&o("context")), "--offsets", "-2..4", "--subsample-n", "60",
            "--all-phones", "--seed", "6",
        ])?;
        with(&["correlate", "--primary", s(&ctx_a), "--acoustic", s(&ctx_b), "--out", s(&o("correlate"))])?;
        with(&["plot", "--results", s(&o("window")), "--kind", "window", "--out", s(&o("plot_window"))])?;
        with(&["plot", "--results", s(&o("tg")), "--kind", "tg", "--out", s(&o("plot_tg"))])?;
        with(&["plot", "--results", s(&o("correlate")), "--kind", "effects", "--out", s(&o("plot_effects"))])?;
        Ok(())
    };
    let (one, eight, again) = (dir.join("w1"), dir.join("w8"), dir.join("w8b"));
    run(&one, "1")?;
    run(&eight, "8")?;
    run(&again, "8")?;
    let (t1, t8, t8b) = (tree(&one), tree(&eight), tree(&again));
    ensure(t1.len() >= 30, || format!("only {} output files", t1.len()))?;
    for (label, other) in [("workers 8", &t8), ("second run", &t8b)] {
        ensure(t1.keys().eq(other.keys()), || format!("{label}: different file sets"))?;
        for (path, bytes) in &t1 {
            ensure(other[path] == *bytes, || format!("{label}: {} differs", path.display()))?;
        }
    }
    let stamped = t1
        .iter()
        .filter(|(p, _)| p.extension().is_some_and(|e| e == "csv") || p.file_name().is_some_and(|n| n == "summary.json"))
        .count();
    Ok(format!(
        "9 subcommands, {} files ({stamped} stamped CSV/JSON) byte-identical across workers 1/8 and reruns",
        t1.len()
    ))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(u32, &str, Check); 9] = [
        (1, "ridge matches explicit-inverse oracle", criterion_1),
        (2, "decodability window on static synthetic data", criterion_2),
        (3, "TG diagonal equals decoding curve", criterion_3),
        (4, "TG distinguishes rotating from static codes", criterion_4),
        (5, "context invariance discrimination", criterion_5),
        (6, "projector orthogonality and idempotence", criterion_6),
        (7, "pearson, p-value and entropy", criterion_7),
        (8, "logmel sanity", criterion_8),
        (9, "determinism across runs and worker counts", criterion_9),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let dir = tempfile::tempdir().expect("temp dir");
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| check(dir.path())))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Err(format!("panicked: {msg}"))
            });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} PASS {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} FAIL {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
