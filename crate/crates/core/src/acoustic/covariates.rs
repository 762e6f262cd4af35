//! Per-frame amplitude (windowed RMS) and pitch (YIN) on the logmel framing.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mel::LogmelConfig;
use super::wav::Waveform;
use crate::{Error, Result};

/// One non-negative value per analysis frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariateSeries {
    pub values: Vec<f64>,
}

impl CovariateSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Keeps the first `frames` values.
    pub fn truncated(&self, frames: usize) -> CovariateSeries {
        CovariateSeries {
            values: self.values[..frames.min(self.values.len())].to_vec(),
        }
    }
}

/// RMS of each windowed frame (the window is not renormalized).
pub fn frame_amplitude(wave: &Waveform, cfg: &LogmelConfig) -> Result<CovariateSeries> {
    cfg.validate()?;
    let frames = cfg.frame_count(wave.samples.len())?;
    let (win, hop) = (cfg.window_samples(), cfg.hop_samples());
    let window = cfg.window.coefficients(win);
    let values = (0..frames)
        .map(|i| {
            let frame = &wave.samples[i * hop..i * hop + win];
            let energy: f64 = frame.iter().zip(&window).map(|(s, w)| (s * w).powi(2)).sum();
            (energy / win as f64).sqrt()
        })
        .collect();
    Ok(CovariateSeries { values })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PitchConfig {
    pub min_hz: f64,
    pub max_hz: f64,
    /// Analysis window centered on each frame.
    pub window_ms: f64,
    pub threshold: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        PitchConfig {
            min_hz: 50.0,
            max_hz: 400.0,
            window_ms: 40.0,
            threshold: 0.15,
        }
    }
}

/// YIN pitch per frame in Hz, 0 for unvoiced frames.
pub fn frame_pitch(wave: &Waveform, cfg: &LogmelConfig) -> Result<CovariateSeries> {
    frame_pitch_with(wave, cfg, &PitchConfig::default())
}

pub fn frame_pitch_with(wave: &Waveform, cfg: &LogmelConfig, pitch: &PitchConfig) -> Result<CovariateSeries> {
    cfg.validate()?;
    if !(pitch.min_hz > 0.0 && pitch.min_hz < pitch.max_hz) {
        return Err(Error::Config(format!(
            "pitch band must satisfy 0 < min < max, got {}..{}",
            pitch.min_hz, pitch.max_hz
        )));
    }
    let frames = cfg.frame_count(wave.samples.len())?;
    let (win, hop) = (cfg.window_samples(), cfg.hop_samples());
    let sr = wave.sample_rate_hz as f64;
    let half = (sr * pitch.window_ms / 2000.0).round() as usize;
    let tau_min = ((sr / pitch.max_hz).floor() as usize).max(2);
    let tau_max = (sr / pitch.min_hz).floor() as usize;

    let n = wave.samples.len();
    let values = (0..frames)
        .map(|i| {
            let center = i * hop + win / 2;
            let start = center.saturating_sub(half);
            let end = (center + half).min(n);
            yin_segment(&wave.samples[start..end], sr, tau_min, tau_max, pitch.threshold)
        })
        .collect();
    Ok(CovariateSeries { values })
}

/// Runs YIN on one analysis segment. The lag range shrinks to half the
/// segment for truncated edge windows.
fn yin_segment(x: &[f64], sr: f64, tau_min: usize, tau_max: usize, threshold: f64) -> f64 {
    let tau_max = tau_max.min(x.len() / 2);
    if tau_max <= tau_min + 1 {
        return 0.0;
    }
    let width = x.len() - tau_max;

    let mut diff = vec![0.0; tau_max + 1];
    for (tau, d) in diff.iter_mut().enumerate().skip(1) {
        *d = (0..width).map(|j| (x[j] - x[j + tau]).powi(2)).sum();
    }

    // cumulative-mean-normalized difference
    let mut cmnd = vec![1.0; tau_max + 1];
    let mut running = 0.0;
    for tau in 1..=tau_max {
        running += diff[tau];
        cmnd[tau] = if running > 0.0 {
            diff[tau] * tau as f64 / running
        } else {
            1.0
        };
    }

    let mut tau = tau_min;
    while tau <= tau_max {
        if cmnd[tau] < threshold {
            while tau < tau_max && cmnd[tau + 1] < cmnd[tau] {
                tau += 1;
            }
            return sr / parabolic_refine(&cmnd, tau);
        }
        tau += 1;
    }
    0.0
}

fn parabolic_refine(y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= y.len() {
        return i as f64;
    }
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom <= 0.0 {
        return i as f64;
    }
    let shift = 0.5 * (a - c) / denom;
    i as f64 + shift.clamp(-0.5, 0.5)
}

/// Amplitude and pitch for one utterance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtteranceCovariates {
    pub amplitude: CovariateSeries,
    pub pitch_hz: CovariateSeries,
}

impl UtteranceCovariates {
    pub fn frames(&self) -> usize {
        self.amplitude.len()
    }
}

pub const COVARIATES_HEADER: &str = "utterance_id\tframe\tamplitude\tpitch_hz";

pub fn covariates_to_tsv(covariates: &BTreeMap<String, UtteranceCovariates>) -> String {
    let mut out = String::from(COVARIATES_HEADER);
    out.push('\n');
    for (utt, c) in covariates {
        for (i, (a, p)) in c.amplitude.values.iter().zip(&c.pitch_hz.values).enumerate() {
            out.push_str(&format!("{utt}\t{i}\t{a}\t{p}\n"));
        }
    }
    out
}

/// Parses the covariate TSV; frames of each utterance must run 0, 1, 2, ...
pub fn parse_covariates_tsv(text: &str) -> Result<BTreeMap<String, UtteranceCovariates>> {
    let mut out: BTreeMap<String, UtteranceCovariates> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || (lineno == 1 && line.starts_with("utterance_id")) {
            continue;
        }
        let err = |message: String| Error::Covariates {
            line: lineno,
            message,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(err(format!("expected 4 columns, found {}", cols.len())));
        }
        let frame: usize = cols[1]
            .parse()
            .map_err(|_| err(format!("bad frame index {:?}", cols[1])))?;
        let value = |s: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
                _ => Err(err(format!("value {s:?} must be finite and non-negative"))),
            }
        };
        let (amp, pitch) = (value(cols[2])?, value(cols[3])?);
        let entry = out.entry(cols[0].to_string()).or_insert_with(|| UtteranceCovariates {
            amplitude: CovariateSeries { values: vec![] },
            pitch_hz: CovariateSeries { values: vec![] },
        });
        if frame != entry.amplitude.len() {
            return Err(err(format!(
                "frame {frame} out of sequence for {:?}, expected {}",
                cols[0],
                entry.amplitude.len()
            )));
        }
        entry.amplitude.values.push(amp);
        entry.pitch_hz.values.push(pitch);
    }
    Ok(out)
}

pub fn read_covariates(path: &Path) -> Result<BTreeMap<String, UtteranceCovariates>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_covariates_tsv(&text)
}
