//! Log mel spectrogram with snip-edges framing.
//!
//! Per frame: window → zero-padded FFT → power spectrum → triangular mel
//! filters (HTK scale, unit peak) → `ln(max(energy, ε))`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::wav::Waveform;
use crate::dataset::FeatureMatrix;
use crate::numerics::Matrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowFunction {
    /// Symmetric Hann, `0.5 − 0.5·cos(2πn/(N−1))`.
    Hann,
    Rectangular,
}

impl WindowFunction {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            WindowFunction::Rectangular => vec![1.0; n],
            WindowFunction::Hann if n == 1 => vec![1.0],
            WindowFunction::Hann => {
                let denom = (n - 1) as f64;
                (0..n)
                    .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / denom).cos())
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogmelConfig {
    pub sample_rate_hz: u32,
    pub window_ms: f64,
    /// Must equal the dataset frame period.
    pub hop_ms: f64,
    pub n_mels: usize,
    pub low_hz: f64,
    /// Nyquist when unset.
    pub high_hz: Option<f64>,
    pub epsilon: f64,
    pub window: WindowFunction,
}

impl LogmelConfig {
    pub fn new(sample_rate_hz: u32) -> Self {
        LogmelConfig {
            sample_rate_hz,
            window_ms: 25.0,
            hop_ms: 10.0,
            n_mels: 40,
            low_hz: 20.0,
            high_hz: None,
            epsilon: 1e-10,
            window: WindowFunction::Hann,
        }
    }

    pub fn window_samples(&self) -> usize {
        (self.sample_rate_hz as f64 * self.window_ms / 1000.0).round() as usize
    }

    pub fn hop_samples(&self) -> usize {
        (self.sample_rate_hz as f64 * self.hop_ms / 1000.0).round() as usize
    }

    pub fn fft_size(&self) -> usize {
        self.window_samples().next_power_of_two()
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz as f64 / 2.0
    }

    pub fn effective_high_hz(&self) -> f64 {
        self.high_hz.unwrap_or_else(|| self.nyquist_hz())
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate_hz == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        if self.window_samples() == 0 || self.hop_samples() == 0 {
            return Err(Error::Config(format!(
                "window ({} ms) and hop ({} ms) must each span at least one sample",
                self.window_ms, self.hop_ms
            )));
        }
        if self.n_mels == 0 {
            return Err(Error::Config("n_mels must be at least 1".into()));
        }
        let high = self.effective_high_hz();
        if !(self.low_hz >= 0.0 && self.low_hz < high && high <= self.nyquist_hz()) {
            return Err(Error::Config(format!(
                "mel band must satisfy 0 <= low < high <= nyquist, got {}..{high}",
                self.low_hz
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("log floor epsilon must be positive".into()));
        }
        Ok(())
    }

    /// Snip-edges frame count, `1 + ⌊(samples − window)/hop⌋`.
    pub fn frame_count(&self, samples: usize) -> Result<usize> {
        let window = self.window_samples();
        if samples < window {
            return Err(Error::Config(format!(
                "waveform of {samples} samples is shorter than one {window}-sample window"
            )));
        }
        Ok(1 + (samples - window) / self.hop_samples())
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters over the non-negative FFT bins.
#[derive(Clone, Debug)]
pub struct MelFilterbank {
    centers_hz: Vec<f64>,
    /// `n_mels` rows of `fft_size/2 + 1` weights.
    weights: Vec<Vec<f64>>,
}

impl MelFilterbank {
    pub fn new(cfg: &LogmelConfig) -> Self {
        let n_bins = cfg.fft_size() / 2 + 1;
        let lo = hz_to_mel(cfg.low_hz);
        let hi = hz_to_mel(cfg.effective_high_hz());
        let step = (hi - lo) / (cfg.n_mels + 1) as f64;
        let edges: Vec<f64> = (0..cfg.n_mels + 2)
            .map(|i| mel_to_hz(lo + step * i as f64))
            .collect();
        let bin_hz = cfg.sample_rate_hz as f64 / cfg.fft_size() as f64;

        let weights = (0..cfg.n_mels)
            .map(|m| {
                let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
                (0..n_bins)
                    .map(|k| {
                        let f = k as f64 * bin_hz;
                        if f <= left || f >= right {
                            0.0
                        } else if f <= center {
                            (f - left) / (center - left)
                        } else {
                            (right - f) / (right - center)
                        }
                    })
                    .collect()
            })
            .collect();
        MelFilterbank {
            centers_hz: edges[1..=cfg.n_mels].to_vec(),
            weights,
        }
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn apply(&self, power: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(power).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Reusable per-frame power spectrum computation.
pub(crate) struct PowerSpectrum {
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    buffer: Vec<Complex<f64>>,
}

impl PowerSpectrum {
    pub(crate) fn new(cfg: &LogmelConfig) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(cfg.fft_size());
        PowerSpectrum {
            fft,
            window: cfg.window.coefficients(cfg.window_samples()),
            buffer: vec![Complex::new(0.0, 0.0); cfg.fft_size()],
        }
    }

    pub(crate) fn compute(&mut self, frame: &[f64]) -> Vec<f64> {
        for b in self.buffer.iter_mut() {
            *b = Complex::new(0.0, 0.0);
        }
        for ((b, s), w) in self.buffer.iter_mut().zip(frame).zip(&self.window) {
            b.re = s * w;
        }
        self.fft.process(&mut self.buffer);
        let n_bins = self.buffer.len() / 2 + 1;
        self.buffer[..n_bins].iter().map(|c| c.norm_sqr()).collect()
    }
}

pub fn logmel(wave: &Waveform, cfg: &LogmelConfig) -> Result<FeatureMatrix> {
    cfg.validate()?;
    if wave.sample_rate_hz != cfg.sample_rate_hz {
        return Err(Error::Config(format!(
            "waveform is {} Hz but config expects {} Hz",
            wave.sample_rate_hz, cfg.sample_rate_hz
        )));
    }
    let frames = cfg.frame_count(wave.samples.len())?;
    let (win, hop) = (cfg.window_samples(), cfg.hop_samples());
    let bank = MelFilterbank::new(cfg);
    let mut spectrum = PowerSpectrum::new(cfg);
    let floor = cfg.epsilon;

    let mut data = Vec::with_capacity(frames * cfg.n_mels);
    for i in 0..frames {
        let frame = &wave.samples[i * hop..i * hop + win];
        let power = spectrum.compute(frame);
        data.extend(bank.apply(&power).into_iter().map(|e| e.max(floor).ln()));
    }
    FeatureMatrix::new(Matrix::from_vec(frames, cfg.n_mels, data)?, cfg.hop_ms)
}
