use phonoprobe::acoustic::{
    decode_wav, encode_wav, frame_amplitude, frame_pitch, hz_to_mel, logmel, mel_to_hz, LogmelConfig, MelFilterbank,
    Waveform, WindowFunction,
};
use phonoprobe::rng::SeededRng;

const SR: u32 = 16_000;

fn sine(freq: f64, amp: f64, seconds: f64) -> Waveform {
    let n = (seconds * SR as f64) as usize;
    Waveform {
        samples: (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / SR as f64).sin())
            .collect(),
        sample_rate_hz: SR,
    }
}

/// Shortest lag in `[lo, hi]` whose autocorrelation is a local peak within 90%
/// of the exhaustive maximum (period multiples tie), refined parabolically,
/// as a frequency.
fn autocorrelation_pitch(x: &[f64], sr: f64, lo_hz: f64, hi_hz: f64) -> f64 {
    let lo = (sr / hi_hz).floor() as usize;
    let hi = (sr / lo_hz).ceil() as usize;
    let r = |tau: usize| -> f64 {
        let n = x.len() - tau;
        let num: f64 = (0..n).map(|i| x[i] * x[i + tau]).sum();
        num / n as f64
    };
    let values: Vec<f64> = (lo - 1..=hi + 1).map(r).collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let best = (1..values.len() - 1)
        .find(|&i| values[i] >= 0.9 * max && values[i] >= values[i - 1] && values[i] >= values[i + 1])
        .unwrap();
    let (a, b, c) = (values[best - 1], values[best], values[best + 1]);
    let shift = 0.5 * (a - c) / (a - 2.0 * b + c);
    sr / ((lo - 1 + best) as f64 + shift)
}

// ---------------------------------------------------------------------------
// Logmel
// ---------------------------------------------------------------------------

#[test]
fn default_config_shapes() {
    let cfg = LogmelConfig::new(SR);
    assert_eq!(cfg.window_samples(), 400);
    assert_eq!(cfg.hop_samples(), 160);
    assert_eq!(cfg.fft_size(), 512);
    let wave = sine(440.0, 0.5, 1.0);
    let m = logmel(&wave, &cfg).unwrap();
    assert_eq!(m.dims(), 40);
    assert_eq!(m.frames(), 1 + (16_000 - 400) / 160);
    for n in [400usize, 401, 559, 560, 12_345] {
        assert_eq!(cfg.frame_count(n).unwrap(), 1 + (n - 400) / 160);
    }
    assert!(cfg.frame_count(399).is_err());
}

#[test]
fn sine_peaks_in_the_nearest_mel_bin() {
    let cfg = LogmelConfig::new(SR);
    // Filter centers recomputed independently: n_mels + 2 points evenly spaced on the HTK scale.
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let (lo, hi) = (mel(20.0), mel(8000.0));
    let centers: Vec<f64> = (1..=40)
        .map(|i| {
            let m = lo + (hi - lo) * i as f64 / 41.0;
            700.0 * (10f64.powf(m / 2595.0) - 1.0)
        })
        .collect();
    let expected = (0..40)
        .min_by(|&a, &b| (centers[a] - 1000.0).abs().total_cmp(&(centers[b] - 1000.0).abs()))
        .unwrap();
    for (a, b) in MelFilterbank::new(&cfg).centers_hz().iter().zip(&centers) {
        assert!((a - b).abs() < 1e-9);
    }
    let m = logmel(&sine(1000.0, 0.5, 0.5), &cfg).unwrap();
    for f in 0..m.frames() {
        let row = m.frame(f);
        let argmax = (0..40).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        assert_eq!(argmax, expected, "frame {f}");
    }
}

#[test]
fn silence_sits_on_the_floor() {
    let cfg = LogmelConfig::new(SR);
    let silent = Waveform {
        samples: vec![0.0; 4000],
        sample_rate_hz: SR,
    };
    let m = logmel(&silent, &cfg).unwrap();
    assert!(m.matrix().as_slice().iter().all(|&v| v == 1e-10f64.ln()));
}

#[test]
fn shifting_by_one_hop_shifts_rows() {
    let cfg = LogmelConfig::new(SR);
    let mut rng = SeededRng::new(1);
    let x: Vec<f64> = (0..8000).map(|_| 0.3 * rng.normal()).collect();
    let mut delayed = vec![0.0; 160];
    delayed.extend_from_slice(&x);
    let a = logmel(&Waveform { samples: x, sample_rate_hz: SR }, &cfg).unwrap();
    let b = logmel(&Waveform { samples: delayed, sample_rate_hz: SR }, &cfg).unwrap();
    assert_eq!(b.frames(), a.frames() + 1);
    for f in 0..a.frames() {
        for (u, v) in a.frame(f).iter().zip(b.frame(f + 1)) {
            assert!((u - v).abs() < 1e-9);
        }
    }
}

#[test]
fn scaling_adds_log_c_squared() {
    let cfg = LogmelConfig::new(SR);
    let wave = sine(300.0, 0.2, 0.3);
    let c: f64 = 3.0;
    let scaled = Waveform {
        samples: wave.samples.iter().map(|s| s * c).collect(),
        ..wave.clone()
    };
    let (a, b) = (logmel(&wave, &cfg).unwrap(), logmel(&scaled, &cfg).unwrap());
    let floor = 1e-10f64.ln();
    for (u, v) in a.matrix().as_slice().iter().zip(b.matrix().as_slice()) {
        if *u > floor + 1.0 {
            assert!((v - u - (c * c).ln()).abs() < 1e-9);
        }
    }
    let (pa, pb) = (frame_pitch(&wave, &cfg).unwrap(), frame_pitch(&scaled, &cfg).unwrap());
    for (u, v) in pa.values.iter().zip(&pb.values) {
        assert_eq!(*u == 0.0, *v == 0.0);
        assert!((u - v).abs() <= 1e-6 * u.abs().max(1.0));
    }
    let (aa, ab) = (frame_amplitude(&wave, &cfg).unwrap(), frame_amplitude(&scaled, &cfg).unwrap());
    for (u, v) in aa.values.iter().zip(&ab.values) {
        assert!((v - c * u).abs() < 1e-12);
    }
}

#[test]
fn mel_scale_roundtrip() {
    for f in [0.0, 20.0, 700.0, 1000.0, 8000.0] {
        assert!((mel_to_hz(hz_to_mel(f)) - f).abs() < 1e-9);
    }
    assert!((hz_to_mel(700.0) - 2595.0 * 2f64.log10()).abs() < 1e-12);
}

// ---------------------------------------------------------------------------
// Covariates
// ---------------------------------------------------------------------------

#[test]
fn hann_weighted_constant_has_closed_form_rms() {
    let cfg = LogmelConfig::new(SR);
    let a = 0.25;
    let wave = Waveform {
        samples: vec![a; 3200],
        sample_rate_hz: SR,
    };
    let n = cfg.window_samples() as f64;
    // Σ w² over a symmetric Hann window of N points is 3(N−1)/8.
    let expected = a * (3.0 * (n - 1.0) / (8.0 * n)).sqrt();
    for v in frame_amplitude(&wave, &cfg).unwrap().values {
        assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
    }
}

#[test]
fn rectangular_sine_rms_is_amplitude_over_root_two() {
    let cfg = LogmelConfig {
        window: WindowFunction::Rectangular,
        ..LogmelConfig::new(SR)
    };
    let amp = 0.8;
    for v in frame_amplitude(&sine(1000.0, amp, 0.5), &cfg).unwrap().values {
        assert!((v / (amp / 2f64.sqrt()) - 1.0).abs() < 0.01);
    }
}

#[test]
fn silence_has_zero_amplitude_and_no_pitch() {
    let cfg = LogmelConfig::new(SR);
    let wave = Waveform {
        samples: vec![0.0; 4000],
        sample_rate_hz: SR,
    };
    assert!(frame_amplitude(&wave, &cfg).unwrap().values.iter().all(|&v| v == 0.0));
    assert!(frame_pitch(&wave, &cfg).unwrap().values.iter().all(|&v| v == 0.0));
}

#[test]
fn yin_tracks_pure_tones_like_the_autocorrelation_oracle() {
    let cfg = LogmelConfig::new(SR);
    for (freq, tol) in [(200.0, 2.0), (100.0, 1.0), (137.0, 2.0)] {
        let wave = sine(freq, 0.5, 1.0);
        let oracle = autocorrelation_pitch(&wave.samples[4000..4640], SR as f64, 50.0, 400.0);
        assert!((oracle - freq).abs() < tol, "oracle {oracle} for {freq}");
        let pitch = frame_pitch(&wave, &cfg).unwrap();
        let n = pitch.values.len();
        // Interior frames: the full 40 ms window fits.
        for &p in &pitch.values[3..n - 3] {
            assert!((p - freq).abs() < tol, "{p} for {freq}");
            assert!((p - oracle).abs() < tol, "{p} vs oracle {oracle}");
        }
    }
}

#[test]
fn white_noise_is_mostly_unvoiced() {
    let cfg = LogmelConfig::new(SR);
    let mut rng = SeededRng::new(77);
    let wave = Waveform {
        samples: (0..32_000).map(|_| 0.3 * rng.normal()).collect(),
        sample_rate_hz: SR,
    };
    let p = frame_pitch(&wave, &cfg).unwrap();
    let unvoiced = p.values.iter().filter(|&&v| v == 0.0).count();
    assert!(unvoiced as f64 >= 0.9 * p.values.len() as f64, "{unvoiced}/{}", p.values.len());
}

#[test]
fn all_streams_share_the_frame_count() {
    let cfg = LogmelConfig::new(SR);
    let wave = sine(150.0, 0.4, 0.77);
    let n = logmel(&wave, &cfg).unwrap().frames();
    assert_eq!(frame_amplitude(&wave, &cfg).unwrap().values.len(), n);
    assert_eq!(frame_pitch(&wave, &cfg).unwrap().values.len(), n);
}

// ---------------------------------------------------------------------------
// WAV
// ---------------------------------------------------------------------------

#[test]
fn wav_roundtrip_and_scaling() {
    let wave = Waveform {
        samples: vec![-1.0, -0.5, 0.0, 0.25, 32767.0 / 32768.0],
        sample_rate_hz: SR,
    };
    let back = decode_wav(&encode_wav(&wave).unwrap()).unwrap();
    assert_eq!(back, wave);
    let second = Waveform {
        samples: vec![0.0; 16_000],
        sample_rate_hz: SR,
    };
    assert_eq!(decode_wav(&encode_wav(&second).unwrap()).unwrap().duration_s(), 1.0);
}

#[test]
fn stereo_wav_is_rejected() {
    let spec = hound::WavSpec {
        channels: 2,
        sample_rate: SR,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut buf = std::io::Cursor::new(Vec::new());
    {
        let mut w = hound::WavWriter::new(&mut buf, spec).unwrap();
        for _ in 0..8 {
            w.write_sample(0i16).unwrap();
        }
        w.finalize().unwrap();
    }
    let err = decode_wav(buf.get_ref()).unwrap_err();
    assert!(err.to_string().contains("channel"), "{err}");
}
