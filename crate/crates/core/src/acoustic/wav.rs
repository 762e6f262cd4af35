use std::io::Cursor;
use std::path::Path;

use crate::{Error, Result};

/// Mono audio with samples scaled into [−1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl Waveform {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

/// Decodes a 16-bit PCM mono WAV; integer samples are scaled by 1/32768.
pub fn decode_wav(bytes: &[u8]) -> Result<Waveform> {
    let mut reader =
        hound::WavReader::new(Cursor::new(bytes)).map_err(|e| Error::Wav(e.to_string()))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::Wav(format!(
            "unsupported channel count {}, expected mono",
            spec.channels
        )));
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::Wav(format!(
            "unsupported encoding {:?} {}-bit, expected 16-bit PCM",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    if spec.sample_rate == 0 {
        return Err(Error::Wav("sample rate is zero".into()));
    }
    let declared = reader.len() as usize;
    let mut samples = Vec::with_capacity(declared.min(bytes.len() / 2));
    for s in reader.samples::<i16>() {
        let s = s.map_err(|e| Error::Wav(format!("truncated or corrupt data: {e}")))?;
        samples.push(s as f64 / 32768.0);
    }
    if samples.len() != declared {
        return Err(Error::Wav(format!(
            "truncated data: header declares {declared} samples, found {}",
            samples.len()
        )));
    }
    Ok(Waveform {
        samples,
        sample_rate_hz: spec.sample_rate,
    })
}

pub fn read_wav(path: &Path) -> Result<Waveform> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes).map_err(|e| Error::Wav(format!("{}: {e}", path.display())))
}

/// Encodes as 16-bit PCM mono, clamping to the representable range.
pub fn encode_wav(wave: &Waveform) -> Result<Vec<u8>> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: wave.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut buf = Cursor::new(Vec::new());
    {
        let mut w = hound::WavWriter::new(&mut buf, spec).map_err(|e| Error::Wav(e.to_string()))?;
        for &s in &wave.samples {
            let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            w.write_sample(v).map_err(|e| Error::Wav(e.to_string()))?;
        }
        w.finalize().map_err(|e| Error::Wav(e.to_string()))?;
    }
    Ok(buf.into_inner())
}

pub fn write_wav(path: &Path, wave: &Waveform) -> Result<()> {
    std::fs::write(path, encode_wav(wave)?).map_err(|e| Error::io(path, e))
}
