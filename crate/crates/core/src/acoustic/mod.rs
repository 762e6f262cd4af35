//! Acoustic features computed from audio: log mel spectrogram, frame RMS
//! amplitude and YIN pitch, all on the same snip-edges framing.

mod covariates;
mod mel;
mod wav;

pub use covariates::{
    covariates_to_tsv, frame_amplitude, frame_pitch, frame_pitch_with, parse_covariates_tsv,
    read_covariates, CovariateSeries, PitchConfig, UtteranceCovariates, COVARIATES_HEADER,
};
pub use mel::{hz_to_mel, logmel, mel_to_hz, LogmelConfig, MelFilterbank, WindowFunction};
pub use wav::{decode_wav, encode_wav, read_wav, write_wav, Waveform};

/// Logmel features plus amplitude and pitch covariates for one waveform.
pub fn extract_all(
    wave: &Waveform,
    cfg: &LogmelConfig,
) -> crate::Result<(crate::dataset::FeatureMatrix, UtteranceCovariates)> {
    let features = logmel(wave, cfg)?;
    let covariates = UtteranceCovariates {
        amplitude: frame_amplitude(wave, cfg)?,
        pitch_hz: frame_pitch(wave, cfg)?,
    };
    Ok((features, covariates))
}
