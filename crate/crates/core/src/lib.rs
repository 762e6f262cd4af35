//! Time-resolved linear phonetic decoding of frame-level speech representations.
//!
//! The crate ingests frame-level feature streams (".npy" matrices, one per
//! utterance) together with phone alignments, trains one closed-form ridge
//! decoder per time offset relative to phone onset, and derives three kinds of
//! analysis from those decoders:
//!
//! * the decodability window ([`analyses::decoding_window`]),
//! * temporal generalization matrices ([`analyses::temporal_generalization`])
//!   and their contour lines ([`analyses::extract_contours`]),
//! * cross-context generalization ([`analyses::cross_context_generalization`])
//!   with scalar effects and their correlation across representations.
//!
//! Acoustic baselines (logmel, frame RMS, YIN pitch) are computed by
//! [`acoustic`], and [`synth`] builds seeded datasets with known encoding
//! dynamics that serve as ground truth for every analysis.

pub mod acoustic;
pub mod analyses;
pub mod dataset;
mod error;
pub mod numerics;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
