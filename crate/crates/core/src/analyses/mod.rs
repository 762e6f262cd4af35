//! Decoding analyses over a loaded [`Dataset`](crate::dataset::Dataset).
//!
//! All randomness (utterance splits, context subsampling) is drawn from the
//! seed before the per-offset fits run in parallel; results are collected in
//! offset order, so outputs do not depend on the number of worker threads.

mod context;
mod contour;
mod preprocess;
mod split;
mod tg;
mod window;

pub use context::{
    cross_context_generalization, effect_correlation, generalization_effect, split_contexts, ContextMode,
    ContextPartition, ContextSpec, ContextTokens, CurveRow, DroppedContext, EffectCorrelation, EffectPair,
    GeneralizationReport, PairCurve, DEFAULT_EFFECT_WINDOW_MS,
};
pub use contour::{extract_contours, marching_squares, Contour, GridPolyline};
pub use preprocess::regress_out;
pub use split::{split_utterances, SplitStrategy, UtteranceSplit};
pub use tg::{temporal_generalization, PositionStats, TGMatrix};
pub use window::{decoding_window, CurvePoint, DecodingCurve, OffsetRange, WindowConfig};
