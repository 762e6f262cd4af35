//! Row types of the result CSVs.

use phonoprobe::analyses::{CurvePoint, CurveRow};
use serde::{Deserialize, Serialize};

use crate::output::Record;

/// `decoding_window.csv`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub offset_frames: i64,
    pub offset_ms: f64,
    pub accuracy: f64,
    pub baseline: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_dropped: usize,
}

impl Record for WindowRow {
    const HEADER: &'static [&'static str] = &[
        "offset_frames",
        "offset_ms",
        "accuracy",
        "baseline",
        "n_train",
        "n_test",
        "n_dropped",
    ];
}

impl From<&CurvePoint> for WindowRow {
    fn from(p: &CurvePoint) -> Self {
        WindowRow {
            offset_frames: p.offset_frames,
            offset_ms: p.offset_ms,
            accuracy: p.accuracy,
            baseline: p.baseline,
            n_train: p.n_train,
            n_test: p.n_test,
            n_dropped: p.n_dropped,
        }
    }
}

/// `tg_matrix.csv`, one row per (position, train offset, test offset).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TgRow {
    pub position: u32,
    pub train_offset_ms: f64,
    pub test_offset_ms: f64,
    pub accuracy: f64,
    /// Majority-class accuracy at the test offset.
    pub baseline: f64,
}

impl Record for TgRow {
    const HEADER: &'static [&'static str] = &["position", "train_offset_ms", "test_offset_ms", "accuracy", "baseline"];
}

/// `contours.csv`, one row per polyline vertex. Coordinates are unshifted;
/// `shift_ms` is the cumulative mean duration of the preceding positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourRow {
    pub position: u32,
    pub threshold: f64,
    pub contour: usize,
    pub closed: bool,
    pub vertex: usize,
    pub train_ms: f64,
    pub test_ms: f64,
    pub shift_ms: f64,
}

impl Record for ContourRow {
    const HEADER: &'static [&'static str] = &[
        "position",
        "threshold",
        "contour",
        "closed",
        "vertex",
        "train_ms",
        "test_ms",
        "shift_ms",
    ];
}

/// `context_gen.csv`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextRow {
    pub train_context: String,
    pub test_context: String,
    pub offset_ms: f64,
    pub accuracy: f64,
    pub baseline: f64,
}

impl Record for ContextRow {
    const HEADER: &'static [&'static str] = &["train_context", "test_context", "offset_ms", "accuracy", "baseline"];
}

impl From<CurveRow> for ContextRow {
    fn from(r: CurveRow) -> Self {
        ContextRow {
            train_context: r.train_context,
            test_context: r.test_context,
            offset_ms: r.offset_ms,
            accuracy: r.accuracy,
            baseline: r.baseline,
        }
    }
}

impl From<&ContextRow> for CurveRow {
    fn from(r: &ContextRow) -> Self {
        CurveRow {
            train_context: r.train_context.clone(),
            test_context: r.test_context.clone(),
            offset_ms: r.offset_ms,
            accuracy: r.accuracy,
            baseline: r.baseline,
        }
    }
}

/// `effects.csv` of a context run: one row per ordered context pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectRow {
    pub train_context: String,
    pub test_context: String,
    pub within: bool,
    pub effect: f64,
}

impl Record for EffectRow {
    const HEADER: &'static [&'static str] = &["train_context", "test_context", "within", "effect"];
}

/// `effects.csv` of a correlate run: off-diagonal pairs, both representations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectPairRow {
    pub train_context: String,
    pub test_context: String,
    pub effect_primary: f64,
    pub effect_acoustic: f64,
}

impl Record for EffectPairRow {
    const HEADER: &'static [&'static str] = &["train_context", "test_context", "effect_primary", "effect_acoustic"];
}
