#![no_main]

use libfuzzer_sys::fuzz_target;
use phonoprobe::analyses::{CurveRow, GeneralizationReport};
use phonoprobe_cli::records::ContextRow;

// The path `correlate` takes: stamped CSV -> rows -> report -> effects.
fuzz_target!(|data: &[u8]| {
    let rows: Result<Vec<ContextRow>, _> =
        csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(data).deserialize().collect();
    let Ok(rows) = rows else { return };
    let rows: Vec<CurveRow> = rows.iter().map(CurveRow::from).collect();
    if let Ok(report) = GeneralizationReport::from_curve_rows(&rows) {
        let _ = phonoprobe::analyses::effect_correlation(&report, &report, (0.0, 100.0));
    }
});
