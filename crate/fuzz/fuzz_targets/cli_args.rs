#![no_main]

use libfuzzer_sys::fuzz_target;
use phonoprobe::analyses::OffsetRange;
use phonoprobe_cli::args::{MsWindow, Positions};
use phonoprobe_cli::output::Stamp;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = text.parse::<OffsetRange>() {
        assert_eq!(r.len(), r.iter().count());
    }
    let _ = text.parse::<MsWindow>();
    if let Ok(p) = text.parse::<Positions>() {
        assert_eq!(p.to_string().parse::<Positions>().ok(), Some(p));
    }
    let _ = Stamp::parse_header(text);
});
