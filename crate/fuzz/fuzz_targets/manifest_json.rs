#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use phonoprobe::dataset::DatasetManifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = DatasetManifest::from_json_str(text, Path::new("/data"));
    }
});
