#![no_main]

use libfuzzer_sys::fuzz_target;
use phonoprobe::dataset::PhonemeVocab;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = PhonemeVocab::parse_tsv(text);
    }
});
