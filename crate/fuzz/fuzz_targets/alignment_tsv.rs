#![no_main]

use libfuzzer_sys::fuzz_target;
use phonoprobe::dataset::{alignment_to_tsv, parse_alignment_str, PhonemeVocab};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let vocab = PhonemeVocab::default_arpabet();
    if let Ok(tokens) = parse_alignment_str(text, &vocab) {
        // Serializing what was accepted must parse back to the same tokens.
        let again = parse_alignment_str(&alignment_to_tsv(&tokens, &vocab), &vocab).expect("round trip");
        assert_eq!(again.len(), tokens.len());
    }
});
