#![no_main]

use libfuzzer_sys::fuzz_target;
use phonoprobe::synth::SyntheticSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = SyntheticSpec::from_json_str(text) {
            let _ = spec.validate();
        }
    }
});
