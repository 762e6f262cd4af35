#![no_main]

use libfuzzer_sys::fuzz_target;
use phonoprobe::dataset::npy::{decode_matrix, encode_matrix, parse_header};

fuzz_target!(|data: &[u8]| {
    let _ = parse_header(data);
    if let Ok(m) = decode_matrix(data) {
        // Anything accepted must survive a round trip unchanged.
        let again = decode_matrix(&encode_matrix(&m)).expect("re-encoded matrix decodes");
        assert_eq!((again.rows(), again.cols()), (m.rows(), m.cols()));
    }
});
