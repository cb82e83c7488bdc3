#![no_main]

use equivar::linalg::io::{parse_real_matrix, write_real_matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(a) = parse_real_matrix(text) {
        let again = parse_real_matrix(&write_real_matrix(&a)).expect("written matrix parses");
        assert_eq!(a, again);
    }
});
