#![no_main]

use equivar::sign_group::SignPattern;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = text.parse::<SignPattern>() {
        assert_eq!(p.to_string().parse::<SignPattern>().expect("round trip"), p);
    }
});
