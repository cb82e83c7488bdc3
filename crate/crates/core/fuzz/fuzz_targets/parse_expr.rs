#![no_main]

use equivar::expr::{evaluate, parse};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(e) = parse(text, 4) {
        let again = parse(&e.to_string(), 4).expect("printed expression parses");
        let x = [0.5, -0.25, 1.5, 2.0];
        let (a, b) = (evaluate(&e, &x), evaluate(&again, &x));
        if let (Ok(a), Ok(b)) = (a, b) {
            assert!(a == b || (a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
});
