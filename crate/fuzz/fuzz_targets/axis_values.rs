#![no_main]

use libfuzzer_sys::fuzz_target;
use star_noma_cli::values::{parse_values, MAX_POINTS};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(values) = parse_values(s) {
            assert!(!values.is_empty() && values.len() <= MAX_POINTS);
            assert!(values.iter().all(|v| v.is_finite()));
        }
    }
});
