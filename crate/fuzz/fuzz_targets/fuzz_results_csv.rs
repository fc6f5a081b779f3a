#![no_main]

use libfuzzer_sys::fuzz_target;
use nirfuse_core::harness::{parse_results, parse_timings};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = parse_results(text) {
        let _ = report.aggregate();
    }
    let _ = parse_timings(text);
});
