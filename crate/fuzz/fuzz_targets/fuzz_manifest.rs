#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use nirfuse_core::harness::parse_manifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(pairs) = parse_manifest(text, Path::new("/data")) {
            assert!(pairs.windows(2).all(|w| w[0].id < w[1].id));
        }
    }
});
