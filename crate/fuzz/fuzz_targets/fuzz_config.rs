#![no_main]

use libfuzzer_sys::fuzz_target;
use nirfuse_core::harness::{parse_config_str, parse_override};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // first line doubles as a `--set` override
    let (head, body) = text.split_once('\n').unwrap_or((text, ""));
    let _ = parse_override(head);
    if let Ok(cfg) = parse_config_str(body, &[head.to_string()]) {
        let _ = cfg.config_hash();
    }
    let _ = parse_config_str(text, &[]);
});
