#![no_main]

use libfuzzer_sys::fuzz_target;
use nirfuse_core::image::{decode_color, decode_gray};

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = decode_color(data) {
        assert!(img.r().data().iter().all(|v| (0.0..=1.0).contains(v)));
    }
    if let Ok(p) = decode_gray(data) {
        assert_eq!(p.data().len(), p.width() * p.height());
    }
});
