//! The fuzz corpus seeds double as parser regression inputs.

use std::fs;
use std::path::{Path, PathBuf};

use nirfuse_core::harness::{parse_config_str, parse_manifest, parse_results, parse_timings};
use nirfuse_core::image::{decode_color, decode_gray};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

fn text(b: &[u8]) -> &str {
    std::str::from_utf8(b).unwrap()
}

#[test]
fn config_seeds() {
    for (path, bytes) in seeds("fuzz_config") {
        // first line is a `--set` override, as in the fuzz target
        let (head, body) = text(&bytes).split_once('\n').unwrap();
        let r = parse_config_str(body, &[head.to_string()]);
        let typo = path.ends_with("typo.toml");
        assert_eq!(r.is_err(), typo, "{}", path.display());
    }
}

#[test]
fn manifest_seeds_parse() {
    for (path, bytes) in seeds("fuzz_manifest") {
        let pairs = parse_manifest(text(&bytes), Path::new("/data")).unwrap();
        assert!(!pairs.is_empty(), "{}", path.display());
    }
}

#[test]
fn results_seeds_parse() {
    for (path, bytes) in seeds("fuzz_results_csv") {
        let t = text(&bytes);
        let ok = if t.starts_with("# nirfuse timings") { parse_timings(t).is_ok() } else { parse_results(t).is_ok() };
        assert!(ok, "{}", path.display());
    }
}

#[test]
fn image_seeds_decode() {
    for (path, bytes) in seeds("fuzz_decode_image") {
        assert!(decode_gray(&bytes).is_ok(), "{}", path.display());
        let gray = path.file_name().unwrap().to_str().unwrap().starts_with("gray");
        assert_eq!(decode_color(&bytes).is_err(), gray, "{}", path.display());
    }
}
