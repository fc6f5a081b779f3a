//! Command drivers behind the CLI: single-pair fusion, batch evaluation
//! with a resumable per-cell cache, and report re-rendering.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::dataset::{discover_pairs, load_manifest, Discovery, ImagePair};
use super::report::{
    attach_timings, parse_results, parse_timings, render_summary_text, write_results,
    write_summary_csv, write_timings, Report, ReportMeta,
};
use crate::error::{Error, Result};
use crate::eval::{
    assemble_rows, evaluate_baseline, evaluate_method_keep, Cell, EvalRow, MethodLabel, RowStatus,
};
use crate::fusion::{fuse, FusionMethod};
use crate::image::{load_color, load_gray, psnr_from_mse, save_png, ColorImage, Plane};

pub const RESULTS_FILE: &str = "results.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const SUMMARY_CSV_FILE: &str = "summary.csv";
pub const SUMMARY_TEXT_FILE: &str = "summary.txt";

/// Writes via a sibling temporary file and a rename, so an interrupted run
/// never leaves a truncated file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug)]
pub struct FuseOutcome {
    pub seconds: f64,
    pub width: usize,
    pub height: usize,
    pub clamped: usize,
}

pub fn run_fuse(rgb: &Path, nir: &Path, method: &FusionMethod, out: &Path) -> Result<FuseOutcome> {
    let rgb = load_color(rgb)?;
    let nir = load_gray(nir)?;
    let start = Instant::now();
    let fused = fuse(&rgb, &nir, method)?;
    let seconds = start.elapsed().as_secs_f64();
    save_png(&fused.image, out)?;
    let (width, height) = fused.image.dims();
    Ok(FuseOutcome { seconds, width, height, clamped: fused.clamped_luma })
}

/// Every file an evaluation run reads or writes under its output directory.
#[derive(Clone, Debug)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub results: PathBuf,
    pub timings: PathBuf,
    pub summary_csv: PathBuf,
    pub summary_text: PathBuf,
    pub cache: PathBuf,
    pub images: PathBuf,
}

impl OutputPaths {
    pub fn new(dir: &Path, config_hash: &str) -> Self {
        Self {
            dir: dir.to_path_buf(),
            results: dir.join(RESULTS_FILE),
            timings: dir.join(TIMINGS_FILE),
            summary_csv: dir.join(SUMMARY_CSV_FILE),
            summary_text: dir.join(SUMMARY_TEXT_FILE),
            cache: dir.join("cache").join(config_hash),
            images: dir.join("images"),
        }
    }
}

/// File-name-safe encoding of an image id: anything outside
/// `[A-Za-z0-9._-]` becomes `%XX`.
pub fn encode_id(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for b in id.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

fn cell_name(id: &str, label: MethodLabel) -> String {
    format!("{}__{}", encode_id(id), label)
}

/// Cached measurements; PSNR is re-derived from MSE on load.
#[derive(Serialize, Deserialize)]
struct CachedCell {
    image_id: String,
    method: String,
    config_hash: String,
    counts: Vec<u64>,
    mse: f64,
    fuse_time: f64,
    clamped: u64,
}

struct CellCache<'a> {
    dir: &'a Path,
    hash: &'a str,
}

impl CellCache<'_> {
    fn path(&self, id: &str, label: MethodLabel) -> PathBuf {
        self.dir.join(format!("{}.json", cell_name(id, label)))
    }

    fn load(&self, id: &str, label: MethodLabel) -> Option<Cell> {
        let bytes = std::fs::read(self.path(id, label)).ok()?;
        let c: CachedCell = match serde_json::from_slice(&bytes) {
            Ok(c) => c,
            Err(e) => {
                warn!("{id} {label}: ignoring unreadable cache entry: {e}");
                return None;
            }
        };
        if c.image_id != id || c.method != label.as_str() || c.config_hash != self.hash {
            warn!("{id} {label}: ignoring cache entry written for another cell");
            return None;
        }
        Some(Cell {
            counts: c.counts,
            psnr: psnr_from_mse(c.mse),
            mse: c.mse,
            fuse_time: c.fuse_time,
            clamped: c.clamped,
        })
    }

    fn store(&self, id: &str, label: MethodLabel, cell: &Cell) {
        let c = CachedCell {
            image_id: id.to_string(),
            method: label.to_string(),
            config_hash: self.hash.to_string(),
            counts: cell.counts.clone(),
            mse: cell.mse,
            fuse_time: cell.fuse_time,
            clamped: cell.clamped,
        };
        let result = serde_json::to_vec(&c)
            .map_err(|e| Error::Report(e.to_string()))
            .and_then(|bytes| write_atomic(&self.path(id, label), &bytes));
        if let Err(e) = result {
            warn!("{id} {label}: could not write cache entry: {e}");
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvalOutcome {
    pub report: Report,
    pub paths: OutputPaths,
    pub pairs: usize,
    /// Pairs for which not a single row could be evaluated.
    pub failed_pairs: usize,
    pub cached_cells: usize,
    pub warnings: Vec<String>,
}

impl EvalOutcome {
    pub fn all_failed(&self) -> bool {
        self.failed_pairs == self.pairs
    }

    pub fn has_failures(&self) -> bool {
        self.report.failed_rows() > 0
    }
}

/// Pairs from the manifest if one is configured, otherwise by suffix under
/// `dataset_root`.
pub fn discover(cfg: &RunConfig) -> Result<Discovery> {
    match (&cfg.manifest, &cfg.dataset_root) {
        (Some(m), root) => load_manifest(m, root.as_deref()),
        (None, Some(root)) => discover_pairs(root),
        (None, None) => Err(Error::Config("no dataset_root or manifest given".into())),
    }
}

fn load_pair(pair: &ImagePair) -> Result<(ColorImage, Plane)> {
    let rgb = load_color(&pair.rgb)?;
    let nir = load_gray(&pair.nir)?;
    if rgb.dims() != nir.dims() {
        return Err(Error::shape(rgb.dims(), nir.dims()));
    }
    Ok((rgb, nir))
}

struct PairResult {
    rows: Vec<EvalRow>,
    cached: usize,
}

fn evaluate_one(pair: &ImagePair, cfg: &RunConfig, methods: &[FusionMethod], cache: &CellCache, images: &Path) -> PairResult {
    let labels: Vec<MethodLabel> = std::iter::once(MethodLabel::Rgb)
        .chain(methods.iter().map(|m| MethodLabel::Fusion(m.tag)))
        .collect();
    let image_path = |label: MethodLabel| images.join(format!("{}.png", cell_name(&pair.id, label)));
    let needs_work = |label: MethodLabel| {
        cfg.emit_images && label != MethodLabel::Rgb && !image_path(label).is_file()
    };

    let mut cells: Vec<Option<Cell>> = labels
        .iter()
        .map(|&l| if needs_work(l) { None } else { cache.load(&pair.id, l) })
        .collect();
    let cached = cells.iter().filter(|c| c.is_some()).count();

    let results: Vec<std::result::Result<Cell, String>> = if cached == labels.len() {
        cells.drain(..).map(|c| Ok(c.expect("all cached"))).collect()
    } else {
        match load_pair(pair) {
            Err(e) => {
                warn!("{}: {e}", pair.id);
                labels.iter().map(|_| Err(e.to_string())).collect()
            }
            Ok((rgb, nir)) => labels
                .par_iter()
                .zip(cells.into_par_iter())
                .map(|(&label, hit)| {
                    if let Some(cell) = hit {
                        return Ok(cell);
                    }
                    let computed = match label {
                        MethodLabel::Rgb => evaluate_baseline(&rgb, &cfg.transforms, &cfg.features),
                        MethodLabel::Fusion(tag) => {
                            let m = methods.iter().find(|m| m.tag == tag).expect("label from methods");
                            evaluate_method_keep(&rgb, &nir, m, &cfg.transforms, &cfg.features).and_then(
                                |(cell, img)| {
                                    if cfg.emit_images {
                                        let path = image_path(label);
                                        if let Some(dir) = path.parent() {
                                            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                                        }
                                        save_png(&img, &path)?;
                                    }
                                    Ok(cell)
                                },
                            )
                        }
                    };
                    match computed {
                        Ok(cell) => {
                            cache.store(&pair.id, label, &cell);
                            Ok(cell)
                        }
                        Err(e) => {
                            warn!("{} {label}: {e}", pair.id);
                            Err(e.to_string())
                        }
                    }
                })
                .collect(),
        }
    };
    let mut results = results.into_iter();
    let baseline = results.next().expect("baseline cell");
    let method_cells: Vec<_> = labels[1..].iter().copied().zip(results).collect();
    debug!("{}: evaluated ({cached} cached)", pair.id);
    PairResult { rows: assemble_rows(&pair.id, &baseline, &method_cells), cached }
}

/// Evaluates every discovered pair and writes results, timings and summaries
/// under `cfg.output_dir`. Per-pair failures become `failed` rows.
pub fn run_eval(cfg: &RunConfig) -> Result<EvalOutcome> {
    cfg.validate()?;
    if cfg.methods.is_empty() {
        return Err(Error::Config("no methods selected".into()));
    }
    let discovery = discover(cfg)?;
    for w in &discovery.warnings {
        warn!("{w}");
    }
    let hash = cfg.config_hash();
    let paths = OutputPaths::new(&cfg.output_dir, &hash);
    std::fs::create_dir_all(&paths.cache).map_err(|e| Error::io(&paths.cache, e))?;
    let cache = CellCache { dir: &paths.cache, hash: &hash };
    let methods = cfg.fusion_methods();
    info!(
        "evaluating {} pairs x {} methods on {} threads (config {hash})",
        discovery.pairs.len(),
        methods.len(),
        cfg.threads
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let per_pair: Vec<PairResult> = pool.install(|| {
        discovery
            .pairs
            .par_iter()
            .map(|pair| evaluate_one(pair, cfg, &methods, &cache, &paths.images))
            .collect()
    });

    let failed_pairs = per_pair
        .iter()
        .filter(|p| p.rows.iter().all(|r| r.status == RowStatus::Failed))
        .count();
    let cached_cells = per_pair.iter().map(|p| p.cached).sum();
    let rows: Vec<EvalRow> = per_pair.into_iter().flat_map(|p| p.rows).collect();
    let report = Report {
        meta: ReportMeta {
            config_hash: hash,
            version: env!("CARGO_PKG_VERSION").to_string(),
            generated_unix: SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs()),
        },
        transforms: cfg.transforms.clone(),
        methods: methods.iter().map(|m| MethodLabel::Fusion(m.tag)).collect(),
        external: cfg.external_methods.clone(),
        rows,
    };
    write_report_files(&report, &paths)?;
    Ok(EvalOutcome {
        report,
        pairs: discovery.pairs.len(),
        failed_pairs,
        cached_cells,
        warnings: discovery.warnings,
        paths,
    })
}

pub fn write_report_files(report: &Report, paths: &OutputPaths) -> Result<()> {
    write_atomic(&paths.results, write_results(report)?.as_bytes())?;
    write_atomic(&paths.timings, write_timings(report)?.as_bytes())?;
    write_atomic(&paths.summary_csv, write_summary_csv(report)?.as_bytes())?;
    write_atomic(&paths.summary_text, render_summary_text(report).as_bytes())
}

/// Reloads a results file, plus `timings.csv` next to it when present.
pub fn load_report(results: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(results).map_err(|e| Error::io(results, e))?;
    let mut report = parse_results(&text)?;
    let timings = results.with_file_name(TIMINGS_FILE);
    match std::fs::read_to_string(&timings) {
        Ok(t) => {
            let (meta, table) = parse_timings(&t)?;
            if meta.config_hash != report.meta.config_hash {
                warn!(
                    "{} was written for config {}, results for {}",
                    timings.display(),
                    meta.config_hash,
                    report.meta.config_hash
                );
            }
            attach_timings(&mut report, &table);
        }
        Err(_) => {
            warn!("no {} next to {}; times left blank", TIMINGS_FILE, results.display());
            attach_timings(&mut report, &Default::default());
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_encoding_is_safe_and_injective() {
        assert_eq!(encode_id("country/0001"), "country%2F0001");
        assert_eq!(encode_id("../x"), "..%2Fx");
        assert_ne!(encode_id("a/b"), encode_id("a%2Fb"));
    }

    #[test]
    fn atomic_write_creates_parents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b/c.txt");
        write_atomic(&p, b"hi").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"hi");
        assert!(!dir.path().join("a/b/c.txt.partial").exists());
    }

    #[test]
    fn cache_round_trip_and_key_check() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CellCache { dir: dir.path(), hash: "h1" };
        let label = MethodLabel::Rgb;
        let cell = Cell { counts: vec![1, 2], psnr: f64::INFINITY, mse: 0.0, fuse_time: 0.0, clamped: 0 };
        cache.store("x/1", label, &cell);
        assert_eq!(cache.load("x/1", label), Some(cell));
        let other = CellCache { dir: dir.path(), hash: "h2" };
        assert_eq!(other.load("x/1", label), None);
        std::fs::write(cache.path("x/1", label), b"{broken").unwrap();
        assert_eq!(cache.load("x/1", label), None);
    }

    #[test]
    fn discover_needs_a_source() {
        let cfg = RunConfig::default();
        assert!(matches!(discover(&cfg), Err(Error::Config(_))));
    }
}
