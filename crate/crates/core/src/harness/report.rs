//! Report files: per-row results CSV, timings CSV, and the per-method
//! summary in CSV and aligned-text form.
//!
//! Wall times live in their own file so that `results.csv` is a pure
//! function of dataset and configuration.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::eval::{EvalRow, MethodLabel, RowStatus, Transform};

pub const RESULTS_HEADER: &str = "# nirfuse results v1";
pub const TIMINGS_HEADER: &str = "# nirfuse timings v1";

const HASH_KEY: &str = "config_hash";
const VERSION_KEY: &str = "version";
const GENERATED_KEY: &str = "generated_unix";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReportMeta {
    pub config_hash: String,
    pub version: String,
    /// Seconds since the epoch; the one line that differs between reruns.
    pub generated_unix: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub meta: ReportMeta,
    pub transforms: Vec<Transform>,
    /// Fusion methods in column order.
    pub methods: Vec<MethodLabel>,
    /// Summary columns reserved for numbers produced elsewhere.
    pub external: Vec<String>,
    pub rows: Vec<EvalRow>,
}

/// Per-method means. `fused` rows (fusion succeeded) feed time/PSNR/MSE;
/// only rows with status `ok` feed the relative change, the rest are
/// counted in `excluded`.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub method: MethodLabel,
    pub rel_change: Option<f64>,
    pub time: Option<f64>,
    pub psnr: Option<f64>,
    pub mse: Option<f64>,
    pub fused: usize,
    pub excluded: usize,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn aggregate(rows: &[EvalRow], methods: &[MethodLabel]) -> Vec<Aggregate> {
    methods
        .iter()
        .map(|&method| {
            let mine: Vec<&EvalRow> = rows.iter().filter(|r| r.method == method).collect();
            let fused: Vec<&EvalRow> = mine
                .iter()
                .copied()
                .filter(|r| r.status != RowStatus::Failed)
                .collect();
            let ok: Vec<f64> = mine
                .iter()
                .filter(|r| r.status == RowStatus::Ok)
                .filter_map(|r| r.rel_change)
                .collect();
            Aggregate {
                method,
                rel_change: mean(ok.iter().copied()),
                time: mean(fused.iter().map(|r| r.fuse_time).filter(|t| t.is_finite())),
                psnr: mean(fused.iter().map(|r| r.psnr)),
                mse: mean(fused.iter().map(|r| r.mse)),
                fused: fused.len(),
                excluded: mine.len() - ok.len(),
            }
        })
        .collect()
}

impl Report {
    pub fn aggregate(&self) -> Vec<Aggregate> {
        aggregate(&self.rows, &self.methods)
    }

    /// Rows whose evaluation failed outright.
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.status == RowStatus::Failed).count()
    }
}

/// Fusion methods in order of first appearance.
pub fn methods_in(rows: &[EvalRow]) -> Vec<MethodLabel> {
    let mut out = Vec::new();
    for r in rows {
        if r.method != MethodLabel::Rgb && !out.contains(&r.method) {
            out.push(r.method);
        }
    }
    out
}

/// Shortest round-trip representation; NaN is written as an empty cell.
fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

fn parse_num(field: &str, what: &str) -> Result<f64> {
    if field.is_empty() {
        return Ok(f64::NAN);
    }
    field
        .parse()
        .map_err(|_| Error::Report(format!("bad {what} value {field:?}")))
}

fn meta_lines(magic: &str, meta: &ReportMeta) -> String {
    let mut s = format!("{magic}\n# {HASH_KEY}={}\n# {VERSION_KEY}={}\n", meta.config_hash, meta.version);
    if let Some(t) = meta.generated_unix {
        let _ = writeln!(s, "# {GENERATED_KEY}={t}");
    }
    s
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(mut head: String, w: csv::Writer<Vec<u8>>) -> Result<String> {
    let body = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    head.push_str(std::str::from_utf8(&body).map_err(|e| Error::Report(e.to_string()))?);
    Ok(head)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Report(e.to_string())
}

pub fn write_results(report: &Report) -> Result<String> {
    let mut w = csv_writer();
    let mut header: Vec<String> = ["image_id", "method", "status"].map(String::from).to_vec();
    header.extend(report.transforms.iter().map(|t| t.as_str().to_string()));
    header.extend(["total", "rel_change", "psnr", "mse", "clamped", "error"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for r in &report.rows {
        let mut rec = vec![r.image_id.clone(), r.method.to_string(), r.status.as_str().to_string()];
        if r.counts.is_empty() {
            rec.extend(report.transforms.iter().map(|_| String::new()));
            rec.push(String::new());
        } else {
            rec.extend(r.counts.iter().map(u64::to_string));
            rec.push(r.total_matches().to_string());
        }
        rec.push(r.rel_change.map(num).unwrap_or_default());
        rec.push(num(r.psnr));
        rec.push(num(r.mse));
        rec.push(r.clamped.to_string());
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(meta_lines(RESULTS_HEADER, &report.meta), w)
}

pub fn write_timings(report: &Report) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["image_id", "method", "fuse_time"]).map_err(csv_err)?;
    for r in report.rows.iter().filter(|r| r.method != MethodLabel::Rgb) {
        w.write_record([r.image_id.as_str(), r.method.as_str(), &num(r.fuse_time)])
            .map_err(csv_err)?;
    }
    finish(meta_lines(TIMINGS_HEADER, &report.meta), w)
}

/// Splits leading `#` lines from the CSV body and reads `key=value` pairs.
fn split_meta<'a>(text: &'a str, magic: &str) -> Result<(ReportMeta, &'a str)> {
    let mut meta = ReportMeta::default();
    let mut rest = text;
    let mut seen_magic = false;
    while !rest.is_empty() {
        let (line, tail) = rest.split_once('\n').unwrap_or((rest, ""));
        let line = line.trim_end_matches('\r');
        let Some(comment) = line.strip_prefix('#') else { break };
        if line == magic {
            seen_magic = true;
        } else if let Some((k, v)) = comment.trim().split_once('=') {
            match k.trim() {
                HASH_KEY => meta.config_hash = v.trim().to_string(),
                VERSION_KEY => meta.version = v.trim().to_string(),
                GENERATED_KEY => {
                    meta.generated_unix = Some(v.trim().parse().map_err(|_| {
                        Error::Report(format!("bad {GENERATED_KEY} value {v:?}"))
                    })?)
                }
                _ => {}
            }
        }
        rest = tail;
    }
    if !seen_magic {
        return Err(Error::Report(format!("missing {magic:?} header line")));
    }
    Ok((meta, rest))
}

fn reader(body: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes())
}

/// Parses a results file back into a [`Report`] with zero fuse times; merge
/// [`parse_timings`] output with [`attach_timings`].
pub fn parse_results(text: &str) -> Result<Report> {
    let (meta, body) = split_meta(text, RESULTS_HEADER)?;
    let mut rdr = reader(body);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let n = header.len();
    let fixed_head = ["image_id", "method", "status"];
    let fixed_tail = ["total", "rel_change", "psnr", "mse", "clamped", "error"];
    if n < fixed_head.len() + fixed_tail.len()
        || !header.iter().take(3).eq(fixed_head)
        || !header.iter().skip(n - fixed_tail.len()).eq(fixed_tail)
    {
        return Err(Error::Report("unexpected results header".into()));
    }
    let transforms = header
        .iter()
        .skip(3)
        .take(n - 3 - fixed_tail.len())
        .map(|s| s.parse::<Transform>().map_err(|e| Error::Report(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let k = transforms.len();

    let mut rows = Vec::new();
    for record in rdr.records() {
        let rec = record.map_err(csv_err)?;
        if rec.len() != n {
            return Err(Error::Report(format!("row has {} fields, header has {n}", rec.len())));
        }
        let method: MethodLabel = rec[1].parse().map_err(|e: Error| Error::Report(e.to_string()))?;
        let status: RowStatus = rec[2].parse()?;
        let counts = if rec[3].is_empty() {
            Vec::new()
        } else {
            (3..3 + k)
                .map(|i| {
                    rec[i]
                        .parse::<u64>()
                        .map_err(|_| Error::Report(format!("bad count {:?}", &rec[i])))
                })
                .collect::<Result<Vec<_>>>()?
        };
        let total = &rec[3 + k];
        if !total.is_empty() {
            let t: u64 = total.parse().map_err(|_| Error::Report(format!("bad total {total:?}")))?;
            if counts.iter().try_fold(0u64, |a, &c| a.checked_add(c)) != Some(t) {
                return Err(Error::Report(format!("total {t} disagrees with counts in row {}", &rec[0])));
            }
        }
        let rel = &rec[4 + k];
        rows.push(EvalRow {
            image_id: rec[0].to_string(),
            method,
            status,
            counts,
            rel_change: if rel.is_empty() { None } else { Some(parse_num(rel, "rel_change")?) },
            psnr: parse_num(&rec[5 + k], "psnr")?,
            mse: parse_num(&rec[6 + k], "mse")?,
            fuse_time: 0.0,
            clamped: rec[7 + k]
                .parse()
                .map_err(|_| Error::Report(format!("bad clamped count {:?}", &rec[7 + k])))?,
            error: Some(rec[8 + k].to_string()).filter(|e| !e.is_empty()),
        });
    }
    Ok(Report {
        meta,
        transforms,
        methods: methods_in(&rows),
        external: Vec::new(),
        rows,
    })
}

pub type Timings = HashMap<(String, String), f64>;

pub fn parse_timings(text: &str) -> Result<(ReportMeta, Timings)> {
    let (meta, body) = split_meta(text, TIMINGS_HEADER)?;
    let mut rdr = reader(body);
    if !rdr.headers().map_err(csv_err)?.iter().eq(["image_id", "method", "fuse_time"]) {
        return Err(Error::Report("unexpected timings header".into()));
    }
    let mut out = HashMap::new();
    for record in rdr.records() {
        let rec = record.map_err(csv_err)?;
        if rec.len() != 3 {
            return Err(Error::Report("timings row must have 3 fields".into()));
        }
        out.insert((rec[0].to_string(), rec[1].to_string()), parse_num(&rec[2], "fuse_time")?);
    }
    Ok((meta, out))
}

/// Fills in fuse times; rows absent from `timings` get NaN (excluded from
/// the time mean).
pub fn attach_timings(report: &mut Report, timings: &Timings) {
    for r in report.rows.iter_mut().filter(|r| r.method != MethodLabel::Rgb) {
        r.fuse_time = timings
            .get(&(r.image_id.clone(), r.method.to_string()))
            .copied()
            .unwrap_or(f64::NAN);
    }
}

const METRICS: [(&str, &str); 6] = [
    ("rel_change_pct", "Rel. Change (%)"),
    ("time_sec", "Time (Sec)"),
    ("psnr_db", "PSNR"),
    ("mse", "MSE (1e-4)"),
    ("images", "Images"),
    ("excluded", "Excluded"),
];

fn metric_values(a: &Aggregate) -> [Option<f64>; 6] {
    [
        a.rel_change,
        a.time,
        a.psnr,
        a.mse,
        Some(a.fused as f64),
        Some(a.excluded as f64),
    ]
}

pub fn write_summary_csv(report: &Report) -> Result<String> {
    let aggs = report.aggregate();
    let mut w = csv_writer();
    let mut header = vec!["metric".to_string()];
    header.extend(aggs.iter().map(|a| a.method.to_string()));
    header.extend(report.external.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (i, (key, _)) in METRICS.iter().enumerate() {
        let mut rec = vec![key.to_string()];
        rec.extend(aggs.iter().map(|a| metric_values(a)[i].map(num).unwrap_or_default()));
        rec.extend(report.external.iter().map(|_| String::new()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let head = format!("# {HASH_KEY}={}\n", report.meta.config_hash);
    finish(head, w)
}

/// Aligned text table: one row per metric, one column per method.
pub fn render_summary_text(report: &Report) -> String {
    let aggs = report.aggregate();
    let mut header = vec!["Metric (Average)".to_string()];
    header.extend(aggs.iter().map(|a| a.method.to_string()));
    header.extend(report.external.iter().cloned());
    let mut table = vec![header];
    for (i, (key, label)) in METRICS.iter().enumerate() {
        let mut line = vec![label.to_string()];
        for a in &aggs {
            let cell = match metric_values(a)[i] {
                None => "-".to_string(),
                Some(v) if *key == "images" || *key == "excluded" => format!("{v}"),
                Some(v) if *key == "mse" => format!("{:.2}", v * 1e4),
                Some(v) => format!("{v:.2}"),
            };
            line.push(cell);
        }
        line.extend(report.external.iter().map(|_| "-".to_string()));
        table.push(line);
    }
    let widths: Vec<usize> = (0..table[0].len())
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = format!("# {HASH_KEY}={}\n", report.meta.config_hash);
    for row in &table {
        let mut line = format!("{:<w$}", row[0], w = widths[0]);
        for (cell, w) in row.iter().zip(&widths).skip(1) {
            let _ = write!(line, "  {cell:>w$}");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
