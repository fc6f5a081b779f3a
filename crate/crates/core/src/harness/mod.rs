//! Batch harness: configuration, dataset discovery, orchestration and
//! report files.

pub mod config;
pub mod dataset;
pub mod report;
pub mod run;

pub use config::{parse_config, parse_config_str, parse_override, RunConfig};
pub use dataset::{discover_pairs, load_manifest, parse_manifest, Discovery, ImagePair};
pub use report::{aggregate, parse_results, parse_timings, Aggregate, Report, ReportMeta};
pub use run::{load_report, run_eval, run_fuse, EvalOutcome, FuseOutcome, OutputPaths};
