use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::warn;

use nirfuse_core::fusion::{FusionMethod, FusionTag};
use nirfuse_core::harness::report::{render_summary_text, write_summary_csv};
use nirfuse_core::harness::run::{write_atomic, SUMMARY_CSV_FILE, SUMMARY_TEXT_FILE};
use nirfuse_core::harness::{load_report, parse_config, run_eval, run_fuse, RunConfig};
use nirfuse_core::Error;

const EXIT_PARTIAL: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "nirfuse", version, about = "Visible/NIR image fusion and feature-stability evaluation")]
struct Cli {
    /// Log progress (repeat for debug output). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fuse one RGB/NIR pair and write the result as PNG.
    Fuse(FuseArgs),
    /// Evaluate fusion methods over a dataset and write reports.
    Eval(EvalArgs),
    /// Re-render summaries from an existing results.csv.
    Report(ReportArgs),
}

#[derive(Args)]
struct Settings {
    /// Flat key/value TOML file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set lambda=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct FuseArgs {
    /// Visible image (PNG, JPEG or TIFF).
    #[arg(long)]
    rgb: PathBuf,
    /// Near-infrared image with the same dimensions.
    #[arg(long)]
    nir: PathBuf,
    /// BFWLS_AVG, BFWLS_MAX, SWAP_BF or SWAP_WLS.
    #[arg(long, default_value = "BFWLS_AVG")]
    method: FusionTag,
    /// Output PNG path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct EvalArgs {
    /// Dataset root holding `<stem>_rgb.*` / `<stem>_nir.*` pairs.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// CSV of `id,rgb,nir` rows used instead of suffix discovery.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Comma-separated method tags.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Where reports, cache and images go [default: nirfuse-out].
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads [default: available cores].
    #[arg(long, env = "NIRFUSE_THREADS")]
    threads: Option<usize>,
    /// Also write every fused image under <out-dir>/images.
    #[arg(long)]
    emit_images: bool,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct ReportArgs {
    /// A results.csv written by `eval`; timings.csv is read from beside it.
    #[arg(long)]
    from: PathBuf,
    /// Also write summary.csv and summary.txt into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn load_settings(s: &Settings) -> nirfuse_core::Result<RunConfig> {
    parse_config(s.config.as_deref(), &s.set)
}

fn fuse_cmd(args: FuseArgs) -> nirfuse_core::Result<ExitCode> {
    let cfg = load_settings(&args.settings)?;
    let method = FusionMethod {
        bf: cfg.bf,
        wls: cfg.wls,
        max_rule: cfg.max_rule,
        ..FusionMethod::new(args.method)
    };
    let out = run_fuse(&args.rgb, &args.nir, &method, &args.out)?;
    println!(
        "{}: {}x{} fused in {:.3} s -> {}",
        args.method,
        out.width,
        out.height,
        out.seconds,
        args.out.display()
    );
    if out.clamped > 0 {
        warn!("{} luminance samples clamped into [0, 1]", out.clamped);
    }
    Ok(ExitCode::SUCCESS)
}

fn eval_cmd(args: EvalArgs) -> nirfuse_core::Result<ExitCode> {
    // explicit flags beat both the config file and --set
    let mut cfg = load_settings(&args.settings)?;
    if let Some(d) = args.dataset {
        cfg.dataset_root = Some(d);
    }
    if let Some(m) = args.manifest {
        cfg.manifest = Some(m);
    }
    if !args.methods.is_empty() {
        let mut tags: Vec<FusionTag> = Vec::new();
        for m in &args.methods {
            let tag = m.parse()?;
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }
        cfg.methods = tags;
    }
    if let Some(o) = args.out_dir {
        cfg.output_dir = o;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    cfg.emit_images |= args.emit_images;
    cfg.validate()?;
    let outcome = run_eval(&cfg)?;
    print!("{}", render_summary_text(&outcome.report));
    println!(
        "{} pairs, {} failed, {} cached cells reused; results in {}",
        outcome.pairs,
        outcome.failed_pairs,
        outcome.cached_cells,
        outcome.paths.dir.display()
    );
    if outcome.all_failed() {
        eprintln!("error: every pair failed");
        return Ok(ExitCode::from(EXIT_PARTIAL));
    }
    if outcome.has_failures() {
        eprintln!("warning: {} rows failed; see the error column of results.csv", outcome.report.failed_rows());
        return Ok(ExitCode::from(EXIT_PARTIAL));
    }
    Ok(ExitCode::SUCCESS)
}

fn report_cmd(args: ReportArgs) -> nirfuse_core::Result<ExitCode> {
    let report = load_report(&args.from)?;
    let text = render_summary_text(&report);
    print!("{text}");
    if let Some(dir) = &args.out_dir {
        write_atomic(&dir.join(SUMMARY_CSV_FILE), write_summary_csv(&report)?.as_bytes())?;
        write_atomic(&dir.join(SUMMARY_TEXT_FILE), text.as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Fuse(a) => fuse_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Report(a) => report_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_invalid(&e) {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::from(EXIT_PARTIAL)
            }
        }
    }
}

fn is_invalid(e: &Error) -> bool {
    e.is_invalid_input() || matches!(e, Error::Report(_))
}
