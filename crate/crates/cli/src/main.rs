//! `memeco`: scan a corpus, compute meme ecology tables, generate synthetic corpora.
//!
//! Exit codes:
//!   0  every requested output was written
//!   1  unexpected failure
//!   2  usage, configuration or file access error (the message names the path)
//!   3  count cache is from another format version or is corrupt; re-scan
//!   4  the data cannot support the request (e.g. no eligible background words)

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use memeco::pipeline::{self, RunConfig, CACHE_FILE};
use memeco::Error;

#[derive(Parser)]
#[command(name = "memeco", version, about = "Meme ecology metrics over community text corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count phrase and background occurrences into a cache.
    Scan(Options),
    /// Compute every metric table from a cache.
    Metrics(Options),
    /// Metrics plus a human-readable summary.txt.
    Report(Options),
    /// Generate a synthetic corpus from a JSON plant spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "synth")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Options {
    /// key = value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input file or directory (NDJSON, optionally gzip). Repeatable.
    #[arg(long)]
    input: Vec<PathBuf>,
    #[arg(long)]
    phrases: Option<PathBuf>,
    /// Fixed background word list, one word per line.
    #[arg(long)]
    background: Option<PathBuf>,
    /// Size of the sampled background set when no list is given.
    #[arg(long)]
    background_sample: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// START..END, each YYYY-MM-DD or a day index.
    #[arg(long)]
    window: Option<String>,
    /// Lifespan threshold. Repeatable.
    #[arg(long)]
    alpha: Vec<f64>,
    #[arg(long)]
    peak_window: Option<usize>,
    #[arg(long)]
    gap_tolerance: Option<usize>,
    #[arg(long)]
    bins_per_decade: Option<u32>,
    /// all | per-document
    #[arg(long)]
    count_mode: Option<String>,
    /// restart | global
    #[arg(long)]
    mrr_mode: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    shards: Option<usize>,
    /// Cache to read; defaults to <out>/counts.mec.
    #[arg(long)]
    cache: Option<PathBuf>,
}

impl Options {
    fn into_config(self) -> memeco::Result<(RunConfig, Option<PathBuf>)> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            cfg.apply_file(&text)?;
        }
        if !self.input.is_empty() {
            cfg.inputs = self.input;
        }
        let mut set = |key: &str, value: Option<String>| match value {
            Some(v) => cfg.set(key, &v),
            None => Ok(()),
        };
        let s = |p: Option<PathBuf>| p.map(|p| p.display().to_string());
        set("phrases", s(self.phrases))?;
        set("background", s(self.background))?;
        set("background-sample", self.background_sample.map(|v| v.to_string()))?;
        set("min-count", self.min_count.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("window", self.window)?;
        set("peak-window", self.peak_window.map(|v| v.to_string()))?;
        set("gap-tolerance", self.gap_tolerance.map(|v| v.to_string()))?;
        set("bins-per-decade", self.bins_per_decade.map(|v| v.to_string()))?;
        set("count-mode", self.count_mode)?;
        set("mrr-mode", self.mrr_mode)?;
        set("out", s(self.out))?;
        set("shards", self.shards.map(|v| v.to_string()))?;
        if !self.alpha.is_empty() {
            cfg.alphas = self.alpha;
        }
        cfg.validate()?;
        Ok((cfg, self.cache))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CacheVersion(_) | Error::CacheCorrupt(_) => 3,
        Error::EmptyVocabulary
        | Error::BackgroundEmpty
        | Error::NoPeak
        | Error::Insufficient(_)
        | Error::ZeroVariance(_) => 4,
        Error::Io { .. }
        | Error::InputIo { .. }
        | Error::InvalidArgument(_)
        | Error::Window(_)
        | Error::Spec { .. }
        | Error::PhraseLoad { .. }
        | Error::Parse { .. }
        | Error::Validation { .. } => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> memeco::Result<()> {
    match cli.command {
        Command::Scan(opts) => {
            let (cfg, _) = opts.into_config()?;
            let s = pipeline::cmd_scan(&cfg)?;
            println!(
                "scanned {} documents ({} skipped), {} tokens in {:.1}s; cache at {}",
                s.documents,
                s.skipped,
                s.tokens,
                s.seconds,
                cfg.out.join(CACHE_FILE).display()
            );
        }
        Command::Metrics(opts) => {
            let (cfg, cache) = opts.into_config()?;
            let cache = cache.unwrap_or_else(|| cfg.out.join(CACHE_FILE));
            let m = pipeline::cmd_metrics(&cfg, &cache)?;
            println!("wrote {} tables to {}", m.tables.len(), cfg.out.display());
        }
        Command::Report(opts) => {
            let (cfg, cache) = opts.into_config()?;
            let cache = cache.unwrap_or_else(|| cfg.out.join(CACHE_FILE));
            let m = pipeline::cmd_report(&cfg, &cache)?;
            println!(
                "wrote {} tables and summary.txt to {}",
                m.tables.len(),
                cfg.out.display()
            );
        }
        Command::Synth { spec, out } => {
            let s = pipeline::cmd_synth(&spec, &out)?;
            println!(
                "generated {} documents with {} planted phrases into {}",
                s.documents,
                s.phrases,
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
