//! End-to-end commands: scan a corpus into a count cache, derive every metric
//! table from the cache, generate synthetic corpora, and write a text report.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::corpus::{activity_from_counts, collect_inputs, for_each_token, parse_record, to_record, LineBatches};
use crate::dynamics::{self, VelocityKind, DEFAULT_PEAK_WINDOW};
use crate::ecology::{self, Lifespan, LifespanParams, DEFAULT_ALPHAS};
use crate::innovation::{self, MrrMode};
use crate::matcher::{read_cache, write_cache, write_csv, CountCache, CountMode, Matcher, Scanner};
use crate::par;
use crate::phraseset::{load_background, load_phrases, sample_background, DEFAULT_BACKGROUND_SIZE, DEFAULT_MIN_COUNT};
use crate::series::{self, background_series, daily_series, normalize, DailySeries, NormalizedSeries};
use crate::stats::TrendFit;
use crate::synth::{self, PlantSpec};
use crate::time::{Day, Window};
use crate::{Error, Result};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CACHE_FILE: &str = "counts.mec";
pub const DEFAULT_BINS_PER_DECADE: u32 = 10;
const BATCH_LINES: usize = 65_536;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub phrases: Option<PathBuf>,
    /// Fixed background word list; sampled from the corpus when absent.
    pub background: Option<PathBuf>,
    pub background_sample: usize,
    pub min_count: u64,
    pub seed: u64,
    /// Defaults to the corpus day span.
    pub window: Option<Window>,
    pub alphas: Vec<f64>,
    pub peak_window: usize,
    pub gap_tolerance: usize,
    pub bins_per_decade: u32,
    pub count_mode: CountMode,
    pub mrr_mode: MrrMode,
    pub out: PathBuf,
    pub shards: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            phrases: None,
            background: None,
            background_sample: DEFAULT_BACKGROUND_SIZE,
            min_count: DEFAULT_MIN_COUNT,
            seed: 0,
            window: None,
            alphas: DEFAULT_ALPHAS.to_vec(),
            peak_window: DEFAULT_PEAK_WINDOW,
            gap_tolerance: 0,
            bins_per_decade: DEFAULT_BINS_PER_DECADE,
            count_mode: CountMode::All,
            mrr_mode: MrrMode::Restart,
            out: PathBuf::from("out"),
            shards: default_shards(),
        }
    }
}

pub fn default_shards() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse `{value}`")))
}

impl RunConfig {
    /// Sets one option by its long flag name (without dashes). `alpha` and
    /// `input` accept comma-separated lists and replace any earlier value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "input" => self.inputs = value.split(',').map(|s| PathBuf::from(s.trim())).collect(),
            "phrases" => self.phrases = Some(value.into()),
            "background" => self.background = Some(value.into()),
            "background-sample" => self.background_sample = parse_num(key, value)?,
            "min-count" => self.min_count = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "window" => self.window = Some(Window::parse(value)?),
            "alpha" => {
                self.alphas = value
                    .split(',')
                    .map(|a| parse_num(key, a))
                    .collect::<Result<_>>()?
            }
            "peak-window" => self.peak_window = parse_num(key, value)?,
            "gap-tolerance" => self.gap_tolerance = parse_num(key, value)?,
            "bins-per-decade" => self.bins_per_decade = parse_num(key, value)?,
            "count-mode" => self.count_mode = CountMode::parse(value)?,
            "mrr-mode" => self.mrr_mode = MrrMode::parse(value)?,
            "out" => self.out = value.into(),
            "shards" => self.shards = parse_num(key, value)?,
            _ => return Err(Error::InvalidArgument(format!("unknown option `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file; `#` starts a comment line.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i as u64 + 1,
                message: format!("expected key = value, got `{line}`"),
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::InvalidArgument("at least one alpha is required".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::InvalidArgument(format!("alpha must be in (0, 1), got {a}")));
        }
        if self.peak_window == 0 {
            return Err(Error::InvalidArgument("peak window must be >= 1".into()));
        }
        if self.bins_per_decade == 0 {
            return Err(Error::InvalidArgument("bins per decade must be >= 1".into()));
        }
        Ok(())
    }

    /// SHA-256 over the analysis settings. Paths and shard count are left out
    /// because they do not change any output value.
    pub fn config_hash(&self) -> String {
        let canonical = format!(
            "background_sample={}\nmin_count={}\nseed={}\nwindow={}\nalphas={:?}\npeak_window={}\ngap_tolerance={}\nbins_per_decade={}\ncount_mode={}\nmrr_mode={}\n",
            self.background_sample,
            self.min_count,
            self.seed,
            self.window.map(|w| w.to_string()).unwrap_or_default(),
            self.alphas,
            self.peak_window,
            self.gap_tolerance,
            self.bins_per_decade,
            self.count_mode.as_str(),
            self.mrr_mode.as_str(),
        );
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub files: usize,
    pub documents: u64,
    pub skipped: u64,
    pub tokens: u64,
    pub phrases: usize,
    pub background_words: usize,
    pub background_short: bool,
    pub seconds: f64,
    pub docs_per_second: f64,
}

/// Token counts over every valid record, for background sampling.
fn vocabulary(files: &[PathBuf], shards: usize) -> Result<HashMap<String, u64>> {
    let mut batches = LineBatches::new(files.to_vec(), BATCH_LINES);
    let mut vocab: HashMap<String, u64> = HashMap::new();
    while let Some(batch) = batches.next_batch()? {
        let parts = par::map_shards(&batch, shards, |chunk| {
            let mut counts: HashMap<String, u64> = HashMap::new();
            let mut buf = String::new();
            for raw in chunk {
                if let Ok(doc) = parse_record(&raw.text, raw.line) {
                    for_each_token(&doc.text, &mut buf, |t| {
                        if let Some(c) = counts.get_mut(t) {
                            *c += 1;
                        } else {
                            counts.insert(t.to_owned(), 1);
                        }
                    });
                }
            }
            counts
        });
        for part in parts {
            for (w, c) in part {
                *vocab.entry(w).or_insert(0) += c;
            }
        }
    }
    Ok(vocab)
}

/// Scans the configured inputs and writes `counts.mec`, the count CSVs and `scan_summary.json`.
pub fn cmd_scan(cfg: &RunConfig) -> Result<ScanSummary> {
    let started = Instant::now();
    let phrase_path = cfg
        .phrases
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("a phrase file is required".into()))?;
    let (mut lexicon, report) = load_phrases(&read_text(phrase_path)?)?;
    for (line, label) in &report.duplicates {
        log::warn!("{}:{line}: duplicate phrase `{label}` skipped", phrase_path.display());
    }
    for (line, n) in &report.truncated {
        log::warn!("{}:{line}: {n} tokens, truncated to the first 8", phrase_path.display());
    }
    if cfg.inputs.is_empty() {
        return Err(Error::InvalidArgument("at least one input path is required".into()));
    }
    let files = collect_inputs(&cfg.inputs)?;
    let shards = cfg.shards.max(1);

    let mut short = false;
    match &cfg.background {
        Some(path) => lexicon.background = load_background(&read_text(path)?)?,
        None => {
            let sample = sample_background(&vocabulary(&files, shards)?, cfg.background_sample, cfg.min_count, cfg.seed)?;
            lexicon.background = sample.words;
            lexicon.rng_seed = Some(cfg.seed);
            short = sample.short;
        }
    }

    let matcher = Matcher::with_mode(&lexicon, cfg.count_mode);
    let mut scanner = Scanner::new(&matcher, shards);
    let mut batches = LineBatches::new(files.clone(), BATCH_LINES);
    while let Some(batch) = batches.next_batch()? {
        scanner.scan_lines(&batch);
    }
    for r in scanner.rejected() {
        log::warn!("skipped record at line {}: {}", r.line, r.message);
    }
    let (table, skipped) = scanner.finish();
    if skipped > 0 {
        log::warn!("{skipped} invalid records skipped");
    }
    let cache = CountCache {
        lexicon,
        count_mode: cfg.count_mode,
        skipped,
        table,
    };

    create_dir(&cfg.out)?;
    let cache_path = cfg.out.join(CACHE_FILE);
    let file = File::create(&cache_path).map_err(|e| Error::io(&cache_path, e))?;
    let mut w = BufWriter::new(file);
    write_cache(&cache, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&cache_path, e))?;
    write_csv(&cache, &cfg.out.join("meme_counts.csv"), &cfg.out.join("background_counts.csv"))?;

    let seconds = started.elapsed().as_secs_f64();
    let documents = cache.table.document_total();
    let summary = ScanSummary {
        files: files.len(),
        documents,
        skipped,
        tokens: cache.table.tokens(),
        phrases: cache.lexicon.phrases.len(),
        background_words: cache.lexicon.background.len(),
        background_short: short,
        seconds,
        docs_per_second: if seconds > 0.0 { documents as f64 / seconds } else { 0.0 },
    };
    let json = serde_json::to_string_pretty(&summary)?;
    write_bytes(&cfg.out.join("scan_summary.json"), (json + "\n").as_bytes())?;
    Ok(summary)
}

pub fn load_cache(path: &Path) -> Result<CountCache> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_cache(std::io::BufReader::new(file))
}

/// One output table before it is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &'static [&'static str]) -> Table {
        Table {
            name,
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner()
            .map_err(|e| Error::io(self.name, std::io::Error::other(e.to_string())))
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    table: &'a str,
    columns: &'a [&'a str],
    rows: usize,
    config_hash: &'a str,
    code_version: &'a str,
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn date(d: Day) -> String {
    d.date().to_string()
}

fn trend_row(t: &mut Table, metric: &str, alpha: Option<f64>, fit: &TrendFit) {
    t.push(vec![
        metric.into(),
        opt(alpha),
        num(fit.slope),
        num(fit.intercept),
        num(fit.pearson_r),
        num(fit.p_value),
        fit.n.to_string(),
    ]);
}

/// Everything `cmd_metrics` computes, in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub window: Window,
    pub tables: Vec<Table>,
    pub attention: Option<TrendFit>,
    pub diversity: Option<TrendFit>,
    pub lifespan: Vec<(f64, Option<TrendFit>)>,
    pub rank_shift: Vec<(i32, i32, f64, f64, usize)>,
    pub top_innovators: Vec<(i32, Vec<(String, f64)>)>,
}

impl Metrics {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

fn soft<T>(what: &str, r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (Error::Insufficient(_) | Error::BackgroundEmpty | Error::ZeroVariance(_) | Error::NoPeak)) => {
            log::info!("{what}: {e}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Computes every metric table from a cache. Pure apart from logging.
pub fn compute_metrics(cfg: &RunConfig, cache: &CountCache) -> Result<Metrics> {
    cfg.validate()?;
    let window = match cfg.window {
        Some(w) => w,
        None => cache
            .table
            .day_span()
            .ok_or_else(|| Error::Insufficient("the cache holds no documents".into()))?,
    };
    let ids: Vec<u32> = cache.lexicon.phrases.iter().map(|p| p.id).collect();
    let bg = background_series(cache, window);

    let mut activity = Table::new("activity", &["year_month", "posts", "comments", "total"]);
    let docs = cache.table.documents().iter().filter(|d| window.contains(d.day));
    for m in activity_from_counts(docs.map(|d| (d.day, d.kind, d.count))) {
        activity.push(vec![m.month.to_string(), m.posts.to_string(), m.comments.to_string(), m.total.to_string()]);
    }

    let mut background = Table::new("background", &["day", "count"]);
    for (i, v) in bg.values.iter().enumerate() {
        background.push(vec![date(window.day_at(i)), v.to_string()]);
    }

    let raw: Vec<DailySeries> = ids
        .iter()
        .map(|&p| daily_series(cache, p, window))
        .collect::<Result<_>>()?;
    let normalized: Vec<Option<NormalizedSeries>> = par::map(&raw, |f| normalize(f, &bg).ok());

    let mut series_table = Table::new("series", &["phrase_id", "day", "count", "value", "defined"]);
    for (f, n) in raw.iter().zip(&normalized) {
        for (i, &c) in f.values.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let v = n.as_ref().and_then(|n| n.values[i]);
            series_table.push(vec![
                f.phrase.to_string(),
                date(window.day_at(i)),
                c.to_string(),
                opt(v),
                v.is_some().to_string(),
            ]);
        }
    }

    let mut trends = Table::new("trends", &["metric", "alpha", "slope", "intercept", "pearson_r", "p", "n"]);

    let mut attention = Table::new("attention", &["year_month", "mean", "ci95", "n"]);
    for m in series::attention_months(cache, &ids, window)? {
        attention.push(vec![m.month.to_string(), num(m.mean), opt(m.ci95), m.n.to_string()]);
    }
    let attention_fit = soft("attention trend", series::aggregate_attention(cache, &ids, window))?.map(|r| r.trend);
    if let Some(fit) = &attention_fit {
        trend_row(&mut trends, "attention", None, fit);
    }

    let mut diversity = Table::new(
        "diversity",
        &["year_month", "mean_D", "ci95", "n_communities", "total_communities"],
    );
    let div = soft("diversity", ecology::diversity_trend(cache, window))?;
    let diversity_fit = div.as_ref().and_then(|d| d.trend);
    for m in div.iter().flat_map(|d| &d.months) {
        if let Some(mean) = m.mean_d {
            diversity.push(vec![
                m.month.to_string(),
                num(mean),
                opt(m.ci95),
                m.communities_with_d.to_string(),
                m.total_communities.to_string(),
            ]);
        }
    }
    if let Some(fit) = &diversity_fit {
        trend_row(&mut trends, "diversity", None, fit);
    }

    let mut lifespans = Table::new(
        "lifespans",
        &["phrase_id", "alpha", "start_day", "peak_day", "end_day", "length"],
    );
    let mut active = Table::new("active", &["year_month", "alpha", "active", "normalized_active"]);
    let mut lifespan_trend =
        Table::new("lifespan_trend", &["year_month", "alpha", "mean_length", "ci95", "n"]);
    let mut lifespan_fits = Vec::new();
    for &alpha in &cfg.alphas {
        let params = LifespanParams {
            alpha,
            gap_tolerance: cfg.gap_tolerance,
        };
        let lives: Vec<Lifespan> = normalized
            .iter()
            .flatten()
            .filter_map(|n| ecology::lifespan(n, params).ok())
            .collect();
        for l in &lives {
            lifespans.push(vec![
                l.phrase.to_string(),
                num(alpha),
                date(l.start),
                date(l.peak),
                date(l.end),
                l.length().to_string(),
            ]);
        }
        for m in ecology::active_series(&lives, cache, window) {
            active.push(vec![m.month.to_string(), num(alpha), m.active.to_string(), opt(m.normalized)]);
        }
        let t = soft("lifespan trend", ecology::lifespan_trend(&lives, window))?;
        if let Some(t) = &t {
            for m in &t.months {
                lifespan_trend.push(vec![
                    m.month.to_string(),
                    num(alpha),
                    num(m.mean_length),
                    opt(m.ci95),
                    m.n.to_string(),
                ]);
            }
            trend_row(&mut trends, "lifespan", Some(alpha), &t.trend);
        }
        lifespan_fits.push((alpha, t.map(|t| t.trend)));
    }

    let mut peak = Table::new("peak_aligned", &["year", "delta", "mean", "ci95", "n"]);
    for c in dynamics::peak_aligned(&raw, cfg.peak_window)? {
        for p in &c.points {
            peak.push(vec![c.year.to_string(), p.delta.to_string(), num(p.mean), opt(p.ci95), p.n.to_string()]);
        }
    }

    let mut fit_table = Table::new("velocity_fit", &["year", "kind", "mu", "sigma", "n"]);
    let mut hist_table = Table::new("velocity_hist", &["year", "kind", "bin_center", "density", "fit_density"]);
    let mut groups: BTreeMap<(i32, VelocityKind), Vec<f64>> = BTreeMap::new();
    for v in dynamics::all_velocities(&raw) {
        groups.entry((v.year, v.kind)).or_default().push(v.magnitude);
    }
    for ((year, kind), mags) in &groups {
        if let Some(f) = soft("velocity fit", dynamics::fit_lognormal(mags))? {
            fit_table.push(vec![year.to_string(), kind.as_str().into(), num(f.mu), num(f.sigma), f.n.to_string()]);
        }
        let h = dynamics::velocity_histogram(mags, cfg.bins_per_decade)?;
        for b in &h.bins {
            hist_table.push(vec![
                year.to_string(),
                kind.as_str().into(),
                num(b.center),
                num(b.density),
                opt(b.fit_density),
            ]);
        }
    }

    let entry_lists = innovation::entry_events(&cache.table, ids.len());
    let mut entries = Table::new("entries", &["phrase_id", "rank", "community", "first_use_day"]);
    for l in &entry_lists {
        for (i, e) in l.entries.iter().enumerate() {
            entries.push(vec![l.phrase.to_string(), (i + 1).to_string(), e.community.clone(), date(e.first_use)]);
        }
    }
    let mut rankings = Table::new("rankings", &["year", "rank", "community", "mrr"]);
    let mut shift = Table::new("rank_shift", &["year_pair", "tau", "p", "n_common"]);
    let years: Vec<i32> = innovation::entry_years(&entry_lists)
        .into_iter()
        .filter(|&y| y >= window.first.year() && y <= window.last.year())
        .collect();
    let ranked: Vec<_> = years
        .iter()
        .map(|&y| innovation::innovation_ranking(&entry_lists, y, cfg.mrr_mode))
        .collect();
    let mut top_innovators = Vec::new();
    for r in &ranked {
        for (i, (c, s)) in r.ranked.iter().enumerate() {
            rankings.push(vec![r.year.to_string(), (i + 1).to_string(), c.clone(), num(*s)]);
        }
        top_innovators.push((r.year, r.ranked.iter().take(10).cloned().collect()));
    }
    let mut shifts = Vec::new();
    for pair in ranked.windows(2) {
        if pair[1].year != pair[0].year + 1 {
            continue;
        }
        if let Some(s) = soft("rank shift", innovation::rank_shift(&pair[0], &pair[1]))? {
            shift.push(vec![
                format!("{}/{}", pair[0].year, pair[1].year),
                num(s.tau),
                num(s.p_value),
                s.n_common.to_string(),
            ]);
            shifts.push((pair[0].year, pair[1].year, s.tau, s.p_value, s.n_common));
        }
    }

    Ok(Metrics {
        window,
        tables: vec![
            activity,
            background,
            series_table,
            attention,
            diversity,
            lifespans,
            active,
            lifespan_trend,
            trends,
            peak,
            fit_table,
            hist_table,
            entries,
            rankings,
            shift,
        ],
        attention: attention_fit,
        diversity: diversity_fit,
        lifespan: lifespan_fits,
        rank_shift: shifts,
        top_innovators,
    })
}

/// Writes each table as `<name>.csv` plus a `<name>.meta.json` sidecar.
pub fn write_tables(cfg: &RunConfig, metrics: &Metrics) -> Result<Vec<PathBuf>> {
    create_dir(&cfg.out)?;
    let hash = cfg.config_hash();
    let mut written = Vec::new();
    for t in &metrics.tables {
        let path = cfg.out.join(format!("{}.csv", t.name));
        write_bytes(&path, &t.to_csv()?)?;
        let meta = Sidecar {
            table: t.name,
            columns: t.header,
            rows: t.rows.len(),
            config_hash: &hash,
            code_version: CODE_VERSION,
        };
        let json = serde_json::to_string_pretty(&meta)? + "\n";
        write_bytes(&cfg.out.join(format!("{}.meta.json", t.name)), json.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a cache and writes every metric table into `cfg.out`.
pub fn cmd_metrics(cfg: &RunConfig, cache_path: &Path) -> Result<Metrics> {
    let cache = load_cache(cache_path)?;
    let metrics = compute_metrics(cfg, &cache)?;
    write_tables(cfg, &metrics)?;
    Ok(metrics)
}

fn describe_fit(fit: &Option<TrendFit>) -> String {
    match fit {
        Some(f) => format!(
            "slope {:.6} per month, Pearson r = {:.3}, p = {:.3e}, n = {}",
            f.slope, f.pearson_r, f.p_value, f.n
        ),
        None => "not enough data".into(),
    }
}

/// Human-readable digest of a metrics run.
pub fn summary_text(cache: &CountCache, metrics: &Metrics) -> String {
    let mut s = String::new();
    let t = &cache.table;
    let _ = writeln!(s, "window        {}..{}", date(metrics.window.first), date(metrics.window.last));
    let _ = writeln!(s, "documents     {} ({} skipped)", t.document_total(), cache.skipped);
    let _ = writeln!(s, "tokens        {}", t.tokens());
    let _ = writeln!(s, "phrases       {}", cache.lexicon.phrases.len());
    let _ = writeln!(s, "background    {} words", cache.lexicon.background.len());
    let _ = writeln!(s, "communities   {}", t.communities().len());
    let _ = writeln!(s, "count mode    {}", cache.count_mode.as_str());
    let _ = writeln!(s);
    let _ = writeln!(s, "attention     {}", describe_fit(&metrics.attention));
    let _ = writeln!(s, "diversity     {}", describe_fit(&metrics.diversity));
    for (alpha, fit) in &metrics.lifespan {
        let _ = writeln!(s, "lifespan a={alpha:<6} {}", describe_fit(fit));
    }
    if !metrics.rank_shift.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "rank shift (Kendall tau-b between consecutive years)");
        for (a, b, tau, p, n) in &metrics.rank_shift {
            let _ = writeln!(s, "  {a}/{b}  tau = {tau:.3}  p = {p:.3e}  n = {n}");
        }
    }
    for (year, top) in &metrics.top_innovators {
        let _ = writeln!(s);
        let _ = writeln!(s, "top communities by MRR, {year}");
        for (i, (c, score)) in top.iter().enumerate() {
            let _ = writeln!(s, "  {:>2}. {c:<24} {score:.4}", i + 1);
        }
    }
    s
}

/// `cmd_metrics` plus `summary.txt`.
pub fn cmd_report(cfg: &RunConfig, cache_path: &Path) -> Result<Metrics> {
    let cache = load_cache(cache_path)?;
    let metrics = compute_metrics(cfg, &cache)?;
    write_tables(cfg, &metrics)?;
    write_bytes(&cfg.out.join("summary.txt"), summary_text(&cache, &metrics).as_bytes())?;
    Ok(metrics)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynthSummary {
    pub documents: u64,
    pub phrases: usize,
    pub background_words: usize,
}

/// Generates a corpus from a JSON spec into `out`: `corpus.ndjson`,
/// `phrases.txt`, `background.txt` and `truth.csv`.
pub fn cmd_synth(spec_path: &Path, out: &Path) -> Result<SynthSummary> {
    let spec = PlantSpec::from_json(&read_text(spec_path)?)?;
    let (docs, truth) = synth::generate(&spec)?;
    create_dir(out)?;
    let corpus = out.join("corpus.ndjson");
    let file = File::create(&corpus).map_err(|e| Error::io(&corpus, e))?;
    let mut w = BufWriter::new(file);
    for d in &docs {
        writeln!(w, "{}", to_record(d)).map_err(|e| Error::io(&corpus, e))?;
    }
    w.flush().map_err(|e| Error::io(&corpus, e))?;
    write_bytes(&out.join("phrases.txt"), truth.phrase_file().as_bytes())?;
    write_bytes(&out.join("background.txt"), truth.background_file().as_bytes())?;
    let mut csv = Vec::new();
    truth.write_csv(&mut csv)?;
    write_bytes(&out.join("truth.csv"), &csv)?;
    Ok(SynthSummary {
        documents: truth.documents,
        phrases: truth.phrases.len(),
        background_words: truth.words.len(),
    })
}
