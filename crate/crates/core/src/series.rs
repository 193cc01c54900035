//! Day- and month-indexed frequency series and background normalization.

use crate::matcher::CountCache;
use crate::par;
use crate::stats::{self, TrendFit};
use crate::time::{Window, YearMonth};
use crate::{Error, Result};

/// Raw daily occurrences of one phrase, zero-filled over a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DailySeries {
    pub phrase: u32,
    pub window: Window,
    pub values: Vec<u64>,
}

/// Daily summed occurrences of every background word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackgroundSeries {
    pub window: Window,
    pub values: Vec<u64>,
}

/// Phrase frequency divided by background volume. `None` marks days where the
/// background is empty; those days are skipped by every statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    pub phrase: u32,
    pub window: Window,
    pub values: Vec<Option<f64>>,
}

/// Read access shared by the series types.
pub trait DayValues {
    fn window(&self) -> Window;
    fn value(&self, index: usize) -> Option<f64>;
}

impl DayValues for DailySeries {
    fn window(&self) -> Window {
        self.window
    }
    fn value(&self, index: usize) -> Option<f64> {
        Some(self.values[index] as f64)
    }
}

impl DayValues for BackgroundSeries {
    fn window(&self) -> Window {
        self.window
    }
    fn value(&self, index: usize) -> Option<f64> {
        Some(self.values[index] as f64)
    }
}

impl DayValues for NormalizedSeries {
    fn window(&self) -> Window {
        self.window
    }
    fn value(&self, index: usize) -> Option<f64> {
        self.values[index]
    }
}

impl DailySeries {
    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }
}

pub fn daily_series(cache: &CountCache, phrase: u32, window: Window) -> Result<DailySeries> {
    if phrase as usize >= cache.lexicon.phrases.len() {
        return Err(Error::UnknownPhrase(phrase));
    }
    let mut values = vec![0u64; window.len()];
    for m in cache.table.phrase_entries(phrase) {
        if let Some(i) = window.index_of(m.day) {
            values[i] += m.count;
        }
    }
    Ok(DailySeries {
        phrase,
        window,
        values,
    })
}

pub fn background_series(cache: &CountCache, window: Window) -> BackgroundSeries {
    let mut values = vec![0u64; window.len()];
    for b in cache.table.background() {
        if let Some(i) = window.index_of(b.day) {
            values[i] += b.count;
        }
    }
    BackgroundSeries { window, values }
}

pub fn normalize(f: &DailySeries, b: &BackgroundSeries) -> Result<NormalizedSeries> {
    if f.window != b.window {
        return Err(Error::Window(format!(
            "phrase window {} differs from background window {}",
            f.window, b.window
        )));
    }
    let values: Vec<Option<f64>> = f
        .values
        .iter()
        .zip(&b.values)
        .map(|(&fv, &bv)| (bv > 0).then(|| fv as f64 / bv as f64))
        .collect();
    if values.iter().all(Option::is_none) {
        return Err(Error::BackgroundEmpty);
    }
    Ok(NormalizedSeries {
        phrase: f.phrase,
        window: f.window,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    Sum,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonthValue {
    pub month: YearMonth,
    /// `None` when the month has no defined day inside the window.
    pub value: Option<f64>,
    pub defined_days: usize,
}

/// Buckets a series into calendar months, using only in-window defined days.
pub fn monthly_aggregate(series: &impl DayValues, mode: Aggregate) -> Vec<MonthValue> {
    let window = series.window();
    window
        .months()
        .into_iter()
        .map(|month| {
            let part = window.clip_month(month).expect("month comes from window");
            let start = window.index_of(part.first).unwrap();
            let vals: Vec<f64> = (start..start + part.len())
                .filter_map(|i| series.value(i))
                .collect();
            let value = match mode {
                _ if vals.is_empty() => None,
                Aggregate::Sum => Some(stats::fsum(vals.iter().copied())),
                Aggregate::Mean => stats::mean(&vals),
            };
            MonthValue {
                month,
                value,
                defined_days: vals.len(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttentionMonth {
    pub month: YearMonth,
    /// Mean over phrases of each phrase's monthly mean normalized frequency.
    pub mean: f64,
    pub ci95: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionReport {
    pub months: Vec<AttentionMonth>,
    /// Monthly mean against month offset from the first reported month.
    pub trend: TrendFit,
}

/// Per-month average normalized frequency across `phrases`.
pub fn attention_months(cache: &CountCache, phrases: &[u32], window: Window) -> Result<Vec<AttentionMonth>> {
    let background = background_series(cache, window);
    let per_phrase: Vec<Result<Vec<MonthValue>>> = par::map(phrases, |&p| {
        let f = daily_series(cache, p, window)?;
        match normalize(&f, &background) {
            Ok(n) => Ok(monthly_aggregate(&n, Aggregate::Mean)),
            Err(Error::BackgroundEmpty) => Ok(Vec::new()),
            Err(e) => Err(e),
        }
    });
    let per_phrase = per_phrase.into_iter().collect::<Result<Vec<_>>>()?;
    let months = window.months();
    let mut out = Vec::new();
    for (i, &month) in months.iter().enumerate() {
        let vals: Vec<f64> = per_phrase
            .iter()
            .filter_map(|mv| mv.get(i).and_then(|m| m.value))
            .collect();
        if vals.is_empty() {
            continue;
        }
        out.push(AttentionMonth {
            month,
            mean: stats::mean(&vals).unwrap(),
            ci95: stats::ci95_halfwidth(&vals).ok(),
            n: vals.len(),
        });
    }
    Ok(out)
}

/// [`attention_months`] plus a Pearson trend over the monthly means.
pub fn aggregate_attention(cache: &CountCache, phrases: &[u32], window: Window) -> Result<AttentionReport> {
    if window.months().len() < 2 {
        return Err(Error::Insufficient("attention needs at least 2 months".into()));
    }
    let months = attention_months(cache, phrases, window)?;
    let trend = month_trend(months.iter().map(|m| (m.month, m.mean)))?;
    Ok(AttentionReport { months, trend })
}

/// Trend of per-month values against months elapsed since the first point.
pub(crate) fn month_trend(points: impl IntoIterator<Item = (YearMonth, f64)>) -> Result<TrendFit> {
    let points: Vec<(YearMonth, f64)> = points.into_iter().collect();
    if points.len() < 3 {
        return Err(Error::Insufficient(format!(
            "trend needs at least 3 months, got {}",
            points.len()
        )));
    }
    let origin = points[0].0.ordinal();
    let x: Vec<f64> = points.iter().map(|(m, _)| (m.ordinal() - origin) as f64).collect();
    let y: Vec<f64> = points.iter().map(|(_, v)| *v).collect();
    stats::trend(&x, &y)
}
