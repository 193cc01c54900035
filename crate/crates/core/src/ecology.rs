//! Community-level ecological metrics: Simpson diversity, richness,
//! lifespans, active-meme counts, and their monthly trends.

use std::collections::{BTreeMap, HashMap};

use crate::matcher::CountCache;
use crate::series::{background_series, month_trend, NormalizedSeries};
use crate::stats::{self, TrendFit};
use crate::time::{Day, Window, YearMonth};
use crate::{Error, Result};

pub const DEFAULT_ALPHAS: [f64; 3] = [0.005, 0.01, 0.02];

/// Occurrence counts per phrase inside one community and month.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiversityInput {
    pub species: BTreeMap<u32, u64>,
}

impl DiversityInput {
    pub fn from_counts(counts: impl IntoIterator<Item = (u32, u64)>) -> DiversityInput {
        let mut species = BTreeMap::new();
        for (id, n) in counts {
            if n > 0 {
                *species.entry(id).or_insert(0) += n;
            }
        }
        DiversityInput { species }
    }

    /// N, the number of individuals.
    pub fn total(&self) -> u64 {
        self.species.values().sum()
    }
}

/// Simpson's index `1 - sum n_i (n_i - 1) / (N (N - 1))`.
pub fn simpson_index(counts: &[u64]) -> Result<f64> {
    let total: u128 = counts.iter().map(|&n| n as u128).sum();
    if total < 2 {
        return Err(Error::Insufficient(format!(
            "Simpson diversity needs N >= 2, got N = {total}"
        )));
    }
    let same: u128 = counts
        .iter()
        .map(|&n| n as u128 * (n as u128).saturating_sub(1))
        .sum();
    let pairs = total * (total - 1);
    Ok(1.0 - same as f64 / pairs as f64)
}

pub fn simpson_diversity(input: &DiversityInput) -> Result<f64> {
    let counts: Vec<u64> = input.species.values().copied().collect();
    simpson_index(&counts)
}

/// Number of distinct phrases present, and that number as a fraction of all tracked phrases.
pub fn richness(input: &DiversityInput, total_tracked: usize) -> Result<(usize, f64)> {
    if total_tracked == 0 {
        return Err(Error::InvalidArgument("total_tracked must be >= 1".into()));
    }
    let count = input.species.len();
    Ok((count, count as f64 / total_tracked as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityMonth {
    pub month: YearMonth,
    /// Mean over communities with N >= 2; `None` if there are none.
    pub mean_d: Option<f64>,
    pub ci95: Option<f64>,
    pub communities_with_d: usize,
    /// Communities with at least one phrase occurrence this month.
    pub total_communities: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityReport {
    pub months: Vec<DiversityMonth>,
    /// `None` when fewer than three months have a defined mean.
    pub trend: Option<TrendFit>,
}

/// Groups phrase occurrences by (month, community) inside `window`.
pub fn community_months(cache: &CountCache, window: Window) -> BTreeMap<(YearMonth, u32), DiversityInput> {
    let mut month_of: HashMap<Day, YearMonth> = HashMap::new();
    let mut out: BTreeMap<(YearMonth, u32), DiversityInput> = BTreeMap::new();
    for m in cache.table.memes() {
        if !window.contains(m.day) {
            continue;
        }
        let month = *month_of.entry(m.day).or_insert_with(|| m.day.month());
        *out.entry((month, m.community))
            .or_default()
            .species
            .entry(m.phrase)
            .or_insert(0) += m.count;
    }
    out
}

pub fn diversity_trend(cache: &CountCache, window: Window) -> Result<DiversityReport> {
    if window.months().len() < 3 {
        return Err(Error::Insufficient("diversity trend needs at least 3 months".into()));
    }
    let mut by_month: BTreeMap<YearMonth, (Vec<f64>, usize)> = BTreeMap::new();
    for ((month, _), input) in community_months(cache, window) {
        let slot = by_month.entry(month).or_default();
        slot.1 += 1;
        if let Ok(d) = simpson_diversity(&input) {
            slot.0.push(d);
        }
    }
    if by_month.values().all(|(ds, _)| ds.is_empty()) {
        return Err(Error::Insufficient(
            "no community-month has at least two phrase occurrences".into(),
        ));
    }
    let months: Vec<DiversityMonth> = by_month
        .into_iter()
        .map(|(month, (ds, total))| DiversityMonth {
            month,
            mean_d: stats::mean(&ds),
            ci95: stats::ci95_halfwidth(&ds).ok(),
            communities_with_d: ds.len(),
            total_communities: total,
        })
        .collect();
    let trend = month_trend(months.iter().filter_map(|m| Some((m.month, m.mean_d?)))).ok();
    Ok(DiversityReport { months, trend })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifespanParams {
    pub alpha: f64,
    /// Consecutive sub-threshold days tolerated inside a lifespan. 0 is strict;
    /// `usize::MAX` recovers first-to-last qualifying day.
    pub gap_tolerance: usize,
}

impl LifespanParams {
    pub fn new(alpha: f64) -> LifespanParams {
        LifespanParams {
            alpha,
            gap_tolerance: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lifespan {
    pub phrase: u32,
    pub start: Day,
    pub peak: Day,
    pub end: Day,
    pub alpha: f64,
}

impl Lifespan {
    pub fn length(&self) -> i64 {
        self.end.0 - self.start.0 + 1
    }

    pub fn intersects(&self, w: Window) -> bool {
        self.start <= w.last && self.end >= w.first
    }
}

/// Day and value of the highest defined point; ties go to the earliest day.
pub fn peak(series: &NormalizedSeries) -> Result<(Day, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in series.values.iter().enumerate() {
        if let Some(v) = *v {
            if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, v)| (series.window.day_at(i), v))
        .ok_or(Error::NoPeak)
}

/// The maximal run of days around the peak where the normalized frequency stays
/// at or above `alpha` times the peak value. Undefined days count as below.
pub fn lifespan(series: &NormalizedSeries, params: LifespanParams) -> Result<Lifespan> {
    params.validate()?;
    let (peak_day, peak_value) = peak(series)?;
    let threshold = params.alpha * peak_value;
    let ok = |i: usize| series.values[i].is_some_and(|v| v >= threshold);
    let p = series.window.index_of(peak_day).unwrap();

    let mut end = p;
    let mut gap = 0usize;
    for i in p + 1..series.values.len() {
        if ok(i) {
            end = i;
            gap = 0;
        } else {
            gap += 1;
            if gap > params.gap_tolerance {
                break;
            }
        }
    }
    let mut start = p;
    gap = 0;
    for i in (0..p).rev() {
        if ok(i) {
            start = i;
            gap = 0;
        } else {
            gap += 1;
            if gap > params.gap_tolerance {
                break;
            }
        }
    }
    Ok(Lifespan {
        phrase: series.phrase,
        start: series.window.day_at(start),
        peak: peak_day,
        end: series.window.day_at(end),
        alpha: params.alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveMonth {
    pub month: YearMonth,
    pub active: usize,
    /// `active` divided by the month's summed background; `None` if that sum is 0.
    pub normalized: Option<f64>,
}

/// Number of phrases whose lifespan intersects each month of `window`.
pub fn active_series(lifespans: &[Lifespan], cache: &CountCache, window: Window) -> Vec<ActiveMonth> {
    let background = background_series(cache, window);
    window
        .months()
        .into_iter()
        .map(|month| {
            let part = window.clip_month(month).unwrap();
            let active = lifespans.iter().filter(|l| l.intersects(part)).count();
            let start = window.index_of(part.first).unwrap();
            let b: u64 = background.values[start..start + part.len()].iter().sum();
            ActiveMonth {
                month,
                active,
                normalized: (b > 0).then(|| active as f64 / b as f64),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifespanMonth {
    pub month: YearMonth,
    pub mean_length: f64,
    /// `None` with a single active phrase.
    pub ci95: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifespanTrend {
    pub alpha: f64,
    pub months: Vec<LifespanMonth>,
    pub trend: TrendFit,
}

/// Mean lifespan length of the phrases active in each month, with a trend line.
/// Lifespans are expected to share one alpha; months with nothing active are omitted.
pub fn lifespan_trend(lifespans: &[Lifespan], window: Window) -> Result<LifespanTrend> {
    let alpha = lifespans.first().map(|l| l.alpha).unwrap_or(f64::NAN);
    let mut months = Vec::new();
    for month in window.months() {
        let part = window.clip_month(month).unwrap();
        let lengths: Vec<f64> = lifespans
            .iter()
            .filter(|l| l.intersects(part))
            .map(|l| l.length() as f64)
            .collect();
        if lengths.is_empty() {
            continue;
        }
        months.push(LifespanMonth {
            month,
            mean_length: stats::mean(&lengths).unwrap(),
            ci95: stats::ci95_halfwidth(&lengths).ok(),
            n: lengths.len(),
        });
    }
    let trend = month_trend(months.iter().map(|m| (m.month, m.mean_length)))?;
    Ok(LifespanTrend {
        alpha,
        months,
        trend,
    })
}
