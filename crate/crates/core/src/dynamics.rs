//! Peak-aligned relative frequency curves and gain/loss velocity distributions.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{Continuous, LogNormal};

use crate::par;
use crate::series::DailySeries;
use crate::stats;
use crate::time::Day;
use crate::{Error, Result};

pub const DEFAULT_PEAK_WINDOW: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedPoint {
    pub delta: i64,
    pub mean: f64,
    pub ci95: Option<f64>,
    /// Memes whose window covers this offset.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakAlignedCurve {
    pub year: i32,
    pub cohort_size: usize,
    /// One point per offset in `-W..=W`; offsets no meme covers are left out.
    pub points: Vec<AlignedPoint>,
}

/// Day and value of the largest raw count, earliest day on ties. `None` if all zero.
pub fn raw_peak(series: &DailySeries) -> Option<(Day, u64)> {
    let mut best: Option<(usize, u64)> = None;
    for (i, &v) in series.values.iter().enumerate() {
        if v > 0 && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, v)| (series.window.day_at(i), v))
}

/// `F(peak + d) / F(peak)` for `d` in `-w..=w`; `None` where the day falls outside the window.
pub fn relative_curve(series: &DailySeries, peak: Day, w: usize) -> Vec<Option<f64>> {
    let top = series.values[series.window.index_of(peak).expect("peak inside window")] as f64;
    let w = w as i64;
    (-w..=w)
        .map(|d| {
            let i = series.window.index_of(peak.offset(d))?;
            Some(series.values[i] as f64 / top)
        })
        .collect()
}

/// Averages the relative curves of all memes grouped by the year of their peak.
/// Memes that never occur are skipped; years without memes are absent.
pub fn peak_aligned(series: &[DailySeries], w: usize) -> Result<Vec<PeakAlignedCurve>> {
    if w == 0 {
        return Err(Error::InvalidArgument("peak window must be >= 1".into()));
    }
    let curves: Vec<Option<(i32, Vec<Option<f64>>)>> = par::map(series, |s| {
        let (peak, _) = raw_peak(s)?;
        let curve = relative_curve(s, peak, w);
        assert_eq!(curve[w], Some(1.0), "relative frequency at the peak must be 1");
        Some((peak.year(), curve))
    });
    let mut cohorts: BTreeMap<i32, Vec<Vec<Option<f64>>>> = BTreeMap::new();
    for (year, curve) in curves.into_iter().flatten() {
        cohorts.entry(year).or_default().push(curve);
    }
    Ok(cohorts
        .into_iter()
        .map(|(year, curves)| {
            let points = (0..2 * w + 1)
                .filter_map(|k| {
                    let vals: Vec<f64> = curves.iter().filter_map(|c| c[k]).collect();
                    Some(AlignedPoint {
                        delta: k as i64 - w as i64,
                        mean: stats::mean(&vals)?,
                        ci95: stats::ci95_halfwidth(&vals).ok(),
                        n: vals.len(),
                    })
                })
                .collect();
            PeakAlignedCurve {
                year,
                cohort_size: curves.len(),
                points,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityKind {
    Gain,
    Loss,
}

impl VelocityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VelocityKind::Gain => "gain",
            VelocityKind::Loss => "loss",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocitySample {
    pub kind: VelocityKind,
    /// Always positive; losses are stored as magnitudes.
    pub magnitude: f64,
    pub day: Day,
    pub phrase: u32,
    pub year: i32,
}

/// Relative gains `(F(t) - F(t-1)) / F(t-1)` and losses `(F(t) - F(t+1)) / F(t+1)`
/// on raw counts. Pairs with a zero denominator or no change produce nothing.
pub fn velocities(series: &DailySeries) -> Vec<VelocitySample> {
    let f = &series.values;
    let mut out = Vec::new();
    let mut push = |kind, num: u64, den: u64, i: usize| {
        let day = series.window.day_at(i);
        out.push(VelocitySample {
            kind,
            magnitude: num as f64 / den as f64,
            day,
            phrase: series.phrase,
            year: day.year(),
        });
    };
    for t in 0..f.len() {
        if t > 0 && f[t - 1] > 0 && f[t] > f[t - 1] {
            push(VelocityKind::Gain, f[t] - f[t - 1], f[t - 1], t);
        }
        if t + 1 < f.len() && f[t + 1] > 0 && f[t] > f[t + 1] {
            push(VelocityKind::Loss, f[t] - f[t + 1], f[t + 1], t);
        }
    }
    out
}

/// Velocity samples for many series, concatenated in input order.
pub fn all_velocities(series: &[DailySeries]) -> Vec<VelocitySample> {
    par::map(series, velocities).into_iter().flatten().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub n: usize,
}

impl LogNormalFit {
    pub fn pdf(&self, x: f64) -> f64 {
        LogNormal::new(self.mu, self.sigma)
            .map(|d| d.pdf(x))
            .unwrap_or(f64::NAN)
    }
}

/// Maximum-likelihood log-normal parameters: mean and population sd of `ln x`.
pub fn fit_lognormal(samples: &[f64]) -> Result<LogNormalFit> {
    if samples.len() < 2 {
        return Err(Error::Insufficient(format!(
            "log-normal fit needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "log-normal samples must be positive and finite, got {bad}"
        )));
    }
    let logs: Vec<f64> = samples.iter().map(|x| x.ln()).collect();
    let n = logs.len() as f64;
    let mu = stats::fsum(logs.iter().copied()) / n;
    let var = stats::fsum(logs.iter().map(|l| (l - mu) * (l - mu))) / n;
    let sigma = var.sqrt();
    if sigma == 0.0 {
        return Err(Error::ZeroVariance("log-normal samples"));
    }
    Ok(LogNormalFit {
        mu,
        sigma,
        n: samples.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    /// Geometric midpoint of the bin.
    pub center: f64,
    pub count: usize,
    pub density: f64,
    /// Fitted log-normal density at `center`; `None` when the fit is degenerate.
    pub fit_density: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityHistogram {
    pub n: usize,
    pub fit: Option<LogNormalFit>,
    /// Every bin from the smallest to the largest occupied one.
    pub bins: Vec<HistogramBin>,
}

/// Log-spaced histogram with `bins_per_decade` bins per factor of ten, edges at
/// `10^(k / bins_per_decade)`. Densities satisfy `sum(density * width) = 1`.
pub fn velocity_histogram(samples: &[f64], bins_per_decade: u32) -> Result<VelocityHistogram> {
    if samples.is_empty() {
        return Err(Error::Insufficient("histogram needs at least one sample".into()));
    }
    if bins_per_decade == 0 {
        return Err(Error::InvalidArgument("bins_per_decade must be >= 1".into()));
    }
    if let Some(bad) = samples.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "histogram samples must be positive and finite, got {bad}"
        )));
    }
    let b = bins_per_decade as f64;
    let edge = |k: i64| 10f64.powf(k as f64 / b);
    let bin_of = |x: f64| {
        let mut k = (x.log10() * b).floor() as i64;
        // Keep lo <= x < hi despite rounding in log10.
        while edge(k) > x {
            k -= 1;
        }
        while edge(k + 1) <= x {
            k += 1;
        }
        k
    };
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &x in samples {
        *counts.entry(bin_of(x)).or_insert(0) += 1;
    }
    let first = *counts.keys().next().unwrap();
    let last = *counts.keys().next_back().unwrap();
    let fit = fit_lognormal(samples).ok();
    let n = samples.len();
    let bins = (first..=last)
        .map(|k| {
            let (lo, hi) = (edge(k), edge(k + 1));
            let count = counts.get(&k).copied().unwrap_or(0);
            let center = (lo * hi).sqrt();
            HistogramBin {
                lo,
                hi,
                center,
                count,
                density: count as f64 / (n as f64 * (hi - lo)),
                fit_density: fit.map(|f| f.pdf(center)),
            }
        })
        .collect();
    Ok(VelocityHistogram { n, fit, bins })
}
