//! Deterministic summary statistics shared by the metric modules.
//!
//! Every reduction runs left to right with Neumaier compensation, so results
//! depend only on the input order, never on thread count.

use std::cmp::Ordering;

use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

use crate::{Error, Result};

/// z-score of the two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// Compensated (Neumaier) sum.
pub fn fsum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| fsum(values.iter().copied()) / values.len() as f64)
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss = fsum(values.iter().map(|v| (v - m) * (v - m)));
    Some((ss / (values.len() - 1) as f64).sqrt())
}

/// Normal-approximation 95% half-width, `1.96 * s / sqrt(n)`.
pub fn ci95_halfwidth(values: &[f64]) -> Result<f64> {
    let sd = sample_sd(values)
        .ok_or_else(|| Error::Insufficient(format!("ci95 needs n >= 2, got {}", values.len())))?;
    Ok(Z95 * sd / (values.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// Two-sided.
    pub p: f64,
    pub n: usize,
}

/// Sample Pearson correlation with a two-sided t-test p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_pair(x, y, 3)?;
    let n = x.len();
    let mx = mean(x).unwrap();
    let my = mean(y).unwrap();
    let sxx = fsum(x.iter().map(|a| (a - mx) * (a - mx)));
    let syy = fsum(y.iter().map(|b| (b - my) * (b - my)));
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y"));
    }
    let sxy = fsum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(Correlation {
        r,
        p: pearson_p(r, n),
        n,
    })
}

fn pearson_p(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let one_minus = 1.0 - r * r;
    if one_minus <= 0.0 {
        return 0.0;
    }
    let t2 = r * r * df / one_minus;
    // P(|T| > t) for Student's t with df degrees of freedom.
    beta_reg(df / 2.0, 0.5, df / (df + t2)).clamp(0.0, 1.0)
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linfit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    check_pair(x, y, 2)?;
    let mx = mean(x).unwrap();
    let my = mean(y).unwrap();
    let sxx = fsum(x.iter().map(|a| (a - mx) * (a - mx)));
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    let sxy = fsum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

fn check_pair(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < min {
        return Err(Error::Insufficient(format!(
            "need at least {min} points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value".into()));
    }
    Ok(())
}

/// A least-squares line together with its Pearson correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendFit {
    pub slope: f64,
    pub intercept: f64,
    pub pearson_r: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Fits a trend line. A constant `y` has zero covariance with any `x` and
/// is reported as `r = 0, p = 1` instead of an error.
pub fn trend(x: &[f64], y: &[f64]) -> Result<TrendFit> {
    let (slope, intercept) = linfit(x, y)?;
    let (pearson_r, p_value) = match pearson(x, y) {
        Ok(c) => (c.r, c.p),
        Err(Error::ZeroVariance("y")) => (0.0, 1.0),
        Err(e) => return Err(e),
    };
    Ok(TrendFit {
        slope,
        intercept,
        pearson_r,
        p_value,
        n: x.len(),
    })
}

fn total_cmp(a: &f64, b: &f64) -> Ordering {
    a.partial_cmp(b).expect("finite values")
}

/// Sum over tie groups of `f(group size)` for a sorted slice.
fn tie_sum(sorted: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        if t > 1.0 {
            total += f(t);
        }
        i = j;
    }
    total
}

/// Kendall's tau-b with tie correction, and a two-sided p-value from the
/// normal approximation to its null distribution (tie-corrected variance).
///
/// Runs in O(n log n): pairs are sorted by `a`, then discordances are counted
/// as the swaps a merge sort on `b` performs.
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    check_pair(a, b, 3)?;
    let n = a.len();
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|p, q| total_cmp(&p.0, &q.0).then(total_cmp(&p.1, &q.1)));

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    // Pairs tied in a, and tied in both.
    let (mut ties_a, mut ties_ab) = (0u64, 0u64);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        let t = (j - i) as u64;
        ties_a += t * (t - 1) / 2;
        let mut k = i;
        while k < j {
            let mut l = k + 1;
            while l < j && pairs[l].1 == pairs[k].1 {
                l += 1;
            }
            let u = (l - k) as u64;
            ties_ab += u * (u - 1) / 2;
            k = l;
        }
        i = j;
    }

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut ties_b = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        let t = (j - i) as u64;
        ties_b += t * (t - 1) / 2;
        i = j;
    }

    if ties_a == n0 {
        return Err(Error::ZeroVariance("first ranking (all tied)"));
    }
    if ties_b == n0 {
        return Err(Error::ZeroVariance("second ranking (all tied)"));
    }
    // concordant - discordant
    let s = n0 as i64 - ties_a as i64 - ties_b as i64 + ties_ab as i64 - 2 * swaps as i64;
    let tau = s as f64 / (((n0 - ties_a) as f64) * ((n0 - ties_b) as f64)).sqrt();

    let mut sorted_a = a.to_vec();
    sorted_a.sort_by(total_cmp);
    let nf = n as f64;
    let m = nf * (nf - 1.0);
    let a0 = tie_sum(&sorted_a, |t| t * (t - 1.0) * (t - 2.0));
    let a1 = tie_sum(&sorted_a, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let b0 = tie_sum(&ys, |t| t * (t - 1.0) * (t - 2.0));
    let b1 = tie_sum(&ys, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let var = (m * (2.0 * nf + 5.0) - a1 - b1) / 18.0
        + (2.0 * ties_a as f64 * ties_b as f64) / m
        + a0 * b0 / (9.0 * m * (nf - 2.0));
    let p = if var > 0.0 {
        erfc((s as f64).abs() / var.sqrt() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok((tau.clamp(-1.0, 1.0), p))
}

/// Stable merge sort of `v`, returning the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    while i < mid {
        buf[k] = v[i];
        i += 1;
        k += 1;
    }
    while j < n {
        buf[k] = v[j];
        j += 1;
        k += 1;
    }
    v.copy_from_slice(&buf[..n]);
    swaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 1.5).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = pearson(&x, &y).unwrap();
        assert!((c.r - 1.0).abs() < 1e-12);
        assert!(c.p < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap().r + 1.0).abs() < 1e-12);
        let c = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0]).unwrap();
        assert!((c.r - 3f64.sqrt() / 2.0).abs() < 1e-12);
        // t = sqrt(3), df = 1: p = 1 - 2*atan(sqrt 3)/pi = 1/3
        assert!((c.p - 1.0 / 3.0).abs() < 1e-9, "p = {}", c.p);
    }

    #[test]
    fn pearson_p_matches_reference() {
        // r = 0.5 with n = 12: t = 0.5 * sqrt(10 / 0.75) = 1.8257, df = 10,
        // two-sided p = 0.0978546 (scipy.stats.t.sf * 2).
        let p = pearson_p(0.5, 12);
        assert!((p - 0.0978546).abs() < 1e-6, "p = {p}");
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::ZeroVariance("x"))));
        assert!(matches!(pearson(&[1.0, 2.0, 3.0], &[5.0; 3]), Err(Error::ZeroVariance("y"))));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ci_examples() {
        assert_eq!(ci95_halfwidth(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
        assert!((ci95_halfwidth(&[0.0, 2.0]).unwrap() - 1.96).abs() < 1e-12);
        assert!(ci95_halfwidth(&[1.0]).is_err());
        // Same sd, four times the samples: half the width.
        let small = [0.0, 2.0];
        let big = [0.0, 2.0, 0.0, 2.0, 0.0, 2.0, 0.0, 2.0];
        let ratio = ci95_halfwidth(&big).unwrap() / ci95_halfwidth(&small).unwrap();
        let sd_ratio = sample_sd(&big).unwrap() / sample_sd(&small).unwrap();
        assert!((ratio / sd_ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn linfit_examples() {
        let x = [0.0, 1.0, 2.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let (s, i) = linfit(&x, &y).unwrap();
        assert!((s - 3.0).abs() < 1e-12 && (i + 2.0).abs() < 1e-12);
        assert_eq!(linfit(&x, &[4.0; 4]).unwrap().0, 0.0);
        let (s, i) = linfit(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!(s.abs() < 1e-15 && (i - 1.0 / 3.0).abs() < 1e-15);
        assert!(linfit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn constant_trend_is_flat() {
        let t = trend(&[0.0, 1.0, 2.0, 3.0], &[0.5; 4]).unwrap();
        assert_eq!((t.slope, t.pearson_r, t.p_value), (0.0, 0.0, 1.0));
    }

    #[test]
    fn kendall_examples() {
        let a: Vec<f64> = (0..10).map(f64::from).collect();
        let rev: Vec<f64> = a.iter().rev().copied().collect();
        assert_eq!(kendall_tau_b(&a, &a).unwrap().0, 1.0);
        assert_eq!(kendall_tau_b(&a, &rev).unwrap().0, -1.0);
        assert!(kendall_tau_b(&[1.0; 4], &a[..4]).is_err());
        // scipy.stats.kendalltau([1,2,3,4,5],[3,4,1,5,2]) -> (0.0, 1.0)
        let (t, p) = kendall_tau_b(&[1.0, 2.0, 3.0, 4.0, 5.0], &[3.0, 4.0, 1.0, 5.0, 2.0]).unwrap();
        assert_eq!(t, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kendall_p_with_ties() {
        // a = [1,1,2,3,4], b = [1,2,2,3,5]: n0 = 10, ties_a = 1, ties_b = 1,
        // concordant 8, discordant 0 -> tau = 8 / 9.
        // var = (20*15 - 18 - 18)/18 + 2/20 + 0 = 14.7667, z = 8 / 3.84278,
        // p = erfc(z / sqrt 2) = 0.0373565 (matches scipy.stats.kendalltau).
        let (t, p) =
            kendall_tau_b(&[1.0, 1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 2.0, 3.0, 5.0]).unwrap();
        assert!((t - 8.0 / 9.0).abs() < 1e-15);
        assert!((p - 0.0373565).abs() < 1e-6, "p = {p}");
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            pts in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..30),
            scale in 0.1f64..10.0, shift in -50.0f64..50.0,
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(base) = pearson(&x, &y) {
                let y2: Vec<f64> = y.iter().map(|v| v * scale + shift).collect();
                let c = pearson(&x, &y2).unwrap();
                prop_assert!((c.r - base.r).abs() < 1e-9);
                let y3: Vec<f64> = y.iter().map(|v| -v * scale).collect();
                prop_assert!((pearson(&x, &y3).unwrap().r + base.r).abs() < 1e-9);
            }
        }

        #[test]
        fn linfit_residuals_orthogonal(
            pts in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..30),
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok((s, i)) = linfit(&x, &y) {
                let dot = fsum(x.iter().zip(&y).map(|(a, b)| a * (b - s * a - i)));
                let scale = fsum(x.iter().zip(&y).map(|(a, b)| (a * b).abs())).max(1.0);
                prop_assert!(dot.abs() / scale < 1e-9);
            }
        }

        #[test]
        fn kendall_symmetric(
            pts in proptest::collection::vec((0u8..6, 0u8..6), 3..40),
        ) {
            let a: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
            let b: Vec<f64> = pts.iter().map(|p| p.1 as f64).collect();
            match (kendall_tau_b(&a, &b), kendall_tau_b(&b, &a)) {
                (Ok(x), Ok(y)) => {
                    prop_assert!((x.0 - y.0).abs() < 1e-15);
                    prop_assert!((x.1 - y.1).abs() < 1e-12);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "asymmetric failure"),
            }
        }

        #[test]
        fn reductions_are_bit_deterministic(v in proptest::collection::vec(-1e6f64..1e6, 0..50)) {
            prop_assert_eq!(fsum(v.iter().copied()).to_bits(), fsum(v.iter().copied()).to_bits());
        }
    }
}
