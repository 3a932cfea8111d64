//! Replica-level estimators: normal-approximation means, binomial intervals,
//! Kolmogorov–Smirnov distance, chi-square tests and least squares.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Point estimate with a confidence interval; `ci_lo <= estimate <= ci_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub std_err: f64,
    pub n: usize,
}

/// Mean with a 95% normal-approximation interval. `None` for empty input.
pub fn mean_ci(values: &[f64]) -> Option<Estimate> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    let se = (var / n as f64).sqrt();
    Some(Estimate { estimate: mean, ci_lo: mean - Z95 * se, ci_hi: mean + Z95 * se, std_err: se, n })
}

/// Ratio `Σ y / Σ x` over replicas `(y, x)`, with the delta-method interval
/// of a ratio estimator. `None` when the `x` total is not positive.
pub fn ratio_ci(pairs: &[(f64, f64)]) -> Option<Estimate> {
    let n = pairs.len();
    let (sy, sx) = pairs.iter().fold((0.0, 0.0), |(a, b), &(y, x)| (a + y, b + x));
    if n == 0 || !(sx > 0.0) {
        return None;
    }
    let ratio = sy / sx;
    let se = if n > 1 {
        let resid: f64 = pairs.iter().map(|&(y, x)| (y - ratio * x).powi(2)).sum();
        let mean_x = sx / n as f64;
        (resid / ((n - 1) as f64 * n as f64)).sqrt() / mean_x
    } else {
        0.0
    };
    Some(Estimate { estimate: ratio, ci_lo: ratio - Z95 * se, ci_hi: ratio + Z95 * se, std_err: se, n })
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: usize, n: usize) -> Estimate {
    if n == 0 {
        return Estimate { estimate: f64::NAN, ci_lo: 0.0, ci_hi: 1.0, std_err: f64::NAN, n };
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    Estimate {
        estimate: p,
        ci_lo: (center - half).clamp(0.0, p),
        ci_hi: (center + half).clamp(p, 1.0),
        std_err: (p * (1.0 - p) / nf).sqrt(),
        n,
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and a
/// continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 99% critical value of the one-sample KS distance.
pub fn ks_critical_99(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: usize,
}

/// Pearson goodness-of-fit of integer counts against a probability mass
/// function. Consecutive values are pooled until every bin expects at least
/// `min_expected` observations.
pub fn chi_square_counts(counts: &[u64], pmf: impl Fn(u64) -> f64, min_expected: f64) -> ChiSquareResult {
    let n = counts.len() as f64;
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut observed = vec![0u64; max as usize + 1];
    for &c in counts {
        observed[c as usize] += 1;
    }
    // bins [lo, hi); the last bin absorbs the upper tail
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    let mut cumulative = 0.0;
    for (k, &obs) in observed.iter().enumerate() {
        let p = pmf(k as u64);
        cumulative += p;
        o += obs as f64;
        e += n * p;
        if e >= min_expected {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    e += (1.0 - cumulative).max(0.0) * n;
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) if e < min_expected => {
                last.0 += o;
                last.1 += e;
            }
            _ => bins.push((o, e)),
        }
    }
    let statistic: f64 = bins.iter().map(|&(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len().saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN);
    ChiSquareResult { statistic, dof, p_value, bins: bins.len() }
}

/// Ordinary least squares `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_err: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_std_err = if n > 2 { (rss / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Some(LinearFit { slope, intercept, slope_std_err })
}
