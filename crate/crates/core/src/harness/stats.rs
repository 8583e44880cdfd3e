//! Goodness-of-fit statistics.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::HarnessError;

/// Mean of the Kolmogorov distribution, `sqrt(pi/2) ln 2`: the typical size
/// of `sqrt(n) D_n` under the null.
pub const KOLMOGOROV_MEAN: f64 = 0.868_731;

/// Asymptotic 5% critical value of `sqrt(n) D_n`.
pub const KS_CRITICAL_5: f64 = 1.36;

/// Asymptotic 1% critical value of `sqrt(n) D_n`.
pub const KS_CRITICAL_1: f64 = 1.63;

/// Typical one-sample KS statistic under the null for `n` points.
pub fn ks_noise(n: usize) -> f64 {
    KOLMOGOROV_MEAN / (n as f64).sqrt()
}

fn check_sorted(samples: &[f64]) -> Result<(), HarnessError> {
    if samples.is_empty() {
        return Err(HarnessError::Domain("KS statistic of an empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) || samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(HarnessError::Domain("KS statistic needs sorted samples without NaN".into()));
    }
    Ok(())
}

/// One-sample Kolmogorov–Smirnov distance between the empirical CDF of
/// `sorted` and `cdf`.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, HarnessError> {
    check_sorted(sorted)?;
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64, HarnessError> {
    check_sorted(a)?;
    check_sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic p-value of a KS statistic `d` with effective sample size `n`,
/// using the Stephens small-sample correction.
pub fn kolmogorov_p_value(d: f64, n: f64) -> f64 {
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square goodness of fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Compares `observed` counts with `probs`. Cells with expected count below
/// 5 are pooled into one cell.
pub fn chi_square_test(observed: &[u64], probs: &[f64]) -> Result<ChiSquareTest, HarnessError> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(HarnessError::Domain("observed counts and probabilities must match".into()));
    }
    let n: u64 = observed.iter().sum();
    let total_p: f64 = probs.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = n as f64 * p / total_p;
        if e < 5.0 {
            pooled.0 += o as f64;
            pooled.1 += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pooled.1 > 0.0 || pooled.0 > 0.0 {
        cells.push(pooled);
    }
    let statistic: f64 = cells
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let df = cells.len().saturating_sub(1);
    let p_value = if df == 0 {
        1.0
    } else if statistic.is_infinite() {
        0.0
    } else {
        ChiSquared::new(df as f64).expect("positive degrees of freedom").sf(statistic)
    };
    Ok(ChiSquareTest { statistic, df, p_value })
}

/// Sample mean and its standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ordinary least squares `y = a + b x`; returns `(b, se(b))`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if n == 2 {
        return Some((slope, 0.0));
    }
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Some((slope, (rss / (n as f64 - 2.0) / sxx).sqrt()))
}
