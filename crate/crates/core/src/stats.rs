//! Small statistical utilities: sample moments, KS tests, chi-squared
//! uniformity.

use crate::error::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// One-sample Kolmogorov-Smirnov distance against an analytic CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty sample for KS distance".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut max = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let upper = ((i + 1) as f64 / n - f).abs();
        let lower = (i as f64 / n - f).abs();
        max = max.max(upper).max(lower);
    }
    Ok(max)
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("empty sample for two-sample KS".into()));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let (na, nb) = (sa.len(), sb.len());
    let mut i = 0;
    let mut j = 0;
    let mut max = 0.0_f64;
    while i < na && j < nb {
        let x = sa[i].min(sb[j]);
        while i < na && sa[i] <= x {
            i += 1;
        }
        while j < nb && sb[j] <= x {
            j += 1;
        }
        let d = (i as f64 / na as f64 - j as f64 / nb as f64).abs();
        max = max.max(d);
    }
    Ok(max)
}

/// Critical value for the two-sample KS test; `c(0.01) = 1.628`.
pub fn ks_two_sample_threshold(na: usize, nb: usize, significance: f64) -> f64 {
    let c = (-0.5 * (significance / 2.0).ln()).sqrt();
    c * ((na + nb) as f64 / (na * nb) as f64).sqrt()
}

#[derive(Debug, Clone)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub critical: f64,
    pub dof: usize,
    pub pass: bool,
}

/// Chi-squared test of uniformity over `counts.len()` categories.
pub fn chi_squared_uniformity(counts: &[u64], significance: f64) -> Result<ChiSquaredTest> {
    let bins = counts.len();
    if bins < 2 {
        return Err(Error::InsufficientData("need at least 2 categories".into()));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InsufficientData("no observations".into()));
    }
    let expected = total as f64 / bins as f64;
    let statistic: f64 =
        counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dof = bins - 1;
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidParameter(format!("chi-squared dof: {e}")))?;
    let critical = dist.inverse_cdf(1.0 - significance);
    Ok(ChiSquaredTest { statistic, critical, dof, pass: statistic <= critical })
}
