//! Forecast verification statistics: RMSE, normalized RMSE with a
//! percentile-bootstrap 95% interval, and Pearson correlation.
//!
//! Pairs are `(measured, predicted)`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forecast::Forecaster;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;
pub const MIN_BOOTSTRAP_SAMPLES: usize = 30;
pub const CI_METHOD: &str = "percentile_bootstrap";

/// Normalizer of the nRMSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NrmseDivisor {
    /// Mean of the measurements.
    #[default]
    Mean,
    /// Range (max − min) of the measurements.
    Range,
}

impl NrmseDivisor {
    pub fn as_str(self) -> &'static str {
        match self {
            NrmseDivisor::Mean => "mean",
            NrmseDivisor::Range => "range",
        }
    }
}

impl fmt::Display for NrmseDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NrmseDivisor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(NrmseDivisor::Mean),
            "range" => Ok(NrmseDivisor::Range),
            other => Err(Error::input(format!("unknown nRMSE divisor `{other}`"))),
        }
    }
}

fn non_empty(pairs: &[(f64, f64)]) -> Result<()> {
    if pairs.is_empty() {
        Err(Error::input("metric needs at least one pair"))
    } else {
        Ok(())
    }
}

pub fn rmse(pairs: &[(f64, f64)]) -> Result<f64> {
    non_empty(pairs)?;
    let sse: f64 = pairs.iter().map(|(m, p)| (p - m) * (p - m)).sum();
    Ok((sse / pairs.len() as f64).sqrt())
}

fn divisor_value(pairs: &[(f64, f64)], divisor: NrmseDivisor) -> Result<f64> {
    let value = match divisor {
        NrmseDivisor::Mean => pairs.iter().map(|(m, _)| m).sum::<f64>() / pairs.len() as f64,
        NrmseDivisor::Range => {
            let (lo, hi) = pairs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (m, _)| {
                    (lo.min(*m), hi.max(*m))
                });
            hi - lo
        }
    };
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::input(format!(
            "nRMSE {divisor} of measurements must be positive, got {value}"
        )))
    }
}

/// `100 · rmse / divisor`, in percent.
pub fn nrmse(pairs: &[(f64, f64)], divisor: NrmseDivisor) -> Result<f64> {
    non_empty(pairs)?;
    Ok(100.0 * rmse(pairs)? / divisor_value(pairs, divisor)?)
}

/// Percentile-bootstrap 95% interval of the nRMSE.
pub fn nrmse_ci95<R: Rng + ?Sized>(
    pairs: &[(f64, f64)],
    divisor: NrmseDivisor,
    resamples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if pairs.len() < MIN_BOOTSTRAP_SAMPLES {
        return Err(Error::input(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP_SAMPLES} pairs, got {}",
            pairs.len()
        )));
    }
    if resamples < 2 {
        return Err(Error::input("bootstrap needs at least two resamples"));
    }
    let n = pairs.len();
    let mut sample = Vec::with_capacity(n);
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        sample.clear();
        sample.extend((0..n).map(|_| pairs[rng.random_range(0..n)]));
        stats.push(nrmse(&sample, divisor)?);
    }
    stats.sort_by(f64::total_cmp);
    Ok((percentile(&stats, 0.025), percentile(&stats, 0.975)))
}

/// [`nrmse_ci95`] with a fresh ChaCha8 generator seeded from `seed`.
pub fn nrmse_ci95_seeded(
    pairs: &[(f64, f64)],
    divisor: NrmseDivisor,
    resamples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    nrmse_ci95(pairs, divisor, resamples, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Linear interpolation between order statistics of a sorted slice.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Pearson correlation of measured against predicted.
pub fn correlation(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::input("correlation needs at least two pairs"));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::input("correlation undefined for zero variance"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Sample autocorrelation at `lag`, over pairs where both ends are present.
/// Mean and variance come from all present values.
pub fn lag_autocorrelation(values: &[Option<f64>], lag: usize) -> Result<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.len() < 2 || lag >= values.len() {
        return Err(Error::input("series too short for autocorrelation"));
    }
    let mean = present.iter().sum::<f64>() / present.len() as f64;
    let var = present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / present.len() as f64;
    if var == 0.0 {
        return Err(Error::input("autocorrelation undefined for zero variance"));
    }
    let (mut cov, mut count) = (0.0, 0usize);
    for (a, b) in values.iter().zip(&values[lag..]) {
        if let (Some(a), Some(b)) = (a, b) {
            cov += (a - mean) * (b - mean);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::input("no complete pairs at this lag"));
    }
    Ok(cov / count as f64 / var)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricOptions {
    pub divisor: NrmseDivisor,
    pub resamples: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            divisor: NrmseDivisor::Mean,
            resamples: BOOTSTRAP_RESAMPLES,
        }
    }
}

/// One forecaster scored on one target series.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub forecaster: Forecaster,
    pub target: String,
    pub n: usize,
    pub rmse: f64,
    pub nrmse: f64,
    pub nrmse_ci95: (f64, f64),
    /// `None` when either coordinate has zero variance.
    pub cc: Option<f64>,
    pub divisor: NrmseDivisor,
}

impl EvaluationReport {
    pub fn compute(
        forecaster: Forecaster,
        target: impl Into<String>,
        pairs: &[(f64, f64)],
        options: &MetricOptions,
        seed: u64,
    ) -> Result<Self> {
        let nrmse_value = nrmse(pairs, options.divisor)?;
        let ci = nrmse_ci95_seeded(pairs, options.divisor, options.resamples, seed)?;
        Ok(Self {
            forecaster,
            target: target.into(),
            n: pairs.len(),
            rmse: rmse(pairs)?,
            nrmse: nrmse_value,
            nrmse_ci95: ci,
            cc: correlation(pairs).ok(),
            divisor: options.divisor,
        })
    }

    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.nrmse_ci95.1 - self.nrmse_ci95.0)
    }
}

pub const REPORT_CSV_HEADER: &str =
    "forecaster,target,n,rmse_wh_m2,nrmse_pct,nrmse_ci95_lo,nrmse_ci95_hi,cc,nrmse_divisor,ci_method,seed";

/// Text table in the layout `forecaster | RMSE | nRMSE ± CI95 | CC`.
pub fn render_table(reports: &[EvaluationReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20} | {:>6} | {:>12} | {:<32} | {:>5}",
        "forecaster", "n", "RMSE (Wh/m2)", "nRMSE (%) ± CI95", "CC"
    );
    let _ = writeln!(out, "{}", "-".repeat(89));
    for r in reports {
        let label = format!("{} ({})", r.forecaster.as_str(), r.forecaster.case_letter());
        let nrmse = format!(
            "{:.2} ± {:.2} [{:.2}, {:.2}]",
            r.nrmse,
            r.ci_half_width(),
            r.nrmse_ci95.0,
            r.nrmse_ci95.1
        );
        let cc = r.cc.map_or_else(|| "n/a".to_string(), |c| format!("{c:.3}"));
        let _ = writeln!(
            out,
            "{:<20} | {:>6} | {:>12.1} | {:<32} | {:>5}",
            label, r.n, r.rmse, nrmse, cc
        );
    }
    out
}

/// Machine-readable report; full-precision values.
pub fn reports_to_csv(reports: &[EvaluationReport], seed: u64) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let cc = r.cc.map_or_else(|| "NA".to_string(), |c| c.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.forecaster.as_str(),
            r.target,
            r.n,
            r.rmse,
            r.nrmse,
            r.nrmse_ci95.0,
            r.nrmse_ci95.1,
            cc,
            r.divisor,
            CI_METHOD,
            seed
        );
    }
    out
}
