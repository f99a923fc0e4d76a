//! Farr's ratio law: tetrad K estimates, their uncertainty, pooling,
//! conversion to IDEA's d, and epidemic-wave detection.
//!
//! Farr's rule says the ratio of successive incidence ratios over four
//! consecutive generations is a constant, `K = (I(t+3)/I(t+2)) /
//! (I(t+1)/I(t))`. K behaves like an odds ratio of the 2x2 incidence
//! table, so `log K` carries the familiar asymptotic variance
//! `1/I(t) + 1/I(t+1) + 1/I(t+2) + 1/I(t+3)`. On an exact IDEA curve,
//! `K = 1/(1+d)^4` for every tetrad, independent of r0, which is what makes
//! K a cheap estimator of d. K > 1 signals renewed exponential growth and
//! is used here as a wave-onset alarm.

use std::io;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::stats::normal_quantile;
use crate::timeseries::GenerationSeries;

/// One tetrad's K estimate.
///
/// `t_start` indexes the first of the four generations. The numeric fields
/// are `None` exactly when the tetrad contains an incidence ≤ 0, where K is
/// undefined (division by zero) or meaningless (reporting correction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarrEstimate {
    pub t_start: i64,
    pub k: Option<f64>,
    pub log_k_variance: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

impl FarrEstimate {
    pub fn is_valid(&self) -> bool {
        self.k.is_some()
    }
}

/// Sliding-window K estimates (stride 1) with confidence intervals.
///
/// `confidence_level` is two-sided, e.g. 0.95. Windows containing any
/// incidence ≤ 0 are emitted as invalid placeholders so the output stays
/// aligned with the input generations.
pub fn compute_k_series(
    series: &GenerationSeries,
    confidence_level: f64,
) -> Result<Vec<FarrEstimate>> {
    if series.len() < 4 {
        return Err(Error::validation(format!(
            "K needs at least 4 generations, got {}",
            series.len()
        )));
    }
    if !(confidence_level > 0.0 && confidence_level < 1.0) {
        return Err(Error::domain(format!(
            "confidence level must be in (0, 1), got {confidence_level}"
        )));
    }
    let z = normal_quantile(0.5 + confidence_level / 2.0)?;

    let estimates = series
        .values()
        .windows(4)
        .enumerate()
        .map(|(offset, w)| {
            let t_start = series.generation(offset);
            if w.iter().any(|&v| v <= 0.0) {
                return FarrEstimate {
                    t_start,
                    k: None,
                    log_k_variance: None,
                    ci_low: None,
                    ci_high: None,
                };
            }
            let k = (w[3] / w[2]) / (w[1] / w[0]);
            let variance = 1.0 / w[0] + 1.0 / w[1] + 1.0 / w[2] + 1.0 / w[3];
            let half_width = z * variance.sqrt();
            let log_k = k.ln();
            FarrEstimate {
                t_start,
                k: Some(k),
                log_k_variance: Some(variance),
                ci_low: Some((log_k - half_width).exp()),
                ci_high: Some((log_k + half_width).exp()),
            }
        })
        .collect();
    Ok(estimates)
}

/// Writes columns `(t_start, k, log_k_variance, ci_low, ci_high, valid)`;
/// invalid tetrads leave the numeric cells empty.
pub fn k_series_to_csv<W: io::Write>(estimates: &[FarrEstimate], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t_start", "k", "log_k_variance", "ci_low", "ci_high", "valid"])
        .map_err(csv_io)?;
    let cell = |v: Option<f64>| v.map(|x| fmt_sig(x, 12)).unwrap_or_default();
    for e in estimates {
        w.write_record([
            e.t_start.to_string(),
            cell(e.k),
            cell(e.log_k_variance),
            cell(e.ci_low),
            cell(e.ci_high),
            e.is_valid().to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(io_err) => Error::Io(io_err),
        other => Error::validation(format!("CSV write failed: {other:?}")),
    }
}

/// IDEA control parameter equivalent to a Farr K: `d = K^(-1/4) − 1`.
pub fn k_to_d(k: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("K must be positive, got {k}")));
    }
    Ok((-k.ln() / 4.0).exp_m1())
}

/// Farr K implied by an IDEA control parameter: `K = (1+d)^(-4)`.
pub fn d_to_k(d: f64) -> Result<f64> {
    if !(d > -1.0 && d.is_finite()) {
        return Err(Error::domain(format!(
            "control parameter must satisfy 1 + d > 0, got {d}"
        )));
    }
    let g = 1.0 + d;
    Ok(1.0 / (g * g * g * g))
}

/// Pooling strategy for a series of K estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolMethod {
    /// `exp(mean(log k))` over valid tetrads.
    GeometricMean,
    /// Fixed-effect inverse-variance pool on the log scale:
    /// `exp(Σ(log kᵢ/vᵢ) / Σ(1/vᵢ))` with `vᵢ = log_k_variance`.
    InverseVariance,
}

/// Summary K over a tetrad series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PooledK {
    pub method: PoolMethod,
    pub k_pooled: f64,
    pub n_estimates: usize,
    pub d_equivalent: f64,
}

/// Pools the valid estimates into one summary K and its equivalent d.
pub fn pool_k(estimates: &[FarrEstimate], method: PoolMethod) -> Result<PooledK> {
    let valid: Vec<&FarrEstimate> = estimates.iter().filter(|e| e.is_valid()).collect();
    if valid.is_empty() {
        return Err(Error::Estimation(
            "no valid K estimates to pool".to_string(),
        ));
    }
    let log_k_pooled = match method {
        PoolMethod::GeometricMean => {
            let sum: f64 = valid.iter().map(|e| e.k.expect("valid").ln()).sum();
            sum / valid.len() as f64
        }
        PoolMethod::InverseVariance => {
            let (mut num, mut den) = (0.0, 0.0);
            for e in &valid {
                let weight = 1.0 / e.log_k_variance.expect("valid");
                num += e.k.expect("valid").ln() * weight;
                den += weight;
            }
            num / den
        }
    };
    let k_pooled = log_k_pooled.exp();
    Ok(PooledK {
        method,
        k_pooled,
        n_estimates: valid.len(),
        d_equivalent: k_to_d(k_pooled)?,
    })
}

/// A detected wave onset: the first tetrad of a qualifying K surge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveAlarm {
    pub t_start: i64,
    pub k: f64,
}

/// Finds maximal runs of at least `min_run` consecutive valid estimates
/// with `k > threshold`; each run is reported once, at its first tetrad.
///
/// `threshold` defaults to 1 in the CLI (K > 1 means renewed exponential
/// growth); `min_run` below 1 is treated as 1. Invalid estimates break runs.
pub fn detect_waves(estimates: &[FarrEstimate], threshold: f64, min_run: usize) -> Vec<WaveAlarm> {
    let min_run = min_run.max(1);
    let mut alarms = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, e) in estimates.iter().enumerate() {
        let hot = e.k.map(|k| k > threshold).unwrap_or(false);
        match (hot, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(start)) => {
                if i - start >= min_run {
                    alarms.push(WaveAlarm {
                        t_start: estimates[start].t_start,
                        k: estimates[start].k.expect("hot"),
                    });
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(start) = run_start {
        if estimates.len() - start >= min_run {
            alarms.push(WaveAlarm {
                t_start: estimates[start].t_start,
                k: estimates[start].k.expect("hot"),
            });
        }
    }
    alarms
}
