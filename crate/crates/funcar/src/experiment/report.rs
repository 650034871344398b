//! Machine-readable rate reports.
//!
//! A report carries one row per (n, replication, p) with squared errors,
//! per-(n, p) aggregates, and log-log slope fits. Two on-disk formats:
//!
//! - CSV (`schema_version` 1): header
//!   `n,rep,p,alpha,err_rho_sq,err_r0_sq,err_r1_sq`, one row per
//!   (n, replication, p), `p` written as `1`, `2` or `inf`.
//! - JSON: the full nested report including the config echo, aggregates
//!   and slopes.
//!
//! Reports contain no timestamps, so identical runs serialize to identical
//! bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::PNorm;
use crate::error::{Error, Result};

/// On-disk schema version written into every report.
pub const SCHEMA_VERSION: u32 = 1;

/// Squared estimation errors for one replication at one sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub rep: usize,
    pub p: PNorm,
    pub alpha: f64,
    pub err_rho_sq: f64,
    pub err_r0_sq: f64,
    pub err_r1_sq: f64,
}

/// Location summary of one error quantity across replications.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub iqr: f64,
}

/// Per-(n, p) aggregates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub p: PNorm,
    pub err_rho_sq: Stats,
    pub err_r0_sq: Stats,
    pub err_r1_sq: Stats,
}

/// Ordinary least-squares fit of log(value) against log(n).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub p: PNorm,
    /// Which error column was fitted: `err_rho_sq`, `err_r0_sq`, `err_r1_sq`.
    pub quantity: String,
    /// Which per-n statistic was fitted: `mean` or `median`.
    pub statistic: String,
    pub slope: f64,
    pub stderr: f64,
}

/// Complete result of a rate experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub schema_version: u32,
    pub software_version: String,
    pub config: ExperimentConfig,
    pub rows: Vec<RateRow>,
    pub aggregates: Vec<Aggregate>,
    pub slopes: Vec<SlopeFit>,
}

impl RateReport {
    /// The flat per-row CSV table.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("n,rep,p,alpha,err_rho_sq,err_r0_sq,err_r1_sq\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n,
                r.rep,
                r.p.label(),
                r.alpha,
                r.err_rho_sq,
                r.err_r0_sq,
                r.err_r1_sq
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numerical(format!("report serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("cannot parse report JSON: {e}")))
    }

    /// Look up a fitted slope.
    pub fn slope(&self, p: PNorm, quantity: &str, statistic: &str) -> Option<&SlopeFit> {
        self.slopes
            .iter()
            .find(|s| s.p == p && s.quantity == quantity && s.statistic == statistic)
    }

    /// Aggregates for one p, in grid order.
    pub fn aggregates_for(&self, p: PNorm) -> Vec<&Aggregate> {
        self.aggregates.iter().filter(|a| a.p == p).collect()
    }
}

/// Quantile of a sorted slice by linear interpolation between order
/// statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(super) fn stats(values: &[f64]) -> Stats {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
    Stats {
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        median: quantile(&sorted, 0.5),
        iqr: quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
    }
}

/// OLS of log(value) on log(n); returns (slope, standard error). Requires
/// at least three points with strictly positive values.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "slope fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for (i, &(n, v)) in points.iter().enumerate() {
        if n.is_nan() || v.is_nan() || n <= 0.0 || v <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "slope fit needs positive values, point {i} is ({n}, {v})"
            )));
        }
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
    let x_bar = xs.iter().sum::<f64>() / k;
    let y_bar = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_bar) * (y - y_bar))
        .sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("slope fit needs distinct n values".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (ssr.max(0.0) / (k - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}

pub(super) fn aggregate_rows(rows: &[RateRow], n_grid: &[usize], p_norms: &[PNorm]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &n in n_grid {
        for &p in p_norms {
            let select = |f: fn(&RateRow) -> f64| -> Vec<f64> {
                rows.iter()
                    .filter(|r| r.n == n && r.p == p)
                    .map(f)
                    .collect()
            };
            let rho = select(|r| r.err_rho_sq);
            if rho.is_empty() {
                continue;
            }
            out.push(Aggregate {
                n,
                p,
                err_rho_sq: stats(&rho),
                err_r0_sq: stats(&select(|r| r.err_r0_sq)),
                err_r1_sq: stats(&select(|r| r.err_r1_sq)),
            });
        }
    }
    out
}

type QuantityOf = fn(&Aggregate) -> Stats;
type StatisticOf = fn(Stats) -> f64;

/// Fit slopes for every (p, quantity, statistic) combination that has at
/// least three positive per-n values; combinations that do not are skipped.
pub(super) fn fit_all_slopes(aggregates: &[Aggregate], p_norms: &[PNorm]) -> Vec<SlopeFit> {
    let mut out = Vec::new();
    let quantities: [(&str, QuantityOf); 3] = [
        ("err_rho_sq", |a| a.err_rho_sq),
        ("err_r0_sq", |a| a.err_r0_sq),
        ("err_r1_sq", |a| a.err_r1_sq),
    ];
    let statistics: [(&str, StatisticOf); 2] = [("mean", |s| s.mean), ("median", |s| s.median)];
    for &p in p_norms {
        let per_n: Vec<&Aggregate> = aggregates.iter().filter(|a| a.p == p).collect();
        for (qname, qf) in quantities {
            for (sname, sf) in statistics {
                let points: Vec<(f64, f64)> = per_n
                    .iter()
                    .map(|a| (a.n as f64, sf(qf(a))))
                    .collect();
                if let Ok((slope, stderr)) = fit_loglog_slope(&points) {
                    out.push(SlopeFit {
                        p,
                        quantity: qname.to_string(),
                        statistic: sname.to_string(),
                        slope,
                        stderr,
                    });
                }
            }
        }
    }
    out
}
