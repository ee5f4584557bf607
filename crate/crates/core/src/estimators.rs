//! Closed-form per-round estimators and aggregation of protocol rounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::protocols::{ProtocolKind, RoundOutcome, RoundRecord};
use crate::stats::summarize;
use crate::symmetric::{snapshot_inner, FactoredSnapshot};

/// Fraction of matching outcome pairs, `(1/m^2) sum_{i,j} [a_i == b_j]`.
///
/// Computed from an outcome histogram in `O(m + max index)`.
pub fn collision_overlap(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("outcome lists must be non-empty".into()));
    }
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "outcome lists differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let size = a.iter().max().copied().unwrap_or(0) + 1;
    let mut hist = vec![0u64; size];
    for &x in a {
        hist[x] += 1;
    }
    let matches: u64 = b
        .iter()
        .filter_map(|&y| hist.get(y))
        .sum();
    let m = a.len() as f64;
    Ok(matches as f64 / (m * m))
}

/// Incoherent-protocol estimator `(d+1)^2/d * g - (d+2)/d`.
pub fn omega(g: f64, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    let d = dim as f64;
    Ok((d + 1.0).powi(2) / d * g - (d + 2.0) / d)
}

/// Coherent-protocol estimator
/// `(d+1)(d+T)^2/(T^2 d) * f - [(d+1)(d+2T) + T^2]/(T^2 d)`.
pub fn chi(f: f64, copies: usize, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    if copies == 0 {
        return Err(Error::InvalidArgument("copy count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidArgument(format!(
            "overlap {f} outside [0, 1]"
        )));
    }
    let d = dim as f64;
    let t = copies as f64;
    let slope = (d + 1.0) * (d + t).powi(2) / (t * t * d);
    let offset = ((d + 1.0) * (d + 2.0 * t) + t * t) / (t * t * d);
    Ok(slope * f - offset)
}

fn check_snapshot_lists(xs: &[FactoredSnapshot], ys: &[FactoredSnapshot]) -> Result<(usize, usize)> {
    let first = xs
        .first()
        .or(ys.first())
        .ok_or_else(|| Error::InvalidArgument("snapshot lists must be non-empty".into()))?;
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidArgument("snapshot lists must be non-empty".into()));
    }
    let (d, s) = (first.dim(), first.copies());
    for snap in xs.iter().chain(ys) {
        if snap.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: snap.dim(),
            });
        }
        if snap.copies() != s {
            return Err(Error::InvalidArgument(format!(
                "mixed snapshot copy counts: {} vs {}",
                s,
                snap.copies()
            )));
        }
    }
    Ok((d, s))
}

/// Shadow estimator `(1/(|xs| |ys| d^2)) sum_{i,j} tr[X_i^dag Y_j]`.
pub fn gamma(xs: &[FactoredSnapshot], ys: &[FactoredSnapshot]) -> Result<f64> {
    Ok(gamma_statistic(xs, ys)?.estimate)
}

/// Shadow estimate together with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowStatistic {
    pub estimate: f64,
    pub std_error: f64,
}

/// Shadow estimate and a standard error for it.
///
/// Because every `X_i` is independent of every `Y_j`, the double sum is a
/// two-sample U-statistic with kernel `h = tr[X^dag Y] / d^2`. Its variance is
/// `s10/n + s01/m + s11/(n m)` where `s10`, `s01` are the variances of the
/// conditional kernel means and `s11` the residual kernel variance. The
/// estimate uses the sample variances of the row and column means of the kernel
/// matrix with the residual part subtracted once (it enters each of them with
/// weight `1/m` resp. `1/n`).
///
/// Every row and column is summed sequentially so the result does not depend
/// on the rayon thread count.
pub fn gamma_statistic(xs: &[FactoredSnapshot], ys: &[FactoredSnapshot]) -> Result<ShadowStatistic> {
    let (d, _) = check_snapshot_lists(xs, ys)?;
    let scale = 1.0 / (d * d) as f64;
    let kernel = |x: &FactoredSnapshot, y: &FactoredSnapshot| {
        snapshot_inner(x, y).expect("validated snapshot lists") * scale
    };

    let rows: Vec<(f64, f64)> = xs
        .par_iter()
        .map(|x| {
            ys.iter().fold((0.0, 0.0), |(s, sq), y| {
                let h = kernel(x, y);
                (s + h, sq + h * h)
            })
        })
        .collect();
    let cols: Vec<f64> = ys
        .par_iter()
        .map(|y| xs.iter().map(|x| kernel(x, y)).sum())
        .collect();

    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let total: f64 = rows.iter().map(|r| r.0).sum();
    let total_sq: f64 = rows.iter().map(|r| r.1).sum();
    let estimate = total / (n * m);

    let row_means = summarize(rows.iter().map(|r| r.0 / m));
    let col_means = summarize(cols.iter().map(|c| c / n));
    let pairs = n * m;
    let kernel_var = if pairs > 1.0 {
        (total_sq - pairs * estimate * estimate).max(0.0) / (pairs - 1.0)
    } else {
        0.0
    };
    // E[var(row means)] = s10 + s11/m, E[var(col means)] = s01 + s11/n,
    // var(h) ~ s10 + s01 + s11.
    let residual = (kernel_var - row_means.variance - col_means.variance).max(0.0);
    let variance = row_means.variance / n + col_means.variance / m - residual / pairs;
    let floor = (row_means.variance / n).max(col_means.variance / m);
    let variance = variance.max(floor);
    Ok(ShadowStatistic {
        estimate,
        std_error: variance.sqrt(),
    })
}

/// Aggregate of a batch of protocol rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub protocol: ProtocolKind,
    pub mean: f64,
    pub std_error: f64,
    /// `rounds * std_error^2`; the sample variance of the per-round
    /// estimates for the incoherent and coherent protocols.
    pub per_round_variance: f64,
    pub rounds: u64,
    pub queries_per_device: u64,
    pub seed: u64,
    #[serde(default)]
    pub config_echo: serde_json::Value,
}

impl EstimateReport {
    pub fn with_config(mut self, config: serde_json::Value) -> Self {
        self.config_echo = config;
        self
    }

    /// The mean clamped to the physical range `[0, 1]`. Clamping biases the
    /// estimate, so this is for display only.
    pub fn clipped_mean(&self) -> f64 {
        self.mean.clamp(0.0, 1.0)
    }
}

/// Combines round records into an [`EstimateReport`].
///
/// Records are ordered by round index first, so any permutation of the same
/// records gives a bit-identical report. Incoherent and coherent rounds are
/// averaged; shadow rounds are combined through the full cross sum over the
/// two devices' snapshots.
pub fn aggregate(records: &[RoundRecord]) -> Result<EstimateReport> {
    if records.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "aggregation needs at least 2 rounds, got {}",
            records.len()
        )));
    }
    let protocol = records[0].protocol;
    if let Some(other) = records.iter().find(|r| r.protocol != protocol) {
        return Err(Error::InvalidArgument(format!(
            "mixed protocols in one aggregate: {protocol} and {}",
            other.protocol
        )));
    }
    let mut ordered: Vec<&RoundRecord> = records.iter().collect();
    ordered.sort_by_key(|r| r.round_index);

    let rounds = ordered.len() as u64;
    let queries_per_device = ordered.iter().map(|r| r.queries_per_device).sum();
    let seed = ordered[0].setting_seed.root();

    let (mean, std_error) = match protocol {
        ProtocolKind::Incoherent | ProtocolKind::Coherent => {
            let s = summarize(ordered.iter().map(|r| r.per_round_estimate));
            (s.mean, s.std_error)
        }
        ProtocolKind::Shadow => {
            let mut xs = Vec::with_capacity(ordered.len());
            let mut ys = Vec::with_capacity(ordered.len());
            for r in &ordered {
                match &r.raw {
                    RoundOutcome::Shadow {
                        snapshot_a,
                        snapshot_b,
                    } => {
                        xs.push(snapshot_a.clone());
                        ys.push(snapshot_b.clone());
                    }
                    _ => {
                        return Err(Error::InvalidArgument(
                            "shadow record without snapshot payload".into(),
                        ))
                    }
                }
            }
            let stat = gamma_statistic(&xs, &ys)?;
            (stat.estimate, stat.std_error)
        }
    };
    Ok(EstimateReport {
        protocol,
        mean,
        std_error,
        per_round_variance: rounds as f64 * std_error * std_error,
        rounds,
        queries_per_device,
        seed,
        config_echo: serde_json::Value::Null,
    })
}
