use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::Matrix;
use crate::error::{Error, Result};
use crate::ingest::PlayerRegistry;

/// Significance level applied to Bonferroni-adjusted p-values.
pub const DEFAULT_ALPHA: f64 = 5e-4;

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::arg("series lengths differ"));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::SampleSize { required: 3, got: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::value("zero-variance series"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// `r·√((n−2)/(1−r²))`.
pub fn t_statistic(r: f64, n: usize) -> f64 {
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return f64::INFINITY.copysign(r);
    }
    r * ((n as f64 - 2.0) / denom).sqrt()
}

/// Two-sided p-value of `t` under Student's t with `df` degrees of freedom.
pub fn t_p_value(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.cdf(-t.abs())).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub metric: String,
    /// 1-based principal component.
    pub dimension: usize,
    pub n: usize,
    pub r: f64,
    pub t: f64,
    pub p_value: f64,
    /// `p_value` times the number of metrics, capped at 1.
    pub p_bonferroni: f64,
    pub significant: bool,
}

pub const METRICS: [&str; 5] = ["fg_made", "threes_made", "assists", "rebounds", "plus_minus"];

/// Per-minute box metrics for players with positive minutes; returns the
/// player ids used and one column per metric.
pub fn per_minute_metrics(registry: &PlayerRegistry) -> (Vec<u32>, Vec<(&'static str, Vec<f64>)>) {
    let players: Vec<_> = registry.players().iter().filter(|p| p.minutes > 0.0).collect();
    let ids = players.iter().map(|p| p.id).collect();
    let columns = METRICS
        .iter()
        .map(|&name| {
            let values = players
                .iter()
                .map(|p| {
                    let raw = match name {
                        "fg_made" => p.fg_made as f64,
                        "threes_made" => p.threes_made as f64,
                        "assists" => p.assists as f64,
                        "rebounds" => p.rebounds as f64,
                        _ => p.plus_minus as f64,
                    };
                    raw / p.minutes
                })
                .collect();
            (name, values)
        })
        .collect();
    (ids, columns)
}

/// Correlates each metric column with the first two score columns of `proj`
/// (rows aligned with the metric values).
pub fn metric_correlations_from_columns(
    proj: &Matrix,
    metrics: &[(&str, Vec<f64>)],
    alpha: f64,
) -> Result<Vec<CorrelationRow>> {
    let dims = proj.cols().min(2);
    let comparisons = metrics.len() as f64;
    let mut rows = Vec::with_capacity(metrics.len() * dims);
    for (name, values) in metrics {
        if values.len() != proj.rows() {
            return Err(Error::arg(format!("{name}: {} values for {} players", values.len(), proj.rows())));
        }
        for dim in 0..dims {
            let scores = proj.column(dim);
            let r = pearson(values, &scores).map_err(|e| match e {
                Error::Value(_) => Error::value(format!("{name} or dimension {} has zero variance", dim + 1)),
                other => other,
            })?;
            let n = values.len();
            let t = t_statistic(r, n);
            let p_value = t_p_value(t, n as f64 - 2.0);
            let p_bonferroni = (p_value * comparisons).min(1.0);
            rows.push(CorrelationRow {
                metric: name.to_string(),
                dimension: dim + 1,
                n,
                r,
                t,
                p_value,
                p_bonferroni,
                significant: p_bonferroni < alpha,
            });
        }
    }
    Ok(rows)
}

/// Pearson correlation of per-minute box metrics with PCA dimensions 1 and 2.
/// Players with zero minutes are left out.
pub fn metric_correlations(proj: &Matrix, registry: &PlayerRegistry, alpha: f64) -> Result<Vec<CorrelationRow>> {
    if proj.rows() != registry.len() {
        return Err(Error::arg("projection rows must match the registry"));
    }
    let (ids, columns) = per_minute_metrics(registry);
    let mut kept = Matrix::zeros(ids.len(), proj.cols());
    for (row, &id) in ids.iter().enumerate() {
        kept.row_mut(row).copy_from_slice(proj.row(id as usize));
    }
    metric_correlations_from_columns(&kept, &columns, alpha)
}
