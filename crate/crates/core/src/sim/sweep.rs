//! Retention and impermanent-loss sweeps over a price-multiplier grid.
//!
//! Rows are ordered by exponent first, then by multiplier, so each exponent
//! forms one contiguous curve.

use serde::{Deserialize, Serialize};

use crate::amm::{depleted_reserves, retention_ratio, Exponent};
use crate::error::{Error, Result};
use crate::il::IlCurvePoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetentionRow {
    pub m: f64,
    pub n: Exponent,
    pub retention_ratio: f64,
    /// Depletion-side reserve as a fraction of the initial reserve.
    pub depleted_fraction: f64,
}

/// `points` values spaced evenly in log10 between `10^lo` and `10^hi`,
/// endpoints included.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo)],
        _ => {
            let last = (points - 1) as f64;
            (0..points)
                .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / last))
                .collect()
        }
    }
}

/// 200 log-spaced multipliers from 1 to 100.
pub fn default_m_grid() -> Vec<f64> {
    log_grid(0.0, 2.0, 200)
}

fn check_inputs(m_grid: &[f64], n_values: &[Exponent]) -> Result<()> {
    if m_grid.is_empty() {
        return Err(Error::config("sweep.m_grid", "must not be empty"));
    }
    if n_values.is_empty() {
        return Err(Error::config("sweep.n_values", "must not be empty"));
    }
    if let Some(bad) = m_grid.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
        return Err(Error::config("sweep.m_grid", format!("{bad} is not a positive multiplier")));
    }
    if m_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("sweep.m_grid", "must be strictly ascending"));
    }
    Ok(())
}

pub fn sweep_retention(m_grid: &[f64], n_values: &[Exponent]) -> Result<Vec<RetentionRow>> {
    check_inputs(m_grid, n_values)?;
    let mut rows = Vec::with_capacity(m_grid.len() * n_values.len());
    for &n in n_values {
        for &m in m_grid {
            rows.push(RetentionRow {
                m,
                n,
                retention_ratio: retention_ratio(m, n)?,
                depleted_fraction: depleted_reserves(1.0, m, n)?,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_il(m_grid: &[f64], n_values: &[Exponent]) -> Result<Vec<IlCurvePoint>> {
    check_inputs(m_grid, n_values)?;
    n_values
        .iter()
        .flat_map(|&n| m_grid.iter().map(move |&m| IlCurvePoint::evaluate(m, n)))
        .collect()
}
