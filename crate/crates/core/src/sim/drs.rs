//! Static versus dynamic rebate volume experiment.
//!
//! Day 0 holds the initial volume; days `1..T` are updates, so a run of
//! `T` days performs `T - 1` updates:
//!
//! ```text
//! static:  V_t = V_{t-1} * (1 + e_t)
//! dynamic: V_t = V_{t-1} * (1 + k * (rho(V_{t-1}) - static_rebate) + e'_t)
//! ```
//!
//! `e_t` and `e'_t` are independent `N(0, noise_std^2)` draws, taken in that
//! order each day. `rho` is [`dynamic_rebate`] against `target_volume`.
//! Volumes are floored at `volume_floor`.

use serde::{Deserialize, Serialize};

use super::rng::{self, SimRng};
use crate::error::{Error, Result};
use crate::fees::{dynamic_rebate, RebateContext};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrsSimConfig {
    pub days: usize,
    pub initial_volume: f64,
    pub target_volume: f64,
    pub static_rebate: f64,
    pub sensitivity: f64,
    pub noise_std: f64,
    pub seed: u64,
    pub replications: usize,
    pub volume_floor: f64,
}

impl Default for DrsSimConfig {
    fn default() -> Self {
        DrsSimConfig {
            days: 100,
            initial_volume: 1e6,
            target_volume: 1e6,
            static_rebate: 0.35,
            sensitivity: 0.05,
            noise_std: 0.01,
            seed: 0,
            replications: 1,
            volume_floor: 1.0,
        }
    }
}

impl DrsSimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.days < 1 {
            return Err(Error::config("drs.days", "must be at least 1"));
        }
        if !(self.initial_volume.is_finite() && self.initial_volume > 0.0) {
            return Err(Error::config("drs.initial_volume", "must be positive"));
        }
        if !(self.target_volume.is_finite() && self.target_volume > 0.0) {
            return Err(Error::config("drs.target_volume", "must be positive"));
        }
        if !self.static_rebate.is_finite() {
            return Err(Error::config("drs.static_rebate", "must be finite"));
        }
        if !self.sensitivity.is_finite() {
            return Err(Error::config("drs.sensitivity", "must be finite"));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::config("drs.noise_std", "must be non-negative"));
        }
        if self.replications < 1 {
            return Err(Error::config("drs.replications", "must be at least 1"));
        }
        if !(self.volume_floor.is_finite() && self.volume_floor > 0.0) {
            return Err(Error::config("drs.volume_floor", "must be positive"));
        }
        Ok(())
    }
}

/// Daily series for one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrsRun {
    pub static_series: Vec<f64>,
    pub dynamic_series: Vec<f64>,
    /// Rebate in force on each day: `rho(V_{t-1})` for `t >= 1`, and
    /// `rho(V_0)` on day 0.
    pub rho_applied: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub mean_volume: f64,
    /// Last day over day 0.
    pub final_ratio: f64,
    /// Sample standard deviation of daily log changes (0 with fewer than
    /// two changes).
    pub volatility: f64,
}

impl ArmSummary {
    fn of(series: &[f64]) -> Self {
        let mean_volume = series.iter().sum::<f64>() / series.len() as f64;
        let final_ratio = series[series.len() - 1] / series[0];
        let changes: Vec<f64> = series.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        let volatility = if changes.len() < 2 {
            0.0
        } else {
            let m = changes.iter().sum::<f64>() / changes.len() as f64;
            (changes.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (changes.len() - 1) as f64)
                .sqrt()
        };
        ArmSummary {
            mean_volume,
            final_ratio,
            volatility,
        }
    }
}

/// Statistics across all replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub replications: usize,
    pub mean_static_final_ratio: f64,
    pub mean_dynamic_final_ratio: f64,
    /// Mean over replications of `mean(dynamic) / mean(static)`.
    pub mean_uplift: f64,
    /// Fraction of replications whose dynamic mean volume beats the static one.
    pub dynamic_win_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrsSimResult {
    pub config: DrsSimConfig,
    /// Series of replication 0.
    pub run: DrsRun,
    pub static_summary: ArmSummary,
    pub dynamic_summary: ArmSummary,
    /// `mean(dynamic) / mean(static)` for replication 0.
    pub mean_uplift: f64,
    pub ensemble: EnsembleSummary,
}

/// Runs replication `index` of `config`.
pub fn run_replication(config: &DrsSimConfig, index: u64) -> Result<DrsRun> {
    config.validate()?;
    let mut rng = rng::stream(config.seed, index);
    Ok(simulate(config, &mut rng))
}

fn simulate(config: &DrsSimConfig, rng: &mut SimRng) -> DrsRun {
    let rho = |v: f64| {
        // Volumes are floored positive and the target is validated, so the
        // context is always well formed.
        dynamic_rebate(&RebateContext::new(v, config.target_volume).expect("validated context"))
    };
    let floor = config.volume_floor;

    let mut static_series = Vec::with_capacity(config.days);
    let mut dynamic_series = Vec::with_capacity(config.days);
    let mut rho_applied = Vec::with_capacity(config.days);
    static_series.push(config.initial_volume);
    dynamic_series.push(config.initial_volume);
    rho_applied.push(rho(config.initial_volume));

    for t in 1..config.days {
        let noise_static = rng::normal(rng, config.noise_std);
        let noise_dynamic = rng::normal(rng, config.noise_std);

        let prev_static = static_series[t - 1];
        static_series.push((prev_static * (1.0 + noise_static)).max(floor));

        let prev_dynamic = dynamic_series[t - 1];
        let current = rho(prev_dynamic);
        let feedback = config.sensitivity * (current - config.static_rebate);
        dynamic_series.push((prev_dynamic * (1.0 + feedback + noise_dynamic)).max(floor));
        rho_applied.push(current);
    }

    DrsRun {
        static_series,
        dynamic_series,
        rho_applied,
    }
}

pub fn run_drs_simulation(config: &DrsSimConfig) -> Result<DrsSimResult> {
    config.validate()?;

    let mut first = None;
    let mut sum_static = 0.0;
    let mut sum_dynamic = 0.0;
    let mut sum_uplift = 0.0;
    let mut wins = 0usize;
    for index in 0..config.replications {
        let mut rng = rng::stream(config.seed, index as u64);
        let run = simulate(config, &mut rng);
        let s = ArmSummary::of(&run.static_series);
        let d = ArmSummary::of(&run.dynamic_series);
        sum_static += s.final_ratio;
        sum_dynamic += d.final_ratio;
        sum_uplift += d.mean_volume / s.mean_volume;
        if d.mean_volume > s.mean_volume {
            wins += 1;
        }
        if first.is_none() {
            first = Some(run);
        }
    }

    let run = first.expect("at least one replication");
    let static_summary = ArmSummary::of(&run.static_series);
    let dynamic_summary = ArmSummary::of(&run.dynamic_series);
    let reps = config.replications as f64;
    Ok(DrsSimResult {
        config: *config,
        mean_uplift: dynamic_summary.mean_volume / static_summary.mean_volume,
        static_summary,
        dynamic_summary,
        run,
        ensemble: EnsembleSummary {
            replications: config.replications,
            mean_static_final_ratio: sum_static / reps,
            mean_dynamic_final_ratio: sum_dynamic / reps,
            mean_uplift: sum_uplift / reps,
            dynamic_win_fraction: wins as f64 / reps,
        },
    })
}
