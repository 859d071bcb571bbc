//! Trade fees, volatility regimes, the three-way fee split, the dynamic
//! rebate ratio and epoch reward settlement.
//!
//! Every fee `F = gamma * V` is split into
//!
//! | bucket    | share            |
//! |-----------|------------------|
//! | LP        | `0.3 F`          |
//! | rebate    | `rho F`          |
//! | protocol  | `(0.7 - rho) F`  |
//!
//! with `rho` in `[0.3, 0.4]`. A tenth of each epoch's fees is set aside
//! out of the protocol share and paid out pro rata to trader volume when the
//! epoch is settled.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};

pub const LP_SHARE: f64 = 0.3;
pub const REBATE_FLOOR: f64 = 0.3;
pub const REBATE_CEILING: f64 = 0.4;
/// Fraction of fees routed from the protocol share to the epoch reward pool.
pub const REWARD_POOL_SHARE: f64 = 0.1;

/// Default trailing window (in periods) for realized volatility.
pub const DEFAULT_VOLATILITY_WINDOW: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Low,
    Moderate,
    High,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Low, Regime::Moderate, Regime::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Low => "low",
            Regime::Moderate => "moderate",
            Regime::High => "high",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fee rate and rebate cap for one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeParams {
    pub gamma: f64,
    pub rho_max: f64,
}

/// Volatility thresholds and per-regime parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeeSchedule {
    pub sigma_low: f64,
    pub sigma_high: f64,
    pub low: RegimeParams,
    pub moderate: RegimeParams,
    pub high: RegimeParams,
}

impl Default for FeeSchedule {
    fn default() -> Self {
        FeeSchedule {
            sigma_low: 0.01,
            sigma_high: 0.05,
            low: RegimeParams {
                gamma: 0.003,
                rho_max: 0.30,
            },
            moderate: RegimeParams {
                gamma: 0.005,
                rho_max: 0.35,
            },
            high: RegimeParams {
                gamma: 0.010,
                rho_max: 0.40,
            },
        }
    }
}

impl FeeSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_low.is_finite() && self.sigma_low >= 0.0) {
            return Err(Error::config("fees.sigma_low", "must be non-negative"));
        }
        if !(self.sigma_high.is_finite() && self.sigma_high > self.sigma_low) {
            return Err(Error::config(
                "fees.sigma_high",
                format!("must exceed sigma_low ({})", self.sigma_low),
            ));
        }
        for regime in Regime::ALL {
            let p = self.params(regime);
            if !(p.gamma > 0.0 && p.gamma < 1.0) {
                return Err(Error::config("fees.gamma", format!("{regime}: must be in (0, 1)")));
            }
            if !(p.rho_max > 0.0 && p.rho_max < 1.0) {
                return Err(Error::config("fees.rho_max", format!("{regime}: must be in (0, 1)")));
            }
        }
        Ok(())
    }

    /// Boundaries `sigma_low` and `sigma_high` both fall in the moderate band.
    pub fn classify_regime(&self, sigma: f64) -> Regime {
        if sigma > self.sigma_high {
            Regime::High
        } else if sigma < self.sigma_low {
            Regime::Low
        } else {
            Regime::Moderate
        }
    }

    pub fn params(&self, regime: Regime) -> RegimeParams {
        match regime {
            Regime::Low => self.low,
            Regime::Moderate => self.moderate,
            Regime::High => self.high,
        }
    }
}

/// `F = gamma * V`.
pub fn compute_fee(volume: f64, gamma: f64) -> Result<f64> {
    ensure_nonnegative("volume", volume)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain("gamma", "in (0, 1)", gamma));
    }
    Ok(gamma * volume)
}

/// Current volume `V` against the target `V_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RebateContext {
    current_volume: f64,
    target_volume: f64,
}

impl RebateContext {
    pub fn new(current_volume: f64, target_volume: f64) -> Result<Self> {
        ensure_nonnegative("current_volume", current_volume)?;
        ensure_positive("target_volume", target_volume)?;
        Ok(RebateContext {
            current_volume,
            target_volume,
        })
    }

    pub fn current_volume(&self) -> f64 {
        self.current_volume
    }

    pub fn target_volume(&self) -> f64 {
        self.target_volume
    }

    fn raw_rebate(&self) -> f64 {
        0.4 + 0.1 * (1.0 - self.current_volume / self.target_volume)
    }
}

/// `clamp(0.4 + 0.1 (1 - V/V_max), 0.3, 0.4)`.
///
/// The raw formula is at or above 0.4 whenever `V <= V_max`, so the rebate
/// only moves below the ceiling once volume exceeds its target.
pub fn dynamic_rebate(ctx: &RebateContext) -> f64 {
    ctx.raw_rebate().clamp(REBATE_FLOOR, REBATE_CEILING)
}

/// Regime-aware rebate: the ceiling is lowered to `min(0.4, rho_max)`.
pub fn dynamic_rebate_capped(ctx: &RebateContext, rho_max: f64) -> f64 {
    let ceiling = rho_max.clamp(REBATE_FLOOR, REBATE_CEILING);
    ctx.raw_rebate().clamp(REBATE_FLOOR, ceiling)
}

/// One fee broken into its three buckets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeeSplit {
    pub total: f64,
    pub lp_share: f64,
    pub rebate_share: f64,
    pub protocol_share: f64,
}

impl FeeSplit {
    pub fn sum(&self) -> f64 {
        self.lp_share + self.rebate_share + self.protocol_share
    }
}

pub fn split_fee(fee: f64, rho: f64) -> Result<FeeSplit> {
    ensure_nonnegative("fee", fee)?;
    if !(REBATE_FLOOR..=REBATE_CEILING).contains(&rho) {
        return Err(Error::domain("rho", "in [0.3, 0.4]", rho));
    }
    Ok(FeeSplit {
        total: fee,
        lp_share: LP_SHARE * fee,
        rebate_share: rho * fee,
        protocol_share: (1.0 - LP_SHARE - rho) * fee,
    })
}

/// Sample standard deviation of log returns over a price window.
///
/// Returns 0 for fewer than two returns.
pub fn realized_volatility(prices: &[f64]) -> f64 {
    let returns: Vec<f64> = prices
        .windows(2)
        .filter(|w| w[0] > 0.0 && w[1] > 0.0)
        .map(|w| (w[1] / w[0]).ln())
        .collect();
    if returns.len() < 2 {
        return 0.0;
    }
    let mean = returns.iter().sum::<f64>() / returns.len() as f64;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (returns.len() - 1) as f64;
    var.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TraderId(pub u64);

impl std::fmt::Display for TraderId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Per-epoch trader volume and the reward pool accrued from fees.
///
/// Accumulation is single-writer; [`settle_epoch`] consumes the ledger.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpochLedger {
    epoch_id: u64,
    volumes: BTreeMap<TraderId, f64>,
    total_volume: f64,
    reward_pool: f64,
}

impl EpochLedger {
    pub fn new(epoch_id: u64) -> Self {
        EpochLedger {
            epoch_id,
            ..Default::default()
        }
    }

    /// Opens an epoch that starts with a reward pool carried from earlier.
    pub fn with_carry(epoch_id: u64, carried: f64) -> Result<Self> {
        ensure_nonnegative("carried", carried)?;
        Ok(EpochLedger {
            epoch_id,
            reward_pool: carried,
            ..Default::default()
        })
    }

    pub fn epoch_id(&self) -> u64 {
        self.epoch_id
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    pub fn reward_pool(&self) -> f64 {
        self.reward_pool
    }

    pub fn volume_of(&self, trader: TraderId) -> f64 {
        self.volumes.get(&trader).copied().unwrap_or(0.0)
    }

    pub fn traders(&self) -> impl Iterator<Item = (TraderId, f64)> + '_ {
        self.volumes.iter().map(|(id, v)| (*id, *v))
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    pub fn record_volume(&mut self, trader: TraderId, volume: f64) -> Result<()> {
        ensure_nonnegative("volume", volume)?;
        *self.volumes.entry(trader).or_insert(0.0) += volume;
        self.total_volume += volume;
        Ok(())
    }

    /// Adds a trade's fee and returns the amount routed to the reward pool.
    pub fn accrue_fee(&mut self, fee: f64) -> Result<f64> {
        ensure_nonnegative("fee", fee)?;
        let reward = REWARD_POOL_SHARE * fee;
        self.reward_pool += reward;
        Ok(reward)
    }

    pub fn add_reward(&mut self, amount: f64) -> Result<()> {
        ensure_nonnegative("amount", amount)?;
        self.reward_pool += amount;
        Ok(())
    }
}

/// Outcome of settling one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settlement {
    pub epoch_id: u64,
    pub payouts: Vec<(TraderId, f64)>,
    pub distributed: f64,
    /// Reward pool left unpaid because the epoch had no volume.
    pub carried_forward: f64,
}

/// Pays `(V_i / V_total) * reward_pool` to every trader.
///
/// The final payout absorbs the rounding remainder so payouts sum to the
/// pool. With no volume the whole pool is carried forward.
pub fn settle_epoch(ledger: EpochLedger) -> Settlement {
    let total = ledger.volumes.values().sum::<f64>();
    if total <= 0.0 || total.is_nan() {
        return Settlement {
            epoch_id: ledger.epoch_id,
            payouts: Vec::new(),
            distributed: 0.0,
            carried_forward: ledger.reward_pool,
        };
    }

    let pool = ledger.reward_pool;
    let count = ledger.volumes.len();
    let mut paid = 0.0;
    let mut payouts = Vec::with_capacity(count);
    for (i, (trader, volume)) in ledger.volumes.into_iter().enumerate() {
        let share = if i + 1 == count {
            (pool - paid).max(0.0)
        } else {
            volume / total * pool
        };
        paid += share;
        payouts.push((trader, share));
    }
    Settlement {
        epoch_id: ledger.epoch_id,
        payouts,
        distributed: paid,
        carried_forward: 0.0,
    }
}
