//! Integrated pool and fee loop.
//!
//! Time runs in periods grouped into epochs. At the start of each period
//! the loop
//!
//! 1. measures realized volatility over the trailing window of period
//!    closing prices and picks the regime's fee rate,
//! 2. sets the rebate ratio from the previous period's volume,
//!
//! then executes that period's trades. Each trade pays `gamma * V` (V is
//! the input valued in stablecoin at the pre-trade price), which is split
//! into LP, rebate and protocol buckets; a tenth of the fee moves from the
//! protocol bucket into the epoch reward pool. Epochs settle pro rata to
//! trader volume.
//!
//! Generated trade streams use exponential inter-arrival times with
//! `intensity` expected trades per period and log-normal sizes whose median
//! is `median_size_fraction` of the current stablecoin reserve.

use serde::{Deserialize, Serialize};

use super::rng::{self, SimRng};
use crate::amm::{Exponent, Pool};
use crate::error::{Error, Result};
use crate::fees::{
    compute_fee, dynamic_rebate, dynamic_rebate_capped, realized_volatility, settle_epoch,
    split_fee, EpochLedger, FeeSchedule, RebateContext, Regime, TraderId,
    DEFAULT_VOLATILITY_WINDOW,
};
use rand::Rng;
use rand_distr::Exp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Stablecoin in, volatile token out.
    BuyX,
    /// Volatile token in, stablecoin out.
    SellX,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolParams {
    pub x_reserve: f64,
    pub y_reserve: f64,
    pub n: u32,
}

impl Default for PoolParams {
    fn default() -> Self {
        PoolParams {
            x_reserve: 10_000.0,
            y_reserve: 1_000_000.0,
            n: 4,
        }
    }
}

impl PoolParams {
    pub fn to_pool(&self) -> Result<Pool> {
        let n = Exponent::new(self.n).map_err(|e| Error::config("pool.n", e.to_string()))?;
        let pool = Pool::new(self.x_reserve, self.y_reserve, n)
            .map_err(|e| Error::config("pool", e.to_string()))?;
        if !pool.is_active() {
            return Err(Error::config("pool", "reserves must be positive"));
        }
        Ok(pool)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TradeStreamConfig {
    /// Expected trades per period.
    pub intensity: f64,
    pub median_size_fraction: f64,
    /// Log-space standard deviation of trade sizes.
    pub size_sigma: f64,
    pub buy_probability: f64,
    pub traders: u64,
}

impl Default for TradeStreamConfig {
    fn default() -> Self {
        TradeStreamConfig {
            intensity: 20.0,
            median_size_fraction: 0.001,
            size_sigma: 1.0,
            buy_probability: 0.5,
            traders: 25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketLoopConfig {
    pub pool: PoolParams,
    pub stream: TradeStreamConfig,
    pub epochs: usize,
    pub periods_per_epoch: usize,
    /// Per-period volume target `V_max` for the rebate ratio.
    pub target_volume: f64,
    pub volatility_window: usize,
    /// Cap the rebate by the current regime's `rho_max`.
    pub regime_aware_rebate: bool,
    pub seed: u64,
}

impl Default for MarketLoopConfig {
    fn default() -> Self {
        MarketLoopConfig {
            pool: PoolParams::default(),
            stream: TradeStreamConfig::default(),
            epochs: 10,
            periods_per_epoch: 7,
            target_volume: 30_000.0,
            volatility_window: DEFAULT_VOLATILITY_WINDOW,
            regime_aware_rebate: true,
            seed: 0,
        }
    }
}

impl MarketLoopConfig {
    pub fn validate(&self) -> Result<()> {
        self.pool.to_pool()?;
        let s = &self.stream;
        if !(s.intensity.is_finite() && s.intensity >= 0.0) {
            return Err(Error::config("market.stream.intensity", "must be non-negative"));
        }
        if !(s.median_size_fraction.is_finite() && s.median_size_fraction > 0.0) {
            return Err(Error::config("market.stream.median_size_fraction", "must be positive"));
        }
        if !(s.size_sigma.is_finite() && s.size_sigma >= 0.0) {
            return Err(Error::config("market.stream.size_sigma", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&s.buy_probability) {
            return Err(Error::config("market.stream.buy_probability", "must be in [0, 1]"));
        }
        if s.traders < 1 {
            return Err(Error::config("market.stream.traders", "must be at least 1"));
        }
        if self.periods_per_epoch < 1 {
            return Err(Error::config("market.periods_per_epoch", "must be at least 1"));
        }
        if !(self.target_volume.is_finite() && self.target_volume > 0.0) {
            return Err(Error::config("market.target_volume", "must be positive"));
        }
        if self.volatility_window < 2 {
            return Err(Error::config("market.volatility_window", "must be at least 2"));
        }
        Ok(())
    }
}

/// A trade fed to the loop explicitly instead of being generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptedTrade {
    pub period: usize,
    pub trader: TraderId,
    pub side: Side,
    /// Input amount in units of the input asset.
    pub amount_in: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeeTotals {
    pub volume: f64,
    pub fees: f64,
    pub lp: f64,
    pub rebate: f64,
    /// Full protocol share, including the part routed to rewards.
    pub protocol: f64,
    pub reward_accrued: f64,
    pub reward_distributed: f64,
    /// Reward pool still unpaid after the last epoch.
    pub reward_carried: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeTotals {
    pub regime: Regime,
    pub periods: usize,
    pub trades: u64,
    pub volume: f64,
    pub fees: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodMetrics {
    pub period: usize,
    pub sigma: f64,
    pub regime: Regime,
    pub gamma: f64,
    pub rho: f64,
    pub trades: u64,
    pub volume: f64,
    pub fees: f64,
    pub close_price: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: u64,
    pub trades: u64,
    pub volume: f64,
    pub fees: f64,
    pub lp: f64,
    pub rebate: f64,
    pub protocol: f64,
    /// Pool available at settlement, including any carry-in.
    pub reward_pool: f64,
    pub distributed: f64,
    pub carried_forward: f64,
    pub traders_paid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketLoopResult {
    pub initial_pool: Pool,
    pub final_pool: Pool,
    pub trades_executed: u64,
    /// Trades refused for exceeding the per-trade input cap.
    pub trades_rejected: u64,
    pub totals: FeeTotals,
    /// `sum(gamma_i * V_i)` accumulated separately from the fee buckets.
    pub gamma_weighted_volume: f64,
    pub by_regime: Vec<RegimeTotals>,
    pub periods: Vec<PeriodMetrics>,
    pub epochs: Vec<EpochReport>,
}

impl MarketLoopResult {
    /// `lp + rebate + protocol`.
    pub fn bucket_sum(&self) -> f64 {
        self.totals.lp + self.totals.rebate + self.totals.protocol
    }
}

struct Trade {
    trader: TraderId,
    side: Side,
    /// Size as a fraction of the stablecoin reserve at execution time.
    size_fraction: Option<f64>,
    amount_in: Option<f64>,
}

trait TradeSource {
    /// Next trade in `period`, or `None` once the period is exhausted.
    fn next_trade(&mut self, period: usize) -> Option<Trade>;
}

struct Generated {
    rng: SimRng,
    stream: TradeStreamConfig,
    arrivals: Option<Exp<f64>>,
    clock: f64,
    period: usize,
}

impl Generated {
    fn new(config: &MarketLoopConfig) -> Self {
        let arrivals = (config.stream.intensity > 0.0)
            .then(|| Exp::new(config.stream.intensity).expect("validated intensity"));
        Generated {
            rng: rng::stream(config.seed, 0),
            stream: config.stream,
            arrivals,
            clock: 0.0,
            period: 0,
        }
    }
}

impl TradeSource for Generated {
    fn next_trade(&mut self, period: usize) -> Option<Trade> {
        let arrivals = self.arrivals.as_ref()?;
        if period != self.period {
            self.period = period;
            self.clock = 0.0;
        }
        self.clock += self.rng.sample(arrivals);
        if self.clock >= 1.0 {
            return None;
        }
        let trader = TraderId(self.rng.random_range(0..self.stream.traders));
        let side = if self.rng.random_bool(self.stream.buy_probability) {
            Side::BuyX
        } else {
            Side::SellX
        };
        let scale = rng::normal(&mut self.rng, self.stream.size_sigma).exp();
        Some(Trade {
            trader,
            side,
            size_fraction: Some(self.stream.median_size_fraction * scale),
            amount_in: None,
        })
    }
}

struct Scripted<'a> {
    trades: &'a [ScriptedTrade],
    next: usize,
}

impl TradeSource for Scripted<'_> {
    fn next_trade(&mut self, period: usize) -> Option<Trade> {
        let t = self.trades.get(self.next)?;
        if t.period != period {
            return None;
        }
        self.next += 1;
        Some(Trade {
            trader: t.trader,
            side: t.side,
            size_fraction: None,
            amount_in: Some(t.amount_in),
        })
    }
}

/// Runs the loop on a generated trade stream.
pub fn run_market_loop(config: &MarketLoopConfig, schedule: &FeeSchedule) -> Result<MarketLoopResult> {
    config.validate()?;
    schedule.validate()?;
    run(config, schedule, Generated::new(config))
}

/// Runs the loop on an explicit trade list. Trades must be sorted by
/// period; trades past the last period are ignored.
pub fn run_market_loop_with_trades(
    config: &MarketLoopConfig,
    schedule: &FeeSchedule,
    trades: &[ScriptedTrade],
) -> Result<MarketLoopResult> {
    config.validate()?;
    schedule.validate()?;
    if trades.windows(2).any(|w| w[1].period < w[0].period) {
        return Err(Error::config("trades", "must be sorted by period"));
    }
    run(config, schedule, Scripted { trades, next: 0 })
}

fn run(
    config: &MarketLoopConfig,
    schedule: &FeeSchedule,
    mut source: impl TradeSource,
) -> Result<MarketLoopResult> {
    let initial_pool = config.pool.to_pool()?;
    let mut pool = initial_pool;
    let mut closes = vec![pool.spot_price()?];
    let mut prev_volume = 0.0;

    let mut totals = FeeTotals::default();
    let mut gamma_weighted_volume = 0.0;
    let mut trades_executed = 0u64;
    let mut trades_rejected = 0u64;
    let mut by_regime: Vec<RegimeTotals> = Regime::ALL
        .iter()
        .map(|&regime| RegimeTotals {
            regime,
            periods: 0,
            trades: 0,
            volume: 0.0,
            fees: 0.0,
        })
        .collect();
    let mut periods = Vec::with_capacity(config.epochs * config.periods_per_epoch);
    let mut epochs = Vec::with_capacity(config.epochs);
    let mut carry = 0.0;

    for epoch in 0..config.epochs {
        let mut ledger = EpochLedger::with_carry(epoch as u64, carry)?;
        let mut report = EpochReport {
            epoch: epoch as u64,
            trades: 0,
            volume: 0.0,
            fees: 0.0,
            lp: 0.0,
            rebate: 0.0,
            protocol: 0.0,
            reward_pool: 0.0,
            distributed: 0.0,
            carried_forward: 0.0,
            traders_paid: 0,
        };

        for _ in 0..config.periods_per_epoch {
            let period = periods.len();
            let start = closes.len().saturating_sub(config.volatility_window + 1);
            let sigma = realized_volatility(&closes[start..]);
            let regime = schedule.classify_regime(sigma);
            let params = schedule.params(regime);
            let ctx = RebateContext::new(prev_volume, config.target_volume)?;
            let rho = if config.regime_aware_rebate {
                dynamic_rebate_capped(&ctx, params.rho_max)
            } else {
                dynamic_rebate(&ctx)
            };

            let mut metrics = PeriodMetrics {
                period,
                sigma,
                regime,
                gamma: params.gamma,
                rho,
                trades: 0,
                volume: 0.0,
                fees: 0.0,
                close_price: 0.0,
            };

            while let Some(trade) = source.next_trade(period) {
                let price = pool.spot_price()?;
                let amount_in = match (trade.amount_in, trade.side) {
                    (Some(a), _) => a,
                    (None, Side::BuyX) => trade.size_fraction.unwrap_or(0.0) * pool.y_reserve(),
                    (None, Side::SellX) => trade.size_fraction.unwrap_or(0.0) * pool.y_reserve() / price,
                };
                let swapped = match trade.side {
                    Side::BuyX => pool.swap_y_for_x(amount_in, params.gamma),
                    Side::SellX => pool.swap_x_for_y(amount_in, params.gamma),
                };
                let (next, _) = match swapped {
                    Ok(ok) => ok,
                    Err(Error::InputTooLarge { .. }) => {
                        trades_rejected += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                pool = next;

                let volume = match trade.side {
                    Side::BuyX => amount_in,
                    Side::SellX => amount_in * price,
                };
                let fee = compute_fee(volume, params.gamma)?;
                let split = split_fee(fee, rho)?;
                let reward = ledger.accrue_fee(fee)?;
                ledger.record_volume(trade.trader, volume)?;

                gamma_weighted_volume += params.gamma * volume;
                trades_executed += 1;
                metrics.trades += 1;
                metrics.volume += volume;
                metrics.fees += fee;
                report.lp += split.lp_share;
                report.rebate += split.rebate_share;
                report.protocol += split.protocol_share;
                totals.reward_accrued += reward;
            }

            metrics.close_price = pool.spot_price()?;
            closes.push(metrics.close_price);
            prev_volume = metrics.volume;

            let bucket = &mut by_regime[regime.index()];
            bucket.periods += 1;
            bucket.trades += metrics.trades;
            bucket.volume += metrics.volume;
            bucket.fees += metrics.fees;

            report.trades += metrics.trades;
            report.volume += metrics.volume;
            report.fees += metrics.fees;
            periods.push(metrics);
        }

        report.reward_pool = ledger.reward_pool();
        let settlement = settle_epoch(ledger);
        report.distributed = settlement.distributed;
        report.carried_forward = settlement.carried_forward;
        report.traders_paid = settlement.payouts.len();
        carry = settlement.carried_forward;

        totals.volume += report.volume;
        totals.fees += report.fees;
        totals.lp += report.lp;
        totals.rebate += report.rebate;
        totals.protocol += report.protocol;
        totals.reward_distributed += report.distributed;
        epochs.push(report);
    }
    totals.reward_carried = carry;

    Ok(MarketLoopResult {
        initial_pool,
        final_pool: pool,
        trades_executed,
        trades_rejected,
        totals,
        gamma_weighted_volume,
        by_regime,
        periods,
        epochs,
    })
}
