//! Seeded simulations and parameter sweeps.
//!
//! Every run here is single-threaded and deterministic: the same config and
//! seed give bit-identical output. Randomness comes from [`rng::stream`].

pub mod drs;
pub mod market;
pub mod rng;
pub mod sweep;

pub use drs::{run_drs_simulation, ArmSummary, DrsRun, DrsSimConfig, DrsSimResult, EnsembleSummary};
pub use market::{
    run_market_loop, run_market_loop_with_trades, MarketLoopConfig, MarketLoopResult, PoolParams,
    ScriptedTrade, Side, TradeStreamConfig,
};
pub use sweep::{default_m_grid, log_grid, sweep_il, sweep_retention, RetentionRow};
