//! Power-law automated market maker (`X^n * Y = K`) with a volume-driven
//! fee rebate scheme.
//!
//! The crate is organised bottom-up:
//!
//! - [`amm`]: pool state, pricing, exact swaps, reserve retention and
//!   slippage/arbitrage bounds.
//! - [`il`]: impermanent-loss models for constant-product and power-law pools.
//! - [`fees`]: fee rates per volatility regime, the three-way fee split,
//!   the dynamic rebate ratio and epoch reward settlement.
//! - [`sim`]: seeded simulations and parameter sweeps built on the above.
//!
//! All arithmetic is `f64`. Invariants are compared with relative
//! tolerances, never with equality.

pub mod amm;
pub mod error;
pub mod fees;
pub mod il;
pub mod sim;

pub use amm::{Exponent, Pool, SwapResult};
pub use error::{Error, Result};
pub use fees::{EpochLedger, FeeSchedule, FeeSplit, RebateContext, Regime};
