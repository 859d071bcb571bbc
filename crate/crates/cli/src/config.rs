//! Run configuration loaded from TOML.
//!
//! Every section is optional and falls back to the library defaults.
//! Unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//! format = "csv"
//!
//! [drs]
//! noise_std = 0.0
//!
//! [sweep]
//! n_values = [1, 4]
//!
//! [market.stream]
//! intensity = 50.0
//! ```

use std::fs;
use std::path::Path;

use bmm_core::amm::Exponent;
use bmm_core::sim::{log_grid, DrsSimConfig, MarketLoopConfig};
use bmm_core::{Error, FeeSchedule};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::Format;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// log10 of the smallest multiplier.
    pub log10_m_min: f64,
    /// log10 of the largest multiplier.
    pub log10_m_max: f64,
    pub points: usize,
    pub n_values: Vec<u32>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            log10_m_min: 0.0,
            log10_m_max: 2.0,
            points: 200,
            n_values: vec![1, 2, 3, 4, 5],
        }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Vec<f64>, Error> {
        if self.points < 1 {
            return Err(Error::InvalidConfig {
                field: "sweep.points",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.log10_m_min.is_finite() && self.log10_m_max.is_finite())
            || (self.points > 1 && self.log10_m_max <= self.log10_m_min)
        {
            return Err(Error::InvalidConfig {
                field: "sweep.log10_m_max",
                reason: "must be finite and exceed log10_m_min".into(),
            });
        }
        Ok(log_grid(self.log10_m_min, self.log10_m_max, self.points))
    }

    pub fn exponents(&self) -> Result<Vec<Exponent>, Error> {
        self.n_values
            .iter()
            .map(|&n| {
                Exponent::new(n).map_err(|e| Error::InvalidConfig {
                    field: "sweep.n_values",
                    reason: e.to_string(),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Overrides the nested `drs.seed` and `market.seed`.
    pub seed: u64,
    pub format: Format,
    pub fees: FeeSchedule,
    pub drs: DrsSimConfig,
    pub sweep: SweepConfig,
    pub market: MarketLoopConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text).map_err(|message| CliError::Config {
            path: path.to_owned(),
            message,
        })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Propagates the top-level seed into the nested configs.
    pub fn resolve(mut self) -> Self {
        self.drs.seed = self.seed;
        self.market.seed = self.seed;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.fees.validate()?;
        self.drs.validate()?;
        self.market.validate()?;
        self.sweep.grid()?;
        self.sweep.exponents()?;
        Ok(())
    }
}
