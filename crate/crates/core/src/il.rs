//! Impermanent loss for constant-product and power-law pools.
//!
//! Two power-law models are exposed side by side and never mixed:
//!
//! - the *scaled* model divides the constant-product loss by the
//!   improvement factor `g(n) = (n+1)^2 / (4n)`;
//! - the *exact* model compares pool value `(n+1) y0 (1+e)^(1 - 1/(n+1))`
//!   against hold value `(n+1) y0 (1+e)`, giving `1 - (1+e)^(-1/(n+1))`.
//!
//! The price multiplier `m` and the relative move `e` are related by
//! `e = m - 1`.

use serde::{Deserialize, Serialize};

use crate::amm::Exponent;
use crate::error::{ensure_positive, Error, Result};

/// One row of an impermanent-loss curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IlCurvePoint {
    pub m: f64,
    pub n: Exponent,
    pub il_traditional: f64,
    /// Scaled model: `il_traditional / g(n)`.
    pub il_scaled: f64,
    /// Exact power-law model with `e = m - 1`.
    pub il_exact: f64,
    /// Relative reduction of the scaled model against the constant-product
    /// pool, `1 - il_scaled / il_traditional` (zero when there is no loss).
    pub improvement: f64,
}

impl IlCurvePoint {
    pub fn evaluate(m: f64, n: Exponent) -> Result<Self> {
        let il_traditional = il_traditional(m)?;
        let il_scaled = il_proposed_scaled(m, n)?;
        let il_exact = il_powerlaw_exact(m - 1.0, n)?;
        let improvement = if il_traditional > 0.0 {
            1.0 - il_scaled / il_traditional
        } else {
            0.0
        };
        Ok(IlCurvePoint {
            m,
            n,
            il_traditional,
            il_scaled,
            il_exact,
            improvement,
        })
    }
}

/// Constant-product impermanent loss `1 - 2 sqrt(m) / (m + 1)`.
pub fn il_traditional(m: f64) -> Result<f64> {
    ensure_positive("m", m)?;
    Ok(1.0 - 2.0 * m.sqrt() / (m + 1.0))
}

/// `g(n) = (n + 1)^2 / (4 n)`.
pub fn il_improvement_factor(n: Exponent) -> f64 {
    let n = n.as_f64();
    (n + 1.0) * (n + 1.0) / (4.0 * n)
}

pub fn il_proposed_scaled(m: f64, n: Exponent) -> Result<f64> {
    Ok(il_traditional(m)? / il_improvement_factor(n))
}

/// Liquidity-provider position value after a relative move `epsilon`.
pub fn pool_value(y0: f64, epsilon: f64, n: Exponent) -> Result<f64> {
    let growth = ensure_growth(epsilon)?;
    let k = n.as_f64() + 1.0;
    Ok(k * y0 * growth.powf(1.0 - 1.0 / k))
}

/// Value of simply holding the initial assets after a relative move.
pub fn hold_value(y0: f64, epsilon: f64, n: Exponent) -> Result<f64> {
    let growth = ensure_growth(epsilon)?;
    Ok((n.as_f64() + 1.0) * y0 * growth)
}

fn ensure_growth(epsilon: f64) -> Result<f64> {
    let growth = 1.0 + epsilon;
    if growth.is_finite() && growth > 0.0 {
        Ok(growth)
    } else {
        Err(Error::domain("epsilon", "greater than -1 and finite", epsilon))
    }
}

/// Exact power-law impermanent loss `1 - V_pool / V_hold = 1 - (1+e)^(-1/(n+1))`.
///
/// The common `(n+1) y0` factor of both values cancels, so it is dropped
/// and the power is evaluated through `ln_1p`/`exp_m1` for small `e`.
pub fn il_powerlaw_exact(epsilon: f64, n: Exponent) -> Result<f64> {
    ensure_growth(epsilon)?;
    Ok(-(-epsilon.ln_1p() / (n.as_f64() + 1.0)).exp_m1())
}

/// Two-term expansion `e/(n+1) - (n+2)/(2(n+1)^2) e^2`.
pub fn il_powerlaw_taylor(epsilon: f64, n: Exponent) -> f64 {
    let k = n.as_f64() + 1.0;
    epsilon / k - taylor_quadratic_coefficient(n) * epsilon * epsilon
}

/// Quadratic coefficient of the power-law expansion, `(n+2) / (2 (n+1)^2)`.
pub fn taylor_quadratic_coefficient(n: Exponent) -> f64 {
    let n = n.as_f64();
    (n + 2.0) / (2.0 * (n + 1.0) * (n + 1.0))
}

/// Coefficient the factor model implies, `1 / (8 g(n)) = n / (2 (n+1)^2)`.
pub fn factor_model_coefficient(n: Exponent) -> f64 {
    1.0 / (8.0 * il_improvement_factor(n))
}

/// Side-by-side comparison of the two quadratic coefficients for one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub n: Exponent,
    pub expansion: f64,
    pub factor_model: f64,
    /// `expansion / factor_model = (n + 2) / n`; tends to 1 as `n` grows.
    pub ratio: f64,
}

pub fn coefficient_check(n: Exponent) -> CoefficientCheck {
    let expansion = taylor_quadratic_coefficient(n);
    let factor_model = factor_model_coefficient(n);
    CoefficientCheck {
        n,
        expansion,
        factor_model,
        ratio: expansion / factor_model,
    }
}
