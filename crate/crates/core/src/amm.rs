//! Power-law constant-invariant pool.
//!
//! A pool holds a volatile token `X` and a stablecoin `Y` and keeps
//! `x^n * y` constant across fee-free trades. The marginal price of `X`
//! in `Y` is `n * y / x`; `n = 1` is the ordinary constant-product pool.
//!
//! [`Pool`] is an immutable value. Swaps return a new pool together with a
//! [`SwapResult`], so a pool can be shared freely between threads.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};

/// Swap inputs above this multiple of the input-side reserve are rejected.
pub const MAX_INPUT_MULTIPLE: f64 = 10.0;

/// Integer exponent `n` of the invariant, restricted to `1..=8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Exponent(u32);

impl Exponent {
    pub const MIN: u32 = 1;
    pub const MAX: u32 = 8;

    /// Constant-product exponent.
    pub const ONE: Exponent = Exponent(1);

    pub fn new(n: u32) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&n) {
            Ok(Exponent(n))
        } else {
            Err(Error::ExponentOutOfRange(n))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    /// Every supported exponent in ascending order.
    pub fn all() -> impl Iterator<Item = Exponent> {
        (Self::MIN..=Self::MAX).map(Exponent)
    }
}

impl TryFrom<u32> for Exponent {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Exponent::new(n)
    }
}

impl From<Exponent> for u32 {
    fn from(n: Exponent) -> u32 {
        n.0
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Reserves of a power-law pool.
///
/// The invariant `K = x^n * y` is derived on demand and never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pool {
    x_reserve: f64,
    y_reserve: f64,
    n: Exponent,
}

/// Outcome of a single swap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapResult {
    /// Amount of the output asset paid out.
    pub amount_out: f64,
    /// Fee withheld from the input, in input-asset units.
    pub fee_paid: f64,
    pub price_before: f64,
    pub price_after: f64,
    /// `(price_after - price_before) / price_before`.
    pub slippage_exact: f64,
}

impl Pool {
    /// Builds a pool from raw reserves. Zero reserves are accepted and yield
    /// an inactive pool; negative or non-finite reserves are rejected.
    pub fn new(x_reserve: f64, y_reserve: f64, n: Exponent) -> Result<Self> {
        ensure_nonnegative("x_reserve", x_reserve)?;
        ensure_nonnegative("y_reserve", y_reserve)?;
        Ok(Pool {
            x_reserve,
            y_reserve,
            n,
        })
    }

    pub fn x_reserve(&self) -> f64 {
        self.x_reserve
    }

    pub fn y_reserve(&self) -> f64 {
        self.y_reserve
    }

    pub fn exponent(&self) -> Exponent {
        self.n
    }

    pub fn is_active(&self) -> bool {
        self.x_reserve > 0.0 && self.y_reserve > 0.0
    }

    fn ensure_active(&self) -> Result<()> {
        if self.is_active() {
            Ok(())
        } else {
            Err(Error::InactivePool {
                x: self.x_reserve,
                y: self.y_reserve,
            })
        }
    }

    /// `K = x^n * y`.
    ///
    /// May under- or overflow for extreme reserves; compare states with
    /// [`Pool::log_invariant`] when that matters.
    pub fn invariant(&self) -> f64 {
        self.x_reserve.powi(self.n.get() as i32) * self.y_reserve
    }

    /// `ln K = n ln x + ln y`.
    pub fn log_invariant(&self) -> f64 {
        self.n.as_f64() * self.x_reserve.ln() + self.y_reserve.ln()
    }

    /// Marginal price of `X` in `Y`: `n * y / x`.
    pub fn spot_price(&self) -> Result<f64> {
        self.ensure_active()?;
        Ok(self.n.as_f64() * self.y_reserve / self.x_reserve)
    }

    /// Pays `dy_in` of the stablecoin into the pool and receives `X`.
    ///
    /// `fee_rate * dy_in` is withheld before the invariant is applied.
    pub fn swap_y_for_x(&self, dy_in: f64, fee_rate: f64) -> Result<(Pool, SwapResult)> {
        self.ensure_active()?;
        let (fee, dy_eff) = self.net_input(dy_in, fee_rate, self.y_reserve)?;
        let price_before = self.spot_price()?;

        // x' = x * (y / (y + dy))^(1/n), written via ln_1p/exp_m1 so tiny
        // trades keep full relative precision.
        let log_shrink = -(dy_eff / self.y_reserve).ln_1p() / self.n.as_f64();
        let amount_out = -self.x_reserve * log_shrink.exp_m1();
        let x_new = self.x_reserve * log_shrink.exp();
        if !(x_new > 0.0 && x_new.is_finite()) || amount_out >= self.x_reserve {
            return Err(Error::DegenerateReserve(x_new));
        }

        let next = Pool {
            x_reserve: x_new,
            y_reserve: self.y_reserve + dy_eff,
            n: self.n,
        };
        Ok((next, self.result(&next, amount_out, fee, price_before)?))
    }

    /// Pays `dx_in` of the volatile token into the pool and receives `Y`.
    pub fn swap_x_for_y(&self, dx_in: f64, fee_rate: f64) -> Result<(Pool, SwapResult)> {
        self.ensure_active()?;
        let (fee, dx_eff) = self.net_input(dx_in, fee_rate, self.x_reserve)?;
        let price_before = self.spot_price()?;

        // y' = y * (x / (x + dx))^n
        let log_shrink = -(dx_eff / self.x_reserve).ln_1p() * self.n.as_f64();
        let amount_out = -self.y_reserve * log_shrink.exp_m1();
        let y_new = self.y_reserve * log_shrink.exp();
        if !(y_new > 0.0 && y_new.is_finite()) || amount_out >= self.y_reserve {
            return Err(Error::DegenerateReserve(y_new));
        }

        let next = Pool {
            x_reserve: self.x_reserve + dx_eff,
            y_reserve: y_new,
            n: self.n,
        };
        Ok((next, self.result(&next, amount_out, fee, price_before)?))
    }

    fn net_input(&self, amount_in: f64, fee_rate: f64, reserve: f64) -> Result<(f64, f64)> {
        ensure_positive("amount_in", amount_in)?;
        if !(0.0..1.0).contains(&fee_rate) {
            return Err(Error::domain("fee_rate", "in [0, 1)", fee_rate));
        }
        let limit = MAX_INPUT_MULTIPLE * reserve;
        if amount_in > limit {
            return Err(Error::InputTooLarge {
                amount: amount_in,
                limit,
            });
        }
        let fee = fee_rate * amount_in;
        Ok((fee, amount_in - fee))
    }

    fn result(
        &self,
        next: &Pool,
        amount_out: f64,
        fee_paid: f64,
        price_before: f64,
    ) -> Result<SwapResult> {
        let price_after = next.spot_price()?;
        Ok(SwapResult {
            amount_out,
            fee_paid,
            price_before,
            price_after,
            slippage_exact: (price_after - price_before) / price_before,
        })
    }

    /// The state on the same invariant whose spot price is `target_price`.
    ///
    /// Growth-side convention: `y_t = y_0 * (p_t / p_0)^(n/(n+1))` and
    /// `x_t = n * y_t / p_t`.
    pub fn reserves_at_price(&self, target_price: f64) -> Result<Pool> {
        ensure_positive("target_price", target_price)?;
        let p0 = self.spot_price()?;
        let n = self.n.as_f64();
        let y = self.y_reserve * (target_price / p0).powf(n / (n + 1.0));
        Ok(Pool {
            x_reserve: n * y / target_price,
            y_reserve: y,
            n: self.n,
        })
    }

    /// Smallest `dX` whose price impact closes the gap to a higher external
    /// price: `(p_ext - p) * x / ((n + 1) * p)`.
    ///
    /// Only the `p_ext >= p` direction is modelled.
    pub fn min_arbitrage_size(&self, external_price: f64) -> Result<f64> {
        ensure_positive("external_price", external_price)?;
        let p = self.spot_price()?;
        if external_price < p {
            return Err(Error::domain(
                "external_price",
                "at least the pool spot price",
                external_price,
            ));
        }
        Ok((external_price - p) * self.x_reserve / ((self.n.as_f64() + 1.0) * p))
    }

    /// First-order relative price impact of changing the `X` reserve by `dx`:
    /// `-(n + 1) * dx / x`. Only meaningful for `|dx| << x`.
    pub fn slippage_first_order(&self, dx: f64) -> f64 {
        -(self.n.as_f64() + 1.0) * dx / self.x_reserve
    }
}

/// Depletion-side reserve after a price move by `m`: `y0 * m^(-1/(n+1))`.
///
/// This is the convention behind the liquidity retention tables; it is not
/// the same curve as [`Pool::reserves_at_price`].
pub fn depleted_reserves(y0: f64, m: f64, n: Exponent) -> Result<f64> {
    ensure_positive("y0", y0)?;
    ensure_positive("m", m)?;
    Ok(y0 * m.powf(-1.0 / (n.as_f64() + 1.0)))
}

/// Depleted reserves at exponent `n` relative to the constant-product pool:
/// `m^(1/2 - 1/(n+1))`.
pub fn retention_ratio(m: f64, n: Exponent) -> Result<f64> {
    ensure_positive("m", m)?;
    Ok(m.powf(0.5 - 1.0 / (n.as_f64() + 1.0)))
}

/// `d ln P / d ln X = -(n + 1)`.
pub fn price_elasticity(n: Exponent) -> f64 {
    -(n.as_f64() + 1.0)
}

/// First-order slippage relative to the constant-product pool: `(n + 1) / 2`.
pub fn slippage_ratio(n: Exponent) -> f64 {
    (n.as_f64() + 1.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn exp(n: u32) -> Exponent {
        Exponent::new(n).unwrap()
    }

    fn pool(x: f64, y: f64, n: u32) -> Pool {
        Pool::new(x, y, exp(n)).unwrap()
    }

    /// Bisection on `x'^n * y' = K` for the new X reserve. Shares nothing
    /// with the closed form used by the pool.
    fn bisect_x_after_buy(x: f64, y: f64, n: u32, dy: f64) -> f64 {
        let k = x.powi(n as i32) * y;
        let y_new = y + dy;
        let (mut lo, mut hi) = (0.0_f64, x);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.powi(n as i32) * y_new > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn bisect_y_after_sell(x: f64, y: f64, n: u32, dx: f64) -> f64 {
        let k = x.powi(n as i32) * y;
        let xn = (x + dx).powi(n as i32);
        let (mut lo, mut hi) = (0.0_f64, y);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if xn * mid > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn exponent_bounds() {
        assert!(Exponent::new(0).is_err());
        assert!(Exponent::new(9).is_err());
        assert_eq!(Exponent::all().count(), 8);
    }

    #[test]
    fn spot_price_examples() {
        assert_eq!(pool(1000.0, 10000.0, 1).spot_price().unwrap(), 10.0);
        assert_eq!(pool(1000.0, 10000.0, 4).spot_price().unwrap(), 40.0);
        assert_relative_eq!(
            pool(500.0, 3981.0, 4).spot_price().unwrap(),
            31.848,
            max_relative = 1e-14
        );
    }

    #[test]
    fn spot_price_rejects_inactive_pool() {
        let empty = pool(0.0, 100.0, 4);
        assert!(!empty.is_active());
        assert!(matches!(empty.spot_price(), Err(Error::InactivePool { .. })));
        assert!(empty.swap_y_for_x(1.0, 0.0).is_err());
        assert!(Pool::new(-1.0, 1.0, exp(1)).is_err());
        assert!(Pool::new(f64::NAN, 1.0, exp(1)).is_err());
    }

    #[test]
    fn constant_product_doubling() {
        let (next, r) = pool(100.0, 100.0, 1).swap_y_for_x(100.0, 0.0).unwrap();
        assert_relative_eq!(r.amount_out, 50.0, max_relative = 1e-14);
        assert_relative_eq!(next.x_reserve(), 50.0, max_relative = 1e-14);
        assert_eq!(next.y_reserve(), 200.0);

        let (_, r) = pool(100.0, 100.0, 1).swap_x_for_y(100.0, 0.0).unwrap();
        assert_relative_eq!(r.amount_out, 50.0, max_relative = 1e-14);
    }

    #[test]
    fn quartic_buy_matches_bisection() {
        let (next, r) = pool(100.0, 100.0, 4).swap_y_for_x(100.0, 0.0).unwrap();
        let x_oracle = bisect_x_after_buy(100.0, 100.0, 4, 100.0);
        assert_relative_eq!(next.x_reserve(), x_oracle, max_relative = 1e-12);
        assert_relative_eq!(r.amount_out, 15.910_358_474_628_55, max_relative = 1e-12);
        assert_relative_eq!(r.amount_out, 100.0 - x_oracle, max_relative = 1e-12);
    }

    #[test]
    fn quartic_buy_with_fee_withholds_input() {
        let (next, r) = pool(100.0, 100.0, 4).swap_y_for_x(100.0, 0.01).unwrap();
        assert_relative_eq!(r.fee_paid, 1.0, max_relative = 1e-14);
        assert_relative_eq!(next.y_reserve(), 199.0, max_relative = 1e-14);
        let x_oracle = bisect_x_after_buy(100.0, 100.0, 4, 99.0);
        assert_relative_eq!(r.amount_out, 100.0 - x_oracle, max_relative = 1e-12);
        assert_relative_eq!(r.amount_out, 15.804_916_710_752_293, max_relative = 1e-12);
    }

    #[test]
    fn quartic_sell_matches_bisection() {
        let p = pool(100.0, 100.0, 4);
        let (next, r) = p.swap_x_for_y(10.0, 0.0).unwrap();
        let y_oracle = bisect_y_after_sell(100.0, 100.0, 4, 10.0);
        assert_relative_eq!(next.y_reserve(), y_oracle, max_relative = 1e-12);
        assert_relative_eq!(r.amount_out, 31.698_654_463_492_936, max_relative = 1e-12);
        assert!((next.log_invariant() - p.log_invariant()).abs() < 1e-12);
    }

    #[test]
    fn swap_rejects_bad_inputs() {
        let p = pool(100.0, 100.0, 4);
        assert!(matches!(p.swap_x_for_y(0.0, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(p.swap_y_for_x(-1.0, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(p.swap_y_for_x(1.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(p.swap_y_for_x(1.0, -0.1), Err(Error::Domain { .. })));
        assert!(matches!(
            p.swap_y_for_x(1000.1, 0.0),
            Err(Error::InputTooLarge { .. })
        ));
        assert!(p.swap_y_for_x(1000.0, 0.0).is_ok());
    }

    #[test]
    fn price_moves_in_trade_direction() {
        let p = pool(1000.0, 10000.0, 4);
        let (_, buy) = p.swap_y_for_x(50.0, 0.003).unwrap();
        assert!(buy.price_after > buy.price_before && buy.slippage_exact > 0.0);
        let (_, sell) = p.swap_x_for_y(5.0, 0.003).unwrap();
        assert!(sell.price_after < sell.price_before && sell.slippage_exact < 0.0);
    }

    #[test]
    fn reserves_at_price_growth_side() {
        for (n, expected) in [(4, 100f64.powf(0.8)), (1, 10.0)] {
            let p = pool(1000.0, 10000.0, n);
            let p0 = p.spot_price().unwrap();
            let moved = p.reserves_at_price(100.0 * p0).unwrap();
            assert_relative_eq!(moved.y_reserve() / 10000.0, expected, max_relative = 1e-12);
            assert_relative_eq!(moved.spot_price().unwrap(), 100.0 * p0, max_relative = 1e-12);
        }
        assert_relative_eq!(100f64.powf(0.8), 39.81, max_relative = 1e-3);

        let p = pool(1000.0, 10000.0, 3);
        let same = p.reserves_at_price(p.spot_price().unwrap()).unwrap();
        assert_relative_eq!(same.x_reserve(), 1000.0, max_relative = 1e-14);
        assert_relative_eq!(same.y_reserve(), 10000.0, max_relative = 1e-14);
        assert!(p.reserves_at_price(0.0).is_err());
    }

    #[test]
    fn depleted_reserves_examples() {
        assert_relative_eq!(
            depleted_reserves(10000.0, 100.0, exp(4)).unwrap(),
            3_981.071_705_534_972,
            max_relative = 1e-12
        );
        // Constant product keeps 10% of the reserve, so the n = 4 pool holds
        // 3.98x as much.
        assert_relative_eq!(
            depleted_reserves(10000.0, 100.0, exp(1)).unwrap(),
            1000.0,
            max_relative = 1e-12
        );
        for n in Exponent::all() {
            assert_eq!(depleted_reserves(10000.0, 1.0, n).unwrap(), 10000.0);
        }
        assert!(depleted_reserves(10000.0, 0.0, exp(1)).is_err());
    }

    #[test]
    fn retention_ratio_examples() {
        assert_relative_eq!(
            retention_ratio(100.0, exp(4)).unwrap(),
            3.981_071_705_534_972,
            max_relative = 1e-12
        );
        assert_eq!(retention_ratio(1.0, exp(4)).unwrap(), 1.0);
        assert_relative_eq!(
            retention_ratio(10000.0, exp(4)).unwrap(),
            15.848_931_924_611_133,
            max_relative = 1e-12
        );
        // The 1000x row: ratio of the two depletion-side reserves.
        let trad = depleted_reserves(10000.0, 1000.0, exp(1)).unwrap();
        let prop = depleted_reserves(10000.0, 1000.0, exp(4)).unwrap();
        assert_relative_eq!(trad, 316.227_766_016_837_9, max_relative = 1e-12);
        assert_relative_eq!(prop, 2_511.886_431_509_58, max_relative = 1e-12);
        assert_relative_eq!(
            retention_ratio(1000.0, exp(4)).unwrap(),
            prop / trad,
            max_relative = 1e-12
        );
    }

    #[test]
    fn elasticity_and_slippage_ratio() {
        assert_eq!(price_elasticity(exp(1)), -2.0);
        assert_eq!(price_elasticity(exp(4)), -5.0);
        assert_eq!(price_elasticity(exp(8)), -9.0);
        assert_eq!(slippage_ratio(exp(4)), 2.5);
        assert_eq!(slippage_ratio(exp(1)), 1.0);
        assert_eq!(slippage_ratio(exp(5)), 3.0);
    }

    #[test]
    fn min_arbitrage_examples() {
        let p4 = pool(1000.0, 10000.0, 4);
        assert_eq!(p4.min_arbitrage_size(40.0).unwrap(), 0.0);
        assert_relative_eq!(p4.min_arbitrage_size(44.0).unwrap(), 20.0, max_relative = 1e-14);
        // Same pool price and gap with n = 1.
        let p1 = pool(1000.0, 40000.0, 1);
        assert_relative_eq!(p1.min_arbitrage_size(44.0).unwrap(), 50.0, max_relative = 1e-14);
        assert!(p4.min_arbitrage_size(39.0).is_err());
    }

    #[test]
    fn arbitrage_threshold_scales_inversely_with_n_plus_one() {
        let base = pool(1000.0, 40000.0, 1).min_arbitrage_size(44.0).unwrap();
        for n in Exponent::all() {
            // Hold x and the spot price fixed while changing n.
            let y = 40.0 * 1000.0 / n.as_f64();
            let size = Pool::new(1000.0, y, n).unwrap().min_arbitrage_size(44.0).unwrap();
            assert_relative_eq!(size * (n.as_f64() + 1.0), base * 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn first_order_slippage_examples() {
        assert_eq!(pool(10000.0, 1.0, 4).slippage_first_order(0.0), 0.0);
        assert_relative_eq!(pool(10000.0, 1.0, 4).slippage_first_order(10.0), -0.005);
        assert_relative_eq!(pool(10000.0, 1.0, 1).slippage_first_order(10.0), -0.002);
    }

    #[test]
    fn first_order_slippage_error_shrinks_linearly() {
        for n in Exponent::all() {
            let p = pool(10000.0, 10000.0, n.get());
            let rel_err = |frac: f64| {
                let dx = frac * p.x_reserve();
                let (_, r) = p.swap_x_for_y(dx, 0.0).unwrap();
                ((p.slippage_first_order(dx) - r.slippage_exact) / r.slippage_exact).abs()
            };
            assert!(rel_err(1e-4) < 1e-3);
            let (a, b) = (rel_err(1e-3), rel_err(5e-4));
            assert!(b <= a * 0.55, "n={n}: {a} -> {b}");
        }
    }

    #[test]
    fn monotone_in_exponent() {
        let m = 37.0;
        let pairs: Vec<_> = Exponent::all().collect();
        for w in pairs.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            assert!(depleted_reserves(1.0, m, hi).unwrap() > depleted_reserves(1.0, m, lo).unwrap());
            assert!(retention_ratio(m, hi).unwrap() > retention_ratio(m, lo).unwrap());
            assert!(slippage_ratio(hi) > slippage_ratio(lo));
        }
    }

    fn arb_pool() -> impl Strategy<Value = Pool> {
        (1e-2f64..1e6, 1e-2f64..1e6, 1u32..=8).prop_map(|(x, y, n)| pool(x, y, n))
    }

    proptest! {
        #[test]
        fn fee_free_swaps_preserve_invariant(
            p in arb_pool(),
            steps in prop::collection::vec((any::<bool>(), 1e-6f64..=10.0), 1..100),
        ) {
            let k0 = p.log_invariant();
            let mut cur = p;
            for (buy, frac) in steps {
                cur = if buy {
                    cur.swap_y_for_x(frac * cur.y_reserve(), 0.0).unwrap().0
                } else {
                    cur.swap_x_for_y(frac * cur.x_reserve(), 0.0).unwrap().0
                };
            }
            prop_assert!((cur.log_invariant() - k0).exp_m1().abs() < 1e-9);
        }

        #[test]
        fn round_trip_never_profits(p in arb_pool(), frac in 1e-6f64..=10.0) {
            let dy = frac * p.y_reserve();
            let (mid, bought) = p.swap_y_for_x(dy, 0.0).unwrap();
            let (_, sold) = mid.swap_x_for_y(bought.amount_out, 0.0).unwrap();
            prop_assert!(sold.amount_out <= dy * (1.0 + 1e-12));
        }

        #[test]
        fn reserves_at_price_hits_target(p in arb_pool(), m in 1e-3f64..1e3) {
            let target = m * p.spot_price().unwrap();
            let moved = p.reserves_at_price(target).unwrap();
            prop_assert!((moved.spot_price().unwrap() / target - 1.0).abs() < 1e-12);
            prop_assert!((moved.log_invariant() - p.log_invariant()).abs() < 1e-9);
        }

        #[test]
        fn output_never_drains_reserve(p in arb_pool(), frac in 1e-9f64..=10.0) {
            let (_, r) = p.swap_y_for_x(frac * p.y_reserve(), 0.0).unwrap();
            prop_assert!(r.amount_out < p.x_reserve());
            let (_, r) = p.swap_x_for_y(frac * p.x_reserve(), 0.0).unwrap();
            prop_assert!(r.amount_out < p.y_reserve());
        }
    }
}
