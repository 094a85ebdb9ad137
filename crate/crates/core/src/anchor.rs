//! Debiasing anchor price.
//!
//! Under the round-off noise model the mid is the efficient price plus a
//! uniform noise of spread width. The anchor `mid + spread * nu` shifts the
//! mid along the spread so the expected squared implied volatility matches
//! the efficient one up to third order in the tick size. The shift depends on
//! the local ratio `rho` of first to second IV^2 derivative per spread unit.

use serde::Serialize;

use crate::error::{Result, SmileError};
use crate::market_data::MarketPoint;
use crate::math::norm_pdf;
use crate::pricing::{implied_vol, iv2_derivs};

/// Standard deviation of the uniform noise on [-1/2, 1/2].
pub const UNIFORM_STD: f64 = 0.288_675_134_594_812_9; // 1/sqrt(12)

/// Anchor-price diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnchorResult {
    /// -d(IV^2)/dP divided by d2(IV^2)/dP2 times the spread; infinite when
    /// the second derivative vanishes.
    pub rho: f64,
    /// Offset in spread units, |nu| <= 1/sqrt(12).
    pub nu: f64,
    /// mid + spread * nu, strictly inside (bid, ask).
    pub anchor: f64,
    /// |rho| fell below the applicability bound and nu was clamped.
    pub clamped: bool,
    /// Implied volatility at the mid.
    pub mid_iv: f64,
}

/// nu as a function of rho for noise standard deviation `sigma_u`
/// (1/sqrt(12) for the uniform model). Returns (nu, clamped).
pub fn nu_from_rho(rho: f64, sigma_u: f64) -> (f64, bool) {
    if rho == 0.0 {
        return (0.0, true);
    }
    if rho.is_infinite() {
        return (0.0, false);
    }
    let var = sigma_u * sigma_u;
    if rho.abs() < sigma_u {
        (rho.signum() * sigma_u, true)
    } else {
        // sigma^2 * sgn(rho) / (|rho| + sqrt(rho^2 - sigma^2)),
        // the root of (nu - rho)^2 = rho^2 - sigma^2 closest to zero
        let nu = var * rho.signum() / (rho.abs() + (rho * rho - var).sqrt());
        (nu, false)
    }
}

/// Anchor with the uniform-noise offset.
pub fn compute_anchor(p: &MarketPoint) -> Result<AnchorResult> {
    compute_anchor_with(p, UNIFORM_STD)
}

/// Anchor for an alternative noise distribution with standard deviation
/// `sigma_u` in spread units.
pub fn compute_anchor_with(p: &MarketPoint, sigma_u: f64) -> Result<AnchorResult> {
    let (lower, upper) = p.bounds();
    if !(p.mid > lower && p.mid < upper) {
        return Err(SmileError::InvalidPoint(format!(
            "mid {} outside arbitrage bounds ({lower}, {upper})",
            p.mid
        )));
    }
    let d = iv2_derivs(p.mid, p.forward, p.strike, p.tau, p.is_call)?;
    if p.spread <= 0.0 {
        return Ok(AnchorResult {
            rho: f64::INFINITY,
            nu: 0.0,
            anchor: p.mid,
            clamped: false,
            mid_iv: d.iv,
        });
    }
    let rho = if d.d2 == 0.0 {
        f64::INFINITY
    } else {
        -d.d1 / (d.d2 * p.spread)
    };
    let (nu, clamped) = nu_from_rho(rho, sigma_u);
    Ok(AnchorResult {
        rho,
        nu,
        anchor: p.mid + p.spread * nu,
        clamped,
        mid_iv: d.iv,
    })
}

/// Black volatility at which the OTM option at log-forward-moneyness `k` is
/// worth exactly `n_ticks` ticks.
pub fn min_implied_vol(k: f64, tau: f64, forward: f64, tick_fwd: f64, n_ticks: u32) -> Result<f64> {
    if n_ticks == 0 {
        return Err(SmileError::InvalidInput("n_ticks must be >= 1".into()));
    }
    let strike = forward * k.exp();
    let is_call = k >= 0.0;
    let target = n_ticks as f64 * tick_fwd;
    implied_vol(target, forward, strike, tau, is_call)
}

/// rho from the simplified closed form, at volatility `iv` and spread `spread`
/// (forward units).
pub fn rho_simplified(iv: f64, k: f64, tau: f64, forward: f64, spread: f64) -> f64 {
    let vol = iv * tau.sqrt();
    let d_plus = -k / vol + 0.5 * vol;
    let vega = forward * tau.sqrt() * norm_pdf(d_plus);
    let w = iv * iv * tau;
    let expr = -k * k / w + w / 4.0 + 1.0;
    -iv * vega / (expr * spread)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionRow {
    pub k: f64,
    pub sigma_bar: f64,
    pub rho: f64,
}

/// Scan of the applicability condition |rho| >= 1/sqrt(12) at the worst-case
/// volatility over k in [-2*sqrt(tau), 2*sqrt(tau)].
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub tau: f64,
    pub spread_ticks: u32,
    pub n_ticks: u32,
    pub rows: Vec<ConditionRow>,
    pub min_abs_rho: f64,
    pub condition_met: bool,
    /// rho(sigma) numerically non-decreasing above sigma_bar at OTM points,
    /// so sigma_bar is the worst case there.
    pub rho_increasing_in_sigma: bool,
}

impl ConditionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,sigma_bar,rho\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.k, r.sigma_bar, r.rho));
        }
        out
    }
}

/// Evaluate the anchor applicability condition on a 81-point k-grid at the minimal
/// volatility consistent with an `n_ticks` option price.
pub fn rho_condition_report(
    tau: f64,
    tick_fwd: f64,
    spread_ticks: u32,
    n_ticks: u32,
) -> Result<ConditionReport> {
    if tau <= 0.0 || tick_fwd <= 0.0 || spread_ticks == 0 {
        return Err(SmileError::InvalidInput(format!(
            "bad condition-scan inputs: tau={tau}, tick={tick_fwd}, spread={spread_ticks}"
        )));
    }
    let forward = 1.0;
    let spread = spread_ticks as f64 * tick_fwd;
    let k_max = 2.0 * tau.sqrt();
    let n_grid = 81;
    let mut rows = Vec::with_capacity(n_grid);
    let mut min_abs_rho = f64::INFINITY;
    let mut increasing = true;
    for i in 0..n_grid {
        let k = -k_max + 2.0 * k_max * i as f64 / (n_grid - 1) as f64;
        let sigma_bar = min_implied_vol(k, tau, forward, tick_fwd, n_ticks)?;
        let rho = rho_simplified(sigma_bar, k, tau, forward, spread);
        min_abs_rho = min_abs_rho.min(rho.abs());
        // monotonicity check at clearly OTM points
        if k.abs() >= 0.5 * k_max {
            let mut prev = rho;
            for step in 1..=8 {
                let sigma = sigma_bar * (1.0 + 0.125 * step as f64);
                let r = rho_simplified(sigma, k, tau, forward, spread);
                if r < prev - 1e-12 {
                    increasing = false;
                }
                prev = r;
            }
        }
        rows.push(ConditionRow { k, sigma_bar, rho });
    }
    Ok(ConditionReport {
        tau,
        spread_ticks,
        n_ticks,
        rows,
        min_abs_rho,
        condition_met: min_abs_rho >= UNIFORM_STD,
        rho_increasing_in_sigma: increasing,
    })
}
