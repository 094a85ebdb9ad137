//! Beta(a,1) data augmentation inside the bid-ask interval.
//!
//! Each quote is replaced by N cell-midpoint prices with the probability mass
//! of a Beta(a,1) law on each cell (the CDF is x^a in closed form, so cell
//! masses are exact). The shape a is solved by bisection so the discrete
//! expectation of IV^2 over the imputed prices equals IV^2 at the anchor.

use serde::Serialize;

use crate::anchor::AnchorResult;
use crate::error::{Result, SmileError};
use crate::market_data::MarketPoint;
use crate::pricing::implied_vol;

const LOG_A_LO: f64 = -6.0 * std::f64::consts::LN_10; // a = 1e-6
const LOG_A_HI: f64 = 6.0 * std::f64::consts::LN_10; // a = 1e6
const TARGET_TOL: f64 = 1e-10;
const LOG_A_TOL: f64 = 1e-12;
const MAX_ITERS: usize = 200;

/// Weighted price set imputed for one quote.
#[derive(Debug, Clone, Serialize)]
pub struct AugmentedQuote {
    pub source: MarketPoint,
    /// (forward-unit price, probability mass), weights summing to 1.
    pub points: Vec<(f64, f64)>,
    pub beta_a: f64,
    /// The anchor target fell outside the discretized reachable range and a
    /// was clamped to the bracket endpoint.
    pub clamped_edge: bool,
}

/// Beta(a,1) probability mass of the N uniform cells of (0,1):
/// weight_j = (j/N)^a - ((j-1)/N)^a.
pub fn beta_cell_weights(a: f64, n: usize) -> Result<Vec<f64>> {
    if !(a > 0.0) || n == 0 {
        return Err(SmileError::InvalidInput(format!(
            "beta weights need a > 0 and N >= 1, got a={a}, N={n}"
        )));
    }
    let cdf = |x: f64| x.powf(a);
    Ok((1..=n)
        .map(|j| cdf(j as f64 / n as f64) - cdf((j - 1) as f64 / n as f64))
        .collect())
}

/// Discrete Beta(a,1) expectation of the cell values.
fn discrete_mean(values: &[f64], a: f64) -> f64 {
    let n = values.len();
    let cdf = |x: f64| x.powf(a);
    let mut acc = 0.0;
    for (j, v) in values.iter().enumerate() {
        let w = cdf((j + 1) as f64 / n as f64) - cdf(j as f64 / n as f64);
        acc += w * v;
    }
    acc
}

/// Solve for the shape a such that the discrete mean of `values` (assumed
/// increasing) equals `target`. Returns (a, clamped_edge). Out-of-range
/// targets clamp a to the bracket endpoint.
pub(crate) fn solve_shape(values: &[f64], target: f64) -> (f64, bool) {
    let mean_at = |log_a: f64| discrete_mean(values, log_a.exp());
    let lo = mean_at(LOG_A_LO);
    let hi = mean_at(LOG_A_HI);
    if target <= lo {
        return (LOG_A_LO.exp(), true);
    }
    if target >= hi {
        return (LOG_A_HI.exp(), true);
    }
    let mut log_lo = LOG_A_LO;
    let mut log_hi = LOG_A_HI;
    for _ in 0..MAX_ITERS {
        let mid = 0.5 * (log_lo + log_hi);
        let diff = mean_at(mid) - target;
        if diff.abs() <= TARGET_TOL || log_hi - log_lo <= LOG_A_TOL {
            return (mid.exp(), false);
        }
        if diff < 0.0 {
            log_lo = mid;
        } else {
            log_hi = mid;
        }
    }
    (0.5f64.mul_add(log_lo, 0.5 * log_hi).exp(), false)
}

fn iv2_cells(p: &MarketPoint, n: usize) -> Result<Vec<f64>> {
    (1..=n)
        .map(|j| {
            let x = (j as f64 - 0.5) / n as f64;
            let price = p.bid + x * p.spread;
            let iv = implied_vol(price, p.forward, p.strike, p.tau, p.is_call)?;
            Ok(iv * iv)
        })
        .collect()
}

/// Beta shape matching the anchor IV^2 on the N-cell discretization.
pub fn solve_beta_a(p: &MarketPoint, anchor: &AnchorResult, n: usize) -> Result<(f64, bool)> {
    if n < 2 {
        return Err(SmileError::InvalidInput(
            "solve_beta_a needs N >= 2 cells".into(),
        ));
    }
    if !(anchor.anchor > p.bid && anchor.anchor < p.ask) {
        return Err(SmileError::InvalidPoint(format!(
            "anchor {} outside ({}, {})",
            anchor.anchor, p.bid, p.ask
        )));
    }
    let values = iv2_cells(p, n)?;
    let target_iv = implied_vol(anchor.anchor, p.forward, p.strike, p.tau, p.is_call)?;
    Ok(solve_shape(&values, target_iv * target_iv))
}

/// Impute N weighted prices for a repaired quote. N = 1 degenerates to the
/// anchor itself with full mass.
pub fn augment_quote(p: &MarketPoint, anchor: &AnchorResult, n: usize) -> Result<AugmentedQuote> {
    if n == 0 {
        return Err(SmileError::InvalidInput("N must be >= 1".into()));
    }
    if n == 1 {
        return Ok(AugmentedQuote {
            source: p.clone(),
            points: vec![(anchor.anchor, 1.0)],
            beta_a: 1.0,
            clamped_edge: false,
        });
    }
    let (a, clamped_edge) = solve_beta_a(p, anchor, n)?;
    let weights = beta_cell_weights(a, n)?;
    let points = weights
        .into_iter()
        .enumerate()
        .map(|(j, w)| {
            let x = (j as f64 + 0.5) / n as f64;
            (p.bid + x * p.spread, w)
        })
        .collect();
    Ok(AugmentedQuote {
        source: p.clone(),
        points,
        beta_a: a,
        clamped_edge,
    })
}
