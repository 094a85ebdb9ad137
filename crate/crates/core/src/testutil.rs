//! Shared fixtures for unit tests.

use chrono::TimeZone;

use crate::market_data::{normalize_quote, MarketPoint, OptionType, Quote};
use crate::pricing::{black_price_fwd, BlackInputs};

/// An OTM market point at log-forward-moneyness `k` whose efficient price is
/// generated at flat volatility `sigma` (tau = 0.25, F = 1), with a spread of
/// `spread_frac` times the price and a mid shifted by `shift` spreads.
pub(crate) fn synthetic_point(k: f64, sigma: f64, spread_frac: f64, shift: f64) -> MarketPoint {
    let forward = 1.0;
    let strike = forward * k.exp();
    let is_call = k >= 0.0;
    let eff = black_price_fwd(&BlackInputs {
        forward,
        strike,
        tau: 0.25,
        sigma,
        is_call,
    })
    .unwrap();
    let spread = eff * spread_frac;
    let mid = eff + spread * shift;
    let expiry = chrono::Utc.with_ymd_and_hms(2024, 4, 1, 0, 0, 0).unwrap();
    let source = Quote {
        option_type: if is_call { OptionType::Call } else { OptionType::Put },
        strike,
        expiry,
        bid_ticks: Some(1),
        ask_ticks: Some(2),
        tick_size: 5e-4,
        spot: 1.0,
        future: forward,
        discount: 1.0,
    };
    let now = chrono::Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
    let mut p = normalize_quote(&source, now).unwrap();
    p.tau = 0.25;
    p.bid = mid - spread / 2.0;
    p.ask = mid + spread / 2.0;
    p.mid = mid;
    p.spread = spread;
    p
}
