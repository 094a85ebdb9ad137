//! Quote ingestion and normalization.
//!
//! Deribit-style quotes are priced in crypto (integer ticks of a crypto tick
//! size); the math core works in forward units, `X * price / Bf`. This module
//! converts between the two, computes log-forward-moneyness, filters for OTM
//! instruments and repairs missing or incoherent bids by projecting them on
//! the lower arbitrage bound rounded up to the tick.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::io::Read;

use crate::error::{Result, SmileError};
use crate::pricing::arbitrage_bounds;

pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionType {
    Call,
    Put,
}

impl OptionType {
    pub fn is_call(self) -> bool {
        matches!(self, OptionType::Call)
    }
}

/// One raw option quote. Prices are top-of-book, in integer ticks of
/// `tick_size` crypto units. A missing bid is `None`; a zero-tick bid is
/// treated as missing (it carries no price information).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quote {
    #[serde(rename = "type")]
    pub option_type: OptionType,
    /// Strike in fiat.
    pub strike: f64,
    /// Expiry timestamp (ISO-8601).
    pub expiry: DateTime<Utc>,
    pub bid_ticks: Option<u64>,
    pub ask_ticks: Option<u64>,
    /// Crypto units per tick.
    pub tick_size: f64,
    /// Spot crypto-fiat rate.
    pub spot: f64,
    /// Deribit future for the expiry, fiat per crypto.
    pub future: f64,
    /// Fiat zero-coupon price in (0, 1].
    pub discount: f64,
}

/// Normalized observation in forward units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarketPoint {
    /// Time to expiry in years (ACT/365.25).
    pub tau: f64,
    /// Log-forward-moneyness log(K/F).
    pub k: f64,
    pub is_call: bool,
    pub forward: f64,
    pub strike: f64,
    /// Bid in forward units; 0 until repair when the bid is missing.
    pub bid: f64,
    pub ask: f64,
    pub mid: f64,
    pub spread: f64,
    /// One tick in forward units.
    pub tick_fwd: f64,
    /// The bid was absent or incoherent in the source quote.
    pub bid_missing: bool,
    /// Set by `repair_bid` when the bid was replaced.
    pub bid_repaired: bool,
    pub source: Quote,
}

impl MarketPoint {
    pub fn bounds(&self) -> (f64, f64) {
        arbitrage_bounds(self.forward, self.strike, self.is_call)
    }
}

/// Forward from spot and the two discount curves (interest rate parity).
pub fn forward_from_irp(spot: f64, crypto_discount: f64, fiat_discount: f64) -> Result<f64> {
    if !(spot > 0.0
        && crypto_discount > 0.0
        && crypto_discount <= 1.0
        && fiat_discount > 0.0
        && fiat_discount <= 1.0)
    {
        return Err(SmileError::InvalidInput(format!(
            "IRP inputs out of domain: X={spot}, Bc={crypto_discount}, Bf={fiat_discount}"
        )));
    }
    Ok(spot * crypto_discount / fiat_discount)
}

fn ticks_to_fwd(ticks: u64, q: &Quote) -> f64 {
    q.spot * (ticks as f64 * q.tick_size) / q.discount
}

/// Convert a raw quote to forward units. Drops quotes without an ask and
/// rejects expired or malformed quotes.
pub fn normalize_quote(q: &Quote, now: DateTime<Utc>) -> Result<MarketPoint> {
    if !(q.strike > 0.0 && q.future > 0.0 && q.tick_size > 0.0 && q.spot > 0.0) {
        return Err(SmileError::InvalidInput(format!(
            "quote out of domain: K={}, F={}, ts={}, X={}",
            q.strike, q.future, q.tick_size, q.spot
        )));
    }
    if q.discount <= 0.0 || q.discount > 1.0 {
        return Err(SmileError::InvalidInput(format!(
            "discount {} outside (0, 1]",
            q.discount
        )));
    }
    if q.expiry <= now {
        return Err(SmileError::InvalidInput(format!(
            "quote expired: expiry {} <= now {}",
            q.expiry, now
        )));
    }
    let ask_ticks = match q.ask_ticks {
        Some(a) if a > 0 => a,
        _ => return Err(SmileError::QuoteDropped("missing ask".into())),
    };
    // zero-tick bids carry no information; treat like a missing bid
    let bid_ticks = q.bid_ticks.filter(|&b| b > 0);

    let tau = (q.expiry - now).num_seconds() as f64 / SECONDS_PER_YEAR;
    let k = (q.strike / q.future).ln();
    let ask = ticks_to_fwd(ask_ticks, q);
    let (bid, bid_missing) = match bid_ticks {
        Some(b) => (ticks_to_fwd(b, q), false),
        None => (0.0, true),
    };
    Ok(MarketPoint {
        tau,
        k,
        is_call: q.option_type.is_call(),
        forward: q.future,
        strike: q.strike,
        bid,
        ask,
        mid: 0.5 * (bid + ask),
        spread: ask - bid,
        tick_fwd: q.spot * q.tick_size / q.discount,
        bid_missing,
        bid_repaired: false,
        source: q.clone(),
    })
}

/// Keep only OTM instruments: calls for k >= 0, puts for k <= 0. Both sides
/// are retained at k = 0.
pub fn filter_otm(points: Vec<MarketPoint>) -> Vec<MarketPoint> {
    points
        .into_iter()
        .filter(|p| if p.is_call { p.k >= 0.0 } else { p.k <= 0.0 })
        .collect()
}

/// Repair a missing, out-of-bounds or crossed bid by projecting it on the
/// lower arbitrage bound rounded up to the tick grid, with a floor of one
/// tick. Rejects quotes whose ask is itself outside the arbitrage bounds.
pub fn repair_bid(mut p: MarketPoint) -> Result<MarketPoint> {
    let (lower, upper) = p.bounds();
    if p.ask <= lower || p.ask >= upper {
        return Err(SmileError::IncoherentAsk(format!(
            "ask {} outside arbitrage bounds ({lower}, {upper}) at k={}",
            p.ask, p.k
        )));
    }
    let needs = p.bid_missing || p.bid < lower || p.bid >= p.ask;
    if needs {
        let mut candidate = ((lower / p.tick_fwd).ceil() * p.tick_fwd).max(p.tick_fwd);
        if candidate >= p.ask {
            // one-tick ask: fall back to the bound itself so bid < ask holds
            candidate = (p.ask - p.tick_fwd).max(lower);
        }
        p.bid = candidate;
        p.bid_missing = false;
        p.bid_repaired = true;
        p.mid = 0.5 * (p.bid + p.ask);
        p.spread = p.ask - p.bid;
    }
    Ok(p)
}

/// Parse quotes from the CSV schema
/// `type,strike,expiry,bid_ticks,ask_ticks,tick_size,spot,future,discount`.
/// An absent bid is an empty field. Errors carry 1-based line numbers.
pub fn read_quotes_csv<R: Read>(reader: R) -> Result<Vec<Quote>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut quotes = Vec::new();
    for result in rdr.deserialize::<Quote>() {
        match result {
            Ok(q) => quotes.push(q),
            Err(e) => {
                let line = e
                    .position()
                    .map(|p| p.line() as usize)
                    .unwrap_or(0);
                return Err(SmileError::Parse {
                    line,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(quotes)
}

/// Write quotes back out in the same CSV schema.
pub fn write_quotes_csv<W: std::io::Write>(writer: W, quotes: &[Quote]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for q in quotes {
        wtr.serialize(q)
            .map_err(|e| SmileError::InvalidInput(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}
