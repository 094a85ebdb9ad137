//! Browser demo bindings: SVI smile exploration, anchor-offset profiles and
//! Beta augmentation weights.
//!
//! The data-producing functions are plain Rust (unit-tested natively); the
//! `wasm_bindgen` wrappers marshal them through JSON-like JS values for the
//! static page in `static/index.html`. Build with
//! `wasm-pack build crates/wasm-demo --target web`.

use serde::{Deserialize, Serialize};

use smilecal::anchor::compute_anchor;
use smilecal::augmentation::augment_quote;
use smilecal::market_data::{MarketPoint, OptionType, Quote};
use smilecal::pricing::{black_price_fwd, implied_vol, BlackInputs};
use smilecal::svi::{butterfly_g, SviParams};

// --- smile explorer ----------------------------------------------------------

#[derive(Debug, Deserialize)]
pub struct SmileRequest {
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub m: f64,
    pub sigma: f64,
    pub tau: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub n: usize,
}

#[derive(Debug, Serialize)]
pub struct SmileResponse {
    pub k: Vec<f64>,
    pub iv: Vec<f64>,
    pub total_variance: Vec<f64>,
    /// Butterfly diagnostic g(k); the smile is arbitrage-free where positive.
    pub g: Vec<f64>,
    pub butterfly_ok: bool,
    pub min_variance: f64,
}

pub fn smile_data(req: &SmileRequest) -> Result<SmileResponse, String> {
    if req.n < 2 || !(req.k_max > req.k_min) || !(req.tau > 0.0) {
        return Err("need n >= 2, k_max > k_min and tau > 0".into());
    }
    let chi = SviParams::new(req.a, req.b, req.rho, req.m, req.sigma)
        .map_err(|e| e.to_string())?;
    let mut k = Vec::with_capacity(req.n);
    let mut iv = Vec::with_capacity(req.n);
    let mut w = Vec::with_capacity(req.n);
    let mut g = Vec::with_capacity(req.n);
    let mut ok = true;
    for i in 0..req.n {
        let ki = req.k_min + (req.k_max - req.k_min) * i as f64 / (req.n - 1) as f64;
        let gi = butterfly_g(&chi, ki).map_err(|e| e.to_string())?;
        ok &= gi > 0.0;
        k.push(ki);
        iv.push(chi.iv(ki, req.tau));
        w.push(chi.w(ki));
        g.push(gi);
    }
    Ok(SmileResponse {
        k,
        iv,
        total_variance: w,
        g,
        butterfly_ok: ok,
        min_variance: chi.min_variance(),
    })
}

// --- shared fixture ----------------------------------------------------------

/// OTM market point at `k` (F = 1) whose efficient price comes from a flat
/// volatility, with a spread in ticks around a mid shifted off the efficient
/// price by `shift` spreads.
fn demo_point(k: f64, sigma: f64, tau: f64, spread: f64, shift: f64) -> Result<MarketPoint, String> {
    let forward = 1.0;
    let strike = forward * k.exp();
    let is_call = k >= 0.0;
    let eff = black_price_fwd(&BlackInputs {
        forward,
        strike,
        tau,
        sigma,
        is_call,
    })
    .map_err(|e| e.to_string())?;
    let mid = eff + spread * shift;
    if mid - spread / 2.0 <= 0.0 {
        return Err(format!(
            "spread {spread} too wide for the option price {eff:.3e} at k={k}"
        ));
    }
    let source = Quote {
        option_type: if is_call { OptionType::Call } else { OptionType::Put },
        strike,
        expiry: chrono::DateTime::UNIX_EPOCH + chrono::Duration::days(36_500),
        bid_ticks: Some(1),
        ask_ticks: Some(2),
        tick_size: 5e-4,
        spot: 1.0,
        future: forward,
        discount: 1.0,
    };
    Ok(MarketPoint {
        tau,
        k,
        is_call,
        forward,
        strike,
        bid: mid - spread / 2.0,
        ask: mid + spread / 2.0,
        mid,
        spread,
        tick_fwd: 5e-4,
        bid_missing: false,
        bid_repaired: false,
        source,
    })
}

// --- anchor profile ----------------------------------------------------------

#[derive(Debug, Deserialize)]
pub struct AnchorRequest {
    /// Flat volatility generating the efficient prices.
    pub sigma: f64,
    pub tau: f64,
    /// Spread width in ticks of 5e-4 forward units.
    pub spread_ticks: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub n: usize,
}

#[derive(Debug, Serialize)]
pub struct AnchorRow {
    pub k: f64,
    pub rho: f64,
    /// Anchor offset in spread units.
    pub nu: f64,
    pub clamped: bool,
    pub mid_iv: f64,
    pub anchor_iv: f64,
}

pub fn anchor_profile(req: &AnchorRequest) -> Result<Vec<AnchorRow>, String> {
    if req.n < 2 || !(req.k_max > req.k_min) {
        return Err("need n >= 2 and k_max > k_min".into());
    }
    let spread = req.spread_ticks * 5e-4;
    (0..req.n)
        .map(|i| {
            let k = req.k_min + (req.k_max - req.k_min) * i as f64 / (req.n - 1) as f64;
            let p = demo_point(k, req.sigma, req.tau, spread, 0.0)?;
            let a = compute_anchor(&p).map_err(|e| e.to_string())?;
            let anchor_iv = implied_vol(a.anchor, p.forward, p.strike, p.tau, p.is_call)
                .map_err(|e| e.to_string())?;
            Ok(AnchorRow {
                k,
                rho: a.rho,
                nu: a.nu,
                clamped: a.clamped,
                mid_iv: a.mid_iv,
                anchor_iv,
            })
        })
        .collect()
}

// --- augmentation weights ----------------------------------------------------

#[derive(Debug, Deserialize)]
pub struct WeightsRequest {
    pub k: f64,
    pub sigma: f64,
    pub tau: f64,
    pub spread_ticks: f64,
    /// Mid offset from the efficient price, in spreads.
    pub shift: f64,
    /// Number of imputed cells.
    pub n: usize,
}

#[derive(Debug, Serialize)]
pub struct WeightsResponse {
    /// Imputed price position inside the spread, in [0, 1].
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    pub cell_iv: Vec<f64>,
    pub beta_a: f64,
    pub clamped_edge: bool,
    pub mid_iv: f64,
    pub anchor_iv: f64,
    /// Anchor position inside the spread, in [0, 1].
    pub anchor_x: f64,
}

pub fn augmentation_weights(req: &WeightsRequest) -> Result<WeightsResponse, String> {
    if req.n == 0 || req.n > 10_000 {
        return Err("need 1 <= n <= 10000".into());
    }
    let spread = req.spread_ticks * 5e-4;
    let p = demo_point(req.k, req.sigma, req.tau, spread, req.shift)?;
    let anchor = compute_anchor(&p).map_err(|e| e.to_string())?;
    let aug = augment_quote(&p, &anchor, req.n).map_err(|e| e.to_string())?;
    let iv_at = |price: f64| {
        implied_vol(price, p.forward, p.strike, p.tau, p.is_call).map_err(|e| e.to_string())
    };
    let mut x = Vec::with_capacity(aug.points.len());
    let mut weights = Vec::with_capacity(aug.points.len());
    let mut cell_iv = Vec::with_capacity(aug.points.len());
    for &(price, w) in &aug.points {
        x.push((price - p.bid) / p.spread);
        weights.push(w);
        cell_iv.push(iv_at(price)?);
    }
    Ok(WeightsResponse {
        x,
        weights,
        cell_iv,
        beta_a: aug.beta_a,
        clamped_edge: aug.clamped_edge,
        mid_iv: anchor.mid_iv,
        anchor_iv: iv_at(anchor.anchor)?,
        anchor_x: (anchor.anchor - p.bid) / p.spread,
    })
}

// --- wasm bindings -----------------------------------------------------------

#[cfg(target_arch = "wasm32")]
mod bindings {
    use super::*;
    use wasm_bindgen::prelude::*;

    fn to_js<T: Serialize>(value: &T) -> Result<JsValue, JsValue> {
        serde_wasm_bindgen::to_value(value).map_err(|e| JsValue::from_str(&e.to_string()))
    }

    fn from_js<T: for<'de> Deserialize<'de>>(value: JsValue) -> Result<T, JsValue> {
        serde_wasm_bindgen::from_value(value).map_err(|e| JsValue::from_str(&e.to_string()))
    }

    #[wasm_bindgen]
    pub fn svi_smile(request: JsValue) -> Result<JsValue, JsValue> {
        let req: SmileRequest = from_js(request)?;
        to_js(&smile_data(&req).map_err(|e| JsValue::from_str(&e))?)
    }

    #[wasm_bindgen]
    pub fn anchor_offsets(request: JsValue) -> Result<JsValue, JsValue> {
        let req: AnchorRequest = from_js(request)?;
        to_js(&anchor_profile(&req).map_err(|e| JsValue::from_str(&e))?)
    }

    #[wasm_bindgen]
    pub fn beta_weights(request: JsValue) -> Result<JsValue, JsValue> {
        let req: WeightsRequest = from_js(request)?;
        to_js(&augmentation_weights(&req).map_err(|e| JsValue::from_str(&e))?)
    }
}
