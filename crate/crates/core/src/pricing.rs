//! Black-76 forward pricing, implied-volatility inversion, and analytic
//! derivatives of the squared implied volatility with respect to price.
//!
//! All prices are in *forward units*: the quoted crypto price times spot,
//! divided by the fiat discount factor. In these units the Black formula
//! needs no discounting and the call price lives in ((F-K)+, F).

use crate::error::{Result, SmileError};
use crate::math::{norm_cdf, norm_pdf};

/// Inputs to the Black-76 formula on the forward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackInputs {
    /// Forward price (fiat per crypto), strictly positive.
    pub forward: f64,
    /// Strike, strictly positive.
    pub strike: f64,
    /// Time to expiry in years, strictly positive.
    pub tau: f64,
    /// Black volatility, non-negative.
    pub sigma: f64,
    pub is_call: bool,
}

impl BlackInputs {
    pub fn validate(&self) -> Result<()> {
        let ok = self.forward > 0.0
            && self.strike > 0.0
            && self.tau > 0.0
            && self.sigma >= 0.0
            && self.forward.is_finite()
            && self.strike.is_finite()
            && self.tau.is_finite()
            && self.sigma.is_finite();
        if ok {
            Ok(())
        } else {
            Err(SmileError::InvalidInput(format!(
                "Black inputs out of domain: F={}, K={}, tau={}, sigma={}",
                self.forward, self.strike, self.tau, self.sigma
            )))
        }
    }
}

/// Black-Scholes vega and vomma.
#[derive(Debug, Clone, Copy)]
pub struct Greeks {
    pub vega: f64,
    pub vomma: f64,
}

/// Analytic derivatives of IV^2 with respect to the forward-unit price.
#[derive(Debug, Clone, Copy)]
pub struct IvDerivatives {
    /// First derivative of IV^2 in price; equals 2*IV/vega, always positive.
    pub d1: f64,
    /// Second derivative of IV^2 in price. Negative in the wings (concave
    /// regime), positive near the money.
    pub d2: f64,
    pub vega: f64,
    pub vomma: f64,
    /// Implied volatility at the input price.
    pub iv: f64,
}

/// No-arbitrage price interval (lower, upper) in forward units.
pub fn arbitrage_bounds(forward: f64, strike: f64, is_call: bool) -> (f64, f64) {
    if is_call {
        ((forward - strike).max(0.0), forward)
    } else {
        ((strike - forward).max(0.0), strike)
    }
}

/// Black-76 forward-unit price; put via call-put parity.
pub fn black_price_fwd(inputs: &BlackInputs) -> Result<f64> {
    inputs.validate()?;
    let BlackInputs {
        forward: f,
        strike: k,
        tau,
        sigma,
        is_call,
    } = *inputs;
    let call = if sigma == 0.0 {
        (f - k).max(0.0)
    } else {
        let vol = sigma * tau.sqrt();
        let d_plus = (f / k).ln() / vol + 0.5 * vol;
        let d_minus = d_plus - vol;
        f * norm_cdf(d_plus) - k * norm_cdf(d_minus)
    };
    Ok(if is_call { call } else { call - (f - k) })
}

/// Vega and vomma at the given volatility. Requires sigma > 0.
pub fn greeks(inputs: &BlackInputs) -> Result<Greeks> {
    inputs.validate()?;
    if inputs.sigma <= 0.0 {
        return Err(SmileError::DegenerateVol);
    }
    let vol = inputs.sigma * inputs.tau.sqrt();
    let d_plus = (inputs.forward / inputs.strike).ln() / vol + 0.5 * vol;
    let d_minus = d_plus - vol;
    let vega = inputs.forward * inputs.tau.sqrt() * norm_pdf(d_plus);
    let vomma = vega * d_plus * d_minus / inputs.sigma;
    Ok(Greeks { vega, vomma })
}

const IV_PRICE_TOL: f64 = 1e-10;
const IV_MAX_ITERS: usize = 200;

/// Invert the Black formula for the volatility matching a forward-unit price.
///
/// Safeguarded Newton on the price, falling back to bisection whenever the
/// Newton step leaves the bracket or vega is too small to trust.
pub fn implied_vol(price: f64, forward: f64, strike: f64, tau: f64, is_call: bool) -> Result<f64> {
    if !(price.is_finite() && forward > 0.0 && strike > 0.0 && tau > 0.0) {
        return Err(SmileError::InvalidInput(format!(
            "implied_vol inputs out of domain: P={price}, F={forward}, K={strike}, tau={tau}"
        )));
    }
    let (lower, upper) = arbitrage_bounds(forward, strike, is_call);
    if price <= lower {
        return Err(SmileError::BelowLowerBound {
            price,
            bound: lower,
        });
    }
    if price >= upper {
        return Err(SmileError::AboveUpperBound {
            price,
            bound: upper,
        });
    }

    let price_at = |sigma: f64| -> f64 {
        black_price_fwd(&BlackInputs {
            forward,
            strike,
            tau,
            sigma,
            is_call,
        })
        .expect("validated inputs")
    };

    // Bracket: grow the upper vol geometrically until it over-prices.
    let mut sig_lo = 1e-8;
    let mut sig_hi = 1.0;
    let mut grow = 0;
    while price_at(sig_hi) < price {
        sig_hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(SmileError::NoConvergence {
                iterations: IV_MAX_ITERS,
            });
        }
    }

    let mut sigma = 0.5 * (sig_lo + sig_hi);
    for it in 0..IV_MAX_ITERS {
        let p = price_at(sigma);
        let diff = p - price;
        if diff.abs() <= IV_PRICE_TOL {
            return Ok(sigma);
        }
        if diff > 0.0 {
            sig_hi = sigma;
        } else {
            sig_lo = sigma;
        }
        let vol = sigma * tau.sqrt();
        let d_plus = (forward / strike).ln() / vol + 0.5 * vol;
        let vega = forward * tau.sqrt() * norm_pdf(d_plus);
        let newton = sigma - diff / vega;
        sigma = if vega > 1e-12 && newton > sig_lo && newton < sig_hi {
            newton
        } else {
            0.5 * (sig_lo + sig_hi)
        };
        if sig_hi - sig_lo < f64::EPSILON * sig_hi {
            return Ok(sigma);
        }
        let _ = it;
    }
    Err(SmileError::NoConvergence {
        iterations: IV_MAX_ITERS,
    })
}

/// First and second derivatives of IV^2 with respect to price, with the
/// vega/vomma they are built from.
pub fn iv2_derivs(price: f64, forward: f64, strike: f64, tau: f64, is_call: bool) -> Result<IvDerivatives> {
    let iv = implied_vol(price, forward, strike, tau, is_call)?;
    let Greeks { vega, vomma } = greeks(&BlackInputs {
        forward,
        strike,
        tau,
        sigma: iv,
        is_call,
    })?;
    let k = (strike / forward).ln();
    let w = iv * iv * tau;
    let d1 = 2.0 * iv / vega;
    let d2 = (2.0 / (vega * vega)) * (-k * k / w + w / 4.0 + 1.0);
    Ok(IvDerivatives {
        d1,
        d2,
        vega,
        vomma,
        iv,
    })
}

/// Relative IV sensitivity: price / vega at the implied vol. Measures the
/// absolute IV error caused by a relative price error.
pub fn iv_sensitivity(price: f64, forward: f64, strike: f64, tau: f64, is_call: bool) -> Result<f64> {
    let iv = implied_vol(price, forward, strike, tau, is_call)?;
    let g = greeks(&BlackInputs {
        forward,
        strike,
        tau,
        sigma: iv,
        is_call,
    })?;
    Ok(price / g.vega)
}
