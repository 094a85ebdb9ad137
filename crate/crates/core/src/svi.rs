//! Raw SVI total-variance parametrization.
//!
//! w(k) = a + b * ( rho*(k - m) + sqrt((k - m)^2 + sigma^2) )
//!
//! with b >= 0, |rho| < 1, sigma > 0 and a + b*sigma*sqrt(1 - rho^2) >= 0 so
//! the total variance stays non-negative for every k.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmileError};

/// The five Raw-SVI parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SviParams {
    /// Total-variance offset.
    pub a: f64,
    /// Slope, non-negative.
    pub b: f64,
    /// Skew in (-1, 1).
    pub rho: f64,
    /// Translation.
    pub m: f64,
    /// Curvature scale, positive.
    pub sigma: f64,
}

impl SviParams {
    pub fn new(a: f64, b: f64, rho: f64, m: f64, sigma: f64) -> Result<Self> {
        let chi = SviParams { a, b, rho, m, sigma };
        chi.validate()?;
        Ok(chi)
    }

    pub fn is_valid(&self) -> bool {
        self.a.is_finite()
            && self.m.is_finite()
            && self.b >= 0.0
            && self.b.is_finite()
            && self.rho.abs() < 1.0
            && self.sigma > 0.0
            && self.sigma.is_finite()
            && self.min_variance() >= 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(SmileError::InvalidParams(format!("{self:?}")))
        }
    }

    /// Lower bound of the total variance: a + b*sigma*sqrt(1 - rho^2).
    pub fn min_variance(&self) -> f64 {
        self.a + self.b * self.sigma * (1.0 - self.rho * self.rho).sqrt()
    }

    /// Total variance at log-forward-moneyness k (unchecked).
    pub fn w(&self, k: f64) -> f64 {
        let x = k - self.m;
        self.a + self.b * (self.rho * x + (x * x + self.sigma * self.sigma).sqrt())
    }

    /// dw/dk.
    pub fn w_prime(&self, k: f64) -> f64 {
        let x = k - self.m;
        self.b * (self.rho + x / (x * x + self.sigma * self.sigma).sqrt())
    }

    /// d2w/dk2.
    pub fn w_second(&self, k: f64) -> f64 {
        let x = k - self.m;
        let s2 = x * x + self.sigma * self.sigma;
        self.b * self.sigma * self.sigma / (s2 * s2.sqrt())
    }

    /// Implied volatility at k for expiry tau.
    pub fn iv(&self, k: f64, tau: f64) -> f64 {
        (self.w(k) / tau).sqrt()
    }
}

/// Checked total-variance evaluation.
pub fn svi_total_variance(chi: &SviParams, k: f64) -> Result<f64> {
    chi.validate()?;
    Ok(chi.w(k))
}

/// Verdict on the type invariants.
pub fn validate_svi(chi: &SviParams) -> bool {
    chi.is_valid()
}

/// Butterfly-arbitrage diagnostic (Gatheral-Jacquier g-function). The smile
/// is free of butterfly arbitrage on a region where g stays positive.
pub fn butterfly_g(chi: &SviParams, k: f64) -> Result<f64> {
    chi.validate()?;
    let w = chi.w(k);
    if w <= 0.0 {
        return Err(SmileError::InvalidParams(format!(
            "total variance vanishes at k={k}"
        )));
    }
    let wp = chi.w_prime(k);
    let wpp = chi.w_second(k);
    let t = 1.0 - k * wp / (2.0 * w);
    Ok(t * t - (wp * wp / 4.0) * (1.0 / w + 0.25) + wpp / 2.0)
}

/// Scan g on a uniform grid; returns the minimum and whether it stays positive.
pub fn butterfly_scan(chi: &SviParams, k_min: f64, k_max: f64, n: usize) -> Result<(f64, bool)> {
    let mut min_g = f64::INFINITY;
    for i in 0..n {
        let k = k_min + (k_max - k_min) * i as f64 / (n - 1) as f64;
        let g = butterfly_g(chi, k)?;
        min_g = min_g.min(g);
    }
    Ok((min_g, min_g > 0.0))
}
