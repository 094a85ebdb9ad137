//! SVI smile calibration.
//!
//! Fits the five Raw-SVI parameters by minimizing a weighted Huber loss on
//! total variance with BFGS in an unconstrained reparametrization
//! (b = exp(beta), sigma = exp(s), rho = tanh(r)), with the non-negativity
//! constraint on the minimum variance enforced by a quadratic penalty. The
//! mid method uses one point per quote at the mid; the data-augmentation
//! method uses the anchor-centered Beta imputation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::anchor::compute_anchor;
use crate::augmentation::{augment_quote, AugmentedQuote};
use crate::error::{Result, SmileError};
use crate::market_data::MarketPoint;
use crate::pricing::implied_vol;
use crate::svi::{butterfly_scan, SviParams};

const PENALTY_WEIGHT: f64 = 1e4;
const ARMIJO_C1: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mid,
    DataAugmentation,
}

#[derive(Debug, Clone, Copy)]
pub struct CalibrationConfig {
    pub method: Method,
    /// Number of imputed points per quote for the augmentation method.
    pub n_aug: usize,
    /// Huber crossover in total-variance units.
    pub huber_delta: f64,
    pub max_iters: usize,
    /// Convergence requires gradient max-norm below this.
    pub grad_tolerance: f64,
    /// Random restarts around the initial guess; the best loss wins.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            method: Method::DataAugmentation,
            n_aug: 100,
            huber_delta: 0.004,
            max_iters: 500,
            grad_tolerance: 1e-6,
            restarts: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub k: f64,
    pub fitted_iv: f64,
    pub data_iv: f64,
    /// Data minus fit in total-variance units.
    pub residual_w: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub method: Method,
    pub chi_star: SviParams,
    pub final_loss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residuals: Vec<ResidualRow>,
    pub butterfly_min_g: f64,
    pub butterfly_ok: bool,
    pub repaired_count: usize,
}

/// Calibration error statistics against a reference IV curve, in bps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorMetrics {
    pub bias: f64,
    pub l1: f64,
    pub l2: f64,
}

fn huber(delta: f64, r: f64) -> f64 {
    if r.abs() <= delta {
        0.5 * r * r
    } else {
        delta * (r.abs() - 0.5 * delta)
    }
}

fn huber_deriv(delta: f64, r: f64) -> f64 {
    r.clamp(-delta, delta)
}

// --- unconstrained reparametrization ---------------------------------------

fn theta_from_params(chi: &SviParams) -> [f64; 5] {
    [
        chi.a,
        chi.b.max(1e-12).ln(),
        chi.rho.clamp(-0.999_999, 0.999_999).atanh(),
        chi.m,
        chi.sigma.ln(),
    ]
}

fn params_from_theta(theta: &[f64; 5]) -> SviParams {
    SviParams {
        a: theta[0],
        b: theta[1].exp(),
        rho: theta[2].tanh(),
        m: theta[3],
        sigma: theta[4].exp(),
    }
}

// --- objective ---------------------------------------------------------------

struct QuoteTargets {
    k: f64,
    /// (tau * IV^2 at the imputed price, weight)
    targets: Vec<(f64, f64)>,
}

pub(crate) struct ObjectiveData {
    quotes: Vec<QuoteTargets>,
    huber_delta: f64,
}

impl ObjectiveData {
    fn from_augmented(data: &[AugmentedQuote], huber_delta: f64) -> Result<Self> {
        let quotes = data
            .iter()
            .map(|q| {
                let p = &q.source;
                let targets = q
                    .points
                    .iter()
                    .map(|&(price, weight)| {
                        let iv = implied_vol(price, p.forward, p.strike, p.tau, p.is_call)?;
                        Ok((p.tau * iv * iv, weight))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(QuoteTargets { k: p.k, targets })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ObjectiveData {
            quotes,
            huber_delta,
        })
    }

    fn loss(&self, theta: &[f64; 5]) -> f64 {
        self.loss_grad(theta).0
    }

    fn loss_grad(&self, theta: &[f64; 5]) -> (f64, [f64; 5]) {
        let chi = params_from_theta(theta);
        let n = self.quotes.len() as f64;
        let mut loss = 0.0;
        let mut grad = [0.0f64; 5];
        let root = |x: f64| (x * x + chi.sigma * chi.sigma).sqrt();
        for q in &self.quotes {
            let x = q.k - chi.m;
            let r_term = root(x);
            let w = chi.a + chi.b * (chi.rho * x + r_term);
            // dL/dw accumulated over the imputed points of this quote
            let mut dl_dw = 0.0;
            for &(target, weight) in &q.targets {
                let r = target - w;
                loss += weight * huber(self.huber_delta, r);
                dl_dw += -weight * huber_deriv(self.huber_delta, r);
            }
            dl_dw /= n;
            // chain rule through theta = (a, ln b, atanh rho, m, ln sigma)
            grad[0] += dl_dw;
            grad[1] += dl_dw * chi.b * (chi.rho * x + r_term);
            grad[2] += dl_dw * (1.0 - chi.rho * chi.rho) * chi.b * x;
            grad[3] += dl_dw * (-chi.b * (chi.rho + x / r_term));
            grad[4] += dl_dw * chi.b * chi.sigma * chi.sigma / r_term;
        }
        loss /= n;
        // non-negative minimum variance, as a quadratic penalty
        let c = chi.min_variance();
        if c < 0.0 {
            loss += PENALTY_WEIGHT * c * c;
            let root1m = (1.0 - chi.rho * chi.rho).sqrt();
            let dc = 2.0 * PENALTY_WEIGHT * c;
            grad[0] += dc;
            grad[1] += dc * chi.b * chi.sigma * root1m;
            grad[2] += dc * (-chi.b * chi.sigma * chi.rho * root1m);
            grad[4] += dc * chi.b * chi.sigma * root1m;
        }
        (loss, grad)
    }
}

/// Weighted Huber objective over augmented quotes. The mid method is the
/// special case of a single unit-weight point per quote.
pub fn objective(chi: &SviParams, data: &[AugmentedQuote], cfg: &CalibrationConfig) -> Result<f64> {
    if data.is_empty() {
        return Err(SmileError::InsufficientData("no quotes".into()));
    }
    let obj = ObjectiveData::from_augmented(data, cfg.huber_delta)?;
    Ok(obj.loss(&theta_from_params(chi)))
}

// --- initial guess -----------------------------------------------------------

fn linear_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in points {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Heuristic starting point from the observed mid total variances.
pub fn init_guess(points: &[MarketPoint]) -> Result<SviParams> {
    let mut obs: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let iv = implied_vol(p.mid, p.forward, p.strike, p.tau, p.is_call)?;
            Ok((p.k, p.tau * iv * iv))
        })
        .collect::<Result<Vec<_>>>()?;
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut distinct = 1;
    for i in 1..obs.len() {
        if obs[i].0 > obs[i - 1].0 {
            distinct += 1;
        }
    }
    if distinct < 5 {
        return Err(SmileError::InsufficientData(format!(
            "need at least 5 distinct log-forward-moneynesses, got {distinct}"
        )));
    }
    let (m, w_min) = obs
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let a = 0.9 * w_min;
    let q1 = obs[obs.len() / 4].0;
    let q3 = obs[3 * obs.len() / 4].0;
    let sigma = (0.5 * (q3 - q1)).max(0.05);
    let right: Vec<_> = obs.iter().copied().filter(|&(k, _)| k >= m).collect();
    let left: Vec<_> = obs.iter().copied().filter(|&(k, _)| k <= m).collect();
    let slope_right = linear_slope(&right).max(0.0); // b(1+rho)
    let slope_left = linear_slope(&left).min(0.0); // -b(1-rho)
    let b = (0.5 * (slope_right - slope_left)).max(0.0);
    let rho = if b > 1e-12 {
        ((slope_right + slope_left) / (2.0 * b)).clamp(-0.95, 0.95)
    } else {
        0.0
    };
    let chi = SviParams { a, b, rho, m, sigma };
    chi.validate()?;
    Ok(chi)
}

// --- BFGS ---------------------------------------------------------------------

struct OptimOutcome {
    theta: [f64; 5],
    loss: f64,
    grad_norm: f64,
    iterations: usize,
}

fn bfgs(obj: &ObjectiveData, start: [f64; 5], max_iters: usize, grad_tol: f64) -> OptimOutcome {
    let mut theta = start;
    let (mut loss, mut grad) = obj.loss_grad(&theta);
    // inverse Hessian approximation
    let mut h = [[0.0f64; 5]; 5];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut iterations = 0;
    for _ in 0..max_iters {
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < grad_tol {
            break;
        }
        iterations += 1;
        // p = -H g
        let mut dir = [0.0f64; 5];
        for i in 0..5 {
            for j in 0..5 {
                dir[i] -= h[i][j] * grad[j];
            }
        }
        let slope: f64 = (0..5).map(|i| dir[i] * grad[i]).sum();
        if slope >= 0.0 {
            // not a descent direction; reset to steepest descent
            for i in 0..5 {
                dir[i] = -grad[i];
            }
            for (i, row) in h.iter_mut().enumerate() {
                *row = [0.0; 5];
                row[i] = 1.0;
            }
        }
        let slope: f64 = (0..5).map(|i| dir[i] * grad[i]).sum();
        // Armijo backtracking with step halving
        let mut step = 1.0;
        let mut next;
        let mut next_loss;
        loop {
            next = theta;
            for i in 0..5 {
                next[i] += step * dir[i];
            }
            next_loss = obj.loss(&next);
            if next_loss.is_finite() && next_loss <= loss + ARMIJO_C1 * step * slope {
                break;
            }
            step *= 0.5;
            if step < MIN_STEP {
                break;
            }
        }
        if step < MIN_STEP {
            break;
        }
        let (_, next_grad) = obj.loss_grad(&next);
        let mut s = [0.0f64; 5];
        let mut y = [0.0f64; 5];
        for i in 0..5 {
            s[i] = next[i] - theta[i];
            y[i] = next_grad[i] - grad[i];
        }
        let sy: f64 = (0..5).map(|i| s[i] * y[i]).sum();
        if sy > 1e-12 {
            // H <- (I - s y^T / sy) H (I - y s^T / sy) + s s^T / sy
            let rho_u = 1.0 / sy;
            let mut hy = [0.0f64; 5];
            for i in 0..5 {
                for j in 0..5 {
                    hy[i] += h[i][j] * y[j];
                }
            }
            let yhy: f64 = (0..5).map(|i| y[i] * hy[i]).sum();
            for i in 0..5 {
                for j in 0..5 {
                    h[i][j] += (1.0 + rho_u * yhy) * rho_u * s[i] * s[j]
                        - rho_u * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        theta = next;
        loss = next_loss;
        grad = next_grad;
    }
    let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    OptimOutcome {
        theta,
        loss,
        grad_norm,
        iterations,
    }
}

// --- pipeline -----------------------------------------------------------------

/// Build the augmented data set for the configured method. Quotes must be
/// repaired and OTM-filtered.
pub fn build_dataset(points: &[MarketPoint], cfg: &CalibrationConfig) -> Result<Vec<AugmentedQuote>> {
    points
        .iter()
        .map(|p| match cfg.method {
            Method::Mid => Ok(AugmentedQuote {
                source: p.clone(),
                points: vec![(p.mid, 1.0)],
                beta_a: 1.0,
                clamped_edge: false,
            }),
            Method::DataAugmentation => {
                let anchor = compute_anchor(p)?;
                augment_quote(p, &anchor, cfg.n_aug)
            }
        })
        .collect()
}

/// Full calibration pipeline: anchor, augmentation, Huber objective, BFGS
/// with random restarts, butterfly diagnostic.
pub fn calibrate_smile(points: &[MarketPoint], cfg: &CalibrationConfig) -> Result<CalibrationReport> {
    if points.is_empty() {
        return Err(SmileError::InsufficientData("no points".into()));
    }
    let init = init_guess(points)?;
    let data = build_dataset(points, cfg)?;
    let obj = ObjectiveData::from_augmented(&data, cfg.huber_delta)?;

    let base_theta = theta_from_params(&init);
    let mut best: Option<OptimOutcome> = None;
    let restarts = cfg.restarts.max(1);
    for restart in 0..restarts {
        let mut theta = base_theta;
        if restart > 0 {
            // 10% multiplicative perturbation, deterministic per restart
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart as u64));
            for t in theta.iter_mut() {
                let factor = 1.0 + 0.1 * (rng.gen::<f64>() * 2.0 - 1.0);
                *t *= factor;
                if *t == 0.0 {
                    *t = 0.01 * (rng.gen::<f64>() * 2.0 - 1.0);
                }
            }
        }
        let outcome = bfgs(&obj, theta, cfg.max_iters, cfg.grad_tolerance);
        let better = match &best {
            Some(b) => outcome.loss < b.loss,
            None => true,
        };
        if better {
            best = Some(outcome);
        }
    }
    let best = best.expect("at least one restart");
    let mut chi_star = params_from_theta(&best.theta);
    // the penalty tolerates a slightly negative minimum variance; project back
    if chi_star.min_variance() < 0.0 {
        chi_star.a -= chi_star.min_variance();
    }
    chi_star.validate()?;

    let mut k_min = f64::INFINITY;
    let mut k_max = f64::NEG_INFINITY;
    let mut residuals = Vec::with_capacity(points.len());
    for p in points {
        k_min = k_min.min(p.k);
        k_max = k_max.max(p.k);
        let data_iv = implied_vol(p.mid, p.forward, p.strike, p.tau, p.is_call)?;
        let fitted_iv = chi_star.iv(p.k, p.tau);
        residuals.push(ResidualRow {
            k: p.k,
            fitted_iv,
            data_iv,
            residual_w: p.tau * data_iv * data_iv - chi_star.w(p.k),
        });
    }
    let (butterfly_min_g, butterfly_ok) =
        butterfly_scan(&chi_star, k_min - 0.5, k_max + 0.5, 201)?;
    Ok(CalibrationReport {
        method: cfg.method,
        chi_star,
        final_loss: best.loss,
        iterations: best.iterations,
        converged: best.grad_norm < cfg.grad_tolerance,
        residuals,
        butterfly_min_g,
        butterfly_ok,
        repaired_count: points.iter().filter(|p| p.bid_repaired).count(),
    })
}

/// Bias, L1 and L2 errors (bps) of a fitted smile against a reference IV
/// curve on a k-grid.
pub fn error_metrics<F: Fn(f64) -> f64>(
    fitted: &SviParams,
    truth_iv: F,
    grid: &[f64],
    tau: f64,
) -> ErrorMetrics {
    let n = grid.len() as f64;
    let mut bias = 0.0;
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for &k in grid {
        let diff = (fitted.iv(k, tau) - truth_iv(k)) * 1e4;
        bias += diff;
        l1 += diff.abs();
        l2 += diff * diff;
    }
    ErrorMetrics {
        bias: bias / n,
        l1: l1 / n,
        l2: (l2 / n).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::{black_price_fwd, BlackInputs};
    use crate::testutil::synthetic_point;

    fn reference_params() -> SviParams {
        SviParams::new(0.02, 0.2, -0.3, 0.05, 0.6).unwrap()
    }

    /// Noiseless points generated from an SVI truth on an n-strike grid.
    fn noiseless_points(truth: &SviParams, n: usize, spread_frac: f64) -> Vec<MarketPoint> {
        let tau = 0.25;
        (0..n)
            .map(|i| {
                let k = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                let sigma = truth.iv(k, tau);
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
                .unwrap();
                let mut p = synthetic_point(k, 0.5, 0.0, 0.0);
                p.bid = eff * (1.0 - spread_frac / 2.0);
                p.ask = eff * (1.0 + spread_frac / 2.0);
                p.mid = eff;
                p.spread = p.ask - p.bid;
                p
            })
            .collect()
    }

    #[test]
    fn huber_branches() {
        assert_eq!(huber(0.004, 0.0), 0.0);
        let r = 0.001;
        assert!((huber(0.004, r) - 0.5 * r * r).abs() < 1e-18);
        let r = 0.01;
        assert!((huber(0.004, r) - 0.004 * (r - 0.002)).abs() < 1e-18);
        // huge delta recovers half the squared error
        let r = 0.3;
        assert!((huber(1e9, r) - 0.5 * r * r).abs() < 1e-15);
    }

    #[test]
    fn objective_zero_at_truth_and_mid_special_case() {
        let truth = reference_params();
        let points = noiseless_points(&truth, 12, 0.0);
        let cfg = CalibrationConfig {
            method: Method::Mid,
            huber_delta: 1e9,
            ..Default::default()
        };
        let data = build_dataset(&points, &cfg).unwrap();
        let loss = objective(&truth, &data, &cfg).unwrap();
        assert!(loss < 1e-12, "loss at truth = {loss}");
        // one quote, one point, small residual: quadratic branch
        let one = &data[..1];
        let shifted = SviParams {
            a: truth.a + 0.001,
            ..truth
        };
        let cfg2 = CalibrationConfig {
            huber_delta: 0.004,
            ..cfg
        };
        let loss_one = objective(&shifted, one, &cfg2).unwrap();
        assert!((loss_one - 0.5 * 0.001f64.powi(2)).abs() < 1e-10);
    }

    #[test]
    fn objective_scales_with_weights() {
        let truth = reference_params();
        let points = noiseless_points(&truth, 8, 0.1);
        let cfg = CalibrationConfig::default();
        let mut data = build_dataset(&points, &cfg).unwrap();
        let shifted = SviParams {
            a: truth.a * 1.3,
            ..truth
        };
        let base = objective(&shifted, &data, &cfg).unwrap();
        for q in &mut data {
            for p in &mut q.points {
                p.1 *= 3.0;
            }
        }
        let scaled = objective(&shifted, &data, &cfg).unwrap();
        assert!((scaled - 3.0 * base).abs() < 1e-12 * scaled.max(1.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let truth = reference_params();
        let points = noiseless_points(&truth, 10, 0.15);
        let cfg = CalibrationConfig::default();
        let data = build_dataset(&points, &cfg).unwrap();
        let obj = ObjectiveData::from_augmented(&data, cfg.huber_delta).unwrap();
        let candidates = [
            SviParams::new(0.03, 0.25, -0.2, 0.0, 0.5).unwrap(),
            SviParams::new(0.01, 0.1, 0.4, -0.1, 0.3).unwrap(),
            SviParams::new(0.05, 0.4, -0.6, 0.2, 0.8).unwrap(),
        ];
        for chi in candidates {
            let theta = theta_from_params(&chi);
            let (_, grad) = obj.loss_grad(&theta);
            for i in 0..5 {
                let h = 1e-6;
                let mut up = theta;
                up[i] += h;
                let mut down = theta;
                down[i] -= h;
                let fd = (obj.loss(&up) - obj.loss(&down)) / (2.0 * h);
                let denom = grad[i].abs().max(1e-8);
                assert!(
                    (fd - grad[i]).abs() / denom < 1e-4,
                    "component {i}: fd {fd} vs analytic {}",
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn init_guess_properties() {
        let truth = reference_params();
        let points = noiseless_points(&truth, 15, 0.0);
        let init = init_guess(&points).unwrap();
        assert!(init.is_valid());
        // initial loss beats a flat-vol guess
        let cfg = CalibrationConfig {
            method: Method::Mid,
            ..Default::default()
        };
        let data = build_dataset(&points, &cfg).unwrap();
        let flat = SviParams::new(truth.w(0.0), 0.0, 0.0, 0.0, 0.1).unwrap();
        assert!(
            objective(&init, &data, &cfg).unwrap() < objective(&flat, &data, &cfg).unwrap()
        );
    }

    #[test]
    fn init_guess_symmetric_smile_has_zero_rho() {
        let truth = SviParams::new(0.02, 0.2, 0.0, 0.0, 0.4).unwrap();
        let points = noiseless_points(&truth, 21, 0.0);
        let init = init_guess(&points).unwrap();
        assert!(init.rho.abs() < 0.1, "rho init = {}", init.rho);
    }

    #[test]
    fn init_guess_flat_data_gives_zero_b() {
        let truth = SviParams::new(0.09, 0.0, 0.0, 0.0, 0.3).unwrap();
        let points = noiseless_points(&truth, 11, 0.0);
        let init = init_guess(&points).unwrap();
        // slopes inherit the root-finder tolerance through the IV round-trip
        assert!(init.b.abs() < 1e-6);
    }

    #[test]
    fn init_guess_needs_five_strikes() {
        let truth = reference_params();
        let points = noiseless_points(&truth, 4, 0.0);
        assert!(matches!(
            init_guess(&points),
            Err(SmileError::InsufficientData(_))
        ));
    }

    #[test]
    fn noiseless_calibration_recovers_curve() {
        let truth = reference_params();
        let points = noiseless_points(&truth, 30, 0.0);
        let cfg = CalibrationConfig {
            method: Method::Mid,
            restarts: 3,
            ..Default::default()
        };
        let report = calibrate_smile(&points, &cfg).unwrap();
        for p in &points {
            let fitted = report.chi_star.iv(p.k, p.tau);
            let exact = truth.iv(p.k, p.tau);
            assert!(
                (fitted - exact).abs() * 1e4 < 1.0,
                "{} bps off at k={}",
                (fitted - exact).abs() * 1e4,
                p.k
            );
        }
        assert!(report.butterfly_ok);
    }

    #[test]
    fn restarts_keep_best_loss() {
        let truth = reference_params();
        let points = noiseless_points(&truth, 12, 0.2);
        let base = CalibrationConfig {
            method: Method::Mid,
            restarts: 1,
            ..Default::default()
        };
        let one = calibrate_smile(&points, &base).unwrap();
        let five = calibrate_smile(
            &points,
            &CalibrationConfig {
                restarts: 5,
                ..base
            },
        )
        .unwrap();
        assert!(five.final_loss <= one.final_loss + 1e-15);
    }

    #[test]
    fn empty_input_is_error() {
        let cfg = CalibrationConfig::default();
        assert!(calibrate_smile(&[], &cfg).is_err());
    }

    #[test]
    fn metrics_identities() {
        let truth = reference_params();
        let tau = 0.25;
        let grid: Vec<f64> = (0..30).map(|i| -1.0 + 2.0 * i as f64 / 29.0).collect();
        let zero = error_metrics(&truth, |k| truth.iv(k, tau), &grid, tau);
        assert!(zero.bias.abs() < 1e-10 && zero.l1 < 1e-10 && zero.l2 < 1e-10);
        // constant +10 bps offset
        let m = error_metrics(&truth, |k| truth.iv(k, tau) - 0.001, &grid, tau);
        assert!((m.bias - 10.0).abs() < 1e-9);
        assert!((m.l1 - 10.0).abs() < 1e-9);
        assert!((m.l2 - 10.0).abs() < 1e-9);
        // L1 <= L2 in general
        let m2 = error_metrics(&truth, |k| truth.iv(k, tau) - 0.001 * k, &grid, tau);
        assert!(m2.l1 <= m2.l2);
    }
}
