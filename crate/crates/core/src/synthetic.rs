//! Synthetic quote scenarios and the experiment harness.
//!
//! Scenarios follow the round-off noise model: the efficient price comes from
//! a reference SVI smile, the mid is the efficient price plus a uniform noise
//! of spread width, and bid/ask are snapped outward to the tick grid. A
//! configurable fraction of strikes gets a spurious bid (missing or one tick)
//! to mimic illiquid books. The harness runs the mid and data-augmentation
//! calibrations over many seeded scenarios and aggregates error statistics.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::calibration::{calibrate_smile, error_metrics, CalibrationConfig, Method};
use crate::error::{Result, SmileError};
use crate::market_data::{filter_otm, normalize_quote, repair_bid, OptionType, Quote, SECONDS_PER_YEAR};
use crate::pricing::{black_price_fwd, BlackInputs};
use crate::svi::SviParams;

/// Reference smile used throughout the synthetic experiments.
pub fn reference_svi() -> SviParams {
    SviParams {
        a: 0.02,
        b: 0.2,
        rho: -0.3,
        m: 0.05,
        sigma: 0.6,
    }
}

/// One synthetic market configuration.
#[derive(Debug, Clone, Serialize)]
pub struct UseCaseSpec {
    pub n_strikes: usize,
    pub spread_ticks: u32,
    pub spurious_bid_fraction: f64,
    /// Tick in forward units (5 bps of the forward by default).
    pub tick_fwd: f64,
    pub tau: f64,
    pub truth: SviParams,
    pub k_range: (f64, f64),
}

impl UseCaseSpec {
    fn with_market(n_strikes: usize, spread_ticks: u32, spurious_bid_fraction: f64) -> Self {
        let tau = 0.25f64;
        let k_max = 2.0 * tau.sqrt();
        UseCaseSpec {
            n_strikes,
            spread_ticks,
            spurious_bid_fraction,
            tick_fwd: 5e-4,
            tau,
            truth: reference_svi(),
            k_range: (-k_max, k_max),
        }
    }

    /// The three benchmark markets: liquid, poor liquidity, liquidity crisis.
    pub fn use_case(n: u8) -> Option<Self> {
        match n {
            1 => Some(Self::with_market(30, 2, 0.0)),
            2 => Some(Self::with_market(20, 4, 0.15)),
            3 => Some(Self::with_market(10, 10, 0.30)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_strikes < 5
            || self.spread_ticks == 0
            || !(0.0..=1.0).contains(&self.spurious_bid_fraction)
            || self.tick_fwd <= 0.0
            || self.tau <= 0.0
            || self.k_range.0 >= self.k_range.1
        {
            return Err(SmileError::InvalidInput(format!("bad use-case spec: {self:?}")));
        }
        self.truth.validate()
    }

    pub fn k_grid(&self) -> Vec<f64> {
        (0..self.n_strikes)
            .map(|i| {
                self.k_range.0
                    + (self.k_range.1 - self.k_range.0) * i as f64 / (self.n_strikes - 1) as f64
            })
            .collect()
    }
}

/// A generated strike with its latent (pre-snap) state, for diagnostics.
#[derive(Debug, Clone)]
pub struct GeneratedStrike {
    pub quote: Quote,
    pub k: f64,
    pub eff_price: f64,
    /// Efficient price plus the uniform noise, before tick snapping.
    pub model_mid: f64,
}

pub fn scenario_epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()
}

fn scenario_expiry(tau: f64) -> DateTime<Utc> {
    scenario_epoch() + Duration::seconds((tau * SECONDS_PER_YEAR).round() as i64)
}

fn generate_with_rng(spec: &UseCaseSpec, rng: &mut ChaCha8Rng) -> Result<Vec<GeneratedStrike>> {
    spec.validate()?;
    let forward = 1.0;
    let expiry = scenario_expiry(spec.tau);
    let spread = spec.spread_ticks as f64 * spec.tick_fwd;
    let grid = spec.k_grid();
    let effs: Vec<f64> = grid
        .iter()
        .map(|&k| {
            black_price_fwd(&BlackInputs {
                forward,
                strike: forward * k.exp(),
                tau: spec.tau,
                sigma: spec.truth.iv(k, spec.tau),
                is_call: k >= 0.0,
            })
        })
        .collect::<Result<_>>()?;
    // Spurious (0/1-tick) bids hit the cheapest quotes: in the order book they
    // are a deep-OTM phenomenon, so the corrupted share goes to the strikes
    // with the lowest efficient prices.
    let n_spurious = (spec.spurious_bid_fraction * spec.n_strikes as f64).round() as usize;
    let mut by_price: Vec<usize> = (0..spec.n_strikes).collect();
    by_price.sort_by(|&i, &j| effs[i].total_cmp(&effs[j]));
    let spurious: Vec<bool> = {
        let mut flags = vec![false; spec.n_strikes];
        for &i in by_price.iter().take(n_spurious) {
            flags[i] = true;
        }
        flags
    };
    grid.into_iter()
        .enumerate()
        .map(|(i, k)| {
            let is_call = k >= 0.0;
            let strike = forward * k.exp();
            let eff = effs[i];
            // fixed draw order per strike keeps streams aligned
            let u: f64 = rng.gen::<f64>() - 0.5;
            let one_tick_draw: f64 = rng.gen();
            let mid = eff + spread * u;
            // snap outward so the quoted spread never understates the model one
            let bid_ticks = ((mid - spread / 2.0) / spec.tick_fwd).floor().max(0.0) as u64;
            let ask_ticks = ((mid + spread / 2.0) / spec.tick_fwd).ceil().max(1.0) as u64;
            let mut bid = if bid_ticks == 0 { None } else { Some(bid_ticks) };
            if spurious[i] {
                bid = if one_tick_draw < 0.5 { None } else { Some(1) };
            }
            Ok(GeneratedStrike {
                quote: Quote {
                    option_type: if is_call { OptionType::Call } else { OptionType::Put },
                    strike,
                    expiry,
                    bid_ticks: bid,
                    ask_ticks: Some(ask_ticks),
                    tick_size: spec.tick_fwd,
                    spot: 1.0,
                    future: forward,
                    discount: 1.0,
                },
                k,
                eff_price: eff,
                model_mid: mid,
            })
        })
        .collect()
}

/// Generate one scenario with the latent prices kept for diagnostics.
pub fn generate_scenario_detailed(spec: &UseCaseSpec, seed: u64) -> Result<Vec<GeneratedStrike>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with_rng(spec, &mut rng)
}

/// Generate one scenario of quotes; deterministic in the seed.
pub fn generate_scenario(spec: &UseCaseSpec, seed: u64) -> Result<Vec<Quote>> {
    Ok(generate_scenario_detailed(spec, seed)?
        .into_iter()
        .map(|g| g.quote)
        .collect())
}

/// Per-method aggregate over the scenarios: means and 95% half-widths in bps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MethodStats {
    pub bias_mean: f64,
    pub bias_half_width: f64,
    pub l1_mean: f64,
    pub l1_half_width: f64,
    pub l2_mean: f64,
    pub l2_half_width: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub spec: UseCaseSpec,
    pub n_scenarios: usize,
    pub seed: u64,
    pub mid: MethodStats,
    pub augmentation: MethodStats,
    /// Scenarios where a calibration failed; excluded from the averages.
    pub failed_scenarios: usize,
}

impl ExperimentReport {
    /// Human-readable summary table.
    pub fn to_table(&self) -> String {
        let row = |name: &str, s: &MethodStats| {
            format!(
                "{name:<26} {:>8.2} (+-{:>5.2})  {:>8.2} (+-{:>5.2})  {:>8.2} (+-{:>5.2})\n",
                s.bias_mean, s.bias_half_width, s.l1_mean, s.l1_half_width, s.l2_mean, s.l2_half_width
            )
        };
        let mut out = String::new();
        out.push_str(&format!(
            "{} scenarios, {} strikes, spread {} ticks, {:.0}% spurious bids (seed {})\n",
            self.n_scenarios,
            self.spec.n_strikes,
            self.spec.spread_ticks,
            self.spec.spurious_bid_fraction * 100.0,
            self.seed
        ));
        out.push_str(&format!(
            "{:<26} {:^18} {:^18} {:^18}\n",
            "method", "bias (bps)", "L1 (bps)", "L2 (bps)"
        ));
        out.push_str(&row("mid", &self.mid));
        out.push_str(&row("data augmentation", &self.augmentation));
        if self.failed_scenarios > 0 {
            out.push_str(&format!("failed scenarios: {}\n", self.failed_scenarios));
        }
        out
    }
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn stats_from(samples: &[(f64, f64, f64)]) -> MethodStats {
    let n = samples.len() as f64;
    let col = |f: fn(&(f64, f64, f64)) -> f64| {
        let xs: Vec<f64> = samples.iter().map(f).collect();
        let (m, s) = mean_std(&xs);
        (m, 1.96 * s / n.sqrt())
    };
    let (bias_mean, bias_half_width) = col(|t| t.0);
    let (l1_mean, l1_half_width) = col(|t| t.1);
    let (l2_mean, l2_half_width) = col(|t| t.2);
    MethodStats {
        bias_mean,
        bias_half_width,
        l1_mean,
        l1_half_width,
        l2_mean,
        l2_half_width,
    }
}

/// Run the mid vs data-augmentation comparison over seeded scenarios.
/// Scenario `i` uses stream `i` of the counter-based generator, so the report
/// is reproducible from the seed alone.
pub fn run_experiment(
    spec: &UseCaseSpec,
    n_scenarios: usize,
    seed: u64,
    cfg: &CalibrationConfig,
) -> Result<ExperimentReport> {
    if n_scenarios < 30 {
        return Err(SmileError::InvalidInput(format!(
            "need at least 30 scenarios for the confidence intervals, got {n_scenarios}"
        )));
    }
    spec.validate()?;
    let grid = spec.k_grid();
    let truth = spec.truth;
    let truth_iv = |k: f64| truth.iv(k, spec.tau);
    let now = scenario_epoch();
    let mut mid_samples = Vec::with_capacity(n_scenarios);
    let mut aug_samples = Vec::with_capacity(n_scenarios);
    let mut failed = 0usize;
    for i in 0..n_scenarios {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let quotes = generate_with_rng(spec, &mut rng)?;
        let mut points = Vec::with_capacity(quotes.len());
        for g in &quotes {
            let p = normalize_quote(&g.quote, now)?;
            points.push(repair_bid(p)?);
        }
        let points = filter_otm(points);
        let mid_cfg = CalibrationConfig {
            method: Method::Mid,
            ..*cfg
        };
        let aug_cfg = CalibrationConfig {
            method: Method::DataAugmentation,
            ..*cfg
        };
        let mid_fit = calibrate_smile(&points, &mid_cfg);
        let aug_fit = calibrate_smile(&points, &aug_cfg);
        match (mid_fit, aug_fit) {
            (Ok(m), Ok(a)) => {
                let em = error_metrics(&m.chi_star, truth_iv, &grid, spec.tau);
                let ea = error_metrics(&a.chi_star, truth_iv, &grid, spec.tau);
                mid_samples.push((em.bias, em.l1, em.l2));
                aug_samples.push((ea.bias, ea.l1, ea.l2));
            }
            _ => failed += 1,
        }
    }
    if mid_samples.len() < 2 {
        return Err(SmileError::InsufficientData(
            "too few successful scenarios".into(),
        ));
    }
    Ok(ExperimentReport {
        spec: spec.clone(),
        n_scenarios,
        seed,
        mid: stats_from(&mid_samples),
        augmentation: stats_from(&aug_samples),
        failed_scenarios: failed,
    })
}

// --- round-off uniformity ------------------------------------------------------

/// One-sample Kolmogorov-Smirnov statistic against U[0,1].
pub fn ks_statistic_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let upper = (i as f64 + 1.0) / n - x;
        let lower = x - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    d
}

/// Asymptotic Kolmogorov p-value with the small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    let mut p = 0.0;
    for j in 1..=100 {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        p += sign * (-2.0 * (j as f64 * lambda).powi(2)).exp();
    }
    (2.0 * p).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RoundoffVerdict {
    pub delta: f64,
    pub n_draws: usize,
    pub ks_stat: f64,
    pub p_value: f64,
    pub accepted: bool,
    /// Empirical correlation between the draw and its fractional part.
    pub correlation: f64,
}

/// Check that the fractional parts {Y/delta} of a smooth variable look
/// uniform: the round-off error decouples from the value as delta shrinks.
pub fn roundoff_uniformity_check(delta: f64, n_draws: usize, seed: u64) -> Result<RoundoffVerdict> {
    if delta <= 0.0 || n_draws < 100 {
        return Err(SmileError::InvalidInput(format!(
            "need delta > 0 and enough draws, got delta={delta}, n={n_draws}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fracs = Vec::with_capacity(n_draws);
    let mut ys = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        let y: f64 = rng.sample(StandardNormal);
        let scaled = y / delta;
        fracs.push(scaled - scaled.floor());
        ys.push(y);
    }
    let (my, sy) = mean_std(&ys);
    let (mf, sf) = mean_std(&fracs);
    let mut cov = 0.0;
    for i in 0..n_draws {
        cov += (ys[i] - my) * (fracs[i] - mf);
    }
    cov /= (n_draws - 1) as f64;
    let correlation = cov / (sy * sf);
    let ks_stat = ks_statistic_uniform(&mut fracs);
    let p_value = ks_p_value(ks_stat, n_draws);
    Ok(RoundoffVerdict {
        delta,
        n_draws,
        ks_stat,
        p_value,
        accepted: p_value > 0.01,
        correlation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table4_use_cases() {
        let uc1 = UseCaseSpec::use_case(1).unwrap();
        assert_eq!((uc1.n_strikes, uc1.spread_ticks), (30, 2));
        assert_eq!(uc1.spurious_bid_fraction, 0.0);
        let uc2 = UseCaseSpec::use_case(2).unwrap();
        assert_eq!((uc2.n_strikes, uc2.spread_ticks), (20, 4));
        assert_eq!(uc2.spurious_bid_fraction, 0.15);
        let uc3 = UseCaseSpec::use_case(3).unwrap();
        assert_eq!((uc3.n_strikes, uc3.spread_ticks), (10, 10));
        assert_eq!(uc3.spurious_bid_fraction, 0.30);
        assert!(UseCaseSpec::use_case(4).is_none());
    }

    #[test]
    fn scenario_is_deterministic() {
        let spec = UseCaseSpec::use_case(2).unwrap();
        let a = generate_scenario(&spec, 7).unwrap();
        let b = generate_scenario(&spec, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(&spec, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn snapped_quotes_bracket_the_model_mid() {
        let spec = UseCaseSpec::use_case(1).unwrap();
        for seed in 0..20 {
            for g in generate_scenario_detailed(&spec, seed).unwrap() {
                let ask = g.quote.ask_ticks.unwrap() as f64 * spec.tick_fwd;
                let bid = g.quote.bid_ticks.unwrap_or(0) as f64 * spec.tick_fwd;
                assert!(bid <= g.model_mid && g.model_mid <= ask);
            }
        }
    }

    #[test]
    fn model_mid_noise_is_uniform() {
        let spec = UseCaseSpec::use_case(1).unwrap();
        let spread = spec.spread_ticks as f64 * spec.tick_fwd;
        let mut u = Vec::new();
        let mut seed = 0;
        while u.len() < 100_000 {
            for g in generate_scenario_detailed(&spec, seed).unwrap() {
                u.push((g.model_mid - g.eff_price) / spread + 0.5);
            }
            seed += 1;
        }
        let d = ks_statistic_uniform(&mut u);
        let p = ks_p_value(d, u.len());
        assert!(p > 0.01, "KS p = {p}");
    }

    #[test]
    fn spurious_bids_hit_cheapest_strikes() {
        let spec = UseCaseSpec::use_case(2).unwrap();
        // 15% of 20 strikes = 3 corrupted quotes per scenario
        for seed in 0..50 {
            let gen = generate_scenario_detailed(&spec, seed).unwrap();
            let mut by_price: Vec<&GeneratedStrike> = gen.iter().collect();
            by_price.sort_by(|a, b| a.eff_price.total_cmp(&b.eff_price));
            for g in by_price.iter().take(3) {
                assert!(matches!(g.quote.bid_ticks, None | Some(1)));
            }
            let corrupted = gen
                .iter()
                .filter(|g| matches!(g.quote.bid_ticks, None | Some(1)))
                .count();
            // forced corruption plus any naturally tiny wing bids
            assert!((3..=8).contains(&corrupted), "corrupted = {corrupted}");
        }
    }

    #[test]
    fn roundoff_small_delta_accepts() {
        let v = roundoff_uniformity_check(1e-3, 100_000, 42).unwrap();
        assert!(v.accepted, "p = {}", v.p_value);
        assert!(v.correlation.abs() < 0.02);
    }

    #[test]
    fn roundoff_large_delta_rejects() {
        let v = roundoff_uniformity_check(5.0, 100_000, 42).unwrap();
        assert!(!v.accepted, "p = {}", v.p_value);
    }

    #[test]
    fn correlation_shrinks_with_delta() {
        let coarse = roundoff_uniformity_check(0.5, 100_000, 7).unwrap();
        let fine = roundoff_uniformity_check(1e-4, 100_000, 7).unwrap();
        assert!(fine.correlation.abs() <= coarse.correlation.abs() + 0.01);
        assert!(fine.correlation.abs() < 0.01);
    }

    #[test]
    fn experiment_guards() {
        let spec = UseCaseSpec::use_case(1).unwrap();
        let cfg = CalibrationConfig::default();
        assert!(run_experiment(&spec, 10, 1, &cfg).is_err());
    }

    #[test]
    fn ks_helpers_sane() {
        // exact uniform grid has tiny statistic
        let mut grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic_uniform(&mut grid);
        assert!(d < 0.002);
        assert!(ks_p_value(d, 1000) > 0.99);
        // constant sample is maximally non-uniform
        let mut constant = vec![0.5; 1000];
        let d = ks_statistic_uniform(&mut constant);
        assert!(d >= 0.5);
        assert!(ks_p_value(d, 1000) < 1e-10);
    }
}
