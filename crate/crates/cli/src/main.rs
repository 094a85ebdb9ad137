//! Command-line front end for the smile-calibration library.
//!
//! Subcommands:
//! * `calibrate` — fit an SVI smile to a quote CSV, write a report JSON and a
//!   plot-ready smile CSV
//! * `simulate`  — run the seeded mid vs data-augmentation experiment on one
//!   of the three synthetic use cases
//! * `iv`        — single-quote implied-volatility utility
//! * `diagnose`  — scan the anchor applicability condition |rho| >= 1/sqrt(12)
//!
//! Exit codes: 0 success, 1 input error, 2 non-convergence (best-effort
//! output still written).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use smilecal::anchor::{compute_anchor, rho_condition_report};
use smilecal::calibration::{calibrate_smile, CalibrationConfig, Method};
use smilecal::market_data::{filter_otm, normalize_quote, read_quotes_csv, repair_bid, MarketPoint};
use smilecal::pricing::implied_vol;
use smilecal::synthetic::{run_experiment, UseCaseSpec};
use smilecal::SmileError;

#[derive(Parser)]
#[command(
    name = "smilecal",
    version,
    about = "Implied-volatility smile calibration for inverse-quoted crypto options"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate an SVI smile from a quote CSV.
    Calibrate(CalibrateArgs),
    /// Run the synthetic mid vs data-augmentation experiment.
    Simulate(SimulateArgs),
    /// Invert one Black-76 forward price to an implied volatility.
    Iv(IvArgs),
    /// Scan the anchor applicability condition over the smile.
    Diagnose(DiagnoseArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodFlag {
    Mid,
    Aug,
}

impl From<MethodFlag> for Method {
    fn from(m: MethodFlag) -> Method {
        match m {
            MethodFlag::Mid => Method::Mid,
            MethodFlag::Aug => Method::DataAugmentation,
        }
    }
}

#[derive(Args)]
struct CalibrateArgs {
    /// Quote CSV: type,strike,expiry,bid_ticks,ask_ticks,tick_size,spot,future,discount
    #[arg(long)]
    input: PathBuf,
    /// Output prefix; writes <output>.json and <output>.csv
    #[arg(long, default_value = "smile")]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "aug")]
    method: MethodFlag,
    /// Imputed points per quote for the augmentation method.
    #[arg(long, default_value_t = 100)]
    n_aug: usize,
    /// Seed for the calibration restarts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Valuation timestamp (ISO-8601); defaults to the current time.
    #[arg(long)]
    now: Option<DateTime<Utc>>,
    /// Print the report JSON on stdout instead of a human summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Synthetic use case: 1 (30 strikes, 2 ticks), 2 (20, 4, 15% spurious),
    /// 3 (10, 10, 30% spurious).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    use_case: u8,
    /// Number of scenarios (at least 30).
    #[arg(long, default_value_t = 200)]
    scenarios: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Imputed points per quote for the augmentation method.
    #[arg(long, default_value_t = 100)]
    n_aug: usize,
    /// Optional path for the report JSON.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print the report JSON on stdout instead of the summary table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct IvArgs {
    /// Option price in forward units.
    #[arg(long)]
    price: f64,
    #[arg(long, default_value_t = 1.0)]
    forward: f64,
    #[arg(long)]
    strike: f64,
    /// Time to expiry in years.
    #[arg(long)]
    tau: f64,
    /// Invert a put instead of a call.
    #[arg(long)]
    put: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Time to expiry in years.
    #[arg(long)]
    tau: f64,
    /// Tick size in forward units.
    #[arg(long, default_value_t = 5e-4)]
    tick: f64,
    /// Spread width in ticks.
    #[arg(long, default_value_t = 1)]
    spread_ticks: u32,
    /// Minimum option price in ticks used for the worst-case volatility.
    #[arg(long, default_value_t = 1)]
    n_ticks: u32,
    /// Optional path for the k,sigma_bar,rho CSV.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    // bad arguments are input errors: exit 1, not clap's default 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Calibrate(args) => cmd_calibrate(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Iv(args) => cmd_iv(&args),
        Command::Diagnose(args) => cmd_diagnose(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Columns of the plot-ready smile CSV. IV fields are empty when the
/// corresponding price cannot be inverted (for example a zero bid).
fn smile_csv(points: &[MarketPoint], fitted_iv: impl Fn(f64) -> f64) -> String {
    let inv = |price: f64, p: &MarketPoint| -> String {
        implied_vol(price, p.forward, p.strike, p.tau, p.is_call)
            .map(|v| v.to_string())
            .unwrap_or_default()
    };
    let mut out = String::from("k,bid_iv,ask_iv,mid_iv,anchor_iv,fitted_iv\n");
    for p in points {
        let anchor_iv = compute_anchor(p)
            .map(|a| inv(a.anchor, p))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.k,
            inv(p.bid, p),
            inv(p.ask, p),
            inv(p.mid, p),
            anchor_iv,
            fitted_iv(p.k),
        ));
    }
    out
}

fn cmd_calibrate(args: &CalibrateArgs) -> Result<ExitCode, SmileError> {
    let file = fs::File::open(&args.input).map_err(|e| {
        SmileError::InvalidInput(format!("cannot open {}: {e}", args.input.display()))
    })?;
    let quotes = read_quotes_csv(file)?;
    if quotes.is_empty() {
        return Err(SmileError::InsufficientData("no quotes in input".into()));
    }
    let now = args.now.unwrap_or_else(Utc::now);

    // Quotes without an ask carry no usable price; drop them but keep count.
    let mut points = Vec::new();
    let mut dropped = 0usize;
    for (i, q) in quotes.iter().enumerate() {
        match normalize_quote(q, now) {
            Ok(p) => points.push(repair_bid(p)?),
            Err(SmileError::QuoteDropped(_)) => dropped += 1,
            // +2: one for the header line, one for 1-based numbering
            Err(e) => {
                return Err(SmileError::InvalidInput(format!(
                    "quote at line {}: {e}",
                    i + 2
                )))
            }
        }
    }
    let points = filter_otm(points);
    if points.is_empty() {
        return Err(SmileError::InsufficientData(format!(
            "no usable OTM quotes ({dropped} without an ask)"
        )));
    }

    let cfg = CalibrationConfig {
        method: args.method.into(),
        n_aug: args.n_aug,
        seed: args.seed,
        ..Default::default()
    };
    let report = calibrate_smile(&points, &cfg)?;

    let json_path = args.output.with_extension("json");
    let csv_path = args.output.with_extension("csv");
    let report_json = json!({
        "report": &report,
        "n_quotes": quotes.len(),
        "n_points": points.len(),
        "dropped_no_ask": dropped,
        "repaired_count": report.repaired_count,
        "method": &report.method,
        "converged": report.converged,
    });
    fs::write(&json_path, serde_json::to_string_pretty(&report_json).expect("report serializes"))?;
    let chi = report.chi_star;
    fs::write(&csv_path, smile_csv(&points, |k| chi.iv(k, points[0].tau)))?;

    if args.json {
        println!("{report_json}");
    } else {
        println!(
            "fitted SVI: a={:.6} b={:.6} rho={:.4} m={:.4} sigma={:.4}",
            chi.a, chi.b, chi.rho, chi.m, chi.sigma
        );
        println!(
            "{} points ({} repaired bids, {} dropped without ask), loss {:.3e}, {} iterations, butterfly {}",
            points.len(),
            report.repaired_count,
            dropped,
            report.final_loss,
            report.iterations,
            if report.butterfly_ok { "clean" } else { "VIOLATED" },
        );
        println!("wrote {} and {}", json_path.display(), csv_path.display());
    }
    Ok(if report.converged {
        ExitCode::SUCCESS
    } else {
        eprintln!("warning: gradient tolerance not reached; best-effort fit written");
        ExitCode::from(2)
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode, SmileError> {
    let spec = UseCaseSpec::use_case(args.use_case)
        .ok_or_else(|| SmileError::InvalidInput(format!("unknown use case {}", args.use_case)))?;
    let cfg = CalibrationConfig {
        n_aug: args.n_aug,
        seed: args.seed,
        ..Default::default()
    };
    let report = run_experiment(&spec, args.scenarios, args.seed, &cfg)?;
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = &args.output {
        fs::write(path, &report_json)?;
    }
    if args.json {
        println!("{report_json}");
    } else {
        print!("{}", report.to_table());
        let red = |mid: f64, aug: f64| 100.0 * (1.0 - aug / mid);
        println!(
            "L1 reduction {:.1}%, L2 reduction {:.1}%",
            red(report.mid.l1_mean, report.augmentation.l1_mean),
            red(report.mid.l2_mean, report.augmentation.l2_mean),
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_iv(args: &IvArgs) -> Result<ExitCode, SmileError> {
    let iv = implied_vol(args.price, args.forward, args.strike, args.tau, !args.put)?;
    if args.json {
        println!(
            "{}",
            json!({
                "implied_vol": iv,
                "price": args.price,
                "forward": args.forward,
                "strike": args.strike,
                "tau": args.tau,
                "type": if args.put { "put" } else { "call" },
            })
        );
    } else {
        println!("{iv}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<ExitCode, SmileError> {
    let report = rho_condition_report(args.tau, args.tick, args.spread_ticks, args.n_ticks)?;
    if let Some(path) = &args.output {
        fs::write(path, report.to_csv())?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!(
            "tau = {}, tick = {}, spread = {} tick(s), minimum price = {} tick(s)",
            report.tau, args.tick, report.spread_ticks, report.n_ticks
        );
        println!("min |rho| over the smile: {:.4}", report.min_abs_rho);
        println!(
            "condition {}",
            if report.condition_met { "met" } else { "NOT met" }
        );
    }
    Ok(ExitCode::SUCCESS)
}
