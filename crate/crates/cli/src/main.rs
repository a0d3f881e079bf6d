//! `hqam` — hierarchical 2^n-QAM modem simulator.
//!
//! Subcommands: `validate`, `points`, `ber`, `equiv`, `analytic`. Structured
//! input comes from a JSON config file; results go to CSV files, each
//! accompanied by a `<name>.manifest.json` describing the resolved run.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 constraint violation
//! (including detector mismatches in `equiv`), 3 resource cap exceeded.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use hqam::harness::{self, ScanMode, SweepConfig};
use hqam::{oracle, Error as CoreError, GainProfile};

use config::ConfigFile;
use output::{fmt_f64, write_csv, write_manifest};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: String) -> Self {
        Self { code: 1, message }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let code = match err {
            CoreError::NonPositiveGain { .. }
            | CoreError::ConstraintViolation { .. }
            | CoreError::QuadratureBranchEmpty
            | CoreError::InvalidStretch { .. } => 2,
            CoreError::TooLarge { .. } => 3,
            CoreError::LengthMismatch { .. }
            | CoreError::InvalidConfig(_)
            | CoreError::TargetOutOfRange { .. } => 1,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(name = "hqam", version, about = "Hierarchical 2^n-QAM modem simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a gain profile against the layered-formation constraint and
    /// print per-branch margins.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Enumerate every constellation point to CSV; prints Es and PAPR.
    Points {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo BER sweep to CSV (one row per detector, SNR point, bit).
    Ber {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed (decimal or 0x-hex).
        #[arg(long)]
        seed: Option<String>,
        /// Override symbols_per_point.
        #[arg(long)]
        symbols: Option<u64>,
        /// Worker threads (results do not depend on this).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Scan for SIC-vs-ML disagreements; exit 0 only if none exist.
    Equiv {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Analytic per-bit BER curves to CSV; optional stretch-gain report.
    Analytic {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(job()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { config } => cmd_validate(&config),
        Command::Points { config, out } => cmd_points(&config, out),
        Command::Ber {
            config,
            out,
            seed,
            symbols,
            threads,
        } => cmd_ber(&config, out, seed.as_deref(), symbols, threads),
        Command::Equiv { config, threads } => cmd_equiv(&config, threads),
        Command::Analytic { config, out } => cmd_analytic(&config, out),
    }
}

fn print_branch_margins(name: &str, gains: &[f64]) {
    println!("{name} branch: {} sub-channel(s)", gains.len());
    let mut interference = 0.0;
    for (idx, &g) in gains.iter().enumerate() {
        if idx == 0 {
            println!("  #{:<2} gain {:<12} margin -", idx + 1, fmt_f64(g));
        } else {
            println!(
                "  #{:<2} gain {:<12} margin {}",
                idx + 1,
                fmt_f64(g),
                fmt_f64(g - interference)
            );
        }
        interference += g;
    }
}

fn cmd_validate(config_path: &Path) -> Result<(), CliError> {
    let cfg = ConfigFile::load(config_path)?;
    let (i_gains, q_gains) = cfg.raw_gains()?;
    print_branch_margins("I", &i_gains);
    print_branch_margins("Q", &q_gains);
    let profile = GainProfile::new(i_gains, q_gains)?;
    println!(
        "profile valid: 2^{} QAM (k={}, m={}), Es = {}, PAPR = {}",
        profile.n(),
        profile.k(),
        profile.m(),
        fmt_f64(profile.average_symbol_energy()),
        fmt_f64(profile.papr()),
    );
    Ok(())
}

fn profile_json(profile: &GainProfile) -> serde_json::Value {
    json!({ "i_gains": profile.i_gains(), "q_gains": profile.q_gains() })
}

fn cmd_points(config_path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = ConfigFile::load(config_path)?;
    let profile = cfg.profile()?;
    let out = cfg.output(out)?;
    let points = profile.enumerate_points().map_err(CliError::from)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|cp| {
            vec![
                cp.codeword.to_string(),
                fmt_f64(cp.point.i),
                fmt_f64(cp.point.q),
            ]
        })
        .collect();
    write_csv(&out, "codeword,i,q", &rows)?;
    write_manifest(
        &out,
        "points",
        None,
        json!({ "profile": profile_json(&profile) }),
    )?;
    println!(
        "{} points -> {}; Es = {}, PAPR = {}",
        points.len(),
        out.display(),
        fmt_f64(profile.average_symbol_energy()),
        fmt_f64(profile.papr()),
    );
    Ok(())
}

fn cmd_ber(
    config_path: &Path,
    out: Option<PathBuf>,
    seed_flag: Option<&str>,
    symbols_flag: Option<u64>,
    threads: Option<usize>,
) -> Result<(), CliError> {
    let cfg = ConfigFile::load(config_path)?;
    let profile = cfg.profile()?;
    let metric = cfg.metric()?;
    let snr_points_db = cfg.snr_points()?;
    let symbols_per_point = symbols_flag
        .or(cfg.symbols_per_point)
        .ok_or_else(|| CliError::config("symbols_per_point not set".into()))?;
    let seed = cfg.seed(seed_flag)?;
    let detectors = cfg.detectors()?;
    let min_errors = cfg.min_errors();
    let out = cfg.output(out)?;

    let sweep = SweepConfig {
        profile: profile.clone(),
        metric,
        snr_points_db,
        symbols_per_point,
        seed,
        detectors,
        min_errors,
    };
    let records = in_pool(threads, || harness::run_sweep(&sweep))?.map_err(CliError::from)?;

    // analytic curve per SNR point, shared across detectors
    let n = profile.n();
    let mut rows = Vec::with_capacity(records.len() * n);
    let mut analytic_cache: Vec<(f64, oracle::BerVector)> = Vec::new();
    for record in &records {
        let analytic = match analytic_cache
            .iter()
            .find(|(sigma, _)| *sigma == record.sigma_branch)
        {
            Some((_, v)) => v.clone(),
            None => {
                let v = oracle::analytic_bit_ber(&profile, record.sigma_branch);
                analytic_cache.push((record.sigma_branch, v.clone()));
                v
            }
        };
        for j in 1..=n {
            rows.push(vec![
                record.detector.to_string(),
                fmt_f64(record.snr_db),
                j.to_string(),
                record.bit_errors[j - 1].to_string(),
                record.trials.to_string(),
                fmt_f64(record.ber[j - 1]),
                fmt_f64(record.ci_lo[j - 1]),
                fmt_f64(record.ci_hi[j - 1]),
                fmt_f64(analytic.bit(j)),
            ]);
        }
    }
    write_csv(
        &out,
        "detector,snr_db,bit_index,errors,trials,ber,ci_lo,ci_hi,analytic_ber",
        &rows,
    )?;
    write_manifest(
        &out,
        "ber",
        Some(seed),
        json!({
            "profile": profile_json(&profile),
            "snr": { "metric": sweep.metric, "points_db": sweep.snr_points_db },
            "symbols_per_point": sweep.symbols_per_point,
            "seed": seed,
            "detectors": sweep.detectors,
            "min_errors": sweep.min_errors,
        }),
    )?;
    println!("{} records -> {}", records.len(), out.display());
    Ok(())
}

fn cmd_equiv(config_path: &Path, threads: Option<usize>) -> Result<(), CliError> {
    let cfg = ConfigFile::load(config_path)?;
    let profile = cfg.profile()?;
    let seed = cfg.seed(None)?;
    let scan = cfg.scan.as_ref();
    let mode_name = scan
        .and_then(|s| s.mode.as_deref())
        .unwrap_or("grid")
        .to_owned();
    let mode = match mode_name.as_str() {
        "grid" => ScanMode::Grid {
            per_axis: scan.and_then(|s| s.per_axis).unwrap_or(401),
        },
        "random" => ScanMode::Random {
            samples: scan.and_then(|s| s.samples).unwrap_or(1_000_000),
        },
        other => {
            return Err(CliError::config(format!(
                "unknown scan mode {other:?} (grid | random)"
            )))
        }
    };
    let mismatches =
        in_pool(threads, || harness::equivalence_scan(&profile, mode, seed))?
            .map_err(CliError::from)?;
    let mut stdout = std::io::stdout().lock();
    output::print_mismatches(&mut stdout, &mismatches, 5)
        .map_err(|e| CliError::config(e.to_string()))?;
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(CliError {
            code: 2,
            message: format!(
                "detectors disagree on {} sample(s); the gain profile cannot be \
                 uniquely layered",
                mismatches.len()
            ),
        })
    }
}

fn cmd_analytic(config_path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = ConfigFile::load(config_path)?;
    let profile = cfg.profile()?;
    let metric = cfg.metric()?;
    let points = cfg.snr_points()?;
    let out = cfg.output(out)?;

    let n = profile.n();
    let mut rows = Vec::with_capacity(points.len() * n);
    for &db in &points {
        let sigma = harness::sigma_for(&profile, metric, db);
        let ber = oracle::analytic_bit_ber(&profile, sigma);
        for j in 1..=n {
            rows.push(vec![fmt_f64(db), j.to_string(), fmt_f64(ber.bit(j))]);
        }
    }
    write_csv(&out, "snr_db,bit_index,analytic_ber", &rows)?;

    let mut compare_json = serde_json::Value::Null;
    if let Some(cmp) = cfg.compare {
        let gap = harness::stretch_gain_at_ber(
            &profile,
            cmp.stretch_r,
            cmp.target_ber,
            cmp.bit_index,
            metric,
        )
        .map_err(CliError::from)?;
        println!(
            "stretch gain (r = {}): bit {} reaches BER {} at {} dB less than unstretched",
            fmt_f64(cmp.stretch_r),
            cmp.bit_index,
            fmt_f64(cmp.target_ber),
            fmt_f64(gap),
        );
        compare_json = json!({
            "stretch_r": cmp.stretch_r,
            "target_ber": cmp.target_ber,
            "bit_index": cmp.bit_index,
            "gain_db": gap,
        });
    }
    write_manifest(
        &out,
        "analytic",
        None,
        json!({
            "profile": profile_json(&profile),
            "snr": { "metric": metric, "points_db": points },
            "compare": compare_json,
        }),
    )?;
    println!("{} rows -> {}", rows.len(), out.display());
    Ok(())
}
