//! Monte Carlo BER sweeps, detector-equivalence scans, and the analytic
//! stretch-gain measurement.
//!
//! All randomness is addressed by (seed, substream, draw index): every SNR
//! point owns one substream and every symbol a fixed range of draws, so the
//! same configuration produces identical results for any worker count or
//! batch partitioning. Detectors under comparison always see the same noisy
//! samples.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelStream, NoiseSpec};
use crate::constellation::GainProfile;
use crate::error::{Error, Result};
use crate::modem::{self, CodeWord, IqSample};
use crate::oracle::{self, MlDetector};

/// Random draws consumed per simulated symbol: one for the codeword and two
/// for the Gaussian pair.
const DRAWS_PER_SYMBOL: u64 = 3;

/// Work unit handed to one rayon task. Internal tuning knob with no effect
/// on results.
const WORK_CHUNK: u64 = 1 << 12;

/// Fixed cadence at which the early-stop rule is evaluated. Part of the
/// stop rule's definition, not a tuning knob: results with early stopping
/// enabled are reproducible for any worker count.
const STOP_CHECK_INTERVAL: u64 = 1 << 16;

/// Detector selection for simulation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    /// Successive interference cancellation (the SAR-ADC detector).
    Sic,
    /// Table-lookup maximum likelihood.
    Ml,
}

impl std::fmt::Display for Detector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Detector::Sic => write!(f, "sic"),
            Detector::Ml => write!(f, "ml"),
        }
    }
}

/// How the per-point dB values map to a noise level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrMetric {
    /// Symbol energy over total noise power.
    EsN0,
    /// Bit energy over total noise power (`Eb = Es / n`).
    EbN0,
    /// Direct noise attenuation: `sigma_branch = 10^(-dB/20)`, independent
    /// of the profile.
    FixedSigma,
}

/// Per-branch sigma for one sweep point under the chosen metric.
pub fn sigma_for(profile: &GainProfile, metric: SnrMetric, snr_db: f64) -> f64 {
    match metric {
        SnrMetric::EsN0 => channel::sigma_from_esn0(profile, snr_db),
        SnrMetric::EbN0 => channel::sigma_from_ebn0(profile, snr_db),
        SnrMetric::FixedSigma => 10f64.powf(-snr_db / 20.0),
    }
}

/// Full description of a BER sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub profile: GainProfile,
    pub metric: SnrMetric,
    pub snr_points_db: Vec<f64>,
    pub symbols_per_point: u64,
    pub seed: u64,
    pub detectors: Vec<Detector>,
    /// Stop a point once every bit has at least this many errors. `None`
    /// runs the full symbol count.
    pub min_errors: Option<u64>,
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.detectors.is_empty() {
            return Err(Error::InvalidConfig("detector set is empty".into()));
        }
        if self.snr_points_db.is_empty() {
            return Err(Error::InvalidConfig("SNR point list is empty".into()));
        }
        if self.symbols_per_point == 0 {
            return Err(Error::InvalidConfig("symbols_per_point must be >= 1".into()));
        }
        Ok(())
    }
}

/// Simulation outcome for one (SNR point, detector) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub detector: Detector,
    pub snr_db: f64,
    pub sigma_branch: f64,
    pub trials: u64,
    /// Errors per codeword bit, index 0 holding bit 1.
    pub bit_errors: Vec<u64>,
    /// Per-bit BER point estimates.
    pub ber: Vec<f64>,
    /// Per-bit 95% confidence interval bounds (Wilson score).
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
}

/// Wilson score interval at 95% confidence.
fn wilson_ci(errors: u64, trials: u64) -> (f64, f64) {
    const Z: f64 = 1.959963984540054;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (Z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // at the extremes center == half exactly; pin the bound to the endpoint
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

fn chunk_ranges(range: Range<u64>, chunk: u64) -> Vec<Range<u64>> {
    let mut out = Vec::new();
    let mut start = range.start;
    while start < range.end {
        let end = (start + chunk).min(range.end);
        out.push(start..end);
        start = end;
    }
    out
}

/// Per-detector bit-error counts over one symbol range. The same noisy
/// sample feeds every requested detector.
fn run_batch(
    profile: &GainProfile,
    ml: Option<&MlDetector>,
    spec: &NoiseSpec,
    stream_id: u64,
    range: Range<u64>,
    detectors: &[Detector],
) -> Vec<Vec<u64>> {
    let n = profile.n();
    let mask = (1u64 << n) - 1;
    let zero = || vec![vec![0u64; n]; detectors.len()];

    chunk_ranges(range, WORK_CHUNK)
        .into_par_iter()
        .map(|chunk| {
            let mut stream = spec.stream(stream_id);
            stream.seek(chunk.start * DRAWS_PER_SYMBOL);
            let mut counts = zero();
            for _ in chunk {
                let word = (stream.next_u64() & mask) as u32;
                let sent = CodeWord::from_index(word, n);
                let x = modem::modulate(profile, sent).expect("codeword matches profile");
                let y = channel::awgn(x, spec, &mut stream);
                for (det_idx, det) in detectors.iter().enumerate() {
                    let got = match det {
                        Detector::Sic => modem::sic_detect(profile, y).index(),
                        Detector::Ml => ml.expect("ML table built").detect(y).index(),
                    };
                    let mut diff = got ^ word;
                    while diff != 0 {
                        counts[det_idx][diff.trailing_zeros() as usize] += 1;
                        diff &= diff - 1;
                    }
                }
            }
            counts
        })
        .reduce(zero, |mut acc, counts| {
            for (a, c) in acc.iter_mut().zip(counts) {
                for (x, y) in a.iter_mut().zip(c) {
                    *x += y;
                }
            }
            acc
        })
}

/// Simulate one noise level: draw uniform codewords, modulate, add AWGN,
/// and count Gray-domain bit errors for each requested detector on the same
/// samples. Returns one record per detector, in `detectors` order.
#[allow(clippy::too_many_arguments)]
pub fn run_point(
    profile: &GainProfile,
    snr_db: f64,
    sigma_branch: f64,
    n_symbols: u64,
    seed: u64,
    stream_id: u64,
    detectors: &[Detector],
    min_errors: Option<u64>,
) -> Result<Vec<BerRecord>> {
    if detectors.is_empty() {
        return Err(Error::InvalidConfig("detector set is empty".into()));
    }
    if n_symbols == 0 {
        return Err(Error::InvalidConfig("symbol count must be >= 1".into()));
    }
    let ml = if detectors.contains(&Detector::Ml) {
        Some(MlDetector::new(profile)?)
    } else {
        None
    };
    let spec = NoiseSpec::new(sigma_branch, seed);
    let n = profile.n();

    let mut totals = vec![vec![0u64; n]; detectors.len()];
    let mut done = 0u64;
    while done < n_symbols {
        let end = if min_errors.is_some() {
            (done + STOP_CHECK_INTERVAL).min(n_symbols)
        } else {
            n_symbols
        };
        let batch = run_batch(profile, ml.as_ref(), &spec, stream_id, done..end, detectors);
        for (t, b) in totals.iter_mut().zip(batch) {
            for (x, y) in t.iter_mut().zip(b) {
                *x += y;
            }
        }
        done = end;
        if let Some(need) = min_errors {
            if need > 0 && totals[0].iter().all(|&e| e >= need) {
                break;
            }
        }
    }

    Ok(detectors
        .iter()
        .zip(totals)
        .map(|(&detector, bit_errors)| {
            let ber: Vec<f64> = bit_errors.iter().map(|&e| e as f64 / done as f64).collect();
            let (ci_lo, ci_hi): (Vec<f64>, Vec<f64>) =
                bit_errors.iter().map(|&e| wilson_ci(e, done)).unzip();
            BerRecord {
                detector,
                snr_db,
                sigma_branch,
                trials: done,
                bit_errors,
                ber,
                ci_lo,
                ci_hi,
            }
        })
        .collect())
}

/// Run every point of a sweep. Point `i` uses substream `i`, so records are
/// deterministic given the master seed. Output is point-major, detectors in
/// configuration order within each point.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<BerRecord>> {
    config.validate()?;
    let mut records = Vec::with_capacity(config.snr_points_db.len() * config.detectors.len());
    for (idx, &db) in config.snr_points_db.iter().enumerate() {
        let sigma = sigma_for(&config.profile, config.metric, db);
        records.extend(run_point(
            &config.profile,
            db,
            sigma,
            config.symbols_per_point,
            config.seed,
            idx as u64,
            &config.detectors,
            config.min_errors,
        )?);
    }
    Ok(records)
}

/// One SIC-vs-ML disagreement found by a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub sample: IqSample,
    pub sic: CodeWord,
    pub ml: CodeWord,
    /// Squared distance from the sample to the SIC decision's point.
    pub sic_distance2: f64,
    /// Squared distance from the sample to the ML decision's point.
    pub ml_distance2: f64,
}

/// Sampling strategy for [`equivalence_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    /// A `per_axis x per_axis` grid over `[-1.5 peak, +1.5 peak]` per axis.
    Grid { per_axis: usize },
    /// Uniform random samples over the same box.
    Random { samples: u64 },
}

/// True when `x` is within `eps` of any boundary (boundaries sorted).
fn near_boundary(x: f64, bounds: &[f64], eps: f64) -> bool {
    let idx = bounds.partition_point(|&b| b < x);
    (idx > 0 && (x - bounds[idx - 1]).abs() <= eps)
        || (idx < bounds.len() && (bounds[idx] - x).abs() <= eps)
}

fn axis_coords(peak: f64, per_axis: usize) -> Vec<f64> {
    if peak == 0.0 {
        return vec![0.0];
    }
    let lo = -1.5 * peak;
    let step = 3.0 * peak / (per_axis - 1) as f64;
    (0..per_axis).map(|t| lo + t as f64 * step).collect()
}

/// Compare the SIC detector against the ML oracle on a dense grid or on
/// random samples, excluding points within `1e-9 * max_gain` of any branch
/// decision boundary (the measure-zero set where the two tie-break rules
/// may differ). Returns every disagreement found.
pub fn equivalence_scan(
    profile: &GainProfile,
    mode: ScanMode,
    seed: u64,
) -> Result<Vec<Mismatch>> {
    let ml = MlDetector::new(profile)?;
    let eps = 1e-9 * profile.max_gain();
    let i_bounds = oracle::branch_boundaries(profile.i_gains());
    let q_bounds = oracle::branch_boundaries(profile.q_gains());

    let compare = |y: IqSample| -> Option<Mismatch> {
        if near_boundary(y.i, &i_bounds, eps) || near_boundary(y.q, &q_bounds, eps) {
            return None;
        }
        let sic = modem::sic_detect(profile, y);
        let ml_cw = ml.detect(y);
        if sic == ml_cw {
            return None;
        }
        Some(Mismatch {
            sample: y,
            sic,
            ml: ml_cw,
            sic_distance2: ml.distance2(y, sic),
            ml_distance2: ml.distance2(y, ml_cw),
        })
    };

    match mode {
        ScanMode::Grid { per_axis } => {
            if per_axis < 2 {
                return Err(Error::InvalidConfig("grid needs at least 2 points per axis".into()));
            }
            let is = axis_coords(profile.peak_i(), per_axis);
            let qs = axis_coords(profile.peak_q(), per_axis);
            Ok(is
                .par_iter()
                .map(|&i| {
                    qs.iter()
                        .filter_map(|&q| compare(IqSample::new(i, q)))
                        .collect::<Vec<_>>()
                })
                .reduce(Vec::new, |mut acc, mut v| {
                    acc.append(&mut v);
                    acc
                }))
        }
        ScanMode::Random { samples } => {
            if samples == 0 {
                return Err(Error::InvalidConfig("random scan needs at least 1 sample".into()));
            }
            let peak_i = profile.peak_i();
            let peak_q = profile.peak_q();
            let to_f64 = |w: u64| (w >> 11) as f64 * (1.0 / 9007199254740992.0);
            Ok(chunk_ranges(0..samples, WORK_CHUNK)
                .into_par_iter()
                .map(|chunk| {
                    let mut stream = ChannelStream::new(seed, 0);
                    stream.seek(chunk.start * 2);
                    chunk
                        .map(|_| {
                            let ui = to_f64(stream.next_u64());
                            let uq = to_f64(stream.next_u64());
                            IqSample::new(
                                1.5 * peak_i * (2.0 * ui - 1.0),
                                1.5 * peak_q * (2.0 * uq - 1.0),
                            )
                        })
                        .filter_map(compare)
                        .collect::<Vec<_>>()
                })
                .reduce(Vec::new, |mut acc, mut v| {
                    acc.append(&mut v);
                    acc
                }))
        }
    }
}

/// Horizontal dB gap between the analytic BER curves of one bit for the
/// stretched (`r`) versus unstretched profile, measured at `target_ber` by
/// bisection on the monotone curves. Positive values mean the stretched
/// profile reaches the target at a lower SNR.
pub fn stretch_gain_at_ber(
    profile: &GainProfile,
    r: f64,
    target_ber: f64,
    bit_index: usize,
    metric: SnrMetric,
) -> Result<f64> {
    if bit_index < 1 || bit_index > profile.n() {
        return Err(Error::InvalidConfig(format!(
            "bit index {bit_index} out of range 1..={}",
            profile.n()
        )));
    }
    if !(target_ber.is_finite() && target_ber > 0.0 && target_ber < 1.0) {
        return Err(Error::TargetOutOfRange { target: target_ber });
    }
    let stretched = profile.stretch(r)?;

    let solve = |prof: &GainProfile| -> Result<f64> {
        let curve =
            |db: f64| oracle::analytic_bit_ber(prof, sigma_for(prof, metric, db)).bit(bit_index);
        let (mut lo, mut hi) = (-60.0f64, 400.0f64);
        if curve(lo) < target_ber || curve(hi) > target_ber {
            return Err(Error::TargetOutOfRange { target: target_ber });
        }
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if curve(mid) > target_ber {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };

    Ok(solve(profile)? - solve(&stretched)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p16() -> GainProfile {
        GainProfile::uniform(2, 2, 1.0).unwrap()
    }

    #[test]
    fn near_noiseless_point_has_zero_errors() {
        let records = run_point(
            &p16(),
            0.0,
            1e-9,
            20_000,
            1,
            0,
            &[Detector::Sic, Detector::Ml],
            None,
        )
        .unwrap();
        for r in records {
            assert_eq!(r.trials, 20_000);
            assert!(r.bit_errors.iter().all(|&e| e == 0));
            assert!(r.ber.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn shared_noise_counts_identical() {
        let sigma = channel::sigma_from_esn0(&p16(), 8.0);
        let records = run_point(
            &p16(),
            8.0,
            sigma,
            100_000,
            7,
            0,
            &[Detector::Sic, Detector::Ml],
            None,
        )
        .unwrap();
        assert_eq!(records[0].bit_errors, records[1].bit_errors);
        assert!(records[0].bit_errors.iter().sum::<u64>() > 0);
    }

    #[test]
    fn sweep_rejects_bad_configs() {
        let base = SweepConfig {
            profile: p16(),
            metric: SnrMetric::EsN0,
            snr_points_db: vec![8.0],
            symbols_per_point: 100,
            seed: 1,
            detectors: vec![],
            min_errors: None,
        };
        assert!(matches!(run_sweep(&base), Err(Error::InvalidConfig(_))));
        let empty_snr = SweepConfig {
            detectors: vec![Detector::Sic],
            snr_points_db: vec![],
            ..base.clone()
        };
        assert!(matches!(run_sweep(&empty_snr), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = SweepConfig {
            profile: p16(),
            metric: SnrMetric::EsN0,
            snr_points_db: vec![6.0, 10.0],
            symbols_per_point: 50_000,
            seed: 99,
            detectors: vec![Detector::Sic, Detector::Ml],
            min_errors: None,
        };
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn results_invariant_to_worker_count() {
        let cfg = SweepConfig {
            profile: p16(),
            metric: SnrMetric::EsN0,
            snr_points_db: vec![9.0],
            symbols_per_point: 80_000,
            seed: 5,
            detectors: vec![Detector::Sic],
            min_errors: Some(50),
        };
        let run_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| run_sweep(&cfg).unwrap())
        };
        assert_eq!(run_with(1), run_with(4));
    }

    #[test]
    fn early_stop_caps_trials() {
        let sigma = channel::sigma_from_esn0(&p16(), 6.0); // high error rate
        let records = run_point(&p16(), 6.0, sigma, 10_000_000, 3, 0, &[Detector::Sic], Some(10))
            .unwrap();
        let r = &records[0];
        assert!(r.trials < 10_000_000);
        assert_eq!(r.trials % STOP_CHECK_INTERVAL, 0);
        assert!(r.bit_errors.iter().all(|&e| e >= 10));
    }

    #[test]
    fn equivalence_grid_16qam_clean() {
        let mismatches =
            equivalence_scan(&p16(), ScanMode::Grid { per_axis: 101 }, 0).unwrap();
        assert!(mismatches.is_empty(), "{} mismatches", mismatches.len());
    }

    #[test]
    fn boundary_samples_are_excluded() {
        // BPSK: q = 0 sits exactly on the decision boundary where the SIC
        // tie rule (+1) and the ML tie rule (smallest codeword) disagree;
        // the scan must skip it.
        let bpsk = GainProfile::uniform(0, 1, 1.0).unwrap();
        let mismatches =
            equivalence_scan(&bpsk, ScanMode::Grid { per_axis: 3 }, 0).unwrap();
        assert!(mismatches.is_empty());
    }

    #[test]
    fn corrupted_profile_shows_mismatches() {
        // A_2 < A_1 violates the layered-formation constraint; SIC is no
        // longer nearest-level, so disagreements must surface.
        let bad = GainProfile::new_unchecked(vec![], vec![1.0, 0.8]);
        let mismatches =
            equivalence_scan(&bad, ScanMode::Grid { per_axis: 101 }, 0).unwrap();
        assert!(!mismatches.is_empty());
        for m in &mismatches {
            assert!(m.ml_distance2 <= m.sic_distance2);
            assert_ne!(m.sic, m.ml);
        }
    }

    #[test]
    fn random_scan_is_deterministic() {
        let bad = GainProfile::new_unchecked(vec![], vec![1.0, 0.8]);
        let a = equivalence_scan(&bad, ScanMode::Random { samples: 10_000 }, 11).unwrap();
        let b = equivalence_scan(&bad, ScanMode::Random { samples: 10_000 }, 11).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn stretch_gain_fixed_sigma_is_pure_doubling() {
        let p = GainProfile::uniform(3, 4, 1.0).unwrap();
        for bit in [5usize, 6, 7] {
            let gap =
                stretch_gain_at_ber(&p, 2.0, 1e-5, bit, SnrMetric::FixedSigma).unwrap();
            assert!(
                (gap - 20.0 * 2f64.log10()).abs() < 1e-6,
                "bit {bit}: gap {gap}"
            );
        }
    }

    #[test]
    fn stretch_gain_identity_when_r_is_one() {
        let p = GainProfile::uniform(3, 4, 1.0).unwrap();
        let gap = stretch_gain_at_ber(&p, 1.0, 1e-5, 5, SnrMetric::EbN0).unwrap();
        assert!(gap.abs() < 1e-6);
    }

    #[test]
    fn stretch_gain_rejects_unreachable_target() {
        let p = GainProfile::uniform(3, 4, 1.0).unwrap();
        assert!(matches!(
            stretch_gain_at_ber(&p, 2.0, 0.9, 5, SnrMetric::EbN0),
            Err(Error::TargetOutOfRange { .. })
        ));
        assert!(matches!(
            stretch_gain_at_ber(&p, 2.0, 1e-5, 9, SnrMetric::EbN0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn wilson_interval_sane() {
        let (lo, hi) = wilson_ci(0, 1000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
        let (lo, hi) = wilson_ci(500, 1000);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(hi - lo < 0.07);
    }
}
