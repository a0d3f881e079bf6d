//! JSON configuration schema and resolution.
//!
//! Structured inputs live in the config file; the `--seed`, `--symbols` and
//! `--out` flags override the corresponding scalar fields.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hqam::harness::{Detector, SnrMetric};
use hqam::GainProfile;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Explicit gain lists. Mutually exclusive with `k`/`m`/`base`/`stretch_r`.
    pub profile: Option<RawProfile>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub base: Option<f64>,
    pub stretch_r: Option<f64>,
    pub snr: Option<SnrSection>,
    pub symbols_per_point: Option<u64>,
    pub seed: Option<SeedField>,
    pub detectors: Option<Vec<String>>,
    /// Early-stop threshold per bit; omitted = 100, 0 = run all symbols.
    pub min_errors: Option<u64>,
    pub output: Option<PathBuf>,
    pub scan: Option<ScanSection>,
    pub compare: Option<CompareSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawProfile {
    pub i_gains: Vec<f64>,
    pub q_gains: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnrSection {
    /// "esn0", "ebn0" or "fixed_sigma".
    pub metric: String,
    pub points_db: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSection {
    /// "grid" (default) or "random".
    pub mode: Option<String>,
    pub per_axis: Option<usize>,
    pub samples: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CompareSection {
    pub stretch_r: f64,
    pub target_ber: f64,
    pub bit_index: usize,
}

/// Seed as a JSON number or a decimal/0x-hex string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeedField {
    Num(u64),
    Text(String),
}

pub fn parse_seed(s: &str) -> Result<u64, CliError> {
    let s = s.trim();
    let parsed = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        s.parse()
    };
    parsed.map_err(|_| CliError::config(format!("invalid seed {s:?} (decimal or 0x-hex)")))
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("cannot parse {}: {e}", path.display())))
    }

    /// The raw gain lists, before constraint validation (so `validate` can
    /// report margins for invalid profiles too).
    pub fn raw_gains(&self) -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let uniform_fields =
            self.k.is_some() || self.m.is_some() || self.base.is_some() || self.stretch_r.is_some();
        match (&self.profile, uniform_fields) {
            (Some(_), true) => Err(CliError::config(
                "give either \"profile\" or (k, m, base, stretch_r), not both".into(),
            )),
            (Some(p), false) => Ok((p.i_gains.clone(), p.q_gains.clone())),
            (None, _) => {
                let (Some(k), Some(m)) = (self.k, self.m) else {
                    return Err(CliError::config(
                        "profile missing: set \"profile\" or both \"k\" and \"m\"".into(),
                    ));
                };
                let base = self.base.unwrap_or(1.0);
                let r = self.stretch_r.unwrap_or(1.0);
                let pow2 = |j: usize| base * (1u64 << j) as f64;
                Ok((
                    (0..k).map(|j| pow2(j) * r).collect(),
                    (0..m).map(pow2).collect(),
                ))
            }
        }
    }

    pub fn profile(&self) -> Result<GainProfile, CliError> {
        let (i, q) = self.raw_gains()?;
        GainProfile::new(i, q).map_err(CliError::from)
    }

    pub fn seed(&self, flag: Option<&str>) -> Result<u64, CliError> {
        if let Some(s) = flag {
            return parse_seed(s);
        }
        match &self.seed {
            None => Ok(0),
            Some(SeedField::Num(v)) => Ok(*v),
            Some(SeedField::Text(s)) => parse_seed(s),
        }
    }

    pub fn metric(&self) -> Result<SnrMetric, CliError> {
        let snr = self
            .snr
            .as_ref()
            .ok_or_else(|| CliError::config("config has no \"snr\" section".into()))?;
        match snr.metric.as_str() {
            "esn0" => Ok(SnrMetric::EsN0),
            "ebn0" => Ok(SnrMetric::EbN0),
            "fixed_sigma" => Ok(SnrMetric::FixedSigma),
            other => Err(CliError::config(format!(
                "unknown SNR metric {other:?} (esn0 | ebn0 | fixed_sigma)"
            ))),
        }
    }

    pub fn snr_points(&self) -> Result<Vec<f64>, CliError> {
        let snr = self
            .snr
            .as_ref()
            .ok_or_else(|| CliError::config("config has no \"snr\" section".into()))?;
        if snr.points_db.is_empty() {
            return Err(CliError::config("snr.points_db is empty".into()));
        }
        Ok(snr.points_db.clone())
    }

    pub fn detectors(&self) -> Result<Vec<Detector>, CliError> {
        let Some(names) = &self.detectors else {
            return Ok(vec![Detector::Sic, Detector::Ml]);
        };
        names
            .iter()
            .map(|name| match name.as_str() {
                "sic" => Ok(Detector::Sic),
                "ml" => Ok(Detector::Ml),
                other => Err(CliError::config(format!(
                    "unknown detector {other:?} (sic | ml)"
                ))),
            })
            .collect()
    }

    /// `None` disables early stopping (config value 0); missing = 100.
    pub fn min_errors(&self) -> Option<u64> {
        match self.min_errors {
            None => Some(100),
            Some(0) => None,
            Some(v) => Some(v),
        }
    }

    pub fn output(&self, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
        flag.or_else(|| self.output.clone()).ok_or_else(|| {
            CliError::config("no output path: pass --out or set \"output\"".into())
        })
    }
}
