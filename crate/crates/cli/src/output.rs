//! CSV and run-manifest writing.

use std::io::Write;
use std::path::Path;

use serde_json::json;

use crate::CliError;

/// Full round-trip float formatting: plain decimal in a readable range,
/// scientific notation outside it. Both forms parse back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs();
    if (1e-4..1e16).contains(&mag) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

/// Write `<csv>.manifest.json` next to an output file: tool version, the
/// fully resolved configuration and seed, so the CSV can be regenerated
/// from the manifest alone.
pub fn write_manifest(
    csv_path: &Path,
    command: &str,
    seed: Option<u64>,
    resolved: serde_json::Value,
) -> Result<(), CliError> {
    let manifest_path = manifest_path(csv_path);
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let doc = json!({
        "tool": "hqam",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "timestamp_unix": timestamp,
        "seed": seed,
        "config": resolved,
        "outputs": [csv_path.display().to_string()],
    });
    let text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    std::fs::write(&manifest_path, text)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", manifest_path.display())))
}

pub fn manifest_path(csv_path: &Path) -> std::path::PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".manifest.json");
    std::path::PathBuf::from(name)
}

/// Print a short mismatch report to the given writer.
pub fn print_mismatches<W: Write>(
    out: &mut W,
    mismatches: &[hqam::Mismatch],
    limit: usize,
) -> std::io::Result<()> {
    writeln!(out, "{} mismatches", mismatches.len())?;
    for m in mismatches.iter().take(limit) {
        writeln!(
            out,
            "  y = ({}, {}): sic {} (d2 {}) vs ml {} (d2 {})",
            fmt_f64(m.sample.i),
            fmt_f64(m.sample.q),
            m.sic,
            fmt_f64(m.sic_distance2),
            m.ml,
            fmt_f64(m.ml_distance2),
        )?;
    }
    if mismatches.len() > limit {
        writeln!(out, "  ... {} more", mismatches.len() - limit)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [
            0.0,
            1.0,
            -3.5,
            0.0001,
            0.000099999,
            1.2345678901234567e-5,
            5.7255712e-300,
            1e16,
            9.99e15,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s}");
            assert!(s.len() <= 25, "verbose rendering {s}");
        }
    }
}
