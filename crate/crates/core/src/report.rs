//! Output serialization: trajectory CSV files, rounded summary JSON, and the
//! per-run manifest.
//!
//! Reruns with the same seed must reproduce every data file byte for byte,
//! so floats are written with a fixed 12-significant-digit scientific format
//! and summaries round through the same precision before serialization. The
//! manifest is the only file carrying timestamps.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Fixed float format used in every CSV cell: scientific notation with
/// twelve significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

/// Rounds to twelve significant digits; used on every float entering a
/// summary so serialized values match the CSV precision.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    // Round through the decimal representation itself so the result is
    // exactly the value a reader of the CSV format recovers.
    format_float(x).parse().expect("scientific notation always parses back")
}

/// One trajectory row; field order matches the CSV header.
#[derive(Debug, Clone)]
pub struct TrajectoryRow {
    /// Round index, starting at 1.
    pub t: u64,
    /// Index into a finite arm list; `None` for continuous sets.
    pub arm_index: Option<usize>,
    pub arm_coords: Vec<f64>,
    pub reward: u8,
    pub expected_reward: f64,
    pub instant_regret: f64,
    pub cum_regret: f64,
    /// Whether the played arm fell in the detrimental subset.
    pub in_x_minus: bool,
    /// The policy's optimistic value for the chosen arm, when it computes
    /// one: the optimistic logit for planner policies, the UCB score for
    /// index policies.
    pub optimistic_value: Option<f64>,
}

/// Exact header of every trajectory CSV.
pub const TRAJECTORY_HEADER: &str =
    "t,arm_index,arm_coords,reward,expected_reward,instant_regret,cum_regret,in_x_minus,optimistic_value";

/// Writes one episode's trajectory in the fixed schema. Coordinates are
/// semicolon-separated within their cell; booleans are 0/1; a missing
/// optimistic value leaves the cell empty.
pub fn write_trajectory_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for row in rows {
        let coords: Vec<String> = row.arm_coords.iter().map(|c| format_float(*c)).collect();
        let arm_index = match row.arm_index {
            Some(i) => i.to_string(),
            None => "-1".to_string(),
        };
        let optimistic = match row.optimistic_value {
            Some(v) => format_float(v),
            None => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.t,
            arm_index,
            coords.join(";"),
            row.reward,
            format_float(row.expected_reward),
            format_float(row.instant_regret),
            format_float(row.cum_regret),
            u8::from(row.in_x_minus),
            optimistic,
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Recursively rounds every number in a JSON value through [`round_sig`].
pub fn round_json(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(f)) {
                        *n = r;
                    }
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_json),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serializes a summary to pretty JSON with all floats rounded to the CSV
/// precision, and writes it to `path`.
pub fn write_summary_json<T: Serialize>(path: &Path, summary: &T) -> Result<()> {
    let mut value = serde_json::to_value(summary)
        .map_err(|e| Error::Mismatch { what: format!("summary serialization failed: {e}") })?;
    round_json(&mut value);
    let text = serde_json::to_string_pretty(&value)
        .map_err(|e| Error::Mismatch { what: format!("summary serialization failed: {e}") })?;
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Digest and size of one output file.
#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

/// The per-run manifest: what was run, from which config, producing which
/// files. The only output carrying wall-clock timestamps.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub package_version: String,
    pub kind: String,
    pub config_digest: String,
    pub seed: u64,
    pub threads: usize,
    pub started_at: String,
    pub finished_at: String,
    pub files: Vec<FileEntry>,
    /// Error message when the run aborted before producing its outputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunManifest {
    /// Hashes every listed file under `dir` and writes `manifest.json`.
    pub fn write(mut self, dir: &Path, names: &[String]) -> Result<()> {
        use sha2::{Digest, Sha256};
        self.files = Vec::with_capacity(names.len());
        for name in names {
            let bytes = fs::read(dir.join(name))?;
            let mut hasher = Sha256::new();
            hasher.update(&bytes);
            self.files.push(FileEntry {
                name: name.clone(),
                sha256: hex::encode(hasher.finalize()),
                bytes: bytes.len() as u64,
            });
        }
        let text = serde_json::to_string_pretty(&self)
            .map_err(|e| Error::Mismatch { what: format!("manifest serialization failed: {e}") })?;
        fs::write(dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}

/// Current wall-clock time in RFC 3339 form, for manifests only.
pub fn timestamp_now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Creates `dir` if needed and returns the path of `name` within it.
pub fn output_path(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}
