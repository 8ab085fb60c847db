//! CSV/JSON emission shared by the CLI commands.
//!
//! JSON objects are written with sorted keys; CSV cells use 17 significant
//! digits so every value round-trips.

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// A float with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Pretty JSON with object keys in sorted order.
pub fn to_sorted_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // serde_json::Map is a BTreeMap unless `preserve_order` is enabled.
    let value = serde_json::to_value(value)?;
    let mut out = serde_json::to_string_pretty(&value)?;
    out.push('\n');
    Ok(out)
}

/// First 16 hex digits of the SHA-256 of the sorted-key JSON of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let canonical = serde_json::to_value(value)
        .and_then(|v| serde_json::to_string(&v))
        .unwrap_or_default();
    let digest = Sha256::digest(canonical.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// RFC-4180 CSV from a header and string rows.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> io::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Where a command's table goes: an explicit file, a file named
/// `<stem>-<hash>.<ext>` inside an existing directory, or stdout.
pub fn resolve_output(path: Option<&Path>, stem: &str, hash: &str, format: OutputFormat) -> Option<PathBuf> {
    let path = path?;
    if path.is_dir() {
        Some(path.join(format!("{stem}-{hash}.{}", format.extension())))
    } else {
        Some(path.to_path_buf())
    }
}

pub fn emit(content: &str, target: Option<&Path>, stdout: &mut dyn Write) -> io::Result<()> {
    match target {
        Some(path) => std::fs::write(path, content),
        None => stdout.write_all(content.as_bytes()),
    }
}
