//! Input parsing and deterministic output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use szego_core::symbol::expand_rational;
use szego_core::{FourierSymbol, RationalSymbol};

use crate::error::{CliError, CliResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// A symbol file holds either `{"coeffs": ..}` or `{"num": .., "den": ..}`.
/// Rational input is expanded to at least `m` coefficients.
pub fn read_symbol(path: &Path, m: usize, tail_tol: f64) -> CliResult<FourierSymbol> {
    let value: Value = read_json(path)?;
    let parse_err = |e: serde_json::Error| CliError::Io(format!("{}: {e}", path.display()));
    if value.get("coeffs").is_some() {
        serde_json::from_value(value).map_err(parse_err)
    } else if value.get("num").is_some() {
        let r: RationalSymbol = serde_json::from_value(value).map_err(parse_err)?;
        Ok(expand_rational(&r, m, tail_tol)?)
    } else {
        Err(CliError::Io(format!(
            "{}: expected a symbol with \"coeffs\" or a rational with \"num\" and \"den\"",
            path.display()
        )))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Write `text` to `out`, or to stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
            Ok(())
        }
    }
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `prefix` with `suffix` appended to its file name.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}
