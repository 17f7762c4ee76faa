//! Plain-text trajectory files: one real per line. Lines starting with `#`
//! and blank lines are skipped.

use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};

pub fn parse_trajectory(text: &str) -> std::result::Result<Vec<f64>, scrambler_core::Error> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(x) if x.is_finite() => out.push(x),
            _ => {
                return Err(scrambler_core::Error::Parse {
                    line: i + 1,
                    message: format!("{line:?} is not a finite real number"),
                })
            }
        }
    }
    Ok(out)
}

pub fn read_trajectory(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_trajectory(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}
