//! Output schemas and emission.
//!
//! CSV files carry a header row and use `,` and `\n`. JSON records carry a
//! `schema` field; keys appear in struct field order. Reals are written
//! with 6 decimals, non-finite values as empty CSV cells or JSON `null`.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

pub const SCHEMA: &str = "amac/1";

pub const SWEEP_COLUMNS: [&str; 8] = [
    "rate",
    "effective_rate",
    "exponent",
    "dominant_len",
    "dominant_sender",
    "regime",
    "argmins",
    "error",
];
pub const SYNC_BOUND_COLUMN: &str = "sphere_packing_2r_eff";
pub const EXPONENT_COLUMNS: [&str; 7] = ["r1", "r2", "len", "sender", "exponent", "regime", "dominant"];
pub const REGION_COLUMNS: [&str; 2] = ["r1", "r2"];

/// Rounds to 6 decimals; `None` for non-finite input.
pub fn r6(x: f64) -> Option<f64> {
    x.is_finite().then(|| {
        let v = (x * 1e6).round() / 1e6;
        if v == 0.0 {
            0.0
        } else {
            v
        }
    })
}

pub fn fmt6(x: f64) -> String {
    if x.is_finite() {
        format!("{:.6}", r6(x).unwrap_or(x))
    } else {
        String::new()
    }
}

pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_csv(out: &mut dyn Write, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
