//! Deterministic JSON and CSV rendering.
//!
//! Reports must be byte-identical across runs and machines, so every float
//! is printed through one fixed-width scientific format with 17 significant
//! digits, enough to reproduce any f64 exactly.

use std::io;

use serde::{Serialize, Serializer};
use serde_json::ser::Formatter;

use crate::error::CliError;

struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a report to JSON with canonical float formatting and a
/// trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Io(format!("report serialization: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Io(format!("report encoding: {e}")))
}

/// A float that may legitimately be infinite, such as a residual against a
/// constraint the candidate violates outright. JSON has no infinity
/// literal, so those serialize as the strings "inf" and "-inf".
#[derive(Debug, Clone, Copy)]
pub struct Ext(pub f64);

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0.is_nan() {
            s.serialize_str("nan")
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

/// The fixed-width float format shared by the CSV tables.
pub fn float_cell(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a CSV table; cells carry no commas by construction so no quoting
/// is involved.
pub fn csv(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut out = headers.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
