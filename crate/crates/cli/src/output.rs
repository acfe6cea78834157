//! Number formatting and output sinks.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Rounds to `digits` significant decimal digits. At 17 or more digits the
/// value is returned unchanged (17 digits round-trip every `f64`).
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if digits >= 17 || !x.is_finite() || x == 0.0 {
        return x;
    }
    let digits = digits.max(1);
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("checked f64");
            if let Some(r) = serde_json::Number::from_f64(round_sig(x, digits)) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|i| round_value(i, digits)),
        Value::Object(map) => map.values_mut().for_each(|i| round_value(i, digits)),
        _ => {}
    }
}

pub fn to_json<T: Serialize>(payload: &T, digits: usize) -> String {
    let mut v = serde_json::to_value(payload).expect("payload serializes");
    round_value(&mut v, digits);
    serde_json::to_string(&v).expect("value serializes")
}

pub fn fmt_num(x: f64, digits: usize) -> String {
    format!("{}", round_sig(x, digits))
}

pub fn write_target(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

/// Reads a file, or standard input for `None` / `-`.
pub fn read_source(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}
