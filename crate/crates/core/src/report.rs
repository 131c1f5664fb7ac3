//! Flat CSV and JSON output for any serializable report.
//!
//! Records are serialized through `serde_json`, so CSV columns follow struct
//! field order. Nested values (witness lists, vectors) go into a single cell
//! as compact JSON. Floats are printed with a fixed number of significant
//! digits unless full precision is requested.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::numeric::format_significant;

pub const DEFAULT_DIGITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision(pub Option<usize>);

impl Default for Precision {
    fn default() -> Self {
        Precision(Some(DEFAULT_DIGITS))
    }
}

impl Precision {
    pub const FULL: Precision = Precision(None);

    pub fn format(self, x: f64) -> String {
        format_significant(x, self.0)
    }
}

impl FromStr for Precision {
    type Err = Error;

    /// `full` or a digit count between 1 and 17.
    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            return Ok(Precision::FULL);
        }
        match s.parse::<usize>() {
            Ok(d @ 1..=17) => Ok(Precision(Some(d))),
            _ => Err(Error::InvalidArgument(format!("precision must be `full` or 1..=17, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format {s:?}; use csv or json"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

fn to_value(item: &impl Serialize) -> Result<Value> {
    serde_json::to_value(item).map_err(|e| Error::InvalidArgument(format!("cannot serialize report: {e}")))
}

/// Rounds every float in `value` to `precision`; integers are untouched.
pub fn round_value(value: Value, precision: Precision) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            precision.format(x).parse::<f64>().ok().and_then(Number::from_f64).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(|v| round_value(v, precision)).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v, precision))).collect()),
        other => other,
    }
}

fn cell(value: &Value, precision: Precision) -> String {
    match value {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => precision.format(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        nested => round_value(nested.clone(), precision).to_string(),
    }
}

fn object(item: &impl Serialize) -> Result<Map<String, Value>> {
    match to_value(item)? {
        Value::Object(map) => Ok(map),
        other => {
            let mut map = Map::new();
            map.insert("value".into(), other);
            Ok(map)
        }
    }
}

/// Writes one CSV row per item, with a header taken from the first item.
pub fn write_csv<T: Serialize>(out: impl Write, items: &[T], precision: Precision) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Option<Vec<String>> = None;
    for item in items {
        let map = object(item)?;
        let keys: Vec<String> = map.keys().cloned().collect();
        match &header {
            None => {
                writer.write_record(&keys).map_err(csv_error)?;
                header = Some(keys);
            }
            Some(h) if *h != keys => {
                return Err(Error::InvalidArgument("CSV rows have different columns".into()));
            }
            Some(_) => {}
        }
        writer.write_record(map.values().map(|v| cell(v, precision))).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("CSV output failed: {other:?}")),
    }
}

/// Pretty-printed JSON document followed by a newline.
pub fn write_json(mut out: impl Write, item: &impl Serialize, precision: Precision) -> Result<()> {
    let value = round_value(to_value(item)?, precision);
    serde_json::to_writer_pretty(&mut out, &value)
        .map_err(|e| Error::InvalidArgument(format!("JSON output failed: {e}")))?;
    writeln!(out)?;
    Ok(())
}

/// Writes `items` as CSV rows or as a JSON array.
pub fn write_records<T: Serialize>(out: impl Write, items: &[T], format: Format, precision: Precision) -> Result<()> {
    match format {
        Format::Csv => write_csv(out, items, precision),
        Format::Json => write_json(out, &items, precision),
    }
}
