use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::args::{Format, OutputArgs};
use crate::error::CliError;

/// Floats with 17 significant digits, which round-trip every `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (None, Some(i)) => i.to_string(),
            _ => format_float(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes records as CSV with the given header, or as JSON. A single record
/// is written as a JSON object unless `as_list` is set.
pub fn write_records<T: Serialize, W: Write>(
    out: W,
    format: Format,
    header: &[&str],
    records: &[T],
    as_list: bool,
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let mut out = out;
            if records.len() == 1 && !as_list {
                serde_json::to_writer_pretty(&mut out, &records[0])?;
            } else {
                serde_json::to_writer_pretty(&mut out, records)?;
            }
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header)?;
            for record in records {
                let value = serde_json::to_value(record)?;
                let row: Vec<String> = header
                    .iter()
                    .map(|key| value.get(*key).map(cell).unwrap_or_default())
                    .collect();
                w.write_record(&row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Opens the configured destination.
pub fn sink(args: &OutputArgs) -> Result<Box<dyn Write>, CliError> {
    Ok(match &args.out {
        Some(path) => Box::new(BufWriter::new(create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::Output(format!("cannot create {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Rec {
        a: u64,
        b: f64,
        c: Option<f64>,
        d: &'static str,
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.3944418481403604e-65, 1e16, -2.5e-300] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits: String = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect();
            assert_eq!(digits.len(), 17, "{s}");
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        let recs = [Rec { a: 3, b: 0.5, c: None, d: "x" }];
        write_records(&mut buf, Format::Csv, &["a", "b", "c", "d"], &recs, false).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a,b,c,d\n3,5.0000000000000000e-1,,x\n"
        );
        let mut buf = Vec::new();
        write_records::<Rec, _>(&mut buf, Format::Csv, &["a", "b"], &[], true).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n");
    }

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        let recs = [Rec { a: 3, b: 0.5, c: None, d: "x" }];
        write_records(&mut buf, Format::Json, &[], &recs, false).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["a"], 3);
        assert!(v["c"].is_null());
        let mut buf = Vec::new();
        write_records(&mut buf, Format::Json, &[], &recs, true).unwrap();
        assert!(serde_json::from_slice::<Value>(&buf).unwrap().is_array());
    }
}
