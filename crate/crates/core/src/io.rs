//! File formats: JSON-lines corpora, `ts,value` series CSV, JSON artifacts.
//!
//! All writers go through a temp-file-plus-rename so failed runs never leave
//! partial outputs. JSON artifacts round floats to 12 significant digits and
//! keep key order fixed, so identical runs produce byte-identical files.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::series::AsyncSeries;
use crate::textproc::Document;

#[derive(Debug, Deserialize)]
struct JsonlRecord {
    id: String,
    text: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    ts: Option<String>,
    #[serde(default)]
    unit: Option<String>,
}

/// Read a JSON-lines corpus: one object per line with `id`, `text`,
/// optional `label`, `ts` (ISO-8601 date), `unit`.
pub fn read_corpus_jsonl(path: &Path) -> Result<Vec<Document>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
        let timestamp = match &rec.ts {
            None => None,
            Some(ts) => Some(
                NaiveDate::parse_from_str(&ts[..ts.len().min(10)], "%Y-%m-%d")
                    .map_err(|_| Error::parse(path, lineno + 1, format!("bad timestamp '{ts}'")))?,
            ),
        };
        docs.push(Document {
            id: rec.id,
            text: rec.text,
            label: rec.label,
            timestamp,
            unit: rec.unit,
        });
    }
    if docs.is_empty() {
        return Err(Error::parse(path, 0, "corpus file contains no documents"));
    }
    Ok(docs)
}

/// Serialize documents as JSON-lines with fixed key order.
pub fn corpus_to_jsonl(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        let mut obj = serde_json::Map::new();
        obj.insert("id".into(), Value::String(d.id.clone()));
        obj.insert("text".into(), Value::String(d.text.clone()));
        obj.insert(
            "label".into(),
            d.label.clone().map(Value::String).unwrap_or(Value::Null),
        );
        obj.insert(
            "ts".into(),
            d.timestamp
                .map(|t| Value::String(t.format("%Y-%m-%d").to_string()))
                .unwrap_or(Value::Null),
        );
        obj.insert(
            "unit".into(),
            d.unit.clone().map(Value::String).unwrap_or(Value::Null),
        );
        out.push_str(&Value::Object(obj).to_string());
        out.push('\n');
    }
    out
}

/// Read a `ts,value` CSV. Timestamps are either ISO-8601 dates (converted to
/// fractional days from the earliest observation) or plain fractional-day
/// numbers. Duplicate or decreasing timestamps are rejected at parse time.
pub fn read_series_csv(path: &Path, name: &str) -> Result<AsyncSeries> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 0, "empty series file"))?;
    if header.trim() != "ts,value" {
        return Err(Error::parse(
            path,
            1,
            format!("expected header 'ts,value', got '{header}'"),
        ));
    }
    let mut dated: Vec<(NaiveDate, f64)> = Vec::new();
    let mut numeric: Vec<(f64, f64)> = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (ts, value) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path, lineno + 1, "expected 'ts,value'"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, format!("bad value '{value}'")))?;
        let ts = ts.trim();
        if let Ok(date) = NaiveDate::parse_from_str(&ts[..ts.len().min(10)], "%Y-%m-%d") {
            dated.push((date, value));
        } else if let Ok(t) = ts.parse::<f64>() {
            numeric.push((t, value));
        } else {
            return Err(Error::parse(path, lineno + 1, format!("bad timestamp '{ts}'")));
        }
    }
    match (dated.is_empty(), numeric.is_empty()) {
        (false, true) => AsyncSeries::from_dated(&dated, name),
        (true, false) => {
            let (times, values): (Vec<f64>, Vec<f64>) = numeric.into_iter().unzip();
            AsyncSeries::new(times, values, name)
        }
        (false, false) => Err(Error::parse(
            path,
            0,
            "mixed date and numeric timestamps in one file",
        )),
        (true, true) => Err(Error::parse(path, 0, "series file contains no observations")),
    }
}

/// Serialize a series as `ts,value` with fractional-day timestamps.
pub fn series_to_csv(series: &AsyncSeries) -> String {
    let mut out = String::from("ts,value\n");
    for (t, v) in series.times().iter().zip(series.values()) {
        out.push_str(&format!("{t},{v}\n"));
    }
    out
}

/// Read an indicator CSV: a `unit` key column followed by named numeric
/// columns, one row per observation unit.
pub fn read_indicator_csv(path: &Path) -> Result<crate::stats::IndicatorMatrix> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| {
        Error::parse(path, 0, e.to_string())
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    if headers.is_empty() || &headers[0] != "unit" {
        return Err(Error::parse(path, 1, "first column must be 'unit'"));
    }
    let names: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let mut units = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
        if record.len() != names.len() + 1 {
            return Err(Error::parse(path, i + 2, "wrong number of fields"));
        }
        let unit = record[0].to_string();
        let mut row = Vec::with_capacity(names.len());
        for (c, field) in record.iter().skip(1).enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::parse(
                    path,
                    i + 2,
                    format!("missing or bad value for unit '{unit}', column '{}'", names[c]),
                )
            })?;
            row.push(v);
        }
        units.push(unit);
        rows.push(row);
    }
    if units.is_empty() {
        return Err(Error::parse(path, 0, "no data rows"));
    }
    let data = nalgebra::DMatrix::from_fn(units.len(), names.len(), |r, c| rows[r][c]);
    crate::stats::IndicatorMatrix::new(units, names, data)
}

/// Round every number in a JSON tree to 12 significant digits.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.as_i64().is_none() && n.as_u64().is_none() {
                    let rounded = round_sig(f);
                    if let Some(num) = serde_json::Number::from_f64(rounded) {
                        *value = Value::Number(num);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Round to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Write bytes atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Serialize a JSON value with rounded floats and a trailing newline.
pub fn write_json_atomic(path: &Path, value: &Value) -> Result<()> {
    let mut value = value.clone();
    round_json(&mut value);
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| Error::Cli(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)] // the truncated literal is the point
    fn round_sig_behaves() {
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(123456789.0), 123456789.0);
        assert!((round_sig(std::f64::consts::PI) - 3.14159265359).abs() < 1e-12);
    }

    #[test]
    fn corpus_jsonl_roundtrip() {
        let docs = vec![
            Document::new("a", "hello world").with_label("A"),
            Document {
                id: "b".into(),
                text: "ciao".into(),
                label: None,
                timestamp: NaiveDate::from_ymd_opt(2014, 2, 1),
                unit: Some("MI".into()),
            },
        ];
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("c.jsonl");
        write_atomic(&path, corpus_to_jsonl(&docs).as_bytes()).unwrap();
        let back = read_corpus_jsonl(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].label.as_deref(), Some("A"));
        assert_eq!(back[1].unit.as_deref(), Some("MI"));
        assert_eq!(back[1].timestamp, NaiveDate::from_ymd_opt(2014, 2, 1));
    }

    #[test]
    fn series_csv_numeric_and_dated() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("s.csv");
        write_atomic(&path, b"ts,value\n0,1.5\n1.5,2\n3,2.5\n").unwrap();
        let s = read_series_csv(&path, "x").unwrap();
        assert_eq!(s.times(), &[0.0, 1.5, 3.0]);

        write_atomic(&path, b"ts,value\n2014-01-01,1\n2014-01-08,2\n").unwrap();
        let s = read_series_csv(&path, "x").unwrap();
        assert_eq!(s.times(), &[0.0, 7.0]);
    }

    #[test]
    fn series_csv_rejects_duplicates_and_junk() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("s.csv");
        write_atomic(&path, b"ts,value\n0,1\n0,2\n").unwrap();
        assert!(read_series_csv(&path, "x").is_err());
        write_atomic(&path, b"ts,value\n0,1\n1,oops\n").unwrap();
        assert!(read_series_csv(&path, "x").is_err());
        write_atomic(&path, b"wrong,header\n0,1\n").unwrap();
        assert!(read_series_csv(&path, "x").is_err());
    }
}
