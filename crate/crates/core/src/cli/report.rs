//! Result tables and their CSV / JSON forms.

use std::io::Write;
use std::path::PathBuf;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::config::{ExperimentConfig, Format};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
    S(String),
    /// Missing value, after a failed computation.
    Na,
}

impl Cell {
    /// CSV text; floats carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::B(b) => b.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Na => String::new(),
        }
    }
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Na, Into::into)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::F(x) if x.is_finite() => s.serialize_f64(*x),
            Cell::F(x) => s.serialize_str(&fmt_f64(*x)),
            Cell::I(i) => s.serialize_i64(*i),
            Cell::B(b) => s.serialize_bool(*b),
            Cell::S(t) => s.serialize_str(t),
            Cell::Na => s.serialize_none(),
        }
    }
}

struct RowRef<'a>(&'a [String], &'a [Cell]);

impl Serialize for RowRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub config_echo: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Full per-point results where a kind has them (protocol runs).
    pub results: Vec<serde_json::Value>,
    pub tool_version: String,
    /// Seconds; kept out of the CSV so reruns compare byte for byte.
    pub wall_time: f64,
}

impl Serialize for RunReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<RowRef> = self.rows.iter().map(|r| RowRef(&self.columns, r)).collect();
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("config_echo", &self.config_echo)?;
        m.serialize_entry("tool_version", &self.tool_version)?;
        m.serialize_entry("wall_time", &self.wall_time)?;
        m.serialize_entry("columns", &self.columns)?;
        m.serialize_entry("rows", &rows)?;
        if !self.results.is_empty() {
            m.serialize_entry("results", &self.results)?;
        }
        m.end()
    }
}

impl RunReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for r in &self.rows {
            out.write_record(r.iter().map(Cell::to_csv))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Column index by name.
    pub fn col(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Float column values (missing cells as NaN).
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.col(name) else { return vec![] };
        self.rows
            .iter()
            .map(|r| match &r[i] {
                Cell::F(x) => *x,
                Cell::I(k) => *k as f64,
                _ => f64::NAN,
            })
            .collect()
    }
}

/// Write `{prefix}.csv` and/or `{prefix}.json`; returns the paths written.
pub fn emit(report: &RunReport, prefix: &str, formats: &[Format]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if let Some(dir) = std::path::Path::new(prefix).parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Domain(format!("cannot create {}: {e}", dir.display())))?;
    }
    for f in formats {
        let path = PathBuf::from(format!(
            "{prefix}.{}",
            match f {
                Format::Csv => "csv",
                Format::Json => "json",
            }
        ));
        let open = || std::fs::File::create(&path).map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())));
        match f {
            Format::Csv => report.write_csv(std::io::BufWriter::new(open()?))?,
            Format::Json => {
                let mut w = std::io::BufWriter::new(open()?);
                w.write_all(report.json_string()?.as_bytes())?;
                w.flush()?;
            }
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config;

    fn report(rows: Vec<Vec<Cell>>) -> RunReport {
        let cfg = parse_config("[run]\nkind = theta\nseed = 1\n[fixture]\nmap = identity\n").unwrap();
        RunReport {
            config_echo: cfg,
            columns: vec!["x".into(), "k".into(), "name".into(), "error".into()],
            rows,
            results: vec![],
            tool_version: "t".into(),
            wall_time: 0.5,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(report(vec![]).csv_string().unwrap(), "x,k,name,error\n");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        let x = 0.1 + 0.2;
        let s = fmt_f64(x);
        assert_eq!(s.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
        assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_and_json_agree() {
        let r = report(vec![
            vec![Cell::F(1.0 / 3.0), Cell::I(4), Cell::S("a,b".into()), Cell::Na],
            vec![Cell::F(f64::INFINITY), Cell::I(-1), Cell::S("c".into()), Cell::S("boom".into())],
        ]);
        let csv_text = r.csv_string().unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.json_string().unwrap()).unwrap();
        let mut rd = csv::Reader::from_reader(csv_text.as_bytes());
        for (rec, row) in rd.records().zip(json["rows"].as_array().unwrap()) {
            let rec = rec.unwrap();
            let x: f64 = rec[0].parse().unwrap();
            match &row["x"] {
                serde_json::Value::Number(n) => assert_eq!(n.as_f64().unwrap().to_bits(), x.to_bits()),
                serde_json::Value::String(s) => assert_eq!(s.parse::<f64>().unwrap(), x),
                other => panic!("{other}"),
            }
            assert_eq!(rec[1].parse::<i64>().unwrap(), row["k"].as_i64().unwrap());
            assert_eq!(&rec[2], row["name"].as_str().unwrap());
            assert_eq!(rec[3].is_empty(), row["error"].is_null());
        }
    }

    #[test]
    fn unwritable_path_is_reported() {
        let r = report(vec![]);
        let err = emit(&r, "/proc/definitely/not/here/out", &[Format::Csv]).unwrap_err();
        assert!(err.to_string().contains("cannot"));
    }
}
