//! Artifact files: `results.csv`, `samples.csv`, `meta.json` and `*.dat`
//! plot data, each written to a temporary file and renamed into place.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

/// One row of `results.csv`. The quantity names the identity it checks.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub quantity: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub status: Status,
}

impl ResultRow {
    pub fn info(quantity: impl Into<String>, value: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            tolerance: None,
            status: Status::Info,
        }
    }

    /// PASS iff `value < tolerance`.
    pub fn below(quantity: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::check(quantity, value, tolerance, value < tolerance)
    }

    pub fn check(quantity: impl Into<String>, value: f64, tolerance: f64, ok: bool) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            tolerance: Some(tolerance),
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }
}

/// One point of a sampled curve: `index` separates curves within a series,
/// such as eigenvalue slots along a flow.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub series: String,
    pub index: usize,
    pub x: f64,
    pub y: f64,
}

impl Sample {
    pub fn new(series: &str, index: usize, x: f64, y: f64) -> Self {
        Self {
            series: series.to_string(),
            index,
            x,
            y,
        }
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `bytes` to `dir/name` through a temporary file in `dir`.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(dir.join(name)).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn results_csv(rows: &[ResultRow]) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &["quantity", "value", "tolerance", "status"],
        rows.iter().map(|r| {
            vec![
                r.quantity.clone(),
                num(r.value),
                r.tolerance.map(num).unwrap_or_default(),
                status_str(r.status).to_string(),
            ]
        }),
    )
}

pub fn samples_csv(samples: &[Sample]) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &["series", "index", "x", "y"],
        samples
            .iter()
            .map(|s| vec![s.series.clone(), s.index.to_string(), num(s.x), num(s.y)]),
    )
}

pub fn status_str(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Info => "INFO",
    }
}

fn parse_status(s: &str) -> Result<Status, CliError> {
    match s {
        "PASS" => Ok(Status::Pass),
        "FAIL" => Ok(Status::Fail),
        "INFO" => Ok(Status::Info),
        other => Err(CliError::Io(format!("unknown status {other:?} in results.csv"))),
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.parse()
        .map_err(|_| CliError::Io(format!("bad number {s:?} in {what}")))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>, CliError> {
    csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>, CliError> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec.map_err(|e| CliError::Io(e.to_string()))?;
        if rec.len() != 4 {
            return Err(CliError::Io("results.csv rows need 4 fields".into()));
        }
        out.push(ResultRow {
            quantity: rec[0].to_string(),
            value: parse_f64(&rec[1], "results.csv")?,
            tolerance: if rec[2].is_empty() {
                None
            } else {
                Some(parse_f64(&rec[2], "results.csv")?)
            },
            status: parse_status(&rec[3])?,
        });
    }
    Ok(out)
}

pub fn read_samples(path: &Path) -> Result<Vec<Sample>, CliError> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec.map_err(|e| CliError::Io(e.to_string()))?;
        if rec.len() != 4 {
            return Err(CliError::Io("samples.csv rows need 4 fields".into()));
        }
        out.push(Sample {
            series: rec[0].to_string(),
            index: rec[1]
                .parse()
                .map_err(|_| CliError::Io(format!("bad index {:?} in samples.csv", &rec[1])))?,
            x: parse_f64(&rec[2], "samples.csv")?,
            y: parse_f64(&rec[3], "samples.csv")?,
        });
    }
    Ok(out)
}

/// Gnuplot-ready text per series: two columns `x y` for a single curve, or
/// `x` followed by one column per index when a series holds several.
pub fn plot_files(rows: &[ResultRow], samples: &[Sample]) -> BTreeMap<String, String> {
    let mut by_series: BTreeMap<&str, Vec<&Sample>> = BTreeMap::new();
    for s in samples {
        by_series.entry(&s.series).or_default().push(s);
    }
    let lookup = |q: &str| rows.iter().find(|r| r.quantity == q).map(|r| r.value);
    let mut files = BTreeMap::new();
    for (series, pts) in by_series {
        let mut text = format!("# {series}\n");
        if series == "decay" {
            if let (Some(rate), Some(b)) = (lookup("decay_rate"), lookup("decay_intercept")) {
                text.push_str(&format!("# fit: log|trace| = {} - {} * t\n", num(b), num(rate)));
            }
        }
        let multi = pts.iter().any(|p| p.index != pts[0].index);
        if multi {
            let width = pts.iter().map(|p| p.index).max().unwrap_or(0) + 1;
            text.push_str(&format!("# x then {width} columns by index\n"));
            let mut xs: Vec<f64> = Vec::new();
            let mut table: Vec<Vec<Option<f64>>> = Vec::new();
            for p in &pts {
                let row = match xs.iter().position(|&x| x.to_bits() == p.x.to_bits()) {
                    Some(i) => i,
                    None => {
                        xs.push(p.x);
                        table.push(vec![None; width]);
                        xs.len() - 1
                    }
                };
                table[row][p.index] = Some(p.y);
            }
            for (x, cols) in xs.iter().zip(&table) {
                text.push_str(&num(*x));
                for c in cols {
                    text.push(' ');
                    text.push_str(&c.map(num).unwrap_or_else(|| "nan".into()));
                }
                text.push('\n');
            }
        } else {
            text.push_str("# x y\n");
            for p in &pts {
                text.push_str(&format!("{} {}\n", num(p.x), num(p.y)));
            }
        }
        files.insert(format!("{series}.dat"), text);
    }
    files
}

pub fn write_plots(dir: &Path, rows: &[ResultRow], samples: &[Sample]) -> Result<Vec<String>, CliError> {
    let files = plot_files(rows, samples);
    for (name, text) in &files {
        write_atomic(dir, name, text.as_bytes())?;
    }
    Ok(files.into_keys().collect())
}
