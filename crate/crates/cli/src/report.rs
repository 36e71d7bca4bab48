//! `report`: summary table and regenerated plot data for an artifact directory.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;
use crate::output::{num, read_results, read_samples, status_str, write_plots, Status};

/// Reads `results.csv` and `samples.csv` from `dir`, rewrites the `.dat`
/// files and returns the summary text.
pub fn report(dir: &Path) -> Result<String, CliError> {
    let results = dir.join("results.csv");
    let samples = dir.join("samples.csv");
    for p in [&results, &samples] {
        if !p.is_file() {
            return Err(CliError::Io(format!("missing {}", p.display())));
        }
    }
    let rows = read_results(&results)?;
    let samples = read_samples(&samples)?;
    let plots = write_plots(dir, &rows, &samples)?;
    let width = rows.iter().map(|r| r.quantity.len()).max().unwrap_or(8).max(8);
    let mut out = String::new();
    writeln!(out, "{:<width$}  {:>24}  {:>24}  status", "quantity", "value", "tolerance").unwrap();
    for r in &rows {
        writeln!(
            out,
            "{:<width$}  {:>24}  {:>24}  {}",
            r.quantity,
            num(r.value),
            r.tolerance.map(num).unwrap_or_else(|| "-".into()),
            status_str(r.status)
        )
        .unwrap();
    }
    let count = |s| rows.iter().filter(|r| r.status == s).count();
    writeln!(
        out,
        "{} pass, {} fail, {} info; plot data: {}",
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Info),
        if plots.is_empty() { "none".to_string() } else { plots.join(", ") }
    )
    .unwrap();
    Ok(out)
}
