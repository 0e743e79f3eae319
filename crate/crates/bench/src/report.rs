use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::stats::SummaryRow;

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub x: String,
    pub version: u8,
    pub nmse_mean: f64,
    pub nmse_se: f64,
    pub time_mean: f64,
    pub time_se: f64,
}

/// Splits summary rows by suite family (the part of the instance id before
/// `:`).
pub fn plot_data(rows: &[SummaryRow]) -> BTreeMap<String, Vec<PlotRow>> {
    let mut out: BTreeMap<String, Vec<PlotRow>> = BTreeMap::new();
    for r in rows {
        let (family, x) = r
            .instance_id
            .split_once(':')
            .unwrap_or((r.instance_id.as_str(), ""));
        out.entry(family.to_string()).or_default().push(PlotRow {
            x: x.to_string(),
            version: r.version,
            nmse_mean: r.nmse_mean,
            nmse_se: r.nmse_se,
            time_mean: r.time_mean,
            time_se: r.time_se,
        });
    }
    out
}

/// Writes `<dir>/<family>.csv` for every family; returns the paths written.
pub fn write_plot_data(dir: &Path, rows: &[SummaryRow]) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (family, plot_rows) in plot_data(rows) {
        let path = dir.join(format!("{family}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        for r in &plot_rows {
            w.serialize(r)?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
