use serde::Serialize;

use crate::error::{Error, Result};
use crate::records::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(count)`; 0 for a single value.
    pub se: f64,
    pub min: f64,
    /// Lower middle element for even counts.
    pub median: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count as f64;
    let se = if count > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
        (var / count as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Summary {
        count,
        mean,
        se,
        min: sorted[0],
        median: sorted[(count - 1) / 2],
        max: sorted[count - 1],
    })
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub instance_id: String,
    pub dims: String,
    pub n: usize,
    pub version: u8,
    pub reps: usize,
    pub nmse_mean: f64,
    pub nmse_se: f64,
    pub time_mean: f64,
    pub time_se: f64,
    pub time_min: f64,
    pub time_median: f64,
    pub time_max: f64,
}

/// Groups by `(instance_id, version)` in order of first appearance.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<SummaryRow>> {
    let mut groups: Vec<(&RunRecord, Vec<&RunRecord>)> = Vec::new();
    for r in records {
        match groups
            .iter_mut()
            .find(|(head, _)| head.instance_id == r.instance_id && head.version == r.version)
        {
            Some((_, members)) => members.push(r),
            None => groups.push((r, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(head, members)| {
            let nmse: Vec<f64> = members.iter().map(|r| r.nmse).collect();
            let time: Vec<f64> = members.iter().map(|r| r.time_s).collect();
            let nmse = summarize(&nmse)?;
            let time = summarize(&time)?;
            Ok(SummaryRow {
                instance_id: head.instance_id.clone(),
                dims: head.dims.clone(),
                n: head.n,
                version: head.version,
                reps: members.len(),
                nmse_mean: nmse.mean,
                nmse_se: nmse.se,
                time_mean: time.mean,
                time_se: time.se,
                time_min: time.min,
                time_median: time.median,
                time_max: time.max,
            })
        })
        .collect()
}
