use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One `(instance, version, repetition)` solve. Field order is the CSV
/// column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// `<suite>:<x>`, where `x` is the swept size, order or sample count.
    pub instance_id: String,
    pub dims: String,
    pub n: usize,
    pub version: u8,
    pub rep: usize,
    pub seed: u64,
    pub nmse: f64,
    pub time_s: f64,
    pub iterations: usize,
    /// Descent steps over the active set (simplex, accelerated or pairwise).
    pub sigd_steps: usize,
    pub oracle_calls: usize,
    pub exact_ip_calls: usize,
    pub final_gap: f64,
}

impl RunRecord {
    /// The suite part of the instance id.
    pub fn family(&self) -> &str {
        self.instance_id
            .split_once(':')
            .map_or(self.instance_id.as_str(), |(f, _)| f)
    }

    /// The swept value of the instance id.
    pub fn x(&self) -> &str {
        self.instance_id.split_once(':').map_or("", |(_, x)| x)
    }
}

pub fn write_records<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}
