//! JSON instance files.
//!
//! ```json
//! { "dims": [r1, ..., rp], "samples": [ { "x": [x1, ..., xp], "y": 0.5 }, ... ] }
//! ```
//!
//! Indices are 1-based. Two optional keys are carried through untouched:
//! `"lambda"` (the ball radius the instance was generated for) and
//! `"generator"` (whatever produced the file, for auditability).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{ObservedData, Sample, Shape};

#[derive(Debug, Serialize, Deserialize)]
struct RawSample {
    x: Vec<i64>,
    y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    dims: Vec<usize>,
    samples: Vec<RawSample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<serde_json::Value>,
}

/// A parsed instance file.
#[derive(Debug, Clone)]
pub struct Instance {
    pub data: ObservedData,
    pub lambda: Option<f64>,
    pub generator: Option<serde_json::Value>,
}

impl Instance {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text)?;
        let shape = Shape::new(raw.dims)?;
        let mut samples = Vec::with_capacity(raw.samples.len());
        for (i, s) in raw.samples.into_iter().enumerate() {
            if s.x.len() != shape.order() {
                return Err(Error::IndexArity {
                    sample: i,
                    got: s.x.len(),
                    expected: shape.order(),
                });
            }
            let in_range = s
                .x
                .iter()
                .zip(shape.dims())
                .all(|(&x, &r)| x >= 1 && (x as u64) <= r as u64);
            if !in_range {
                return Err(Error::IndexOutOfRange {
                    sample: i,
                    index: s.x,
                    dims: shape.dims().to_vec(),
                });
            }
            samples.push(Sample {
                index: s.x.iter().map(|&x| (x - 1) as u32).collect(),
                value: s.y,
            });
        }
        if let Some(l) = raw.lambda {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "lambda must be positive and finite, got {l}"
                )));
            }
        }
        Ok(Self {
            data: ObservedData::new(shape, samples)?,
            lambda: raw.lambda,
            generator: raw.generator,
        })
    }

    pub fn to_json(&self) -> String {
        let raw = RawInstance {
            dims: self.data.shape().dims().to_vec(),
            samples: self
                .data
                .samples()
                .iter()
                .map(|s| RawSample {
                    x: s.index.iter().map(|&x| x as i64 + 1).collect(),
                    y: s.value,
                })
                .collect(),
            lambda: self.lambda,
            generator: self.generator.clone(),
        };
        serde_json::to_string(&raw).expect("instance serializes")
    }
}
