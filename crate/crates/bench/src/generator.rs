//! Synthetic instances: a nonnegative CP model with uniform factors, sampled
//! uniformly with replacement and perturbed by Gaussian noise.

use ntc_core::{Instance, ObservedData, Sample, Shape};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub dims: Vec<usize>,
    pub rank: usize,
    pub n: usize,
    pub noise_sd: f64,
    pub seed: u64,
    /// Observe every entry exactly once instead of sampling; `n` is ignored.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub enumerate: bool,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<Shape> {
        if self.rank == 0 {
            return Err(Error::InvalidSpec("rank must be at least 1".into()));
        }
        if self.n == 0 && !self.enumerate {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "noise sd must be finite and nonnegative, got {}",
                self.noise_sd
            )));
        }
        let shape = Shape::new(self.dims.clone())?;
        if shape.pi().is_none() {
            return Err(Error::InvalidSpec("tensor has too many entries".into()));
        }
        Ok(shape)
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    /// Row-major noiseless tensor.
    pub truth: Vec<f64>,
    pub data: ObservedData,
    /// `rank * max(truth)`.
    pub lambda: f64,
}

impl Generated {
    /// Instance file contents, recording the spec so the truth can be rebuilt.
    pub fn to_instance(&self, spec: &GeneratorSpec) -> Instance {
        Instance {
            data: self.data.clone(),
            lambda: Some(self.lambda),
            generator: Some(serde_json::to_value(spec).expect("spec serializes")),
        }
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    let shape = spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let truth = truth_tensor(&shape, spec.rank, &mut rng);
    let noise = Normal::new(0.0, spec.noise_sd).expect("validated sd");
    let observe = |offset: usize, rng: &mut ChaCha8Rng| {
        let value = if spec.noise_sd > 0.0 {
            truth[offset] + noise.sample(rng)
        } else {
            truth[offset]
        };
        Sample {
            index: shape.multi_index(offset),
            value,
        }
    };
    let samples: Vec<Sample> = if spec.enumerate {
        (0..truth.len()).map(|o| observe(o, &mut rng)).collect()
    } else {
        (0..spec.n)
            .map(|_| {
                let offset = rng.gen_range(0..truth.len());
                observe(offset, &mut rng)
            })
            .collect()
    };
    let max = truth.iter().cloned().fold(0.0, f64::max);
    let lambda = spec.rank as f64 * max;
    let data = ObservedData::new(shape, samples)?;
    Ok(Generated {
        truth,
        data,
        lambda,
    })
}

/// Sum of `rank` outer products of Uniform[0, 1] factor vectors.
fn truth_tensor(shape: &Shape, rank: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dims = shape.dims();
    let factors: Vec<Vec<Vec<f64>>> = (0..rank)
        .map(|_| dims.iter().map(|&r| (0..r).map(|_| rng.gen()).collect()).collect())
        .collect();
    let total = shape.pi().expect("validated size");
    let mut truth = vec![0.0; total];
    // Expand mode by mode: prefix products over the leading modes.
    for factor in &factors {
        let mut prefix = vec![1.0];
        for (k, &r) in dims.iter().enumerate() {
            let mut next = Vec::with_capacity(prefix.len() * r);
            for &p in &prefix {
                for j in 0..r {
                    next.push(p * factor[k][j]);
                }
            }
            prefix = next;
        }
        for (t, p) in truth.iter_mut().zip(prefix) {
            *t += p;
        }
    }
    truth
}

/// Rebuilds the truth tensor recorded in an instance file, if any.
pub fn truth_from_instance(instance: &Instance) -> Result<Option<Vec<f64>>> {
    let Some(value) = &instance.generator else {
        return Ok(None);
    };
    let spec: GeneratorSpec = serde_json::from_value(value.clone())
        .map_err(|e| Error::InvalidSpec(format!("generator record: {e}")))?;
    if spec.dims != instance.data.shape().dims() {
        return Err(Error::InvalidSpec(
            "generator record does not match the instance shape".into(),
        ));
    }
    Ok(Some(generate(&spec)?.truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dims: &[usize], rank: usize, n: usize) -> GeneratorSpec {
        GeneratorSpec {
            dims: dims.to_vec(),
            rank,
            n,
            noise_sd: 0.0,
            seed: 7,
            enumerate: false,
        }
    }

    #[test]
    fn truth_matches_factor_products() {
        let s = spec(&[2, 3, 2], 2, 10);
        let shape = Shape::new(s.dims.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        let dims = shape.dims();
        let factors: Vec<Vec<Vec<f64>>> = (0..2)
            .map(|_| dims.iter().map(|&r| (0..r).map(|_| rng.gen::<f64>()).collect()).collect())
            .collect();
        let g = generate(&s).unwrap();
        for offset in 0..12 {
            let i = shape.multi_index(offset);
            let expected: f64 = factors
                .iter()
                .map(|f| f[0][i[0] as usize] * f[1][i[1] as usize] * f[2][i[2] as usize])
                .sum();
            assert!((g.truth[offset] - expected).abs() < 1e-15);
        }
        let max = g.truth.iter().cloned().fold(0.0, f64::max);
        assert_eq!(g.lambda, 2.0 * max);
    }

    #[test]
    fn noiseless_samples_are_truth_values() {
        let g = generate(&spec(&[4, 4, 4], 3, 50)).unwrap();
        assert_eq!(g.data.n(), 50);
        for s in g.data.samples() {
            let offset = g.data.shape().linear_index(&s.index);
            assert_eq!(s.value, g.truth[offset]);
        }
    }

    #[test]
    fn enumeration_observes_everything_once() {
        let mut s = spec(&[3, 4, 2], 1, 1);
        s.enumerate = true;
        let g = generate(&s).unwrap();
        assert_eq!(g.data.u(), 24);
        assert_eq!(g.data.n(), 24);
    }

    #[test]
    fn serialized_instance_is_deterministic() {
        let mut s = spec(&[5, 5, 5], 2, 40);
        s.noise_sd = 0.1;
        let a = generate(&s).unwrap().to_instance(&s).to_json();
        let b = generate(&s).unwrap().to_instance(&s).to_json();
        assert_eq!(a, b);
        let round = Instance::parse(&a).unwrap();
        assert_eq!(truth_from_instance(&round).unwrap(), Some(generate(&s).unwrap().truth));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate(&spec(&[3, 3], 0, 5)).is_err());
        assert!(generate(&spec(&[3, 3], 1, 0)).is_err());
        let mut s = spec(&[3, 3], 1, 5);
        s.noise_sd = -1.0;
        assert!(generate(&s).is_err());
        assert!(generate(&spec(&[3, 0], 1, 5)).is_err());
    }
}
