#![allow(dead_code)]

use ntc_core::{ObservedData, Sample, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Full truth tensor of a nonnegative rank-`rank` CP model with uniform factors.
pub fn low_rank_truth(rng: &mut ChaCha8Rng, shape: &Shape, rank: usize) -> Vec<f64> {
    let factors: Vec<Vec<Vec<f64>>> = (0..rank)
        .map(|_| shape.dims().iter().map(|&r| (0..r).map(|_| rng.gen()).collect()).collect())
        .collect();
    (0..shape.pi().unwrap())
        .map(|offset| {
            let index = shape.multi_index(offset);
            factors
                .iter()
                .map(|f| f.iter().zip(&index).map(|(v, &i)| v[i as usize]).product::<f64>())
                .sum()
        })
        .collect()
}

/// Samples `n` entries of `truth` uniformly with replacement; returns the data
/// and `lambda = rank * max(truth)`.
pub fn sampled_instance(seed: u64, dims: &[usize], rank: usize, n: usize) -> (ObservedData, Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = Shape::new(dims.to_vec()).unwrap();
    let truth = low_rank_truth(&mut rng, &shape, rank);
    let pi = truth.len();
    let samples = (0..n)
        .map(|_| {
            let offset = rng.gen_range(0..pi);
            Sample {
                index: shape.multi_index(offset),
                value: truth[offset],
            }
        })
        .collect();
    let lambda = rank as f64 * truth.iter().cloned().fold(0.0, f64::max);
    (ObservedData::new(shape, samples).unwrap(), truth, lambda)
}

/// Every entry observed once.
pub fn fully_observed(shape: &Shape, values: &[f64]) -> ObservedData {
    let samples = values
        .iter()
        .enumerate()
        .map(|(offset, &value)| Sample {
            index: shape.multi_index(offset),
            value,
        })
        .collect();
    ObservedData::new(shape.clone(), samples).unwrap()
}

/// All theta assignments of a shape as bitmasks, decoded to the 0/1 tensor.
pub fn all_vertex_tensors(shape: &Shape) -> Vec<Vec<f64>> {
    let dims = shape.dims();
    let rho = shape.rho();
    (0u64..1 << rho)
        .map(|mask| {
            (0..shape.pi().unwrap())
                .map(|offset| {
                    let index = shape.multi_index(offset);
                    let mut base = 0;
                    let on = index.iter().zip(dims).all(|(&i, &r)| {
                        let bit = mask >> (base + i as usize) & 1 == 1;
                        base += r;
                        bit
                    });
                    if on {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}
