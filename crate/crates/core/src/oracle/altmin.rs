//! Alternating minimization over rank-1 binary tensors.
//!
//! With every mode but `k` fixed, `<c, theta^(1) ⊗ ... ⊗ theta^(p)>` is linear
//! in `theta^(k)` with coefficients `c~^(k)`; the binary minimizer sets
//! `theta^(k)_j = 1` exactly when `c~^(k)_j < 0`.

use crate::tensor::{support_on_u, ObservedData, PatternIndex, Thetas, Vertex};

/// Mode-`k` reduced costs, one pass over all `u` positions.
pub fn altmin_step_naive(
    mode: usize,
    thetas: &[Vec<bool>],
    scaled_gradient: &[f64],
    data: &ObservedData,
) -> Vec<f64> {
    let coords = data.coords();
    let mut out = vec![0.0; thetas[mode].len()];
    for (t, &c) in scaled_gradient.iter().enumerate() {
        let alive = thetas
            .iter()
            .zip(coords)
            .enumerate()
            .all(|(l, (theta, col))| l == mode || theta[col[t] as usize]);
        if alive {
            out[coords[mode][t] as usize] += c;
        }
    }
    out
}

/// Same result as [`altmin_step_naive`], looping over the `r_k` values of
/// mode `k` and the positions the pattern index lists for each.
pub fn altmin_step_indexed(
    mode: usize,
    thetas: &[Vec<bool>],
    scaled_gradient: &[f64],
    pattern: &PatternIndex,
) -> Vec<f64> {
    let dead = dead_counts(thetas, pattern.coords());
    reduced_costs_indexed(mode, &thetas[mode], scaled_gradient, pattern, &dead)
}

/// Number of modes whose theta is 0 at each position.
fn dead_counts(thetas: &[Vec<bool>], coords: &[Vec<u32>]) -> Vec<u16> {
    let u = coords.first().map_or(0, Vec::len);
    let mut dead = vec![0u16; u];
    for (theta, col) in thetas.iter().zip(coords) {
        for (d, &x) in dead.iter_mut().zip(col) {
            if !theta[x as usize] {
                *d += 1;
            }
        }
    }
    dead
}

fn reduced_costs_indexed(
    mode: usize,
    theta: &[bool],
    c: &[f64],
    pattern: &PatternIndex,
    dead: &[u16],
) -> Vec<f64> {
    pattern
        .lists(mode)
        .iter()
        .zip(theta)
        .map(|(positions, &own)| {
            // A position survives the other modes iff its dead count is
            // explained entirely by this mode's own coordinate.
            let own_dead = u16::from(!own);
            let mut s = 0.0;
            for &t in positions {
                if dead[t as usize] == own_dead {
                    s += c[t as usize];
                }
            }
            s
        })
        .collect()
}

/// Which reduced-cost routine AltMin uses.
#[derive(Debug, Clone, Copy)]
pub enum AltMinKernel<'a> {
    Naive(&'a ObservedData),
    Indexed(&'a PatternIndex),
}

impl AltMinKernel<'_> {
    fn coords(&self) -> &[Vec<u32>] {
        match self {
            AltMinKernel::Naive(d) => d.coords(),
            AltMinKernel::Indexed(p) => p.coords(),
        }
    }
}

/// Output of one AltMin run.
#[derive(Debug, Clone)]
pub struct AltMinOutcome {
    pub vertex: Vertex,
    /// `<scaled_gradient, vertex>`.
    pub objective: f64,
    /// Linear objective after each full sweep.
    pub sweep_objectives: Vec<f64>,
}

/// Cycles the modes from `start` until a full sweep improves the linear
/// objective by less than `tol` (or `max_sweeps` is reached).
pub fn altmin(
    start: Thetas,
    scaled_gradient: &[f64],
    kernel: AltMinKernel<'_>,
    tol: f64,
    max_sweeps: usize,
) -> AltMinOutcome {
    let mut thetas = start;
    let p = thetas.len();
    let coords = kernel.coords();
    let u = scaled_gradient.len();
    let mut dead = match kernel {
        AltMinKernel::Indexed(pattern) => dead_counts(&thetas, pattern.coords()),
        AltMinKernel::Naive(_) => Vec::new(),
    };

    let mut previous: f64 = support_on_u(&thetas, coords)
        .iter()
        .map(|&t| scaled_gradient[t as usize])
        .sum();
    let mut sweep_objectives = Vec::new();

    for _ in 0..max_sweeps.max(1) {
        let mut objective = 0.0;
        for k in 0..p {
            let reduced = match kernel {
                AltMinKernel::Naive(data) => {
                    altmin_step_naive(k, &thetas, scaled_gradient, data)
                }
                AltMinKernel::Indexed(pattern) => {
                    reduced_costs_indexed(k, &thetas[k], scaled_gradient, pattern, &dead)
                }
            };
            for (j, &rc) in reduced.iter().enumerate() {
                let next = rc < 0.0;
                if thetas[k][j] != next {
                    thetas[k][j] = next;
                    if let AltMinKernel::Indexed(pattern) = kernel {
                        for &t in pattern.positions(k, j) {
                            let d = &mut dead[t as usize];
                            if next {
                                *d -= 1;
                            } else {
                                *d += 1;
                            }
                        }
                    }
                }
            }
            if k + 1 == p {
                objective = reduced.iter().filter(|&&rc| rc < 0.0).sum();
            }
        }
        sweep_objectives.push(objective);
        let improvement = previous - objective;
        previous = objective;
        if improvement < tol {
            break;
        }
    }

    let support = support_on_u(&thetas, coords);
    let objective = support.iter().map(|&t| scaled_gradient[t as usize]).sum();
    AltMinOutcome {
        vertex: Vertex::from_parts(thetas, support, u),
        objective,
        sweep_objectives,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{build_pattern_index, Sample, Shape};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(rng: &mut ChaCha8Rng, dims: &[usize], n: usize) -> ObservedData {
        let samples = (0..n)
            .map(|_| Sample {
                index: dims.iter().map(|&r| rng.gen_range(0..r as u32)).collect(),
                value: 0.0,
            })
            .collect();
        ObservedData::new(Shape::new(dims.to_vec()).unwrap(), samples).unwrap()
    }

    fn random_thetas(rng: &mut ChaCha8Rng, dims: &[usize]) -> Thetas {
        dims.iter()
            .map(|&r| (0..r).map(|_| rng.gen::<bool>()).collect())
            .collect()
    }

    // Per-(j, t) double loop with explicit products.
    fn brute_reduced(mode: usize, thetas: &Thetas, c: &[f64], d: &ObservedData) -> Vec<f64> {
        (0..thetas[mode].len())
            .map(|j| {
                let mut s = 0.0;
                for (t, &ct) in c.iter().enumerate() {
                    let idx = d.unique_index(t);
                    if idx[mode] as usize != j {
                        continue;
                    }
                    let mut prod = 1.0;
                    for (l, theta) in thetas.iter().enumerate() {
                        if l != mode {
                            prod *= if theta[idx[l] as usize] { 1.0 } else { 0.0 };
                        }
                    }
                    s += ct * prod;
                }
                s
            })
            .collect()
    }

    #[test]
    fn collapses_to_group_sums_when_other_modes_are_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_data(&mut rng, &[3, 4], 10);
        let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let thetas = vec![vec![false, true, false], vec![true; 4]];
        let got = altmin_step_naive(0, &thetas, &c, &d);
        for (j, g) in got.iter().enumerate() {
            let expect: f64 = (0..d.u())
                .filter(|&t| d.coords()[0][t] as usize == j)
                .map(|t| c[t])
                .sum();
            assert!((g - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_other_mode_gives_zero_reduced_costs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_data(&mut rng, &[3, 3, 2], 12);
        let pattern = build_pattern_index(&d);
        let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let thetas = vec![vec![true; 3], vec![false; 3], vec![true; 2]];
        assert!(altmin_step_naive(0, &thetas, &c, &d).iter().all(|&v| v == 0.0));
        assert!(altmin_step_indexed(0, &thetas, &c, &pattern)
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn naive_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let d = random_data(&mut rng, &[3, 3, 3], 8);
            let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let thetas = random_thetas(&mut rng, &[3, 3, 3]);
            for k in 0..3 {
                let a = altmin_step_naive(k, &thetas, &c, &d);
                let b = brute_reduced(k, &thetas, &c, &d);
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn indexed_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let p = rng.gen_range(1..5);
            let dims: Vec<usize> = (0..p).map(|_| rng.gen_range(1..6)).collect();
            let n = rng.gen_range(0..40);
            let d = random_data(&mut rng, &dims, n);
            let pattern = build_pattern_index(&d);
            let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let thetas = random_thetas(&mut rng, &dims);
            for k in 0..p {
                let a = altmin_step_naive(k, &thetas, &c, &d);
                let b = altmin_step_indexed(k, &thetas, &c, &pattern);
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn empty_data_gives_zero_vector() {
        let d = random_data(&mut ChaCha8Rng::seed_from_u64(0), &[4, 2], 0);
        let pattern = build_pattern_index(&d);
        let thetas = vec![vec![true; 4], vec![true; 2]];
        assert_eq!(altmin_step_indexed(0, &thetas, &[], &pattern), vec![0.0; 4]);
        assert_eq!(altmin_step_naive(1, &thetas, &[], &d), vec![0.0; 2]);
    }

    #[test]
    fn nonnegative_gradient_yields_zero_vertex() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_data(&mut rng, &[3, 2, 4], 15);
        let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let start = vec![vec![true; 3], vec![true; 2], vec![true; 4]];
        let out = altmin(start, &c, AltMinKernel::Naive(&d), 1e-9, 100);
        assert!(out.vertex.support().is_empty());
        assert_eq!(out.objective, 0.0);
    }

    #[test]
    fn negative_gradient_keeps_all_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = random_data(&mut rng, &[3, 2, 4], 15);
        let pattern = build_pattern_index(&d);
        let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..-0.1)).collect();
        let start = vec![vec![true; 3], vec![true; 2], vec![true; 4]];
        let out = altmin(start.clone(), &c, AltMinKernel::Indexed(&pattern), 1e-9, 100);
        // Unobserved coordinates have zero reduced cost and are switched off,
        // but every observed position stays in the support.
        assert_eq!(out.vertex.support().len(), d.u());
        let total: f64 = c.iter().sum();
        assert!((out.objective - total).abs() < 1e-12);
    }

    #[test]
    fn kernels_follow_identical_trajectories() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let dims = [4, 3, 5];
            let d = random_data(&mut rng, &dims, 40);
            let pattern = build_pattern_index(&d);
            let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let start = random_thetas(&mut rng, &dims);
            let a = altmin(start.clone(), &c, AltMinKernel::Naive(&d), 1e-12, 100);
            let b = altmin(start, &c, AltMinKernel::Indexed(&pattern), 1e-12, 100);
            assert_eq!(a.vertex, b.vertex);
            assert_eq!(a.sweep_objectives, b.sweep_objectives);
        }
    }

    #[test]
    fn sweep_objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let dims = [5, 4, 3, 2];
            let d = random_data(&mut rng, &dims, 60);
            let pattern = build_pattern_index(&d);
            let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let start = random_thetas(&mut rng, &dims);
            let out = altmin(start, &c, AltMinKernel::Indexed(&pattern), 0.0, 50);
            for w in out.sweep_objectives.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }
}
