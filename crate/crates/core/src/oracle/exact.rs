//! Exact minimization of a linear function over the binary rank-1 tensors
//! projected onto `U`, by depth-first branch and bound.
//!
//! The largest mode is never branched on: once every other coordinate is
//! fixed, its optimal vector follows from the sign of each group sum. Every
//! other observed coordinate is a binary branching variable.
//!
//! Bound: positions already killed by a zero coordinate contribute nothing;
//! a surviving position contributes `c_t` when all its branched coordinates
//! are fixed to one and `min(0, c_t)` otherwise. The surviving terms are
//! grouped by their coordinate in the free mode and each group is clipped at
//! zero, since that mode can still switch the whole group off.

use crate::error::{Error, Result};
use crate::tensor::{build_pattern_index, ObservedData, PatternIndex, Thetas, Vertex};

/// Largest `rho` the exact oracle accepts by default.
pub const DEFAULT_RHO_GUARD: usize = 60;

/// `min <scaled_gradient, v>` over the vertices, with the default guard.
pub fn exact_vertex_min(scaled_gradient: &[f64], data: &ObservedData) -> Result<(Vertex, f64)> {
    let pattern = build_pattern_index(data);
    exact_vertex_min_with(scaled_gradient, data, &pattern, DEFAULT_RHO_GUARD, None)
}

/// Exact minimizer with an explicit guard and an optional starting incumbent.
pub fn exact_vertex_min_with(
    scaled_gradient: &[f64],
    data: &ObservedData,
    pattern: &PatternIndex,
    rho_guard: usize,
    incumbent: Option<&Vertex>,
) -> Result<(Vertex, f64)> {
    let c = scaled_gradient;
    if c.len() != data.u() {
        return Err(Error::DimensionMismatch {
            expected: data.u(),
            got: c.len(),
        });
    }
    let mut best = Vertex::zero(data);
    let mut best_value = 0.0;
    if let Some(v) = incumbent {
        let value = v.dot(c);
        if value < best_value {
            best = v.clone();
            best_value = value;
        }
    }
    if c.iter().all(|&x| x >= 0.0) {
        return Ok((best, best_value));
    }
    let rho = data.shape().rho();
    if rho > rho_guard {
        return Err(Error::ExactOracleTooLarge {
            rho,
            guard: rho_guard,
        });
    }

    let mut search = Search::new(c, data, pattern);
    search.best_value = best_value;
    search.run(0);
    if let Some(thetas) = search.best_thetas.take() {
        let v = Vertex::new(thetas, data)?;
        let value = v.dot(c);
        if value < best_value {
            best = v;
            best_value = value;
        }
    }
    Ok((best, best_value))
}

struct Search<'a> {
    c: &'a [f64],
    pattern: &'a PatternIndex,
    p: usize,
    free_mode: usize,
    /// Branching order: (mode, coordinate).
    vars: Vec<(usize, usize)>,
    assignment: Vec<Vec<bool>>,
    dead: Vec<u16>,
    ones: Vec<u16>,
    /// Per free-mode value: sum of `lower(t)` over surviving positions.
    group: Vec<f64>,
    saved_groups: Vec<Vec<f64>>,
    best_value: f64,
    best_thetas: Option<Thetas>,
}

impl<'a> Search<'a> {
    fn new(c: &'a [f64], data: &ObservedData, pattern: &'a PatternIndex) -> Self {
        let dims = data.shape().dims();
        let p = dims.len();
        let free_mode = (0..p).max_by_key(|&k| (dims[k], std::cmp::Reverse(k))).unwrap();

        let mut modes: Vec<usize> = (0..p).filter(|&k| k != free_mode).collect();
        modes.sort_by_key(|&k| std::cmp::Reverse(dims[k]));
        let mut vars = Vec::new();
        for k in modes {
            let mut coords: Vec<(usize, f64)> = pattern
                .lists(k)
                .iter()
                .enumerate()
                .filter(|(_, list)| !list.is_empty())
                .map(|(j, list)| (j, list.iter().map(|&t| c[t as usize].abs()).sum()))
                .collect();
            coords.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            vars.extend(coords.into_iter().map(|(j, _)| (k, j)));
        }

        let mut group = vec![0.0; dims[free_mode]];
        let free_coords = &pattern.coords()[free_mode];
        let fully_fixed_at_start = p == 1;
        for (t, &ct) in c.iter().enumerate() {
            let lower = if fully_fixed_at_start { ct } else { ct.min(0.0) };
            group[free_coords[t] as usize] += lower;
        }

        Self {
            c,
            pattern,
            p,
            free_mode,
            saved_groups: vec![Vec::new(); vars.len()],
            vars,
            assignment: dims.iter().map(|&r| vec![false; r]).collect(),
            dead: vec![0; c.len()],
            ones: vec![0; c.len()],
            group,
            best_value: 0.0,
            best_thetas: None,
        }
    }

    fn bound(&self) -> f64 {
        self.group.iter().map(|&g| g.min(0.0)).sum()
    }

    fn run(&mut self, depth: usize) {
        let bound = self.bound();
        if bound >= self.best_value {
            return;
        }
        if depth == self.vars.len() {
            // Every branched coordinate is fixed, so the bound is exact.
            let mut thetas = self.assignment.clone();
            for (j, &g) in self.group.iter().enumerate() {
                thetas[self.free_mode][j] = g < 0.0;
            }
            self.best_value = bound;
            self.best_thetas = Some(thetas);
            return;
        }
        let (k, j) = self.vars[depth];
        let first = self.open_sum(k, j) < 0.0;
        for value in [first, !first] {
            self.saved_groups[depth].clone_from(&self.group);
            self.fix(k, j, value);
            self.run(depth + 1);
            self.unfix(k, j, value);
            std::mem::swap(&mut self.group, &mut self.saved_groups[depth]);
        }
    }

    fn open_sum(&self, k: usize, j: usize) -> f64 {
        self.pattern
            .positions(k, j)
            .iter()
            .filter(|&&t| self.dead[t as usize] == 0)
            .map(|&t| self.c[t as usize])
            .sum()
    }

    fn fix(&mut self, k: usize, j: usize, value: bool) {
        self.assignment[k][j] = value;
        let branched = (self.p - 1) as u16;
        let free = &self.pattern.coords()[self.free_mode];
        for &t in self.pattern.positions(k, j) {
            let t = t as usize;
            let ct = self.c[t];
            if value {
                self.ones[t] += 1;
                if self.dead[t] == 0 && self.ones[t] == branched {
                    self.group[free[t] as usize] += ct - ct.min(0.0);
                }
            } else {
                if self.dead[t] == 0 {
                    let lower = if self.ones[t] == branched { ct } else { ct.min(0.0) };
                    self.group[free[t] as usize] -= lower;
                }
                self.dead[t] += 1;
            }
        }
    }

    // Group sums are restored from the snapshot; only the counters unwind here.
    fn unfix(&mut self, k: usize, j: usize, value: bool) {
        self.assignment[k][j] = false;
        for &t in self.pattern.positions(k, j) {
            let t = t as usize;
            if value {
                self.ones[t] -= 1;
            } else {
                self.dead[t] -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Sample, Shape};
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

    // Enumerates all 2^rho theta assignments.
    fn exhaustive(c: &[f64], d: &ObservedData) -> f64 {
        let dims = d.shape().dims();
        let rho = d.shape().rho();
        let mut best = f64::INFINITY;
        for mask in 0u64..(1 << rho) {
            let mut thetas = Vec::new();
            let mut bit = 0;
            for &r in dims {
                thetas.push((0..r).map(|i| mask >> (bit + i) & 1 == 1).collect::<Vec<_>>());
                bit += r;
            }
            let v = Vertex::new(thetas, d).unwrap();
            best = best.min(v.dot(c));
        }
        best
    }

    #[test]
    fn nonnegative_gradient_gives_zero_vertex() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_data(&mut rng, &[3, 3], 5);
        let c = vec![0.5; d.u()];
        let (v, obj) = exact_vertex_min(&c, &d).unwrap();
        assert!(v.support().is_empty());
        assert_eq!(obj, 0.0);
    }

    #[test]
    fn single_negative_entry() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let d = random_data(&mut rng, &[3, 2, 2], 10);
            let mut c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(0.1..1.0)).collect();
            let t = rng.gen_range(0..d.u());
            c[t] = -3.0;
            let (v, obj) = exact_vertex_min(&c, &d).unwrap();
            assert!(obj <= -3.0 + 1e-12 || obj < 0.0);
            assert_eq!(obj, exhaustive(&c, &d));
            assert_eq!(obj, v.dot(&c));
            assert!(v.support().contains(&(t as u32)));
        }
    }

    #[test]
    fn matches_exhaustive_on_small_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dims in [vec![4], vec![2, 2], vec![3, 2, 2], vec![2, 2, 2, 2], vec![5, 4, 3]] {
            for _ in 0..40 {
                let n = rng.gen_range(1..25);
                let d = random_data(&mut rng, &dims, n);
                let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (v, obj) = exact_vertex_min(&c, &d).unwrap();
                assert_eq!(obj, exhaustive(&c, &d), "dims {dims:?}");
                assert_eq!(obj, v.dot(&c));
            }
        }
    }

    #[test]
    fn guard_rejects_large_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = random_data(&mut rng, &[30, 30, 30], 20);
        let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(matches!(
            exact_vertex_min(&c, &d),
            Err(Error::ExactOracleTooLarge { rho: 90, guard: 60 })
        ));
        let pattern = build_pattern_index(&d);
        assert!(exact_vertex_min_with(&c, &d, &pattern, 100, None).is_ok());
    }

    #[test]
    fn incumbent_is_never_worsened() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_data(&mut rng, &[3, 3, 3], 15);
        let pattern = build_pattern_index(&d);
        let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let start = Vertex::all_ones(&d);
        let (_, obj) = exact_vertex_min_with(&c, &d, &pattern, 60, Some(&start)).unwrap();
        assert!(obj <= start.dot(&c));
        assert_eq!(obj, exhaustive(&c, &d));
    }
}
