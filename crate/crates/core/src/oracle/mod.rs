//! Weak-separation oracle over the vertices of the unit polytope.
//!
//! A request carries the scaled gradient `lambda * c` over `U`, the value
//! `cmin = <lambda * c, x>` at the current iterate and a target gap `phi`.
//! The oracle first runs alternating minimization from up to `restarts`
//! starting points and falls back to the exact branch-and-bound minimizer
//! when no restart finds a strictly improving vertex.

pub mod altmin;
pub mod exact;
pub mod lp;

use rand::Rng;

use crate::error::Result;
use crate::tensor::{build_pattern_index, ObservedData, PatternIndex, Thetas, Vertex};

pub use altmin::{altmin, altmin_step_indexed, altmin_step_naive, AltMinKernel, AltMinOutcome};
pub use exact::{exact_vertex_min, exact_vertex_min_with, DEFAULT_RHO_GUARD};
pub use lp::{build_ip_model, emit_ip_model, LpModel};

#[derive(Debug, Clone)]
pub struct OracleRequest {
    pub scaled_gradient: Vec<f64>,
    pub cmin: f64,
    /// Target improvement. `f64::INFINITY` forces the exact path after the
    /// heuristic restarts.
    pub gap: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    /// A vertex improving by at least the target.
    SeparatedAtTarget,
    /// Heuristic vertex with a positive improvement below the target.
    SeparatedBelowTarget,
    /// The exact minimizer; its improvement is the Frank-Wolfe gap.
    ExactMinimum,
}

#[derive(Debug, Clone)]
pub struct OracleAnswer {
    pub vertex: Vertex,
    /// `cmin - <scaled_gradient, vertex>`.
    pub improvement: f64,
    pub status: OracleStatus,
    pub restarts: usize,
}

/// How AltMin computes its reduced costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedCostMode {
    /// One loop over all observed positions.
    Naive,
    /// Loop over mode values; the grouping is rebuilt on every AltMin run.
    IndexRebuilt,
    /// Loop over mode values using the grouping built once per solve.
    IndexCached,
}

#[derive(Debug, Clone)]
pub struct SeparationConfig {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub rho_guard: usize,
    pub mode: ReducedCostMode,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        Self {
            restarts: 100,
            max_sweeps: 1000,
            rho_guard: DEFAULT_RHO_GUARD,
            mode: ReducedCostMode::IndexCached,
        }
    }
}

/// Bernoulli(1/2) start for every theta coordinate.
pub fn random_start<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Thetas {
    dims.iter()
        .map(|&r| (0..r).map(|_| rng.gen::<bool>()).collect())
        .collect()
}

/// Runs AltMin restarts, then the exact minimizer when needed.
///
/// `pattern` is the per-solve grouping of `U`; it always backs the exact
/// minimizer and backs AltMin only under [`ReducedCostMode::IndexCached`].
/// When `all_ones_first` is set the first restart starts from the all-ones
/// vertex instead of a random one.
pub fn weak_separation<R: Rng + ?Sized>(
    request: &OracleRequest,
    data: &ObservedData,
    pattern: &PatternIndex,
    config: &SeparationConfig,
    rng: &mut R,
    all_ones_first: bool,
) -> Result<OracleAnswer> {
    let c = &request.scaled_gradient;
    let dims = data.shape().dims();
    let mut best: Option<(Vertex, f64)> = None;
    let mut restarts = 0;

    for r in 0..config.restarts {
        restarts += 1;
        let start = if r == 0 && all_ones_first {
            dims.iter().map(|&len| vec![true; len]).collect()
        } else {
            random_start(dims, rng)
        };
        let outcome = match config.mode {
            ReducedCostMode::Naive => {
                altmin(start, c, AltMinKernel::Naive(data), request.tol, config.max_sweeps)
            }
            ReducedCostMode::IndexRebuilt => {
                let local = build_pattern_index(data);
                altmin(start, c, AltMinKernel::Indexed(&local), request.tol, config.max_sweeps)
            }
            ReducedCostMode::IndexCached => {
                altmin(start, c, AltMinKernel::Indexed(pattern), request.tol, config.max_sweeps)
            }
        };
        let improvement = request.cmin - outcome.objective;
        if request.gap.is_finite() && improvement >= request.gap {
            return Ok(OracleAnswer {
                vertex: outcome.vertex,
                improvement,
                status: OracleStatus::SeparatedAtTarget,
                restarts,
            });
        }
        if best.as_ref().is_none_or(|(_, g)| improvement > *g) {
            best = Some((outcome.vertex, improvement));
        }
    }

    if request.gap.is_finite() {
        if let Some((vertex, improvement)) = &best {
            if *improvement > 0.0 {
                return Ok(OracleAnswer {
                    vertex: vertex.clone(),
                    improvement: *improvement,
                    status: OracleStatus::SeparatedBelowTarget,
                    restarts,
                });
            }
        }
    }

    let (vertex, objective) =
        exact_vertex_min_with(c, data, pattern, config.rho_guard, best.as_ref().map(|b| &b.0))?;
    Ok(OracleAnswer {
        vertex,
        improvement: request.cmin - objective,
        status: OracleStatus::ExactMinimum,
        restarts,
    })
}

/// Skips the heuristic and returns the exact minimizer.
pub fn exact_separation(
    request: &OracleRequest,
    data: &ObservedData,
    pattern: &PatternIndex,
    rho_guard: usize,
) -> Result<OracleAnswer> {
    let (vertex, objective) =
        exact_vertex_min_with(&request.scaled_gradient, data, pattern, rho_guard, None)?;
    Ok(OracleAnswer {
        vertex,
        improvement: request.cmin - objective,
        status: OracleStatus::ExactMinimum,
        restarts: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Sample, Shape};
    use rand::SeedableRng;
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

    #[test]
    fn tiny_target_is_met_on_first_restart() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_data(&mut rng, &[3, 3, 3], 12);
        let pattern = build_pattern_index(&d);
        let mut c = vec![-0.5; d.u()];
        c[4] = -1.0;
        let req = OracleRequest {
            scaled_gradient: c.clone(),
            cmin: 0.0,
            gap: 1e-12,
            tol: 1e-9,
        };
        let ans = weak_separation(&req, &d, &pattern, &SeparationConfig::default(), &mut rng, true)
            .unwrap();
        assert_eq!(ans.status, OracleStatus::SeparatedAtTarget);
        assert_eq!(ans.restarts, 1);
        assert!((ans.improvement - (req.cmin - ans.vertex.dot(&c))).abs() < 1e-10);
    }

    #[test]
    fn nonnegative_gradient_at_zero_iterate_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_data(&mut rng, &[3, 3, 3], 12);
        let pattern = build_pattern_index(&d);
        let req = OracleRequest {
            scaled_gradient: vec![0.25; d.u()],
            cmin: 0.0,
            gap: 0.1,
            tol: 1e-9,
        };
        let ans = weak_separation(&req, &d, &pattern, &SeparationConfig::default(), &mut rng, true)
            .unwrap();
        assert_eq!(ans.status, OracleStatus::ExactMinimum);
        assert_eq!(ans.improvement, 0.0);
        assert!(ans.vertex.support().is_empty());
    }

    #[test]
    fn infinite_target_always_ends_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_data(&mut rng, &[2, 3, 2], 10);
        let pattern = build_pattern_index(&d);
        let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let req = OracleRequest {
            scaled_gradient: c.clone(),
            cmin: 0.3,
            gap: f64::INFINITY,
            tol: 1e-9,
        };
        let config = SeparationConfig {
            restarts: 5,
            ..Default::default()
        };
        let ans = weak_separation(&req, &d, &pattern, &config, &mut rng, true).unwrap();
        assert_eq!(ans.status, OracleStatus::ExactMinimum);
        assert_eq!(ans.restarts, 5);
        let (_, exact) = exact_vertex_min(&c, &d).unwrap();
        assert_eq!(ans.improvement, 0.3 - exact);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let d = random_data(&mut rng, &[4, 4, 4], 30);
            let pattern = build_pattern_index(&d);
            let mut out = Vec::new();
            for gap in [2.0, 0.5, 0.1, 0.01] {
                let c: Vec<f64> = (0..d.u()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let req = OracleRequest {
                    scaled_gradient: c,
                    cmin: 0.0,
                    gap,
                    tol: 1e-9,
                };
                let ans = weak_separation(
                    &req,
                    &d,
                    &pattern,
                    &SeparationConfig::default(),
                    &mut rng,
                    false,
                )
                .unwrap();
                out.push((ans.status, ans.restarts, ans.vertex.thetas().to_vec()));
            }
            out
        };
        assert_eq!(run(), run());
    }
}
