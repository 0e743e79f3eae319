//! Experiment grids and the repetition runner.

use std::fmt;
use std::str::FromStr;

use ntc_core::solver::{solve_with, SolveOptions};
use ntc_core::{make_variant, nmse};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::{generate, GeneratorSpec};
use crate::records::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// `r x r x r` for r = 10..100, n = 500.
    Order3,
    /// `10^p` for p = 4..8, n = 10,000.
    IncreasingOrder,
    /// `10^6`, n from 0.01% to 10% of the entries.
    IncreasingSamples6,
    /// `10^7`, n from 0.01% to 1% of the entries.
    IncreasingSamples7,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Order3,
        Suite::IncreasingOrder,
        Suite::IncreasingSamples6,
        Suite::IncreasingSamples7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Order3 => "order3",
            Suite::IncreasingOrder => "increasing-order",
            Suite::IncreasingSamples6 => "increasing-samples-6",
            Suite::IncreasingSamples7 => "increasing-samples-7",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

/// One instance configuration of a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub instance_id: String,
    pub dims: Vec<usize>,
    pub n: usize,
}

/// Desk-scale limits lifted by `full`.
const ORDER3_MAX_R: usize = 40;
const MAX_ORDER: usize = 6;
const MAX_SAMPLES: usize = 100_000;

/// The grid of a suite. `scale` multiplies the side length for `order3` and
/// the sample count otherwise.
pub fn suite_cells(suite: Suite, scale: f64, full: bool) -> Vec<Cell> {
    let scaled = |v: usize, min: usize| ((v as f64 * scale).round() as usize).max(min);
    let mut cells = Vec::new();
    match suite {
        Suite::Order3 => {
            for r in (10..=100).step_by(10) {
                if !full && r > ORDER3_MAX_R {
                    continue;
                }
                let r = scaled(r, 2);
                cells.push(Cell {
                    instance_id: format!("{suite}:{r}"),
                    dims: vec![r; 3],
                    n: 500,
                });
            }
        }
        Suite::IncreasingOrder => {
            for p in 4..=8 {
                if !full && p > MAX_ORDER {
                    continue;
                }
                cells.push(Cell {
                    instance_id: format!("{suite}:{p}"),
                    dims: vec![10; p],
                    n: scaled(10_000, 1),
                });
            }
        }
        Suite::IncreasingSamples6 | Suite::IncreasingSamples7 => {
            let (p, counts): (usize, &[usize]) = if suite == Suite::IncreasingSamples6 {
                (6, &[100, 1_000, 10_000, 100_000])
            } else {
                (7, &[1_000, 10_000, 100_000])
            };
            for &n in counts {
                if !full && n > MAX_SAMPLES {
                    continue;
                }
                let n = scaled(n, 1);
                cells.push(Cell {
                    instance_id: format!("{suite}:{n}"),
                    dims: vec![10; p],
                    n,
                });
            }
        }
    }
    cells
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub tol: f64,
    pub rank: usize,
    pub noise_sd: f64,
    pub base_seed: u64,
    /// Worker threads; 1 keeps timings free of contention.
    pub jobs: usize,
    pub options: SolveOptions,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            rank: DEFAULT_RANK,
            noise_sd: 0.0,
            base_seed: 0,
            jobs: 1,
            options: SolveOptions::default(),
        }
    }
}

/// CP rank of generated truth tensors.
pub const DEFAULT_RANK: usize = 2;

/// A single `(cell, version, repetition)` solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub cell: Cell,
    pub version: u8,
    pub rep: usize,
    /// Seeds both the instance and the solver; shared by all versions of a
    /// repetition so they solve the same instance.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub instance_id: String,
    pub version: u8,
    pub rep: usize,
    pub message: String,
}

impl fmt::Display for CellFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} v{} rep {}: {}",
            self.instance_id, self.version, self.rep, self.message
        )
    }
}

pub type RunOutcome = std::result::Result<RunRecord, CellFailure>;

/// Repetition seed of a cell.
pub fn derive_seed(base: u64, cell: usize, rep: usize) -> u64 {
    let mut z = base ^ ((cell as u64) << 32 | rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// All tasks, ordered by (cell, version, repetition).
pub fn plan(cells: &[Cell], versions: &[u8], reps: usize, base_seed: u64) -> Vec<Task> {
    let mut tasks = Vec::with_capacity(cells.len() * versions.len() * reps);
    for (ci, cell) in cells.iter().enumerate() {
        for &version in versions {
            for rep in 0..reps {
                tasks.push(Task {
                    cell: cell.clone(),
                    version,
                    rep,
                    seed: derive_seed(base_seed, ci, rep),
                });
            }
        }
    }
    tasks
}

pub fn run_task(task: &Task, config: &SuiteConfig) -> RunOutcome {
    let fail = |message: String| CellFailure {
        instance_id: task.cell.instance_id.clone(),
        version: task.version,
        rep: task.rep,
        message,
    };
    let spec = GeneratorSpec {
        dims: task.cell.dims.clone(),
        rank: config.rank,
        n: task.cell.n,
        noise_sd: config.noise_sd,
        seed: task.seed,
        enumerate: false,
    };
    let generated = generate(&spec).map_err(|e| fail(e.to_string()))?;
    let variant = make_variant(task.version).map_err(|e| fail(e.to_string()))?;
    let mut options = config.options.clone();
    options.reconstruct = true;
    let result = solve_with(
        &generated.data,
        generated.lambda,
        config.tol,
        variant,
        task.seed,
        &options,
    )
    .map_err(|e| fail(e.to_string()))?;
    let completed = result
        .completed
        .as_ref()
        .ok_or_else(|| fail("completed tensor unavailable".into()))?;
    let nmse = nmse(completed, &generated.truth).map_err(|e| fail(e.to_string()))?;
    Ok(RunRecord {
        instance_id: task.cell.instance_id.clone(),
        dims: generated.data.shape().display(),
        n: task.cell.n,
        version: task.version,
        rep: task.rep,
        seed: task.seed,
        nmse,
        time_s: result.wall_time.as_secs_f64(),
        iterations: result.iterations,
        sigd_steps: result.counts.descent_steps(),
        oracle_calls: result.counts.oracle_calls,
        exact_ip_calls: result.counts.exact_ip_calls,
        final_gap: result.certified_gap(),
    })
}

/// Runs every task; output order follows [`plan`] regardless of `jobs`.
pub fn run_tasks(tasks: &[Task], config: &SuiteConfig) -> Vec<RunOutcome> {
    if config.jobs <= 1 {
        return tasks.iter().map(|t| run_task(t, config)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .expect("thread pool");
    pool.install(|| tasks.par_iter().map(|t| run_task(t, config)).collect())
}

pub fn run_suite(
    suite: Suite,
    versions: &[u8],
    reps: usize,
    scale: f64,
    full: bool,
    config: &SuiteConfig,
) -> Vec<RunOutcome> {
    let cells = suite_cells(suite, scale, full);
    run_tasks(&plan(&cells, versions, reps, config.base_seed), config)
}
