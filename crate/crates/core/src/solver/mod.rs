//! Blended conditional gradients over the projected nonnegative tensor
//! polytope, with the simplex-descent, accelerated, and pairwise inner steps.
//!
//! The iterate lives in the unit polytope projected onto `U`; the loss is
//! evaluated at `lambda * x` and the completed tensor is rescaled by `lambda`
//! at the end. Each iteration compares `<lambda c, a - f>` for the away and
//! local Frank-Wolfe vertices of the active set against the gap estimate
//! `phi`: above it a descent step over the active set is taken, below it the
//! weak-separation oracle is called.
//!
//! Termination requires the certificate `objective - lower_bound < tol`. When
//! `phi` drops below `tol` first, the next oracle call goes straight to the
//! exact minimizer to produce that certificate; instances too large for the
//! exact minimizer stop on `phi < tol` alone.

mod simplex;
mod variant;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objective::LossContext;
use crate::oracle::{
    self, emit_ip_model, OracleRequest, OracleStatus, ReducedCostMode, SeparationConfig,
};
use crate::tensor::{build_pattern_index, ActiveSet, ObservedData, PatternIndex, Shape, Storage, Vertex};

pub use simplex::project_onto_simplex;
pub use variant::{all_variants, make_variant, VariantConfig};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_iterations: usize,
    pub altmin_restarts: usize,
    pub altmin_max_sweeps: usize,
    /// Largest `rho` handed to the exact oracle.
    pub exact_rho_guard: usize,
    /// Inner iteration cap of the accelerated simplex descent.
    pub nag_max_inner: usize,
    pub trace: bool,
    /// Check every invariant after every iteration and collect violations.
    pub audit: bool,
    /// Write the separation model of every exact oracle call as
    /// `oracle_<iter>.lp` into this directory.
    pub dump_ip_dir: Option<PathBuf>,
    /// Materialize the full completed tensor in the result.
    pub reconstruct: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            altmin_restarts: 100,
            altmin_max_sweeps: 1000,
            exact_rho_guard: oracle::DEFAULT_RHO_GUARD,
            nag_max_inner: 100,
            trace: false,
            audit: false,
            dump_ip_dir: None,
            reconstruct: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    SimplexDescent,
    Accelerated,
    Pairwise,
    OracleAtTarget,
    OracleBelowTarget,
    OracleExact,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::SimplexDescent => "sigd",
            StepKind::Accelerated => "nag",
            StepKind::Pairwise => "bpcg",
            StepKind::OracleAtTarget => "lpsep-target",
            StepKind::OracleBelowTarget => "lpsep-below",
            StepKind::OracleExact => "lpsep-exact",
        }
    }

    pub fn is_descent(self) -> bool {
        matches!(
            self,
            StepKind::SimplexDescent | StepKind::Accelerated | StepKind::Pairwise
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `objective - lower_bound < tol`.
    Certified,
    /// `phi < tol` without a certificate (exact oracle out of reach).
    GapEstimate,
    IterationLimit,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepCounts {
    pub sigd: usize,
    pub nag: usize,
    pub bpcg: usize,
    pub oracle_calls: usize,
    pub exact_ip_calls: usize,
    pub altmin_runs: usize,
}

impl StepCounts {
    pub fn descent_steps(&self) -> usize {
        self.sigd + self.nag + self.bpcg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub step: StepKind,
    pub objective: f64,
    pub gap: f64,
    pub lower_bound: f64,
    pub active_size: usize,
}

#[derive(Debug, Clone, Default)]
pub struct AuditReport {
    pub iterations_checked: usize,
    pub violations: Vec<String>,
    /// Largest `|pro_sparse - pro_dense|` seen.
    pub max_pro_discrepancy: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub lambda: f64,
    /// Row-major full tensor, present when reconstruction was requested and
    /// the tensor fits in memory.
    pub completed: Option<Vec<f64>>,
    /// Completed values on `U` (already scaled by `lambda`).
    pub values_on_u: Vec<f64>,
    pub objective: f64,
    pub lower_bound: f64,
    pub termination: Termination,
    pub iterations: usize,
    pub counts: StepCounts,
    pub wall_time: Duration,
    pub vertices: Vec<Vertex>,
    pub weights: Vec<f64>,
    pub trace: Vec<TraceRow>,
    pub audit: Option<AuditReport>,
}

impl SolveResult {
    /// `objective - lower_bound`.
    pub fn certified_gap(&self) -> f64 {
        self.objective - self.lower_bound
    }

    /// Completed value at a 0-based index.
    pub fn value_at(&self, index: &[u32]) -> f64 {
        self.vertices
            .iter()
            .zip(&self.weights)
            .filter(|(v, _)| v.value_at(index))
            .map(|(_, &w)| self.lambda * w)
            .sum()
    }
}

/// Row-major full tensor `lambda * sum_j w_j v_j`.
pub fn reconstruct(shape: &Shape, vertices: &[Vertex], weights: &[f64], lambda: f64) -> Vec<f64> {
    let total = shape.pi().expect("tensor size overflows usize");
    let dims = shape.dims();
    let mut out = vec![0.0; total];
    for (vertex, &w) in vertices.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let supports: Vec<Vec<usize>> = vertex
            .thetas()
            .iter()
            .map(|theta| (0..theta.len()).filter(|&j| theta[j]).collect())
            .collect();
        if supports.iter().any(Vec::is_empty) {
            continue;
        }
        // Odometer over the product of the mode supports.
        let mut pos = vec![0usize; dims.len()];
        loop {
            let offset = pos
                .iter()
                .zip(&supports)
                .zip(dims)
                .fold(0usize, |acc, ((&i, s), &r)| acc * r + s[i]);
            out[offset] += lambda * w;
            let mut k = dims.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                pos[k] += 1;
                if pos[k] < supports[k].len() {
                    break;
                }
                pos[k] = 0;
                if k == 0 {
                    k = usize::MAX;
                    break;
                }
            }
            if k == usize::MAX {
                break;
            }
        }
    }
    out
}

/// Mutable solver state; the iterate is kept in the unit polytope.
#[derive(Debug, Clone)]
pub struct SolverState {
    iterate: Vec<f64>,
    active: ActiveSet,
    gap: f64,
    objective: f64,
    lower_bound: f64,
    iteration: usize,
    counts: StepCounts,
    momentum: Option<Momentum>,
    first_oracle: bool,
}

impl SolverState {
    pub fn iterate(&self) -> &[f64] {
        &self.iterate
    }

    pub fn active(&self) -> &ActiveSet {
        &self.active
    }

    /// The gap estimate `phi`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn counts(&self) -> &StepCounts {
        &self.counts
    }
}

#[derive(Debug, Clone)]
struct Momentum {
    previous: Vec<f64>,
    t: f64,
    revision: u64,
    lipschitz: f64,
}

/// A single solve, steppable for inspection.
pub struct Solver<'a> {
    data: &'a ObservedData,
    ctx: LossContext,
    pattern: PatternIndex,
    variant: VariantConfig,
    tol: f64,
    options: SolveOptions,
    separation: SeparationConfig,
    rng: ChaCha8Rng,
    state: SolverState,
    termination: Option<Termination>,
    gradient: Vec<f64>,
    scratch: Vec<f64>,
    trace: Vec<TraceRow>,
    audit: Option<AuditReport>,
}

impl<'a> Solver<'a> {
    pub fn new(
        data: &'a ObservedData,
        lambda: f64,
        tol: f64,
        variant: VariantConfig,
        seed: u64,
        options: SolveOptions,
    ) -> Result<Self> {
        variant.validate()?;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive and finite, got {tol}"
            )));
        }
        let ctx = LossContext::new(data, lambda)?;
        let storage = if variant.sparse {
            Storage::Sparse
        } else {
            Storage::Dense
        };
        let active = ActiveSet::new(Vertex::all_ones(data), storage);
        let iterate = vec![1.0; data.u()];
        let objective = ctx.loss_scaled(&iterate, lambda);
        let separation = SeparationConfig {
            restarts: options.altmin_restarts,
            max_sweeps: options.altmin_max_sweeps,
            rho_guard: options.exact_rho_guard,
            mode: match (variant.index, variant.pattern) {
                (false, _) => ReducedCostMode::Naive,
                (true, false) => ReducedCostMode::IndexRebuilt,
                (true, true) => ReducedCostMode::IndexCached,
            },
        };
        let audit = options.audit.then(AuditReport::default);
        Ok(Self {
            data,
            ctx,
            pattern: build_pattern_index(data),
            variant,
            tol,
            separation,
            rng: ChaCha8Rng::seed_from_u64(seed),
            state: SolverState {
                iterate,
                active,
                gap: f64::INFINITY,
                objective,
                lower_bound: 0.0,
                iteration: 0,
                counts: StepCounts::default(),
                momentum: None,
                first_oracle: true,
            },
            termination: None,
            gradient: vec![0.0; data.u()],
            scratch: vec![0.0; data.u()],
            trace: Vec::new(),
            audit,
            options,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn termination(&self) -> Option<Termination> {
        self.termination
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    fn lambda(&self) -> f64 {
        self.ctx.lambda()
    }

    fn exact_available(&self) -> bool {
        self.data.shape().rho() <= self.options.exact_rho_guard
    }

    /// Runs to termination.
    pub fn run(&mut self) -> Result<()> {
        while self.step()?.is_some() {}
        Ok(())
    }

    /// One outer iteration. Returns `None` once the solve has terminated.
    pub fn step(&mut self) -> Result<Option<StepKind>> {
        if self.termination.is_some() {
            return Ok(None);
        }
        if self.state.objective - self.state.lower_bound < self.tol {
            self.termination = Some(Termination::Certified);
            return Ok(None);
        }
        let mut force_exact = false;
        if self.state.gap < self.tol {
            if self.exact_available() {
                force_exact = true;
            } else {
                self.termination = Some(Termination::GapEstimate);
                return Ok(None);
            }
        }
        if self.state.iteration >= self.options.max_iterations {
            self.termination = Some(Termination::IterationLimit);
            return Ok(None);
        }
        self.state.iteration += 1;
        let before = (self.state.objective, self.state.lower_bound);

        self.refresh_gradient();
        let lambda = self.lambda();
        let pro = self.state.active.pro(&self.gradient, lambda);
        if let Some(audit) = self.audit.as_mut() {
            let dense = self.state.active.pro_dense(&self.gradient, lambda);
            let sparse = self.state.active.pro_sparse(&self.gradient, lambda);
            for (a, b) in dense.iter().zip(&sparse) {
                audit.max_pro_discrepancy = audit.max_pro_discrepancy.max((a - b).abs());
            }
        }
        let (away, fw) = away_and_fw(&pro);

        let mut kind = None;
        if !force_exact && pro[away] - pro[fw] >= self.state.gap {
            kind = self.descent(&pro)?;
        }
        let kind = match kind {
            Some(k) => k,
            None => self.lpsep_step(force_exact)?,
        };

        if self.options.trace {
            self.trace.push(TraceRow {
                iteration: self.state.iteration,
                step: kind,
                objective: self.state.objective,
                gap: self.state.gap,
                lower_bound: self.state.lower_bound,
                active_size: self.state.active.len(),
            });
        }
        if self.audit.is_some() {
            self.check_invariants(kind, before);
        }
        Ok(Some(kind))
    }

    fn refresh_gradient(&mut self) {
        let lambda = self.lambda();
        self.ctx
            .gradient_scaled_into(&self.state.iterate, lambda, &mut self.gradient);
    }

    /// Descent step chosen by the variant; `None` when it made no progress.
    fn descent(&mut self, pro: &[f64]) -> Result<Option<StepKind>> {
        let (progressed, kind) = if self.variant.bpcg {
            (self.bpcg_step(pro), StepKind::Pairwise)
        } else if self.variant.nag {
            (self.nag_descent(), StepKind::Accelerated)
        } else {
            (self.sigd_step(pro), StepKind::SimplexDescent)
        };
        if !progressed {
            return Ok(None);
        }
        match kind {
            StepKind::Pairwise => self.state.counts.bpcg += 1,
            StepKind::Accelerated => self.state.counts.nag += 1,
            _ => self.state.counts.sigd += 1,
        }
        Ok(Some(kind))
    }

    /// Evaluates candidate weights over the current active set (plus an
    /// optional extra vertex appended last) into `scratch`; returns the loss.
    fn evaluate(&mut self, weights: &[f64], extra: Option<(&Vertex, f64)>) -> f64 {
        self.state.active.combine_into(weights, &mut self.scratch);
        if let Some((vertex, w)) = extra {
            for &t in vertex.support() {
                self.scratch[t as usize] += w;
            }
        }
        self.ctx.loss_scaled(&self.scratch, self.lambda())
    }

    /// Adopts `weights` and the point in `scratch`.
    fn commit(&mut self, weights: Vec<f64>, extra: Option<(Vertex, f64)>, loss: f64) {
        self.state.active.set_weights(weights);
        if let Some((vertex, w)) = extra {
            self.state.active.push(vertex, w);
        }
        self.state.active.drop_zero_weights();
        std::mem::swap(&mut self.state.iterate, &mut self.scratch);
        self.state.objective = loss;
    }

    /// A single simplex gradient step on the weights.
    pub fn sigd_step(&mut self, pro: &[f64]) -> bool {
        let k = pro.len();
        let mean = pro.iter().sum::<f64>() / k as f64;
        let d: Vec<f64> = pro.iter().map(|p| p - mean).collect();
        let scale = pro.iter().fold(0.0f64, |m, p| m.max(p.abs())).max(f64::MIN_POSITIVE);
        if d.iter().all(|v| v.abs() <= 1e-15 * scale) {
            if k == 1 {
                return false;
            }
            // Flat gradient over the active set: fall back to its first vertex.
            let mut w = vec![0.0; k];
            w[0] = 1.0;
            let loss = self.evaluate(&w, None);
            if loss > self.state.objective {
                return false;
            }
            self.state.active.collapse_to(0);
            std::mem::swap(&mut self.state.iterate, &mut self.scratch);
            self.state.objective = loss;
            return true;
        }

        let gamma = self.state.active.weights().to_vec();
        let (blocking, eta_max) = max_feasible_step(&gamma, &d);
        let mut full: Vec<f64> = gamma
            .iter()
            .zip(&d)
            .map(|(g, di)| (g - eta_max * di).max(0.0))
            .collect();
        full[blocking] = 0.0;
        let loss = self.evaluate(&full, None);
        if loss <= self.state.objective {
            self.commit(full, None, loss);
            return true;
        }

        let dir: Vec<f64> = self
            .scratch
            .iter()
            .zip(&self.state.iterate)
            .map(|(n, x)| n - x)
            .collect();
        let eta = self
            .ctx
            .line_search_scaled(&self.state.iterate, &dir, self.lambda());
        if eta <= 0.0 {
            return false;
        }
        let w: Vec<f64> = gamma
            .iter()
            .zip(&full)
            .map(|(g, f)| ((1.0 - eta) * g + eta * f).max(0.0))
            .collect();
        let loss = self.evaluate(&w, None);
        if loss > self.state.objective {
            return false;
        }
        self.commit(w, None, loss);
        true
    }

    /// Pairwise transfer of weight from the away vertex to the local
    /// Frank-Wolfe vertex, with exact line search over `[0, gamma_away]`.
    pub fn bpcg_step(&mut self, pro: &[f64]) -> bool {
        let (away, fw) = away_and_fw(pro);
        if away == fw || pro[away] <= pro[fw] {
            return false;
        }
        let gamma = self.state.active.weights().to_vec();
        let ga = gamma[away];
        let mut dir = vec![0.0; self.data.u()];
        for &t in self.state.active.vertices()[fw].support() {
            dir[t as usize] += ga;
        }
        for &t in self.state.active.vertices()[away].support() {
            dir[t as usize] -= ga;
        }
        let eta = self
            .ctx
            .line_search_scaled(&self.state.iterate, &dir, self.lambda());
        if eta <= 0.0 {
            return false;
        }
        let mut w = gamma;
        if eta >= 1.0 {
            w[fw] += ga;
            w[away] = 0.0;
        } else {
            let moved = eta * ga;
            w[away] = (ga - moved).max(0.0);
            w[fw] += moved;
        }
        let loss = self.evaluate(&w, None);
        if loss > self.state.objective {
            return false;
        }
        self.commit(w, None, loss);
        true
    }

    /// Weight gradient `lambda * <c(x), v_j>` and loss at simplex weights `w`.
    fn weight_gradient(&mut self, w: &[f64]) -> (Vec<f64>, f64) {
        let loss = self.evaluate(w, None);
        let lambda = self.lambda();
        let mut c = vec![0.0; self.data.u()];
        self.ctx.gradient_scaled_into(&self.scratch, lambda, &mut c);
        (self.state.active.pro(&c, lambda), loss)
    }

    /// Nesterov-accelerated projected gradient over the simplex weights.
    /// Momentum carries over between calls while the active set is unchanged.
    pub fn nag_descent(&mut self) -> bool {
        let k = self.state.active.len();
        if k < 2 {
            return false;
        }
        let lambda = self.lambda();
        let mult = self.data.multiplicity();
        let row_mass = self
            .state
            .active
            .vertices()
            .iter()
            .map(|v| v.support().iter().map(|&t| mult[t as usize] as f64).sum::<f64>())
            .fold(0.0f64, f64::max);
        let base_l = 2.0 * lambda * lambda * row_mass / self.ctx.n();
        if base_l <= 0.0 {
            return false;
        }

        let entry = self.state.objective;
        let mut z = self.state.active.weights().to_vec();
        let revision = self.state.active.revision();
        let (mut previous, mut t, mut lipschitz) = match self.state.momentum.take() {
            Some(m) if m.revision == revision && m.previous.len() == k => {
                (m.previous, m.t, m.lipschitz.max(base_l))
            }
            _ => (z.clone(), 1.0, base_l),
        };
        let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        let mut last_loss = entry;
        let mut best_is_last = false;
        let inner_tol = self.tol / 10.0;

        for _ in 0..self.options.nag_max_inner.max(1) {
            let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
            let beta = (t - 1.0) / t_next;
            let y: Vec<f64> = z
                .iter()
                .zip(&previous)
                .map(|(zi, pi)| zi + beta * (zi - pi))
                .collect();
            let (grad, loss_y) = self.weight_gradient(&y);

            let mut candidate;
            let mut loss_c;
            loop {
                let stepped: Vec<f64> = y
                    .iter()
                    .zip(&grad)
                    .map(|(yi, gi)| yi - gi / lipschitz)
                    .collect();
                candidate = project_onto_simplex(&stepped);
                loss_c = self.evaluate(&candidate, None);
                let mut lin = 0.0;
                let mut sq = 0.0;
                for ((ci, yi), gi) in candidate.iter().zip(&y).zip(&grad) {
                    let diff = ci - yi;
                    lin += gi * diff;
                    sq += diff * diff;
                }
                let model = loss_y + lin + 0.5 * lipschitz * sq;
                if loss_c <= model + 1e-15 * loss_y.abs() || lipschitz > 1e300 {
                    break;
                }
                lipschitz *= 2.0;
            }

            previous = std::mem::replace(&mut z, candidate);
            t = t_next;
            let improved = best.as_ref().map_or(loss_c < entry, |b| loss_c < b.2);
            if improved {
                best = Some((z.clone(), self.scratch.clone(), loss_c));
            }
            best_is_last = improved;
            let change = (last_loss - loss_c).abs();
            last_loss = loss_c;
            if change < inner_tol {
                break;
            }
        }

        let Some((weights, point, loss)) = best else {
            self.state.momentum = None;
            return false;
        };
        self.scratch = point;
        self.commit(weights, None, loss);
        self.state.momentum = best_is_last.then(|| Momentum {
            previous,
            t,
            revision: self.state.active.revision(),
            lipschitz,
        });
        true
    }

    /// Oracle step: weak separation (or the exact minimizer when
    /// `force_exact`), then a line search toward the returned vertex.
    pub fn lpsep_step(&mut self, force_exact: bool) -> Result<StepKind> {
        let lambda = self.lambda();
        let scaled: Vec<f64> = self.gradient.iter().map(|c| lambda * c).collect();
        let cmin: f64 = scaled
            .iter()
            .zip(&self.state.iterate)
            .map(|(c, x)| c * x)
            .sum();
        let request = OracleRequest {
            scaled_gradient: scaled,
            cmin,
            gap: self.state.gap,
            tol: self.tol,
        };
        let iteration = self.state.iteration;
        let wrap = |e: Error| Error::AtIteration {
            iteration,
            source: Box::new(e),
        };
        self.state.counts.oracle_calls += 1;
        let answer = if force_exact {
            oracle::exact_separation(&request, self.data, &self.pattern, self.separation.rho_guard)
        } else {
            oracle::weak_separation(
                &request,
                self.data,
                &self.pattern,
                &self.separation,
                &mut self.rng,
                self.state.first_oracle,
            )
        }
        .map_err(wrap)?;
        self.state.first_oracle = false;
        self.state.counts.altmin_runs += answer.restarts;

        let g = answer.improvement;
        let kind = match answer.status {
            OracleStatus::SeparatedAtTarget => {
                if !self.move_toward(answer.vertex) {
                    self.state.gap /= 2.0;
                }
                StepKind::OracleAtTarget
            }
            OracleStatus::SeparatedBelowTarget => {
                self.move_toward(answer.vertex);
                self.state.gap = g.max(self.state.gap / 2.0);
                StepKind::OracleBelowTarget
            }
            OracleStatus::ExactMinimum => {
                self.state.counts.exact_ip_calls += 1;
                if let Some(dir) = &self.options.dump_ip_dir {
                    let text = emit_ip_model(&request.scaled_gradient, self.data, lambda);
                    std::fs::write(dir.join(format!("oracle_{iteration}.lp")), text)
                        .map_err(|e| wrap(e.into()))?;
                }
                let bound = self.state.objective - g.max(0.0);
                self.state.lower_bound = self.state.lower_bound.max(bound);
                if g > 0.0 {
                    self.move_toward(answer.vertex);
                }
                self.state.gap = g / 2.0;
                if self.state.objective - self.state.lower_bound >= self.tol {
                    self.state.gap = self.state.gap.max(self.tol);
                }
                StepKind::OracleExact
            }
        };
        Ok(kind)
    }

    /// Exact line search from the iterate toward `vertex`, blending weights.
    fn move_toward(&mut self, vertex: Vertex) -> bool {
        let lambda = self.lambda();
        let mut dir: Vec<f64> = self.state.iterate.iter().map(|x| -x).collect();
        for &t in vertex.support() {
            dir[t as usize] += 1.0;
        }
        let eta = self
            .ctx
            .line_search_scaled(&self.state.iterate, &dir, lambda);
        if eta <= 0.0 {
            return false;
        }
        let existing = self.state.active.position_of(vertex.thetas());
        let mut w: Vec<f64> = self
            .state
            .active
            .weights()
            .iter()
            .map(|g| (1.0 - eta) * g)
            .collect();
        let loss = match existing {
            Some(j) => {
                w[j] += eta;
                self.evaluate(&w, None)
            }
            None => self.evaluate(&w, Some((&vertex, eta))),
        };
        if loss > self.state.objective {
            return false;
        }
        let extra = existing.is_none().then_some((vertex, eta));
        if extra.is_some() {
            self.state.momentum = None;
        }
        self.commit(w, extra, loss);
        true
    }

    fn check_invariants(&mut self, kind: StepKind, before: (f64, f64)) {
        let it = self.state.iteration;
        let mut problems = Vec::new();
        let weights = self.state.active.weights();
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            problems.push(format!("iter {it}: weights sum to {sum}"));
        }
        if let Some(w) = weights.iter().find(|&&w| w < 0.0) {
            problems.push(format!("iter {it}: negative weight {w}"));
        }
        if let Some(x) = self
            .state
            .iterate
            .iter()
            .find(|&&x| !(-1e-12..=1.0 + 1e-9).contains(&x))
        {
            problems.push(format!("iter {it}: iterate entry {x} outside [0, 1]"));
        }
        let mut recomputed = vec![0.0; self.data.u()];
        self.state.active.iterate_into(&mut recomputed);
        let drift = recomputed
            .iter()
            .zip(&self.state.iterate)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if drift > 1e-8 {
            problems.push(format!("iter {it}: iterate differs from weights by {drift}"));
        }
        if self.state.objective > before.0 {
            problems.push(format!(
                "iter {it} ({}): objective rose from {} to {}",
                kind.as_str(),
                before.0,
                self.state.objective
            ));
        }
        let fresh = self.ctx.loss_scaled(&self.state.iterate, self.lambda());
        if (fresh - self.state.objective).abs() > 1e-12 * fresh.max(1e-300) {
            problems.push(format!("iter {it}: stored objective is stale"));
        }
        if self.state.lower_bound < before.1 {
            problems.push(format!("iter {it}: lower bound decreased"));
        }
        if self.state.lower_bound > self.state.objective + 1e-12 * self.state.objective.abs().max(1.0) {
            problems.push(format!(
                "iter {it}: lower bound {} above objective {}",
                self.state.lower_bound, self.state.objective
            ));
        }
        let audit = self.audit.as_mut().expect("audit enabled");
        audit.iterations_checked += 1;
        audit.violations.extend(problems);
    }

    pub fn finish(self, wall_time: Duration) -> SolveResult {
        let lambda = self.lambda();
        let values_on_u = self.state.iterate.iter().map(|x| lambda * x).collect();
        let vertices = self.state.active.vertices().to_vec();
        let weights = self.state.active.weights().to_vec();
        let shape = self.data.shape();
        let completed = (self.options.reconstruct && shape.pi().is_some())
            .then(|| reconstruct(shape, &vertices, &weights, lambda));
        SolveResult {
            lambda,
            completed,
            values_on_u,
            objective: self.state.objective,
            lower_bound: self.state.lower_bound,
            termination: self.termination.unwrap_or(Termination::IterationLimit),
            iterations: self.state.iteration,
            counts: self.state.counts,
            wall_time,
            vertices,
            weights,
            trace: self.trace,
            audit: self.audit,
        }
    }
}

/// Indices of the largest and smallest entries (first occurrence).
fn away_and_fw(pro: &[f64]) -> (usize, usize) {
    let mut away = 0;
    let mut fw = 0;
    for (j, &p) in pro.iter().enumerate() {
        if p > pro[away] {
            away = j;
        }
        if p < pro[fw] {
            fw = j;
        }
    }
    (away, fw)
}

/// Ratio test `max { eta >= 0 : gamma - eta d >= 0 }` and the index that
/// blocks it.
fn max_feasible_step(gamma: &[f64], d: &[f64]) -> (usize, f64) {
    let mut blocking = usize::MAX;
    let mut eta = f64::INFINITY;
    for (i, (&g, &di)) in gamma.iter().zip(d).enumerate() {
        if di > 0.0 {
            let r = g / di;
            if r < eta {
                eta = r;
                blocking = i;
            }
        }
    }
    (blocking, eta)
}

/// Solves with default options.
pub fn solve(
    data: &ObservedData,
    lambda: f64,
    tol: f64,
    variant: VariantConfig,
    seed: u64,
) -> Result<SolveResult> {
    solve_with(data, lambda, tol, variant, seed, &SolveOptions::default())
}

pub fn solve_with(
    data: &ObservedData,
    lambda: f64,
    tol: f64,
    variant: VariantConfig,
    seed: u64,
    options: &SolveOptions,
) -> Result<SolveResult> {
    let start = Instant::now();
    let mut solver = Solver::new(data, lambda, tol, variant, seed, options.clone())?;
    solver.run()?;
    Ok(solver.finish(start.elapsed()))
}
