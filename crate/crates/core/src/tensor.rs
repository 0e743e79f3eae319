//! Tensor shapes, observed samples, binary vertices of the nonnegative tensor
//! polytope and the active vertex set carried by the solver.
//!
//! All indices are 0-based here. File formats are 1-based and convert at the
//! boundary (see [`crate::instance`]).

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Dimensions `(r_1, ..., r_p)` of an order-`p` tensor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("tensor order must be at least 1".into()));
        }
        if let Some(pos) = dims.iter().position(|&r| r == 0) {
            return Err(Error::InvalidShape(format!("dimension {} is zero", pos + 1)));
        }
        if dims.iter().any(|&r| r > u32::MAX as usize) {
            return Err(Error::InvalidShape("dimension exceeds u32 range".into()));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Tensor order `p`.
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Sum of the dimensions; the number of binary coordinates of a vertex.
    pub fn rho(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Number of tensor entries, or `None` on overflow.
    pub fn pi(&self) -> Option<usize> {
        self.dims.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r))
    }

    /// Row-major linear offset of a 0-based multi-index.
    pub fn linear_index(&self, index: &[u32]) -> usize {
        index
            .iter()
            .zip(&self.dims)
            .fold(0usize, |acc, (&x, &r)| acc * r + x as usize)
    }

    /// Inverse of [`Shape::linear_index`].
    pub fn multi_index(&self, mut offset: usize) -> Vec<u32> {
        let mut out = vec![0u32; self.dims.len()];
        for (slot, &r) in out.iter_mut().zip(&self.dims).rev() {
            *slot = (offset % r) as u32;
            offset /= r;
        }
        out
    }

    pub fn display(&self) -> String {
        self.dims
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join("x")
    }
}

/// One observed entry, 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub index: Vec<u32>,
    pub value: f64,
}

/// The sample set together with its deduplicated index set `U`.
///
/// Unique indices are kept in first-appearance order and stored columnwise:
/// `coords[k][t]` is the mode-`k` coordinate of the `t`-th unique index.
#[derive(Debug, Clone)]
pub struct ObservedData {
    shape: Shape,
    samples: Vec<Sample>,
    coords: Vec<Vec<u32>>,
    multiplicity: Vec<u32>,
    y_sum: Vec<f64>,
    y_sq_total: f64,
    slot_of_sample: Vec<u32>,
}

impl ObservedData {
    pub fn new(shape: Shape, samples: Vec<Sample>) -> Result<Self> {
        let p = shape.order();
        let mut seen: HashMap<Vec<u32>, u32> = HashMap::with_capacity(samples.len());
        let mut coords = vec![Vec::new(); p];
        let mut multiplicity = Vec::new();
        let mut y_sum = Vec::new();
        let mut y_sq_total = 0.0;
        let mut slot_of_sample = Vec::with_capacity(samples.len());

        for (i, s) in samples.iter().enumerate() {
            if s.index.len() != p {
                return Err(Error::IndexArity {
                    sample: i,
                    got: s.index.len(),
                    expected: p,
                });
            }
            if s.index.iter().zip(shape.dims()).any(|(&x, &r)| x as usize >= r) {
                return Err(Error::IndexOutOfRange {
                    sample: i,
                    index: s.index.iter().map(|&x| x as i64).collect(),
                    dims: shape.dims().to_vec(),
                });
            }
            if !s.value.is_finite() {
                return Err(Error::NonFiniteValue {
                    sample: i,
                    value: s.value,
                });
            }
            let slot = *seen.entry(s.index.clone()).or_insert_with(|| {
                for (col, &x) in coords.iter_mut().zip(&s.index) {
                    col.push(x);
                }
                multiplicity.push(0);
                y_sum.push(0.0);
                (multiplicity.len() - 1) as u32
            });
            multiplicity[slot as usize] += 1;
            y_sum[slot as usize] += s.value;
            y_sq_total += s.value * s.value;
            slot_of_sample.push(slot);
        }

        Ok(Self {
            shape,
            samples,
            coords,
            multiplicity,
            y_sum,
            y_sq_total,
            slot_of_sample,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Total number of samples `n`.
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// Number of distinct observed indices `u`.
    pub fn u(&self) -> usize {
        self.multiplicity.len()
    }

    /// Columnwise coordinates of `U`: `coords()[k][t]`.
    pub fn coords(&self) -> &[Vec<u32>] {
        &self.coords
    }

    pub fn multiplicity(&self) -> &[u32] {
        &self.multiplicity
    }

    /// Sum of observed values at each unique index.
    pub fn y_sum(&self) -> &[f64] {
        &self.y_sum
    }

    /// `sum_i y_i^2` over all samples.
    pub fn y_sq_total(&self) -> f64 {
        self.y_sq_total
    }

    /// Position in `U` of the `i`-th sample.
    pub fn slot_of_sample(&self, i: usize) -> usize {
        self.slot_of_sample[i] as usize
    }

    /// The `t`-th unique index as a 0-based tuple.
    pub fn unique_index(&self, t: usize) -> Vec<u32> {
        self.coords.iter().map(|col| col[t]).collect()
    }
}

/// Per-mode grouping of the positions of `U` by coordinate value.
///
/// `lists[k][j]` holds, in increasing order, every `t` with `(U_t)_k = j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternIndex {
    lists: Vec<Vec<Vec<u32>>>,
    coords: Vec<Vec<u32>>,
}

impl PatternIndex {
    pub fn lists(&self, mode: usize) -> &[Vec<u32>] {
        &self.lists[mode]
    }

    pub fn positions(&self, mode: usize, value: usize) -> &[u32] {
        &self.lists[mode][value]
    }

    pub fn coords(&self) -> &[Vec<u32>] {
        &self.coords
    }

    pub fn order(&self) -> usize {
        self.lists.len()
    }

    pub fn u(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }
}

pub fn build_pattern_index(data: &ObservedData) -> PatternIndex {
    let lists = data
        .coords()
        .iter()
        .zip(data.shape().dims())
        .map(|(col, &r)| {
            let mut per_value = vec![Vec::new(); r];
            for (t, &x) in col.iter().enumerate() {
                per_value[x as usize].push(t as u32);
            }
            per_value
        })
        .collect();
    PatternIndex {
        lists,
        coords: data.coords().to_vec(),
    }
}

/// Binary mode vectors `theta^(1..p)`.
pub type Thetas = Vec<Vec<bool>>;

pub(crate) fn check_thetas(thetas: &[Vec<bool>], shape: &Shape) -> Result<()> {
    if thetas.len() != shape.order() {
        return Err(Error::DimensionMismatch {
            expected: shape.order(),
            got: thetas.len(),
        });
    }
    for (theta, &r) in thetas.iter().zip(shape.dims()) {
        if theta.len() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: theta.len(),
            });
        }
    }
    Ok(())
}

/// Positions `t` of `U` where the rank-1 binary tensor is 1.
pub(crate) fn support_on_u(thetas: &[Vec<bool>], coords: &[Vec<u32>]) -> Vec<u32> {
    let u = coords.first().map_or(0, Vec::len);
    (0..u)
        .filter(|&t| {
            thetas
                .iter()
                .zip(coords)
                .all(|(theta, col)| theta[col[t] as usize])
        })
        .map(|t| t as u32)
        .collect()
}

/// Values of the vertex `theta^(1) ⊗ ... ⊗ theta^(p)` on `U`.
pub fn vertex_values_on_u(thetas: &[Vec<bool>], data: &ObservedData) -> Result<Vec<f64>> {
    check_thetas(thetas, data.shape())?;
    let mut out = vec![0.0; data.u()];
    for t in support_on_u(thetas, data.coords()) {
        out[t as usize] = 1.0;
    }
    Ok(out)
}

/// A vertex of the unit polytope, stored by its mode vectors and its support
/// on `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    thetas: Thetas,
    support: Vec<u32>,
    u: usize,
}

impl Vertex {
    pub fn new(thetas: Thetas, data: &ObservedData) -> Result<Self> {
        check_thetas(&thetas, data.shape())?;
        let support = support_on_u(&thetas, data.coords());
        Ok(Self {
            thetas,
            support,
            u: data.u(),
        })
    }

    pub(crate) fn from_parts(thetas: Thetas, support: Vec<u32>, u: usize) -> Self {
        Self { thetas, support, u }
    }

    pub fn all_ones(data: &ObservedData) -> Self {
        let thetas = data.shape().dims().iter().map(|&r| vec![true; r]).collect();
        Self {
            thetas,
            support: (0..data.u() as u32).collect(),
            u: data.u(),
        }
    }

    pub fn zero(data: &ObservedData) -> Self {
        let thetas = data.shape().dims().iter().map(|&r| vec![false; r]).collect();
        Self {
            thetas,
            support: Vec::new(),
            u: data.u(),
        }
    }

    pub fn thetas(&self) -> &[Vec<bool>] {
        &self.thetas
    }

    /// Sorted positions of `U` where the vertex equals 1.
    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn values_on_u(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.u];
        for &t in &self.support {
            out[t as usize] = 1.0;
        }
        out
    }

    /// `<c, v>` summed over the support in increasing position order.
    pub fn dot(&self, c: &[f64]) -> f64 {
        self.support.iter().map(|&t| c[t as usize]).sum()
    }

    /// Value of the full (unprojected) rank-1 tensor at a 0-based index.
    pub fn value_at(&self, index: &[u32]) -> bool {
        self.thetas
            .iter()
            .zip(index)
            .all(|(theta, &x)| theta[x as usize])
    }
}

/// How the active vertex values over `U` are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    Dense,
    /// Row-compressed: each row keeps only its column list.
    Sparse,
}

/// Active vertices, their simplex weights and the vertex-value matrix on `U`.
#[derive(Debug, Clone)]
pub struct ActiveSet {
    vertices: Vec<Vertex>,
    weights: Vec<f64>,
    storage: Storage,
    dense_rows: Vec<Vec<f64>>,
    revision: u64,
}

impl ActiveSet {
    pub fn new(vertex: Vertex, storage: Storage) -> Self {
        let mut set = Self {
            vertices: Vec::new(),
            weights: Vec::new(),
            storage,
            dense_rows: Vec::new(),
            revision: 0,
        };
        set.push(vertex, 1.0);
        set.revision = 0;
        set
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn storage(&self) -> Storage {
        self.storage
    }

    /// Bumped whenever a vertex enters or leaves the set.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Row `j` of the value matrix as a dense vector.
    pub fn row(&self, j: usize) -> Vec<f64> {
        match self.storage {
            Storage::Dense => self.dense_rows[j].clone(),
            Storage::Sparse => self.vertices[j].values_on_u(),
        }
    }

    pub fn position_of(&self, thetas: &[Vec<bool>]) -> Option<usize> {
        self.vertices.iter().position(|v| v.thetas() == thetas)
    }

    pub(crate) fn push(&mut self, vertex: Vertex, weight: f64) -> usize {
        if self.storage == Storage::Dense {
            self.dense_rows.push(vertex.values_on_u());
        }
        self.vertices.push(vertex);
        self.weights.push(weight);
        self.revision += 1;
        self.vertices.len() - 1
    }

    pub(crate) fn set_weights(&mut self, weights: Vec<f64>) {
        debug_assert_eq!(weights.len(), self.vertices.len());
        self.weights = weights;
    }

    /// Removes vertices whose weight is not strictly positive. Returns whether
    /// anything was removed.
    pub(crate) fn drop_zero_weights(&mut self) -> bool {
        let keep: Vec<bool> = self.weights.iter().map(|&w| w > 0.0).collect();
        if keep.iter().all(|&k| k) {
            return false;
        }
        let mut it = keep.iter();
        self.vertices.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.weights.retain(|_| *it.next().unwrap());
        if self.storage == Storage::Dense {
            let mut it = keep.iter();
            self.dense_rows.retain(|_| *it.next().unwrap());
        }
        self.revision += 1;
        true
    }

    /// Keeps only vertex `j`, with weight 1.
    pub(crate) fn collapse_to(&mut self, j: usize) {
        let v = self.vertices.swap_remove(j);
        self.vertices.clear();
        self.weights.clear();
        self.dense_rows.clear();
        self.push(v, 1.0);
    }

    /// `scale * <c, v_j>` for every active vertex, using the configured storage.
    pub fn pro(&self, c: &[f64], scale: f64) -> Vec<f64> {
        match self.storage {
            Storage::Dense => self.pro_dense(c, scale),
            Storage::Sparse => self.pro_sparse(c, scale),
        }
    }

    /// Dense row products. Rows are expanded on the fly under sparse storage.
    pub fn pro_dense(&self, c: &[f64], scale: f64) -> Vec<f64> {
        let dot = |row: &[f64]| -> f64 { row.iter().zip(c).map(|(v, ci)| v * ci).sum() };
        match self.storage {
            Storage::Dense => self.dense_rows.iter().map(|r| scale * dot(r)).collect(),
            Storage::Sparse => self
                .vertices
                .iter()
                .map(|v| scale * dot(&v.values_on_u()))
                .collect(),
        }
    }

    pub fn pro_sparse(&self, c: &[f64], scale: f64) -> Vec<f64> {
        self.vertices.iter().map(|v| scale * v.dot(c)).collect()
    }

    /// Writes `sum_j weights[j] * v_j` into `out`.
    pub fn combine_into(&self, weights: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        match self.storage {
            Storage::Dense => {
                for (row, &w) in self.dense_rows.iter().zip(weights) {
                    if w == 0.0 {
                        continue;
                    }
                    for (x, v) in out.iter_mut().zip(row) {
                        *x += w * v;
                    }
                }
            }
            Storage::Sparse => {
                for (vertex, &w) in self.vertices.iter().zip(weights) {
                    if w == 0.0 {
                        continue;
                    }
                    for &t in vertex.support() {
                        out[t as usize] += w;
                    }
                }
            }
        }
    }

    /// The current point `sum_j gamma_j v_j` over `U`.
    pub fn iterate_into(&self, out: &mut [f64]) {
        self.combine_into(&self.weights, out);
    }
}
