//! Virtual-time master/worker simulation.
//!
//! Worker `i` needs `work_i × base_rate` virtual seconds (times
//! `slow_factor` when it straggles), where `work_i` is the scalar-op count
//! of its task: the nonzeros of its coded block for a linear transform,
//! twice the nonzeros of the blocks it combines for a gradient task.
//! Arrivals are processed from an event queue in time order, ties broken
//! by worker id. The master keeps a greedy independent set of received
//! rows and decodes as soon as it reaches rank `n`; with an invertible
//! first-`n` subset this is exactly "decode from the first `n` arrivals".
//! Decoding adds `scalar_ops × base_rate` to the job time.
//!
//! Everything is a pure function of its inputs and seeds; no wall clock
//! and no shared state, so batches can run in parallel and still produce
//! byte-identical reports.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{partition, BlockError, DataMatrix, Vector};
use crate::codes::{computation_load, encode, CodeError, CodeSpec, CodingMatrix, Family, FamilyParams};
use crate::decoder::{diagonal_decode, hybrid_decode, DecodeError, DecodeReport, ReceivedSet};
use crate::exact::RowBasis;
use crate::rng::{derive_seed, rng_from_seed, sample_subset};

/// Largest decoded-vs-direct relative error accepted by [`run_transform`].
pub const VERIFY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid straggler model: {0}")]
    InvalidModel(String),
    #[error("invalid experiment: {0}")]
    InvalidConfig(String),
    #[error("insufficient results: {arrived} of {workers} workers finished, need n = {n}")]
    InsufficientResults { arrived: usize, workers: usize, n: usize },
    #[error("not decodable: all {arrived} finished workers span rank {rank} < n = {n}")]
    Undecodable { arrived: usize, rank: usize, n: usize },
    #[error("decoded output deviates from the direct product (relative error {0:e})")]
    Verification(f64),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Block(#[from] BlockError),
}

impl SimError {
    /// True for failures caused by the code/straggler realisation rather
    /// than by bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            SimError::InsufficientResults { .. } | SimError::Undecodable { .. } | SimError::Decode(DecodeError::Singular { .. })
        )
    }
}

pub type Result<T> = std::result::Result<T, SimError>;

/// 1-based worker lists in serialized form.
mod one_based {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[usize], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|w| w + 1))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        raw.into_iter()
            .map(|w| w.checked_sub(1).ok_or_else(|| D::Error::custom("worker ids are 1-based")))
            .collect()
    }
}

/// Which workers straggle in a job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StragglerKind {
    #[default]
    None,
    /// These workers are slowed in every job.
    FixedSet {
        #[serde(with = "one_based")]
        workers: Vec<usize>,
    },
    /// `count` workers drawn uniformly per job are slowed.
    RandomSet { count: usize },
    /// Each worker independently fails (never reports) with probability `q`.
    Bernoulli { q: f64 },
    /// Each worker is independently slowed with probability `slow_prob`.
    Delay { slow_prob: f64 },
}

fn default_base_rate() -> f64 {
    1e-9
}

fn default_slow_factor() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StragglerModel {
    #[serde(flatten)]
    pub kind: StragglerKind,
    /// Virtual seconds per scalar operation.
    #[serde(default = "default_base_rate")]
    pub base_rate: f64,
    /// Time multiplier for a slowed worker.
    #[serde(default = "default_slow_factor")]
    pub slow_factor: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for StragglerModel {
    fn default() -> Self {
        StragglerModel {
            kind: StragglerKind::None,
            base_rate: default_base_rate(),
            slow_factor: default_slow_factor(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkerState {
    Normal,
    Slow,
    Failed,
}

impl StragglerModel {
    pub fn none() -> Self {
        StragglerModel::default()
    }

    pub fn fixed_set(workers: Vec<usize>) -> Self {
        StragglerModel::with_kind(StragglerKind::FixedSet { workers })
    }

    pub fn random_set(count: usize) -> Self {
        StragglerModel::with_kind(StragglerKind::RandomSet { count })
    }

    pub fn bernoulli(q: f64) -> Self {
        StragglerModel::with_kind(StragglerKind::Bernoulli { q })
    }

    pub fn delay(slow_prob: f64) -> Self {
        StragglerModel::with_kind(StragglerKind::Delay { slow_prob })
    }

    fn with_kind(kind: StragglerKind) -> Self {
        StragglerModel {
            kind,
            ..StragglerModel::default()
        }
    }

    pub fn with_base_rate(mut self, rate: f64) -> Self {
        self.base_rate = rate;
        self
    }

    pub fn with_slow_factor(mut self, factor: f64) -> Self {
        self.slow_factor = factor;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Check the model against a system of `m` workers.
    pub fn validate(&self, m: usize) -> Result<()> {
        let bad = |msg: String| Err(SimError::InvalidModel(msg));
        if !(self.base_rate.is_finite() && self.base_rate > 0.0) {
            return bad(format!("base_rate must be positive, got {}", self.base_rate));
        }
        if !(self.slow_factor.is_finite() && self.slow_factor >= 1.0) {
            return bad(format!("slow_factor must be ≥ 1, got {}", self.slow_factor));
        }
        match &self.kind {
            StragglerKind::None => {}
            StragglerKind::FixedSet { workers } => {
                if let Some(w) = workers.iter().find(|&&w| w >= m) {
                    return bad(format!("straggler worker {} outside 1..={m}", w + 1));
                }
            }
            StragglerKind::RandomSet { count } => {
                if *count > m {
                    return bad(format!("{count} random stragglers among {m} workers"));
                }
            }
            StragglerKind::Bernoulli { q: p } | StragglerKind::Delay { slow_prob: p } => {
                if !(0.0..=1.0).contains(p) {
                    return bad(format!("probability {p} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }

    /// Worker states for one job; depends only on `(self.seed, job_seed)`.
    pub fn draw(&self, m: usize, job_seed: u64) -> Vec<WorkerState> {
        let mut rng = rng_from_seed(derive_seed(self.seed, job_seed));
        let mut states = vec![WorkerState::Normal; m];
        match &self.kind {
            StragglerKind::None => {}
            StragglerKind::FixedSet { workers } => {
                for &w in workers {
                    states[w] = WorkerState::Slow;
                }
            }
            StragglerKind::RandomSet { count } => {
                for w in sample_subset(&mut rng, m, *count) {
                    states[w] = WorkerState::Slow;
                }
            }
            StragglerKind::Bernoulli { q } => {
                for s in states.iter_mut() {
                    if rng.random::<f64>() < *q {
                        *s = WorkerState::Failed;
                    }
                }
            }
            StragglerKind::Delay { slow_prob } => {
                for s in states.iter_mut() {
                    if rng.random::<f64>() < *slow_prob {
                        *s = WorkerState::Slow;
                    }
                }
            }
        }
        states
    }
}

/// Arrival event, ordered so the max-heap pops the earliest time first and
/// the lower worker id on ties.
#[derive(Debug, Clone, Copy)]
struct Arrival {
    time: f64,
    worker: usize,
}

impl PartialEq for Arrival {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Arrival {}

impl PartialOrd for Arrival {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Arrival {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.worker.cmp(&self.worker))
    }
}

/// Outcome of waiting for enough results.
#[derive(Debug, Clone)]
struct Collected {
    finish_times: Vec<Option<f64>>,
    arrival_order: Vec<usize>,
    used: Vec<usize>,
    decode_start: f64,
    retries: usize,
}

fn collect(code: &CodingMatrix, work: &[u64], model: &StragglerModel, job_seed: u64) -> Result<Collected> {
    let (m, n) = (code.workers(), code.blocks());
    let states = model.draw(m, job_seed);
    let finish_times: Vec<Option<f64>> = states
        .iter()
        .zip(work)
        .map(|(s, &w)| {
            let t = w as f64 * model.base_rate;
            match s {
                WorkerState::Normal => Some(t),
                WorkerState::Slow => Some(t * model.slow_factor),
                WorkerState::Failed => None,
            }
        })
        .collect();
    let mut queue: BinaryHeap<Arrival> = finish_times
        .iter()
        .enumerate()
        .filter_map(|(worker, t)| t.map(|time| Arrival { time, worker }))
        .collect();
    let arrived_total = queue.len();
    if arrived_total < n {
        return Err(SimError::InsufficientResults {
            arrived: arrived_total,
            workers: m,
            n,
        });
    }
    let dense = code.to_dense();
    let mut basis = RowBasis::new(n);
    let mut arrival_order = Vec::with_capacity(arrived_total);
    let mut decode_start = None;
    while let Some(Arrival { time, worker }) = queue.pop() {
        arrival_order.push(worker);
        if decode_start.is_none() && basis.offer(worker, &dense[worker]) && basis.rank() == n {
            decode_start = Some((time, arrival_order.len()));
        }
    }
    let Some((decode_start, consumed)) = decode_start else {
        return Err(SimError::Undecodable {
            arrived: arrived_total,
            rank: basis.rank(),
            n,
        });
    };
    let mut used = basis.kept().to_vec();
    used.sort_unstable();
    Ok(Collected {
        finish_times,
        arrival_order,
        used,
        decode_start,
        retries: consumed - n,
    })
}

fn decode<'a>(received: &ReceivedSet<'a>) -> Result<DecodeReport> {
    let report = match received.code().diagonal_s() {
        Some(s) => diagonal_decode(received, s)?,
        None => hybrid_decode(received)?,
    };
    Ok(report)
}

/// One simulated linear-transform job.
#[derive(Debug, Clone, Serialize)]
pub struct JobTrace {
    /// Virtual finish time per worker; `None` for failed workers.
    pub finish_times: Vec<Option<f64>>,
    /// Every finished worker in arrival order.
    #[serde(with = "one_based")]
    pub arrival_order: Vec<usize>,
    /// Workers whose results were decoded, ascending.
    #[serde(with = "one_based")]
    pub used_subset: Vec<usize>,
    /// Arrivals consumed beyond the first `n` because of rank deficiency.
    pub retries: usize,
    pub decode_start: f64,
    pub decode_time: f64,
    pub job_time: f64,
    pub decode_report: DecodeReport,
    /// Relative ∞-norm error of the decoded `y` against `Ax`.
    pub relative_error: f64,
    #[serde(skip)]
    pub output: Vector,
}

impl JobTrace {
    pub const CSV_HEADER: &'static str = "worker,finish_time,arrival_rank,used";

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("trace serializes");
        s.push('\n');
        s
    }

    /// One row per worker: 1-based id, finish time (empty if failed),
    /// 1-based arrival rank (empty if failed), whether it was decoded.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (w, t) in self.finish_times.iter().enumerate() {
            let rank = self.arrival_order.iter().position(|&a| a == w).map(|r| r + 1);
            let used = self.used_subset.binary_search(&w).is_ok();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                w + 1,
                t.map(|v| format!("{v:?}")).unwrap_or_default(),
                rank.map(|r| r.to_string()).unwrap_or_default(),
                used as u8
            );
        }
        out
    }
}

/// A linear-transform job with precomputed worker results, so that many
/// straggler realisations can be simulated cheaply.
#[derive(Debug, Clone)]
pub struct TransformJob<'c> {
    code: &'c CodingMatrix,
    source_rows: usize,
    work: Vec<u64>,
    results: Vec<Vec<f64>>,
    reference: Vector,
}

impl<'c> TransformJob<'c> {
    pub fn new(a: &DataMatrix, x: &[f64], code: &'c CodingMatrix) -> Result<Self> {
        let part = partition(a, code.blocks())?;
        let encoded = encode(&part, code)?;
        for w in &encoded.warnings {
            log::warn!("{w}");
        }
        let mut work = Vec::with_capacity(code.workers());
        let mut results = Vec::with_capacity(code.workers());
        for asg in &encoded.assignments {
            work.push(asg.coded_block.nnz() as u64);
            results.push(asg.coded_block.multiply(x)?.into_inner());
        }
        Ok(TransformJob {
            code,
            source_rows: a.rows(),
            work,
            results,
            reference: a.multiply(x)?,
        })
    }

    /// Per-worker scalar-op counts.
    pub fn work(&self) -> &[u64] {
        &self.work
    }

    pub fn reference(&self) -> &Vector {
        &self.reference
    }

    pub fn run(&self, model: &StragglerModel, seed: u64) -> Result<JobTrace> {
        model.validate(self.code.workers())?;
        let c = collect(self.code, &self.work, model, seed)?;
        let results = c.used.iter().map(|&w| self.results[w].clone()).collect();
        let received = ReceivedSet::new(self.code, &c.used, results)?.with_source_rows(self.source_rows);
        let report = decode(&received)?;
        let output = report.output_vector();
        let relative_error = output.relative_error(&self.reference);
        if relative_error.is_nan() || relative_error > VERIFY_TOLERANCE {
            return Err(SimError::Verification(relative_error));
        }
        let decode_time = report.scalar_ops as f64 * model.base_rate;
        Ok(JobTrace {
            finish_times: c.finish_times,
            arrival_order: c.arrival_order,
            used_subset: c.used,
            retries: c.retries,
            decode_start: c.decode_start,
            decode_time,
            job_time: c.decode_start + decode_time,
            decode_report: report,
            relative_error,
            output,
        })
    }
}

/// Simulate one coded computation of `y = Ax`.
pub fn run_transform(
    a: &DataMatrix,
    x: &[f64],
    code: &CodingMatrix,
    model: &StragglerModel,
    seed: u64,
) -> Result<JobTrace> {
    TransformJob::new(a, x, code)?.run(model, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdIteration {
    pub iteration: usize,
    /// Cumulative virtual time once this iteration's gradient is decoded.
    pub time: f64,
    /// `‖η Aᵀ(Ax_t − b)‖²` at the iterate `x_t`.
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GdTrace {
    pub eta: f64,
    pub iterations: Vec<GdIteration>,
    pub final_x: Vector,
    /// Iterates `x_0 … x_T`.
    #[serde(skip)]
    pub iterates: Vec<Vector>,
    pub total_retries: usize,
    pub total_rooting_steps: usize,
    /// Largest relative error of a decoded gradient against the direct one.
    pub max_decode_error: f64,
}

impl GdTrace {
    pub const CSV_HEADER: &'static str = "iteration,time,gradient_norm";

    /// Relative size of gradient noise treated as floating-point round-off.
    pub const ROUNDOFF: f64 = 1e-12;

    /// Whether `‖η∇‖²` never increases, up to round-off: once the gradient
    /// has shrunk to `ROUNDOFF` times its initial size the squared norm may
    /// jitter below `ROUNDOFF² · ‖η∇₀‖²`.
    pub fn gradient_norm_non_increasing(&self) -> bool {
        let Some(first) = self.iterations.first() else {
            return true;
        };
        let floor = Self::ROUNDOFF * Self::ROUNDOFF * first.gradient_norm;
        self.iterations
            .windows(2)
            .all(|w| w[1].gradient_norm <= w[0].gradient_norm.max(floor))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("trace serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for it in &self.iterations {
            let _ = writeln!(out, "{},{:?},{:?}", it.iteration, it.time, it.gradient_norm);
        }
        out
    }
}

/// Coded gradient descent for `min ½‖Ax − b‖²` from `x = 0`.
///
/// Worker `i` returns `Σ_j m_ij A_jᵀA_j x_t`; the master decodes the `n`
/// block gradients, subtracts the precomputed `Aᵀb` and steps. Straggler
/// draws for iteration `t` use job seed `derive_seed(seed, t)`.
pub fn run_coded_gd(
    a: &DataMatrix,
    b: &[f64],
    code: &CodingMatrix,
    eta: f64,
    iters: usize,
    model: &StragglerModel,
    seed: u64,
) -> Result<GdTrace> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(SimError::InvalidConfig(format!("step size must be ≥ 0, got {eta}")));
    }
    if b.len() != a.rows() {
        return Err(BlockError::DimensionMismatch {
            what: "right-hand side",
            expected: a.rows(),
            got: b.len(),
        }
        .into());
    }
    model.validate(code.workers())?;
    let n = code.blocks();
    let part = partition(a, n)?;
    let atb = a.transpose_multiply(b)?;
    let block_nnz: Vec<u64> = part.blocks().iter().map(|blk| blk.nnz() as u64).collect();
    let work: Vec<u64> = (0..code.workers())
        .map(|w| code.row_support(w).iter().map(|&j| 2 * block_nnz[j]).sum())
        .collect();

    let cols = a.cols();
    let mut x = Vector::zeros(cols);
    let mut iterates = vec![x.clone()];
    let mut iterations = Vec::with_capacity(iters);
    let mut time = 0.0;
    let (mut total_retries, mut total_rooting_steps) = (0, 0);
    let mut max_decode_error: f64 = 0.0;
    for t in 0..iters {
        let block_grads: Vec<Vector> = part
            .blocks()
            .iter()
            .map(|blk| blk.transpose_multiply(&blk.multiply(&x)?))
            .collect::<std::result::Result<_, _>>()?;
        let c = collect(code, &work, model, derive_seed(seed, t as u64))?;
        let results: Vec<Vec<f64>> = c
            .used
            .iter()
            .map(|&w| {
                let mut g = Vector::zeros(cols);
                for (j, coef) in code.row(w) {
                    g.axpy(coef as f64, &block_grads[j]);
                }
                g.into_inner()
            })
            .collect();
        let received = ReceivedSet::new(code, &c.used, results)?;
        let report = decode(&received)?;
        let mut grad = Vector::zeros(cols);
        for (decoded, direct) in report.blocks().zip(&block_grads) {
            max_decode_error = max_decode_error.max(Vector::new(decoded.to_vec()).relative_error(direct));
            grad.axpy(1.0, decoded);
        }
        grad.axpy(-1.0, &atb);
        time += c.decode_start + report.scalar_ops as f64 * model.base_rate;
        total_retries += c.retries;
        total_rooting_steps += report.rooting_steps;
        iterations.push(GdIteration {
            iteration: t,
            time,
            gradient_norm: eta * eta * grad.norm_sq(),
        });
        x.axpy(-eta, &grad);
        iterates.push(x.clone());
    }
    Ok(GdTrace {
        eta,
        iterations,
        final_x: x,
        iterates,
        total_retries,
        total_rooting_steps,
        max_decode_error,
    })
}

/// `1 / λ_max(AᵀA)` estimated by power iteration from the all-ones vector.
pub fn default_step_size(a: &DataMatrix) -> Result<f64> {
    let cols = a.cols();
    let mut v = Vector::new(vec![1.0 / (cols as f64).sqrt(); cols]);
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w = a.transpose_multiply(&a.multiply(&v)?)?;
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(1.0);
        }
        let converged = (norm - lambda).abs() <= 1e-12 * norm;
        lambda = norm;
        v = Vector::new(w.iter().map(|x| x / norm).collect());
        if converged {
            break;
        }
    }
    Ok(1.0 / lambda)
}

/// Dense matrix with i.i.d. standard normal entries.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Result<DataMatrix> {
    let mut rng = rng_from_seed(seed);
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Ok(DataMatrix::dense(rows, cols, data)?)
}

/// Sparse matrix in which each entry is independently a standard normal
/// value with probability `density`.
pub fn sparse_gaussian_matrix(rows: usize, cols: usize, density: f64, seed: u64) -> Result<DataMatrix> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(SimError::InvalidConfig(format!("density {density} outside (0, 1]")));
    }
    let mut rng = rng_from_seed(seed);
    let mut triplets = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.random::<f64>() < density {
                triplets.push((i, j, rng.sample(StandardNormal)));
            }
        }
    }
    Ok(DataMatrix::from_triplets(rows, cols, &triplets)?)
}

pub fn gaussian_vector(len: usize, seed: u64) -> Vector {
    let mut rng = rng_from_seed(seed);
    Vector::new((0..len).map(|_| rng.sample(StandardNormal)).collect())
}

/// Consistent least-squares instance: Gaussian `A`, Gaussian `x*`, `b = A x*`.
pub fn least_squares_problem(rows: usize, cols: usize, seed: u64) -> Result<(DataMatrix, Vector, Vector)> {
    let a = gaussian_matrix(rows, cols, derive_seed(seed, 0))?;
    let x_star = gaussian_vector(cols, derive_seed(seed, 1));
    let b = a.multiply(&x_star)?;
    Ok((a, x_star, b))
}

fn default_true() -> bool {
    true
}

/// Input of [`compare_schemes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    /// Fraction of nonzeros in the synthetic data; dense when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    pub schemes: Vec<CodeSpec>,
    #[serde(default)]
    pub model: StragglerModel,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Add the identity-matrix baseline that waits for all `n` workers.
    #[serde(default = "default_true")]
    pub include_uncoded: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.n == 0 || self.rows < self.n || self.cols == 0 {
            return bad(format!("need n ≥ 1, rows ≥ n, cols ≥ 1 (n={}, rows={}, cols={})", self.n, self.rows, self.cols));
        }
        if self.schemes.is_empty() && !self.include_uncoded {
            return bad("no schemes to compare".into());
        }
        for spec in &self.schemes {
            if spec.n != self.n {
                return bad(format!("scheme {} has n = {}, experiment has n = {}", scheme_label(spec), spec.n, self.n));
            }
            spec.validate()?;
            self.model.validate(spec.m)?;
        }
        if self.include_uncoded {
            self.model.validate(self.n)?;
        }
        Ok(())
    }
}

/// Short human-readable scheme name, e.g. `s-diagonal(s=2)` or `cross(2,2)`.
pub fn scheme_label(spec: &CodeSpec) -> String {
    match &spec.params {
        FamilyParams::SDiagonal { s } => format!("s-diagonal(s={s})"),
        FamilyParams::OneDiagonal => "one-diagonal".into(),
        FamilyParams::PBernoulli { p } => format!("p-bernoulli(p={p})"),
        FamilyParams::Cross { d1, d2 } => format!("cross({d1},{d2})"),
        FamilyParams::Uncoded => "uncoded".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scheme: String,
    pub trial: usize,
    pub success: bool,
    pub job_time: Option<f64>,
    pub decode_start: Option<f64>,
    pub retries: usize,
    pub rooting_steps: usize,
    pub peeling_steps: usize,
    pub scalar_ops: u64,
    pub relative_error: Option<f64>,
    pub failure: Option<String>,
}

impl TrialRecord {
    pub const CSV_HEADER: &'static str =
        "scheme,trial,success,job_time,decode_start,retries,rooting_steps,peeling_steps,scalar_ops,relative_error,failure";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.trial,
            self.success as u8,
            opt(self.job_time),
            opt(self.decode_start),
            self.retries,
            self.rooting_steps,
            self.peeling_steps,
            self.scalar_ops,
            opt(self.relative_error),
            self.failure.as_deref().unwrap_or("").replace(',', ";"),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: String,
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub load: usize,
    pub trials: usize,
    pub successes: usize,
    pub failure_fraction: f64,
    /// Fraction of successful trials that needed arrivals beyond the first `n`.
    pub retry_fraction: f64,
    pub mean_job_time: Option<f64>,
    pub median_job_time: Option<f64>,
    pub min_job_time: Option<f64>,
    pub max_job_time: Option<f64>,
    pub mean_rooting_steps: Option<f64>,
}

impl SchemeSummary {
    pub const CSV_HEADER: &'static str = "scheme,family,n,m,load,trials,successes,failure_fraction,retry_fraction,mean_job_time,median_job_time,min_job_time,max_job_time,mean_rooting_steps";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.family,
            self.n,
            self.m,
            self.load,
            self.trials,
            self.successes,
            self.failure_fraction,
            self.retry_fraction,
            opt(self.mean_job_time),
            opt(self.median_job_time),
            opt(self.min_job_time),
            opt(self.max_job_time),
            opt(self.mean_rooting_steps),
        )
    }

    fn from_records(spec: &CodeSpec, code: &CodingMatrix, records: &[TrialRecord]) -> Self {
        let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.success).collect();
        let mut times: Vec<f64> = ok.iter().filter_map(|r| r.job_time).collect();
        times.sort_by(f64::total_cmp);
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let median = (!times.is_empty()).then(|| {
            let k = times.len();
            if k % 2 == 1 {
                times[k / 2]
            } else {
                (times[k / 2 - 1] + times[k / 2]) / 2.0
            }
        });
        let roots: Vec<f64> = ok.iter().map(|r| r.rooting_steps as f64).collect();
        let trials = records.len();
        SchemeSummary {
            scheme: scheme_label(spec),
            family: code.family(),
            n: code.blocks(),
            m: code.workers(),
            load: computation_load(code),
            trials,
            successes: ok.len(),
            failure_fraction: if trials == 0 { 0.0 } else { (trials - ok.len()) as f64 / trials as f64 },
            retry_fraction: if ok.is_empty() {
                0.0
            } else {
                ok.iter().filter(|r| r.retries > 0).count() as f64 / ok.len() as f64
            },
            mean_job_time: mean(&times),
            median_job_time: median,
            min_job_time: times.first().copied(),
            max_job_time: times.last().copied(),
            mean_rooting_steps: mean(&roots),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub summaries: Vec<SchemeSummary>,
    pub trials: Vec<TrialRecord>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Flat per-trial CSV.
    pub fn trials_csv(&self) -> String {
        let mut out = String::from(TrialRecord::CSV_HEADER);
        out.push('\n');
        for r in &self.trials {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(SchemeSummary::CSV_HEADER);
        out.push('\n');
        for s in &self.summaries {
            out.push_str(&s.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn summary(&self, scheme: &str) -> Option<&SchemeSummary> {
        self.summaries.iter().find(|s| s.scheme == scheme)
    }

    pub fn records(&self, scheme: &str) -> impl Iterator<Item = &TrialRecord> {
        let scheme = scheme.to_string();
        self.trials.iter().filter(move |r| r.scheme == scheme)
    }
}

/// Run every scheme on the same synthetic data and the same per-trial
/// straggler seeds. Trial `t` uses job seed `derive_seed(config.seed, t)`.
/// Infeasible trials are recorded as failures, not errors.
pub fn compare_schemes(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let a = match config.density {
        Some(d) => sparse_gaussian_matrix(config.rows, config.cols, d, derive_seed(config.seed, u64::MAX))?,
        None => gaussian_matrix(config.rows, config.cols, derive_seed(config.seed, u64::MAX))?,
    };
    let x = gaussian_vector(config.cols, derive_seed(config.seed, u64::MAX - 1));
    let mut specs = config.schemes.clone();
    if config.include_uncoded {
        specs.push(CodeSpec::uncoded(config.n));
    }
    let codes: Vec<CodingMatrix> = specs.iter().map(CodeSpec::build).collect::<std::result::Result<_, _>>()?;
    let jobs: Vec<TransformJob> = codes
        .iter()
        .map(|code| TransformJob::new(&a, &x, code))
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|k| (0..config.trials).map(move |t| (k, t)))
        .collect();
    let records: Vec<TrialRecord> = cells
        .par_iter()
        .map(|&(k, t)| {
            let label = scheme_label(&specs[k]);
            match jobs[k].run(&config.model, derive_seed(config.seed, t as u64)) {
                Ok(tr) => TrialRecord {
                    scheme: label,
                    trial: t,
                    success: true,
                    job_time: Some(tr.job_time),
                    decode_start: Some(tr.decode_start),
                    retries: tr.retries,
                    rooting_steps: tr.decode_report.rooting_steps,
                    peeling_steps: tr.decode_report.peeling_steps,
                    scalar_ops: tr.decode_report.scalar_ops,
                    relative_error: Some(tr.relative_error),
                    failure: None,
                },
                Err(e) => TrialRecord {
                    scheme: label,
                    trial: t,
                    success: false,
                    job_time: None,
                    decode_start: None,
                    retries: 0,
                    rooting_steps: 0,
                    peeling_steps: 0,
                    scalar_ops: 0,
                    relative_error: None,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();
    let summaries = specs
        .iter()
        .zip(&codes)
        .enumerate()
        .map(|(k, (spec, code))| {
            SchemeSummary::from_records(spec, code, &records[k * config.trials..(k + 1) * config.trials])
        })
        .collect();
    Ok(ExperimentReport {
        config: config.clone(),
        summaries,
        trials: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{make_cross, make_one_diagonal, make_s_diagonal, DEFAULT_COEFF_SET_SIZE};

    fn example_one() -> CodingMatrix {
        make_s_diagonal(4, 5, 1, 1, 0).unwrap()
    }

    #[test]
    fn example_one_first_worker_straggles() {
        let a = gaussian_matrix(8, 3, 1).unwrap();
        let x = gaussian_vector(3, 2);
        let model = StragglerModel::fixed_set(vec![0]);
        let tr = run_transform(&a, &x, &example_one(), &model, 0).unwrap();
        assert_eq!(tr.used_subset, vec![1, 2, 3, 4]);
        assert_eq!(tr.retries, 0);
        assert!(tr.relative_error < 1e-12);
        assert_eq!(*tr.arrival_order.last().unwrap(), 0);
    }

    #[test]
    fn no_stragglers_uses_fastest_workers() {
        // blocks of the identity have disjoint supports, so a worker's work
        // grows with the number of blocks it combines
        let a = DataMatrix::identity(8).unwrap().to_sparse();
        let x = gaussian_vector(8, 4);
        let code = example_one();
        let model = StragglerModel::delay(0.0).with_base_rate(1.0);
        let tr = run_transform(&a, &x, &code, &model, 9).unwrap();
        // loads are 2,4,4,4,2 nonzeros: workers 1 and 5 finish first,
        // the tie among 2,3,4 is broken by id
        assert_eq!(tr.arrival_order, vec![0, 4, 1, 2, 3]);
        assert_eq!(tr.used_subset, vec![0, 1, 2, 4]);
        let mut times: Vec<f64> = tr.finish_times.iter().map(|t| t.unwrap()).collect();
        times.sort_by(f64::total_cmp);
        assert_eq!(tr.decode_start, times[3]);
        assert_eq!(tr.job_time, times[3] + tr.decode_report.scalar_ops as f64);
    }

    #[test]
    fn failures_below_n_are_insufficient() {
        let a = gaussian_matrix(8, 3, 3).unwrap();
        let x = gaussian_vector(3, 4);
        let err = run_transform(&a, &x, &example_one(), &StragglerModel::bernoulli(1.0), 0).unwrap_err();
        assert!(matches!(err, SimError::InsufficientResults { arrived: 0, .. }));
        assert!(err.to_string().contains("insufficient results"));
        assert!(err.is_infeasible());
    }

    #[test]
    fn singular_prefix_triggers_retry() {
        // workers 1 and 2 repeat block 1; the first three arrivals cannot decode
        let code = CodingMatrix::from_entries(
            4,
            3,
            Family::Custom,
            0,
            [(0, 0, 1), (1, 0, 2), (2, 1, 1), (3, 1, 1), (3, 2, 1)],
        )
        .unwrap();
        let a = gaussian_matrix(6, 2, 5).unwrap();
        let x = gaussian_vector(2, 6);
        let tr = run_transform(&a, &x, &code, &StragglerModel::none(), 0).unwrap();
        assert_eq!(tr.retries, 1);
        assert_eq!(tr.used_subset, vec![0, 2, 3]);
        assert!(tr.relative_error < 1e-12);
    }

    #[test]
    fn undecodable_when_everything_arrives_rank_deficient() {
        let code = CodingMatrix::from_entries(3, 2, Family::Custom, 0, [(0, 0, 1), (1, 0, 1), (2, 0, 3)]).unwrap();
        let a = gaussian_matrix(4, 2, 5).unwrap();
        let err = run_transform(&a, &[1.0, 1.0], &code, &StragglerModel::none(), 0).unwrap_err();
        assert!(matches!(err, SimError::Undecodable { rank: 1, n: 2, .. }));
    }

    #[test]
    fn model_validation() {
        assert!(StragglerModel::fixed_set(vec![5]).validate(5).is_err());
        assert!(StragglerModel::bernoulli(1.5).validate(5).is_err());
        assert!(StragglerModel::random_set(6).validate(5).is_err());
        assert!(StragglerModel::none().with_base_rate(0.0).validate(5).is_err());
        assert!(StragglerModel::none().with_slow_factor(0.5).validate(5).is_err());
        assert!(StragglerModel::delay(0.3).validate(5).is_ok());
    }

    #[test]
    fn model_json_uses_one_based_workers() {
        let m = StragglerModel::fixed_set(vec![0, 3]);
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"kind\":\"fixed-set\""));
        assert!(s.contains("\"workers\":[1,4]"));
        let back: StragglerModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<StragglerModel>(r#"{"kind":"fixed-set","workers":[0]}"#).is_err());
        let d: StragglerModel = serde_json::from_str(r#"{"kind":"bernoulli","q":0.1}"#).unwrap();
        assert_eq!(d.slow_factor, 10.0);
    }

    #[test]
    fn random_set_draws_exact_count() {
        let m = StragglerModel::random_set(3).with_seed(4);
        for job in 0..20 {
            let slow = m.draw(10, job).iter().filter(|s| **s == WorkerState::Slow).count();
            assert_eq!(slow, 3);
        }
        assert_eq!(m.draw(10, 7), m.draw(10, 7));
    }

    #[test]
    fn cross_code_under_failures_always_matches_direct_product() {
        let a = gaussian_matrix(24, 5, 8).unwrap();
        let x = gaussian_vector(5, 9);
        let code = make_cross(12, 16, 2.0, 2.0, DEFAULT_COEFF_SET_SIZE, 3).unwrap();
        let job = TransformJob::new(&a, &x, &code).unwrap();
        let model = StragglerModel::bernoulli(0.1);
        let mut ok = 0;
        for seed in 0..40 {
            match job.run(&model, seed) {
                Ok(tr) => {
                    ok += 1;
                    assert!(tr.relative_error <= VERIFY_TOLERANCE);
                }
                Err(e) => assert!(e.is_infeasible(), "{e}"),
            }
        }
        assert!(ok > 0);
    }

    #[test]
    fn eta_zero_keeps_iterate() {
        let (a, _, b) = least_squares_problem(40, 5, 1).unwrap();
        let code = make_one_diagonal(4);
        let tr = run_coded_gd(&a, &b, &code, 0.0, 5, &StragglerModel::random_set(1), 2).unwrap();
        assert!(tr.final_x.iter().all(|v| *v == 0.0));
        assert!(tr.iterations.iter().all(|it| it.gradient_norm == 0.0));
        assert!(tr.iterations.windows(2).all(|w| w[0].time < w[1].time));
    }

    #[test]
    fn coded_gd_matches_uncoded() {
        let (a, x_star, b) = least_squares_problem(120, 6, 4).unwrap();
        let eta = default_step_size(&a).unwrap();
        let uncoded = run_coded_gd(&a, &b, &CodingMatrix::identity(4), eta, 60, &StragglerModel::none(), 0).unwrap();
        let code = make_s_diagonal(4, 6, 2, DEFAULT_COEFF_SET_SIZE, 1).unwrap();
        let coded = run_coded_gd(&a, &b, &code, eta, 60, &StragglerModel::random_set(2), 5).unwrap();
        for (u, c) in uncoded.iterates.iter().zip(&coded.iterates) {
            assert!(c.relative_error(u) < 1e-6);
        }
        assert!(coded.final_x.relative_error(&x_star) < 1e-3);
        assert!(uncoded.gradient_norm_non_increasing());
        assert!(coded.gradient_norm_non_increasing());
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let a = DataMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((default_step_size(&a).unwrap() - 1.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn compare_coded_beats_slow_uncoded() {
        let config = ExperimentConfig {
            n: 4,
            rows: 40,
            cols: 6,
            density: None,
            schemes: vec![CodeSpec::one_diagonal(4)],
            model: StragglerModel::random_set(1).with_slow_factor(10.0),
            trials: 30,
            seed: 7,
            include_uncoded: true,
        };
        let report = compare_schemes(&config).unwrap();
        let coded: Vec<f64> = report.records("one-diagonal").map(|r| r.job_time.unwrap()).collect();
        let uncoded: Vec<f64> = report.records("uncoded").map(|r| r.job_time.unwrap()).collect();
        assert_eq!(coded.len(), 30);
        for (c, u) in coded.iter().zip(&uncoded) {
            assert!(c < u, "{c} vs {u}");
        }
        assert_eq!(report.to_json(), compare_schemes(&config).unwrap().to_json());
        assert_eq!(report.trials_csv().lines().count(), 61);
    }

    #[test]
    fn config_roundtrips_through_json() {
        let json = r#"{"n":4,"rows":16,"cols":3,"trials":2,
            "schemes":[{"family":"s-diagonal","s":1,"n":4,"m":5},{"family":"cross","d1":2,"d2":2,"n":4,"m":6,"seed":3}],
            "model":{"kind":"fixed-set","workers":[1],"slow_factor":20}}"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert!(cfg.include_uncoded);
        assert_eq!(cfg.model.kind, StragglerKind::FixedSet { workers: vec![0] });
        let report = compare_schemes(&cfg).unwrap();
        assert_eq!(report.summaries.len(), 3);
        assert_eq!(report.summaries[2].scheme, "uncoded");
        let mismatched = ExperimentConfig {
            n: 5,
            ..cfg
        };
        assert!(matches!(compare_schemes(&mismatched), Err(SimError::InvalidConfig(_))));
    }
}
