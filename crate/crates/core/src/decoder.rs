//! Recovering `y = Ax` from `n` worker results.
//!
//! The received results satisfy `ỹ = M^U · [A_1 x; …; A_n x]` where `M^U` is
//! the square submatrix of the coding matrix on the received workers.
//! Three decoders are provided:
//!
//! * [`hybrid_decode`] peels singleton rows (ripples) and, when none is
//!   left, recovers one block directly by a rooting step: solve
//!   `(M^U)ᵀ u = e_k` exactly and take `Σ_k u_k ỹ_k`.
//! * [`diagonal_decode`] applies the rooting schedule for s-diagonal codes
//!   that needs at most `s` rooting steps: root the blocks whose same-index
//!   worker is missing among the first `n`, then peel.
//! * [`inverse_decode`] applies the exact inverse of `M^U`; reference only.
//!
//! All three are generic over [`Scalar`], so the same code path runs on
//! `f64` data and on exact rationals.
//!
//! ## Work accounting
//!
//! `scalar_ops` counts multiply-add pairs on block entries. With block
//! length `b`: recovering a block from a ripple costs `b` (scaling by the
//! pivot coefficient); each subtraction of a recovered block from another
//! result that still has unknowns costs `b`; a rooting step costs `b` per nonzero weight `u_k`. The
//! inverse decoder is charged `n² · b`, a dense application of the
//! precomputed inverse.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::Vector;
use crate::codes::CodingMatrix;
use crate::exact::{self, IntMatrix};
use crate::rng::rng_from_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("not decodable from this subset: M^U is singular (workers {}, {recovered} of {blocks} blocks recovered)", crate::rng::one_based(subset))]
    Singular {
        subset: Vec<usize>,
        recovered: usize,
        blocks: usize,
    },
    #[error("received {got} results, the code needs exactly n = {n}")]
    WrongCount { got: usize, n: usize },
    #[error("worker {0} is out of range or repeated")]
    BadWorker(usize),
    #[error("result of worker {worker} has length {got}, expected {expected}")]
    ResultLength { worker: usize, got: usize, expected: usize },
    #[error("output length {rows} exceeds the {available} decoded entries")]
    OutputLength { rows: usize, available: usize },
    #[error("diagonal schedule needs an s-diagonal code with m = n + {s}")]
    NotDiagonal { s: usize },
}

pub type Result<T> = std::result::Result<T, DecodeError>;

/// Arithmetic the decoders need from a data scalar.
pub trait Scalar: Clone + Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn is_zero(&self) -> bool;
    /// `self += a * b`
    fn mul_add(&mut self, a: &Self, b: &Self);
    fn div_by(&self, d: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &BigRational) -> Self {
        exact::to_f64(r)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn mul_add(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn div_by(&self, d: &Self) -> Self {
        self / d
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn mul_add(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn div_by(&self, d: &Self) -> Self {
        self / d
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().map_or(f64::INFINITY, f64::abs)
    }
}

fn axpy<T: Scalar>(dst: &mut [T], a: &T, src: &[T]) {
    for (d, s) in dst.iter_mut().zip(src) {
        d.mul_add(a, s);
    }
}

/// The results the master has collected: `n` distinct workers and their
/// partial products, kept sorted by worker index.
#[derive(Debug, Clone)]
pub struct ReceivedSet<'a, T = f64> {
    code: &'a CodingMatrix,
    subset: Vec<usize>,
    results: Vec<Vec<T>>,
    output_rows: Option<usize>,
}

impl<'a, T: Scalar> ReceivedSet<'a, T> {
    /// `workers[k]` produced `results[k]`. Workers are 0-based.
    pub fn new(code: &'a CodingMatrix, workers: &[usize], results: Vec<Vec<T>>) -> Result<Self> {
        let n = code.blocks();
        if workers.len() != n || results.len() != n {
            return Err(DecodeError::WrongCount {
                got: workers.len().min(results.len()),
                n,
            });
        }
        let mut pairs: Vec<(usize, Vec<T>)> = workers.iter().copied().zip(results).collect();
        pairs.sort_by_key(|p| p.0);
        for (k, (w, _)) in pairs.iter().enumerate() {
            if *w >= code.workers() || (k > 0 && pairs[k - 1].0 == *w) {
                return Err(DecodeError::BadWorker(*w));
            }
        }
        let len = pairs[0].1.len();
        for (w, r) in &pairs {
            if r.len() != len {
                return Err(DecodeError::ResultLength {
                    worker: *w,
                    got: r.len(),
                    expected: len,
                });
            }
        }
        let (subset, results) = pairs.into_iter().unzip();
        Ok(ReceivedSet {
            code,
            subset,
            results,
            output_rows: None,
        })
    }

    /// Truncate the decoded output to the source row count (drops padding).
    pub fn with_source_rows(mut self, rows: usize) -> Self {
        self.output_rows = Some(rows);
        self
    }

    pub fn code(&self) -> &CodingMatrix {
        self.code
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn results(&self) -> &[Vec<T>] {
        &self.results
    }

    pub fn block_len(&self) -> usize {
        self.results[0].len()
    }

    /// `M^U`, rows in worker order.
    pub fn submatrix(&self) -> IntMatrix {
        self.code.submatrix(&self.subset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeMethod {
    Hybrid,
    DiagonalSchedule,
    Inverse,
}

/// How the hybrid decoder chooses a block when it has to root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootChoice {
    /// Lowest-index unrecovered block.
    #[default]
    Lowest,
    /// Uniform over unrecovered blocks, from a seeded stream.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport<T = f64> {
    pub method: DecodeMethod,
    pub rooting_steps: usize,
    pub peeling_steps: usize,
    pub scalar_ops: u64,
    /// Largest re-encoding mismatch `|M^U y − ỹ|` relative to `max |ỹ|`.
    pub residual: f64,
    /// Decoded blocks concatenated, padding removed.
    #[serde(skip)]
    pub output: Vec<T>,
    #[serde(skip)]
    pub block_len: usize,
}

impl<T> DecodeReport<T> {
    /// The decoded blocks `A_j x` as slices (the last may be truncated by
    /// padding removal).
    pub fn blocks(&self) -> impl Iterator<Item = &[T]> {
        self.output.chunks(self.block_len.max(1))
    }

    pub fn to_json(&self) -> String {
        let summary = DecodeSummary {
            method: self.method,
            rooting_steps: self.rooting_steps,
            peeling_steps: self.peeling_steps,
            scalar_ops: self.scalar_ops,
            residual: self.residual,
        };
        serde_json::to_string(&summary).expect("decode summary serialises")
    }
}

impl DecodeReport<f64> {
    pub fn output_vector(&self) -> Vector {
        Vector::new(self.output.clone())
    }
}

#[derive(Serialize)]
struct DecodeSummary {
    method: DecodeMethod,
    rooting_steps: usize,
    peeling_steps: usize,
    scalar_ops: u64,
    residual: f64,
}

/// Peeling decoder state: the residual coefficient rows and results after
/// every recovered block has been subtracted out.
#[derive(Debug, Clone)]
pub struct PeelingState<'r, 'a, T> {
    received: &'r ReceivedSet<'a, T>,
    msub: IntMatrix,
    /// `msub⁻¹`, computed on the first rooting step; row `j` roots block `j`.
    inverse: Option<Vec<Vec<BigRational>>>,
    rows: Vec<BTreeMap<usize, i64>>,
    residual: Vec<Vec<T>>,
    recovered: Vec<Option<Vec<T>>>,
    rooting_steps: usize,
    peeling_steps: usize,
    scalar_ops: u64,
}

impl<'r, 'a, T: Scalar> PeelingState<'r, 'a, T> {
    pub fn new(received: &'r ReceivedSet<'a, T>) -> Self {
        let msub = received.submatrix();
        let rows = msub
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, c)| **c != 0).map(|(j, &c)| (j, c)).collect())
            .collect();
        PeelingState {
            received,
            rows,
            msub,
            inverse: None,
            residual: received.results.clone(),
            recovered: vec![None; received.code.blocks()],
            rooting_steps: 0,
            peeling_steps: 0,
            scalar_ops: 0,
        }
    }

    pub fn is_done(&self) -> bool {
        self.recovered.iter().all(Option::is_some)
    }

    pub fn recovered_count(&self) -> usize {
        self.recovered.iter().filter(|r| r.is_some()).count()
    }

    pub fn unrecovered(&self) -> Vec<usize> {
        (0..self.recovered.len()).filter(|&j| self.recovered[j].is_none()).collect()
    }

    pub fn recovered_block(&self, j: usize) -> Option<&[T]> {
        self.recovered[j].as_deref()
    }

    pub fn residual_rows(&self) -> &[BTreeMap<usize, i64>] {
        &self.rows
    }

    pub fn residual_results(&self) -> &[Vec<T>] {
        &self.residual
    }

    pub fn rooting_steps(&self) -> usize {
        self.rooting_steps
    }

    pub fn peeling_steps(&self) -> usize {
        self.peeling_steps
    }

    /// Lowest received row with exactly one remaining coefficient, as
    /// `(row position, block)`.
    pub fn find_ripple(&self) -> Option<(usize, usize)> {
        self.rows
            .iter()
            .position(|r| r.len() == 1)
            .map(|k| (k, *self.rows[k].keys().next().unwrap()))
    }

    /// Recover a block from the ripple at row position `k`.
    pub fn peel(&mut self, k: usize) {
        assert_eq!(self.rows[k].len(), 1, "peel needs a singleton row");
        let (&j, &c) = self.rows[k].iter().next().unwrap();
        let coef = T::from_i64(c);
        let block: Vec<T> = self.residual[k].iter().map(|v| v.div_by(&coef)).collect();
        self.scalar_ops += block.len() as u64;
        self.rows[k].clear();
        self.residual[k].iter_mut().for_each(|v| *v = T::zero());
        self.peeling_steps += 1;
        self.absorb(j, block);
    }

    /// Recover block `j` by a rooting step on the original results.
    pub fn root(&mut self, j: usize) -> Result<()> {
        assert!(self.recovered[j].is_none(), "block {j} already recovered");
        if self.inverse.is_none() {
            self.inverse = exact::inverse(&self.msub);
        }
        let Some(inv) = &self.inverse else {
            return Err(DecodeError::Singular {
                subset: self.received.subset.clone(),
                recovered: self.recovered_count(),
                blocks: self.recovered.len(),
            });
        };
        let u = &inv[j];
        let len = self.received.block_len();
        let mut block = vec![T::zero(); len];
        for (uk, yk) in u.iter().zip(&self.received.results) {
            if Zero::is_zero(uk) {
                continue;
            }
            axpy(&mut block, &T::from_rational(uk), yk);
            self.scalar_ops += len as u64;
        }
        self.rooting_steps += 1;
        self.absorb(j, block);
        Ok(())
    }

    /// Record block `j` and subtract it from every residual result that
    /// still references it. A row left with no unknowns is redundant; its
    /// residual is exactly zero, so it is cleared without charge.
    fn absorb(&mut self, j: usize, block: Vec<T>) {
        for (row, res) in self.rows.iter_mut().zip(self.residual.iter_mut()) {
            if let Some(c) = row.remove(&j) {
                if row.is_empty() {
                    res.iter_mut().for_each(|v| *v = T::zero());
                } else {
                    axpy(res, &T::from_i64(-c), &block);
                    self.scalar_ops += block.len() as u64;
                }
            }
        }
        self.recovered[j] = Some(block);
    }

    /// Peel until no ripple is left.
    pub fn peel_all(&mut self) {
        while let Some((k, _)) = self.find_ripple() {
            self.peel(k);
        }
    }

    fn finish(self, method: DecodeMethod) -> Result<DecodeReport<T>> {
        let blocks: Vec<Vec<T>> = self.recovered.into_iter().map(|b| b.expect("all recovered")).collect();
        build_report(self.received, method, blocks, self.rooting_steps, self.peeling_steps, self.scalar_ops)
    }
}

fn build_report<T: Scalar>(
    received: &ReceivedSet<'_, T>,
    method: DecodeMethod,
    blocks: Vec<Vec<T>>,
    rooting_steps: usize,
    peeling_steps: usize,
    scalar_ops: u64,
) -> Result<DecodeReport<T>> {
    let residual = reencode_residual(received, &blocks);
    let block_len = received.block_len();
    let mut output: Vec<T> = blocks.into_iter().flatten().collect();
    if let Some(rows) = received.output_rows {
        if rows > output.len() {
            return Err(DecodeError::OutputLength {
                rows,
                available: output.len(),
            });
        }
        output.truncate(rows);
    }
    Ok(DecodeReport {
        method,
        rooting_steps,
        peeling_steps,
        scalar_ops,
        residual,
        output,
        block_len,
    })
}

fn reencode_residual<T: Scalar>(received: &ReceivedSet<'_, T>, blocks: &[Vec<T>]) -> f64 {
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    for (&w, y) in received.subset.iter().zip(&received.results) {
        let mut acc = vec![T::zero(); y.len()];
        for (j, c) in received.code.row(w) {
            axpy(&mut acc, &T::from_i64(c), &blocks[j]);
        }
        for (a, b) in acc.iter().zip(y) {
            worst = worst.max(a.sub(b).magnitude());
            scale = scale.max(b.magnitude());
        }
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

/// Hybrid peeling/rooting decoder with lowest-index rooting.
pub fn hybrid_decode<T: Scalar>(received: &ReceivedSet<'_, T>) -> Result<DecodeReport<T>> {
    hybrid_decode_with(received, RootChoice::Lowest)
}

pub fn hybrid_decode_with<T: Scalar>(received: &ReceivedSet<'_, T>, choice: RootChoice) -> Result<DecodeReport<T>> {
    let mut rng = match choice {
        RootChoice::Random(seed) => Some(rng_from_seed(seed)),
        RootChoice::Lowest => None,
    };
    let mut state = PeelingState::new(received);
    loop {
        state.peel_all();
        if state.is_done() {
            break;
        }
        let open = state.unrecovered();
        let j = match rng.as_mut() {
            Some(r) => open[r.random_range(0..open.len())],
            None => open[0],
        };
        state.root(j)?;
    }
    state.finish(DecodeMethod::Hybrid)
}

/// Decoder for s-diagonal codes: root the blocks `j < n` whose worker `j`
/// is not among the received ones, then finish by peeling. Needs at most
/// `s` rooting steps.
pub fn diagonal_decode<T: Scalar>(received: &ReceivedSet<'_, T>, s: usize) -> Result<DecodeReport<T>> {
    let code = received.code;
    if code.diagonal_s() != Some(s) {
        return Err(DecodeError::NotDiagonal { s });
    }
    let n = code.blocks();
    let mut state = PeelingState::new(received);
    let head: Vec<usize> = received.subset.iter().copied().filter(|&w| w < n).collect();
    for j in (0..n).filter(|j| !head.contains(j)) {
        state.root(j)?;
    }
    loop {
        state.peel_all();
        if state.is_done() {
            break;
        }
        // unreachable for a band support; kept so a malformed code still decodes
        log::warn!("diagonal schedule stalled; extra rooting step");
        let j = state.unrecovered()[0];
        state.root(j)?;
    }
    state.finish(DecodeMethod::DiagonalSchedule)
}

/// Apply the exact inverse of `M^U` to the stacked results.
pub fn inverse_decode<T: Scalar>(received: &ReceivedSet<'_, T>) -> Result<DecodeReport<T>> {
    let n = received.code.blocks();
    let inv = exact::inverse(&received.submatrix()).ok_or_else(|| DecodeError::Singular {
        subset: received.subset.clone(),
        recovered: 0,
        blocks: n,
    })?;
    let len = received.block_len();
    let blocks: Vec<Vec<T>> = inv
        .iter()
        .map(|row| {
            let mut b = vec![T::zero(); len];
            for (w, y) in row.iter().zip(&received.results) {
                if !Zero::is_zero(w) {
                    axpy(&mut b, &T::from_rational(w), y);
                }
            }
            b
        })
        .collect();
    let ops = (n * n * len) as u64;
    build_report(received, DecodeMethod::Inverse, blocks, 0, 0, ops)
}

/// Exact `(M^U)⁻¹` for a received subset, as used by [`inverse_decode`].
pub fn subset_inverse(code: &CodingMatrix, subset: &[usize]) -> Option<Vec<Vec<BigRational>>> {
    exact::inverse(&code.submatrix(subset))
}

/// Rooting weights `u` with `(M^U)ᵀ u = e_k`.
pub fn rooting_vector(msub: &[Vec<i64>], k: usize) -> Result<Vec<BigRational>> {
    exact::solve_transposed_unit(msub, k).ok_or_else(|| DecodeError::Singular {
        subset: Vec::new(),
        recovered: 0,
        blocks: msub.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{make_one_diagonal, make_s_diagonal, Family};
    use num_bigint::BigInt;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    /// Blocks `A_j x` for the tests: block j is `[j+1, 10(j+1)]`.
    fn blocks(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|j| vec![(j + 1) as f64, 10.0 * (j + 1) as f64]).collect()
    }

    fn results(code: &CodingMatrix, subset: &[usize], blocks: &[Vec<f64>]) -> Vec<Vec<f64>> {
        subset
            .iter()
            .map(|&w| {
                let mut y = vec![0.0; blocks[0].len()];
                for (j, c) in code.row(w) {
                    axpy(&mut y, &(c as f64), &blocks[j]);
                }
                y
            })
            .collect()
    }

    #[test]
    fn rooting_vector_identity_and_example_one() {
        let id = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        assert_eq!(rooting_vector(&id, 1).unwrap(), vec![q(0), q(1), q(0)]);
        let code = make_one_diagonal(4);
        let msub = code.submatrix(&[1, 2, 3, 4]);
        // A_1 x = ỹ_2 − ỹ_3 + ỹ_4 − ỹ_5
        assert_eq!(rooting_vector(&msub, 0).unwrap(), vec![q(1), q(-1), q(1), q(-1)]);
        assert_eq!(rooting_vector(&msub, 3).unwrap(), vec![q(0), q(0), q(0), q(1)]);
        assert!(rooting_vector(&[vec![1, 1], vec![1, 1]], 0).is_err());
    }

    #[test]
    fn hybrid_on_identity_peels_everything() {
        let code = CodingMatrix::identity(3);
        let b = blocks(3);
        let rs = ReceivedSet::new(&code, &[0, 1, 2], results(&code, &[0, 1, 2], &b)).unwrap();
        let rep = hybrid_decode(&rs).unwrap();
        assert_eq!(rep.rooting_steps, 0);
        assert_eq!(rep.peeling_steps, 3);
        assert_eq!(rep.output, b.concat());
    }

    #[test]
    fn example_one_decodes_without_rooting() {
        let code = make_one_diagonal(4);
        let b = blocks(4);
        let subset = [1, 2, 3, 4];
        let rs = ReceivedSet::new(&code, &subset, results(&code, &subset, &b)).unwrap();
        let rep = hybrid_decode(&rs).unwrap();
        assert!(rep.rooting_steps <= 1);
        assert_eq!(rep.output, b.concat());
        assert_eq!(rep.residual, 0.0);
    }

    #[test]
    fn diagonal_schedule_example_one() {
        let code = make_one_diagonal(4);
        let b = blocks(4);
        let subset = [1, 2, 3, 4];
        let rs = ReceivedSet::new(&code, &subset, results(&code, &subset, &b)).unwrap();
        let rep = diagonal_decode(&rs, 1).unwrap();
        assert_eq!(rep.rooting_steps, 1);
        assert_eq!(rep.peeling_steps, 3);
        assert_eq!(rep.output, b.concat());

        let head = [0, 1, 2, 3];
        let rs = ReceivedSet::new(&code, &head, results(&code, &head, &b)).unwrap();
        let rep = diagonal_decode(&rs, 1).unwrap();
        assert_eq!(rep.rooting_steps, 0);
        assert!(diagonal_decode(&rs, 2).is_err());
    }

    #[test]
    fn received_set_validation() {
        let code = make_one_diagonal(2);
        assert!(matches!(
            ReceivedSet::<f64>::new(&code, &[0], vec![vec![1.0]]),
            Err(DecodeError::WrongCount { .. })
        ));
        assert!(matches!(
            ReceivedSet::<f64>::new(&code, &[1, 1], vec![vec![1.0], vec![1.0]]),
            Err(DecodeError::BadWorker(1))
        ));
        assert!(matches!(
            ReceivedSet::<f64>::new(&code, &[0, 3], vec![vec![1.0], vec![1.0]]),
            Err(DecodeError::BadWorker(3))
        ));
        assert!(matches!(
            ReceivedSet::<f64>::new(&code, &[0, 1], vec![vec![1.0], vec![1.0, 2.0]]),
            Err(DecodeError::ResultLength { .. })
        ));
        // unsorted input is sorted together with its results
        let rs = ReceivedSet::new(&code, &[2, 0], vec![vec![5.0], vec![7.0]]).unwrap();
        assert_eq!(rs.subset(), &[0, 2]);
        assert_eq!(rs.results(), &[vec![7.0], vec![5.0]]);
    }

    #[test]
    fn singular_subsets_are_reported() {
        let code = make_s_diagonal(4, 6, 2, 1, 0).unwrap();
        let subset = [0, 2, 3, 5];
        let b = blocks(4);
        let rs = ReceivedSet::new(&code, &subset, results(&code, &subset, &b)).unwrap();
        match hybrid_decode(&rs) {
            Err(DecodeError::Singular { recovered, .. }) => assert!(recovered < 4),
            other => panic!("expected singular, got {other:?}"),
        }
        assert!(inverse_decode(&rs).is_err());
    }

    #[test]
    fn padding_is_stripped() {
        let code = CodingMatrix::identity(2);
        let rs = ReceivedSet::new(&code, &[0, 1], vec![vec![1.0, 2.0], vec![3.0, 0.0]])
            .unwrap()
            .with_source_rows(3);
        let rep = hybrid_decode(&rs).unwrap();
        assert_eq!(rep.output, vec![1.0, 2.0, 3.0]);
        let too_long = ReceivedSet::new(&code, &[0, 1], vec![vec![1.0], vec![3.0]])
            .unwrap()
            .with_source_rows(3);
        assert!(matches!(hybrid_decode(&too_long), Err(DecodeError::OutputLength { .. })));
    }

    #[test]
    fn exact_mode_and_random_rooting() {
        let code = make_s_diagonal(5, 7, 2, 13, 4).unwrap();
        let subset = [1, 2, 3, 4, 5];
        let b: Vec<Vec<BigRational>> = (0..5).map(|j| vec![q(j as i64 - 2), q(3 * j as i64 + 1)]).collect();
        let ys: Vec<Vec<BigRational>> = subset
            .iter()
            .map(|&w| {
                let mut y = vec![q(0), q(0)];
                for (j, c) in code.row(w) {
                    axpy(&mut y, &q(c), &b[j]);
                }
                y
            })
            .collect();
        let rs = ReceivedSet::new(&code, &subset, ys).unwrap();
        for choice in [RootChoice::Lowest, RootChoice::Random(1), RootChoice::Random(2)] {
            let rep = hybrid_decode_with(&rs, choice).unwrap();
            assert_eq!(rep.output, b.concat());
            assert_eq!(rep.residual, 0.0);
            assert_eq!(rep.rooting_steps + rep.peeling_steps, 5);
        }
        assert_eq!(inverse_decode(&rs).unwrap().output, b.concat());
    }

    #[test]
    fn report_json_fields() {
        let code = CodingMatrix::from_entries(1, 1, Family::Custom, 0, [(0, 0, 2)]).unwrap();
        let rs = ReceivedSet::new(&code, &[0], vec![vec![4.0]]).unwrap();
        let rep = hybrid_decode(&rs).unwrap();
        assert_eq!(rep.output, vec![2.0]);
        assert_eq!(
            rep.to_json(),
            "{\"method\":\"hybrid\",\"rooting_steps\":0,\"peeling_steps\":1,\"scalar_ops\":1,\"residual\":0.0}"
        );
    }
}
