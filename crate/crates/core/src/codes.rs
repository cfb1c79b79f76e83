//! Coding matrices and encoding.
//!
//! A [`CodingMatrix`] `M` is an `m x n` sparse integer matrix; worker `i`
//! stores the coded block `Ã_i = Σ_j m_ij · A_j`. Four constructions are
//! provided:
//!
//! * s-diagonal: worker `i` combines blocks `max(0, i-s) ..= min(i, n-1)`
//!   (0-based) with coefficients drawn uniformly from `{1..|S|}`, `m = n+s`.
//! * one-diagonal: the unit-coefficient special case with `s = 1`.
//! * p-Bernoulli: each cell nonzero independently with probability `p`.
//! * (d1, d2)-cross: each row picks `d1` columns and each column picks `d2`
//!   rows uniformly without replacement; the support is the union.
//!
//! Indices are 0-based in the API. The JSON form uses 1-based worker and
//! block indices.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{self, AnalysisError};
use crate::block::{BlockError, BlockPartition, DataMatrix};
use crate::exact::IntMatrix;
use crate::rng::{derive_seed, fractional_count, rng_from_seed, sample_without_replacement};

/// Default size of the coefficient set `S = {1..2³¹-1}`.
pub const DEFAULT_COEFF_SET_SIZE: u64 = (1 << 31) - 1;

const MAX_COEFF_SET_SIZE: u64 = 1 << 62;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodeError {
    #[error("invalid code parameters: {0}")]
    InvalidSpec(String),
    #[error("coding matrix has {code} block columns but the partition has {partition} blocks")]
    BlockCountMismatch { code: usize, partition: usize },
    #[error("invalid coding matrix: {0}")]
    InvalidMatrix(String),
    #[error("no valid code after {trials} trials; last rank-deficient subset {}", crate::rng::one_based(witness))]
    NoValidCode { trials: usize, witness: Vec<usize> },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, CodeError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SDiagonal,
    OneDiagonal,
    PBernoulli,
    Cross,
    Uncoded,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SDiagonal => "s-diagonal",
            Family::OneDiagonal => "one-diagonal",
            Family::PBernoulli => "p-bernoulli",
            Family::Cross => "cross",
            Family::Uncoded => "uncoded",
            Family::Custom => "custom",
        }
    }

    /// Families whose support is the s-diagonal band.
    pub fn is_diagonal(self) -> bool {
        matches!(self, Family::SDiagonal | Family::OneDiagonal)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Family-specific construction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyParams {
    SDiagonal { s: usize },
    OneDiagonal,
    PBernoulli { p: f64 },
    Cross { d1: f64, d2: f64 },
    Uncoded,
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::SDiagonal { .. } => Family::SDiagonal,
            FamilyParams::OneDiagonal => Family::OneDiagonal,
            FamilyParams::PBernoulli { .. } => Family::PBernoulli,
            FamilyParams::Cross { .. } => Family::Cross,
            FamilyParams::Uncoded => Family::Uncoded,
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, FamilyParams::PBernoulli { .. } | FamilyParams::Cross { .. })
    }
}

/// Everything needed to (re)build a coding matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    #[serde(flatten)]
    pub params: FamilyParams,
    pub n: usize,
    pub m: usize,
    #[serde(default = "default_coeff_set_size")]
    pub coeff_set_size: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_coeff_set_size() -> u64 {
    DEFAULT_COEFF_SET_SIZE
}

impl CodeSpec {
    pub fn s_diagonal(n: usize, s: usize) -> Self {
        CodeSpec {
            params: FamilyParams::SDiagonal { s },
            n,
            m: n + s,
            coeff_set_size: DEFAULT_COEFF_SET_SIZE,
            seed: 0,
        }
    }

    pub fn one_diagonal(n: usize) -> Self {
        CodeSpec {
            params: FamilyParams::OneDiagonal,
            n,
            m: n + 1,
            coeff_set_size: 1,
            seed: 0,
        }
    }

    pub fn p_bernoulli(n: usize, m: usize, p: f64) -> Self {
        CodeSpec {
            params: FamilyParams::PBernoulli { p },
            n,
            m,
            coeff_set_size: DEFAULT_COEFF_SET_SIZE,
            seed: 0,
        }
    }

    pub fn cross(n: usize, m: usize, d1: f64, d2: f64) -> Self {
        CodeSpec {
            params: FamilyParams::Cross { d1, d2 },
            n,
            m,
            coeff_set_size: DEFAULT_COEFF_SET_SIZE,
            seed: 0,
        }
    }

    pub fn uncoded(n: usize) -> Self {
        CodeSpec {
            params: FamilyParams::Uncoded,
            n,
            m: n,
            coeff_set_size: 1,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_coeff_set_size(mut self, size: u64) -> Self {
        self.coeff_set_size = size;
        self
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CodeError::InvalidSpec(msg));
        if self.n == 0 || self.m == 0 {
            return bad(format!("n and m must be at least 1 (n={}, m={})", self.n, self.m));
        }
        if self.coeff_set_size == 0 || self.coeff_set_size > MAX_COEFF_SET_SIZE {
            return bad(format!("coeff_set_size must lie in 1..=2^62 (got {})", self.coeff_set_size));
        }
        match self.params {
            FamilyParams::SDiagonal { s } if self.m != self.n + s => {
                bad(format!("s-diagonal requires m = n + s (n={}, s={s}, m={})", self.n, self.m))
            }
            FamilyParams::OneDiagonal if self.m != self.n + 1 => {
                bad(format!("one-diagonal requires m = n + 1 (n={}, m={})", self.n, self.m))
            }
            FamilyParams::Uncoded if self.m != self.n => bad("uncoded requires m = n".into()),
            FamilyParams::PBernoulli { p } if !(p > 0.0 && p <= 1.0) => {
                bad(format!("p must lie in (0, 1] (got {p})"))
            }
            FamilyParams::Cross { d1, d2 } => {
                if !(d1 >= 1.0 && d1 <= self.n as f64) {
                    bad(format!("d1 must lie in [1, n={}] (got {d1})", self.n))
                } else if !(d2 >= 1.0 && d2 <= self.m as f64) {
                    bad(format!("d2 must lie in [1, m={}] (got {d2})", self.m))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Build the coding matrix this spec describes.
    pub fn build(&self) -> Result<CodingMatrix> {
        self.validate()?;
        match self.params {
            FamilyParams::SDiagonal { s } => {
                make_s_diagonal(self.n, self.m, s, self.coeff_set_size, self.seed)
            }
            FamilyParams::OneDiagonal => Ok(make_one_diagonal(self.n)),
            FamilyParams::PBernoulli { p } => {
                make_p_bernoulli(self.n, self.m, p, self.coeff_set_size, self.seed)
            }
            FamilyParams::Cross { d1, d2 } => {
                make_cross(self.n, self.m, d1, d2, self.coeff_set_size, self.seed)
            }
            FamilyParams::Uncoded => Ok(CodingMatrix::identity(self.n)),
        }
    }
}

/// The `m x n` coding matrix of a coded computation strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingMatrix {
    workers: usize,
    blocks: usize,
    family: Family,
    seed: u64,
    entries: BTreeMap<(usize, usize), i64>,
}

impl CodingMatrix {
    /// Build from 0-based `(worker, block, coefficient)` entries.
    pub fn from_entries(
        workers: usize,
        blocks: usize,
        family: Family,
        seed: u64,
        entries: impl IntoIterator<Item = (usize, usize, i64)>,
    ) -> Result<Self> {
        if workers == 0 || blocks == 0 {
            return Err(CodeError::InvalidMatrix("m and n must be at least 1".into()));
        }
        let mut map = BTreeMap::new();
        for (i, j, c) in entries {
            if i >= workers || j >= blocks {
                return Err(CodeError::InvalidMatrix(format!(
                    "entry ({}, {}) outside a {workers}x{blocks} matrix",
                    i + 1,
                    j + 1
                )));
            }
            if c <= 0 {
                return Err(CodeError::InvalidMatrix(format!(
                    "coefficient at ({}, {}) must be a positive integer (got {c})",
                    i + 1,
                    j + 1
                )));
            }
            if map.insert((i, j), c).is_some() {
                return Err(CodeError::InvalidMatrix(format!("duplicate entry ({}, {})", i + 1, j + 1)));
            }
        }
        Ok(CodingMatrix {
            workers,
            blocks,
            family,
            seed,
            entries: map,
        })
    }

    pub fn identity(n: usize) -> Self {
        CodingMatrix::from_entries(n, n, Family::Uncoded, 0, (0..n).map(|i| (i, i, 1))).expect("n >= 1")
    }

    /// Number of workers `m`.
    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Number of data blocks `n`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Straggler budget of a diagonal-family code, `m - n`.
    pub fn diagonal_s(&self) -> Option<usize> {
        self.family.is_diagonal().then(|| self.workers - self.blocks)
    }

    pub fn get(&self, worker: usize, block: usize) -> i64 {
        self.entries.get(&(worker, block)).copied().unwrap_or(0)
    }

    /// Nonzero entries in `(worker, block)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.entries.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    /// `(block, coefficient)` pairs of one worker's row.
    pub fn row(&self, worker: usize) -> Vec<(usize, i64)> {
        self.entries
            .range((worker, 0)..(worker + 1, 0))
            .map(|(&(_, j), &c)| (j, c))
            .collect()
    }

    pub fn row_support(&self, worker: usize) -> Vec<usize> {
        self.row(worker).into_iter().map(|(j, _)| j).collect()
    }

    pub fn column_support(&self, block: usize) -> Vec<usize> {
        self.entries
            .keys()
            .filter(|&&(_, j)| j == block)
            .map(|&(i, _)| i)
            .collect()
    }

    pub fn column_degree(&self, block: usize) -> usize {
        self.entries.keys().filter(|&&(_, j)| j == block).count()
    }

    /// Dense integer copy, one row per worker.
    pub fn to_dense(&self) -> IntMatrix {
        let mut d = vec![vec![0i64; self.blocks]; self.workers];
        for (&(i, j), &c) in &self.entries {
            d[i][j] = c;
        }
        d
    }

    /// Rows indexed by `workers`, in the given order.
    pub fn submatrix(&self, workers: &[usize]) -> IntMatrix {
        workers
            .iter()
            .map(|&i| {
                let mut row = vec![0i64; self.blocks];
                for (j, c) in self.row(i) {
                    row[j] = c;
                }
                row
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = CodingMatrixDoc {
            m: self.workers,
            n: self.blocks,
            family: self.family,
            seed: self.seed,
            entries: self
                .entries
                .iter()
                .map(|(&(i, j), &c)| [i as u64 + 1, j as u64 + 1, c as u64])
                .collect(),
        };
        let mut s = serde_json::to_string(&doc).expect("coding matrix serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CodingMatrixDoc = serde_json::from_str(text).map_err(|e| CodeError::Json(e.to_string()))?;
        let mut entries = Vec::with_capacity(doc.entries.len());
        for [i, j, c] in doc.entries {
            if i == 0 || j == 0 {
                return Err(CodeError::InvalidMatrix("entry indices are 1-based".into()));
            }
            let c = i64::try_from(c).map_err(|_| CodeError::InvalidMatrix("coefficient too large".into()))?;
            entries.push((i as usize - 1, j as usize - 1, c));
        }
        CodingMatrix::from_entries(doc.m, doc.n, doc.family, doc.seed, entries)
    }
}

impl fmt::Display for CodingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_dense() {
            let cells: Vec<String> = row.iter().map(i64::to_string).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CodingMatrixDoc {
    m: usize,
    n: usize,
    family: Family,
    seed: u64,
    entries: Vec<[u64; 3]>,
}

fn draw_coeff<R: Rng>(rng: &mut R, coeff_set_size: u64) -> i64 {
    rng.random_range(1..=coeff_set_size) as i64
}

/// s-diagonal code: worker `i` (0-based) covers blocks
/// `max(0, i-s) ..= min(i, n-1)`.
pub fn make_s_diagonal(n: usize, m: usize, s: usize, coeff_set_size: u64, seed: u64) -> Result<CodingMatrix> {
    if n == 0 {
        return Err(CodeError::InvalidSpec("n must be at least 1".into()));
    }
    if m != n + s {
        return Err(CodeError::InvalidSpec(format!("s-diagonal requires m = n + s (n={n}, s={s}, m={m})")));
    }
    if coeff_set_size == 0 || coeff_set_size > MAX_COEFF_SET_SIZE {
        return Err(CodeError::InvalidSpec("coeff_set_size must lie in 1..=2^62".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut entries = Vec::with_capacity(n * (s + 1));
    for i in 0..m {
        for j in i.saturating_sub(s)..=i.min(n - 1) {
            entries.push((i, j, draw_coeff(&mut rng, coeff_set_size)));
        }
    }
    CodingMatrix::from_entries(m, n, Family::SDiagonal, seed, entries)
}

/// The unit-coefficient 1-diagonal code with `m = n + 1`.
pub fn make_one_diagonal(n: usize) -> CodingMatrix {
    assert!(n >= 1, "one-diagonal code needs n >= 1");
    let entries = (0..=n).flat_map(|i| (i.saturating_sub(1)..=i.min(n - 1)).map(move |j| (i, j, 1)));
    CodingMatrix::from_entries(n + 1, n, Family::OneDiagonal, 0, entries).expect("valid band")
}

pub fn make_p_bernoulli(n: usize, m: usize, p: f64, coeff_set_size: u64, seed: u64) -> Result<CodingMatrix> {
    let spec = CodeSpec {
        params: FamilyParams::PBernoulli { p },
        n,
        m,
        coeff_set_size,
        seed,
    };
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut entries = Vec::new();
    for i in 0..m {
        for j in 0..n {
            // draw the value unconditionally so the support and value
            // streams stay aligned across p
            let keep = rng.random::<f64>() < p;
            let c = draw_coeff(&mut rng, coeff_set_size);
            if keep {
                entries.push((i, j, c));
            }
        }
    }
    CodingMatrix::from_entries(m, n, Family::PBernoulli, seed, entries)
}

/// (d1, d2)-cross code. Fractional `d1`/`d2` are realised per row/column as
/// `floor(d)` or `ceil(d)` picks with mean `d`.
pub fn make_cross(n: usize, m: usize, d1: f64, d2: f64, coeff_set_size: u64, seed: u64) -> Result<CodingMatrix> {
    let spec = CodeSpec {
        params: FamilyParams::Cross { d1, d2 },
        n,
        m,
        coeff_set_size,
        seed,
    };
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut support = std::collections::BTreeSet::new();
    for i in 0..m {
        let k = fractional_count(&mut rng, d1);
        for j in sample_without_replacement(&mut rng, n, k) {
            support.insert((i, j));
        }
    }
    for j in 0..n {
        let k = fractional_count(&mut rng, d2);
        for i in sample_without_replacement(&mut rng, m, k) {
            support.insert((i, j));
        }
    }
    let entries: Vec<_> = support
        .into_iter()
        .map(|(i, j)| (i, j, draw_coeff(&mut rng, coeff_set_size)))
        .collect();
    CodingMatrix::from_entries(m, n, Family::Cross, seed, entries)
}

/// Number of nonzero entries of `M`.
pub fn computation_load(code: &CodingMatrix) -> usize {
    code.entries.len()
}

/// One worker's coded data.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedAssignment {
    pub worker_id: usize,
    pub coded_block: DataMatrix,
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncodeWarning {
    /// The worker's row of `M` is empty; its result carries no information.
    EmptySupport { worker: usize },
}

impl fmt::Display for EncodeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodeWarning::EmptySupport { worker } => {
                write!(f, "worker {} has an empty coding row; its result is always zero", worker + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub assignments: Vec<EncodedAssignment>,
    pub warnings: Vec<EncodeWarning>,
}

/// Compute every worker's coded block `Ã_i = Σ_j m_ij A_j`.
pub fn encode(partition: &BlockPartition, code: &CodingMatrix) -> Result<Encoded> {
    if partition.block_count() != code.blocks() {
        return Err(CodeError::BlockCountMismatch {
            code: code.blocks(),
            partition: partition.block_count(),
        });
    }
    let rows = partition.block_rows();
    let cols = partition.cols();
    let mut assignments = Vec::with_capacity(code.workers());
    let mut warnings = Vec::new();
    for i in 0..code.workers() {
        let row = code.row(i);
        let support: Vec<usize> = row.iter().map(|&(j, _)| j).collect();
        let coded_block = if row.is_empty() {
            log::warn!("worker {} has an empty coding row", i + 1);
            warnings.push(EncodeWarning::EmptySupport { worker: i });
            if partition.block(0).is_sparse() {
                DataMatrix::csr(rows, cols, vec![0; rows + 1], vec![], vec![])?
            } else {
                DataMatrix::zeros(rows, cols)?
            }
        } else {
            let terms: Vec<(f64, &DataMatrix)> =
                row.iter().map(|&(j, c)| (c as f64, partition.block(j))).collect();
            DataMatrix::linear_combination(&terms, rows, cols)?
        };
        assignments.push(EncodedAssignment {
            worker_id: i,
            coded_block,
            support,
        });
    }
    Ok(Encoded { assignments, warnings })
}

/// Redraw a diagonal-family code until every `n x n` row submatrix is
/// nonsingular. Trial `t` uses seed `spec.seed` for `t = 0` and
/// `derive_seed(spec.seed, t)` afterwards.
pub fn regenerate_until_valid(spec: &CodeSpec, max_trials: usize) -> Result<(CodingMatrix, usize)> {
    spec.validate()?;
    if !spec.family().is_diagonal() {
        return Err(CodeError::InvalidSpec(format!(
            "regeneration with exhaustive verification applies to diagonal codes, not {}",
            spec.family()
        )));
    }
    if max_trials == 0 {
        return Err(CodeError::InvalidSpec("max_trials must be at least 1".into()));
    }
    let mut witness = Vec::new();
    for t in 0..max_trials {
        let seed = if t == 0 { spec.seed } else { derive_seed(spec.seed, t as u64) };
        let code = spec.with_seed(seed).build()?;
        match analysis::first_singular_subset(&code)? {
            None => return Ok((code, t + 1)),
            Some(w) => {
                log::debug!("trial {} rejected; singular rows {:?}", t + 1, w);
                witness = w;
            }
        }
    }
    Err(CodeError::NoValidCode {
        trials: max_trials,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_one_band() {
        let m = make_s_diagonal(4, 5, 1, 1, 9).unwrap();
        let supports: Vec<Vec<usize>> = (0..5).map(|i| m.row_support(i)).collect();
        assert_eq!(supports, vec![vec![0], vec![0, 1], vec![1, 2], vec![2, 3], vec![3]]);
        assert_eq!(computation_load(&m), 8);
        assert_eq!(m.entries().map(|e| e.2).collect::<Vec<_>>(), vec![1; 8]);
    }

    #[test]
    fn single_entry_diagonal() {
        let m = make_s_diagonal(1, 1, 0, 5, 0).unwrap();
        assert_eq!(computation_load(&m), 1);
    }

    #[test]
    fn s_diagonal_load_counts_band_cells() {
        let m = make_s_diagonal(8, 11, 3, DEFAULT_COEFF_SET_SIZE, 4).unwrap();
        let mut band = 0;
        for i in 0..11usize {
            for j in 0..8usize {
                if j + 3 >= i && j <= i {
                    band += 1;
                }
            }
        }
        assert_eq!(band, 32);
        assert_eq!(computation_load(&m), 32);
        assert_eq!(computation_load(&make_s_diagonal(10, 12, 2, 7, 1).unwrap()), 30);
    }

    #[test]
    fn s_diagonal_rejects_wrong_m() {
        assert!(matches!(make_s_diagonal(4, 6, 1, 1, 0), Err(CodeError::InvalidSpec(_))));
    }

    #[test]
    fn one_diagonal_shapes() {
        let one = make_one_diagonal(1);
        assert_eq!(one.workers(), 2);
        assert_eq!(one.row(0), vec![(0, 1)]);
        assert_eq!(one.row(1), vec![(0, 1)]);
        let four = make_one_diagonal(4);
        assert_eq!(four, {
            let mut b = make_s_diagonal(4, 5, 1, 1, 0).unwrap();
            b.family = Family::OneDiagonal;
            b
        });
        assert_eq!(computation_load(&make_one_diagonal(7)), 14);
    }

    #[test]
    fn bernoulli_p_one_is_dense() {
        let m = make_p_bernoulli(10, 12, 1.0, 1, 3).unwrap();
        assert_eq!(computation_load(&m), 120);
        assert!(m.entries().all(|e| e.2 == 1));
        assert!(make_p_bernoulli(3, 3, 0.0, 1, 0).is_err());
        assert!(make_p_bernoulli(3, 3, 1.5, 1, 0).is_err());
    }

    #[test]
    fn constructions_are_deterministic() {
        let a = make_p_bernoulli(30, 34, 0.2, DEFAULT_COEFF_SET_SIZE, 77).unwrap();
        let b = make_p_bernoulli(30, 34, 0.2, DEFAULT_COEFF_SET_SIZE, 77).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = make_cross(20, 24, 2.0, 2.5, DEFAULT_COEFF_SET_SIZE, 5).unwrap();
        let d = make_cross(20, 24, 2.0, 2.5, DEFAULT_COEFF_SET_SIZE, 5).unwrap();
        assert_eq!(c, d);
        assert_ne!(c, make_cross(20, 24, 2.0, 2.5, DEFAULT_COEFF_SET_SIZE, 6).unwrap());
    }

    #[test]
    fn cross_saturates_when_dense() {
        let m = make_cross(5, 7, 5.0, 7.0, 3, 1).unwrap();
        assert_eq!(computation_load(&m), 35);
    }

    #[test]
    fn cross_rows_and_columns_nonempty() {
        for seed in 0..100 {
            let m = make_cross(4, 5, 1.0, 1.0, 9, seed).unwrap();
            for i in 0..5 {
                assert!(!m.row(i).is_empty());
            }
            for j in 0..4 {
                assert!(m.column_degree(j) >= 1);
            }
            assert!(computation_load(&m) <= 5 + 4);
        }
    }

    #[test]
    fn cross_rejects_out_of_range_degrees() {
        assert!(make_cross(4, 5, 0.5, 1.0, 1, 0).is_err());
        assert!(make_cross(4, 5, 5.0, 1.0, 1, 0).is_err());
        assert!(make_cross(4, 5, 1.0, 6.0, 1, 0).is_err());
    }

    #[test]
    fn json_is_sorted_and_one_based() {
        let m = make_one_diagonal(2);
        assert_eq!(
            m.to_json(),
            "{\"m\":3,\"n\":2,\"family\":\"one-diagonal\",\"seed\":0,\"entries\":[[1,1,1],[2,1,1],[2,2,1],[3,2,1]]}\n"
        );
        assert_eq!(CodingMatrix::from_json(&m.to_json()).unwrap(), m);
        assert!(CodingMatrix::from_json("{\"m\":1,\"n\":1,\"family\":\"custom\",\"seed\":0,\"entries\":[[0,1,1]]}").is_err());
        assert!(CodingMatrix::from_json("{\"m\":1,\"n\":1,\"family\":\"custom\",\"seed\":0,\"entries\":[[2,1,1]]}").is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(CodeSpec::s_diagonal(4, 1).validate().is_ok());
        let mut bad = CodeSpec::s_diagonal(4, 1);
        bad.m = 7;
        assert!(bad.validate().is_err());
        assert!(CodeSpec::p_bernoulli(4, 5, 0.0).validate().is_err());
        assert!(CodeSpec::cross(4, 5, 2.0, 2.0).with_coeff_set_size(0).validate().is_err());
        let json = serde_json::to_string(&CodeSpec::cross(20, 24, 2.0, 2.5).with_seed(3)).unwrap();
        let back: CodeSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, CodeSpec::cross(20, 24, 2.0, 2.5).with_seed(3));
    }

    #[test]
    fn encode_identity_and_empty_rows() {
        let a = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let p = crate::block::partition(&a, 3).unwrap();
        let enc = encode(&p, &CodingMatrix::identity(3)).unwrap();
        for (j, asg) in enc.assignments.iter().enumerate() {
            assert_eq!(&asg.coded_block, p.block(j));
        }
        assert!(enc.warnings.is_empty());

        let sparse_row = CodingMatrix::from_entries(2, 3, Family::Custom, 0, [(0, 0, 1), (0, 2, 2)]).unwrap();
        let enc = encode(&p, &sparse_row).unwrap();
        assert_eq!(enc.warnings, vec![EncodeWarning::EmptySupport { worker: 1 }]);
        assert_eq!(enc.assignments[1].coded_block.nnz(), 0);
        assert_eq!(enc.assignments[0].coded_block.get(0, 1), 2.0 + 2.0 * 6.0);

        assert!(matches!(
            encode(&p, &CodingMatrix::identity(2)),
            Err(CodeError::BlockCountMismatch { .. })
        ));
    }

    #[test]
    fn regenerate_unit_band_s1_succeeds_first_try() {
        let spec = CodeSpec::s_diagonal(4, 1).with_coeff_set_size(1);
        let (code, trials) = regenerate_until_valid(&spec, 3).unwrap();
        assert_eq!(trials, 1);
        assert_eq!(computation_load(&code), 8);
    }

    #[test]
    fn regenerate_unit_band_s2_fails_with_witness() {
        let spec = CodeSpec::s_diagonal(4, 2).with_coeff_set_size(1);
        match regenerate_until_valid(&spec, 4) {
            Err(CodeError::NoValidCode { trials, witness }) => {
                assert_eq!(trials, 4);
                assert_eq!(witness.len(), 4);
                let code = spec.build().unwrap();
                assert!(crate::exact::rank(&code.submatrix(&witness)) < 4);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn regenerate_rejects_random_families() {
        assert!(regenerate_until_valid(&CodeSpec::cross(4, 5, 1.0, 1.0), 2).is_err());
    }
}
