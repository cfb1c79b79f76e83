//! Exact oracles and Monte Carlo estimators for coding matrices.
//!
//! Exhaustive checks enumerate row subsets in lexicographic order and test
//! each with exact integer rank; they refuse to run past
//! [`ENUMERATION_GUARD`] subsets. Beyond that only the sampling
//! estimators are available.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::{computation_load, CodeError, CodeSpec, CodingMatrix, Family};
use crate::exact;
use crate::rng::{derive_seed, rng_from_seed, sample_subset};

/// Maximum number of subsets an exhaustive check may enumerate.
pub const ENUMERATION_GUARD: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("exhaustive check needs C({m},{k}) = {subsets} subsets, above the limit of {limit}; use the Monte Carlo estimator")]
    GuardExceeded { m: usize, k: usize, subsets: u128, limit: u128 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("code does not resist {s} stragglers; failing worker subset {}", crate::rng::one_based(witness))]
    NotResisting { s: usize, witness: Vec<usize> },
    #[error("lower bound violated: {0}")]
    BoundViolated(String),
    #[error("code construction failed: {0}")]
    Code(String),
}

impl From<CodeError> for AnalysisError {
    fn from(e: CodeError) -> Self {
        AnalysisError::Code(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn guard(m: usize, k: usize) -> Result<()> {
    let subsets = binomial(m, k);
    if subsets > ENUMERATION_GUARD {
        Err(AnalysisError::GuardExceeded {
            m,
            k,
            subsets,
            limit: ENUMERATION_GUARD,
        })
    } else {
        Ok(())
    }
}

/// Lexicographic iterator over the k-subsets of `0..n`.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for t in i + 1..k {
                    next[t] = next[t - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// Bipartite graph between workers (left) and blocks (right) with an edge
/// wherever the coding matrix is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportGraph {
    right: usize,
    adjacency: Vec<Vec<usize>>,
}

impl SupportGraph {
    pub fn from_code(code: &CodingMatrix) -> Self {
        SupportGraph {
            right: code.blocks(),
            adjacency: (0..code.workers()).map(|i| code.row_support(i)).collect(),
        }
    }

    pub fn from_edges(left: usize, right: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); left];
        for &(i, j) in edges {
            assert!(i < left && j < right, "edge out of range");
            adjacency[i].push(j);
        }
        for a in &mut adjacency {
            a.sort_unstable();
            a.dedup();
        }
        SupportGraph { right, adjacency }
    }

    pub fn left(&self) -> usize {
        self.adjacency.len()
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn neighbors(&self, worker: usize) -> &[usize] {
        &self.adjacency[worker]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    /// Size of a maximum matching between `workers` and all blocks.
    pub fn max_matching(&self, workers: &[usize]) -> usize {
        let mut owner: Vec<Option<usize>> = vec![None; self.right];
        let mut size = 0;
        for (slot, &w) in workers.iter().enumerate() {
            let mut seen = vec![false; self.right];
            if self.augment(slot, workers, &mut owner, &mut seen) {
                size += 1;
            }
            debug_assert!(w < self.left());
        }
        size
    }

    fn augment(&self, slot: usize, workers: &[usize], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &b in &self.adjacency[workers[slot]] {
            if seen[b] {
                continue;
            }
            seen[b] = true;
            let free = match owner[b] {
                None => true,
                Some(other) => self.augment(other, workers, owner, seen),
            };
            if free {
                owner[b] = Some(slot);
                return true;
            }
        }
        false
    }
}

/// Whether the workers in `subset` can be matched one-to-one onto all
/// blocks.
pub fn has_perfect_matching(graph: &SupportGraph, subset: &[usize]) -> bool {
    subset.len() == graph.right() && graph.max_matching(subset) == graph.right()
}

/// A subset `I` of `rows` whose supports cover fewer than `|I|` blocks,
/// if one exists. Exponential in `rows.len()`; capped at 20 rows.
pub fn hall_violation(code: &CodingMatrix, rows: &[usize]) -> Result<Option<Vec<usize>>> {
    if rows.len() > 20 {
        return Err(AnalysisError::InvalidInput("Hall check is limited to 20 rows".into()));
    }
    if code.blocks() > 64 {
        return Err(AnalysisError::InvalidInput("Hall check is limited to 64 blocks".into()));
    }
    let supports: Vec<u64> = rows
        .iter()
        .map(|&i| code.row_support(i).iter().fold(0u64, |acc, &j| acc | (1u64 << j)))
        .collect();
    for mask in 1u32..(1u32 << rows.len()) {
        let mut union = 0u64;
        for (k, s) in supports.iter().enumerate() {
            if mask & (1 << k) != 0 {
                union |= s;
            }
        }
        if union.count_ones() < mask.count_ones() {
            let chosen = (0..rows.len()).filter(|k| mask & (1 << k) != 0).map(|k| rows[k]).collect();
            return Ok(Some(chosen));
        }
    }
    Ok(None)
}

/// Whether the rows `subset` of `code` have full column rank `n`.
pub fn subset_full_rank(code: &CodingMatrix, subset: &[usize]) -> bool {
    subset.len() >= code.blocks() && exact::rank(&code.submatrix(subset)) == code.blocks()
}

/// First `n`-subset (lexicographic) whose square submatrix is singular.
pub fn first_singular_subset(code: &CodingMatrix) -> Result<Option<Vec<usize>>> {
    let (m, n) = (code.workers(), code.blocks());
    if m < n {
        return Ok(Some((0..m).collect()));
    }
    guard(m, n)?;
    Ok(Combinations::new(m, n).find(|u| !subset_full_rank(code, u)))
}

/// Smallest `k` such that every k-subset of workers determines all blocks;
/// `m + 1` if even all workers together do not.
pub fn recovery_threshold_exact(code: &CodingMatrix) -> Result<usize> {
    let (m, n) = (code.workers(), code.blocks());
    if m < n || exact::rank(&code.to_dense()) < n {
        return Ok(m + 1);
    }
    for k in n..=m {
        guard(m, k)?;
        if Combinations::new(m, k).all(|u| subset_full_rank(code, &u)) {
            return Ok(k);
        }
    }
    Ok(m + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistVerdict {
    pub resists: bool,
    /// Worker subset of size `m - s` that fails, when `resists` is false.
    pub witness: Option<Vec<usize>>,
}

/// Whether every set of `m - s` surviving workers determines all blocks.
pub fn verify_resists(code: &CodingMatrix, s: usize) -> Result<ResistVerdict> {
    let (m, n) = (code.workers(), code.blocks());
    let fail = |w: Vec<usize>| {
        Ok(ResistVerdict {
            resists: false,
            witness: Some(w),
        })
    };
    if s >= m || m - s < n {
        return fail((0..m.saturating_sub(s)).collect());
    }
    let keep = m - s;
    // a block seen by at most s workers is lost when they all straggle
    for j in 0..n {
        let nbrs = code.column_support(j);
        if nbrs.len() <= s {
            let complement: Vec<usize> = (0..m).filter(|i| !nbrs.contains(i)).take(keep).collect();
            return fail(complement);
        }
    }
    guard(m, keep)?;
    match Combinations::new(m, keep).find(|u| !subset_full_rank(code, u)) {
        Some(w) => fail(w),
        None => Ok(ResistVerdict {
            resists: true,
            witness: None,
        }),
    }
}

/// Slack of a code against the recovery-threshold and load lower bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub family: String,
    pub computation_load: usize,
    pub load_bound: usize,
    pub load_slack: usize,
    pub recovery_threshold: usize,
    pub threshold_bound: usize,
    pub threshold_slack: usize,
}

impl AuditRecord {
    pub const CSV_HEADER: &'static str =
        "family,n,m,s,computation_load,load_bound,load_slack,recovery_threshold,threshold_bound,threshold_slack";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.n,
            self.m,
            self.s,
            self.computation_load,
            self.load_bound,
            self.load_slack,
            self.recovery_threshold,
            self.threshold_bound,
            self.threshold_slack
        )
    }
}

/// Check a code that resists `s` stragglers against `l(M) >= n(s+1)` and
/// `κ(M) >= n`.
pub fn lower_bound_audit(code: &CodingMatrix, s: usize) -> Result<AuditRecord> {
    let verdict = verify_resists(code, s)?;
    if !verdict.resists {
        return Err(AnalysisError::NotResisting {
            s,
            witness: verdict.witness.unwrap_or_default(),
        });
    }
    let n = code.blocks();
    let load = computation_load(code);
    let load_bound = n * (s + 1);
    let threshold = recovery_threshold_exact(code)?;
    if load < load_bound {
        return Err(AnalysisError::BoundViolated(format!("load {load} < n(s+1) = {load_bound}")));
    }
    if threshold < n {
        return Err(AnalysisError::BoundViolated(format!("recovery threshold {threshold} < n = {n}")));
    }
    Ok(AuditRecord {
        n,
        m: code.workers(),
        s,
        family: code.family().to_string(),
        computation_load: load,
        load_bound,
        load_slack: load - load_bound,
        recovery_threshold: threshold,
        threshold_bound: n,
        threshold_slack: threshold - n,
    })
}

/// What a Monte Carlo trial redraws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resample {
    /// Fixed code, fresh uniform n-subset per trial.
    Subset,
    /// Fresh code and fresh n-subset per trial.
    CodeAndSubset,
    /// Fresh code per trial, no subset (load statistics only).
    Code,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    /// Construction parameters when codes were drawn from a spec.
    pub family_params: Option<CodeSpec>,
    pub trials: usize,
    pub resample: Resample,
    pub full_rank_count: Option<usize>,
    pub full_rank_fraction: Option<f64>,
    pub mean_load_per_worker: f64,
    pub load_per_worker_stddev: f64,
    pub seed: u64,
}

impl McReport {
    pub const CSV_HEADER: &'static str =
        "family,n,m,s,p,d1,d2,coeff_set_size,trials,resample,full_rank_count,full_rank_fraction,mean_load_per_worker,load_per_worker_stddev,seed";

    pub fn csv_row(&self) -> String {
        use crate::codes::FamilyParams as F;
        let e = String::new;
        let (s, p, d1, d2) = match self.family_params.map(|spec| spec.params) {
            Some(F::SDiagonal { s }) => (s.to_string(), e(), e(), e()),
            Some(F::OneDiagonal) => ("1".into(), e(), e(), e()),
            Some(F::PBernoulli { p }) => (e(), p.to_string(), e(), e()),
            Some(F::Cross { d1, d2 }) => (e(), e(), d1.to_string(), d2.to_string()),
            Some(F::Uncoded) => ("0".into(), e(), e(), e()),
            None => (e(), e(), e(), e()),
        };
        let coeff = self.family_params.map(|spec| spec.coeff_set_size.to_string());
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.n,
            self.m,
            s,
            p,
            d1,
            d2,
            opt(coeff),
            self.trials,
            serde_json::to_value(self.resample).unwrap().as_str().unwrap(),
            opt(self.full_rank_count.map(|c| c.to_string())),
            opt(self.full_rank_fraction.map(|f| f.to_string())),
            self.mean_load_per_worker,
            self.load_per_worker_stddev,
            self.seed
        )
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fraction of uniformly sampled n-subsets of a fixed code whose square
/// submatrix is nonsingular.
pub fn probabilistic_threshold_estimate(code: &CodingMatrix, trials: usize, seed: u64) -> Result<McReport> {
    if trials == 0 {
        return Err(AnalysisError::InvalidInput("trials must be at least 1".into()));
    }
    let (m, n) = (code.workers(), code.blocks());
    if m < n {
        return Err(AnalysisError::InvalidInput(format!("m = {m} < n = {n}")));
    }
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(seed, t as u64));
            subset_full_rank(code, &sample_subset(&mut rng, m, n))
        })
        .collect();
    let count = hits.iter().filter(|h| **h).count();
    let load = computation_load(code) as f64 / m as f64;
    Ok(McReport {
        family: code.family(),
        n,
        m,
        family_params: None,
        trials,
        resample: Resample::Subset,
        full_rank_count: Some(count),
        full_rank_fraction: Some(count as f64 / trials as f64),
        mean_load_per_worker: load,
        load_per_worker_stddev: 0.0,
        seed,
    })
}

fn trial_code(spec: &CodeSpec, seed: u64, t: usize) -> Result<CodingMatrix> {
    let trial_seed = derive_seed(seed, t as u64);
    Ok(spec.with_seed(derive_seed(trial_seed, 0)).build()?)
}

/// Full-rank probability with a fresh code and a fresh uniform n-subset in
/// every trial, plus load statistics. Trials run in parallel on the
/// current rayon pool; aggregates do not depend on the pool size.
pub fn full_rank_experiment(spec: &CodeSpec, trials: usize, seed: u64) -> Result<McReport> {
    if trials == 0 {
        return Err(AnalysisError::InvalidInput("trials must be at least 1".into()));
    }
    spec.validate()?;
    if spec.m < spec.n {
        return Err(AnalysisError::InvalidInput(format!("m = {} < n = {}", spec.m, spec.n)));
    }
    let outcomes: Vec<(bool, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let code = trial_code(spec, seed, t)?;
            let mut rng = rng_from_seed(derive_seed(derive_seed(seed, t as u64), 1));
            let subset = sample_subset(&mut rng, spec.m, spec.n);
            Ok((
                subset_full_rank(&code, &subset),
                computation_load(&code) as f64 / spec.m as f64,
            ))
        })
        .collect::<Result<_>>()?;
    let count = outcomes.iter().filter(|o| o.0).count();
    let loads: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let (mean, std) = mean_std(&loads);
    Ok(McReport {
        family: spec.family(),
        n: spec.n,
        m: spec.m,
        family_params: Some(*spec),
        trials,
        resample: Resample::CodeAndSubset,
        full_rank_count: Some(count),
        full_rank_fraction: Some(count as f64 / trials as f64),
        mean_load_per_worker: mean,
        load_per_worker_stddev: std,
        seed,
    })
}

/// Mean and standard deviation of `l(M)/m` over freshly drawn codes.
pub fn load_statistics(spec: &CodeSpec, trials: usize, seed: u64) -> Result<McReport> {
    if trials == 0 {
        return Err(AnalysisError::InvalidInput("trials must be at least 1".into()));
    }
    spec.validate()?;
    let loads: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| Ok(computation_load(&trial_code(spec, seed, t)?) as f64 / spec.m as f64))
        .collect::<Result<_>>()?;
    let (mean, std) = mean_std(&loads);
    Ok(McReport {
        family: spec.family(),
        n: spec.n,
        m: spec.m,
        family_params: Some(*spec),
        trials,
        resample: Resample::Code,
        full_rank_count: None,
        full_rank_fraction: None,
        mean_load_per_worker: mean,
        load_per_worker_stddev: std,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{make_one_diagonal, make_s_diagonal, DEFAULT_COEFF_SET_SIZE};

    #[test]
    fn binomials() {
        assert_eq!(binomial(25, 20), 53_130);
        assert_eq!(binomial(11, 8), 165);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(200, 100), u128::MAX);
    }

    #[test]
    fn combinations_enumerate_in_order() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
        assert_eq!(Combinations::new(13, 10).count() as u128, binomial(13, 10));
    }

    #[test]
    fn example_one_threshold() {
        assert_eq!(recovery_threshold_exact(&make_one_diagonal(4)).unwrap(), 4);
        assert_eq!(recovery_threshold_exact(&CodingMatrix::identity(5)).unwrap(), 5);
    }

    #[test]
    fn unit_two_band_threshold_matches_brute_force() {
        let code = make_s_diagonal(4, 6, 2, 1, 0).unwrap();
        // brute force over all 15 four-row subsets, then five-row subsets
        let dense = code.to_dense();
        let all_full = |k: usize| {
            Combinations::new(6, k).all(|u| {
                let rows: Vec<Vec<i64>> = u.iter().map(|&i| dense[i].clone()).collect();
                exact::rank(&rows) == 4
            })
        };
        let expect = (4..=6).find(|&k| all_full(k)).unwrap_or(7);
        assert!(!all_full(4));
        assert_eq!(recovery_threshold_exact(&code).unwrap(), expect);
        assert!(expect > 4);
    }

    #[test]
    fn rank_deficient_code_gets_sentinel() {
        let code = CodingMatrix::from_entries(3, 2, Family::Custom, 0, [(0, 0, 1), (1, 0, 1), (2, 0, 2)]).unwrap();
        assert_eq!(recovery_threshold_exact(&code).unwrap(), 4);
    }

    #[test]
    fn guard_is_enforced() {
        let code = crate::codes::make_p_bernoulli(20, 60, 1.0, DEFAULT_COEFF_SET_SIZE, 1).unwrap();
        assert!(matches!(
            recovery_threshold_exact(&code),
            Err(AnalysisError::GuardExceeded { .. })
        ));
    }

    #[test]
    fn matching_basics() {
        let g = SupportGraph::from_code(&make_one_diagonal(4));
        assert!(has_perfect_matching(&g, &[1, 2, 3, 4]));
        assert!(has_perfect_matching(&g, &[0, 1, 2, 3]));
        assert!(!has_perfect_matching(&g, &[1, 2, 3]));
        // block 2 has no neighbour among these workers
        let iso = SupportGraph::from_edges(3, 3, &[(0, 0), (1, 1), (2, 0), (2, 1)]);
        assert!(!has_perfect_matching(&iso, &[0, 1, 2]));
        assert_eq!(iso.max_matching(&[0, 1, 2]), 2);
    }

    #[test]
    fn diagonal_graphs_always_match() {
        for n in 1..=8 {
            for s in 0..=3 {
                let code = make_s_diagonal(n, n + s, s, 1, 0).unwrap();
                let g = SupportGraph::from_code(&code);
                for u in Combinations::new(n + s, n) {
                    assert!(has_perfect_matching(&g, &u), "n={n} s={s} U={u:?}");
                    assert_eq!(hall_violation(&code, &u).unwrap(), None);
                }
            }
        }
    }

    #[test]
    fn hall_detects_deficiency() {
        let code = CodingMatrix::from_entries(3, 3, Family::Custom, 0, [(0, 0, 1), (1, 0, 1), (2, 2, 1)]).unwrap();
        assert_eq!(hall_violation(&code, &[0, 1, 2]).unwrap(), Some(vec![0, 1]));
    }

    #[test]
    fn resists_and_witnesses() {
        let code = make_one_diagonal(4);
        assert_eq!(
            verify_resists(&code, 1).unwrap(),
            ResistVerdict {
                resists: true,
                witness: None
            }
        );
        assert!(!verify_resists(&code, 2).unwrap().resists);

        // block 0 is only seen by worker 0
        let weak = CodingMatrix::from_entries(3, 2, Family::Custom, 0, [(0, 0, 1), (1, 1, 1), (2, 1, 2)]).unwrap();
        let v = verify_resists(&weak, 1).unwrap();
        assert!(!v.resists);
        assert_eq!(v.witness, Some(vec![1, 2]));

        assert!(verify_resists(&CodingMatrix::identity(3), 0).unwrap().resists);
    }

    #[test]
    fn audit_diagonal_has_zero_slack() {
        let rec = lower_bound_audit(&make_one_diagonal(5), 1).unwrap();
        assert_eq!(rec.load_slack, 0);
        assert_eq!(rec.threshold_slack, 0);
        let dense = crate::codes::make_p_bernoulli(3, 5, 1.0, DEFAULT_COEFF_SET_SIZE, 2).unwrap();
        let rec = lower_bound_audit(&dense, 2).unwrap();
        assert_eq!(rec.load_slack, 15 - 9);
        let one = make_s_diagonal(1, 3, 2, 5, 0).unwrap();
        assert!(lower_bound_audit(&one, 2).unwrap().computation_load >= 3);
        assert!(matches!(
            lower_bound_audit(&make_one_diagonal(3), 2),
            Err(AnalysisError::NotResisting { .. })
        ));
        let csv = rec.csv_row();
        assert_eq!(csv.split(',').count(), AuditRecord::CSV_HEADER.split(',').count());
    }

    #[test]
    fn estimates_on_valid_diagonal_code() {
        let code = make_one_diagonal(6);
        let rep = probabilistic_threshold_estimate(&code, 50, 1).unwrap();
        assert_eq!(rep.full_rank_fraction, Some(1.0));
        let rep = load_statistics(&CodeSpec::s_diagonal(6, 2), 20, 3).unwrap();
        assert_eq!(rep.mean_load_per_worker, 18.0 / 8.0);
        assert_eq!(rep.load_per_worker_stddev, 0.0);
        assert!(probabilistic_threshold_estimate(&code, 0, 1).is_err());
    }

    #[test]
    fn single_trial_fraction_is_binary() {
        for seed in 0..5 {
            let rep = full_rank_experiment(&CodeSpec::cross(10, 12, 2.0, 2.0), 1, seed).unwrap();
            let f = rep.full_rank_fraction.unwrap();
            assert!(f == 0.0 || f == 1.0);
            assert_eq!(rep.csv_row().split(',').count(), McReport::CSV_HEADER.split(',').count());
        }
    }
}
