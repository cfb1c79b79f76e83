use coxf_core::analysis::subset_full_rank;
use coxf_core::block::{partition, DataMatrix};
use coxf_core::codes::{encode, make_cross, make_p_bernoulli, make_s_diagonal, CodingMatrix, DEFAULT_COEFF_SET_SIZE};
use coxf_core::decoder::{hybrid_decode, hybrid_decode_with, inverse_decode, PeelingState, ReceivedSet, RootChoice};
use coxf_core::exact::{self, RowBasis};
use coxf_core::rng::{derive_seed, rng_from_seed, sample_subset};
use coxf_core::simulator::{least_squares_problem, run_coded_gd, StragglerModel};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn matrix_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        // about a third of the entries are exact zeros so sparse paths matter
        let entry = prop_oneof![Just(0.0), -100.0f64..100.0, -1.0f64..1.0];
        (Just(r), Just(c), proptest::collection::vec(entry, r * c))
    })
}

fn random_code(kind: u8, n: usize, seed: u64) -> CodingMatrix {
    match kind % 3 {
        0 => make_s_diagonal(n, n + 2, 2, DEFAULT_COEFF_SET_SIZE, seed).unwrap(),
        1 => make_cross(n, n + 3, 2.0, 2.5, DEFAULT_COEFF_SET_SIZE, seed).unwrap(),
        _ => make_p_bernoulli(n, n + 2, 0.5, DEFAULT_COEFF_SET_SIZE, seed).unwrap(),
    }
}

/// A full-rank n-subset of the code's workers, if one is found quickly.
fn full_rank_subset(code: &CodingMatrix, seed: u64) -> Option<Vec<usize>> {
    let mut rng = rng_from_seed(seed);
    (0..20)
        .map(|_| sample_subset(&mut rng, code.workers(), code.blocks()))
        .find(|u| subset_full_rank(code, u))
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_reassembles((rows, cols, data) in matrix_strategy(30, 5), n_seed in 0usize..1000) {
        let a = DataMatrix::dense(rows, cols, data).unwrap();
        let n = 1 + n_seed % rows;
        let part = partition(&a, n).unwrap();
        prop_assert_eq!(part.block_count(), n);
        prop_assert_eq!(part.block_rows() * n, rows + part.pad_rows());
        prop_assert!(part.pad_rows() < n);
        prop_assert_eq!(part.reassemble().unwrap(), a.clone());
        let sparse = partition(&a.to_sparse(), n).unwrap();
        prop_assert_eq!(sparse.reassemble().unwrap().to_dense(), a);
    }

    #[test]
    fn dense_and_sparse_products_agree((rows, cols, data) in matrix_strategy(25, 8), xs in proptest::collection::vec(-10.0f64..10.0, 8)) {
        let a = DataMatrix::dense(rows, cols, data).unwrap();
        let s = a.to_sparse();
        let x = &xs[..cols];
        let yd = a.multiply(x).unwrap();
        let ys = s.multiply(x).unwrap();
        prop_assert!(ys.relative_error(&yd) <= 1e-12);
        let z: Vec<f64> = (0..rows).map(|i| i as f64 - 3.0).collect();
        prop_assert!(s.transpose_multiply(&z).unwrap().relative_error(&a.transpose_multiply(&z).unwrap()) <= 1e-12);
        prop_assert_eq!(s.nnz(), a.nnz());
    }

    #[test]
    fn bareiss_rank_matches_rational_elimination(
        rows in 1usize..7, cols in 1usize..7,
        vals in proptest::collection::vec(-3i64..4, 49),
        big in proptest::bool::ANY,
    ) {
        let scale = if big { 1_000_000_007 } else { 1 };
        let m: Vec<Vec<i64>> = (0..rows).map(|i| (0..cols).map(|j| vals[i * 7 + j] * scale).collect()).collect();
        let mut basis = RowBasis::new(cols);
        for (i, r) in m.iter().enumerate() {
            basis.offer(i, r);
        }
        prop_assert_eq!(exact::rank(&m), basis.rank());
        if rows == cols {
            let det_zero = exact::determinant(&m) == BigInt::from(0);
            prop_assert_eq!(det_zero, basis.rank() < rows);
        }
    }

    #[test]
    fn encoding_is_linear(
        (rows, cols, d1) in matrix_strategy(16, 4),
        seed in 0u64..1000,
        alpha in -3.0f64..3.0, beta in -3.0f64..3.0,
    ) {
        let n = 1 + (seed as usize) % rows.min(4);
        let code = make_cross(n, n + 2, 1.0, 1.5, 97, seed).unwrap();
        let mut rng = rng_from_seed(seed);
        let d2: Vec<f64> = (0..rows * cols).map(|_| rand::Rng::random_range(&mut rng, -5.0..5.0)).collect();
        let a = DataMatrix::dense(rows, cols, d1.clone()).unwrap();
        let b = DataMatrix::dense(rows, cols, d2.clone()).unwrap();
        let mix: Vec<f64> = d1.iter().zip(&d2).map(|(x, y)| alpha * x + beta * y).collect();
        let c = DataMatrix::dense(rows, cols, mix).unwrap();
        let ea = encode(&partition(&a, n).unwrap(), &code).unwrap();
        let eb = encode(&partition(&b, n).unwrap(), &code).unwrap();
        let ec = encode(&partition(&c, n).unwrap(), &code).unwrap();
        for ((xa, xb), xc) in ea.assignments.iter().zip(&eb.assignments).zip(&ec.assignments) {
            let (ra, ca) = (xa.coded_block.rows(), xa.coded_block.cols());
            for i in 0..ra {
                for j in 0..ca {
                    let want = alpha * xa.coded_block.get(i, j) + beta * xb.coded_block.get(i, j);
                    let got = xc.coded_block.get(i, j);
                    prop_assert!((want - got).abs() <= 1e-10 * (1.0 + want.abs()), "{} vs {}", want, got);
                }
            }
        }
    }

    #[test]
    fn decoders_recover_blocks(kind in 0u8..3, n in 2usize..8, seed in 0u64..10_000, len in 1usize..4) {
        let code = random_code(kind, n, seed);
        let Some(u) = full_rank_subset(&code, derive_seed(seed, 1)) else { return Ok(()); };
        let mut rng = rng_from_seed(derive_seed(seed, 2));
        let blocks: Vec<Vec<f64>> = (0..n).map(|_| (0..len).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect()).collect();
        let results: Vec<Vec<f64>> = u.iter().map(|&w| {
            let mut y = vec![0.0; len];
            for (j, c) in code.row(w) {
                for (yk, bk) in y.iter_mut().zip(&blocks[j]) { *yk += c as f64 * bk; }
            }
            y
        }).collect();
        let received = ReceivedSet::new(&code, &u, results).unwrap();
        let truth: Vec<f64> = blocks.concat();
        let h = hybrid_decode(&received).unwrap();
        let r = hybrid_decode_with(&received, RootChoice::Random(seed)).unwrap();
        let i = inverse_decode(&received).unwrap();
        for out in [&h.output, &r.output, &i.output] {
            let err = out.iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-8, "error {}", err);
        }
        prop_assert_eq!(h.rooting_steps + h.peeling_steps, n);
    }

    #[test]
    fn peeling_state_stays_consistent_in_exact_arithmetic(kind in 0u8..3, n in 2usize..7, seed in 0u64..10_000) {
        let code = random_code(kind, n, seed);
        let Some(u) = full_rank_subset(&code, derive_seed(seed, 1)) else { return Ok(()); };
        let mut rng = rng_from_seed(derive_seed(seed, 3));
        let blocks: Vec<Vec<BigRational>> = (0..n)
            .map(|_| vec![BigRational::new(BigInt::from(rand::Rng::random_range(&mut rng, -50i64..50)), BigInt::from(rand::Rng::random_range(&mut rng, 1i64..9)))])
            .collect();
        let results: Vec<Vec<BigRational>> = u.iter().map(|&w| {
            vec![code.row(w).iter().fold(q(0), |acc, &(j, c)| acc + q(c) * &blocks[j][0])]
        }).collect();
        let received = ReceivedSet::new(&code, &u, results).unwrap();
        let mut state = PeelingState::new(&received);
        loop {
            // every residual equals its remaining row applied to the true blocks
            for (row, res) in state.residual_rows().iter().zip(state.residual_results()) {
                let want = row.iter().fold(q(0), |acc, (&j, &c)| acc + q(c) * &blocks[j][0]);
                prop_assert_eq!(&res[0], &want);
            }
            for (j, truth) in blocks.iter().enumerate() {
                if let Some(b) = state.recovered_block(j) {
                    prop_assert_eq!(&b[0], &truth[0]);
                }
            }
            if state.is_done() { break; }
            match state.find_ripple() {
                Some((k, _)) => state.peel(k),
                None => { let j = state.unrecovered()[0]; state.root(j).unwrap(); }
            }
        }
        prop_assert_eq!(state.rooting_steps() + state.peeling_steps(), n);
    }

    #[test]
    fn coefficients_stay_in_the_set(size in 1u64..50, seed in 0u64..1000, n in 2usize..9) {
        for code in [
            make_s_diagonal(n, n + 2, 2, size, seed).unwrap(),
            make_cross(n, n + 2, 2.0, 2.0, size, seed).unwrap(),
            make_p_bernoulli(n, n + 2, 0.4, size, seed).unwrap(),
        ] {
            prop_assert!(code.entries().all(|(_, _, c)| c >= 1 && c as u64 <= size));
        }
        // the support of a diagonal code does not depend on the coefficient set
        let small = make_s_diagonal(n, n + 2, 2, size, seed).unwrap();
        let large = make_s_diagonal(n, n + 2, 2, DEFAULT_COEFF_SET_SIZE, seed).unwrap();
        for w in 0..n + 2 {
            prop_assert_eq!(small.row_support(w), large.row_support(w));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn coded_gd_follows_uncoded_trajectory(seed in 0u64..1000, s in 1usize..3) {
        let (a, _, b) = least_squares_problem(60, 5, seed).unwrap();
        let n = 4;
        let eta = coxf_core::simulator::default_step_size(&a).unwrap();
        let plain = run_coded_gd(&a, &b, &CodingMatrix::identity(n), eta, 25, &StragglerModel::none(), seed).unwrap();
        let code = make_s_diagonal(n, n + s, s, DEFAULT_COEFF_SET_SIZE, seed).unwrap();
        let coded = run_coded_gd(&a, &b, &code, eta, 25, &StragglerModel::random_set(s), seed).unwrap();
        for (p, c) in plain.iterates.iter().zip(&coded.iterates) {
            prop_assert!(c.relative_error(p) <= 1e-6);
        }
    }
}

/// Singular-subset rate of random diagonal codes does not grow with |S|.
#[test]
fn larger_coefficient_sets_fail_less() {
    let (n, s) = (5, 2);
    let rate = |size: u64| {
        let mut singular = 0usize;
        let mut total = 0usize;
        for seed in 0..60 {
            let code = make_s_diagonal(n, n + s, s, size, seed).unwrap();
            for u in coxf_core::analysis::Combinations::new(n + s, n) {
                total += 1;
                if !subset_full_rank(&code, &u) {
                    singular += 1;
                }
            }
        }
        singular as f64 / total as f64
    };
    let rates: Vec<f64> = [2, 5, 97, DEFAULT_COEFF_SET_SIZE].iter().map(|&k| rate(k)).collect();
    assert!(rates.windows(2).all(|w| w[1] <= w[0]), "{rates:?}");
    assert_eq!(*rates.last().unwrap(), 0.0);
    assert!(rates[0] > 0.0);
}
