//! Seeded, splittable randomness.
//!
//! Every randomized operation takes an explicit `u64` seed. Independent
//! sub-streams (per trial, per iteration, per worker) are derived with
//! [`derive_seed`] so results never depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CodeRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> CodeRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mix a master seed and a stream label into a child seed (SplitMix64 finaliser).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Render 0-based indices as a 1-based list, e.g. `[1, 2, 4]`.
pub fn one_based(indices: &[usize]) -> String {
    let parts: Vec<String> = indices.iter().map(|i| (i + 1).to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// `k` distinct values from `0..n`, uniform over k-subsets, via a partial
/// Fisher-Yates shuffle. Returned in draw order.
pub fn sample_without_replacement<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "cannot draw {k} of {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

/// Sorted uniform k-subset of `0..n`.
pub fn sample_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut s = sample_without_replacement(rng, n, k);
    s.sort_unstable();
    s
}

/// Realise a possibly fractional count: `floor(d)` or `ceil(d)` with
/// probabilities that make the mean equal `d`.
pub fn fractional_count<R: Rng + ?Sized>(rng: &mut R, d: f64) -> usize {
    let lo = d.floor();
    let frac = d - lo;
    if frac > 0.0 && rng.random::<f64>() < frac {
        lo as usize + 1
    } else {
        lo as usize
    }
}
