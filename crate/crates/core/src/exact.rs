//! Exact linear algebra on small integer matrices.
//!
//! Rank and determinant use fraction-free (Bareiss) elimination over
//! `BigInt`, so every intermediate division is exact and no rational
//! normalisation is needed. Solves and inverses run Gauss-Jordan over
//! `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Row-major integer matrix, one `Vec` per row.
pub type IntMatrix = Vec<Vec<i64>>;

fn to_big(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}

fn width(rows: &[Vec<i64>]) -> usize {
    let w = rows.first().map_or(0, Vec::len);
    assert!(rows.iter().all(|r| r.len() == w), "ragged integer matrix");
    w
}

/// Fraction-free row echelon reduction in place. Returns the rank and the
/// sign of the row permutation applied.
fn bareiss(a: &mut [Vec<BigInt>], cols: usize) -> (usize, i32) {
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut sign = 1;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        if p != rank {
            a.swap(p, rank);
            sign = -sign;
        }
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pivot = pivot_row[col].clone();
        for row in rest.iter_mut() {
            let factor = row[col].clone();
            for j in col + 1..cols {
                let num = &pivot * &row[j] - &factor * &pivot_row[j];
                debug_assert!(num.is_multiple_of(&prev));
                row[j] = num / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    (rank, sign)
}

/// Exact rank of an integer matrix.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = width(rows);
    let mut a = to_big(rows);
    bareiss(&mut a, cols).0
}

/// Exact determinant of a square integer matrix.
pub fn determinant(rows: &[Vec<i64>]) -> BigInt {
    let n = rows.len();
    assert_eq!(width(rows), n, "determinant of a non-square matrix");
    if n == 0 {
        return BigInt::one();
    }
    let mut a = to_big(rows);
    let (r, sign) = bareiss(&mut a, n);
    if r < n {
        return BigInt::zero();
    }
    let det = a[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Solve `a · u = b` for square `a`. `None` when `a` is singular.
pub fn solve(a: &[Vec<i64>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    assert_eq!(width(a), n, "solve needs a square matrix");
    assert_eq!(b.len(), n, "right-hand side length");
    let mut aug: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r: Vec<BigRational> = row.iter().map(|&v| rat(v)).collect();
            r.push(bi.clone());
            r
        })
        .collect();
    gauss_jordan(&mut aug, n)?;
    Some(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Solve `aᵀ · u = e_k`; `u` is row `k` of `a⁻¹`.
pub fn solve_transposed_unit(a: &[Vec<i64>], k: usize) -> Option<Vec<BigRational>> {
    inverse(a).map(|mut inv| inv.swap_remove(k))
}

/// Exact inverse. `None` when singular.
///
/// Integer-preserving Gauss-Jordan on `[a | I]`: every division is exact,
/// so all work stays in `BigInt` and the left half ends as `d · I` with
/// `d = ±det(a)`. Only the final scaling produces rationals.
pub fn inverse(a: &[Vec<i64>]) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    assert_eq!(width(a), n, "inverse needs a square matrix");
    let w = 2 * n;
    let mut aug: Vec<Vec<BigInt>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigInt> = row.iter().map(|&v| BigInt::from(v)).collect();
            r.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&i| !aug[i][k].is_zero())?;
        aug.swap(p, k);
        let pivot_row = aug[k].clone();
        let pivot = pivot_row[k].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let factor = row[k].clone();
            for j in 0..w {
                if j == k {
                    continue;
                }
                let num = &pivot * &row[j] - &factor * &pivot_row[j];
                debug_assert!(num.is_multiple_of(&prev));
                row[j] = num / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = pivot;
    }
    Some(
        aug.into_iter()
            .enumerate()
            .map(|(i, row)| {
                let d = row[i].clone();
                row[n..].iter().map(|v| BigRational::new(v.clone(), d.clone())).collect()
            })
            .collect(),
    )
}

/// Reduce the left `n x n` part of `aug` to the identity.
fn gauss_jordan(aug: &mut [Vec<BigRational>], n: usize) -> Option<()> {
    for col in 0..n {
        let p = (col..n).find(|&i| !aug[i][col].is_zero())?;
        aug.swap(p, col);
        let inv = aug[col][col].recip();
        for v in aug[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = aug[col].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
    }
    Some(())
}

pub fn transpose(a: &[Vec<i64>]) -> IntMatrix {
    let cols = width(a);
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Multiply an integer matrix by a rational vector.
pub fn mat_vec(a: &[Vec<i64>], u: &[BigRational]) -> Vec<BigRational> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(u)
                .filter(|(c, _)| **c != 0)
                .fold(BigRational::zero(), |acc, (&c, x)| acc + rat(c) * x)
        })
        .collect()
}

/// Greedy maximal independent row set, scanning rows in order. Returns
/// the indices of the kept rows.
#[derive(Debug, Clone, Default)]
pub struct RowBasis {
    width: usize,
    // reduced rows paired with their pivot column; pivots normalised to 1
    reduced: Vec<(usize, Vec<BigRational>)>,
    kept: Vec<usize>,
}

impl RowBasis {
    pub fn new(width: usize) -> Self {
        RowBasis {
            width,
            reduced: Vec::new(),
            kept: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    /// Offer a row tagged `id`; returns `true` if it increased the rank.
    pub fn offer(&mut self, id: usize, row: &[i64]) -> bool {
        assert_eq!(row.len(), self.width, "row width");
        let mut v: Vec<BigRational> = row.iter().map(|&x| rat(x)).collect();
        for (pc, basis) in &self.reduced {
            if v[*pc].is_zero() {
                continue;
            }
            let f = v[*pc].clone();
            for (x, b) in v.iter_mut().zip(basis) {
                if !b.is_zero() {
                    *x -= &f * b;
                }
            }
        }
        let Some(pc) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[pc].recip();
        for x in v.iter_mut() {
            *x *= &inv;
        }
        self.reduced.push((pc, v));
        self.kept.push(id);
        true
    }
}

/// Nearest `f64` to a rational.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
