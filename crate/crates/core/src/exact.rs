//! Exact linear algebra over the integers and the rationals.
//!
//! Rank uses fraction-free (Bareiss) elimination; solves use Gauss-Jordan
//! over `Ratio<T>`. Both are generic over the integer type so that `i64`
//! serves the small incidence matrices and `BigInt` the general case.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

/// Integer scalar accepted by the exact routines.
pub trait ExactInt: Clone + Integer + Signed + std::fmt::Debug {}
impl<T: Clone + Integer + Signed + std::fmt::Debug> ExactInt for T {}

/// Rank by Bareiss fraction-free elimination. Every intermediate entry is a
/// minor of the input, so no division is inexact.
pub fn bareiss_rank<T: ExactInt>(m: &[Vec<T>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut prev = T::one();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        for r in rank + 1..rows {
            for k in c + 1..cols {
                let v = a[rank][c].clone() * a[r][k].clone() - a[r][c].clone() * a[rank][k].clone();
                a[r][k] = v / prev.clone();
            }
            a[r][c] = T::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    rank
}

/// Rank of a small integer matrix. Uses `i64` when the Hadamard bound fits,
/// `BigInt` otherwise.
pub fn rank_i64(m: &[Vec<i64>]) -> usize {
    let log2_bound: f64 = m
        .iter()
        .map(|row| {
            let n2: f64 = row.iter().map(|&x| (x as f64) * (x as f64)).sum();
            0.5 * n2.max(1.0).log2()
        })
        .sum();
    if log2_bound < 60.0 {
        bareiss_rank(m)
    } else {
        let big: Vec<Vec<BigInt>> = m
            .iter()
            .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        bareiss_rank(&big)
    }
}

/// Reduced row echelon form over the rationals. Returns the pivot columns.
pub fn rref<T: ExactInt>(a: &mut [Vec<Ratio<T>>]) -> Vec<usize> {
    rref_with_order(a, None)
}

/// Reduced row echelon form where pivot columns are tried in `order`
/// (defaults to left to right).
pub fn rref_with_order<T: ExactInt>(a: &mut [Vec<Ratio<T>>], order: Option<&[usize]>) -> Vec<usize> {
    let rows = a.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = a[0].len();
    let natural: Vec<usize> = (0..cols).collect();
    let order = order.unwrap_or(&natural);
    let mut pivots = Vec::new();
    let mut r = 0;
    for &c in order {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, piv);
        let inv = a[r][c].recip();
        for k in 0..cols {
            a[r][k] = a[r][k].clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..cols {
                    let v = a[i][k].clone() - f.clone() * a[r][k].clone();
                    a[i][k] = v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank over the rationals; an independent cross-check for [`bareiss_rank`].
pub fn rational_rank<T: ExactInt>(m: &[Vec<T>]) -> usize {
    let mut a: Vec<Vec<Ratio<T>>> = m
        .iter()
        .map(|row| row.iter().map(|x| Ratio::from_integer(x.clone())).collect())
        .collect();
    rref(&mut a).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_identity_and_zero() {
        let id = vec![vec![1i64, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        assert_eq!(bareiss_rank(&id), 3);
        let z = vec![vec![0i64; 4]; 3];
        assert_eq!(bareiss_rank(&z), 0);
        assert_eq!(bareiss_rank::<i64>(&[]), 0);
    }

    #[test]
    fn rank_deficient_needs_row_swap() {
        let m = vec![vec![0i64, 2, 4], vec![1, 1, 1], vec![2, 4, 6]];
        assert_eq!(bareiss_rank(&m), 2);
        assert_eq!(rational_rank(&m), 2);
    }

    #[test]
    fn rref_respects_column_order() {
        let mut a: Vec<Vec<Ratio<i64>>> = vec![vec![1, 1, -2]]
            .into_iter()
            .map(|r: Vec<i64>| r.into_iter().map(Ratio::from_integer).collect())
            .collect();
        let piv = rref_with_order(&mut a, Some(&[1, 2, 0]));
        assert_eq!(piv, vec![1]);
        assert_eq!(a[0][0], Ratio::from_integer(1));
        assert_eq!(a[0][2], Ratio::from_integer(-2));
    }
}
