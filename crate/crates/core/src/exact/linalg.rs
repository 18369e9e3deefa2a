//! Exact row reduction over ℚ.

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Reduce `m` (rows of equal length `ncols`) to reduced row echelon form in
/// place; returns the pivot columns.
pub fn rref(m: &mut Vec<Vec<BigRational>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.len() {
            break;
        }
        let Some(pr) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, pr);
        let inv = BigRational::one() / &m[row][col];
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r != row && !other[col].is_zero() {
                let k = other[col].clone();
                for (v, p) in other.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *v = &*v - &(&k * p);
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    m.truncate(row);
    pivots
}

/// A basis of `{v : m v = 0}`, one vector per free column.
pub fn nullspace(mut m: Vec<Vec<BigRational>>, ncols: usize) -> Vec<Vec<BigRational>> {
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (row, &pc) in m.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn nullspace_of_small_matrix() {
        // x + 2y + 3z = 0, 2x + 4y + 6z = 0 → rank 1, nullity 2
        let m = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)]];
        let ns = nullspace(m.clone(), 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &m {
                let s: BigRational = row.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!(s.is_zero());
            }
        }
        let full = vec![vec![q(1), q(0)], vec![q(0), q(3)]];
        assert!(nullspace(full, 2).is_empty());
    }
}
