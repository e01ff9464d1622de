//! Integer kernel bases via column reduction to Hermite-like form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// A basis of the lattice `{w in Z^c : M w = 0}` for an integer matrix `M`
/// with `r` rows and `c` columns, computed by unimodular column operations.
pub fn integer_kernel(m: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    if rows == 0 {
        // Everything is in the kernel.
        return (0..cols)
            .map(|j| (0..cols).map(|i| BigInt::from((i == j) as i64)).collect())
            .collect();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    // u tracks the column operations: columns of u span the preimages.
    let mut u: Vec<Vec<BigInt>> = (0..cols)
        .map(|j| (0..cols).map(|i| BigInt::from((i == j) as i64)).collect::<Vec<_>>())
        .collect();
    // u is stored column-major: u[j] is column j.
    let mut pivot_col = 0;
    for row in 0..rows {
        if pivot_col >= cols {
            break;
        }
        // Reduce columns pivot_col.. so that at most one has a nonzero entry
        // in this row, via gcd column combinations.
        loop {
            let mut best: Option<usize> = None;
            for j in pivot_col..cols {
                if !a[row][j].is_zero() {
                    best = match best {
                        None => Some(j),
                        Some(b) if a[row][j].abs() < a[row][b].abs() => Some(j),
                        keep => keep,
                    };
                }
            }
            let Some(b) = best else { break };
            a.iter_mut().for_each(|r| r.swap(pivot_col, b));
            u.swap(pivot_col, b);
            let mut done = true;
            for j in pivot_col + 1..cols {
                if a[row][j].is_zero() {
                    continue;
                }
                let q = a[row][j].div_floor(&a[row][pivot_col]);
                if !q.is_zero() {
                    for r in 0..rows {
                        let t = &a[r][pivot_col] * &q;
                        a[r][j] -= t;
                    }
                    for i in 0..cols {
                        let t = &u[pivot_col][i] * &q;
                        u[j][i] -= t;
                    }
                }
                if !a[row][j].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if !a[row][pivot_col].is_zero() {
            pivot_col += 1;
        }
    }
    // Columns past pivot_col are zero in every reduced row, hence kernel.
    let mut kernel = Vec::new();
    for j in pivot_col..cols {
        if (0..rows).all(|r| a[r][j].is_zero()) {
            kernel.push(u[j].clone());
        }
    }
    kernel
}
