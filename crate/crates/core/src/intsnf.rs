//! Smith normal form over the integers.
//!
//! Classical pivot-and-reduce: repeatedly move a minimal nonzero entry to
//! the pivot, clear its row and column by Euclidean steps, and restart
//! whenever a remainder survives.  The minimal absolute value strictly
//! decreases, so the process terminates.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Invariant factors `d_1 | d_2 | ... | d_k`, `k = min(rows, cols)`,
/// nonnegative with zeros trailing.
pub fn integer_snf(a: &[Vec<BigInt>]) -> Result<Vec<BigInt>> {
    let rows = a.len();
    if rows == 0 {
        return Ok(Vec::new());
    }
    let cols = a[0].len();
    if a.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch { expected: cols, got: a.iter().map(|r| r.len()).max().unwrap() });
    }
    if cols == 0 {
        return Ok(Vec::new());
    }
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let k = rows.min(cols);
    for t in 0..k {
        loop {
            let Some((bi, bj)) = min_nonzero(&m, t) else { break };
            if bi != t {
                m.swap(bi, t);
            }
            if bj != t {
                for row in m.iter_mut() {
                    row.swap(bj, t);
                }
            }
            let mut dirty = false;
            for i in t + 1..rows {
                if !m[i][t].is_zero() {
                    let q = &m[i][t] / &m[t][t];
                    if !q.is_zero() {
                        for j in t..cols {
                            let sub = &q * &m[t][j];
                            m[i][j] -= sub;
                        }
                    }
                    dirty |= !m[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !m[t][j].is_zero() {
                    let q = &m[t][j] / &m[t][t];
                    if !q.is_zero() {
                        for i in t..rows {
                            let sub = &q * &m[i][t];
                            m[i][j] -= sub;
                        }
                    }
                    dirty |= !m[t][j].is_zero();
                }
            }
            if dirty {
                continue;
            }
            // Row and column are clear; enforce divisibility of the rest.
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !(&m[i][j] % &m[t][t]).is_zero());
            match bad {
                Some((i, _)) => {
                    for j in t..cols {
                        let add = m[i][j].clone();
                        m[t][j] += add;
                    }
                }
                None => break,
            }
        }
        if m[t][t].is_negative() {
            for j in t..cols {
                m[t][j] = -m[t][j].clone();
            }
        }
    }
    Ok((0..k).map(|t| m[t][t].clone()).collect())
}

fn min_nonzero(m: &[Vec<BigInt>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(BigInt, usize, usize)> = None;
    for (i, row) in m.iter().enumerate().skip(t) {
        for (j, x) in row.iter().enumerate().skip(t) {
            if x.is_zero() {
                continue;
            }
            let a = x.abs();
            if best.as_ref().map_or(true, |(b, _, _)| a < *b) {
                best = Some((a, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}
