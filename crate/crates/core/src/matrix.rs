//! Square matrices over `Z/p^f` and their Smith normal form.
//!
//! `Z/p^f` is a quotient of the discrete valuation ring Z_p, so Gaussian
//! elimination works once pivots are chosen by minimal p-adic valuation:
//! every entry is a unit times a power of p, units are normalized away, and
//! the remaining eliminations are exact integer divisions by p-powers.

use crate::error::{Error, Result};
use crate::partition::GroupType;
use crate::ring::RingSpec;

/// A `d x d` matrix of canonical residues over a fixed `RingSpec`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RMatrix {
    ring: RingSpec,
    dim: usize,
    entries: Vec<u64>,
}

impl RMatrix {
    /// Builds a matrix from row-major entries, reducing them mod `p^f`.
    pub fn new(ring: RingSpec, dim: usize, entries: Vec<u64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        let entries = entries.into_iter().map(|x| x % ring.modulus()).collect();
        Ok(RMatrix { ring, dim, entries })
    }

    pub fn zero(ring: RingSpec, dim: usize) -> Self {
        RMatrix { ring, dim, entries: vec![0; dim * dim] }
    }

    pub fn identity(ring: RingSpec, dim: usize) -> Self {
        let mut m = RMatrix::zero(ring, dim);
        for i in 0..dim {
            m.set(i, i, 1);
        }
        m
    }

    /// The standard alternating form `J = (0, 1; -1, 0)` in `n x n` blocks.
    pub fn standard_form(ring: RingSpec, n: usize) -> Self {
        let mut j = RMatrix::zero(ring, 2 * n);
        for i in 0..n {
            j.set(i, n + i, 1);
            j.set(n + i, i, ring.neg(1));
        }
        j
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: u64) {
        self.entries[i * self.dim + j] = x % self.ring.modulus();
    }

    fn check_compatible(&self, other: &RMatrix) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!(
                "Z/{} vs Z/{}",
                self.ring.modulus(),
                other.ring.modulus()
            )));
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &RMatrix) -> Result<RMatrix> {
        self.check_compatible(other)?;
        let d = self.dim;
        let m = u128::from(self.ring.modulus());
        let mut out = RMatrix::zero(self.ring, d);
        for i in 0..d {
            for j in 0..d {
                let mut acc: u128 = 0;
                for k in 0..d {
                    acc += u128::from(self.get(i, k)) * u128::from(other.get(k, j)) % m;
                }
                out.entries[i * d + j] = (acc % m) as u64;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &RMatrix) -> Result<RMatrix> {
        self.check_compatible(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| self.ring.add(a, b))
            .collect();
        Ok(RMatrix { ring: self.ring, dim: self.dim, entries })
    }

    pub fn sub(&self, other: &RMatrix) -> Result<RMatrix> {
        self.check_compatible(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| self.ring.sub(a, b))
            .collect();
        Ok(RMatrix { ring: self.ring, dim: self.dim, entries })
    }

    pub fn transpose(&self) -> RMatrix {
        let d = self.dim;
        let mut out = RMatrix::zero(self.ring, d);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.get(i, j);
            }
        }
        out
    }

    pub fn scale(&self, c: u64) -> RMatrix {
        let entries = self.entries.iter().map(|&a| self.ring.mul(a, c)).collect();
        RMatrix { ring: self.ring, dim: self.dim, entries }
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        let d = self.dim;
        let m = u128::from(self.ring.modulus());
        (0..d)
            .map(|i| {
                let mut acc: u128 = 0;
                for k in 0..d {
                    acc += u128::from(self.get(i, k)) * u128::from(v[k]) % m;
                }
                (acc % m) as u64
            })
            .collect()
    }

    /// The image of this matrix in `Z/p^k` for `1 <= k <= f`.
    pub fn reduce_to(&self, k: u32) -> RMatrix {
        let ring = self.ring.reduced(k);
        let entries = self.entries.iter().map(|&x| x % ring.modulus()).collect();
        RMatrix { ring, dim: self.dim, entries }
    }

    /// True iff the matrix is a unit in the matrix ring, i.e. invertible
    /// mod p (rank `d` over the residue field).
    pub fn is_invertible(&self) -> bool {
        let p = self.ring.p();
        let d = self.dim;
        let mut a: Vec<u64> = self.entries.iter().map(|&x| x % p).collect();
        for k in 0..d {
            let pivot = (k..d).find(|&i| a[i * d + k] != 0);
            let Some(pivot) = pivot else { return false };
            if pivot != k {
                for j in 0..d {
                    a.swap(pivot * d + j, k * d + j);
                }
            }
            let inv = mod_p_inv(a[k * d + k], p);
            for i in k + 1..d {
                let factor = mulmod(a[i * d + k], inv, p);
                if factor == 0 {
                    continue;
                }
                for j in k..d {
                    let sub = mulmod(factor, a[k * d + j], p);
                    a[i * d + j] = (a[i * d + j] + p - sub) % p;
                }
            }
        }
        true
    }

    /// Inverse over `Z/p^f`, or `None` when not invertible.
    pub fn inverse(&self) -> Option<RMatrix> {
        let d = self.dim;
        let ring = self.ring;
        let mut a = self.clone();
        let mut inv = RMatrix::identity(ring, d);
        for k in 0..d {
            let pivot = (k..d).find(|&i| ring.is_unit(a.get(i, k)))?;
            if pivot != k {
                a.swap_rows(pivot, k);
                inv.swap_rows(pivot, k);
            }
            let c = ring.inv(a.get(k, k)).expect("pivot is a unit");
            a.scale_row(k, c);
            inv.scale_row(k, c);
            for i in 0..d {
                if i == k {
                    continue;
                }
                let factor = a.get(i, k);
                if factor == 0 {
                    continue;
                }
                let neg = ring.neg(factor);
                a.addmul_row(i, k, neg);
                inv.addmul_row(i, k, neg);
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        let d = self.dim;
        for c in 0..d {
            self.entries.swap(i * d + c, j * d + c);
        }
    }

    fn scale_row(&mut self, i: usize, c: u64) {
        let d = self.dim;
        for j in 0..d {
            self.entries[i * d + j] = self.ring.mul(self.entries[i * d + j], c);
        }
    }

    /// row_i += c * row_j
    fn addmul_row(&mut self, i: usize, j: usize, c: u64) {
        let d = self.dim;
        for k in 0..d {
            let t = self.ring.mul(self.entries[j * d + k], c);
            self.entries[i * d + k] = self.ring.add(self.entries[i * d + k], t);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        let d = self.dim;
        for r in 0..d {
            self.entries.swap(r * d + i, r * d + j);
        }
    }

    /// col_i += c * col_j
    fn addmul_col(&mut self, i: usize, j: usize, c: u64) {
        let d = self.dim;
        for r in 0..d {
            let t = self.ring.mul(self.entries[r * d + j], c);
            self.entries[r * d + i] = self.ring.add(self.entries[r * d + i], t);
        }
    }

    /// Smith normal form over `Z/p^f` by minimal-valuation pivoting.
    ///
    /// Returns ascending valuations `v_1 <= ... <= v_d` together with
    /// invertible transforms satisfying `left * a * right = diag(p^{v_i})`.
    /// The zero residue counts as valuation `f`.
    pub fn local_snf(&self) -> LocalSnf {
        let d = self.dim;
        let ring = self.ring;
        let f = ring.f();
        let mut a = self.clone();
        let mut left = RMatrix::identity(ring, d);
        let mut right = RMatrix::identity(ring, d);
        let mut valuations = Vec::with_capacity(d);
        for k in 0..d {
            // Locate an entry of minimal valuation in the trailing block.
            let mut best = (f, k, k);
            for i in k..d {
                for j in k..d {
                    let v = ring.valuation(a.get(i, j));
                    if v < best.0 {
                        best = (v, i, j);
                    }
                }
            }
            let (v, bi, bj) = best;
            if v == f {
                valuations.resize(d, f);
                break;
            }
            if bi != k {
                a.swap_rows(bi, k);
                left.swap_rows(bi, k);
            }
            if bj != k {
                a.swap_cols(bj, k);
                right.swap_cols(bj, k);
            }
            let pk = ring.pow_p(v);
            let unit = ring.div_pow_p(a.get(k, k), v);
            let c = ring.inv(unit).expect("cofactor of the pivot is a unit");
            a.scale_row(k, c);
            left.scale_row(k, c);
            debug_assert_eq!(a.get(k, k), pk);
            for i in k + 1..d {
                let x = a.get(i, k);
                if x == 0 {
                    continue;
                }
                // x has valuation >= v, so the division is exact over Z.
                let q = ring.neg(ring.div_pow_p(x, v));
                a.addmul_row(i, k, q);
                left.addmul_row(i, k, q);
            }
            for j in k + 1..d {
                let x = a.get(k, j);
                if x == 0 {
                    continue;
                }
                let q = ring.neg(ring.div_pow_p(x, v));
                a.addmul_col(j, k, q);
                right.addmul_col(j, k, q);
            }
            valuations.push(v);
        }
        valuations.resize(d, f);
        debug_assert!(valuations.windows(2).all(|w| w[0] <= w[1]));
        LocalSnf { valuations, left, right }
    }

    /// Type of `ker(x -> a.x)` on `(Z/p^f)^d`: the positive Smith
    /// valuations, sorted descending.  The kernel has `p^weight` elements.
    pub fn kernel_type(&self) -> GroupType {
        let snf = self.local_snf();
        GroupType::from_unsorted(snf.valuations.into_iter().filter(|&v| v > 0))
    }
}

/// Witnessed Smith normal form over `Z/p^f`: `left * a * right` is
/// `diag(p^{v_1}, ..., p^{v_d})` with both transforms invertible.
#[derive(Clone, Debug)]
pub struct LocalSnf {
    pub valuations: Vec<u32>,
    pub left: RMatrix,
    pub right: RMatrix,
}

impl LocalSnf {
    pub fn diagonal(&self, ring: RingSpec, dim: usize) -> RMatrix {
        let mut d = RMatrix::zero(ring, dim);
        for (i, &v) in self.valuations.iter().enumerate() {
            if v < ring.f() {
                d.set(i, i, ring.pow_p(v));
            }
        }
        d
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(m)) as u64
}

fn mod_p_inv(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p.
    let mut acc = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}
