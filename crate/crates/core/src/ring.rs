//! The coefficient ring `Z/p^f` with p prime and `f >= 1`.
//!
//! Elements are canonical residues in `0..p^f` stored as `u64`.  The modulus
//! is capped at `2^62` so products fit in `u128` and sums never overflow; a
//! larger modulus is rejected loudly at construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_MODULUS: u64 = 1 << 62;

/// The ring `Z/p^f`, carrying precomputed powers of p.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct RingSpec {
    p: u64,
    f: u32,
    modulus: u64,
}

impl RingSpec {
    pub fn new(p: u64, f: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("p = {p} is not prime")));
        }
        if f == 0 {
            return Err(Error::InvalidParameter("precision f must be at least 1".into()));
        }
        let modulus = p
            .checked_pow(f)
            .filter(|&m| m <= MAX_MODULUS)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("modulus p^f = {p}^{f} exceeds 2^62"))
            })?;
        Ok(RingSpec { p, f, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `p^k` for `k <= f`.
    pub fn pow_p(&self, k: u32) -> u64 {
        debug_assert!(k <= self.f);
        self.p.pow(k)
    }

    /// The quotient ring `Z/p^k` for `1 <= k <= f`.
    pub fn reduced(&self, k: u32) -> RingSpec {
        debug_assert!(1 <= k && k <= self.f);
        RingSpec { p: self.p, f: k, modulus: self.p.pow(k) }
    }

    pub fn reduce(&self, x: u128) -> u64 {
        (x % u128::from(self.modulus)) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus { s - self.modulus } else { s }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b { a - b } else { a + self.modulus - b }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 { 0 } else { self.modulus - a }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (u128::from(a) * u128::from(b) % u128::from(self.modulus)) as u64
    }

    /// p-adic valuation of a residue, with `valuation(0) = f`.
    pub fn valuation(&self, x: u64) -> u32 {
        debug_assert!(x < self.modulus);
        if x == 0 {
            return self.f;
        }
        let mut x = x;
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, a: u64) -> bool {
        a % self.p != 0
    }

    /// Inverse of a unit residue; `None` when `p | a`.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        // Extended Euclid on (a, modulus); the gcd is 1 for a unit.
        let (mut r0, mut r1) = (i128::from(a), i128::from(self.modulus));
        let (mut s0, mut s1) = (1i128, 0i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        let m = i128::from(self.modulus);
        Some(((s0 % m + m) % m) as u64)
    }

    /// Exact division by `p^v` of a residue divisible by `p^v`.
    pub fn div_pow_p(&self, x: u64, v: u32) -> u64 {
        let d = self.p.pow(v);
        debug_assert_eq!(x % d, 0, "residue {x} not divisible by p^{v}");
        x / d
    }
}

/// Deterministic Miller-Rabin, valid for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // This base set is known to be exhaustive below 2^64.
    'base: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'base;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(m)) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}
