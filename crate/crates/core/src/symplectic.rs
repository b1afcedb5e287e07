//! The m-th symplectic groups `Sp^(m)_{2n}(Z/p^f)`.
//!
//! `Sp^(m)` consists of the invertible `2n x 2n` matrices h over `Z/p^f`
//! with `h^t J h = J (mod p^m)`, where `J = (0, 1; -1, 0)`.  `m = 0` is the
//! general linear group, `m = f` the symplectic group, and intermediate m
//! interpolate between them.
//!
//! Sampling is exactly uniform by fiber counting, in three stages:
//!
//! 1. a uniform element of `Sp(F_p)` by symplectic Gram-Schmidt (uniform
//!    nonzero `e_k` in the complement of the pairs chosen so far, uniform
//!    partner `f_k` among the `p^{2n-2k-1}` solutions of `<e_k, w> = 1`);
//! 2. lifts through each kernel `Sp(Z/p^{k+1}) -> Sp(Z/p^k)`: one fixed
//!    correction into the fiber, then multiplication by `1 + p^k X` with X
//!    uniform over the `2n^2 + n` dimensional space `{X : JX symmetric}`;
//! 3. for m < f, masking of the high digits: `g + p^m U` with U uniform,
//!    a bijection onto the fiber of size `p^{4n^2(f-m)}`.
//!
//! For m = 0 stage 1-2 collapse to rejection sampling of `GL(F_p)`
//! followed by an unconstrained lift.

use std::collections::HashMap;

use num_bigint::BigUint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::matrix::RMatrix;
use crate::ring::RingSpec;

/// Default cap on `p^(4n^2 f)`, the number of candidate matrices an
/// exhaustive enumeration walks.
pub const DEFAULT_MATRIX_BOUND: u128 = 1 << 24;

/// Parameters `(p, f, m, n)` naming the group `Sp^(m)_{2n}(Z/p^f)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawGroupSpec")]
pub struct GroupSpec {
    p: u64,
    f: u32,
    m: u32,
    n: u32,
}

#[derive(Deserialize)]
struct RawGroupSpec {
    p: u64,
    f: u32,
    m: u32,
    n: u32,
}

impl TryFrom<RawGroupSpec> for GroupSpec {
    type Error = Error;
    fn try_from(raw: RawGroupSpec) -> Result<GroupSpec> {
        GroupSpec::new(raw.p, raw.f, raw.m, raw.n)
    }
}

impl GroupSpec {
    pub fn new(p: u64, f: u32, m: u32, n: u32) -> Result<Self> {
        RingSpec::new(p, f)?;
        if m > f {
            return Err(Error::InvalidParameter(format!("m = {m} exceeds f = {f}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        Ok(GroupSpec { p, f, m, n })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn ring(&self) -> RingSpec {
        RingSpec::new(self.p, self.f).expect("validated at construction")
    }

    pub fn dim(&self) -> usize {
        2 * self.n as usize
    }

    /// Exact group order by the three-case formula.
    pub fn order(&self) -> BigUint {
        let q = BigUint::from(self.p);
        let n = self.n;
        let nn = u64::from(n) * u64::from(n);
        if self.m == 0 {
            q.pow((4 * nn * u64::from(self.f - 1)) as u32) * gl_order(self.p, 2 * n)
        } else {
            q.pow((4 * nn * u64::from(self.f - self.m)) as u32)
                * q.pow(((2 * nn + u64::from(n)) * u64::from(self.m - 1)) as u32)
                * sp_order(self.p, n)
        }
    }

    /// Membership test: invertible and `h^t J h = J (mod p^m)`.
    pub fn contains(&self, h: &RMatrix) -> Result<bool> {
        if h.ring() != self.ring() {
            return Err(Error::RingMismatch(format!(
                "expected Z/{}, got Z/{}",
                self.ring().modulus(),
                h.ring().modulus()
            )));
        }
        if h.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: h.dim() });
        }
        if !h.is_invertible() {
            return Ok(false);
        }
        if self.m == 0 {
            return Ok(true);
        }
        let j = RMatrix::standard_form(self.ring(), self.n as usize);
        let lhs = h.transpose().matmul(&j)?.matmul(h)?;
        let diff = lhs.sub(&j)?;
        let pm = self.ring().pow_p(self.m);
        Ok(diff.entries().iter().all(|&x| x % pm == 0))
    }

    /// Number of candidate matrices an exhaustive walk must visit, if it
    /// fits in 128 bits.
    pub fn candidate_count(&self) -> Option<u128> {
        let cells = 4 * u32::from(self.n) * u32::from(self.n) * self.f;
        let mut acc: u128 = 1;
        for _ in 0..cells {
            acc = acc.checked_mul(u128::from(self.p))?;
        }
        Some(acc)
    }

    /// Streams every member exactly once (odometer over all matrices,
    /// filtered by membership).
    pub fn enumerate(&self) -> Result<Enumerate> {
        self.enumerate_with_bound(DEFAULT_MATRIX_BOUND)
    }

    pub fn enumerate_with_bound(&self, bound: u128) -> Result<Enumerate> {
        match self.candidate_count() {
            Some(c) if c <= bound => Ok(Enumerate { spec: *self, digits: Some(vec![0; self.dim() * self.dim()]) }),
            c => Err(Error::EnumerationBound { needed: c.unwrap_or(u128::MAX), bound }),
        }
    }
}

fn u32_from(big: u64) -> u32 {
    u32::try_from(big).expect("exponent fits u32")
}

/// `|GL_d(F_q)| = prod_{i=0..d-1} (q^d - q^i)`.
pub fn gl_order(q: u64, d: u32) -> BigUint {
    let qb = BigUint::from(q);
    let qd = qb.pow(d);
    (0..d).map(|i| &qd - qb.pow(i)).product()
}

/// `|Sp_2n(F_q)| = q^{n^2} prod_{i=1..n} (q^{2i} - 1)`.
pub fn sp_order(q: u64, n: u32) -> BigUint {
    let qb = BigUint::from(q);
    let square = qb.pow(u32_from(u64::from(n) * u64::from(n)));
    square * (1..=n).map(|i| qb.pow(2 * i) - 1u32).product::<BigUint>()
}

/// Streaming enumeration of the members of a `GroupSpec`.
pub struct Enumerate {
    spec: GroupSpec,
    digits: Option<Vec<u64>>,
}

impl Iterator for Enumerate {
    type Item = RMatrix;

    fn next(&mut self) -> Option<RMatrix> {
        let ring = self.spec.ring();
        let d = self.spec.dim();
        while let Some(digits) = &mut self.digits {
            let candidate = RMatrix::new(ring, d, digits.clone()).expect("digit grid is square");
            // Advance the odometer.
            let mut done = true;
            for slot in digits.iter_mut() {
                *slot += 1;
                if *slot < ring.modulus() {
                    done = false;
                    break;
                }
                *slot = 0;
            }
            if done {
                self.digits = None;
            }
            if self.spec.contains(&candidate).expect("candidate matches spec") {
                return Some(candidate);
            }
        }
        None
    }
}

/// Derives the per-worker seed; splitmix64-style mixing so neighboring
/// worker indices decorrelate.
pub fn worker_seed(seed: u64, worker: u32) -> u64 {
    let mut z = seed ^ 0x9E3779B97F4A7C15u64.wrapping_mul(u64::from(worker) + 1);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Stateful uniform sampler; create one per worker.
pub struct Sampler {
    spec: GroupSpec,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(spec: GroupSpec, seed: u64) -> Self {
        Sampler { spec, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn for_worker(spec: GroupSpec, seed: u64, worker: u32) -> Self {
        Self::new(spec, worker_seed(seed, worker))
    }

    /// Draws one exactly uniform group element.
    pub fn draw(&mut self) -> RMatrix {
        let spec = self.spec;
        let ring = spec.ring();
        let d = spec.dim();
        let p = spec.p;
        let g = if spec.m == 0 {
            // Uniform GL(F_p) by rejection, then unconstrained digits.
            let base = loop {
                let entries: Vec<u64> = (0..d * d).map(|_| self.rng.gen_range(0..p)).collect();
                let candidate = RMatrix::new(RingSpec::new(p, 1).expect("prime ring"), d, entries)
                    .expect("square");
                if candidate.is_invertible() {
                    break candidate;
                }
            };
            let high = ring.modulus() / p;
            let entries: Vec<u64> = base
                .entries()
                .iter()
                .map(|&x| x + p * self.rng.gen_range(0..high))
                .collect();
            RMatrix::new(ring, d, entries).expect("square")
        } else {
            let mut g = self.sample_sp_mod_p();
            for k in 1..spec.m {
                g = self.lift_one_level(g, k);
            }
            if spec.f > spec.m {
                let pm = ring.pow_p(spec.m);
                let high = ring.modulus() / pm;
                let entries: Vec<u64> = g
                    .entries()
                    .iter()
                    .map(|&x| ring.add(x, pm * self.rng.gen_range(0..high)))
                    .collect();
                g = RMatrix::new(ring, d, entries).expect("square");
            }
            g
        };
        debug_assert!(spec.contains(&g).expect("sampled matrix well formed"));
        g
    }

    /// Stage 1: symplectic Gram-Schmidt over `F_p`; returns a member of
    /// `Sp_{2n}(F_p)` embedded in the full ring.
    fn sample_sp_mod_p(&mut self) -> RMatrix {
        let spec = self.spec;
        let p = spec.p;
        let n = spec.n as usize;
        let width = 2 * n;
        let mut constraints: Vec<Vec<u64>> = Vec::new();
        let mut e_cols: Vec<Vec<u64>> = Vec::with_capacity(n);
        let mut f_cols: Vec<Vec<u64>> = Vec::with_capacity(n);
        for k in 0..n {
            let basis = if constraints.is_empty() {
                (0..width)
                    .map(|i| {
                        let mut v = vec![0u64; width];
                        v[i] = 1;
                        v
                    })
                    .collect()
            } else {
                fp_nullspace(&constraints, width, p)
            };
            debug_assert_eq!(basis.len(), width - 2 * k);
            let e = loop {
                let coeffs: Vec<u64> =
                    (0..basis.len()).map(|_| self.rng.gen_range(0..p)).collect();
                if coeffs.iter().any(|&c| c != 0) {
                    break combine(&basis, &coeffs, p);
                }
            };
            // Partner: solve <e, w> = 1 inside the complement.  The form is
            // nondegenerate there, so some basis vector pairs nontrivially.
            let c: Vec<u64> = basis.iter().map(|b| sympl(&e, b, n, p)).collect();
            let pivot = c.iter().position(|&x| x != 0).expect("nondegenerate complement");
            let pivot_inv = fp_inv(c[pivot], p);
            let mut coeffs = vec![0u64; basis.len()];
            let mut acc = 0u64;
            for (i, &ci) in c.iter().enumerate() {
                if i != pivot {
                    let t = self.rng.gen_range(0..p);
                    coeffs[i] = t;
                    acc = (acc + mulp(t, ci, p)) % p;
                }
            }
            coeffs[pivot] = mulp((1 + p - acc) % p, pivot_inv, p);
            let fv = combine(&basis, &coeffs, p);
            debug_assert_eq!(sympl(&e, &fv, n, p), 1);
            constraints.push(pairing_row(&e, n, p));
            constraints.push(pairing_row(&fv, n, p));
            e_cols.push(e);
            f_cols.push(fv);
        }
        let mut g = RMatrix::zero(spec.ring(), width);
        for (j, col) in e_cols.iter().chain(f_cols.iter()).enumerate() {
            for (i, &x) in col.iter().enumerate() {
                g.set(i, j, x);
            }
        }
        g
    }

    /// Stage 2: one Hensel step.  `g` is symplectic mod `p^k`; the result
    /// is symplectic mod `p^{k+1}` and uniform in the fiber over
    /// `g mod p^k`.
    fn lift_one_level(&mut self, g: RMatrix, k: u32) -> RMatrix {
        let spec = self.spec;
        let ring = spec.ring();
        let p = spec.p;
        let d = spec.dim();
        let n = spec.n as usize;
        let pk = ring.pow_p(k);
        let pk1 = ring.pow_p(k + 1);
        let j = RMatrix::standard_form(ring, n);
        let diff = g.transpose().matmul(&j).expect("dims").matmul(&g).expect("dims")
            .sub(&j).expect("dims");
        // E = (g^t J g - J) / p^k mod p is alternating with zero diagonal
        // (x^t J x vanishes identically over Z), so a strictly lower
        // triangular S with S - S^t = -E always exists, p = 2 included.
        let mut t_mat = vec![0u64; d * d];
        for i in 0..d {
            for jj in 0..i {
                let e = diff.get(i, jj) % pk1 / pk % p;
                t_mat[i * d + jj] = (p - e) % p;
            }
        }
        debug_assert!((0..d).all(|i| diff.get(i, i) % pk1 == 0));
        // Add a uniform symmetric Y: X = -J (S + Y) then has JX = S + Y
        // up to sign bookkeeping, covering the full kernel coset.
        for i in 0..d {
            for jj in i..d {
                let y = self.rng.gen_range(0..p);
                t_mat[i * d + jj] = (t_mat[i * d + jj] + y) % p;
                if jj != i {
                    t_mat[jj * d + i] = (t_mat[jj * d + i] + y) % p;
                }
            }
        }
        // X = -J * T computed blockwise: J swaps the halves with a sign.
        let mut lift = RMatrix::identity(ring, d);
        for i in 0..d {
            for jj in 0..d {
                let x = if i < n { (p - t_mat[(n + i) * d + jj]) % p } else { t_mat[(i - n) * d + jj] };
                if x != 0 {
                    let cur = lift.get(i, jj);
                    lift.set(i, jj, ring.add(cur, pk * x));
                }
            }
        }
        let lifted = g.matmul(&lift).expect("dims");
        #[cfg(debug_assertions)]
        {
            let check = lifted.transpose().matmul(&j).unwrap().matmul(&lifted).unwrap()
                .sub(&j).unwrap();
            debug_assert!(check.entries().iter().all(|&x| x % pk1 == 0));
        }
        lifted
    }
}

/// Convenience wrapper: a single uniform draw.
pub fn sample_uniform(spec: GroupSpec, seed: u64) -> RMatrix {
    Sampler::new(spec, seed).draw()
}

/// Result of the chi-square uniformity selftest.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SelftestReport {
    pub chi2: f64,
    pub dof: u64,
    pub threshold: f64,
    pub pass: bool,
}

/// Chi-square goodness of fit of the sampler against the enumerated group.
pub fn sampler_selftest(
    spec: GroupSpec,
    samples: u64,
    significance: f64,
    seed: u64,
) -> Result<SelftestReport> {
    if samples == 0 {
        return Err(Error::InsufficientSamples("selftest needs at least one sample".into()));
    }
    let members: Vec<RMatrix> = spec.enumerate()?.collect();
    let index: HashMap<&RMatrix, usize> =
        members.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut counts = vec![0u64; members.len()];
    let mut sampler = Sampler::new(spec, seed);
    for _ in 0..samples {
        let g = sampler.draw();
        let i = index.get(&g).expect("sampled element is a member");
        counts[*i] += 1;
    }
    let expected = samples as f64 / members.len() as f64;
    let chi2 = counts
        .iter()
        .map(|&c| {
            let delta = c as f64 - expected;
            delta * delta / expected
        })
        .sum();
    let dof = (members.len() - 1) as u64;
    let threshold = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidParameter(format!("chi-square dof: {e}")))?
        .inverse_cdf(significance);
    Ok(SelftestReport { chi2, dof, threshold, pass: chi2 <= threshold })
}

fn mulp(a: u64, b: u64, p: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(p)) as u64
}

fn fp_inv(a: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulp(acc, b, p);
        }
        b = mulp(b, b, p);
        e >>= 1;
    }
    acc
}

/// `<u, v> = sum_i u_i v_{n+i} - u_{n+i} v_i` over `F_p`.
fn sympl(u: &[u64], v: &[u64], n: usize, p: u64) -> u64 {
    (0..n).fold(0u64, |acc, i| {
        let pos = mulp(u[i], v[n + i], p);
        let neg = mulp(u[n + i], v[i], p);
        (acc + pos + p - neg) % p
    })
}

/// Row vector a with `a . w = <v, w>` for all w.
fn pairing_row(v: &[u64], n: usize, p: u64) -> Vec<u64> {
    (0..2 * n)
        .map(|j| if j < n { (p - v[n + j]) % p } else { v[j - n] })
        .collect()
}

fn combine(basis: &[Vec<u64>], coeffs: &[u64], p: u64) -> Vec<u64> {
    let width = basis[0].len();
    let mut out = vec![0u64; width];
    for (b, &c) in basis.iter().zip(coeffs) {
        if c == 0 {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(b) {
            *o = (*o + mulp(c, x, p)) % p;
        }
    }
    out
}

/// Basis of `{w : rows . w = 0}` over `F_p`.
fn fp_nullspace(rows: &[Vec<u64>], width: usize, p: u64) -> Vec<Vec<u64>> {
    let mut m: Vec<Vec<u64>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..width {
        let Some(sel) = (rank..m.len()).find(|&r| m[r][col] % p != 0) else { continue };
        m.swap(sel, rank);
        let inv = fp_inv(m[rank][col], p);
        for x in m[rank].iter_mut() {
            *x = mulp(*x, inv, p);
        }
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let c = m[r][col];
                for jj in 0..width {
                    let sub = mulp(c, m[rank][jj], p);
                    m[r][jj] = (m[r][jj] + p - sub) % p;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    (0..width)
        .filter(|c| !pivots.contains(c))
        .map(|fc| {
            let mut v = vec![0u64; width];
            v[fc] = 1;
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m[ri][fc] % p) % p;
            }
            v
        })
        .collect()
}
