//! Combinatorics of finite abelian p-groups.
//!
//! Orders and automorphism counts come from closed forms; element and
//! subgroup counts are computed explicitly.  Two workhorses feed the
//! u-probability recursion and the Hall identity:
//!
//! * `count_cyclic_quotients`: for y in H, how often is `H/<y>` of a given
//!   type, refined by the order of y.  Every y is equivalent under `Aut(H)`
//!   to the vector of plain p-powers `(p^{v_i})` with the same valuation
//!   profile (scale each coordinate by a unit), so only one Smith normal
//!   form per profile is needed rather than one per element.
//! * `count_subgroups_iso_with_quotient`: exact subgroup lattice walk with
//!   closure-based breadth-first search and bitset deduplication.
//!
//! Both are memoized per `(type, p)` behind mutexes, so concurrent callers
//! share the work.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intsnf::integer_snf;
use crate::partition::GroupType;
use crate::ring::is_prime;

/// Default cap on explicit element enumeration.
pub const DEFAULT_ENUMERATION_BOUND: u64 = 1_000_000;

/// `|G| = p^weight`.
pub fn group_order(g: &GroupType, p: u64) -> BigUint {
    BigUint::from(p).pow(g.weight() as u32)
}

/// Exact `|Aut(G)|` for `G = + Z/p^{l_i}` by the classical closed form
/// `p^{sum_j (l'_j)^2} * prod_s prod_{i=1..m_s} (1 - p^{-i})`, where `l'`
/// is the conjugate partition and `m_s` the multiplicity of part `s`.
pub fn aut_order(g: &GroupType, p: u64) -> BigUint {
    let conj = g.conjugate();
    let square_sum: u64 = conj.parts().iter().map(|&c| u64::from(c) * u64::from(c)).sum();
    let mut acc = BigRational::from_integer(BigInt::from(BigUint::from(p).pow(square_sum as u32)));
    for (_, mult) in g.multiplicities() {
        let mut qi = BigInt::one();
        let pb = BigInt::from(p);
        for _ in 0..mult {
            qi *= &pb;
            acc *= BigRational::new(&qi - 1, qi.clone());
        }
    }
    debug_assert!(acc.is_integer());
    acc.to_integer().to_biguint().expect("automorphism order is positive")
}

/// Type of `H/<y>` where `y` is given by coordinates in `+ Z/p^{l_i}`.
///
/// Computed from the integer Smith normal form of the relation matrix
/// `[diag(p^{l_i}) | y]`: the quotient is presented by those relations, so
/// its type is the positive p-valuations of the invariant factors.
pub fn quotient_type(h: &GroupType, y: &[u64], p: u64) -> Result<GroupType> {
    let r = h.rank();
    if y.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: y.len() });
    }
    for (i, (&yi, &li)) in y.iter().zip(h.parts()).enumerate() {
        if BigUint::from(yi) >= BigUint::from(p).pow(li) {
            return Err(Error::InvalidParameter(format!(
                "coordinate {i} = {yi} out of range for Z/{p}^{li}"
            )));
        }
    }
    if r == 0 {
        return Ok(GroupType::trivial());
    }
    let mut rel = vec![vec![BigInt::zero(); r + 1]; r];
    for i in 0..r {
        rel[i][i] = BigInt::from(BigUint::from(p).pow(h.parts()[i]));
        rel[i][r] = BigInt::from(y[i]);
    }
    let invariants = integer_snf(&rel)?;
    let parts = invariants.iter().map(|d| {
        debug_assert!(!d.is_zero(), "relation matrix has full row rank");
        let mut d = d.to_biguint().expect("invariants nonnegative");
        let mut v = 0u32;
        let pb = BigUint::from(p);
        while (&d % &pb).is_zero() {
            d /= &pb;
            v += 1;
        }
        v
    });
    Ok(GroupType::from_unsorted(parts))
}

/// Explicit model of `+ Z/p^{l_i}` with elements as mixed-radix indices.
pub(crate) struct Module {
    p: u64,
    mods: Vec<u64>,
    size: u64,
}

impl Module {
    pub(crate) fn new(t: &GroupType, p: u64, bound: u64) -> Result<Self> {
        let mut size: u128 = 1;
        let mut mods = Vec::with_capacity(t.rank());
        for &li in t.parts() {
            let m = (0..li).try_fold(1u64, |acc, _| acc.checked_mul(p));
            let m = m.ok_or_else(|| Error::EnumerationBound {
                needed: u128::MAX,
                bound: u128::from(bound),
            })?;
            mods.push(m);
            size = size.saturating_mul(u128::from(m));
        }
        if size > u128::from(bound) {
            return Err(Error::EnumerationBound { needed: size, bound: u128::from(bound) });
        }
        Ok(Module { p, mods, size: size as u64 })
    }

    pub(crate) fn size(&self) -> u64 {
        self.size
    }

    pub(crate) fn decode(&self, mut idx: u64) -> Vec<u64> {
        self.mods
            .iter()
            .map(|&m| {
                let c = idx % m;
                idx /= m;
                c
            })
            .collect()
    }

    pub(crate) fn encode(&self, coords: &[u64]) -> u64 {
        self.mods
            .iter()
            .zip(coords)
            .rev()
            .fold(0u64, |acc, (&m, &c)| acc * m + c)
    }

    pub(crate) fn add(&self, a: u64, b: u64) -> u64 {
        let (mut a, mut b) = (a, b);
        let mut idx = 0u64;
        let mut radix = 1u64;
        for &m in &self.mods {
            let s = (a % m + b % m) % m;
            idx += s * radix;
            radix *= m;
            a /= m;
            b /= m;
        }
        idx
    }

    /// Index of `p * x`.
    pub(crate) fn p_mul(&self, x: u64) -> u64 {
        let coords: Vec<u64> = self.decode(x).iter().zip(&self.mods).map(|(&c, &m)| c * self.p % m).collect();
        self.encode(&coords)
    }

    /// Smallest e with `p^e * x = 0`.
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) fn order_exp(&self, x: u64) -> u32 {
        let mut e = 0u32;
        for (&c, &m) in self.decode(x).iter().zip(&self.mods) {
            // Multiplications by p needed to kill the coordinate.
            let mut c = c;
            let mut k = 0u32;
            while c != 0 {
                c = c * self.p % m;
                k += 1;
            }
            e = e.max(k);
        }
        e
    }
}

type CyclicProfile = BTreeMap<GroupType, BTreeMap<u32, BigUint>>;

fn cyclic_cache() -> &'static Mutex<HashMap<(GroupType, u64), Arc<CyclicProfile>>> {
    static CACHE: OnceLock<Mutex<HashMap<(GroupType, u64), Arc<CyclicProfile>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// For each quotient type `G` of `H/<y>` and each n with `|<y>| = p^n`,
/// the number of y realizing that pair.  Exact for any size of H: elements
/// are grouped by valuation profile, which determines both outputs.
pub(crate) fn cyclic_quotient_profile(h: &GroupType, p: u64) -> Arc<CyclicProfile> {
    debug_assert!(is_prime(p));
    if let Some(hit) = cyclic_cache().lock().unwrap().get(&(h.clone(), p)) {
        return Arc::clone(hit);
    }
    let r = h.rank();
    let parts = h.parts();
    let mut profile: CyclicProfile = BTreeMap::new();
    // Odometer over valuation profiles v_i in 0..=l_i; v_i = l_i means the
    // coordinate is zero.
    let mut v = vec![0u32; r];
    loop {
        let mut count = BigUint::one();
        let mut n = 0u32;
        let mut y = Vec::with_capacity(r);
        for i in 0..r {
            let li = parts[i];
            let vi = v[i];
            if vi < li {
                // p^{l_i - v_i} - p^{l_i - v_i - 1} elements of valuation v_i.
                let high = BigUint::from(p).pow(li - vi);
                let low = BigUint::from(p).pow(li - vi - 1);
                count *= high - low;
                n = n.max(li - vi);
                y.push(pow_u64(p, vi));
            } else {
                y.push(0);
            }
        }
        let g = quotient_type(h, &y, p).expect("profile coordinates in range");
        *profile.entry(g).or_default().entry(n).or_insert_with(BigUint::zero) += count;
        // Advance the odometer.
        let mut i = 0;
        loop {
            if i == r {
                let out = Arc::new(profile);
                cyclic_cache()
                    .lock()
                    .unwrap()
                    .insert((h.clone(), p), Arc::clone(&out));
                return out;
            }
            if v[i] < parts[i] {
                v[i] += 1;
                break;
            }
            v[i] = 0;
            i += 1;
        }
    }
}

fn pow_u64(p: u64, e: u32) -> u64 {
    (0..e).fold(1u64, |acc, _| acc * p)
}

/// Counts `{y in H : H/<y> iso G}`, split by the order exponent n of y.
pub fn count_cyclic_quotients(
    h: &GroupType,
    g: &GroupType,
    p: u64,
) -> Result<BTreeMap<u32, u64>> {
    count_cyclic_quotients_with_bound(h, g, p, DEFAULT_ENUMERATION_BOUND)
}

pub fn count_cyclic_quotients_with_bound(
    h: &GroupType,
    g: &GroupType,
    p: u64,
    bound: u64,
) -> Result<BTreeMap<u32, u64>> {
    check_prime(p)?;
    let order = group_order(h, p);
    if order > BigUint::from(bound) {
        return Err(Error::EnumerationBound {
            needed: order.to_u128().unwrap_or(u128::MAX),
            bound: u128::from(bound),
        });
    }
    let profile = cyclic_quotient_profile(h, p);
    Ok(profile
        .get(g)
        .map(|by_n| {
            by_n.iter()
                .map(|(&n, c)| (n, c.to_u64().expect("count below enumeration bound")))
                .collect()
        })
        .unwrap_or_default())
}

type SubgroupProfile = BTreeMap<(GroupType, GroupType), u64>;

fn subgroup_cache() -> &'static Mutex<HashMap<(GroupType, u64), Arc<SubgroupProfile>>> {
    static CACHE: OnceLock<Mutex<HashMap<(GroupType, u64), Arc<SubgroupProfile>>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Counts `{H1 <= H : H1 iso Z and H/H1 iso G}` by exhaustive subgroup
/// lattice traversal.
pub fn count_subgroups_iso_with_quotient(
    h: &GroupType,
    z: &GroupType,
    g: &GroupType,
    p: u64,
) -> Result<u64> {
    count_subgroups_with_bound(h, z, g, p, DEFAULT_ENUMERATION_BOUND)
}

pub fn count_subgroups_with_bound(
    h: &GroupType,
    z: &GroupType,
    g: &GroupType,
    p: u64,
    bound: u64,
) -> Result<u64> {
    check_prime(p)?;
    // |H1| * |H/H1| = |H| is forced, so mismatched weights need no walk.
    if z.weight() + g.weight() != h.weight() {
        return Ok(0);
    }
    if z.is_trivial() {
        return Ok(u64::from(g == h));
    }
    if g.is_trivial() {
        return Ok(u64::from(z == h));
    }
    let profile = subgroup_profile(h, p, bound)?;
    Ok(profile.get(&(z.clone(), g.clone())).copied().unwrap_or(0))
}

/// Full (subgroup type, quotient type) -> count table for H; memoized.
pub(crate) fn subgroup_profile(
    h: &GroupType,
    p: u64,
    bound: u64,
) -> Result<Arc<SubgroupProfile>> {
    if let Some(hit) = subgroup_cache().lock().unwrap().get(&(h.clone(), p)) {
        return Ok(Arc::clone(hit));
    }
    let md = Module::new(h, p, bound)?;
    let size = md.size() as usize;
    let words = size.div_ceil(64);
    // Precomputed element data.
    let add_table: Option<Vec<u32>> = if size <= 2048 {
        let mut t = vec![0u32; size * size];
        for a in 0..size {
            for b in a..size {
                let s = md.add(a as u64, b as u64) as u32;
                t[a * size + b] = s;
                t[b * size + a] = s;
            }
        }
        Some(t)
    } else {
        None
    };
    let add = |a: usize, b: usize| -> usize {
        match &add_table {
            Some(t) => t[a * size + b] as usize,
            None => md.add(a as u64, b as u64) as usize,
        }
    };
    let p_mul: Vec<u32> = (0..size).map(|x| md.p_mul(x as u64) as u32).collect();
    let max_exp = h.exponent();

    let mut profile: SubgroupProfile = BTreeMap::new();
    let mut seen: HashSet<Box<[u64]>> = HashSet::new();
    let mut queue: VecDeque<Box<[u64]>> = VecDeque::new();
    let mut trivial = vec![0u64; words].into_boxed_slice();
    trivial[0] |= 1;
    seen.insert(trivial.clone());
    queue.push_back(trivial);

    while let Some(bits) = queue.pop_front() {
        let members: Vec<usize> =
            (0..size).filter(|&x| bits[x / 64] >> (x % 64) & 1 == 1).collect();
        // Classify the subgroup by its p^j-torsion counts and the quotient
        // by p^j-division counts.
        let sub_t = type_from_counts(p, (0..=max_exp).map(|j| {
            members
                .iter()
                .filter(|&&x| {
                    let mut y = x as u32;
                    for _ in 0..j {
                        y = p_mul[y as usize];
                    }
                    y == 0
                })
                .count() as u64
        }));
        let quot_t = type_from_counts(p, (0..=max_exp).map(|j| {
            (0..size)
                .filter(|&x| {
                    let mut y = x as u32;
                    for _ in 0..j {
                        y = p_mul[y as usize];
                    }
                    bits[y as usize / 64] >> (y % 64) & 1 == 1
                })
                .count() as u64 / members.len() as u64
        }));
        *profile.entry((sub_t, quot_t)).or_insert(0) += 1;

        // Extend by one generator; x and x' in the same coset give the same
        // closure, so marking visited cosets prunes the candidates.
        let mut coset_done = bits.clone();
        for x in 1..size {
            if coset_done[x / 64] >> (x % 64) & 1 == 1 {
                continue;
            }
            for &s in &members {
                let t = add(s, x);
                coset_done[t / 64] |= 1 << (t % 64);
            }
            let mut closure = bits.clone();
            let mut jx = 0usize;
            loop {
                jx = add(jx, x);
                if jx == 0 {
                    break;
                }
                for &s in &members {
                    let t = add(s, jx);
                    closure[t / 64] |= 1 << (t % 64);
                }
            }
            if seen.insert(closure.clone()) {
                queue.push_back(closure);
            }
        }
    }
    let out = Arc::new(profile);
    subgroup_cache().lock().unwrap().insert((h.clone(), p), Arc::clone(&out));
    Ok(out)
}

/// Rebuilds a type from the counts `c_j = |A[p^j]|` for j = 0..=max:
/// the conjugate partition has `l'_j = log_p(c_j / c_{j-1})`.
fn type_from_counts(p: u64, counts: impl Iterator<Item = u64>) -> GroupType {
    let counts: Vec<u64> = counts.collect();
    let conj: Vec<u32> = counts
        .windows(2)
        .map(|w| {
            debug_assert!(w[1] % w[0] == 0);
            let mut ratio = w[1] / w[0];
            let mut e = 0u32;
            while ratio > 1 {
                debug_assert!(ratio % p == 0);
                ratio /= p;
                e += 1;
            }
            e
        })
        .collect();
    GroupType::from_unsorted(conj).conjugate()
}

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("p = {p} is not prime")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::enumerate_types;

    fn t(parts: &[u32]) -> GroupType {
        GroupType::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn orders() {
        assert_eq!(group_order(&t(&[]), 2), BigUint::from(1u32));
        assert_eq!(group_order(&t(&[1, 1]), 3), BigUint::from(9u32));
        assert_eq!(group_order(&t(&[2, 1]), 2), BigUint::from(8u32));
    }

    #[test]
    fn aut_order_closed_form_examples() {
        assert_eq!(aut_order(&t(&[1]), 5), BigUint::from(4u32));
        assert_eq!(aut_order(&t(&[1, 1]), 2), BigUint::from(6u32));
        assert_eq!(aut_order(&t(&[2, 1]), 2), BigUint::from(8u32));
        assert_eq!(aut_order(&t(&[]), 7), BigUint::from(1u32));
        // |GL_3(F_2)| = 168.
        assert_eq!(aut_order(&t(&[1, 1, 1]), 2), BigUint::from(168u32));
    }

    #[test]
    fn quotient_type_examples() {
        assert_eq!(quotient_type(&t(&[2, 1]), &[2, 0], 2).unwrap(), t(&[1, 1]));
        assert_eq!(quotient_type(&t(&[1]), &[0], 3).unwrap(), t(&[1]));
        assert_eq!(quotient_type(&t(&[1]), &[1], 3).unwrap(), t(&[]));
        assert_eq!(quotient_type(&t(&[]), &[], 2).unwrap(), t(&[]));
        assert!(quotient_type(&t(&[1]), &[3], 3).is_err());
        assert!(quotient_type(&t(&[1]), &[0, 0], 3).is_err());
    }

    #[test]
    fn cyclic_quotient_examples() {
        let m: BTreeMap<u32, u64> = [(1, 1)].into();
        assert_eq!(count_cyclic_quotients(&t(&[1]), &t(&[]), 2).unwrap(), m);
        let m: BTreeMap<u32, u64> = [(1, 3)].into();
        assert_eq!(count_cyclic_quotients(&t(&[1, 1]), &t(&[1]), 2).unwrap(), m);
        let m: BTreeMap<u32, u64> = [(1, 1)].into();
        assert_eq!(count_cyclic_quotients(&t(&[2]), &t(&[1]), 2).unwrap(), m);
        let m: BTreeMap<u32, u64> = [(0, 1)].into();
        assert_eq!(count_cyclic_quotients(&t(&[1]), &t(&[1]), 2).unwrap(), m);
    }

    #[test]
    fn cyclic_quotient_totals_are_group_order() {
        for (p, max_w) in [(2u64, 8u32), (3, 5), (5, 3)] {
            for h in enumerate_types(max_w) {
                let profile = cyclic_quotient_profile(&h, p);
                let total: BigUint =
                    profile.values().flat_map(|m| m.values()).sum();
                assert_eq!(total, group_order(&h, p), "h = {h}, p = {p}");
            }
        }
    }

    #[test]
    fn profile_matches_element_enumeration() {
        // The valuation-profile shortcut must agree with walking every y.
        for (p, parts) in [
            (2u64, vec![3u32, 1]),
            (2, vec![2, 2, 1]),
            (2, vec![1, 1, 1]),
            (3, vec![2, 1]),
            (3, vec![1, 1, 1]),
            (5, vec![2]),
        ] {
            let h = t(&parts);
            let md = Module::new(&h, p, 1 << 20).unwrap();
            let mut direct: CyclicProfile = BTreeMap::new();
            for idx in 0..md.size() {
                let y = md.decode(idx);
                let g = quotient_type(&h, &y, p).unwrap();
                let n = md.order_exp(idx);
                *direct
                    .entry(g)
                    .or_default()
                    .entry(n)
                    .or_insert_with(BigUint::zero) += BigUint::one();
            }
            assert_eq!(*cyclic_quotient_profile(&h, p), direct, "h = {h}, p = {p}");
        }
    }

    #[test]
    fn subgroup_count_examples() {
        assert_eq!(
            count_subgroups_iso_with_quotient(&t(&[1, 1]), &t(&[1]), &t(&[1]), 2).unwrap(),
            3
        );
        assert_eq!(
            count_subgroups_iso_with_quotient(&t(&[2]), &t(&[1]), &t(&[1]), 2).unwrap(),
            1
        );
        for h in [t(&[2, 1]), t(&[3]), t(&[1, 1])] {
            assert_eq!(
                count_subgroups_iso_with_quotient(&h, &t(&[]), &h, 3).unwrap(),
                1
            );
        }
        // Weight mismatch short-circuits to zero.
        assert_eq!(
            count_subgroups_iso_with_quotient(&t(&[2]), &t(&[1]), &t(&[2]), 2).unwrap(),
            0
        );
    }

    #[test]
    fn total_subgroup_counts_of_elementary_groups() {
        // Known subgroup totals of (Z/2)^k: 5, 16, 67, 374.
        for (k, expect) in [(2u32, 5u64), (3, 16), (4, 67), (5, 374)] {
            let h = GroupType::new(vec![1; k as usize]).unwrap();
            let profile = subgroup_profile(&h, 2, 1 << 20).unwrap();
            let total: u64 = profile.values().sum();
            assert_eq!(total, expect, "k = {k}");
        }
        let profile = subgroup_profile(&t(&[1, 1]), 3, 1 << 20).unwrap();
        assert_eq!(profile.values().sum::<u64>(), 6);
    }

    #[test]
    fn subgroup_quotient_duality() {
        for p in [2u64, 3] {
            let max_w = if p == 2 { 6 } else { 3 };
            for h in enumerate_types(max_w) {
                let profile = subgroup_profile(&h, p, 1 << 20).unwrap();
                for ((z, g), &c) in profile.iter() {
                    let dual = profile.get(&(g.clone(), z.clone())).copied().unwrap_or(0);
                    assert_eq!(c, dual, "h = {h}, z = {z}, g = {g}, p = {p}");
                }
            }
        }
    }

    #[test]
    fn generating_tuples_two_ways() {
        // Direct enumeration of generating r-tuples vs Moebius inversion
        // over the subgroup lattice: #surj(Z^r -> H) = sum_K mu(K,H)|K|^r.
        for (p, parts) in [
            (2u64, vec![1u32, 1]),
            (2, vec![2, 1]),
            (2, vec![1, 1, 1]),
            (3, vec![1, 1]),
            (2, vec![2, 2]),
        ] {
            let h = t(&parts);
            let md = Module::new(&h, p, 1 << 20).unwrap();
            let size = md.size();
            let r = h.rank() as u32;

            // Direct: closure of each tuple.
            let mut direct = 0u64;
            let mut tuple = vec![0u64; r as usize];
            'outer: loop {
                let mut span: HashSet<u64> = HashSet::from([0]);
                for &g in &tuple {
                    let mut shifted: Vec<u64> = Vec::new();
                    let mut jg = g;
                    while jg != 0 {
                        shifted.extend(span.iter().map(|&s| md.add(s, jg)));
                        jg = md.add(jg, g);
                    }
                    span.extend(shifted);
                }
                if span.len() as u64 == size {
                    direct += 1;
                }
                for slot in tuple.iter_mut() {
                    *slot += 1;
                    if *slot < size {
                        continue 'outer;
                    }
                    *slot = 0;
                }
                break;
            }

            // Lattice: enumerate subgroups as bitsets, Moebius downward.
            let subs = all_subgroup_sizes(&md);
            let n = subs.len();
            let mut mu = vec![0i64; n];
            // subs sorted by size descending; index 0 is H itself.
            for i in 0..n {
                if subs[i].1 == size {
                    mu[i] = 1;
                } else {
                    let mut acc = 0i64;
                    for j in 0..n {
                        if j != i && contains_bits(&subs[j].0, &subs[i].0) {
                            acc += mu[j];
                        }
                    }
                    mu[i] = -acc;
                }
            }
            let lattice: i64 = subs
                .iter()
                .zip(&mu)
                .map(|((_, sz), &m)| m * (sz.pow(r) as i64))
                .sum();
            assert_eq!(direct as i64, lattice, "h = {h}, p = {p}");
        }
    }

    fn all_subgroup_sizes(md: &Module) -> Vec<(Vec<u64>, u64)> {
        let size = md.size() as usize;
        let words = size.div_ceil(64);
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut queue: VecDeque<Vec<u64>> = VecDeque::new();
        let mut trivial = vec![0u64; words];
        trivial[0] |= 1;
        seen.insert(trivial.clone());
        queue.push_back(trivial);
        let mut out = Vec::new();
        while let Some(bits) = queue.pop_front() {
            let members: Vec<usize> =
                (0..size).filter(|&x| bits[x / 64] >> (x % 64) & 1 == 1).collect();
            out.push((bits.clone(), members.len() as u64));
            for x in 1..size {
                if bits[x / 64] >> (x % 64) & 1 == 1 {
                    continue;
                }
                let mut closure = bits.clone();
                let mut jx = 0usize;
                loop {
                    jx = md.add(jx as u64, x as u64) as usize;
                    if jx == 0 {
                        break;
                    }
                    for &s in &members {
                        let tt = md.add(s as u64, jx as u64) as usize;
                        closure[tt / 64] |= 1 << (tt % 64);
                    }
                }
                if seen.insert(closure.clone()) {
                    queue.push_back(closure);
                }
            }
        }
        out.sort_by_key(|(_, sz)| std::cmp::Reverse(*sz));
        out
    }

    fn contains_bits(big: &[u64], small: &[u64]) -> bool {
        small.iter().zip(big).all(|(&s, &b)| s & !b == 0) && small != big
    }

    #[test]
    fn weight_sum_partial() {
        // sum over weight <= 12 of 1/|Aut| at p=2 approaches 1/(2)_inf.
        let mut acc = BigRational::zero();
        for g in enumerate_types(12) {
            acc += BigRational::new(
                BigInt::one(),
                BigInt::from(aut_order(&g, 2)),
            );
        }
        let val = acc.to_f64().unwrap();
        assert!((val - 3.46275).abs() < 0.01, "partial sum {val}");
    }

    mod aut_oracle {
        use super::*;

        /// Brute-force |Aut| by depth-first search over generator images,
        /// pruning non-injective partial maps.
        fn aut_order_bruteforce(h: &GroupType, p: u64) -> u64 {
            let r = h.rank();
            if r == 0 {
                return 1;
            }
            let md = Module::new(h, p, 1 << 22).unwrap();
            let size = md.size() as usize;
            let ord_exp: Vec<u32> = (0..size).map(|x| md.order_exp(x as u64)).collect();
            // Sublattice spanned by the first k generators: indices whose
            // trailing coordinates vanish.
            let level_sizes: Vec<usize> = (0..=r)
                .map(|k| {
                    h.parts()[..k]
                        .iter()
                        .fold(1usize, |acc, &li| acc * pow_u64(p, li) as usize)
                })
                .collect();
            let mut used = vec![false; size];
            used[0] = true;
            let mut images: Vec<u32> = vec![0; level_sizes[r]];
            let mut count = 0u64;
            dfs(&md, h, &ord_exp, &level_sizes, 0, &mut used, &mut images, &mut count);
            count
        }

        #[allow(clippy::too_many_arguments)]
        fn dfs(
            md: &Module,
            h: &GroupType,
            ord_exp: &[u32],
            level_sizes: &[usize],
            k: usize,
            used: &mut Vec<bool>,
            images: &mut Vec<u32>,
            count: &mut u64,
        ) {
            let r = h.rank();
            if k == r {
                *count += 1;
                return;
            }
            let lk = h.parts()[k];
            let prev = level_sizes[k];
            let pl = pow_u64(md.p, lk) as usize;
            for c in 0..md.size() as usize {
                if ord_exp[c] > lk {
                    continue;
                }
                // Try to mark images of s + a*e_k for a = 1..p^{l_k}.
                let mut marks: Vec<usize> = Vec::new();
                let mut ok = true;
                let mut ac = 0usize;
                'ext: for a in 1..pl {
                    ac = md.add(ac as u64, c as u64) as usize;
                    for s in 0..prev {
                        let t = md.add(images[s] as u64, ac as u64) as usize;
                        if used[t] {
                            ok = false;
                            break 'ext;
                        }
                        used[t] = true;
                        marks.push(t);
                        images[a * prev + s] = t as u32;
                    }
                }
                if ok {
                    dfs(md, h, ord_exp, level_sizes, k + 1, used, images, count);
                }
                for t in marks {
                    used[t] = false;
                }
            }
        }

        #[test]
        fn closed_form_matches_bruteforce() {
            // p = 2: every type of weight <= 5; p = 3: weight <= 4 except
            // the elementary (1,1,1,1) (26 million leaves), plus the
            // non-elementary weight-5 types of rank <= 3.
            for h in enumerate_types(5) {
                let expect = aut_order(&h, 2)
                    .to_u64()
                    .expect("small order");
                assert_eq!(aut_order_bruteforce(&h, 2), expect, "h = {h}, p = 2");
            }
            for h in enumerate_types(4) {
                if h.parts() == [1, 1, 1, 1] {
                    continue;
                }
                let expect = aut_order(&h, 3).to_u64().unwrap();
                assert_eq!(aut_order_bruteforce(&h, 3), expect, "h = {h}, p = 3");
            }
            for parts in [[5u32].as_slice(), &[4, 1], &[3, 2], &[3, 1, 1], &[2, 2, 1]] {
                let h = t(parts);
                let expect = aut_order(&h, 3).to_u64().unwrap();
                assert_eq!(aut_order_bruteforce(&h, 3), expect, "h = {h}, p = 3");
            }
            assert_eq!(aut_order_bruteforce(&t(&[1]), 5), 4);
        }
    }
}
