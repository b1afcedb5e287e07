//! Exact verification of the convolution identities behind the u-transform.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::heuristics::closed::{weight_w, WeightLevel};
use crate::partition::{enumerate_types, GroupType};
use crate::pgroup::{aut_order, count_subgroups_iso_with_quotient, cyclic_quotient_profile, group_order};
use crate::qseries::poch_infinite;
use crate::ring::is_prime;

/// Outcome of an identity check: both sides and a certified tail bound on
/// the truncation.  `residual <= tail` means the identity is confirmed.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub residual: BigRational,
    pub tail: BigRational,
}

impl IdentityCheck {
    pub fn confirmed(&self) -> bool {
        self.residual <= self.tail
    }
}

fn check_prime_q(q: u64) -> Result<()> {
    if !is_prime(q) {
        return Err(Error::InvalidParameter(format!(
            "enumerative checks need a prime, got {q}"
        )));
    }
    Ok(())
}

/// Hall's convolution identity
/// `sum_H w_k(H) #{H1 <= H : H1 iso Z, H/H1 iso G} = w_k(Z) w_k(G)`.
///
/// `|H1| |H/H1| = |H|` forces weight(H) = weight(Z) + weight(G), so the
/// sum is finite and the residual is exact; the tail is identically zero,
/// for k infinite as well.  `max_weight` must therefore cover the single
/// contributing weight.
pub fn check_hall(
    k: WeightLevel,
    z: &GroupType,
    g: &GroupType,
    q: u64,
    max_weight: u32,
) -> Result<IdentityCheck> {
    check_prime_q(q)?;
    let need = z.weight() + g.weight();
    if u64::from(max_weight) < need {
        return Err(Error::InvalidParameter(format!(
            "max_weight {max_weight} misses the contributing weight {need}"
        )));
    }
    let mut lhs = BigRational::zero();
    for h in enumerate_types(u32::try_from(need).expect("small weights")) {
        if h.weight() != need {
            continue;
        }
        let count = count_subgroups_iso_with_quotient(&h, z, g, q)?;
        if count == 0 {
            continue;
        }
        lhs += weight_w(k, &h, q) * BigRational::from_integer(count.into());
    }
    let rhs = weight_w(k, z, q) * weight_w(k, g, q);
    let residual = (&lhs - &rhs).abs();
    Ok(IdentityCheck { lhs, rhs, residual, tail: BigRational::zero() })
}

fn partitions_with_rank(rank: usize, max_part: u32) -> Vec<GroupType> {
    fn rec(left: usize, max: u32, buf: &mut Vec<u32>, out: &mut Vec<GroupType>) {
        if left == 0 {
            out.push(GroupType::new(buf.clone()).expect("weakly decreasing"));
            return;
        }
        for part in 1..=max {
            buf.push(part);
            rec(left - 1, part, buf, out);
            buf.pop();
        }
    }
    let mut out = Vec::new();
    rec(rank, max_part, &mut Vec::new(), &mut out);
    out
}

fn big_pow(q: u64, e: u64) -> BigInt {
    BigInt::from(q).pow(u32::try_from(e).expect("exponent fits"))
}

/// The level-1 lemma
/// `sum_{H, rk H = r} #{y : H/<y> iso G} / (|H|^u |Aut H|)
///    = (q^{r+u} - 1) / (q^r (q^u - 1)) * 1 / (|G|^u |Aut G|)`,
/// truncated to H of exponent at most `max_exponent`.
///
/// Tail: a contributing H beyond the cut splits as `(e) + mu` with
/// `e > max_exponent` and mu of rank r-1 with parts at most exponent(G)
/// (interlacing).  Counting y of the forced order and using
/// `|Aut| = phi(q^e) q^{2w(mu)} |Aut mu|` bounds each term by
/// `q/(q-1) * q^{-w(G)} * q^{-ue} * q^{-u w(mu)}/|Aut mu|`, which sums
/// geometrically over e.  The count bound needs
/// `max_exponent >= weight(G) + exponent(G)`.
pub fn check_lemma_m1(
    g: &GroupType,
    u: u32,
    q: u64,
    max_exponent: u32,
) -> Result<IdentityCheck> {
    check_prime_q(q)?;
    if u == 0 {
        return Err(Error::InvalidParameter("the lemma needs u >= 1".into()));
    }
    if u64::from(max_exponent) < g.weight() + u64::from(g.exponent()) {
        return Err(Error::InvalidParameter(format!(
            "max_exponent {max_exponent} too small for the tail bound of {g}"
        )));
    }
    let r = g.rank();
    let mut lhs = BigRational::zero();
    for h in partitions_with_rank(r, max_exponent) {
        let profile = cyclic_quotient_profile(&h, q);
        let count = profile
            .get(g)
            .map(|by_order| by_order.values().sum::<num_bigint::BigUint>())
            .unwrap_or_default();
        if count.is_zero() {
            continue;
        }
        let denom = group_order(&h, q).pow(u) * aut_order(&h, q);
        lhs += BigRational::new(BigInt::from(count), BigInt::from(denom));
    }
    let r64 = r as u64;
    let aut_g = BigRational::from_integer(aut_order(g, q).into());
    let order_g_u = BigRational::from_integer(big_pow(q, g.weight() * u64::from(u)));
    let rhs = BigRational::new(
        big_pow(q, r64 + u64::from(u)) - BigInt::one(),
        big_pow(q, r64) * (big_pow(q, u64::from(u)) - BigInt::one()),
    ) / (order_g_u * aut_g);
    let tail = if r == 0 {
        BigRational::zero()
    } else {
        let mu_sum: BigRational = partitions_with_rank(r - 1, g.exponent())
            .iter()
            .map(|mu| {
                BigRational::new(
                    BigInt::one(),
                    big_pow(q, mu.weight() * u64::from(u)) * BigInt::from(aut_order(mu, q)),
                )
            })
            .sum();
        let geometric = BigRational::new(
            BigInt::one(),
            big_pow(q, u64::from(max_exponent) * u64::from(u))
                * (big_pow(q, u64::from(u)) - BigInt::one()),
        );
        BigRational::new(BigInt::from(q), BigInt::from(q - 1))
            * BigRational::new(BigInt::one(), big_pow(q, g.weight()))
            * mu_sum
            * geometric
    };
    let residual = (&lhs - &rhs).abs();
    Ok(IdentityCheck { lhs, rhs, residual, tail })
}

/// `|sum_{weight <= max_weight} 1/|Aut G| - 1/(p)_inf|`, the truncated
/// Cohen-Lenstra mass identity.
pub fn check_weight_sum(p: u64, max_weight: u32) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidParameter("p must be at least 2".into()));
    }
    let sum: BigRational = enumerate_types(max_weight)
        .iter()
        .map(|g| BigRational::new(BigInt::one(), aut_order(g, p).into()))
        .sum();
    let target = poch_infinite::<f64>(p, 1e-12).recip();
    Ok((sum.to_f64().expect("modest size") - target.value).abs())
}
