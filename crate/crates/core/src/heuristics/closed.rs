//! Closed-form values of the limiting distributions and weights.
//!
//! Every closed form splits as (irrational prefactor depending only on the
//! level m) x (exact rational depending on the group); the rational parts
//! are exposed crate-internally so tables can defer rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::approx::{ApproxValue, Scalar};
use crate::error::{Error, Result};
use crate::partition::GroupType;
use crate::pgroup::{aut_order, group_order};
use crate::qseries::{poch_finite, poch_infinite};

/// Default certified accuracy of evaluated closed forms.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Truncation level of a Cohen-Lenstra weight.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WeightLevel {
    Finite(u32),
    Infinite,
}

fn rat(i: BigInt) -> BigRational {
    BigRational::from_integer(i)
}

fn aut_rat(g: &GroupType, q: u64) -> BigRational {
    rat(aut_order(g, q).into())
}

/// `q^binom(r,2)`.
fn q_binom2(q: u64, r: u32) -> BigRational {
    rat(BigInt::from(q).pow(r * r.saturating_sub(1) / 2))
}

/// The irrational factor shared by every group at level m:
/// `(q)_inf` for m = 0 and `(q)_inf / (q^2)_inf` for m in {1, 2}.
pub(crate) fn prefactor<S: Scalar>(m: u32, q: u64, eps: S) -> Result<ApproxValue<S>> {
    match m {
        0 => Ok(poch_infinite(q, eps)),
        1 | 2 => {
            let quarter = eps / S::from_f64(4.0).expect("small constant");
            Ok(poch_infinite(q, quarter).div(poch_infinite(q * q, quarter)))
        }
        _ => Err(Error::NoClosedForm { m }),
    }
}

/// Rational part of `P_{m,q}(g)`; the full value is `prefactor * rel`.
pub(crate) fn rel_closed(m: u32, q: u64, g: &GroupType) -> Result<BigRational> {
    let aut = aut_rat(g, q);
    let r = g.power_rank(1) as u32;
    match m {
        0 => Ok(aut.recip()),
        1 => Ok(poch_finite(q, r) * q_binom2(q, r) / aut),
        2 => {
            let s = g.power_rank(2) as u32;
            let t = (r - s) / 2;
            Ok(poch_finite(q, r - s) * poch_finite(q, s) * q_binom2(q, r) * q_binom2(q, s)
                / (poch_finite(q * q, t) * aut))
        }
        _ => Err(Error::NoClosedForm { m }),
    }
}

/// Rational part of the u-probability closed forms (levels 0 and 1 only).
pub(crate) fn rel_u_closed(m: u32, q: u64, u: u32, g: &GroupType) -> Result<BigRational> {
    let aut = aut_rat(g, q);
    let gu = rat(BigInt::from(group_order(g, q))).pow(u as i32);
    let r = g.power_rank(1) as u32;
    match m {
        0 => Ok((poch_finite(q, u) * gu * aut).recip()),
        1 => Ok(poch_finite(q * q, u) * poch_finite(q, r + u) * q_binom2(q, r)
            / (poch_finite(q, u) * poch_finite(q, u) * gu * aut)),
        _ => Err(Error::NoClosedForm { m }),
    }
}

fn check_q(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("q must be at least 2, got {q}")));
    }
    Ok(())
}

fn scaled<S: Scalar>(m: u32, q: u64, rel: &BigRational, eps: S) -> Result<ApproxValue<S>> {
    let magnitude = ApproxValue::<S>::from_rational(rel).value.abs().max(S::one());
    let inner = eps / ((S::one() + S::one()) * magnitude);
    let out = prefactor(m, q, inner)?.mul_rational(rel);
    debug_assert!(out.err <= eps);
    Ok(out)
}

/// `P_{m,q}(g)`, the limiting 1-eigenspace probability at level m.
pub fn p_closed<S: Scalar>(m: u32, q: u64, g: &GroupType, eps: S) -> Result<ApproxValue<S>> {
    check_q(q)?;
    let rel = rel_closed(m, q, g)?;
    scaled(m, q, &rel, eps)
}

/// `P^(u)_{m,q}(g)` for the two levels with closed forms.
pub fn u_closed<S: Scalar>(
    m: u32,
    q: u64,
    u: u32,
    g: &GroupType,
    eps: S,
) -> Result<ApproxValue<S>> {
    check_q(q)?;
    let rel = rel_u_closed(m, q, u, g)?;
    scaled(m, q, &rel, eps)
}

/// The truncated Cohen-Lenstra weight `w_k`; exact.
pub fn weight_w(k: WeightLevel, g: &GroupType, q: u64) -> BigRational {
    let aut = aut_rat(g, q);
    match k {
        WeightLevel::Infinite => aut.recip(),
        WeightLevel::Finite(k) => {
            let r = g.rank() as u32;
            if k < r {
                BigRational::zero()
            } else {
                poch_finite(q, k) / (poch_finite(q, k - r) * aut)
            }
        }
    }
}

/// Probability that a level-1 class group has p-rank r, at unit rank u.
pub fn rank_probability_m1<S: Scalar>(
    p: u64,
    u: u32,
    r: u32,
    eps: S,
) -> Result<ApproxValue<S>> {
    check_q(p)?;
    let exp = u64::from(r) * (u64::from(r) + 2 * u64::from(u) + 1) / 2;
    let power = rat(BigInt::from(p).pow(u32::try_from(exp).expect("exponent fits")));
    let rel = poch_finite(p * p, u) / (poch_finite(p, u) * power * poch_finite(p, r));
    scaled(1, p, &rel, eps)
}
