//! The q-Pochhammer quantities `(q)_r` and `(q)_infinity`.
//!
//! `(q)_r = prod_{i=1..r} (1 - q^{-i})` is kept as an exact rational.  The
//! infinite product is evaluated with a certified truncation: after N
//! factors the remaining factor lies in `[1 - s, 1]` with
//! `s = sum_{i>N} q^{-i} = q^{-N}/(q-1)`, so returning the midpoint of the
//! bracket gives an error bound of half the partial product times `s`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::approx::{ApproxValue, Scalar};

/// Exact `(q)_r` for an integer `q >= 2`.
pub fn poch_finite(q: u64, r: u32) -> BigRational {
    assert!(q >= 2, "q must be at least 2");
    let q = BigInt::from(q);
    let mut acc = BigRational::one();
    let mut qi = BigInt::one();
    for _ in 1..=r {
        qi *= &q;
        acc *= BigRational::new(&qi - 1, qi.clone());
    }
    acc
}

/// `(q)_infinity` with certified error at most `eps`.
///
/// `eps` must sit comfortably above the scalar's resolution (at least
/// `100 * epsilon`), otherwise the accumulated rounding could never be
/// certified below it.
pub fn poch_infinite<S: Scalar>(q: u64, eps: S) -> ApproxValue<S> {
    assert!(q >= 2, "q must be at least 2");
    let floor = S::epsilon() * S::from_u64(100).unwrap();
    assert!(eps > floor, "eps = {eps} is below the certifiable resolution {floor}");
    let qs = S::from_u64(q).expect("q fits the scalar");
    let qinv_step = ApproxValue::exact(S::one()).div(ApproxValue::exact(qs));
    let half = S::from_f64(0.5).unwrap();
    let mut partial = ApproxValue::<S>::one();
    let mut qinv = ApproxValue::<S>::one();
    for _ in 0..10_000 {
        qinv = qinv.mul(qinv_step);
        partial = partial.mul(ApproxValue::one().sub(qinv));
        // Upper bound for the tail sum q^{-N}/(q-1).
        let s = qinv.upper() / (qs - S::one()) * (S::one() + S::epsilon() + S::epsilon());
        let result = partial.mul(ApproxValue::new(S::one() - s * half, s * half));
        if result.err <= eps {
            debug_assert!(result.value <= partial.upper());
            debug_assert!(result.value >= partial.lower() * (S::one() - s));
            return result;
        }
    }
    unreachable!("tail bound failed to drop below eps = {eps}");
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn finite_values() {
        assert_eq!(poch_finite(2, 0), BigRational::one());
        assert_eq!(poch_finite(2, 2), ratio(3, 8));
        assert_eq!(poch_finite(3, 2), ratio(16, 27));
        assert_eq!(poch_finite(2, 1), ratio(1, 2));
        assert_eq!(poch_finite(4, 1), ratio(3, 4));
    }

    #[test]
    fn infinite_product_matches_exact_truncation() {
        // Independent oracle: the exact rational partial product to depth 60
        // brackets (q)_inf within sum_{i>60} q^{-i} < 2^-59.
        for q in [2u64, 3, 4, 5] {
            let exact = poch_finite(q, 60).to_f64().unwrap();
            let approx = poch_infinite::<f64>(q, 1e-12);
            assert!(
                (approx.value - exact).abs() <= approx.err + 1e-12,
                "q = {q}: {} vs {exact}",
                approx.value
            );
            assert!(approx.err <= 1e-12);
        }
    }

    #[test]
    fn reference_decimals() {
        assert!((poch_infinite::<f64>(2, 1e-9).value - 0.288788095).abs() < 1e-8);
        assert!((poch_infinite::<f64>(4, 1e-9).value - 0.688537538).abs() < 1e-8);
        assert!((poch_infinite::<f64>(3, 1e-9).value - 0.560126077).abs() < 1e-8);
    }

    #[test]
    fn works_in_single_precision() {
        let a = poch_infinite::<f32>(2, 1e-4);
        assert!((f64::from(a.value) - 0.288788).abs() < 1e-3);
        assert!(a.err <= 1e-4);
    }

    #[test]
    fn finite_approaches_infinite() {
        for q in [2u64, 3, 4, 5] {
            let inf = poch_infinite::<f64>(q, 1e-12);
            for r in [10u32, 15, 20, 40] {
                let fin = poch_finite(q, r).to_f64().unwrap();
                let gap = 2.0 * (q as f64).powi(-(r as i32));
                assert!(
                    (fin - inf.value).abs() <= 1e-12 + gap,
                    "q = {q}, r = {r}"
                );
            }
        }
    }

    #[test]
    #[should_panic(expected = "below the certifiable resolution")]
    fn rejects_unreachable_eps() {
        let _ = poch_infinite::<f32>(2, 1e-12);
    }
}
