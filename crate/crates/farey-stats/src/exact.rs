//! Exact comparisons between rationals and floating-point thresholds.
//!
//! Membership of a rational point in a box with `f64` bounds must be
//! deterministic and independent of the enumeration route that produced the
//! candidate, so every boundary comparison in the crate funnels through
//! [`cmp_ratio_f64`]. The fast path certifies the sign of `p - t*q` with an
//! FMA error-free transformation; near-ties fall back to exact big-integer
//! arithmetic on the binary expansion of the threshold.

use num_bigint::BigInt;
use std::cmp::Ordering;

/// Compares two fractions `a/b` and `c/d` exactly. Requires `b, d > 0`.
#[inline]
pub fn cmp_fracs(a: i64, b: i64, c: i64, d: i64) -> Ordering {
    debug_assert!(b > 0 && d > 0);
    (a as i128 * d as i128).cmp(&(c as i128 * b as i128))
}

/// Compares `num/den` against the finite or infinite threshold `t` exactly.
/// Requires `den > 0` and `t` not NaN.
pub fn cmp_ratio_f64(num: i64, den: i64, t: f64) -> Ordering {
    debug_assert!(den > 0);
    debug_assert!(!t.is_nan());
    if t == f64::INFINITY {
        return Ordering::Less;
    }
    if t == f64::NEG_INFINITY {
        return Ordering::Greater;
    }

    // Certified fast path: s + e = t*den exactly (TwoProductFMA), so
    // num/den - t has the sign of (num - s) - e unless the result is within
    // rounding noise of zero.
    let denf = den as f64;
    let numf = num as f64;
    let s = t * denf;
    let e = t.mul_add(denf, -s);
    let d = (numf - s) - e;
    let margin = (numf.abs().max(s.abs()) + e.abs()) * 1e-13;
    if num.abs() < (1 << 53) && d.abs() > margin {
        return if d > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        };
    }
    cmp_ratio_f64_exact(num, den, t)
}

/// Decomposes a finite float into `(m, e)` with `t = m * 2^e` exactly.
fn decompose(t: f64) -> (i64, i32) {
    if t == 0.0 {
        return (0, 0);
    }
    let bits = t.abs().to_bits();
    let raw_exp = (bits >> 52) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (m, e) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), raw_exp - 1075)
    };
    (if t < 0.0 { -m } else { m }, e)
}

fn cmp_ratio_f64_exact(num: i64, den: i64, t: f64) -> Ordering {
    let (m, e) = decompose(t);
    // num/den vs m*2^e  <=>  num * 2^{-e} vs den*m (e<0), num vs den*m*2^e (e>=0)
    let lhs;
    let rhs;
    if e >= 0 {
        lhs = BigInt::from(num);
        rhs = BigInt::from(den) * BigInt::from(m) << e as u32;
    } else {
        lhs = BigInt::from(num) << (-e) as u32;
        rhs = BigInt::from(den) * BigInt::from(m);
    }
    lhs.cmp(&rhs)
}

/// `num/den < t` (exact).
#[inline]
pub fn ratio_lt(num: i64, den: i64, t: f64) -> bool {
    cmp_ratio_f64(num, den, t) == Ordering::Less
}

/// `num/den <= t` (exact).
#[inline]
pub fn ratio_le(num: i64, den: i64, t: f64) -> bool {
    cmp_ratio_f64(num, den, t) != Ordering::Greater
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn oracle(num: i64, den: i64, t: f64) -> Ordering {
        let lhs = BigRational::new(BigInt::from(num), BigInt::from(den));
        let rhs = BigRational::from_float(t).expect("finite");
        lhs.cmp(&rhs)
    }

    #[test]
    fn simple_cases() {
        assert_eq!(cmp_ratio_f64(1, 2, 0.5), Ordering::Equal);
        assert_eq!(cmp_ratio_f64(1, 3, 0.5), Ordering::Less);
        assert_eq!(cmp_ratio_f64(2, 3, 0.5), Ordering::Greater);
        assert_eq!(cmp_ratio_f64(-1, 2, 0.25), Ordering::Less);
        assert_eq!(cmp_ratio_f64(0, 7, 0.0), Ordering::Equal);
        assert_eq!(cmp_ratio_f64(5, 1, f64::INFINITY), Ordering::Less);
        assert_eq!(cmp_ratio_f64(5, 1, f64::NEG_INFINITY), Ordering::Greater);
    }

    #[test]
    fn one_third_is_not_its_float() {
        // 1/3 is strictly greater than the nearest f64 below it.
        let t = 1.0f64 / 3.0;
        assert_eq!(cmp_ratio_f64(1, 3, t), oracle(1, 3, t));
        // and the comparison flips across consecutive floats
        let up = f64::from_bits(t.to_bits() + 1);
        assert_ne!(cmp_ratio_f64(1, 3, t), cmp_ratio_f64(1, 3, up));
    }

    #[test]
    fn subnormal_and_extreme_thresholds() {
        let tiny = f64::from_bits(1); // smallest subnormal
        assert_eq!(cmp_ratio_f64(1, i64::MAX, tiny), Ordering::Greater);
        assert_eq!(cmp_ratio_f64(0, 5, tiny), Ordering::Less);
        assert_eq!(cmp_ratio_f64(-1, 5, -tiny), Ordering::Less);
        assert_eq!(cmp_ratio_f64(1, 1, 1e300), Ordering::Less);
        assert_eq!(cmp_ratio_f64(1, 1, -1e300), Ordering::Greater);
    }

    #[test]
    fn frac_comparison() {
        assert_eq!(cmp_fracs(1, 3, 2, 6), Ordering::Equal);
        assert_eq!(cmp_fracs(1, 3, 1, 2), Ordering::Less);
        assert_eq!(cmp_fracs(-1, 3, -1, 2), Ordering::Greater);
    }

    proptest! {
        #[test]
        fn matches_bigrational_oracle(num in -2_000_000_000i64..2_000_000_000,
                                      den in 1i64..2_000_000_000,
                                      t in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(cmp_ratio_f64(num, den, t), oracle(num, den, t));
        }

        #[test]
        fn matches_oracle_near_ties(p in 0i64..100_000, q in 1i64..100_000) {
            // thresholds exactly at, just below and just above p/q
            let t = p as f64 / q as f64;
            for t in [t, f64::from_bits(t.to_bits().wrapping_sub(1)), f64::from_bits(t.to_bits() + 1)] {
                prop_assert_eq!(cmp_ratio_f64(p, q, t), oracle(p, q, t));
            }
        }

        #[test]
        fn frac_cmp_total_order(a in -1_000_000i64..1_000_000, b in 1i64..1_000_000,
                                c in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
            let ord = cmp_fracs(a, b, c, d);
            prop_assert_eq!(ord.reverse(), cmp_fracs(c, d, a, b));
        }
    }
}
