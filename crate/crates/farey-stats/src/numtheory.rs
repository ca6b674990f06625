//! Exact integer arithmetic: totients, Möbius, Jordan totients, modular
//! inverses, Kloosterman sums and the zeta-ratio identities they feed.

use crate::error::{Error, Result};
use crate::report::VerificationReport;
use std::f64::consts::PI;
use std::time::Instant;

/// Sieved multiplicative-function tables up to a fixed limit.
///
/// `totient[q]`, `mobius[q]` and `jordan[q]` are valid for `1 <= q <= limit`;
/// index 0 is a filler. `jordan` holds the Jordan totient `J_n` for the
/// dimension the table was built with (`J_1` equals Euler's totient).
#[derive(Debug, Clone)]
pub struct ArithmeticTable {
    pub limit: usize,
    pub dim: u32,
    pub totient: Vec<u64>,
    pub mobius: Vec<i8>,
    pub jordan: Vec<u64>,
}

impl ArithmeticTable {
    /// Builds totient/Möbius tables by a linear sieve and `J_n` by a
    /// divisor-sum sieve with overflow checks.
    pub fn build(limit: usize, dim: u32) -> Result<Self> {
        if limit < 1 {
            return Err(Error::InvalidArgument("table limit must be >= 1".into()));
        }
        let mut totient = vec![0u64; limit + 1];
        let mut mobius = vec![0i8; limit + 1];
        let mut primes: Vec<usize> = Vec::new();
        totient[1] = 1;
        mobius[1] = 1;
        for i in 2..=limit {
            if totient[i] == 0 {
                primes.push(i);
                totient[i] = (i - 1) as u64;
                mobius[i] = -1;
            }
            for &p in &primes {
                let ip = match i.checked_mul(p) {
                    Some(ip) if ip <= limit => ip,
                    _ => break,
                };
                if i % p == 0 {
                    totient[ip] = totient[i] * p as u64;
                    mobius[ip] = 0;
                    break;
                }
                totient[ip] = totient[i] * (p - 1) as u64;
                mobius[ip] = -mobius[i];
            }
        }
        // Pre-mark composites found above: linear sieve leaves totient[i] == 0
        // only before i is visited, so by now all entries are filled.
        let jordan = jordan_sieve(limit, dim, &mobius)?;
        Ok(ArithmeticTable {
            limit,
            dim,
            totient,
            mobius,
            jordan,
        })
    }

    /// `sum over q <= bound of J_n(q)`: the exact Farey cardinality.
    pub fn jordan_summatory(&self, bound: usize) -> Result<u64> {
        if bound > self.limit {
            return Err(Error::InvalidArgument(format!(
                "bound {bound} exceeds table limit {}",
                self.limit
            )));
        }
        let mut acc: u64 = 0;
        for q in 1..=bound {
            acc = acc
                .checked_add(self.jordan[q])
                .ok_or_else(|| Error::Overflow("jordan_summatory".into()))?;
        }
        Ok(acc)
    }
}

/// `J_n(q) = sum over d|q of mu(d) (q/d)^n`, sieved over multiples of d.
fn jordan_sieve(limit: usize, dim: u32, mobius: &[i8]) -> Result<Vec<u64>> {
    let mut acc = vec![0i64; limit + 1];
    for d in 1..=limit {
        let mu = mobius[d] as i64;
        if mu == 0 {
            continue;
        }
        let mut m = d;
        let mut k = 1i64;
        while m <= limit {
            let pw = k
                .checked_pow(dim)
                .ok_or_else(|| Error::Overflow("jordan power".into()))?;
            acc[m] = acc[m]
                .checked_add(mu * pw)
                .ok_or_else(|| Error::Overflow("jordan sum".into()))?;
            m += d;
            k += 1;
        }
    }
    Ok(acc
        .into_iter()
        .map(|v| {
            debug_assert!(v >= 0);
            v as u64
        })
        .collect())
}

/// gcd of all components, sign-insensitive. Errors on the zero vector.
pub fn vector_gcd(v: &[i64]) -> Result<u64> {
    let mut g: u64 = 0;
    for &x in v {
        g = num_integer::gcd(g, x.unsigned_abs());
    }
    if g == 0 {
        Err(Error::UndefinedGcd)
    } else {
        Ok(g)
    }
}

/// Inverse of `p` mod `q`, in `[1, q)`. Requires `q >= 2` and `gcd(p,q) = 1`.
pub fn mod_inverse(p: i64, q: i64) -> Result<i64> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("modulus {q} must be >= 2")));
    }
    let a = p.rem_euclid(q);
    // extended Euclid on (a, q)
    let (mut r0, mut r1) = (a, q);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
    }
    if r0 != 1 {
        return Err(Error::NotInvertible { p, q });
    }
    Ok(s0.rem_euclid(q))
}

/// Kloosterman sum `K(m1, m2, q) = sum over p in Z_q^* of e^{2 pi i (m1 p + m2 pbar)/q}`.
///
/// The sum is real (`p <-> -p` pairs conjugate terms); the imaginary part is
/// asserted below `1e-9 * phi(q)` and dropped. `K(m1, m2, 1) = 1` by the
/// empty-product convention, consistent with `phi(1) = 1`.
pub fn kloosterman(m1: i64, m2: i64, q: i64) -> f64 {
    assert!(q >= 1, "modulus must be positive");
    if q == 1 {
        return 1.0;
    }
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    let mut phi = 0u64;
    for p in 1..q {
        if num_integer::gcd(p, q) != 1 {
            continue;
        }
        phi += 1;
        let pbar = mod_inverse(p, q).expect("coprime residue is invertible");
        // reduce the exponent numerator mod q to keep the angle well conditioned
        let num = (m1.rem_euclid(q) * p + m2.rem_euclid(q) * pbar).rem_euclid(q);
        let angle = 2.0 * PI * (num as f64) / (q as f64);
        re += angle.cos();
        im += angle.sin();
    }
    assert!(
        im.abs() < 1e-9 * (phi.max(1) as f64),
        "Kloosterman imaginary part {im} did not cancel for q={q}"
    );
    re
}

/// A truncated sum with a rigorous bound on the discarded tail.
#[derive(Debug, Clone, Copy)]
pub struct PartialSum {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: u64,
}

/// Partial Kloosterman zeta `sum_{q<=qmax} K(m1,m2,q)/q^{2s}` with the crude
/// tail bound from `|K(m1,m2,q)| <= phi(q) < q`. Requires `s > 1`.
pub fn kloosterman_zeta_partial(m1: i64, m2: i64, s: f64, qmax: i64) -> Result<PartialSum> {
    if s <= 1.0 {
        return Err(Error::OutsideDomain(format!(
            "kloosterman zeta truncation needs s > 1, got {s}"
        )));
    }
    if qmax < 1 {
        return Err(Error::InvalidArgument("qmax must be >= 1".into()));
    }
    let mut sum = KahanSum::new();
    for q in 1..=qmax {
        sum.add(kloosterman(m1, m2, q) / (q as f64).powf(2.0 * s));
    }
    Ok(PartialSum {
        value: sum.value(),
        tail_bound: zeta_tail_bound(qmax, 2.0 * s - 1.0),
        terms: qmax as u64,
    })
}

/// `sum_{q > qmax} q^{-e} <= qmax^{1-e}/(e-1)` for a decreasing integrand.
fn zeta_tail_bound(qmax: i64, e: f64) -> f64 {
    (qmax as f64).powf(1.0 - e) / (e - 1.0)
}

// Bernoulli numbers B_2, B_4, ..., B_24.
const BERNOULLI: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Riemann zeta for real `s > 1` by Euler-Maclaurin with remainder control;
/// accurate to better than 12 significant digits on the implemented domain.
pub fn zeta_real(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::OutsideDomain(format!(
            "zeta implemented for s > 1, got {s}"
        )));
    }
    let n = 24u32;
    let nf = n as f64;
    let mut acc = KahanSum::new();
    for k in 1..n {
        acc.add((k as f64).powf(-s));
    }
    acc.add(nf.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * nf.powf(-s));
    // correction terms B_{2j}/(2j)! * s(s+1)...(s+2j-2) * n^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0f64; // (2j)!
    let mut converged = false;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let term = b / fact * rising * nf.powf(-s - 2.0 * (j as f64 + 1.0) + 1.0);
        acc.add(term);
        if term.abs() < 1e-16 * acc.value().abs() {
            converged = true;
            break;
        }
        let two_j = 2.0 * (j as f64 + 1.0);
        rising *= (s + two_j - 1.0) * (s + two_j);
        fact *= (two_j + 1.0) * (two_j + 2.0);
    }
    debug_assert!(converged, "Euler-Maclaurin failed to converge for s={s}");
    Ok(acc.value())
}

/// Checks the truncation of `sum phi(q)/q^{2s} = zeta(2s-1)/zeta(2s)` against
/// the ratio of direct zeta evaluations; the tail bound is the tolerance.
pub fn totient_zeta_identity_check(s: f64, qmax: usize) -> Result<VerificationReport> {
    if !(s > 1.0) {
        return Err(Error::OutsideDomain(format!(
            "identity requires s > 1, got {s}"
        )));
    }
    let start = Instant::now();
    let table = ArithmeticTable::build(qmax, 1)?;
    let mut partial = KahanSum::new();
    for q in 1..=qmax {
        partial.add(table.totient[q] as f64 / (q as f64).powf(2.0 * s));
    }
    let reference = zeta_real(2.0 * s - 1.0)? / zeta_real(2.0 * s)?;
    let tail = zeta_tail_bound(qmax as i64, 2.0 * s - 1.0);
    Ok(
        VerificationReport::scalar("totient-zeta-identity", partial.value(), reference, tail)
            .with_detail(format!("s={s} qmax={qmax} tail<={tail:.3e}"))
            .with_runtime(start),
    )
}

/// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn vector_gcd_examples() {
        assert_eq!(vector_gcd(&[0, 0, 1]).unwrap(), 1);
        assert_eq!(vector_gcd(&[4, 6]).unwrap(), 2);
        assert_eq!(vector_gcd(&[-3, 9, 6]).unwrap(), 3);
        assert!(matches!(vector_gcd(&[0, 0]), Err(Error::UndefinedGcd)));
    }

    #[test]
    fn table_small_values() {
        let t = ArithmeticTable::build(12, 2).unwrap();
        assert_eq!(t.totient[1], 1);
        assert_eq!(t.totient[12], 4);
        assert_eq!(t.mobius[1], 1);
        assert_eq!(t.mobius[12], 0);
        assert_eq!(t.mobius[30], 0); // out of range guard would panic; 30 > 12
    }

    #[test]
    fn jordan_examples() {
        let t = ArithmeticTable::build(6, 2).unwrap();
        assert_eq!(t.jordan[6], 24); // 36 - 9 - 4 + 1
        let t1 = ArithmeticTable::build(100, 1).unwrap();
        // J_1 = phi
        assert_eq!(t1.jordan, t1.totient);
    }

    #[test]
    fn totient_divisor_sum_is_identity() {
        let limit = 10_000;
        let t = ArithmeticTable::build(limit, 1).unwrap();
        let mut acc = vec![0u64; limit + 1];
        for d in 1..=limit {
            let mut m = d;
            while m <= limit {
                acc[m] += t.totient[d];
                m += d;
            }
        }
        for q in 1..=limit {
            assert_eq!(acc[q], q as u64, "sum of phi(d) over d|{q}");
        }
    }

    #[test]
    fn jordan_matches_brute_force() {
        for dim in 1..=3u32 {
            let t = ArithmeticTable::build(1000, dim).unwrap();
            for q in 1..=1000usize {
                if q > 60 && q % 97 != 0 && dim == 3 {
                    continue; // keep the n=3 brute force affordable
                }
                let bf = brute_force_jordan(dim, q as i64);
                assert_eq!(t.jordan[q], bf, "J_{dim}({q})");
            }
        }
    }

    fn brute_force_jordan(dim: u32, q: i64) -> u64 {
        let mut count = 0u64;
        let mut p = vec![0i64; dim as usize];
        loop {
            let mut g = q.unsigned_abs();
            for &x in &p {
                g = num_integer::gcd(g, x.unsigned_abs());
            }
            if g == 1 {
                count += 1;
            }
            let mut i = 0;
            loop {
                if i == dim as usize {
                    return count;
                }
                p[i] += 1;
                if p[i] < q {
                    break;
                }
                p[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(1, 7).unwrap(), 1);
        assert_eq!(mod_inverse(1, 1000).unwrap(), 1);
        assert_eq!(mod_inverse(3, 7).unwrap(), 5);
        assert!(matches!(
            mod_inverse(2, 4),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn mod_inverse_involution() {
        for q in 2..=500i64 {
            for p in 1..q {
                if num_integer::gcd(p, q) != 1 {
                    continue;
                }
                let inv = mod_inverse(p, q).unwrap();
                assert_eq!((p * inv).rem_euclid(q), 1);
                assert_eq!(mod_inverse(inv, q).unwrap(), p);
            }
        }
    }

    #[test]
    fn kloosterman_examples() {
        assert!((kloosterman(0, 0, 12) - 4.0).abs() < 1e-12);
        assert!((kloosterman(1, 1, 2) - 1.0).abs() < 1e-12);
        assert!((kloosterman(1, 1, 3) + 1.0).abs() < 1e-12);
        assert_eq!(kloosterman(5, -3, 1), 1.0);
    }

    #[test]
    fn kloosterman_symmetry_and_weil() {
        for q in 1..=60i64 {
            for (m1, m2) in [(1, 1), (2, 3), (0, 5), (-1, 4)] {
                let a = kloosterman(m1, m2, q);
                let b = kloosterman(m2, m1, q);
                assert!((a - b).abs() < 1e-9, "symmetry at q={q}");
            }
        }
        let t = ArithmeticTable::build(200, 1).unwrap();
        for p in 2..=200i64 {
            if t.totient[p as usize] != (p - 1) as u64 {
                continue; // not prime
            }
            let k = kloosterman(1, 1, p);
            assert!(k.abs() <= 2.0 * (p as f64).sqrt() + 1e-9, "Weil bound at {p}");
        }
    }

    #[test]
    fn kloosterman_zeta_partial_cases() {
        // q=1 only: empty-product convention gives exactly 1
        let z = kloosterman_zeta_partial(1, 1, 1.5, 1).unwrap();
        assert_eq!(z.value, 1.0);
        // Z_{0,0} partial equals the phi partial sum
        let t = ArithmeticTable::build(200, 1).unwrap();
        let z = kloosterman_zeta_partial(0, 0, 1.5, 200).unwrap();
        let mut phi_sum = 0.0;
        for q in 1..=200usize {
            phi_sum += t.totient[q] as f64 / (q as f64).powf(3.0);
        }
        assert!((z.value - phi_sum).abs() < 1e-12);
        // partial sums form a Cauchy sequence within the tail bound
        let mut prev = kloosterman_zeta_partial(1, 2, 1.5, 50).unwrap();
        for qmax in [100, 200, 400, 800] {
            let next = kloosterman_zeta_partial(1, 2, 1.5, qmax).unwrap();
            assert!(
                (next.value - prev.value).abs() <= prev.tail_bound,
                "jump exceeded tail bound at qmax={qmax}"
            );
            prev = next;
        }
    }

    #[test]
    fn zeta_special_values() {
        assert!((zeta_real(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-13);
        assert!((zeta_real(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-13);
        assert!((zeta_real(3.0).unwrap() - 1.2020569031595943).abs() < 1e-12);
        assert!(zeta_real(1.0).is_err());
        assert!(zeta_real(0.5).is_err());
    }

    #[test]
    fn zeta_matches_direct_summation() {
        // independent oracle: direct sum + integral tail bracket
        for &s in &[1.5, 2.0, 2.5, 3.0, 6.0, 12.0] {
            let n = 400_000u64;
            let mut direct = KahanSum::new();
            for k in 1..=n {
                direct.add((k as f64).powf(-s));
            }
            let tail_hi = (n as f64).powf(1.0 - s) / (s - 1.0);
            let z = zeta_real(s).unwrap();
            assert!(z > direct.value() && z < direct.value() + tail_hi + 1e-12,
                "zeta({s}) = {z} outside bracket [{}, {}]", direct.value(), direct.value() + tail_hi);
        }
    }

    #[test]
    fn totient_identity_report() {
        let r = totient_zeta_identity_check(2.0, 10_000).unwrap();
        assert!(r.pass, "{r}");
        assert!(r.deviation <= 1e-6);
        let r1 = totient_zeta_identity_check(1.5, 1).unwrap();
        assert_eq!(r1.computed[0], 1.0); // phi(1) = 1 only
    }

    proptest! {
        #[test]
        fn gcd_divides_all(v in proptest::collection::vec(-1000i64..1000, 1..5)) {
            prop_assume!(v.iter().any(|&x| x != 0));
            let g = vector_gcd(&v).unwrap() as i64;
            for &x in &v {
                prop_assert_eq!(x % g, 0);
            }
        }
    }
}
