//! Exact integer arithmetic: degree polynomials, ell-adic valuations and the
//! classification of an odd prime against q.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("{ell} does not divide the group order")]
    NotADivisor { ell: u64 },
    #[error("ell must be odd")]
    EvenPrime,
    #[error("{ell} is not prime")]
    NotPrime { ell: u64 },
    #[error("polynomial value is not an integer")]
    NonIntegralResult,
    #[error("polynomial value is not positive")]
    NonPositive,
    #[error("exponent a={a} out of range")]
    BadExponent { a: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    Sp6,
    Sp4,
}

impl Family {
    /// Rank n of Sp_{2n}.
    pub fn rank(self) -> u32 {
        match self {
            Family::Sp6 => 3,
            Family::Sp4 => 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Sp6 => write!(f, "sp6"),
            Family::Sp4 => write!(f, "sp4"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GroupSpec {
    pub family: Family,
    pub a: u32,
    pub q: u64,
}

impl GroupSpec {
    /// Indices up to q^3 + 1 must fit in a u64, so a is capped at 21.
    pub const MAX_A: u32 = 21;

    pub fn new(family: Family, a: u32) -> Result<Self, ArithError> {
        if a == 0 || a > Self::MAX_A {
            return Err(ArithError::BadExponent { a });
        }
        Ok(GroupSpec {
            family,
            a,
            q: 1u64 << a,
        })
    }

    pub fn from_q(family: Family, q: u64) -> Result<Self, ArithError> {
        if q < 2 || !q.is_power_of_two() {
            return Err(ArithError::BadExponent { a: 0 });
        }
        Self::new(family, q.trailing_zeros())
    }

    pub fn sp6(a: u32) -> Self {
        Self::new(Family::Sp6, a).expect("valid exponent")
    }

    pub fn sp4(a: u32) -> Self {
        Self::new(Family::Sp4, a).expect("valid exponent")
    }
}

/// Order of Sp_{2n}(q) from the closed formula.
pub fn sp_order(n: u32, q: u64) -> BigUint {
    let qb = BigUint::from(q);
    let mut r = qb.pow(n * n);
    for i in 1..=n {
        r *= qb.pow(2 * i) - 1u32;
    }
    r
}

pub fn group_order(g: &GroupSpec) -> BigUint {
    sp_order(g.family.rank(), g.q)
}

/// Splits n into (ell^v, cofactor) with ell not dividing the cofactor.
pub fn ell_part(n: u128, ell: u64) -> (u128, u128) {
    assert!(n >= 1 && ell >= 2);
    let l = ell as u128;
    let (mut p, mut c) = (1u128, n);
    while c % l == 0 {
        c /= l;
        p *= l;
    }
    (p, c)
}

pub fn ell_part_big(n: &BigUint, ell: u64) -> (BigUint, BigUint) {
    assert!(!n.is_zero());
    let l = BigUint::from(ell);
    let (mut p, mut c) = (BigUint::one(), n.clone());
    loop {
        let (quo, rem) = c.div_rem(&l);
        if !rem.is_zero() {
            break;
        }
        c = quo;
        p *= &l;
    }
    (p, c)
}

/// Exponent of ell in n (n > 0).
pub fn valuation(n: u128, ell: u64) -> u32 {
    let (p, _) = ell_part(n, ell);
    let mut v = 0;
    let mut x = p;
    while x > 1 {
        x /= ell as u128;
        v += 1;
    }
    v
}

pub fn valuation_big(n: &BigUint, ell: u64) -> u32 {
    let l = BigUint::from(ell);
    let mut c = n.clone();
    let mut v = 0;
    loop {
        let (quo, rem) = c.div_rem(&l);
        if !rem.is_zero() {
            return v;
        }
        c = quo;
        v += 1;
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}

/// Odd prime divisors of n by trial division, ascending.
pub fn odd_prime_divisors(n: &BigUint) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = n.clone();
    while c.is_even() && !c.is_zero() {
        c >>= 1;
    }
    let mut p = 3u64;
    while BigUint::from(p) * BigUint::from(p) <= c {
        let pb = BigUint::from(p);
        if (&c % &pb).is_zero() {
            out.push(p);
            while (&c % &pb).is_zero() {
                c /= &pb;
            }
        }
        p += 2;
    }
    if c > BigUint::one() {
        out.push(c.to_u64().expect("prime factor fits in u64"));
    }
    out
}

/// A polynomial in q with integer numerator coefficients and denominator 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DegreePolynomial {
    /// Coefficient of q^k at position k.
    pub coeffs: Vec<i64>,
    pub den: u32,
}

impl DegreePolynomial {
    pub fn new(coeffs: Vec<i64>, den: u32) -> Self {
        DegreePolynomial { coeffs, den }
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = 1;
        DegreePolynomial { coeffs, den: 1 }
    }

    /// Signed evaluation; the division by den must be exact.
    pub fn eval_signed(&self, q: u64) -> Result<BigInt, ArithError> {
        let qb = BigInt::from(q);
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * &qb + BigInt::from(*c);
        }
        let (quo, rem) = acc.div_rem(&BigInt::from(self.den));
        if !rem.is_zero() {
            return Err(ArithError::NonIntegralResult);
        }
        Ok(quo)
    }

    /// Evaluation at q as a positive integer.
    pub fn eval(&self, q: u64) -> Result<BigUint, ArithError> {
        let v = self.eval_signed(q)?;
        if !v.is_positive() {
            return Err(ArithError::NonPositive);
        }
        Ok(v.to_biguint().expect("positive"))
    }
}

pub fn eval_degree(p: &DegreePolynomial, q: u64) -> Result<BigUint, ArithError> {
    p.eval(q)
}

/// Which cyclotomic-type factor of the group order an odd prime divides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DivisorClass {
    QMinus1,
    QPlus1,
    Q2Plus1,
    Q2PlusQPlus1,
    Q2MinusQPlus1,
    /// ell = 3, which divides q - eps and q^2 + eps q + 1 together.
    ThreeSpecial,
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DivisorClass::QMinus1 => "q-1",
            DivisorClass::QPlus1 => "q+1",
            DivisorClass::Q2Plus1 => "q2+1",
            DivisorClass::Q2PlusQPlus1 => "q2+q+1",
            DivisorClass::Q2MinusQPlus1 => "q2-q+1",
            DivisorClass::ThreeSpecial => "three",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PrimeRegime {
    pub group: GroupSpec,
    pub ell: u64,
    pub class: DivisorClass,
    /// +1 or -1 with ell | q^3 - eps; None when ell | q^2 + 1.
    pub epsilon: Option<i8>,
    pub d: u32,
    /// ell^d.
    pub ell_d: u64,
    pub m: u64,
    /// ell'-part of q^2 + eps q + 1 when eps is defined, else 1.
    pub n: u64,
}

impl PrimeRegime {
    pub fn eps(&self) -> i8 {
        self.epsilon.expect("regime has a sign")
    }

    pub fn q(&self) -> u64 {
        self.group.q
    }

    /// True when ell | q^2 - 1.
    pub fn divides_q2_minus_1(&self) -> bool {
        matches!(
            self.class,
            DivisorClass::QMinus1 | DivisorClass::QPlus1 | DivisorClass::ThreeSpecial
        )
    }

    /// q - eps as an integer.
    pub fn q_minus_eps(&self) -> u64 {
        if self.eps() == 1 {
            self.q() - 1
        } else {
            self.q() + 1
        }
    }

    pub fn q_plus_eps(&self) -> u64 {
        if self.eps() == 1 {
            self.q() + 1
        } else {
            self.q() - 1
        }
    }

    /// Short tag used by data files: q-1, q+1, q2+1, q2+q+1, q2-q+1.
    pub fn rule_tag(&self) -> &'static str {
        match self.class {
            DivisorClass::QMinus1 => "q-1",
            DivisorClass::QPlus1 => "q+1",
            DivisorClass::Q2Plus1 => "q2+1",
            DivisorClass::Q2PlusQPlus1 => "q2+q+1",
            DivisorClass::Q2MinusQPlus1 => "q2-q+1",
            DivisorClass::ThreeSpecial => {
                if self.eps() == 1 {
                    "q-1"
                } else {
                    "q+1"
                }
            }
        }
    }
}

fn div(n: u128, ell: u64) -> bool {
    n.is_multiple_of(ell as u128)
}

pub fn classify_regime(g: &GroupSpec, ell: u64) -> Result<PrimeRegime, ArithError> {
    if ell == 2 {
        return Err(ArithError::EvenPrime);
    }
    if !is_prime(ell) {
        return Err(ArithError::NotPrime { ell });
    }
    let q = g.q as u128;
    let qm1 = q - 1;
    let qp1 = q + 1;
    let q2p1 = q * q + 1;
    let phi3 = q * q + q + 1;
    let phi6 = q * q - q + 1;
    let sp6 = g.family == Family::Sp6;
    let lpart = |x: u128| ell_part(x, ell);
    let build = |class, eps: Option<i8>, d: u32, m: u128, n: u128| {
        let ell_d = (ell as u128).pow(d);
        Ok(PrimeRegime {
            group: *g,
            ell,
            class,
            epsilon: eps,
            d,
            ell_d: ell_d as u64,
            m: m as u64,
            n: n as u64,
        })
    };
    if ell == 3 {
        // q is a power of 2, so 3 | q^2 - 1 always.
        let eps: i8 = if div(qm1, 3) { 1 } else { -1 };
        let qme = if eps == 1 { qm1 } else { qp1 };
        let phi = if eps == 1 { phi3 } else { phi6 };
        let (p, m) = lpart(qme);
        let d = valuation(p, 3);
        let class = if sp6 {
            DivisorClass::ThreeSpecial
        } else if eps == 1 {
            DivisorClass::QMinus1
        } else {
            DivisorClass::QPlus1
        };
        return build(class, Some(eps), d, m, lpart(phi).1);
    }
    let (class, eps, base) = if div(qm1, ell) {
        (DivisorClass::QMinus1, Some(1), qm1)
    } else if div(qp1, ell) {
        (DivisorClass::QPlus1, Some(-1), qp1)
    } else if div(q2p1, ell) {
        (DivisorClass::Q2Plus1, None, q2p1)
    } else if sp6 && div(phi3, ell) {
        (DivisorClass::Q2PlusQPlus1, Some(1), phi3)
    } else if sp6 && div(phi6, ell) {
        (DivisorClass::Q2MinusQPlus1, Some(-1), phi6)
    } else {
        return Err(ArithError::NotADivisor { ell });
    };
    let (p, _) = lpart(base);
    let d = valuation(p, ell);
    let (m, n) = match eps {
        None => (lpart(q2p1).1, 1),
        Some(1) => (lpart(qm1).1, lpart(phi3).1),
        Some(_) => (lpart(qp1).1, lpart(phi6).1),
    };
    build(class, eps, d, m, n)
}

/// Odd primes dividing |G|.
pub fn odd_primes_of(g: &GroupSpec) -> Vec<u64> {
    odd_prime_divisors(&group_order(g))
}

pub fn big_to_u128(n: &BigUint) -> Option<u128> {
    n.to_u128()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn regime_examples() {
        let r = classify_regime(&GroupSpec::sp6(1), 7).unwrap();
        assert_eq!(
            (r.class, r.epsilon, r.d, r.m),
            (DivisorClass::Q2PlusQPlus1, Some(1), 1, 1)
        );
        let r = classify_regime(&GroupSpec::sp6(2), 5).unwrap();
        assert_eq!((r.class, r.epsilon, r.d, r.m), (DivisorClass::QPlus1, Some(-1), 1, 1));
        let r = classify_regime(&GroupSpec::sp6(3), 3).unwrap();
        assert_eq!(
            (r.class, r.epsilon, r.d, r.m),
            (DivisorClass::ThreeSpecial, Some(-1), 2, 1)
        );
        // (q^3 + 1)_3 = 27 = 3^(d+1)
        assert_eq!(ell_part(8u128.pow(3) + 1, 3).0, 27);
        let r = classify_regime(&GroupSpec::sp6(2), 13).unwrap();
        assert_eq!(
            (r.class, r.epsilon, r.d, r.m),
            (DivisorClass::Q2MinusQPlus1, Some(-1), 1, 5)
        );
    }

    #[test]
    fn regime_errors() {
        assert_eq!(classify_regime(&GroupSpec::sp6(1), 2), Err(ArithError::EvenPrime));
        assert_eq!(
            classify_regime(&GroupSpec::sp6(1), 11),
            Err(ArithError::NotADivisor { ell: 11 })
        );
        // 7 divides |Sp6(2)| but not |Sp4(2)|.
        assert!(classify_regime(&GroupSpec::sp4(1), 7).is_err());
    }

    #[test]
    fn ell_part_examples() {
        assert_eq!(ell_part(63, 3), (9, 7));
        assert_eq!(ell_part(512, 7), (1, 512));
        assert_eq!(ell_part(405, 5), (5, 81));
    }

    #[test]
    fn group_orders() {
        assert_eq!(group_order(&GroupSpec::sp6(1)), BigUint::from(512u32 * 3 * 15 * 63));
        assert_eq!(group_order(&GroupSpec::sp4(1)), BigUint::from(720u32));
        let expect = BigUint::from(4u64.pow(9)) * 15u32 * 255u32 * 4095u32;
        assert_eq!(group_order(&GroupSpec::sp6(2)), expect);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(DegreePolynomial::monomial(9).eval(2).unwrap(), BigUint::from(512u32));
        let chi63 = DegreePolynomial::new(vec![1, 0, -1, 1, -1, -1, 1, -1, 0, 1], 1);
        // 512 - 128 + 64 - 32 - 16 + 8 - 4 + 1 computed by hand
        assert_eq!(chi63.eval(2).unwrap(), BigUint::from(405u32));
        let bad = DegreePolynomial::new(vec![1, 1], 2);
        assert_eq!(bad.eval(2), Err(ArithError::NonIntegralResult));
    }

    #[test]
    fn three_pairs_with_phi() {
        for a in 1..=12 {
            let g = GroupSpec::sp6(a);
            let r = classify_regime(&g, 3).unwrap();
            let q = g.q as u128;
            let phi = if r.eps() == 1 { q * q + q + 1 } else { q * q - q + 1 };
            assert_eq!(phi % 3, 0);
            let qe = if r.eps() == 1 { q * q * q - 1 } else { q * q * q + 1 };
            assert_eq!(ell_part(qe, 3).0, 3u128.pow(r.d + 1));
        }
    }

    #[test]
    fn unique_class_for_other_primes() {
        for a in 1..=8 {
            let g = GroupSpec::sp6(a);
            let q = g.q as u128;
            let factors = [q - 1, q + 1, q * q + 1, q * q + q + 1, q * q - q + 1];
            for ell in odd_primes_of(&g) {
                if ell == 3 {
                    continue;
                }
                let hits = factors.iter().filter(|f| *f % ell as u128 == 0).count();
                assert_eq!(hits, 1, "q={} ell={}", q, ell);
                let r = classify_regime(&g, ell).unwrap();
                let (p, _) = ell_part(q.pow(6) - 1, ell);
                if r.class != DivisorClass::Q2Plus1 {
                    assert_eq!(p, r.ell_d as u128);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn ell_part_reconstructs(n in 1u128..1_000_000_000_000, idx in 0usize..6) {
            let ell = [3u64, 5, 7, 11, 13, 17][idx];
            let (p, c) = ell_part(n, ell);
            prop_assert_eq!(p * c, n);
            prop_assert!(c % ell as u128 != 0);
            let (pb, cb) = ell_part_big(&BigUint::from(n), ell);
            prop_assert_eq!(pb, BigUint::from(p));
            prop_assert_eq!(cb, BigUint::from(c));
        }
    }
}
