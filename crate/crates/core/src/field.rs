//! Exact scalars: the rationals and prime fields `F_p`, behind a single
//! element type that carries its field with it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Largest supported prime modulus is below this bound.
pub const MODULUS_LIMIT: u64 = 1 << 61;

/// Below this modulus, roots are found by scanning every residue.
const EXHAUSTIVE_ROOT_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("mixed fields: {0} and {1}")]
    MixedField(FieldSpec, FieldSpec),
    #[error("division by zero")]
    DivisionByZero,
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds 2^61")]
    ModulusTooLarge(u64),
    #[error("bad field designator {0:?}, expected \"q\" or \"fp:<prime>\"")]
    BadDesignator(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Rationals,
    PrimeField,
}

/// Which field the scalars live in. Prime moduli are checked on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    kind: FieldKind,
    modulus: u64,
}

impl FieldSpec {
    pub const RATIONALS: FieldSpec = FieldSpec {
        kind: FieldKind::Rationals,
        modulus: 0,
    };

    pub fn rationals() -> Self {
        Self::RATIONALS
    }

    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if p >= MODULUS_LIMIT {
            return Err(FieldError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(FieldSpec {
            kind: FieldKind::PrimeField,
            modulus: p,
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// The prime modulus, or `None` over the rationals.
    pub fn modulus(&self) -> Option<u64> {
        match self.kind {
            FieldKind::Rationals => None,
            FieldKind::PrimeField => Some(self.modulus),
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.modulus
    }

    pub fn check_same(&self, other: &FieldSpec) -> Result<(), FieldError> {
        if self == other {
            Ok(())
        } else {
            Err(FieldError::MixedField(*self, *other))
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::Rationals => write!(f, "q"),
            FieldKind::PrimeField => write!(f, "fp:{}", self.modulus),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "q" {
            return Ok(FieldSpec::rationals());
        }
        let p = s
            .strip_prefix("fp:")
            .and_then(|p| p.parse::<u64>().ok())
            .ok_or_else(|| FieldError::BadDesignator(s.to_string()))?;
        FieldSpec::prime(p)
    }
}

/// Deterministic Miller-Rabin; these witnesses are exact for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n % q == 0 {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, m: u64) -> u64 {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(m));
    e.x.mod_floor(&BigInt::from(m)).to_u64().unwrap()
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Value {
    Rational(BigRational),
    Residue(u64),
}

/// A scalar in canonical form: a reduced fraction, or a residue in `0..p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    spec: FieldSpec,
    value: Value,
}

impl FieldElement {
    pub fn zero(spec: FieldSpec) -> Self {
        Self::from_i64(spec, 0)
    }

    pub fn one(spec: FieldSpec) -> Self {
        Self::from_i64(spec, 1)
    }

    pub fn from_i64(spec: FieldSpec, n: i64) -> Self {
        Self::from_bigint(spec, &BigInt::from(n))
    }

    pub fn from_bigint(spec: FieldSpec, n: &BigInt) -> Self {
        let value = match spec.kind {
            FieldKind::Rationals => Value::Rational(BigRational::from_integer(n.clone())),
            FieldKind::PrimeField => {
                Value::Residue(n.mod_floor(&BigInt::from(spec.modulus)).to_u64().unwrap())
            }
        };
        FieldElement { spec, value }
    }

    /// `num / den` in the field; in `F_p` this is field division.
    pub fn from_ratio(spec: FieldSpec, num: &BigInt, den: &BigInt) -> Result<Self, FieldError> {
        let n = Self::from_bigint(spec, num);
        let d = Self::from_bigint(spec, den);
        n.checked_div(&d)
    }

    /// `r` must already lie in `0..p`.
    pub(crate) fn from_residue(spec: FieldSpec, r: u64) -> Self {
        debug_assert!(spec.kind == FieldKind::PrimeField && r < spec.modulus);
        FieldElement {
            spec,
            value: Value::Residue(r),
        }
    }

    pub(crate) fn from_reduced_rational(spec: FieldSpec, r: BigRational) -> Self {
        debug_assert!(spec.kind == FieldKind::Rationals);
        FieldElement {
            spec,
            value: Value::Rational(r),
        }
    }

    pub fn from_rational(spec: FieldSpec, r: &BigRational) -> Result<Self, FieldError> {
        Self::from_ratio(spec, r.numer(), r.denom())
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Value::Rational(r) => r.is_zero(),
            Value::Residue(r) => *r == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.value {
            Value::Rational(r) => r.is_one(),
            Value::Residue(r) => *r == 1,
        }
    }

    /// The rational value, if this element lives in `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.value {
            Value::Rational(r) => Some(r),
            Value::Residue(_) => None,
        }
    }

    /// The residue in `0..p`, if this element lives in `F_p`.
    pub fn as_residue(&self) -> Option<u64> {
        match &self.value {
            Value::Rational(_) => None,
            Value::Residue(r) => Some(*r),
        }
    }

    /// True when the printed form needs a leading minus sign.
    pub fn is_negative(&self) -> bool {
        matches!(&self.value, Value::Rational(r) if r.is_negative())
    }

    fn binary(
        &self,
        other: &Self,
        rat: impl Fn(&BigRational, &BigRational) -> BigRational,
        res: impl Fn(u64, u64, u64) -> u64,
    ) -> Result<Self, FieldError> {
        self.spec.check_same(&other.spec)?;
        let value = match (&self.value, &other.value) {
            (Value::Rational(a), Value::Rational(b)) => Value::Rational(rat(a, b)),
            (Value::Residue(a), Value::Residue(b)) => Value::Residue(res(*a, *b, self.spec.modulus)),
            _ => unreachable!("value representation always matches the spec"),
        };
        Ok(FieldElement {
            spec: self.spec,
            value,
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.binary(other, |a, b| a + b, |a, b, p| ((a as u128 + b as u128) % p as u128) as u64)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.binary(other, |a, b| a - b, |a, b, p| if a >= b { a - b } else { p - (b - a) })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.binary(other, |a, b| a * b, mul_mod)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, FieldError> {
        self.spec.check_same(&other.spec)?;
        self.checked_mul(&other.inverse()?)
    }

    pub fn inverse(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let value = match &self.value {
            Value::Rational(r) => Value::Rational(r.recip()),
            Value::Residue(r) => Value::Residue(inv_mod(*r, self.spec.modulus)),
        };
        Ok(FieldElement {
            spec: self.spec,
            value,
        })
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        let mut acc = Self::one(self.spec);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// A solution of `r^n = self`, or `None` when the field has none.
    ///
    /// Over `F_p` the least residue among all roots is returned. Over `Q` an
    /// even root is the nonnegative one.
    pub fn nth_root(&self, n: u32) -> Option<Self> {
        assert!(n >= 1, "nth_root needs n >= 1");
        if self.is_zero() || n == 1 {
            return Some(self.clone());
        }
        match &self.value {
            Value::Rational(r) => {
                if r.is_negative() && n % 2 == 0 {
                    return None;
                }
                let num = exact_int_root(&r.numer().abs(), n)?;
                let den = exact_int_root(r.denom(), n)?;
                let mut root = BigRational::new(num, den);
                if r.is_negative() {
                    root = -root;
                }
                Some(FieldElement {
                    spec: self.spec,
                    value: Value::Rational(root),
                })
            }
            Value::Residue(c) => {
                let p = self.spec.modulus;
                let root = if p < EXHAUSTIVE_ROOT_LIMIT {
                    (1..p).find(|&r| pow_mod(r, n as u64, p) == *c)
                } else {
                    least_root_mod_p(*c, n as u64, p)
                }?;
                Some(FieldElement {
                    spec: self.spec,
                    value: Value::Residue(root),
                })
            }
        }
    }

    /// Canonical ordering used to pick deterministic representatives: residues
    /// by value, rationals numerically.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        match (&self.value, &other.value) {
            (Value::Rational(a), Value::Rational(b)) => a.cmp(b),
            (Value::Residue(a), Value::Residue(b)) => a.cmp(b),
            (Value::Rational(_), Value::Residue(_)) => Ordering::Less,
            (Value::Residue(_), Value::Rational(_)) => Ordering::Greater,
        }
    }
}

fn exact_int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// Least `r` with `r^n = c (mod p)` using the group structure of `F_p^*`.
///
/// The roots of `x^n = c` coincide with those of `x^d = c^s` where
/// `d = gcd(n, p-1)` and `n*s = d (mod p-1)`; the latter has either zero or
/// exactly `d` roots, forming a coset of the `d`-th roots of unity.
fn least_root_mod_p(c: u64, n: u64, p: u64) -> Option<u64> {
    let order = p - 1;
    let d = n.gcd(&order);
    if pow_mod(c, order / d, p) != 1 {
        return None;
    }
    let eg = BigInt::from(n).extended_gcd(&BigInt::from(order));
    let s = eg.x.mod_floor(&BigInt::from(order)).to_u64().unwrap();
    let target = pow_mod(c, s, p);
    let r0 = root_dividing_order(target, d, p)?;
    let zeta = primitive_root_of_unity(d, p);
    let mut best = r0;
    let mut r = r0;
    for _ in 1..d {
        r = mul_mod(r, zeta, p);
        best = best.min(r);
    }
    Some(best)
}

/// Some `x` with `x^d = a`, where `d | p-1`.
fn root_dividing_order(a: u64, d: u64, p: u64) -> Option<u64> {
    if d == 1 {
        return Some(a);
    }
    let q = prime_factors(d)[0];
    let y0 = prime_root(a, q, p)?;
    // every q-th root of a is y0 times a q-th root of unity; try each branch
    let zeta = primitive_root_of_unity(q, p);
    let mut y = y0;
    for _ in 0..q {
        if let Some(x) = root_dividing_order(y, d / q, p) {
            return Some(x);
        }
        y = mul_mod(y, zeta, p);
    }
    None
}

/// A `q`-th root of `a` for prime `q | p-1`, by lifting through the Sylow
/// `q`-subgroup (Adleman-Manders-Miller style).
fn prime_root(a: u64, q: u64, p: u64) -> Option<u64> {
    let order = p - 1;
    if pow_mod(a, order / q, p) != 1 {
        return None;
    }
    let mut e = 0u32;
    let mut s = order;
    while s % q == 0 {
        s /= q;
        e += 1;
    }
    // q*v = 1 (mod s)
    let v = if s == 1 { 0 } else { inv_mod(q % s, s) };
    let x0 = pow_mod(a, v, p);
    // error term lies in the Sylow subgroup of order q^e
    let b = mul_mod(pow_mod(x0, q, p), inv_mod(a, p), p);
    let z = (2..p).find(|&z| pow_mod(z, order / q, p) != 1)?;
    let gen = pow_mod(z, s, p);
    let log = sylow_log(b, gen, q, e, p)?;
    debug_assert!(log % q == 0);
    let correction = pow_mod(inv_mod(gen, p), log / q, p);
    let x = mul_mod(x0, correction, p);
    (pow_mod(x, q, p) == a).then_some(x)
}

/// Discrete log of `b` base `gen`, where `gen` has order `q^e` (Pohlig-Hellman).
fn sylow_log(b: u64, gen: u64, q: u64, e: u32, p: u64) -> Option<u64> {
    let qe1 = q.pow(e.saturating_sub(1));
    let gamma = pow_mod(gen, qe1, p);
    let gen_inv = inv_mod(gen, p);
    let mut log = 0u64;
    let mut qk = 1u64;
    for k in 0..e {
        let h = mul_mod(b, pow_mod(gen_inv, log, p), p);
        let hk = pow_mod(h, q.pow(e - 1 - k), p);
        let digit = (0..q).find(|&dg| pow_mod(gamma, dg, p) == hk)?;
        log += digit * qk;
        qk *= q;
    }
    Some(log)
}

fn primitive_root_of_unity(d: u64, p: u64) -> u64 {
    if d == 1 {
        return 1;
    }
    let factors = prime_factors(d);
    (2..p)
        .map(|z| pow_mod(z, (p - 1) / d, p))
        .find(|&zeta| factors.iter().all(|&q| pow_mod(zeta, d / q, p) != 1))
        .expect("d divides p-1, so F_p^* has an element of order d")
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Value::Residue(r) => write!(f, "{r}"),
        }
    }
}

macro_rules! forward_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&FieldElement> for &FieldElement {
            type Output = FieldElement;

            /// Panics if the operands live in different fields.
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).expect("field arithmetic on mixed fields")
            }
        }

        impl $trait for FieldElement {
            type Output = FieldElement;

            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);

impl Neg for &FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        let value = match &self.value {
            Value::Rational(r) => Value::Rational(-r),
            Value::Residue(0) => Value::Residue(0),
            Value::Residue(r) => Value::Residue(self.spec.modulus - r),
        };
        FieldElement {
            spec: self.spec,
            value,
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> FieldElement {
        FieldElement::from_ratio(FieldSpec::rationals(), &n.into(), &d.into()).unwrap()
    }

    fn fp(p: u64, n: i64) -> FieldElement {
        FieldElement::from_i64(FieldSpec::prime(p).unwrap(), n)
    }

    #[test]
    fn rational_sum() {
        assert_eq!(&q(2, 3) + &q(1, 6), q(5, 6));
        assert_eq!(q(5, 6).to_string(), "5/6");
        assert_eq!(q(4, -2).to_string(), "-2");
    }

    #[test]
    fn inverse_mod_5_matches_scan() {
        let three = fp(5, 3);
        let scan = (1..5).find(|r| (3 * r) % 5 == 1).unwrap();
        assert_eq!(scan, 2);
        assert_eq!(three.inverse().unwrap(), fp(5, 2));
    }

    #[test]
    fn additive_identity() {
        for a in [q(7, 3), fp(7, 4), fp(2, 1)] {
            let z = FieldElement::zero(a.spec());
            assert_eq!(&a + &z, a);
        }
    }

    #[test]
    fn characteristic() {
        assert_eq!(FieldSpec::rationals().characteristic(), 0);
        assert_eq!(FieldSpec::prime(2).unwrap().characteristic(), 2);
        assert_eq!(FieldSpec::prime(7).unwrap().characteristic(), 7);
    }

    #[test]
    fn rejects_composite_and_huge_moduli() {
        assert_eq!(FieldSpec::prime(9), Err(FieldError::NotPrime(9)));
        assert_eq!(FieldSpec::prime(1), Err(FieldError::NotPrime(1)));
        assert!(matches!(
            FieldSpec::prime(MODULUS_LIMIT + 1),
            Err(FieldError::ModulusTooLarge(_))
        ));
        assert!(FieldSpec::prime((1 << 61) - 1).is_ok());
    }

    #[test]
    fn mixed_and_zero_division_errors() {
        assert!(matches!(
            fp(5, 1).checked_add(&fp(7, 1)),
            Err(FieldError::MixedField(..))
        ));
        assert_eq!(fp(5, 0).inverse(), Err(FieldError::DivisionByZero));
        assert_eq!(q(1, 1).checked_div(&q(0, 1)), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn designators() {
        assert_eq!("q".parse::<FieldSpec>().unwrap(), FieldSpec::rationals());
        assert_eq!("fp:2".parse::<FieldSpec>().unwrap(), FieldSpec::prime(2).unwrap());
        assert_eq!("fp:2".parse::<FieldSpec>().unwrap().to_string(), "fp:2");
        assert!("fp:4".parse::<FieldSpec>().is_err());
        assert!("r".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn nth_roots() {
        assert_eq!(q(8, 1).nth_root(3), Some(q(2, 1)));
        assert_eq!(q(-8, 27).nth_root(3), Some(q(-2, 3)));
        assert_eq!(q(2, 1).nth_root(2), None);
        assert_eq!(q(-4, 1).nth_root(2), None);
        assert_eq!(q(4, 9).nth_root(2), Some(q(2, 3)));
        // 3^2 = 9 = 2 and 4^2 = 16 = 2 mod 7; least is 3
        assert_eq!(fp(7, 2).nth_root(2), Some(fp(7, 3)));
        assert_eq!(fp(7, 3).nth_root(2), None);
    }

    #[test]
    fn group_theoretic_roots_match_scan() {
        // 65537 = 2^16 + 1 takes the non-exhaustive path
        let p = 65537u64;
        for &(c, n) in &[(2u64, 2u64), (3, 2), (5, 4), (81, 4), (7, 3), (1, 8), (12345, 16), (256, 32)] {
            let fast = least_root_mod_p(c, n, p);
            let scan = (1..p).find(|&r| pow_mod(r, n, p) == c);
            assert_eq!(fast, scan, "c={c} n={n}");
        }
        let big = (1u64 << 61) - 1;
        let spec = FieldSpec::prime(big).unwrap();
        let c = FieldElement::from_i64(spec, 1234567).pow(6);
        let r = c.nth_root(6).unwrap();
        assert_eq!(r.pow(6), c);
    }

    fn arb_elem() -> impl Strategy<Value = FieldElement> {
        prop_oneof![
            (-50i64..50, 1i64..20).prop_map(|(n, d)| q(n, d)),
            (prop::sample::select(vec![2u64, 3, 5, 7, 101]), any::<i64>())
                .prop_map(|(p, n)| fp(p, n)),
        ]
    }

    proptest! {
        #[test]
        fn inverse_is_two_sided(a in arb_elem()) {
            prop_assume!(!a.is_zero());
            let inv = a.inverse().unwrap();
            prop_assert!((&a * &inv).is_one());
            prop_assert!((&inv * &a).is_one());
        }

        #[test]
        fn roots_of_powers_exist(a in arb_elem(), n in 1u32..7) {
            let c = a.pow(n as u64);
            let r = c.nth_root(n).expect("c^n always has an n-th root");
            prop_assert_eq!(r.pow(n as u64), c);
            if a.as_rational().is_some() && n % 2 == 1 {
                prop_assert_eq!(r, a);
            }
        }

        #[test]
        fn distributive(a in arb_elem(), b in any::<i64>(), c in any::<i64>()) {
            let b = FieldElement::from_i64(a.spec(), b % 1000);
            let c = FieldElement::from_i64(a.spec(), c % 1000);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a - &b) + &b, a.clone());
        }
    }
}
