//! Sparse polynomials in `k[x1, x2]`, `k[x1, x2][T]` and `k[x1, x2][T, U]`,
//! with total and weighted degrees, leading forms and substitution.
//!
//! Terms are kept in maps keyed by exponents, so iteration order is the
//! lexicographic order `x1 > x2 > T > U`. Printing walks it in descending
//! order, which makes every textual and JSON form deterministic.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::Error;
use crate::field::{FieldElement, FieldError, FieldSpec};

/// Exponent pair `(i1, i2)` of the monomial `x1^i1 * x2^i2`.
pub type Exp = (u32, u32);

/// A plane variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X1,
    X2,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X1 => Var::X2,
            Var::X2 => Var::X1,
        }
    }

    /// 1 for `x1`, 2 for `x2`.
    pub fn index(self) -> u8 {
        match self {
            Var::X1 => 1,
            Var::X2 => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Var> {
        match i {
            1 => Some(Var::X1),
            2 => Some(Var::X2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
        }
    }
}

/// Total degree; the zero polynomial has degree `MinusInfinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    MinusInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::MinusInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::MinusInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// The pair `(T-degree, total degree of the leading T-coefficient)`,
/// compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Z2Degree {
    pub t_degree: u32,
    pub coeff_degree: u32,
}

impl fmt::Display for Z2Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.t_degree, self.coeff_degree)
    }
}

/// A grading weight `(w1, w2)` on `(x1, x2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Weight {
    pub w1: BigRational,
    pub w2: BigRational,
}

impl Weight {
    pub fn new(w1: BigRational, w2: BigRational) -> Self {
        Weight { w1, w2 }
    }

    pub fn integral(w1: i64, w2: i64) -> Self {
        Weight {
            w1: BigRational::from_integer(w1.into()),
            w2: BigRational::from_integer(w2.into()),
        }
    }

    fn of(&self, e: Exp) -> BigRational {
        &self.w1 * BigInt::from(e.0) + &self.w2 * BigInt::from(e.1)
    }
}

/// Common surface of the polynomial rings, enough to substitute into them.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn spec(&self) -> FieldSpec;
    fn zero(spec: FieldSpec) -> Self;
    fn constant(c: FieldElement) -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn scale(&self, c: &FieldElement) -> Self;

    fn one(spec: FieldSpec) -> Self {
        Self::constant(FieldElement::one(spec))
    }

    fn neg_ref(&self) -> Self {
        self.scale(&-FieldElement::one(self.spec()))
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }

    fn pow(&self, mut n: u32) -> Self {
        let mut acc = Self::one(self.spec());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    fn checked_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.spec().check_same(&other.spec())?;
        Ok(self.add_ref(other))
    }

    fn checked_sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.spec().check_same(&other.spec())?;
        Ok(self.sub_ref(other))
    }

    fn checked_mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.spec().check_same(&other.spec())?;
        Ok(self.mul_ref(other))
    }
}

/// Memoized powers `g^k` of one base, built by repeated squaring.
struct PowerCache<'a, R: Ring> {
    base: &'a R,
    cache: HashMap<u32, R>,
}

impl<'a, R: Ring> PowerCache<'a, R> {
    fn new(base: &'a R) -> Self {
        PowerCache {
            base,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, n: u32) -> R {
        match n {
            0 => return R::one(self.base.spec()),
            1 => return self.base.clone(),
            _ => {}
        }
        if let Some(p) = self.cache.get(&n) {
            return p.clone();
        }
        let p = if n % 2 == 0 {
            let h = self.get(n / 2);
            h.mul_ref(&h)
        } else {
            self.get(n - 1).mul_ref(self.base)
        };
        self.cache.insert(n, p.clone());
        p
    }
}

fn add_into<K: Ord>(map: &mut BTreeMap<K, FieldElement>, key: K, c: FieldElement) {
    use std::collections::btree_map::Entry;
    match map.entry(key) {
        Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c);
            }
        }
        Entry::Occupied(mut o) => {
            let sum = o.get() + &c;
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

/// An element of `k[x1, x2]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly2 {
    spec: FieldSpec,
    terms: BTreeMap<Exp, FieldElement>,
}

impl Poly2 {
    pub fn from_terms(
        spec: FieldSpec,
        terms: impl IntoIterator<Item = (Exp, FieldElement)>,
    ) -> Result<Self, FieldError> {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            spec.check_same(&c.spec())?;
            add_into(&mut map, e, c);
        }
        Ok(Poly2 { spec, terms: map })
    }

    /// Builds from integer coefficients; handy in tests and generators.
    pub fn from_int_terms(spec: FieldSpec, terms: &[(Exp, i64)]) -> Self {
        Self::from_terms(
            spec,
            terms.iter().map(|&(e, c)| (e, FieldElement::from_i64(spec, c))),
        )
        .expect("single field")
    }

    pub fn monomial(c: FieldElement, e: Exp) -> Self {
        let spec = c.spec();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Poly2 { spec, terms }
    }

    pub fn var(spec: FieldSpec, v: Var) -> Self {
        let e = match v {
            Var::X1 => (1, 0),
            Var::X2 => (0, 1),
        };
        Self::monomial(FieldElement::one(spec), e)
    }

    pub fn x1(spec: FieldSpec) -> Self {
        Self::var(spec, Var::X1)
    }

    pub fn x2(spec: FieldSpec) -> Self {
        Self::var(spec, Var::X2)
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exp, &FieldElement)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: Exp) -> FieldElement {
        self.terms
            .get(&e)
            .cloned()
            .unwrap_or_else(|| FieldElement::zero(self.spec))
    }

    /// The lexicographically greatest term.
    pub fn leading_term(&self) -> Option<(Exp, &FieldElement)> {
        self.terms.iter().next_back().map(|(e, c)| (*e, c))
    }

    pub fn constant_term(&self) -> FieldElement {
        self.coeff((0, 0))
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<FieldElement> {
        match self.terms.len() {
            0 => Some(FieldElement::zero(self.spec)),
            1 if self.terms.contains_key(&(0, 0)) => Some(self.constant_term()),
            _ => None,
        }
    }

    pub fn total_deg(&self) -> Degree {
        self.terms
            .keys()
            .map(|&(a, b)| a + b)
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    pub fn deg_in(&self, v: Var) -> Degree {
        self.terms
            .keys()
            .map(|&(a, b)| if v == Var::X1 { a } else { b })
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    /// The highest homogeneous part for the standard grading.
    pub fn top_homog(&self) -> Result<Poly2, Error> {
        let d = self.total_deg().finite().ok_or(Error::ZeroPolynomial)?;
        Ok(self.filter(|(a, b)| a + b == d))
    }

    pub fn w_deg(&self, w: &Weight) -> Option<BigRational> {
        self.terms.keys().map(|&e| w.of(e)).max()
    }

    /// The `w`-homogeneous leading form.
    pub fn w_top(&self, w: &Weight) -> Result<Poly2, Error> {
        let d = self.w_deg(w).ok_or(Error::ZeroPolynomial)?;
        Ok(self.filter(|e| w.of(e) == d))
    }

    pub fn is_w_homogeneous(&self, w: &Weight) -> bool {
        self.is_zero() || self.w_top(w).map(|t| &t == self).unwrap_or(false)
    }

    /// `(deg_x2 f, deg_x1 f)`: x1 is weighted by the x2-degree and vice versa.
    pub fn weight_of(&self) -> Result<Weight, Error> {
        let d2 = self.deg_in(Var::X2).finite().ok_or(Error::ZeroPolynomial)?;
        let d1 = self.deg_in(Var::X1).finite().ok_or(Error::ZeroPolynomial)?;
        Ok(Weight::integral(d2 as i64, d1 as i64))
    }

    /// True iff the polynomial lies outside `k[x1] ∪ k[x2]`.
    pub fn is_non_univariate(&self) -> bool {
        self.terms.keys().any(|e| e.0 > 0) && self.terms.keys().any(|e| e.1 > 0)
    }

    /// True iff no term involves `v`.
    pub fn is_free_of(&self, v: Var) -> bool {
        self.deg_in(v) <= Degree::Finite(0)
    }

    fn filter(&self, keep: impl Fn(Exp) -> bool) -> Poly2 {
        Poly2 {
            spec: self.spec,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(**e))
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    /// Drops the constant term and scales the lexicographically leading
    /// coefficient to 1.
    pub fn normalized(&self) -> Poly2 {
        let stripped = self.filter(|e| e != (0, 0));
        match stripped.leading_term() {
            Some((_, c)) => {
                let inv = c.inverse().expect("leading coefficient is nonzero");
                stripped.scale(&inv)
            }
            None => stripped,
        }
    }

    /// Substitutes `x1 -> g1`, `x2 -> g2` into any of the polynomial rings.
    pub fn subst<R: Ring>(&self, g1: &R, g2: &R) -> Result<R, FieldError> {
        self.spec.check_same(&g1.spec())?;
        self.spec.check_same(&g2.spec())?;
        Ok(self.subst_unchecked(g1, g2))
    }

    pub(crate) fn subst_unchecked<R: Ring>(&self, g1: &R, g2: &R) -> R {
        let spec = self.spec;
        let mut p1 = PowerCache::new(g1);
        let mut p2 = PowerCache::new(g2);
        // group by x1-exponent, then Horner in g1 over the groups from the top
        let mut groups: BTreeMap<u32, Vec<(u32, &FieldElement)>> = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            groups.entry(a).or_default().push((b, c));
        }
        let mut acc = R::zero(spec);
        let mut prev: Option<u32> = None;
        for (&a, inner) in groups.iter().rev() {
            if let Some(pa) = prev {
                acc = acc.mul_ref(&p1.get(pa - a));
            }
            for &(b, c) in inner {
                acc = acc.add_ref(&p2.get(b).scale(c));
            }
            prev = Some(a);
        }
        if let Some(pa) = prev {
            if pa > 0 {
                acc = acc.mul_ref(&p1.get(pa));
            }
        }
        acc
    }

    /// Expands `self(x1, x2)` as a univariate polynomial if it only involves `v`.
    pub fn to_univariate(&self, v: Var) -> Option<UniPoly> {
        if !self.is_free_of(v.other()) {
            return None;
        }
        let coeffs = self.terms.iter().map(|(e, c)| {
            let d = if v == Var::X1 { e.0 } else { e.1 };
            (d, c.clone())
        });
        Some(UniPoly::from_sparse(self.spec, coeffs))
    }
}

impl Ring for Poly2 {
    fn spec(&self) -> FieldSpec {
        self.spec
    }

    fn zero(spec: FieldSpec) -> Self {
        Poly2 {
            spec,
            terms: BTreeMap::new(),
        }
    }

    fn constant(c: FieldElement) -> Self {
        Self::monomial(c, (0, 0))
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_ref(&self, other: &Self) -> Self {
        assert_eq!(self.spec, other.spec, "polynomial arithmetic on mixed fields");
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            add_into(&mut terms, *e, c.clone());
        }
        Poly2 {
            spec: self.spec,
            terms,
        }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        assert_eq!(self.spec, other.spec, "polynomial arithmetic on mixed fields");
        Poly2 {
            spec: self.spec,
            terms: fast_mul::product(self.spec, &self.terms, &other.terms),
        }
    }

    fn scale(&self, c: &FieldElement) -> Self {
        if c.is_zero() {
            return Self::zero(self.spec);
        }
        Poly2 {
            spec: self.spec,
            terms: self.terms.iter().map(|(e, a)| (*e, a * c)).collect(),
        }
    }
}

/// An element of `k[x1, x2][T]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyT {
    spec: FieldSpec,
    coeffs: BTreeMap<u32, Poly2>,
}

impl PolyT {
    pub fn from_coeffs(
        spec: FieldSpec,
        coeffs: impl IntoIterator<Item = (u32, Poly2)>,
    ) -> Result<Self, FieldError> {
        let mut out = PolyT::zero(spec);
        for (i, c) in coeffs {
            spec.check_same(&c.spec())?;
            out = out.add_ref(&PolyT::monomial_t(c, i));
        }
        Ok(out)
    }

    /// `c * T^i`.
    pub fn monomial_t(c: Poly2, i: u32) -> Self {
        let spec = c.spec();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(i, c);
        }
        PolyT { spec, coeffs }
    }

    pub fn t(spec: FieldSpec) -> Self {
        Self::monomial_t(Poly2::one(spec), 1)
    }

    pub fn from_poly2(c: &Poly2) -> Self {
        Self::monomial_t(c.clone(), 0)
    }

    pub fn coeffs(&self) -> impl DoubleEndedIterator<Item = (&u32, &Poly2)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, i: u32) -> Poly2 {
        self.coeffs
            .get(&i)
            .cloned()
            .unwrap_or_else(|| Poly2::zero(self.spec))
    }

    /// Highest power of `T`, `None` for zero.
    pub fn t_degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn leading_coeff(&self) -> Option<&Poly2> {
        self.coeffs.values().next_back()
    }

    /// `Some(q0)` when no positive power of `T` occurs.
    pub fn as_poly2(&self) -> Option<Poly2> {
        match self.t_degree() {
            None => Some(Poly2::zero(self.spec)),
            Some(0) => Some(self.coeff(0)),
            Some(_) => None,
        }
    }

    pub fn z2_deg(&self) -> Result<Z2Degree, Error> {
        let (&m, lead) = self.coeffs.iter().next_back().ok_or(Error::ZeroPolynomial)?;
        let d = lead.total_deg().finite().expect("stored coefficients are nonzero");
        Ok(Z2Degree {
            t_degree: m,
            coeff_degree: d,
        })
    }

    /// `sum q_i t^i`.
    pub fn eval_t(&self, t: &Poly2) -> Result<Poly2, FieldError> {
        self.spec.check_same(&t.spec())?;
        Ok(self.eval_t_unchecked(t))
    }

    pub(crate) fn eval_t_unchecked(&self, t: &Poly2) -> Poly2 {
        let mut powers = PowerCache::new(t);
        let mut acc = Poly2::zero(self.spec);
        let mut prev: Option<u32> = None;
        for (&i, c) in self.coeffs.iter().rev() {
            if let Some(pi) = prev {
                acc = acc.mul_ref(&powers.get(pi - i));
            }
            acc = acc.add_ref(c);
            prev = Some(i);
        }
        if let Some(pi) = prev {
            if pi > 0 {
                acc = acc.mul_ref(&powers.get(pi));
            }
        }
        acc
    }

    /// Applies `op` to every coefficient, as a `k[T]`-linear map.
    pub fn map_coeffs(&self, op: impl Fn(&Poly2) -> Poly2) -> PolyT {
        let mut coeffs = BTreeMap::new();
        for (&i, c) in &self.coeffs {
            let mapped = op(c);
            if !mapped.is_zero() {
                coeffs.insert(i, mapped);
            }
        }
        PolyT {
            spec: self.spec,
            coeffs,
        }
    }

    /// The image under `T -> T + U`.
    pub fn shift_t_by_u(&self) -> PolyTU {
        let mut out = PolyTU::zero(self.spec);
        let t_plus_u = PolyTU::var_t(self.spec).add_ref(&PolyTU::var_u(self.spec));
        let mut powers = PowerCache::new(&t_plus_u);
        for (&i, c) in &self.coeffs {
            out = out.add_ref(&powers.get(i).mul_poly2(c));
        }
        out
    }

    /// `self * U^k` in `k[x1, x2][T, U]`.
    pub fn times_u_pow(&self, k: u32) -> PolyTU {
        PolyTU {
            spec: self.spec,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&i, c)| ((i, k), c.clone()))
                .collect(),
        }
    }
}

impl Ring for PolyT {
    fn spec(&self) -> FieldSpec {
        self.spec
    }

    fn zero(spec: FieldSpec) -> Self {
        PolyT {
            spec,
            coeffs: BTreeMap::new(),
        }
    }

    fn constant(c: FieldElement) -> Self {
        Self::from_poly2(&Poly2::constant(c))
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_ref(&self, other: &Self) -> Self {
        assert_eq!(self.spec, other.spec, "polynomial arithmetic on mixed fields");
        let mut coeffs = self.coeffs.clone();
        for (&i, c) in &other.coeffs {
            let sum = match coeffs.get(&i) {
                Some(a) => a.add_ref(c),
                None => c.clone(),
            };
            if sum.is_zero() {
                coeffs.remove(&i);
            } else {
                coeffs.insert(i, sum);
            }
        }
        PolyT {
            spec: self.spec,
            coeffs,
        }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        assert_eq!(self.spec, other.spec, "polynomial arithmetic on mixed fields");
        let mut coeffs: BTreeMap<u32, Poly2> = BTreeMap::new();
        for (&i, a) in &self.coeffs {
            for (&j, b) in &other.coeffs {
                let prod = a.mul_ref(b);
                let entry = coeffs.entry(i + j).or_insert_with(|| Poly2::zero(self.spec));
                *entry = entry.add_ref(&prod);
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        PolyT {
            spec: self.spec,
            coeffs,
        }
    }

    fn scale(&self, c: &FieldElement) -> Self {
        self.map_coeffs(|p| p.scale(c))
    }
}

/// An element of `k[x1, x2][T, U]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyTU {
    spec: FieldSpec,
    coeffs: BTreeMap<(u32, u32), Poly2>,
}

impl PolyTU {
    /// `c * T^i * U^j`.
    pub fn monomial_tu(c: Poly2, i: u32, j: u32) -> Self {
        let spec = c.spec();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert((i, j), c);
        }
        PolyTU { spec, coeffs }
    }

    pub fn var_t(spec: FieldSpec) -> Self {
        Self::monomial_tu(Poly2::one(spec), 1, 0)
    }

    pub fn var_u(spec: FieldSpec) -> Self {
        Self::monomial_tu(Poly2::one(spec), 0, 1)
    }

    pub fn coeffs(&self) -> impl DoubleEndedIterator<Item = (&(u32, u32), &Poly2)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Poly2 {
        self.coeffs
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| Poly2::zero(self.spec))
    }

    fn mul_poly2(&self, c: &Poly2) -> PolyTU {
        let mut coeffs = BTreeMap::new();
        for (&k, a) in &self.coeffs {
            let p = a.mul_ref(c);
            if !p.is_zero() {
                coeffs.insert(k, p);
            }
        }
        PolyTU {
            spec: self.spec,
            coeffs,
        }
    }
}

impl Ring for PolyTU {
    fn spec(&self) -> FieldSpec {
        self.spec
    }

    fn zero(spec: FieldSpec) -> Self {
        PolyTU {
            spec,
            coeffs: BTreeMap::new(),
        }
    }

    fn constant(c: FieldElement) -> Self {
        Self::monomial_tu(Poly2::constant(c), 0, 0)
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_ref(&self, other: &Self) -> Self {
        assert_eq!(self.spec, other.spec, "polynomial arithmetic on mixed fields");
        let mut coeffs = self.coeffs.clone();
        for (&k, c) in &other.coeffs {
            let sum = match coeffs.get(&k) {
                Some(a) => a.add_ref(c),
                None => c.clone(),
            };
            if sum.is_zero() {
                coeffs.remove(&k);
            } else {
                coeffs.insert(k, sum);
            }
        }
        PolyTU {
            spec: self.spec,
            coeffs,
        }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        assert_eq!(self.spec, other.spec, "polynomial arithmetic on mixed fields");
        let mut coeffs: BTreeMap<(u32, u32), Poly2> = BTreeMap::new();
        for (&(i, j), a) in &self.coeffs {
            for (&(k, l), b) in &other.coeffs {
                let prod = a.mul_ref(b);
                let entry = coeffs
                    .entry((i + k, j + l))
                    .or_insert_with(|| Poly2::zero(self.spec));
                *entry = entry.add_ref(&prod);
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        PolyTU {
            spec: self.spec,
            coeffs,
        }
    }

    fn scale(&self, c: &FieldElement) -> Self {
        let mut coeffs = BTreeMap::new();
        for (&k, a) in &self.coeffs {
            let p = a.scale(c);
            if !p.is_zero() {
                coeffs.insert(k, p);
            }
        }
        PolyTU {
            spec: self.spec,
            coeffs,
        }
    }
}

/// A univariate polynomial `sum c_i t^i`, stored densely.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    spec: FieldSpec,
    coeffs: Vec<FieldElement>,
}

impl UniPoly {
    pub fn new(spec: FieldSpec, mut coeffs: Vec<FieldElement>) -> Result<Self, FieldError> {
        for c in &coeffs {
            spec.check_same(&c.spec())?;
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Ok(UniPoly { spec, coeffs })
    }

    pub fn from_sparse(spec: FieldSpec, terms: impl IntoIterator<Item = (u32, FieldElement)>) -> Self {
        let mut coeffs: Vec<FieldElement> = Vec::new();
        for (d, c) in terms {
            let d = d as usize;
            if coeffs.len() <= d {
                coeffs.resize(d + 1, FieldElement::zero(spec));
            }
            coeffs[d] = &coeffs[d] + &c;
        }
        UniPoly::new(spec, coeffs).expect("single field")
    }

    /// `c * t^d`.
    pub fn monomial(c: FieldElement, d: u32) -> Self {
        let spec = c.spec();
        Self::from_sparse(spec, [(d, c)])
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Degree {
        match self.coeffs.len() {
            0 => Degree::MinusInfinity,
            n => Degree::Finite(n as u32 - 1),
        }
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly {
            spec: self.spec,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Evaluates at `x` by Horner's rule.
    pub fn eval<R: Ring>(&self, x: &R) -> R {
        let mut acc = R::zero(self.spec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_ref(x).add_ref(&R::constant(c.clone()));
        }
        acc
    }

    /// The same polynomial written in the plane variable `v`.
    pub fn in_var(&self, v: Var) -> Poly2 {
        let terms = self.coeffs.iter().enumerate().map(|(d, c)| {
            let d = d as u32;
            let e = if v == Var::X1 { (d, 0) } else { (0, d) };
            (e, c.clone())
        });
        Poly2::from_terms(self.spec, terms).expect("single field")
    }

    /// Text form using `name` as the variable.
    pub fn display_in(&self, name: &str) -> String {
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(d, c)| (vec![(name, d as u32)], c));
        format_terms(terms)
    }
}

fn format_terms<'a>(terms: impl Iterator<Item = (Vec<(&'a str, u32)>, &'a FieldElement)>) -> String {
    let mut out = String::new();
    for (vars, c) in terms {
        let neg = c.is_negative();
        let abs = if neg { -c } else { c.clone() };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono: Vec<String> = vars
            .iter()
            .filter(|(_, e)| *e > 0)
            .map(|(n, e)| if *e == 1 { n.to_string() } else { format!("{n}^{e}") })
            .collect();
        if mono.is_empty() {
            out.push_str(&abs.to_string());
        } else {
            if !abs.is_one() {
                out.push_str(&abs.to_string());
                out.push('*');
            }
            out.push_str(&mono.join("*"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self
            .terms
            .iter()
            .rev()
            .map(|(&(a, b), c)| (vec![("x1", a), ("x2", b)], c));
        f.write_str(&format_terms(terms))
    }
}

impl fmt::Display for PolyT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut flat: Vec<((u32, u32, u32), &FieldElement)> = self
            .coeffs
            .iter()
            .flat_map(|(&t, c)| c.terms().map(move |(&(a, b), k)| ((a, b, t), k)))
            .collect();
        flat.sort_by(|x, y| y.0.cmp(&x.0));
        let terms = flat
            .into_iter()
            .map(|((a, b, t), c)| (vec![("x1", a), ("x2", b), ("T", t)], c));
        f.write_str(&format_terms(terms))
    }
}

impl fmt::Display for PolyTU {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut flat: Vec<((u32, u32, u32, u32), &FieldElement)> = self
            .coeffs
            .iter()
            .flat_map(|(&(t, u), c)| c.terms().map(move |(&(a, b), k)| ((a, b, t, u), k)))
            .collect();
        flat.sort_by(|x, y| y.0.cmp(&x.0));
        let terms = flat
            .into_iter()
            .map(|((a, b, t, u), c)| (vec![("x1", a), ("x2", b), ("T", t), ("U", u)], c));
        f.write_str(&format_terms(terms))
    }
}

macro_rules! ring_ops {
    ($ty:ty) => {
        impl Add<&$ty> for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                self.add_ref(rhs)
            }
        }

        impl Sub<&$ty> for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                self.sub_ref(rhs)
            }
        }

        impl Mul<&$ty> for &$ty {
            type Output = $ty;
            fn mul(self, rhs: &$ty) -> $ty {
                self.mul_ref(rhs)
            }
        }

        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.neg_ref()
            }
        }

        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                self.add_ref(&rhs)
            }
        }

        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                self.sub_ref(&rhs)
            }
        }

        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                self.mul_ref(&rhs)
            }
        }

        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.neg_ref()
            }
        }
    };
}

ring_ops!(Poly2);
ring_ops!(PolyT);
ring_ops!(PolyTU);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_poly2, parse_poly_t};

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn p2(s: &str) -> Poly2 {
        parse_poly2(s, q()).unwrap()
    }

    fn pt(s: &str) -> PolyT {
        parse_poly_t(s, q()).unwrap()
    }

    #[test]
    fn ring_arith_examples() {
        assert_eq!(&p2("x1 - x2^2") + &p2("x2^2"), p2("x1"));
        let f2 = FieldSpec::prime(2).unwrap();
        let s = parse_poly2("x1 + x2", f2).unwrap();
        assert_eq!(s.pow(2), parse_poly2("x1^2 + x2^2", f2).unwrap());
        assert!((&p2("x1^3 - 7*x2") * &Poly2::zero(q())).is_zero());
        assert!(p2("x1").checked_add(&Poly2::x1(f2)).is_err());
    }

    #[test]
    fn total_degree_and_top_form() {
        assert_eq!(p2("x1 - x2^2").total_deg(), Degree::Finite(2));
        assert_eq!(p2("5").total_deg(), Degree::Finite(0));
        assert_eq!(p2("0").total_deg(), Degree::MinusInfinity);
        assert_eq!(p2("x1 - x2^2").top_homog().unwrap(), p2("-x2^2"));
        assert_eq!(
            p2("x1^3 + x1*x2^2 + x2").top_homog().unwrap(),
            p2("x1^3 + x1*x2^2")
        );
        assert_eq!(p2("7/2").top_homog().unwrap(), p2("7/2"));
        assert_eq!(p2("0").top_homog(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn weighted_degree_and_form() {
        let f = p2("x1 - x2^3");
        let w = Weight::integral(3, 1);
        assert_eq!(f.w_deg(&w), Some(BigRational::from_integer(3.into())));
        assert_eq!(f.w_top(&w).unwrap(), f);
        let g = p2("x2^2 + x1^2*x2 + x1");
        let w = Weight::integral(2, 2);
        assert_eq!(g.w_deg(&w), Some(BigRational::from_integer(6.into())));
        assert_eq!(g.w_top(&w).unwrap(), p2("x1^2*x2"));
        assert_eq!(
            g.w_deg(&Weight::integral(0, 0)),
            Some(BigRational::from_integer(0.into()))
        );
        let h = p2("x1^2 - 3*x1*x2 + x2^2");
        assert_eq!(h.w_top(&Weight::integral(1, 1)).unwrap(), h);
        assert!(h.is_w_homogeneous(&Weight::integral(1, 1)));
        assert_eq!(p2("0").w_deg(&w), None);
        assert_eq!(p2("0").w_top(&w), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn weight_of_swaps_degrees() {
        assert_eq!(p2("x1 - x2^3").weight_of().unwrap(), Weight::integral(3, 1));
        assert_eq!(
            p2("(x2 - x1^2)^2 + x1").weight_of().unwrap(),
            Weight::integral(2, 4)
        );
        assert_eq!(p2("x1").weight_of().unwrap(), Weight::integral(0, 1));
        assert_eq!(p2("0").weight_of(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn univariate_detection() {
        assert!(p2("x1 - x2^3").is_non_univariate());
        assert!(!p2("x1^5 + 3").is_non_univariate());
        assert!(!p2("0").is_non_univariate());
    }

    #[test]
    fn z2_degree_examples() {
        let z = pt("x2*T^2 + x1^3*T").z2_deg().unwrap();
        assert_eq!((z.t_degree, z.coeff_degree), (2, 1));
        let z = pt("x1").z2_deg().unwrap();
        assert_eq!((z.t_degree, z.coeff_degree), (0, 1));
        let z = pt("7*T^5").z2_deg().unwrap();
        assert_eq!((z.t_degree, z.coeff_degree), (5, 0));
        assert_eq!(pt("0").z2_deg(), Err(Error::ZeroPolynomial));
        assert!(
            Z2Degree { t_degree: 1, coeff_degree: 9 } < Z2Degree { t_degree: 2, coeff_degree: 0 }
        );
    }

    #[test]
    fn substitution_examples() {
        let f = p2("x1 - x2^2");
        assert_eq!(f.subst(&p2("x1 + x2^2"), &p2("x2")).unwrap(), p2("x1"));
        assert_eq!(f.subst(&p2("x1"), &p2("x2")).unwrap(), f);
        assert_eq!(p2("x1*x2").subst(&p2("x2"), &p2("x1")).unwrap(), p2("x1*x2"));
        let into_t = p2("x1*x2^2").subst(&pt("x1 + T"), &pt("x2")).unwrap();
        assert_eq!(into_t, pt("x1*x2^2 + x2^2*T"));
        let f2 = FieldSpec::prime(2).unwrap();
        assert!(f.subst(&Poly2::x1(f2), &Poly2::x2(f2)).is_err());
    }

    #[test]
    fn eval_t_examples() {
        assert_eq!(pt("x2 + x1*T").eval_t(&p2("0")).unwrap(), p2("x2"));
        assert_eq!(
            pt("x1 + 2*x2*T + T^2").eval_t(&p2("x1 - x2^2")).unwrap(),
            p2("x1 + 2*x2*(x1 - x2^2) + (x1 - x2^2)^2")
        );
        assert_eq!(pt("3*x1^2").eval_t(&p2("x2^9")).unwrap(), p2("3*x1^2"));
    }

    #[test]
    fn display_is_lex_descending() {
        assert_eq!(p2("1/3 - 2*x2 + x2*x1^2").to_string(), "x1^2*x2 - 2*x2 + 1/3");
        assert_eq!(p2("x1 - x2^2").to_string(), "x1 - x2^2");
        assert_eq!(p2("-x2^2 + x1").to_string(), "x1 - x2^2");
        assert_eq!(p2("-x2").to_string(), "-x2");
        assert_eq!(p2("0").to_string(), "0");
        assert_eq!(pt("T^2 + x1*T + x2").to_string(), "x1*T + x2 + T^2");
        let f7 = FieldSpec::prime(7).unwrap();
        assert_eq!(parse_poly2("-x1", f7).unwrap().to_string(), "6*x1");
    }

    #[test]
    fn shift_t_by_u_expands_binomially() {
        let q3 = pt("T^3").shift_t_by_u();
        assert_eq!(q3.to_string(), "T^3 + 3*T^2*U + 3*T*U^2 + U^3");
    }

    #[test]
    fn normalization() {
        assert_eq!(p2("3 - 2*x1 + 4*x2^2").normalized(), p2("x1 - 2*x2^2"));
        assert_eq!(p2("5").normalized(), p2("0"));
    }

    #[test]
    fn univariate_round_trip() {
        let p = p2("x2^3 - x2 + 2").to_univariate(Var::X2).unwrap();
        assert_eq!(p.display_in("t"), "t^3 - t + 2");
        assert_eq!(p.in_var(Var::X1), p2("x1^3 - x1 + 2"));
        assert_eq!(p.eval(&p2("x1 + 1")), p2("(x1 + 1)^3 - (x1 + 1) + 2"));
        assert!(p2("x1*x2").to_univariate(Var::X1).is_none());
    }
}

/// Bivariate products with machine-word or common-denominator accumulation.
mod fast_mul {
    use std::collections::{BTreeMap, HashMap};

    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    use super::Exp;
    use crate::field::{FieldElement, FieldSpec};

    type Terms = BTreeMap<Exp, FieldElement>;

    /// Dense grid or hash map keyed by exponent, chosen from the output box.
    enum Acc<T> {
        Dense { cells: Vec<T>, width: usize },
        Sparse(HashMap<Exp, T>),
    }

    impl<T: Clone + Default> Acc<T> {
        fn new(a: &Terms, b: &Terms) -> Self {
            let max = |t: &Terms| {
                t.keys()
                    .fold((0usize, 0usize), |m, e| (m.0.max(e.0 as usize), m.1.max(e.1 as usize)))
            };
            let (a1, a2) = max(a);
            let (b1, b2) = max(b);
            let width = a2 + b2 + 1;
            let cells = (a1 + b1 + 1).saturating_mul(width);
            let products = a.len().saturating_mul(b.len());
            if cells <= 1 << 24 && cells <= products.saturating_mul(8).max(64) {
                Acc::Dense {
                    cells: vec![T::default(); cells],
                    width,
                }
            } else {
                Acc::Sparse(HashMap::with_capacity(products.min(1 << 20)))
            }
        }

        fn slot(&mut self, e: Exp) -> &mut T {
            match self {
                Acc::Dense { cells, width } => &mut cells[e.0 as usize * *width + e.1 as usize],
                Acc::Sparse(m) => m.entry(e).or_default(),
            }
        }

        /// Entries in exponent order.
        fn into_sorted(self) -> Vec<(Exp, T)> {
            match self {
                Acc::Dense { cells, width } => cells
                    .into_iter()
                    .enumerate()
                    .map(|(k, v)| (((k / width) as u32, (k % width) as u32), v))
                    .collect(),
                Acc::Sparse(m) => {
                    let mut v: Vec<_> = m.into_iter().collect();
                    v.sort_unstable_by_key(|x| x.0);
                    v
                }
            }
        }
    }

    pub(super) fn product(spec: FieldSpec, a: &Terms, b: &Terms) -> Terms {
        if a.is_empty() || b.is_empty() {
            return Terms::new();
        }
        match spec.modulus() {
            Some(p) => modular(spec, p, a, b),
            None => rational(spec, a, b),
        }
    }

    fn modular(spec: FieldSpec, p: u64, a: &Terms, b: &Terms) -> Terms {
        let residues = |t: &Terms| -> Vec<(Exp, u128)> {
            t.iter().map(|(e, c)| (*e, u128::from(c.as_residue().expect("residue")))).collect()
        };
        let (ra, rb) = (residues(a), residues(b));
        let p128 = u128::from(p);
        let mut acc: Acc<u128> = Acc::new(a, b);
        for &(ea, ca) in &ra {
            for &(eb, cb) in &rb {
                let s = acc.slot((ea.0 + eb.0, ea.1 + eb.1));
                // residues are below 2^61, so each product is below 2^122 and the sum never overflows
                *s += ca * cb;
                if *s >= 1 << 127 {
                    *s %= p128;
                }
            }
        }
        acc.into_sorted()
            .into_iter()
            .filter_map(|(e, v)| {
                let r = (v % p128) as u64;
                (r != 0).then(|| (e, FieldElement::from_residue(spec, r)))
            })
            .collect()
    }

    /// Numerators over the common denominator of `t`.
    fn integral(t: &Terms) -> (BigInt, Vec<(Exp, BigInt)>) {
        let rat = |c: &FieldElement| c.as_rational().expect("rational").clone();
        let den = t
            .values()
            .fold(BigInt::one(), |l, c| l.lcm(rat(c).denom()));
        let nums = t
            .iter()
            .map(|(e, c)| {
                let r = rat(c);
                (*e, r.numer() * (&den / r.denom()))
            })
            .collect();
        (den, nums)
    }

    fn small(v: &[(Exp, BigInt)]) -> Option<(Vec<(Exp, i128)>, u128)> {
        let mut bound = 0u128;
        let mut out = Vec::with_capacity(v.len());
        for (e, n) in v {
            let x = n.to_i64()?;
            bound = bound.max(u128::from(x.unsigned_abs()));
            out.push((*e, i128::from(x)));
        }
        Some((out, bound))
    }

    fn rational(spec: FieldSpec, a: &Terms, b: &Terms) -> Terms {
        let (da, na) = integral(a);
        let (db, nb) = integral(b);
        let den = da * db;
        let sums: Vec<(Exp, BigInt)> = match (small(&na), small(&nb)) {
            (Some((sa, ma)), Some((sb, mb)))
                if (ma * mb)
                    .checked_mul(sa.len().min(sb.len()) as u128)
                    .map_or(false, |t| t < 1 << 126) =>
            {
                let mut acc: Acc<i128> = Acc::new(a, b);
                for &(ea, ca) in &sa {
                    for &(eb, cb) in &sb {
                        *acc.slot((ea.0 + eb.0, ea.1 + eb.1)) += ca * cb;
                    }
                }
                acc.into_sorted()
                    .into_iter()
                    .filter(|(_, v)| *v != 0)
                    .map(|(e, v)| (e, BigInt::from(v)))
                    .collect()
            }
            _ => {
                let mut acc: Acc<BigInt> = Acc::new(a, b);
                for (ea, ca) in &na {
                    for (eb, cb) in &nb {
                        *acc.slot((ea.0 + eb.0, ea.1 + eb.1)) += ca * cb;
                    }
                }
                acc.into_sorted().into_iter().filter(|(_, v)| !v.is_zero()).collect()
            }
        };
        sums.into_iter()
            .map(|(e, n)| {
                let r = if den.is_one() {
                    BigRational::from_integer(n)
                } else {
                    BigRational::new(n, den.clone())
                };
                (e, FieldElement::from_reduced_rational(spec, r))
            })
            .collect()
    }
}
