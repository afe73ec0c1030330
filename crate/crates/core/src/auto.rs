//! Endomorphisms of the plane, tame decomposition by leading-form reduction,
//! inversion, the leading-form relation of an automorphism, the normal form
//! of the weighted leading part of a non-univariate invariant, and coordinate
//! recognition.
//!
//! A [`PlaneMap`] `(f1, f2)` stands for the algebra endomorphism sending
//! `x1 -> f1`, `x2 -> f2`. `apply(phi, f)` substitutes, and
//! `compose(phi, psi)` is the map with `apply(compose(phi, psi), f) =
//! apply(phi, apply(psi, f))`. Factor lists are read in that order.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::poly::{Degree, Poly2, Ring, UniPoly, Var};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlaneMap {
    f1: Poly2,
    f2: Poly2,
}

impl PlaneMap {
    pub fn new(f1: Poly2, f2: Poly2) -> Result<Self> {
        f1.spec().check_same(&f2.spec())?;
        Ok(PlaneMap { f1, f2 })
    }

    pub fn identity(spec: FieldSpec) -> Self {
        PlaneMap {
            f1: Poly2::x1(spec),
            f2: Poly2::x2(spec),
        }
    }

    pub fn swap(spec: FieldSpec) -> Self {
        PlaneMap {
            f1: Poly2::x2(spec),
            f2: Poly2::x1(spec),
        }
    }

    pub fn spec(&self) -> FieldSpec {
        self.f1.spec()
    }

    pub fn f1(&self) -> &Poly2 {
        &self.f1
    }

    pub fn f2(&self) -> &Poly2 {
        &self.f2
    }

    pub fn component(&self, v: Var) -> &Poly2 {
        match v {
            Var::X1 => &self.f1,
            Var::X2 => &self.f2,
        }
    }

    fn with_component(&self, v: Var, p: Poly2) -> PlaneMap {
        match v {
            Var::X1 => PlaneMap {
                f1: p,
                f2: self.f2.clone(),
            },
            Var::X2 => PlaneMap {
                f1: self.f1.clone(),
                f2: p,
            },
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == PlaneMap::identity(self.spec())
    }

    pub fn max_degree(&self) -> Degree {
        self.f1.total_deg().max(self.f2.total_deg())
    }

    /// `f(f1, f2)`.
    pub fn apply(&self, f: &Poly2) -> Result<Poly2> {
        Ok(f.subst(&self.f1, &self.f2)?)
    }

    pub fn compose(&self, other: &PlaneMap) -> Result<PlaneMap> {
        self.spec().check_same(&other.spec())?;
        Ok(PlaneMap {
            f1: other.f1.subst_unchecked(&self.f1, &self.f2),
            f2: other.f2.subst_unchecked(&self.f1, &self.f2),
        })
    }
}

impl fmt::Display for PlaneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.f1, self.f2)
    }
}

/// `x_target -> x_target + addend(x_other)`, the other variable fixed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElementaryFactor {
    pub target: Var,
    pub addend: UniPoly,
}

impl ElementaryFactor {
    pub fn new(target: Var, addend: UniPoly) -> Self {
        ElementaryFactor { target, addend }
    }

    /// `x_target -> x_target + c * x_other^l`.
    pub fn monomial(target: Var, c: FieldElement, l: u32) -> Self {
        ElementaryFactor {
            target,
            addend: UniPoly::monomial(c, l),
        }
    }

    pub fn to_map(&self) -> PlaneMap {
        let spec = self.addend.spec();
        let moved = &Poly2::var(spec, self.target) + &self.addend.in_var(self.target.other());
        PlaneMap::identity(spec).with_component(self.target, moved)
    }

    pub fn inverse(&self) -> ElementaryFactor {
        ElementaryFactor {
            target: self.target,
            addend: self.addend.neg(),
        }
    }
}

/// `x -> M x + v` with `det M != 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineFactor {
    matrix: [[FieldElement; 2]; 2],
    translation: [FieldElement; 2],
}

impl AffineFactor {
    pub fn new(matrix: [[FieldElement; 2]; 2], translation: [FieldElement; 2]) -> Result<Self> {
        let spec = matrix[0][0].spec();
        for c in matrix.iter().flatten().chain(translation.iter()) {
            spec.check_same(&c.spec())?;
        }
        let a = AffineFactor {
            matrix,
            translation,
        };
        if a.det().is_zero() {
            return Err(Error::PreconditionViolation(
                "affine factor with singular matrix".into(),
            ));
        }
        Ok(a)
    }

    pub fn matrix(&self) -> &[[FieldElement; 2]; 2] {
        &self.matrix
    }

    pub fn translation(&self) -> &[FieldElement; 2] {
        &self.translation
    }

    pub fn spec(&self) -> FieldSpec {
        self.matrix[0][0].spec()
    }

    pub fn det(&self) -> FieldElement {
        let m = &self.matrix;
        &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0])
    }

    pub fn is_identity(&self) -> bool {
        let m = &self.matrix;
        m[0][0].is_one()
            && m[1][1].is_one()
            && m[0][1].is_zero()
            && m[1][0].is_zero()
            && self.translation.iter().all(|c| c.is_zero())
    }

    pub fn to_map(&self) -> PlaneMap {
        let spec = self.spec();
        let row = |r: usize| {
            Poly2::from_terms(
                spec,
                [
                    ((1, 0), self.matrix[r][0].clone()),
                    ((0, 1), self.matrix[r][1].clone()),
                    ((0, 0), self.translation[r].clone()),
                ],
            )
            .expect("single field")
        };
        PlaneMap {
            f1: row(0),
            f2: row(1),
        }
    }

    /// Reads the affine map off a pair of polynomials of degree at most one.
    pub fn from_linear_map(phi: &PlaneMap) -> Option<AffineFactor> {
        if phi.max_degree() > Degree::Finite(1) {
            return None;
        }
        let row = |p: &Poly2| [p.coeff((1, 0)), p.coeff((0, 1))];
        AffineFactor::new(
            [row(&phi.f1), row(&phi.f2)],
            [phi.f1.constant_term(), phi.f2.constant_term()],
        )
        .ok()
    }

    pub fn inverse(&self) -> AffineFactor {
        let d = self.det().inverse().expect("nonsingular by construction");
        let m = &self.matrix;
        let inv = [
            [&m[1][1] * &d, -&(&m[0][1] * &d)],
            [-&(&m[1][0] * &d), &m[0][0] * &d],
        ];
        let v = &self.translation;
        let t = [
            -&(&(&inv[0][0] * &v[0]) + &(&inv[0][1] * &v[1])),
            -&(&(&inv[1][0] * &v[0]) + &(&inv[1][1] * &v[1])),
        ];
        AffineFactor {
            matrix: inv,
            translation: t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Factor {
    Elementary(ElementaryFactor),
    Affine(AffineFactor),
}

impl Factor {
    pub fn to_map(&self) -> PlaneMap {
        match self {
            Factor::Elementary(e) => e.to_map(),
            Factor::Affine(a) => a.to_map(),
        }
    }

    pub fn inverse(&self) -> Factor {
        match self {
            Factor::Elementary(e) => Factor::Elementary(e.inverse()),
            Factor::Affine(a) => Factor::Affine(a.inverse()),
        }
    }
}

/// Factors whose composition, left to right, is the decomposed map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TameDecomposition {
    spec: FieldSpec,
    factors: Vec<Factor>,
}

impl TameDecomposition {
    pub fn new(spec: FieldSpec, factors: Vec<Factor>) -> Self {
        TameDecomposition { spec, factors }
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn compose_all(&self) -> PlaneMap {
        self.factors
            .iter()
            .fold(PlaneMap::identity(self.spec), |acc, f| {
                acc.compose(&f.to_map()).expect("single field")
            })
    }

    /// The decomposition of the inverse map.
    pub fn inverse(&self) -> TameDecomposition {
        TameDecomposition {
            spec: self.spec,
            factors: self.factors.iter().rev().map(Factor::inverse).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StuckReason {
    /// No leading-form relation between the components.
    NoLeadingRelation,
    /// A component became constant.
    ConstantComponent,
    /// Both components are affine but linearly dependent.
    SingularLinearPart,
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StuckReason::NoLeadingRelation => "no leading-form relation",
            StuckReason::ConstantComponent => "constant component",
            StuckReason::SingularLinearPart => "singular linear part",
        })
    }
}

/// Witness that a map is not an automorphism: the reduced pair where the
/// decomposition stopped, and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotAutomorphism {
    pub reason: StuckReason,
    pub stuck_at: PlaneMap,
}

impl fmt::Display for NotAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.reason, self.stuck_at)
    }
}

/// `top(f_i) = alpha * top(f_j)^l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LeadingRelation {
    pub i: Var,
    pub j: Var,
    pub alpha: FieldElement,
    pub l: u32,
}

/// The `alpha` with `fi = alpha * fj^l`, if there is one.
pub(crate) fn power_ratio(fi: &Poly2, fj: &Poly2, l: u32) -> Option<FieldElement> {
    let pj = fj.pow(l);
    let (e, c) = pj.leading_term()?;
    let alpha = fi
        .coeff(e)
        .checked_div(c)
        .expect("leading coefficient is nonzero");
    if alpha.is_zero() {
        return None;
    }
    (pj.scale(&alpha) == *fi).then_some(alpha)
}

/// Finds `(i, j, alpha, l)` with `top(f_i) = alpha * top(f_j)^l`.
///
/// When both directions work (equal degrees, `l = 1`) the relation reducing
/// `f1` is returned. `Ok(None)` certifies that the map is not an automorphism.
pub fn leading_relation(phi: &PlaneMap) -> Result<Option<LeadingRelation>> {
    let (d1, d2) = match (phi.f1.total_deg(), phi.f2.total_deg()) {
        (Degree::Finite(a), Degree::Finite(b)) if a >= 1 && b >= 1 && a.max(b) >= 2 => (a, b),
        _ => {
            return Err(Error::PreconditionViolation(format!(
                "leading relation needs both degrees >= 1 and one >= 2, got {phi}"
            )))
        }
    };
    let top1 = phi.f1.top_homog()?;
    let top2 = phi.f2.top_homog()?;
    let mut orders = Vec::with_capacity(2);
    if d1 >= d2 && d1 % d2 == 0 {
        orders.push((Var::X1, Var::X2, d1 / d2));
    }
    if d2 >= d1 && d2 % d1 == 0 {
        orders.push((Var::X2, Var::X1, d2 / d1));
    }
    for (i, j, l) in orders {
        let (ti, tj) = if i == Var::X1 { (&top1, &top2) } else { (&top2, &top1) };
        if let Some(alpha) = power_ratio(ti, tj, l) {
            return Ok(Some(LeadingRelation { i, j, alpha, l }));
        }
    }
    Ok(None)
}

/// Peels elementary factors off by cancelling leading forms until the map is
/// affine.
pub fn tame_decompose(phi: &PlaneMap) -> std::result::Result<TameDecomposition, NotAutomorphism> {
    let spec = phi.spec();
    let mut cur = phi.clone();
    let mut peeled = Vec::new();
    let stuck = |reason, at: &PlaneMap| NotAutomorphism {
        reason,
        stuck_at: at.clone(),
    };
    loop {
        let (d1, d2) = (cur.f1.total_deg(), cur.f2.total_deg());
        if d1 <= Degree::Finite(0) || d2 <= Degree::Finite(0) {
            return Err(stuck(StuckReason::ConstantComponent, &cur));
        }
        if d1.max(d2) <= Degree::Finite(1) {
            break;
        }
        let rel = leading_relation(&cur)
            .expect("degrees checked above")
            .ok_or_else(|| stuck(StuckReason::NoLeadingRelation, &cur))?;
        let reduced = cur
            .component(rel.i)
            .sub_ref(&cur.component(rel.j).pow(rel.l).scale(&rel.alpha));
        cur = cur.with_component(rel.i, reduced);
        peeled.push(Factor::Elementary(ElementaryFactor::monomial(
            rel.i, rel.alpha, rel.l,
        )));
    }
    let affine = AffineFactor::from_linear_map(&cur)
        .ok_or_else(|| stuck(StuckReason::SingularLinearPart, &cur))?;
    let mut factors = Vec::with_capacity(peeled.len() + 1);
    if !affine.is_identity() {
        factors.push(Factor::Affine(affine));
    }
    factors.extend(peeled.into_iter().rev());
    Ok(TameDecomposition { spec, factors })
}

/// The inverse automorphism, through the tame decomposition.
pub fn invert(phi: &PlaneMap) -> Result<PlaneMap> {
    let dec = tame_decompose(phi).map_err(Error::NotAutomorphism)?;
    Ok(dec.inverse().compose_all())
}

/// `F = a * (x_i - b * x_j^l)^m`, the shape of the weighted leading form of a
/// non-univariate invariant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IcForm {
    pub a: FieldElement,
    pub b: FieldElement,
    pub i: Var,
    pub j: Var,
    pub l: u32,
    pub m: u32,
}

impl IcForm {
    pub fn expand(&self) -> Poly2 {
        let spec = self.a.spec();
        let xj_l = Poly2::monomial(self.b.clone(), exp_of(self.j, self.l));
        let base = &Poly2::var(spec, self.i) - &xj_l;
        base.pow(self.m).scale(&self.a)
    }
}

fn exp_of(v: Var, d: u32) -> (u32, u32) {
    match v {
        Var::X1 => (d, 0),
        Var::X2 => (0, d),
    }
}

/// Writes `f^{w(f)}` as `a * (x_i - b * x_j^l)^m`, trying `(i, j) = (1, 2)`
/// first. Every returned form has been checked by expansion.
pub fn ic_form(f: &Poly2) -> Result<Option<IcForm>> {
    if !f.is_non_univariate() {
        return Err(Error::PreconditionViolation(format!(
            "ic_form needs a non-univariate polynomial, got {f}"
        )));
    }
    let lead = f.w_top(&f.weight_of()?)?;
    for (i, j) in [(Var::X1, Var::X2), (Var::X2, Var::X1)] {
        let (Some(m), Some(lm)) = (lead.deg_in(i).finite(), lead.deg_in(j).finite()) else {
            continue;
        };
        if m == 0 || lm % m != 0 {
            continue;
        }
        let l = lm / m;
        let a = lead.coeff(exp_of(i, m));
        if a.is_zero() {
            continue;
        }
        for b in b_candidates(&lead, &a, i, j, l, m) {
            let form = IcForm {
                a: a.clone(),
                b,
                i,
                j,
                l,
                m,
            };
            if form.expand() == lead {
                return Ok(Some(form));
            }
        }
    }
    Ok(None)
}

/// Candidates for `b`. Writing `m = q * m'` with `q` the largest power of the
/// characteristic dividing `m`, the coefficient of `x_i^(m-q) x_j^(lq)` is
/// `-a m' b^q`, and `b^q = b` in a prime field. The root of
/// `b^m = (-1)^m coeff(x_j^(lm)) / a` is offered as well, with its negative
/// over `Q` when `m` is even.
fn b_candidates(lead: &Poly2, a: &FieldElement, i: Var, j: Var, l: u32, m: u32) -> Vec<FieldElement> {
    let spec = lead.spec();
    let mut out: Vec<FieldElement> = Vec::new();
    let p = spec.characteristic();
    let mut q = 1u32;
    if p > 0 {
        while (m / q) as u64 % p == 0 {
            q *= p as u32;
        }
    }
    let m_rest = FieldElement::from_i64(spec, (m / q) as i64);
    let (ei, ej) = (exp_of(i, m - q), exp_of(j, l * q));
    let mixed = lead.coeff((ei.0 + ej.0, ei.1 + ej.1));
    if let Ok(b) = (-&mixed).checked_div(&(a * &m_rest)) {
        out.push(b);
    }
    let sign = if m % 2 == 0 {
        FieldElement::one(spec)
    } else {
        -FieldElement::one(spec)
    };
    let c = &(&lead.coeff(exp_of(j, l * m)) * &sign) * &a.inverse().expect("a is nonzero");
    if let Some(r) = c.nth_root(m) {
        if m % 2 == 0 && r.as_rational().is_some() {
            out.push(-&r);
        }
        out.push(r);
    }
    out.retain(|b| !b.is_zero());
    out.dedup();
    out
}

/// Derives the leading relation of an automorphism from the normal form of
/// a non-univariate component of its inverse.
pub fn leading_relation_via_ic(phi: &PlaneMap) -> Result<LeadingRelation> {
    if phi.max_degree() < Degree::Finite(2) {
        return Err(Error::PreconditionViolation(format!(
            "needs max degree >= 2, got {phi}"
        )));
    }
    let inv = invert(phi)?;
    let g = [Var::X1, Var::X2]
        .into_iter()
        .map(|t| inv.component(t))
        .find(|g| g.is_non_univariate())
        .ok_or_else(|| {
            Error::Falsification(format!("inverse {inv} has no non-univariate component"))
        })?;
    let ic = ic_form(g)?
        .ok_or_else(|| Error::Falsification(format!("{g} has no normal form")))?;
    let rel = LeadingRelation {
        i: ic.i,
        j: ic.j,
        alpha: ic.b,
        l: ic.l,
    };
    let ti = phi.component(rel.i).top_homog()?;
    let tj = phi.component(rel.j).top_homog()?;
    if tj.pow(rel.l).scale(&rel.alpha) != ti {
        return Err(Error::Falsification(format!(
            "normal form of {g} does not give a leading relation for {phi}"
        )));
    }
    Ok(rel)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NotCoordinateReason {
    /// Univariate of degree at least two.
    UnivariateHighDegree,
    /// The weighted leading form is not of the shape `a (x_i - b x_j^l)^m`.
    NotIcShaped { leading_form: Poly2 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotCoordinate {
    pub reason: NotCoordinateReason,
    /// The polynomial reached after peeling.
    pub at: Poly2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoordinateOutcome {
    /// An automorphism whose first component is the input.
    Certificate {
        map: PlaneMap,
        peels: Vec<ElementaryFactor>,
    },
    NotCoordinate(NotCoordinate),
    /// The peel measure did not drop; inconclusive.
    DepthExceeded { at: Poly2 },
}

fn peel_measure(f: &Poly2) -> u32 {
    f.deg_in(Var::X1).finite().unwrap_or(0) + f.deg_in(Var::X2).finite().unwrap_or(0)
}

/// Decides whether `f` is a coordinate by peeling elementary substitutions
/// read off its normal form until it is linear.
pub fn coordinate_reduce(f: &Poly2) -> Result<CoordinateOutcome> {
    if f.total_deg() <= Degree::Finite(0) {
        return Err(Error::PreconditionViolation(format!(
            "coordinate_reduce needs a nonconstant polynomial, got {f}"
        )));
    }
    let spec = f.spec();
    let mut cur = f.clone();
    let mut peels: Vec<ElementaryFactor> = Vec::new();
    loop {
        if cur.total_deg() == Degree::Finite(1) {
            break;
        }
        if !cur.is_non_univariate() {
            return Ok(CoordinateOutcome::NotCoordinate(NotCoordinate {
                reason: NotCoordinateReason::UnivariateHighDegree,
                at: cur,
            }));
        }
        let Some(ic) = ic_form(&cur)? else {
            let leading_form = cur.w_top(&cur.weight_of()?)?;
            return Ok(CoordinateOutcome::NotCoordinate(NotCoordinate {
                reason: NotCoordinateReason::NotIcShaped { leading_form },
                at: cur,
            }));
        };
        let peel = ElementaryFactor::monomial(ic.i, ic.b, ic.l);
        let next = peel.to_map().apply(&cur)?;
        if peel_measure(&next) >= peel_measure(&cur) {
            return Ok(CoordinateOutcome::DepthExceeded { at: cur });
        }
        cur = next;
        peels.push(peel);
    }
    let x1 = Poly2::x1(spec);
    let x2 = Poly2::x2(spec);
    let companion = if cur.coeff((1, 0)).is_zero() { x1 } else { x2 };
    let affine = PlaneMap::new(cur, companion)?;
    // undo the peels: f = E^-1(cur) with E the composite of the peels
    let undo = peels
        .iter()
        .fold(PlaneMap::identity(spec), |acc, p| {
            acc.compose(&p.inverse().to_map()).expect("single field")
        });
    let map = undo.compose(&affine)?;
    if map.f1() != f {
        return Err(Error::Falsification(format!(
            "coordinate certificate {map} does not reproduce {f}"
        )));
    }
    Ok(CoordinateOutcome::Certificate { map, peels })
}
