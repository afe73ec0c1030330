//! Additive group actions on the plane, given as co-actions
//! `sigma: k[x1, x2] -> k[x1, x2][T]` by the images of `x1` and `x2`.
//!
//! A co-action is an action iff `sigma(a)|_{T=0} = a` and
//! `sum_i sigma(a_i) U^i = sum_i a_i (T + U)^i` where `sigma(a) = sum_i a_i T^i`.
//! Both sides of the second identity are algebra homomorphisms in `a`, so it
//! is enough to check it on `x1` and `x2`. Only [`ValidatedCoAction`] values
//! are accepted by operations that rely on the identities.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Deref;

use crate::auto::{invert, PlaneMap};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::Echelon;
use crate::poly::{Exp, Poly2, PolyT, PolyTU, Ring, UniPoly, Var};

/// An unchecked co-action `x1 -> s1`, `x2 -> s2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoAction {
    s1: PolyT,
    s2: PolyT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    /// `sigma(a)|_{T=0} = a`.
    A1,
    /// `sum sigma(a_i) U^i = sum a_i (T + U)^i`.
    A2,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::A1 => "A1",
            Axiom::A2 => "A2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub generator: Var,
    /// For A1, `a_0 - a`; for A2, right-hand side minus left-hand side.
    pub difference: PolyTU,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fails on {} (difference {})",
            self.axiom,
            self.generator.name(),
            self.difference
        )
    }
}

impl CoAction {
    pub fn new(s1: PolyT, s2: PolyT) -> Result<Self> {
        s1.spec().check_same(&s2.spec())?;
        Ok(CoAction { s1, s2 })
    }

    pub fn spec(&self) -> FieldSpec {
        self.s1.spec()
    }

    pub fn s1(&self) -> &PolyT {
        &self.s1
    }

    pub fn s2(&self) -> &PolyT {
        &self.s2
    }

    pub fn image_of(&self, v: Var) -> &PolyT {
        match v {
            Var::X1 => &self.s1,
            Var::X2 => &self.s2,
        }
    }

    /// `sigma(f) = f(s1, s2)`.
    pub fn apply_action(&self, f: &Poly2) -> Result<PolyT> {
        Ok(f.subst(&self.s1, &self.s2)?)
    }

    /// Both sides of A2 for the generator `v`, as `(left, right)`.
    pub fn a2_sides(&self, v: Var) -> (PolyTU, PolyTU) {
        let s = self.image_of(v);
        let mut left = PolyTU::zero(self.spec());
        for (&i, a_i) in s.coeffs() {
            left = left.add_ref(&a_i.subst_unchecked(&self.s1, &self.s2).times_u_pow(i));
        }
        (left, s.shift_t_by_u())
    }

    pub fn validate(self) -> std::result::Result<ValidatedCoAction, AxiomViolation> {
        for v in [Var::X1, Var::X2] {
            let x = Poly2::var(self.spec(), v);
            let a0 = self.image_of(v).coeff(0);
            if a0 != x {
                return Err(AxiomViolation {
                    axiom: Axiom::A1,
                    generator: v,
                    difference: PolyT::from_poly2(&(&a0 - &x)).times_u_pow(0),
                });
            }
        }
        for v in [Var::X1, Var::X2] {
            let (left, right) = self.a2_sides(v);
            if left != right {
                return Err(AxiomViolation {
                    axiom: Axiom::A2,
                    generator: v,
                    difference: &right - &left,
                });
            }
        }
        Ok(ValidatedCoAction(self))
    }
}

impl fmt::Display for CoAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.s1, self.s2)
    }
}

/// A co-action known to satisfy both axioms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValidatedCoAction(CoAction);

impl Deref for ValidatedCoAction {
    type Target = CoAction;

    fn deref(&self) -> &CoAction {
        &self.0
    }
}

impl fmt::Display for ValidatedCoAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl ValidatedCoAction {
    pub fn into_inner(self) -> CoAction {
        self.0
    }

    pub fn is_trivial(&self) -> bool {
        let spec = self.spec();
        self.s1.as_poly2() == Some(Poly2::x1(spec)) && self.s2.as_poly2() == Some(Poly2::x2(spec))
    }

    pub fn is_invariant(&self, f: &Poly2) -> Result<bool> {
        Ok(self.apply_action(f)?.as_poly2().as_ref() == Some(f))
    }

    /// The automorphism `sigma_t` obtained by setting `T = t` for an
    /// invariant `t`.
    pub fn evaluate(&self, t: &Poly2) -> Result<PlaneMap> {
        if !self.is_invariant(t)? {
            return Err(Error::NotInvariantParameter(t.to_string()));
        }
        PlaneMap::new(self.s1.eval_t_unchecked(t), self.s2.eval_t_unchecked(t))
    }

    /// The leading `T`-coefficient of `sigma(a)`, which is always invariant.
    pub fn top_coefficient(&self, a: &Poly2) -> Result<Poly2> {
        let image = self.apply_action(a)?;
        let lead = image
            .leading_coeff()
            .cloned()
            .unwrap_or_else(|| Poly2::zero(self.spec()));
        if !self.is_invariant(&lead)? {
            return Err(Error::Falsification(format!(
                "top coefficient {lead} of sigma({a}) is not invariant under {self}"
            )));
        }
        Ok(lead)
    }

    /// A basis of the nonconstant part of the invariants of total degree at
    /// most `d`: together with `1` these span the invariant subspace.
    pub fn invariant_basis(&self, d: u32) -> Vec<Poly2> {
        InvariantSolver::new(self).basis(d)
    }

    /// `invariant_basis(d)` for `d = 1..=dmax`, sharing monomial images.
    pub fn invariant_bases(&self, dmax: u32) -> Vec<Vec<Poly2>> {
        let mut solver = InvariantSolver::new(self);
        (1..=dmax).map(|d| solver.basis(d)).collect()
    }

    /// A nonconstant invariant of least degree, with zero constant term and
    /// leading coefficient 1.
    pub fn find_invariant(&self, dmax: u32) -> Result<Poly2> {
        if self.is_trivial() {
            return Err(Error::TrivialAction);
        }
        let mut solver = InvariantSolver::new(self);
        for d in 1..=dmax {
            let basis = solver.basis(d);
            if let Some(g) = basis
                .into_iter()
                .min_by_key(|g| (g.total_deg(), g.num_terms()))
            {
                return Ok(g.normalized());
            }
        }
        Err(Error::DegreeCapExceeded(dmax))
    }

    /// The conjugate action `phi_T . sigma . phi^-1`, where `phi_T` applies
    /// `phi` to every coefficient in `k[x1, x2]`.
    pub fn conjugate(&self, phi: &PlaneMap) -> Result<ValidatedCoAction> {
        self.spec().check_same(&phi.spec())?;
        let inv = invert(phi)?;
        let image = |v: Var| -> PolyT {
            inv.component(v)
                .subst_unchecked(&self.s1, &self.s2)
                .map_coeffs(|c| c.subst_unchecked(phi.f1(), phi.f2()))
        };
        let conj = CoAction::new(image(Var::X1), image(Var::X2))?;
        conj.validate().map_err(|v| {
            Error::Falsification(format!("conjugate of a valid action fails validation: {v}"))
        })
    }
}

/// Sets up `sigma(a) - a = 0` for a general `a` of bounded degree, reusing
/// the images of monomials across degrees.
struct InvariantSolver<'a> {
    action: &'a ValidatedCoAction,
    images: HashMap<Exp, PolyT>,
}

impl<'a> InvariantSolver<'a> {
    fn new(action: &'a ValidatedCoAction) -> Self {
        InvariantSolver {
            action,
            images: HashMap::new(),
        }
    }

    fn image(&mut self, e: Exp) -> PolyT {
        if let Some(p) = self.images.get(&e) {
            return p.clone();
        }
        let spec = self.action.spec();
        let p = match e {
            (0, 0) => PolyT::one(spec),
            (a, b) if a > 0 => self.image((a - 1, b)).mul_ref(&self.action.s1),
            (a, b) => self.image((a, b - 1)).mul_ref(&self.action.s2),
        };
        self.images.insert(e, p.clone());
        p
    }

    fn basis(&mut self, d: u32) -> Vec<Poly2> {
        let spec = self.action.spec();
        let monomials: Vec<Exp> = (1..=d)
            .flat_map(|n| (0..=n).rev().map(move |a| (a, n - a)))
            .collect();
        // equations indexed by (T-power, monomial); T^0 rows vanish by A1
        let mut rows: BTreeMap<(u32, Exp), Vec<(usize, FieldElement)>> = BTreeMap::new();
        for (col, &e) in monomials.iter().enumerate() {
            let image = self.image(e);
            for (&t, c) in image.coeffs() {
                if t == 0 {
                    continue;
                }
                for (&m, k) in c.terms() {
                    rows.entry((t, m)).or_default().push((col, k.clone()));
                }
            }
        }
        let mut ech = Echelon::new(spec, monomials.len());
        for entries in rows.into_values() {
            let mut row = vec![FieldElement::zero(spec); monomials.len()];
            for (col, k) in entries {
                row[col] = k;
            }
            ech.push(row);
            if ech.is_full_rank() {
                return Vec::new();
            }
        }
        ech.nullspace()
            .into_iter()
            .map(|v| {
                Poly2::from_terms(spec, monomials.iter().copied().zip(v)).expect("single field")
            })
            .collect()
    }
}

/// `x1 -> x1`, `x2 -> x2 + sum p(x1) T^power`, where every power is a power
/// of the characteristic (only `T^1` in characteristic zero).
pub fn basic_action(spec: FieldSpec, terms: &[(u32, UniPoly)]) -> Result<ValidatedCoAction> {
    let p = spec.characteristic();
    let mut s2 = PolyT::from_poly2(&Poly2::x2(spec));
    for (power, addend) in terms {
        spec.check_same(&addend.spec())?;
        let allowed = match p {
            0 => *power == 1,
            _ => {
                let mut q = 1u64;
                while q < *power as u64 {
                    q *= p;
                }
                q == *power as u64
            }
        };
        if !allowed {
            return Err(Error::InvalidExponent {
                power: *power,
                characteristic: p,
            });
        }
        s2 = s2.add_ref(&PolyT::monomial_t(addend.in_var(Var::X1), *power));
    }
    let action = CoAction::new(PolyT::from_poly2(&Poly2::x1(spec)), s2)?;
    action
        .validate()
        .map_err(|v| Error::Falsification(format!("basic action fails validation: {v}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auto::tame_decompose;
    use crate::parse::{parse_poly2, parse_poly_t, parse_poly_tu};

    fn action(spec: FieldSpec, s1: &str, s2: &str) -> CoAction {
        CoAction::new(parse_poly_t(s1, spec).unwrap(), parse_poly_t(s2, spec).unwrap()).unwrap()
    }

    fn valid(spec: FieldSpec, s1: &str, s2: &str) -> ValidatedCoAction {
        action(spec, s1, s2).validate().unwrap()
    }

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn f2() -> FieldSpec {
        FieldSpec::prime(2).unwrap()
    }

    fn p(s: &str) -> Poly2 {
        parse_poly2(s, q()).unwrap()
    }

    #[test]
    fn apply_action_examples() {
        let s = action(q(), "x1", "x2 + x1*T");
        assert_eq!(s.apply_action(&p("x2")).unwrap(), parse_poly_t("x2 + x1*T", q()).unwrap());
        let s = action(q(), "x1 + 2*x2*T + T^2", "x2 + T");
        assert_eq!(
            s.apply_action(&p("x1 - x2^2")).unwrap(),
            PolyT::from_poly2(&p("x1 - x2^2"))
        );
        assert_eq!(s.apply_action(&p("7/3")).unwrap(), PolyT::from_poly2(&p("7/3")));
    }

    #[test]
    fn validate_examples() {
        assert!(action(f2(), "x1", "x2 + x1*T + T^2").validate().is_ok());
        let v = action(q(), "x1", "x2 + T^2").validate().unwrap_err();
        assert_eq!(v.axiom, Axiom::A2);
        assert_eq!(v.generator, Var::X2);
        assert_eq!(v.difference, parse_poly_tu("2*T*U", q()).unwrap());
        assert!(action(q(), "x1", "x2").validate().is_ok());
    }

    #[test]
    fn validate_rejects_a1_and_cubic_in_char_2() {
        let v = action(q(), "x1 + 1", "x2 + T").validate().unwrap_err();
        assert_eq!((v.axiom, v.generator), (Axiom::A1, Var::X1));
        assert_eq!(v.difference.to_string(), "1");
        let v = action(f2(), "x1", "x2 + T^3").validate().unwrap_err();
        assert_eq!(v.axiom, Axiom::A2);
        assert_eq!(v.difference.to_string(), "T^2*U + T*U^2");
        let v = action(q(), "x1 + x2*T", "x2 + T").validate().unwrap_err();
        assert_eq!((v.axiom, v.generator), (Axiom::A2, Var::X1));
    }

    #[test]
    fn triviality() {
        assert!(valid(q(), "x1", "x2").is_trivial());
        assert!(!valid(q(), "x1", "x2 + x1*T").is_trivial());
        assert!(!valid(q(), "x1 + T", "x2 + T").is_trivial());
    }

    #[test]
    fn evaluate_examples() {
        let s = valid(q(), "x1 + 2*x2*T + T^2", "x2 + T");
        assert!(s.evaluate(&p("0")).unwrap().is_identity());
        let t = p("x1 - x2^2");
        let e = s.evaluate(&t).unwrap();
        assert_eq!(e.f1(), &p("x1 + 2*x2*(x1 - x2^2) + (x1 - x2^2)^2"));
        assert_eq!(e.f2(), &p("x2 + x1 - x2^2"));
        assert!(tame_decompose(&e).is_ok());
        let s = valid(q(), "x1", "x2 + x1*T");
        assert_eq!(s.evaluate(&p("x1")).unwrap(), PlaneMap::new(p("x1"), p("x2 + x1^2")).unwrap());
        assert!(matches!(s.evaluate(&p("x2")), Err(Error::NotInvariantParameter(_))));
    }

    #[test]
    fn top_coefficient_examples() {
        let s = valid(q(), "x1 + 2*x2*T + T^2", "x2 + T");
        assert_eq!(s.top_coefficient(&p("x1")).unwrap(), p("1"));
        assert_eq!(s.top_coefficient(&p("x1*x2")).unwrap(), p("1"));
        let s = valid(q(), "x1", "x2 + x1*T");
        assert_eq!(s.top_coefficient(&p("x2")).unwrap(), p("x1"));
        assert_eq!(s.top_coefficient(&p("x1^2")).unwrap(), p("x1^2"));
    }

    #[test]
    fn find_invariant_examples() {
        let s = valid(q(), "x1", "x2 + x1*T");
        assert_eq!(s.find_invariant(4).unwrap(), p("x1"));
        let s = valid(q(), "x1 + T", "x2 + T");
        assert_eq!(s.find_invariant(4).unwrap(), p("x1 - x2"));
        let s = valid(q(), "x1 + 2*x2*T + T^2", "x2 + T");
        assert!(s.invariant_basis(1).is_empty());
        assert_eq!(s.find_invariant(4).unwrap(), p("x1 - x2^2"));
        assert_eq!(s.find_invariant(1), Err(Error::DegreeCapExceeded(1)));
        assert_eq!(valid(q(), "x1", "x2").find_invariant(3), Err(Error::TrivialAction));
    }

    #[test]
    fn basic_action_examples() {
        let a = basic_action(q(), &[(1, p("x1^2").to_univariate(Var::X1).unwrap())]).unwrap();
        assert_eq!(*a, action(q(), "x1", "x2 + x1^2*T"));
        let x1 = parse_poly2("x1", f2()).unwrap().to_univariate(Var::X1).unwrap();
        let one = UniPoly::monomial(FieldElement::one(f2()), 0);
        let a = basic_action(f2(), &[(1, x1), (2, one.clone())]).unwrap();
        assert_eq!(*a, action(f2(), "x1", "x2 + x1*T + T^2"));
        let c = UniPoly::monomial(FieldElement::one(q()), 0);
        assert_eq!(
            basic_action(q(), &[(2, c)]),
            Err(Error::InvalidExponent { power: 2, characteristic: 0 })
        );
        assert!(matches!(
            basic_action(f2(), &[(3, one.clone())]),
            Err(Error::InvalidExponent { power: 3, .. })
        ));
        assert!(basic_action(f2(), &[(0, one)]).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let s = valid(q(), "x1", "x2 + T");
        assert_eq!(s.conjugate(&PlaneMap::identity(q())).unwrap(), s);

        let sigma = valid(f2(), "x1", "x2 + x1*T + T^2");
        let phi = PlaneMap::new(
            parse_poly2("x2 + x1^2", f2()).unwrap(),
            parse_poly2("x1", f2()).unwrap(),
        )
        .unwrap();
        let conj = sigma.conjugate(&phi).unwrap();
        assert_eq!(
            *conj,
            action(f2(), "x1 + (x2 + x1^2)*T + T^2", "x2 + (x2^2 + x1^4)*T^2 + T^4")
        );

        let trivial = valid(q(), "x1", "x2");
        let phi = PlaneMap::new(p("x2 + x1^3"), p("x1 + 1")).unwrap();
        assert!(trivial.conjugate(&phi).unwrap().is_trivial());
    }

    #[test]
    fn conjugation_transports_invariants() {
        let sigma = valid(q(), "x1", "x2 + (x1^2 + 1)*T");
        let phi = PlaneMap::new(p("x2 - x1^2"), p("2*x1 + 3")).unwrap();
        let conj = sigma.conjugate(&phi).unwrap();
        let moved = phi.apply(&p("x1^3 - x1")).unwrap();
        assert!(conj.is_invariant(&moved).unwrap());
    }
}
