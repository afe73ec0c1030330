//! The coordinate generating the invariant ring of a nontrivial plane action.
//!
//! Starting from `(f1, f2) = (x1, x2)`, write `sigma(f_i) = q_i = sum_j
//! q_{i,j} T^j` with top `T`-degree `m_i`. While neither `q_i` is free of
//! `T`, some ordering `(i, j)` has `m_i = l m_j` and
//! `top(q_{i,m_i}) = alpha * top(q_{j,m_j})^l`; replacing `f_i` by
//! `f_i - alpha f_j^l` keeps `(f1, f2)` an automorphism and strictly lowers
//! the lexicographic degree `(m_i, deg q_{i,m_i})`.

use std::fmt;

use crate::auto::{invert, power_ratio, tame_decompose, PlaneMap};
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::gaction::ValidatedCoAction;
use crate::poly::{Degree, Poly2, PolyT, Ring, UniPoly, Var, Z2Degree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionStep {
    pub i: Var,
    pub j: Var,
    pub alpha: FieldElement,
    pub l: u32,
    pub z2_before: Z2Degree,
    pub z2_after: Z2Degree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantResult {
    /// Generator of the invariant ring, normalized.
    pub f: Poly2,
    /// Completes `f` to the automorphism `(f, companion)`.
    pub companion: Poly2,
    pub trace: Vec<ReductionStep>,
}

/// Where a reduction stopped without a matching leading relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StuckState {
    pub f1: Poly2,
    pub f2: Poly2,
    pub z2_1: Z2Degree,
    pub z2_2: Z2Degree,
}

impl fmt::Display for StuckState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pair ({}, {}) with degrees {} and {}",
            self.f1, self.f2, self.z2_1, self.z2_2
        )
    }
}

/// Runs the degree reduction and returns the invariant coordinate with its
/// audit trail.
pub fn invariant_coordinate(sigma: &ValidatedCoAction) -> Result<InvariantResult> {
    if sigma.is_trivial() {
        return Err(Error::TrivialAction);
    }
    let spec = sigma.spec();
    let mut f = [Poly2::x1(spec), Poly2::x2(spec)];
    let mut q: [PolyT; 2] = [sigma.s1().clone(), sigma.s2().clone()];
    let mut trace = Vec::new();
    let (invariant, companion) = loop {
        if let Some(k) = (0..2).find(|&k| q[k].t_degree() == Some(0)) {
            break (f[k].clone(), f[1 - k].clone());
        }
        let z = [q[0].z2_deg()?, q[1].z2_deg()?];
        let (m1, m2) = (z[0].t_degree, z[1].t_degree);
        let mut orders: Vec<(usize, usize)> = Vec::with_capacity(2);
        if m1 % m2 == 0 {
            orders.push((0, 1));
        }
        if m2 % m1 == 0 {
            orders.push((1, 0));
        }
        // larger degree first, then x1
        orders.sort_by(|a, b| z[b.0].cmp(&z[a.0]).then(a.0.cmp(&b.0)));
        let step = orders.into_iter().find_map(|(i, j)| {
            let l = z[i].t_degree / z[j].t_degree;
            let ti = q[i].leading_coeff()?.top_homog().ok()?;
            let tj = q[j].leading_coeff()?.top_homog().ok()?;
            power_ratio(&ti, &tj, l).map(|alpha| (i, j, alpha, l))
        });
        let Some((i, j, alpha, l)) = step else {
            return Err(Error::StuckReduction(Box::new(StuckState {
                f1: f[0].clone(),
                f2: f[1].clone(),
                z2_1: z[0],
                z2_2: z[1],
            })));
        };
        f[i] = f[i].sub_ref(&f[j].pow(l).scale(&alpha));
        q[i] = q[i].sub_ref(&q[j].pow(l).scale(&alpha));
        let after = q[i].z2_deg()?;
        if after >= z[i] {
            return Err(Error::Falsification(format!(
                "reduction did not lower the degree: {} -> {after}",
                z[i]
            )));
        }
        trace.push(ReductionStep {
            i: var_of(i),
            j: var_of(j),
            alpha,
            l,
            z2_before: z[i],
            z2_after: after,
        });
    };
    let f = invariant.normalized();
    if !sigma.is_invariant(&f)? {
        return Err(Error::Falsification(format!("{f} is not invariant under {sigma}")));
    }
    let pair = PlaneMap::new(f.clone(), companion.clone())?;
    if let Err(e) = tame_decompose(&pair) {
        return Err(Error::Falsification(format!(
            "({f}, {companion}) is not an automorphism: {e}"
        )));
    }
    Ok(InvariantResult {
        f,
        companion,
        trace,
    })
}

fn var_of(k: usize) -> Var {
    if k == 0 {
        Var::X1
    } else {
        Var::X2
    }
}

/// Decides membership in `k[f]` by pulling back along `(f, companion)`.
#[derive(Debug, Clone)]
pub struct MembershipOracle {
    f: Poly2,
    inverse: PlaneMap,
}

impl MembershipOracle {
    pub fn new(res: &InvariantResult) -> Result<Self> {
        let pair = PlaneMap::new(res.f.clone(), res.companion.clone())?;
        Ok(MembershipOracle {
            f: res.f.clone(),
            inverse: invert(&pair)?,
        })
    }

    /// `Some(p)` with `g = p(f)`, or `None` when `g` is not in `k[f]`.
    pub fn member(&self, g: &Poly2) -> Result<Option<UniPoly>> {
        let pulled = self.inverse.apply(g)?;
        let Some(p) = pulled.to_univariate(Var::X1) else {
            return Ok(None);
        };
        if p.eval(&self.f) != *g {
            return Err(Error::Falsification(format!(
                "{} does not reconstruct {g}",
                p.display_in("t")
            )));
        }
        Ok(Some(p))
    }
}

pub fn membership(g: &Poly2, res: &InvariantResult) -> Result<Option<UniPoly>> {
    MembershipOracle::new(res)?.member(g)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionCount {
    pub degree: u32,
    /// Dimension of the invariants of degree at most `degree`, constants
    /// included.
    pub dimension: usize,
    /// `floor(degree / deg f) + 1`, the dimension of `k[f]` in that range.
    pub expected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub result: InvariantResult,
    pub max_degree: u32,
    pub dimensions: Vec<DimensionCount>,
    /// Basis of the nonconstant invariants of degree at most `max_degree`,
    /// each with its expression in `f` when it has one.
    pub members: Vec<(Poly2, Option<UniPoly>)>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.dimensions.iter().all(|d| d.dimension == d.expected)
            && self.members.iter().all(|(_, p)| p.is_some())
    }
}

/// Cross-checks the invariant coordinate against a direct linear solve for
/// all invariants of degree at most `max_degree`.
pub fn verify_theorem1(sigma: &ValidatedCoAction, max_degree: u32) -> Result<Report> {
    let result = invariant_coordinate(sigma)?;
    let deg_f = match result.f.total_deg() {
        Degree::Finite(d) if d >= 1 => d,
        _ => return Err(Error::Falsification("invariant coordinate is constant".into())),
    };
    let oracle = MembershipOracle::new(&result)?;
    let mut dimensions = Vec::new();
    let mut top_basis = Vec::new();
    for (d, basis) in (1..).zip(sigma.invariant_bases(max_degree)) {
        dimensions.push(DimensionCount {
            degree: d,
            dimension: basis.len() + 1,
            expected: (d / deg_f) as usize + 1,
        });
        top_basis = basis;
    }
    let members = top_basis
        .into_iter()
        .map(|g| {
            let p = oracle.member(&g)?;
            Ok((g, p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report {
        result,
        max_degree,
        dimensions,
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::gaction::CoAction;
    use crate::parse::{parse_poly2, parse_poly_t};

    fn valid(spec: FieldSpec, s1: &str, s2: &str) -> ValidatedCoAction {
        CoAction::new(parse_poly_t(s1, spec).unwrap(), parse_poly_t(s2, spec).unwrap())
            .unwrap()
            .validate()
            .unwrap()
    }

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn p(s: &str) -> Poly2 {
        parse_poly2(s, q()).unwrap()
    }

    #[test]
    fn already_invariant_generator() {
        let res = invariant_coordinate(&valid(q(), "x1", "x2 + (x1^3 - 2)*T")).unwrap();
        assert_eq!(res.f, p("x1"));
        assert_eq!(res.companion, p("x2"));
        assert!(res.trace.is_empty());
    }

    #[test]
    fn rational_worked_example() {
        let res = invariant_coordinate(&valid(q(), "x1 + 2*x2*T + T^2", "x2 + T")).unwrap();
        assert_eq!(res.f, p("x1 - x2^2"));
        assert_eq!(res.companion, p("x2"));
        assert_eq!(res.trace.len(), 1);
        let s = &res.trace[0];
        assert_eq!((s.i, s.j, s.l), (Var::X1, Var::X2, 2));
        assert!(s.alpha.is_one());
        assert_eq!(s.z2_before, Z2Degree { t_degree: 2, coeff_degree: 0 });
        assert_eq!(s.z2_after, Z2Degree { t_degree: 0, coeff_degree: 2 });
    }

    #[test]
    fn char_two_worked_example() {
        let f2 = FieldSpec::prime(2).unwrap();
        let sigma = valid(f2, "x1 + (x2 + x1^2)*T + T^2", "x2 + (x2^2 + x1^4)*T^2 + T^4");
        let res = invariant_coordinate(&sigma).unwrap();
        assert_eq!(res.f, parse_poly2("x2 + x1^2", f2).unwrap());
        assert_eq!(res.companion, parse_poly2("x1", f2).unwrap());
        assert_eq!(res.trace.len(), 1);
        let s = &res.trace[0];
        assert_eq!((s.i, s.j, s.l), (Var::X2, Var::X1, 2));
        assert!(s.alpha.is_one());
    }

    #[test]
    fn trivial_action_is_rejected() {
        let sigma = valid(q(), "x1", "x2");
        assert_eq!(invariant_coordinate(&sigma), Err(Error::TrivialAction));
        assert!(matches!(verify_theorem1(&sigma, 2), Err(Error::TrivialAction)));
    }

    #[test]
    fn membership_examples() {
        let res = invariant_coordinate(&valid(q(), "x1 + 2*x2*T + T^2", "x2 + T")).unwrap();
        let g = p("(x1 - x2^2)^3 + (x1 - x2^2)");
        assert_eq!(membership(&g, &res).unwrap().unwrap().display_in("t"), "t^3 + t");
        assert_eq!(membership(&res.f, &res).unwrap().unwrap().display_in("t"), "t");
        assert_eq!(membership(&p("x2"), &res).unwrap(), None);
    }

    #[test]
    fn verify_examples() {
        let r = verify_theorem1(&valid(q(), "x1", "x2 + x1*T"), 3).unwrap();
        let dims: Vec<usize> = r.dimensions.iter().map(|d| d.dimension).collect();
        // invariants of degree <= d are spanned by 1, x1, ..., x1^d
        assert_eq!(dims, vec![2, 3, 4]);
        assert!(r.passed());

        let r = verify_theorem1(&valid(q(), "x1 + T", "x2 + T"), 2).unwrap();
        let dims: Vec<usize> = r.dimensions.iter().map(|d| d.dimension).collect();
        assert_eq!(dims, vec![2, 3]);
        assert_eq!(r.members.len(), 2);
        let span: Vec<String> = r
            .members
            .iter()
            .map(|(_, p)| p.as_ref().unwrap().display_in("t"))
            .collect();
        assert!(r.passed(), "{span:?}");
        assert_eq!(r.result.f, p("x1 - x2"));
    }
}
