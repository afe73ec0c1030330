//! Algebraic invariants checked on random inputs.

use gaplane::auto::{coordinate_reduce, invert, tame_decompose, CoordinateOutcome};
use gaplane::gen::{random_action, random_tame, GenConfig};
use gaplane::parse::parse_poly2;
use gaplane::poly::Ring;
use gaplane::{FieldElement, FieldSpec, Poly2};
use num_bigint::BigInt;
use proptest::prelude::*;

fn field_strategy() -> impl Strategy<Value = FieldSpec> {
    prop::sample::select(vec![0u64, 2, 3, 5, 7, 2_305_843_009_213_693_951]).prop_map(|p| {
        if p == 0 {
            FieldSpec::rationals()
        } else {
            FieldSpec::prime(p).unwrap()
        }
    })
}

/// Sparse polynomials with coefficients that exercise both small and wide
/// integer paths.
fn poly_strategy(spec: FieldSpec) -> impl Strategy<Value = Poly2> {
    let coeff = (any::<i64>(), 1i64..1_000_000, any::<bool>());
    prop::collection::vec(((0u32..6, 0u32..6), coeff), 0..8).prop_map(move |terms| {
        Poly2::from_terms(
            spec,
            terms.into_iter().map(|(e, (n, d, wide))| {
                let n = if wide { BigInt::from(n) * BigInt::from(n) } else { BigInt::from(n % 7) };
                (e, FieldElement::from_ratio(spec, &n, &BigInt::from(d)).unwrap_or_else(|_| FieldElement::one(spec)))
            }),
        )
        .unwrap()
    })
}

fn field_and_polys(n: usize) -> impl Strategy<Value = (FieldSpec, Vec<Poly2>)> {
    field_strategy().prop_flat_map(move |f| (Just(f), prop::collection::vec(poly_strategy(f), n)))
}

/// Term-by-term product, independent of the accelerated multiplication.
fn schoolbook(a: &Poly2, b: &Poly2) -> Poly2 {
    let mut out = Poly2::zero(a.spec());
    for (ea, ca) in a.terms() {
        for (eb, cb) in b.terms() {
            out = out.add_ref(&Poly2::monomial(ca * cb, (ea.0 + eb.0, ea.1 + eb.1)));
        }
    }
    out
}

fn small(seed: u64, spec: FieldSpec) -> GenConfig {
    GenConfig::new(seed, spec, 1, 2, 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_schoolbook((_, ps) in field_and_polys(2)) {
        prop_assert_eq!(ps[0].mul_ref(&ps[1]), schoolbook(&ps[0], &ps[1]));
    }

    #[test]
    fn ring_laws((_, ps) in field_and_polys(3)) {
        let (a, b, c) = (&ps[0], &ps[1], &ps[2]);
        prop_assert_eq!(a.mul_ref(b), b.mul_ref(a));
        prop_assert_eq!(a.mul_ref(b).mul_ref(c), a.mul_ref(&b.mul_ref(c)));
        prop_assert_eq!(a.mul_ref(&b.add_ref(c)), a.mul_ref(b).add_ref(&a.mul_ref(c)));
    }

    #[test]
    fn canonical_text_round_trips((f, ps) in field_and_polys(1)) {
        prop_assert_eq!(parse_poly2(&ps[0].to_string(), f).unwrap(), ps[0].clone());
    }

    #[test]
    fn inverse_is_two_sided(seed in any::<u64>(), f in field_strategy()) {
        let phi = random_tame(&GenConfig::new(seed, f, 3, 2, 2).unwrap());
        let inv = invert(&phi).unwrap();
        prop_assert!(phi.compose(&inv).unwrap().is_identity());
        prop_assert!(inv.compose(&phi).unwrap().is_identity());
        prop_assert_eq!(invert(&inv).unwrap(), phi.clone());
        prop_assert_eq!(tame_decompose(&phi).unwrap().compose_all(), phi);
    }

    #[test]
    fn coordinates_reduce_to_a_variable(seed in any::<u64>(), f in field_strategy()) {
        let phi = random_tame(&GenConfig::new(seed, f, 3, 2, 2).unwrap());
        for c in [phi.f1(), phi.f2()] {
            match coordinate_reduce(c).unwrap() {
                CoordinateOutcome::Certificate { map, .. } => {
                    prop_assert_eq!(map.f1(), c);
                    prop_assert!(tame_decompose(&map).is_ok());
                }
                other => prop_assert!(false, "{} not recognized: {:?}", c, other),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn action_is_a_ring_homomorphism(seed in any::<u64>(), f in field_strategy(), (a, b) in (0i64..4, 0i64..4)) {
        let sigma = random_action(&small(seed, f)).unwrap();
        let g = Poly2::from_int_terms(f, &[((1, 0), 1), ((0, 1), a), ((1, 1), b)]);
        let h = Poly2::from_int_terms(f, &[((0, 2), 1), ((0, 0), a + b)]);
        let lhs = sigma.apply_action(&g.mul_ref(&h)).unwrap();
        let rhs = sigma.apply_action(&g).unwrap().mul_ref(&sigma.apply_action(&h).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn top_coefficients_are_invariant(seed in any::<u64>(), f in field_strategy(), i in 1u32..3, j in 0u32..3) {
        let sigma = random_action(&small(seed, f)).unwrap();
        let a = Poly2::from_int_terms(f, &[((i, j), 1), ((0, 1), 1)]);
        let top = sigma.top_coefficient(&a).unwrap();
        prop_assert!(sigma.is_invariant(&top).unwrap());
    }

    #[test]
    fn conjugation_transports_invariants(seed in any::<u64>(), f in field_strategy()) {
        let sigma = random_action(&small(seed, f)).unwrap();
        let phi = random_tame(&small(seed ^ 0x5eed, f));
        let conj = sigma.conjugate(&phi).unwrap();
        let g = sigma.find_invariant(24).unwrap();
        // phi_T . sigma . phi^-1 fixes g(phi1, phi2)
        let moved = phi.apply(&g).unwrap();
        prop_assert!(conj.is_invariant(&moved).unwrap(), "{} not invariant under {}", moved, conj);
    }
}
