//! Seeded generation of tame automorphisms and valid actions.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auto::{AffineFactor, ElementaryFactor, PlaneMap};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::gaction::{basic_action, ValidatedCoAction};
use crate::poly::{UniPoly, Var};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    #[serde(with = "crate::json::field_spec")]
    pub field: FieldSpec,
    pub max_factors: u32,
    pub max_elementary_degree: u32,
    pub max_coefficient_height: u32,
}

impl GenConfig {
    pub fn new(
        seed: u64,
        field: FieldSpec,
        max_factors: u32,
        max_elementary_degree: u32,
        max_coefficient_height: u32,
    ) -> Result<Self> {
        let cfg = GenConfig {
            seed,
            field,
            max_factors,
            max_elementary_degree,
            max_coefficient_height,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [
            ("max_factors", self.max_factors),
            ("max_elementary_degree", self.max_elementary_degree),
            ("max_coefficient_height", self.max_coefficient_height),
        ] {
            if v == 0 {
                return Err(Error::PreconditionViolation(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Config for item `index` of a corpus.
    pub fn nth(&self, index: u64) -> GenConfig {
        GenConfig {
            seed: self.seed.wrapping_add(index),
            ..self.clone()
        }
    }
}

struct Sampler<'a> {
    cfg: &'a GenConfig,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    fn new(cfg: &'a GenConfig) -> Self {
        Sampler {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        }
    }

    fn height(&self) -> i64 {
        i64::from(self.cfg.max_coefficient_height)
    }

    /// Any element of height at most the bound, zero included. Over the
    /// rationals, denominators are drawn up to the same height.
    fn coefficient(&mut self) -> FieldElement {
        let h = self.height();
        let num = self.rng.gen_range(-h..=h);
        let den = match self.cfg.field.modulus() {
            None if self.rng.gen_bool(0.25) => self.rng.gen_range(1..=h),
            _ => 1,
        };
        FieldElement::from_ratio(self.cfg.field, &BigInt::from(num), &BigInt::from(den))
            .expect("denominator is a unit")
    }

    fn nonzero(&mut self) -> FieldElement {
        loop {
            let c = self.coefficient();
            if !c.is_zero() {
                return c;
            }
        }
    }

    fn univariate(&mut self, min_degree: u32) -> UniPoly {
        let deg = self.rng.gen_range(min_degree..=self.cfg.max_elementary_degree.max(min_degree));
        let mut coeffs: Vec<FieldElement> = (0..deg).map(|_| self.coefficient()).collect();
        coeffs.push(self.nonzero());
        UniPoly::new(self.cfg.field, coeffs).expect("coefficients share the field")
    }

    fn elementary(&mut self, target: Var) -> PlaneMap {
        ElementaryFactor::new(target, self.univariate(1)).to_map()
    }

    fn affine(&mut self) -> PlaneMap {
        loop {
            let matrix = [
                [self.coefficient(), self.coefficient()],
                [self.coefficient(), self.coefficient()],
            ];
            let translation = [self.coefficient(), self.coefficient()];
            if let Ok(a) = AffineFactor::new(matrix, translation) {
                return a.to_map();
            }
        }
    }

    fn tame(&mut self) -> PlaneMap {
        let n = self.rng.gen_range(1..=self.cfg.max_factors);
        let mut phi = self.elementary(Var::X1);
        let mut last = Var::X1;
        for _ in 1..n {
            let factor = if self.rng.gen_ratio(1, 3) {
                self.affine()
            } else {
                last = last.other();
                self.elementary(last)
            };
            phi = phi.compose(&factor).expect("same field");
        }
        phi
    }

    /// Nonempty list of `(T-power, coefficient)` admissible for the field.
    fn frobenius_terms(&mut self) -> Vec<(u32, UniPoly)> {
        let powers: Vec<u32> = match self.cfg.field.modulus() {
            None => vec![1],
            // T-exponents are u32, so wider primes only get the linear term
            Some(p) => match u32::try_from(p) {
                Ok(e) => vec![1, e],
                Err(_) => vec![1],
            },
        };
        loop {
            let mut terms = Vec::new();
            for &e in &powers {
                if self.rng.gen_bool(0.5) {
                    terms.push((e, self.univariate(0)));
                }
            }
            if !terms.is_empty() {
                return terms;
            }
        }
    }
}

/// A product of random elementary and affine factors; a pure function of
/// `cfg`. The first factor is always elementary in `x1`.
pub fn random_tame(cfg: &GenConfig) -> PlaneMap {
    Sampler::new(cfg).tame()
}

/// A Frobenius-additive basic action conjugated by a random tame map.
pub fn random_action(cfg: &GenConfig) -> Result<ValidatedCoAction> {
    let mut s = Sampler::new(cfg);
    let terms = s.frobenius_terms();
    let phi = s.tame();
    basic_action(cfg.field, &terms)?.conjugate(&phi)
}

/// The first `count` automorphisms of the corpus rooted at `cfg`.
pub fn tame_corpus(cfg: &GenConfig, count: usize) -> Vec<(GenConfig, PlaneMap)> {
    (0..count as u64)
        .map(|i| {
            let c = cfg.nth(i);
            let phi = random_tame(&c);
            (c, phi)
        })
        .collect()
}

pub fn action_corpus(cfg: &GenConfig, count: usize) -> Result<Vec<(GenConfig, ValidatedCoAction)>> {
    (0..count as u64)
        .map(|i| {
            let c = cfg.nth(i);
            random_action(&c).map(|a| (c, a))
        })
        .collect()
}
