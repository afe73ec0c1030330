//! JSON forms of the public objects. Polynomials travel as text in the
//! parser's syntax; fields as `"q"` or `"fp:<p>"`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::auto::{
    AffineFactor, CoordinateOutcome, ElementaryFactor, Factor, IcForm, LeadingRelation,
    NotAutomorphism, NotCoordinateReason, PlaneMap, TameDecomposition,
};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::gaction::{AxiomViolation, CoAction, ValidatedCoAction};
use crate::gen::GenConfig;
use crate::parse::{parse_poly2, parse_poly_t};
use crate::poly::{Ring, Var, Z2Degree};
use crate::rentschler::{InvariantResult, Report, ReductionStep, StuckState};

/// Serde adapter storing a [`FieldSpec`] as its designator.
pub mod field_spec {
    use crate::field::FieldSpec;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(spec: &FieldSpec, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(spec)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FieldSpec, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn var_index(v: Var) -> u8 {
    v.index()
}

fn z2_pair(z: Z2Degree) -> [u32; 2] {
    [z.t_degree, z.coeff_degree]
}

fn parse_element(text: &str, spec: FieldSpec) -> Result<FieldElement> {
    let p = parse_poly2(text, spec)?;
    p.as_constant()
        .ok_or_else(|| Error::PreconditionViolation(format!("expected a constant, got {text}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaneMapJson {
    pub field: String,
    pub f1: String,
    pub f2: String,
}

impl PlaneMapJson {
    pub fn from_map(phi: &PlaneMap) -> Self {
        PlaneMapJson {
            field: phi.spec().to_string(),
            f1: phi.f1().to_string(),
            f2: phi.f2().to_string(),
        }
    }

    pub fn to_map(&self) -> Result<PlaneMap> {
        let spec: FieldSpec = self.field.parse()?;
        PlaneMap::new(parse_poly2(&self.f1, spec)?, parse_poly2(&self.f2, spec)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoActionJson {
    pub field: String,
    pub s1: String,
    pub s2: String,
}

impl CoActionJson {
    pub fn from_action(sigma: &CoAction) -> Self {
        CoActionJson {
            field: sigma.spec().to_string(),
            s1: sigma.s1().to_string(),
            s2: sigma.s2().to_string(),
        }
    }

    pub fn to_action(&self) -> Result<CoAction> {
        let spec: FieldSpec = self.field.parse()?;
        CoAction::new(parse_poly_t(&self.s1, spec)?, parse_poly_t(&self.s2, spec)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorJson {
    /// `target -> target + addend`, the addend written in the other variable.
    Elementary { target: String, addend: String },
    Affine {
        matrix: [[String; 2]; 2],
        translation: [String; 2],
    },
}

impl FactorJson {
    pub fn from_factor(f: &Factor) -> Self {
        match f {
            Factor::Elementary(e) => FactorJson::Elementary {
                target: e.target.name().to_string(),
                addend: e.addend.display_in(e.target.other().name()),
            },
            Factor::Affine(a) => {
                let m = a.matrix();
                let t = a.translation();
                FactorJson::Affine {
                    matrix: [
                        [m[0][0].to_string(), m[0][1].to_string()],
                        [m[1][0].to_string(), m[1][1].to_string()],
                    ],
                    translation: [t[0].to_string(), t[1].to_string()],
                }
            }
        }
    }

    pub fn to_factor(&self, spec: FieldSpec) -> Result<Factor> {
        match self {
            FactorJson::Elementary { target, addend } => {
                let target = match target.as_str() {
                    "x1" => Var::X1,
                    "x2" => Var::X2,
                    other => {
                        return Err(Error::PreconditionViolation(format!(
                            "unknown elementary target {other}"
                        )))
                    }
                };
                let addend = parse_poly2(addend, spec)?
                    .to_univariate(target.other())
                    .ok_or_else(|| {
                        Error::PreconditionViolation(format!(
                            "addend must involve only {}",
                            target.other().name()
                        ))
                    })?;
                Ok(Factor::Elementary(ElementaryFactor::new(target, addend)))
            }
            FactorJson::Affine {
                matrix,
                translation,
            } => {
                let e = |s: &String| parse_element(s, spec);
                let m = [
                    [e(&matrix[0][0])?, e(&matrix[0][1])?],
                    [e(&matrix[1][0])?, e(&matrix[1][1])?],
                ];
                let t = [e(&translation[0])?, e(&translation[1])?];
                Ok(Factor::Affine(AffineFactor::new(m, t)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub field: String,
    pub factors: Vec<FactorJson>,
}

impl DecompositionJson {
    pub fn from_decomposition(d: &TameDecomposition) -> Self {
        DecompositionJson {
            field: d.spec().to_string(),
            factors: d.factors().iter().map(FactorJson::from_factor).collect(),
        }
    }

    pub fn to_decomposition(&self) -> Result<TameDecomposition> {
        let spec: FieldSpec = self.field.parse()?;
        let factors = self
            .factors
            .iter()
            .map(|f| f.to_factor(spec))
            .collect::<Result<Vec<_>>>()?;
        Ok(TameDecomposition::new(spec, factors))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepJson {
    pub i: u8,
    pub j: u8,
    pub alpha: String,
    pub l: u32,
    pub z2_before: [u32; 2],
    pub z2_after: [u32; 2],
}

impl StepJson {
    pub fn from_step(s: &ReductionStep) -> Self {
        StepJson {
            i: var_index(s.i),
            j: var_index(s.j),
            alpha: s.alpha.to_string(),
            l: s.l,
            z2_before: z2_pair(s.z2_before),
            z2_after: z2_pair(s.z2_after),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantResultJson {
    pub field: String,
    pub f: String,
    pub companion: String,
    pub trace: Vec<StepJson>,
}

impl InvariantResultJson {
    pub fn from_result(r: &InvariantResult) -> Self {
        InvariantResultJson {
            field: r.f.spec().to_string(),
            f: r.f.to_string(),
            companion: r.companion.to_string(),
            trace: r.trace.iter().map(StepJson::from_step).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionJson {
    pub degree: u32,
    pub dimension: usize,
    pub expected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberJson {
    pub g: String,
    /// `p(t)` with `g = p(f)`, or null when `g` is not in `k[f]`.
    pub p: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportJson {
    pub max_degree: u32,
    pub passed: bool,
    pub dimensions: Vec<DimensionJson>,
    pub members: Vec<MemberJson>,
}

impl ReportJson {
    pub fn from_report(r: &Report) -> Self {
        ReportJson {
            max_degree: r.max_degree,
            passed: r.passed(),
            dimensions: r
                .dimensions
                .iter()
                .map(|d| DimensionJson {
                    degree: d.degree,
                    dimension: d.dimension,
                    expected: d.expected,
                })
                .collect(),
            members: r
                .members
                .iter()
                .map(|(g, p)| MemberJson {
                    g: g.to_string(),
                    p: p.as_ref().map(|p| p.display_in("t")),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeadingRelationJson {
    pub i: u8,
    pub j: u8,
    pub alpha: String,
    pub l: u32,
}

impl LeadingRelationJson {
    pub fn from_relation(r: &LeadingRelation) -> Self {
        LeadingRelationJson {
            i: var_index(r.i),
            j: var_index(r.j),
            alpha: r.alpha.to_string(),
            l: r.l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IcFormJson {
    pub a: String,
    pub b: String,
    pub i: u8,
    pub j: u8,
    pub l: u32,
    pub m: u32,
    pub leading_form: String,
}

impl IcFormJson {
    pub fn from_form(ic: &IcForm) -> Self {
        IcFormJson {
            a: ic.a.to_string(),
            b: ic.b.to_string(),
            i: var_index(ic.i),
            j: var_index(ic.j),
            l: ic.l,
            m: ic.m,
            leading_form: ic.expand().to_string(),
        }
    }
}

pub fn coordinate_outcome(outcome: &CoordinateOutcome) -> Value {
    match outcome {
        CoordinateOutcome::Certificate { map, peels } => json!({
            "coordinate": true,
            "map": PlaneMapJson::from_map(map),
            "peels": peels
                .iter()
                .map(|e| FactorJson::from_factor(&Factor::Elementary(e.clone())))
                .collect::<Vec<_>>(),
        }),
        CoordinateOutcome::NotCoordinate(nc) => {
            let reason = match &nc.reason {
                NotCoordinateReason::UnivariateHighDegree => json!({"kind": "UnivariateHighDegree"}),
                NotCoordinateReason::NotIcShaped { leading_form } => json!({
                    "kind": "NotIcShaped",
                    "leading_form": leading_form.to_string(),
                }),
            };
            json!({
                "kind": "NotCoordinate",
                "reason": reason,
                "at": nc.at.to_string(),
            })
        }
        CoordinateOutcome::DepthExceeded { at } => json!({
            "kind": "DepthExceeded",
            "at": at.to_string(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapRecord {
    pub config: GenConfig,
    pub map: PlaneMapJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub config: GenConfig,
    pub action: CoActionJson,
}

impl ActionRecord {
    pub fn new(config: GenConfig, sigma: &ValidatedCoAction) -> Self {
        ActionRecord {
            config,
            action: CoActionJson::from_action(sigma),
        }
    }
}

impl MapRecord {
    pub fn new(config: GenConfig, phi: &PlaneMap) -> Self {
        MapRecord {
            config,
            map: PlaneMapJson::from_map(phi),
        }
    }
}

pub fn not_automorphism(e: &NotAutomorphism) -> Value {
    json!({
        "kind": "NotAutomorphism",
        "reason": format!("{:?}", e.reason),
        "stuck_at": PlaneMapJson::from_map(&e.stuck_at),
    })
}

pub fn axiom_violation(v: &AxiomViolation) -> Value {
    json!({
        "kind": "AxiomViolation",
        "axiom": v.axiom.to_string(),
        "generator": v.generator.name(),
        "difference": v.difference.to_string(),
    })
}

fn stuck_state(s: &StuckState) -> Value {
    json!({
        "kind": "StuckReduction",
        "f1": s.f1.to_string(),
        "f2": s.f2.to_string(),
        "z2": [z2_pair(s.z2_1), z2_pair(s.z2_2)],
    })
}

/// Machine-readable payload for any library error.
pub fn error_payload(e: &Error) -> Value {
    match e {
        Error::NotAutomorphism(n) => not_automorphism(n),
        Error::AxiomViolation(v) => axiom_violation(v),
        Error::StuckReduction(s) => stuck_state(s),
        Error::Parse(p) => json!({"kind": "ParseError", "message": p.to_string()}),
        Error::Field(f) => json!({"kind": "FieldError", "message": f.to_string()}),
        Error::InvalidExponent {
            power,
            characteristic,
        } => json!({
            "kind": "InvalidExponent",
            "power": power,
            "characteristic": characteristic,
        }),
        Error::DegreeCapExceeded(d) => json!({
            "kind": "DegreeCapExceeded",
            "dmax": d,
            "message": e.to_string(),
        }),
        other => json!({"kind": error_kind(other), "message": other.to_string()}),
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Field(_) => "FieldError",
        Error::Parse(_) => "ParseError",
        Error::ZeroPolynomial => "ZeroPolynomial",
        Error::PreconditionViolation(_) => "PreconditionViolation",
        Error::NotAutomorphism(_) => "NotAutomorphism",
        Error::NotInvariantParameter(_) => "NotInvariantParameter",
        Error::AxiomViolation(_) => "AxiomViolation",
        Error::TrivialAction => "TrivialAction",
        Error::DegreeCapExceeded(_) => "DegreeCapExceeded",
        Error::InvalidExponent { .. } => "InvalidExponent",
        Error::StuckReduction(_) => "StuckReduction",
        Error::Falsification(_) => "Falsification",
    }
}
