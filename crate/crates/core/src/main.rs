use std::io::{self, IsTerminal, Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use gaplane::auto::{
    coordinate_reduce, ic_form, invert, leading_relation, leading_relation_via_ic, tame_decompose,
    CoordinateOutcome, PlaneMap,
};
use gaplane::gaction::{CoAction, ValidatedCoAction};
use gaplane::gen::{action_corpus, tame_corpus, GenConfig};
use gaplane::json::{
    axiom_violation, coordinate_outcome, error_payload, not_automorphism,
    ActionRecord, CoActionJson, DecompositionJson, IcFormJson, InvariantResultJson,
    LeadingRelationJson, MapRecord, PlaneMapJson, ReportJson,
};
use gaplane::parse::{parse_poly2, parse_poly_t};
use gaplane::rentschler::{invariant_coordinate, membership, verify_theorem1};
use gaplane::{Error, FieldSpec, Poly2};

#[derive(Parser)]
#[command(name = "gaplane", version, about = "Additive group actions on the affine plane")]
struct Cli {
    /// Base field: `q` or `fp:<prime>`. Falls back to the stdin object, then `q`.
    #[arg(long, global = true)]
    field: Option<String>,
    /// Emit JSON (the only output format).
    #[arg(long, global = true, default_value_t = true)]
    json: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Degree cap for the invariant search.
    #[arg(long, global = true, default_value_t = 24)]
    dmax: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ActionArgs {
    /// Image of x1, a polynomial in x1, x2, T.
    #[arg(long)]
    s1: Option<String>,
    /// Image of x2.
    #[arg(long)]
    s2: Option<String>,
}

#[derive(Args, Default)]
struct MapArgs {
    #[arg(long)]
    f1: Option<String>,
    #[arg(long)]
    f2: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusKind {
    Maps,
    Actions,
}

#[derive(Subcommand)]
enum Command {
    /// Check both action axioms on the generators.
    ValidateAction(ActionArgs),
    /// The coordinate generating the invariant ring, with its reduction trace.
    Invariant {
        #[command(flatten)]
        action: ActionArgs,
        /// Also cross-check against all invariants up to this degree.
        #[arg(long)]
        max_check_degree: Option<u32>,
    },
    /// A nonconstant invariant by linear solving, up to `--dmax`.
    FindInvariant(ActionArgs),
    /// Tame decomposition into affine and elementary factors.
    Decompose(MapArgs),
    Invert(MapArgs),
    /// `(f1(g1, g2), f2(g1, g2))`.
    Compose {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        g1: Option<String>,
        #[arg(long)]
        g2: Option<String>,
    },
    IsCoordinate {
        #[arg(long)]
        poly: Option<String>,
    },
    /// Whether `--poly` lies in the invariant ring of the action.
    Member {
        #[command(flatten)]
        action: ActionArgs,
        #[arg(long)]
        poly: Option<String>,
    },
    IcForm {
        #[arg(long)]
        poly: Option<String>,
    },
    LeadingRelation {
        #[command(flatten)]
        map: MapArgs,
        /// Derive the relation from the inverse map's leading forms instead.
        #[arg(long)]
        via_ic: bool,
    },
    GenCorpus {
        #[arg(long, value_enum)]
        kind: CorpusKind,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        max_factors: u32,
        #[arg(long, default_value_t = 2)]
        max_elementary_degree: u32,
        #[arg(long, default_value_t = 2)]
        max_coefficient_height: u32,
    },
    /// The automorphism obtained by substituting an invariant `--t` for T.
    EvalAction {
        #[command(flatten)]
        action: ActionArgs,
        #[arg(long)]
        t: Option<String>,
    },
}

/// How a command ended, mapped to the process exit code.
enum Failure {
    /// A mathematical "no": exit 1.
    Negative(Value),
    /// Bad input or usage: exit 2.
    Usage(Value),
    /// A check that must hold for valid input failed: exit 3.
    Internal(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let payload = error_payload(&e);
        match e {
            Error::NotAutomorphism(_)
            | Error::AxiomViolation(_)
            | Error::TrivialAction
            | Error::DegreeCapExceeded(_) => Failure::Negative(payload),
            Error::StuckReduction(_) | Error::Falsification(_) => Failure::Internal(payload),
            _ => Failure::Usage(payload),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(json!({"kind": "UsageError", "message": message.into()}))
}

/// Command inputs from flags, with the stdin JSON object as fallback.
struct Inputs {
    stdin: Map<String, Value>,
    field: FieldSpec,
}

impl Inputs {
    fn load(field_flag: Option<&str>, need_stdin: bool) -> Result<Self, Failure> {
        let mut stdin = Map::new();
        if need_stdin && !io::stdin().is_terminal() {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| usage(format!("cannot read stdin: {e}")))?;
            if !text.trim().is_empty() {
                match serde_json::from_str(&text) {
                    Ok(Value::Object(m)) => stdin = m,
                    Ok(_) => return Err(usage("stdin must hold a JSON object")),
                    Err(e) => return Err(usage(format!("stdin is not valid JSON: {e}"))),
                }
            }
        }
        let designator = match field_flag {
            Some(f) => f.to_string(),
            None => match stdin.get("field") {
                Some(Value::String(s)) => s.clone(),
                Some(_) => return Err(usage("\"field\" must be a string")),
                None => "q".to_string(),
            },
        };
        let field = designator.parse().map_err(Error::from)?;
        Ok(Inputs { stdin, field })
    }

    fn text(&self, flag: &Option<String>, name: &str) -> Result<String, Failure> {
        if let Some(v) = flag {
            return Ok(v.clone());
        }
        match self.stdin.get(name) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(usage(format!("\"{name}\" must be a string"))),
            None => Err(usage(format!("missing input --{name}"))),
        }
    }

    fn poly(&self, flag: &Option<String>, name: &str) -> Result<Poly2, Failure> {
        Ok(parse_poly2(&self.text(flag, name)?, self.field).map_err(Error::from)?)
    }

    fn map(&self, args: &MapArgs, n1: &str, n2: &str) -> Result<PlaneMap, Failure> {
        let (a, b) = (self.poly(&args.f1, n1)?, self.poly(&args.f2, n2)?);
        Ok(PlaneMap::new(a, b)?)
    }

    fn action(&self, args: &ActionArgs) -> Result<CoAction, Failure> {
        let s1 = parse_poly_t(&self.text(&args.s1, "s1")?, self.field).map_err(Error::from)?;
        let s2 = parse_poly_t(&self.text(&args.s2, "s2")?, self.field).map_err(Error::from)?;
        Ok(CoAction::new(s1, s2)?)
    }

    fn valid_action(&self, args: &ActionArgs) -> Result<ValidatedCoAction, Failure> {
        self.action(args)?
            .validate()
            .map_err(|v| Failure::Negative(axiom_violation(&v)))
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn needs_stdin(cmd: &Command) -> bool {
    let missing = |a: &Option<String>| a.is_none();
    let action = |a: &ActionArgs| missing(&a.s1) || missing(&a.s2);
    let map = |m: &MapArgs| missing(&m.f1) || missing(&m.f2);
    match cmd {
        Command::ValidateAction(a) | Command::FindInvariant(a) => action(a),
        Command::Invariant { action: a, .. } => action(a),
        Command::Member { action: a, poly } => action(a) || missing(poly),
        Command::EvalAction { action: a, t } => action(a) || missing(t),
        Command::Decompose(m) | Command::Invert(m) => map(m),
        Command::LeadingRelation { map: m, .. } => map(m),
        Command::Compose { map: m, g1, g2 } => map(m) || missing(g1) || missing(g2),
        Command::IsCoordinate { poly } | Command::IcForm { poly } => missing(poly),
        Command::GenCorpus { .. } => false,
    }
}

fn run(cli: &Cli) -> Result<Value, Failure> {
    let input = Inputs::load(cli.field.as_deref(), needs_stdin(&cli.command))?;
    let field = input.field;
    match &cli.command {
        Command::ValidateAction(args) => {
            let sigma = input.valid_action(args)?;
            let mut out = to_value(&CoActionJson::from_action(&sigma));
            out["valid"] = json!(true);
            out["trivial"] = json!(sigma.is_trivial());
            Ok(out)
        }
        Command::Invariant {
            action,
            max_check_degree,
        } => {
            let sigma = input.valid_action(action)?;
            match max_check_degree {
                None => Ok(to_value(&InvariantResultJson::from_result(
                    &invariant_coordinate(&sigma)?,
                ))),
                Some(d) => {
                    let report = verify_theorem1(&sigma, *d)?;
                    let mut out = to_value(&InvariantResultJson::from_result(&report.result));
                    out["report"] = to_value(&ReportJson::from_report(&report));
                    if !report.passed() {
                        return Err(Failure::Internal(json!({
                            "kind": "Falsification",
                            "message": "invariant ring check failed",
                            "result": out,
                        })));
                    }
                    Ok(out)
                }
            }
        }
        Command::FindInvariant(args) => {
            let sigma = input.valid_action(args)?;
            let g = sigma.find_invariant(cli.dmax)?;
            Ok(json!({"field": field.to_string(), "invariant": g.to_string()}))
        }
        Command::Decompose(args) => {
            let phi = input.map(args, "f1", "f2")?;
            match tame_decompose(&phi) {
                Ok(dec) => Ok(to_value(&DecompositionJson::from_decomposition(&dec))),
                Err(n) => Err(Failure::Negative(not_automorphism(&n))),
            }
        }
        Command::Invert(args) => {
            let phi = input.map(args, "f1", "f2")?;
            Ok(to_value(&PlaneMapJson::from_map(&invert(&phi)?)))
        }
        Command::Compose { map, g1, g2 } => {
            let phi = input.map(map, "f1", "f2")?;
            let psi = input.map(
                &MapArgs {
                    f1: g1.clone(),
                    f2: g2.clone(),
                },
                "g1",
                "g2",
            )?;
            Ok(to_value(&PlaneMapJson::from_map(&phi.compose(&psi)?)))
        }
        Command::IsCoordinate { poly } => {
            let f = input.poly(poly, "poly")?;
            let outcome = coordinate_reduce(&f)?;
            let out = coordinate_outcome(&outcome);
            match outcome {
                CoordinateOutcome::Certificate { .. } => Ok(out),
                _ => Err(Failure::Negative(out)),
            }
        }
        Command::Member { action, poly } => {
            let sigma = input.valid_action(action)?;
            let g = input.poly(poly, "poly")?;
            let res = invariant_coordinate(&sigma)?;
            match membership(&g, &res)? {
                Some(p) => Ok(json!({
                    "member": true,
                    "f": res.f.to_string(),
                    "p": p.display_in("t"),
                })),
                None => Err(Failure::Negative(json!({
                    "kind": "NotMember",
                    "f": res.f.to_string(),
                    "g": g.to_string(),
                }))),
            }
        }
        Command::IcForm { poly } => {
            let f = input.poly(poly, "poly")?;
            match ic_form(&f)? {
                Some(ic) => Ok(to_value(&IcFormJson::from_form(&ic))),
                None => Err(Failure::Negative(json!({
                    "kind": "NotIcShaped",
                    "poly": f.to_string(),
                }))),
            }
        }
        Command::LeadingRelation { map, via_ic } => {
            let phi = input.map(map, "f1", "f2")?;
            let rel = if *via_ic {
                Some(leading_relation_via_ic(&phi)?)
            } else {
                leading_relation(&phi)?
            };
            match rel {
                Some(r) => Ok(to_value(&LeadingRelationJson::from_relation(&r))),
                None => Err(Failure::Negative(json!({
                    "kind": "NoRelation",
                    "map": PlaneMapJson::from_map(&phi),
                }))),
            }
        }
        Command::GenCorpus {
            kind,
            count,
            max_factors,
            max_elementary_degree,
            max_coefficient_height,
        } => {
            let cfg = GenConfig::new(
                cli.seed,
                field,
                *max_factors,
                *max_elementary_degree,
                *max_coefficient_height,
            )?;
            Ok(match kind {
                CorpusKind::Maps => to_value(
                    &tame_corpus(&cfg, *count)
                        .iter()
                        .map(|(c, phi)| MapRecord::new(c.clone(), phi))
                        .collect::<Vec<_>>(),
                ),
                CorpusKind::Actions => to_value(
                    &action_corpus(&cfg, *count)?
                        .iter()
                        .map(|(c, sigma)| ActionRecord::new(c.clone(), sigma))
                        .collect::<Vec<_>>(),
                ),
            })
        }
        Command::EvalAction { action, t } => {
            let sigma = input.valid_action(action)?;
            let t = input.poly(t, "t")?;
            Ok(to_value(&PlaneMapJson::from_map(&sigma.evaluate(&t)?)))
        }
    }
}

fn emit(v: &Value) {
    let text = serde_json::to_string_pretty(v).expect("serializable");
    // a closed pipe downstream is not our failure
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            emit(&json!({"kind": "UsageError", "message": e.kind().to_string(), "detail": e.to_string()}));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(v) => {
            emit(&v);
            ExitCode::SUCCESS
        }
        Err(Failure::Negative(v)) => {
            emit(&v);
            ExitCode::from(1)
        }
        Err(Failure::Usage(v)) => {
            emit(&v);
            ExitCode::from(2)
        }
        Err(Failure::Internal(v)) => {
            emit(&v);
            ExitCode::from(3)
        }
    }
}
