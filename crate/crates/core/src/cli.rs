//! Command-line front end. [`dispatch`] parses arguments, runs one command
//! and returns the exit code together with the JSON document to emit.
//!
//! Exit codes: 0 on success, 1 when a mathematical check fails (the JSON then
//! carries the counterexample), 2 on usage or parse errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::field::{Field, FieldSpecJson, LocalFieldSpec, OElement, OElementJson};
use crate::lubin_tate::{self, FormalGroupModel, FrobeniusSeries};
use crate::presets;
use crate::prism;
use crate::random;
use crate::selftest::{self, Fault, SelftestConfig};
use crate::series::{PowerSeries, SeriesJson};
use crate::theta;
use crate::witt::{self, CarrierKind, DeltaOperator, MulLaw, WittPair};

#[derive(Parser, Debug)]
#[command(name = "pitypical", version, about = "Lubin–Tate groups, Witt vectors, δ-structures and o_L-typical prisms")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Built-in preset (q2, q3, q2-ramified, q4-unramified) or a name under $PITYPICAL_PRESET_DIR.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Field spec JSON file: {"p", "g", "E", "M"}.
    #[arg(long, global = true, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// Truncation degree D.
    #[arg(long, global = true)]
    deg: Option<usize>,
    /// Precision M (overrides the spec).
    #[arg(long, global = true)]
    prec: Option<u32>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON document here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Frobenius series: `default` (πT + T^q) or a series JSON file.
    #[arg(long, global = true)]
    f: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Field specs.
    #[command(subcommand)]
    Field(FieldCmd),
    /// Lubin–Tate group laws, endomorphisms, logarithms and genus.
    #[command(subcommand)]
    Lt(LtCmd),
    /// Length-two Witt vector ring axioms.
    #[command(subcommand)]
    Witt(WittCmd),
    /// δ-structure on o_L[[T]].
    #[command(subcommand)]
    Delta(DeltaCmd),
    /// Numerical polynomials θ_k.
    #[command(subcommand)]
    Theta(ThetaCmd),
    /// q_n(T) and prism certificates.
    #[command(subcommand)]
    Prism(PrismCmd),
    /// Run every invariant suite over the presets.
    Selftest {
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Comma-separated preset names (default: all built-ins).
        #[arg(long)]
        presets: Option<String>,
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Subcommand, Debug)]
enum FieldCmd {
    /// Validate and print a field spec from a prime and polynomials.
    Make {
        #[arg(long)]
        p: u64,
        /// Residue polynomial g over F_p, e.g. "y^2+y+1".
        #[arg(long, default_value = "x")]
        g: String,
        /// Eisenstein polynomial with integer coefficients, e.g. "x^2-2".
        #[arg(long = "E")]
        e: String,
    },
    /// Print the selected spec with its derived invariants.
    Show,
}

#[derive(Subcommand, Debug)]
enum LtCmd {
    GroupLaw,
    Endo {
        /// Integer, coefficient rows such as [[1],[2]], or an OElement JSON object.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
    Log,
    Genus {
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = ModelArg::Honda)]
        model: ModelArg,
    },
}

#[derive(Subcommand, Debug)]
enum WittCmd {
    Check {
        #[arg(long, default_value = "zmod")]
        carrier: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = LawArg::Crossed)]
        law: LawArg,
    },
}

#[derive(Subcommand, Debug)]
enum DeltaCmd {
    Check {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ThetaCmd {
    Poly {
        #[arg(long)]
        k: usize,
    },
    Eval {
        #[arg(long)]
        k: usize,
        /// JSON array of scalars (integers, coefficient rows or OElement objects).
        #[arg(long, conflicts_with = "random")]
        points: Option<PathBuf>,
        #[arg(long)]
        random: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum PrismCmd {
    Qn {
        #[arg(long)]
        n: usize,
    },
    Verify {
        #[arg(long)]
        n: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModelArg {
    Honda,
    F,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LawArg {
    Crossed,
    Literal,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FaultArg {
    LiteralWittMul,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Math(Value),
}

type Res<T> = Result<T, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn math(kind: &str, e: impl std::fmt::Display) -> Failure {
    Failure::Math(json!({ "error": kind, "message": e.to_string() }))
}

/// Parses and runs one command line (including the program name).
pub fn dispatch<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let out_path = cli.global.out.clone();
    let (code, doc) = match run(cli) {
        Ok((pass, doc)) => (if pass { 0 } else { 1 }, doc),
        Err(Failure::Math(doc)) => (1, doc),
        Err(Failure::Usage(msg)) => return Outcome { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") },
    };
    let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n";
    match out_path {
        Some(path) => match std::fs::write(&path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {}: {e}\n", path.display()) },
        },
        None => Outcome { code, stdout: text, stderr: String::new() },
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Res<T> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn field_of(g: &Global) -> Res<Field> {
    let field = match (&g.spec, &g.preset) {
        (Some(path), _) => {
            let repr: FieldSpecJson = read_json(path)?;
            LocalFieldSpec::from_json(&repr).map_err(|e| math("InvalidSpec", e))?
        }
        (None, Some(name)) => presets::lookup(name).map_err(|e| match e {
            presets::PresetError::Field(fe) => math("InvalidSpec", fe),
            other => usage(other),
        })?,
        (None, None) => presets::q2(),
    };
    match g.prec {
        Some(m) => field.with_precision(m).map_err(usage),
        None => Ok(field),
    }
}

fn frobenius_of(g: &Global, field: &Field, deg: usize) -> Res<FrobeniusSeries> {
    match g.f.as_deref() {
        None | Some("default") => Ok(FrobeniusSeries::default_for(field, deg)),
        Some(path) => {
            let repr: SeriesJson = read_json(Path::new(path))?;
            let s = PowerSeries::from_json(field, &repr).map_err(usage)?;
            FrobeniusSeries::validate(s).map_err(|e| math("InvalidFrobeniusSeries", e))
        }
    }
}

/// Scalars on the command line: an integer, coefficient rows, or OElement JSON.
fn parse_scalar(field: &Field, text: &str) -> Res<OElement> {
    if let Ok(k) = text.trim().parse::<i64>() {
        return Ok(OElement::from_int(field, k));
    }
    let v: Value = serde_json::from_str(text).map_err(|e| usage(format!("scalar {text:?}: {e}")))?;
    scalar_from_value(field, &v)
}

fn scalar_from_value(field: &Field, v: &Value) -> Res<OElement> {
    match v {
        Value::Number(n) => n.as_i64().map(|k| OElement::from_int(field, k)).ok_or_else(|| usage(format!("not an integer: {n}"))),
        Value::Array(_) => {
            let rows: Vec<Vec<i64>> = serde_json::from_value(v.clone()).map_err(usage)?;
            OElement::from_coeffs(field, &rows).map_err(usage)
        }
        Value::Object(_) => {
            let repr: OElementJson = serde_json::from_value(v.clone()).map_err(usage)?;
            OElement::from_json(field, &repr).map_err(usage)
        }
        _ => Err(usage(format!("cannot read a scalar from {v}"))),
    }
}

/// Integer polynomial in one variable, e.g. `x^2 - 2` or `3*x^3+x`, as
/// ascending coefficients.
pub fn parse_int_poly(text: &str) -> Result<Vec<i64>, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty polynomial".into());
    }
    let mut coeffs: Vec<i64> = vec![];
    let mut var: Option<char> = None;
    let mut rest = s.as_str();
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'+' => (1, &rest[1..]),
            b'-' => (-1, &rest[1..]),
            _ => (1, rest),
        };
        let end = body.find(['+', '-']).unwrap_or(body.len());
        let term = &body[..end];
        rest = &body[end..];
        if term.is_empty() {
            return Err(format!("dangling sign in {text:?}"));
        }
        let split = term.find(|c: char| c.is_ascii_alphabetic());
        let (coef, power) = match split {
            None => (term.parse::<i64>().map_err(|_| format!("bad term {term:?}"))?, 0),
            Some(i) => {
                let c = term[..i].trim_end_matches('*');
                let coef = if c.is_empty() { 1 } else { c.parse::<i64>().map_err(|_| format!("bad coefficient {c:?}"))? };
                let v = term[i..].chars().next().unwrap();
                if *var.get_or_insert(v) != v {
                    return Err(format!("mixed variables in {text:?}"));
                }
                let tail = &term[i + v.len_utf8()..];
                let power = if tail.is_empty() {
                    1
                } else {
                    tail.strip_prefix('^').and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| format!("bad exponent in {term:?}"))?
                };
                (coef, power)
            }
        };
        if coeffs.len() <= power {
            coeffs.resize(power + 1, 0);
        }
        coeffs[power] += sign * coef;
    }
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
        coeffs.pop();
    }
    Ok(coeffs)
}

fn spec_value(field: &Field) -> Value {
    to_value(&field.to_json())
}

fn run(cli: Cli) -> Res<(bool, Value)> {
    let g = &cli.global;
    match &cli.command {
        Command::Field(cmd) => run_field(g, cmd),
        Command::Lt(cmd) => run_lt(g, cmd),
        Command::Witt(WittCmd::Check { carrier, trials, law }) => run_witt(g, carrier, *trials, *law),
        Command::Delta(DeltaCmd::Check { trials }) => run_delta(g, *trials),
        Command::Theta(cmd) => run_theta(g, cmd),
        Command::Prism(cmd) => run_prism(g, cmd),
        Command::Selftest { trials, presets: names, inject_fault } => {
            let mut cfg = SelftestConfig { seed: g.seed, trials: *trials, ..Default::default() };
            if let Some(d) = g.deg {
                cfg.deg = d;
            }
            if let Some(list) = names {
                cfg.presets = list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            }
            cfg.fault = inject_fault.map(|FaultArg::LiteralWittMul| Fault::LiteralWittMul);
            let report = selftest::run(&cfg);
            Ok((report.pass, to_value(&report)))
        }
    }
}

fn run_field(g: &Global, cmd: &FieldCmd) -> Res<(bool, Value)> {
    let field = match cmd {
        FieldCmd::Make { p, g: gpoly, e } => {
            let gc = parse_int_poly(gpoly).map_err(usage)?;
            let ec = parse_int_poly(e).map_err(usage)?;
            let f = gc.len().saturating_sub(1).max(1);
            let rows = ec.iter().map(|&c| {
                let mut r = vec![0; f];
                r[0] = c;
                r
            });
            LocalFieldSpec::new(*p, gc, rows.collect(), g.prec.unwrap_or(presets::DEFAULT_PRECISION))
                .map_err(|e| math(error_kind(&e), e))?
        }
        FieldCmd::Show => field_of(g)?,
    };
    Ok((
        true,
        json!({
            "spec": spec_value(&field),
            "q": field.q(), "e": field.e(), "f": field.f(), "n": field.n(),
            "pi": to_value(&OElement::pi(&field).to_json()),
        }),
    ))
}

fn error_kind(e: &crate::FieldError) -> &'static str {
    use crate::FieldError::*;
    match e {
        NotPrime(_) => "NotPrime",
        NotEisenstein(_) => "NotEisenstein",
        ReducibleResidual => "ReducibleResidual",
        BadPrecision(_) => "BadPrecision",
        Malformed(_) => "Malformed",
        _ => "FieldError",
    }
}

fn run_lt(g: &Global, cmd: &LtCmd) -> Res<(bool, Value)> {
    let field = field_of(g)?;
    let deg = g.deg.unwrap_or(64);
    let f = frobenius_of(g, &field, deg)?;
    let lt_err = |e: lubin_tate::LtError| math("LubinTate", e);
    let base = json!({ "spec": spec_value(&field), "D": deg });
    let mut doc = base.as_object().cloned().unwrap_or_default();
    match cmd {
        LtCmd::GroupLaw => {
            let law = lubin_tate::build_group_law(&f, deg).map_err(lt_err)?;
            doc.insert("f".into(), to_value(&f.truncated(law.deg()).series().to_json()));
            doc.insert("F".into(), to_value(&law.to_json()));
        }
        LtCmd::Endo { a } => {
            let a = parse_scalar(&field, a)?;
            let e = lubin_tate::build_endomorphism(&f, &a, deg).map_err(lt_err)?;
            doc.insert("a".into(), to_value(&a.to_json()));
            doc.insert("endo".into(), to_value(&e.to_json()));
        }
        LtCmd::Log => {
            let log = lubin_tate::logarithm(&f, deg).map_err(lt_err)?;
            doc.insert("log".into(), to_value(&log.to_json()));
        }
        LtCmd::Genus { m, model } => {
            let deg = deg.max(m + 1);
            let model_v = match model {
                ModelArg::Honda => lubin_tate::honda_model(&field, deg.max(field.q() as usize)),
                ModelArg::F => FormalGroupModel::from_frobenius(&frobenius_of(g, &field, deg)?, deg),
            }
            .map_err(lt_err)?;
            let v = lubin_tate::genus_cp(&model_v, *m).map_err(lt_err)?;
            doc.insert("m".into(), json!(m));
            doc.insert("model".into(), to_value(&model_v.source));
            doc.insert("value".into(), to_value(&v.to_json()));
        }
    }
    Ok((true, Value::Object(doc)))
}

fn run_witt(g: &Global, carrier: &str, trials: usize, law: LawArg) -> Res<(bool, Value)> {
    let field = field_of(g)?;
    let kind = CarrierKind::parse(carrier).ok_or_else(|| usage(format!("unknown carrier {carrier:?} (zmod, ofield, series)")))?;
    let law = match law {
        LawArg::Crossed => MulLaw::Crossed,
        LawArg::Literal => MulLaw::Literal,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let report = match kind {
        CarrierKind::Zmod => {
            let (p, m) = (field.p(), field.precision());
            let mut s = |r: &mut ChaCha8Rng| random::zmod(p, m, r);
            let t: Vec<_> = (0..trials)
                .map(|_| (random::witt_pair(&mut s, &mut rng), random::witt_pair(&mut s, &mut rng), random::witt_pair(&mut s, &mut rng)))
                .collect();
            witt::ring_axioms(&t, law)
        }
        CarrierKind::Ofield => {
            let mut s = |r: &mut ChaCha8Rng| random::oelement(&field, r);
            let t: Vec<_> = (0..trials)
                .map(|_| (random::witt_pair(&mut s, &mut rng), random::witt_pair(&mut s, &mut rng), random::witt_pair(&mut s, &mut rng)))
                .collect();
            witt::ring_axioms(&t, law)
        }
        CarrierKind::Series => {
            let deg = g.deg.unwrap_or(8);
            let mut s = |r: &mut ChaCha8Rng| random::small_series(&field, deg, r);
            let t: Vec<_> = (0..trials)
                .map(|_| (random::witt_pair(&mut s, &mut rng), random::witt_pair(&mut s, &mut rng), random::witt_pair(&mut s, &mut rng)))
                .collect();
            witt::ring_axioms(&t, law)
        }
    };
    let pass = report.pass();
    Ok((pass, json!({ "spec": spec_value(&field), "carrier": kind, "law": law, "trials": trials, "seed": g.seed, "checks": report.checks, "pass": pass })))
}

fn run_delta(g: &Global, trials: usize) -> Res<(bool, Value)> {
    let field = field_of(g)?;
    let deg = g.deg.unwrap_or(16);
    let f = frobenius_of(g, &field, deg)?;
    let delta = DeltaOperator::lubin_tate(&f.truncated(deg).series().clone());
    let t = PowerSeries::var_t(&field, f.truncated(deg).deg());
    let delta_t = witt::delta_apply(&delta, &t).map_err(|e| math("NotDivisible", e))?;
    let delta_t2 = witt::delta_apply(&delta, &t.mul(&t)).map_err(|e| math("NotDivisible", e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let samples: Vec<_> = (0..trials)
        .map(|_| (random::series(&field, t.deg(), 0, &mut rng), random::series(&field, t.deg(), 0, &mut rng)))
        .collect();
    let report = witt::section_check(&delta, &samples);
    let pass = report.pass();
    let pair = WittPair { a0: t.clone(), a1: delta_t.clone() };
    Ok((
        pass,
        json!({
            "spec": spec_value(&field), "D": t.deg(), "trials": trials, "seed": g.seed,
            "delta_T": delta_t.to_json(), "delta_T2": delta_t2.to_json(),
            "section_T": pair.to_json(),
            "checks": report.checks, "pass": pass,
        }),
    ))
}

fn run_theta(g: &Global, cmd: &ThetaCmd) -> Res<(bool, Value)> {
    let field = field_of(g)?;
    let terr = |e: theta::ThetaError| math("Theta", e);
    match cmd {
        ThetaCmd::Poly { k } => {
            let th = theta::theta_poly(&field, *k).map_err(terr)?;
            Ok((true, json!({ "spec": spec_value(&field), "k": k, "theta": th.to_json() })))
        }
        ThetaCmd::Eval { k, points, random: count } => {
            let samples: Vec<OElement> = match (points, count) {
                (Some(path), _) => {
                    let vals: Vec<Value> = read_json(path)?;
                    vals.iter().map(|v| scalar_from_value(&field, v)).collect::<Res<_>>()?
                }
                (None, n) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
                    (0..n.unwrap_or(100)).map(|_| random::oelement(&field, &mut rng)).collect()
                }
            };
            let values: Vec<Value> = samples
                .iter()
                .map(|a| match theta::theta_values(a, *k) {
                    Ok(v) => json!({ "a": a.to_json(), "value": v[*k].to_json() }),
                    Err(e) => json!({ "a": a.to_json(), "error": e.to_string() }),
                })
                .collect();
            let report = theta::theta_eval_check(&field, *k, &samples).map_err(terr)?;
            Ok((report.pass, json!({ "spec": spec_value(&field), "k": k, "values": values, "report": report })))
        }
    }
}

fn run_prism(g: &Global, cmd: &PrismCmd) -> Res<(bool, Value)> {
    let field = field_of(g)?;
    let deg = g.deg.unwrap_or(64);
    let f = frobenius_of(g, &field, deg + 1)?;
    let perr = |e: prism::PrismError| math("Prism", e);
    match cmd {
        PrismCmd::Qn { n } => {
            let qn = prism::compute_qn(&f, *n, deg).map_err(perr)?;
            Ok((true, json!({ "spec": spec_value(&field), "n": n, "q_n": qn.to_json() })))
        }
        PrismCmd::Verify { n } => {
            let report = prism::verify_prism_condition(&f, *n, deg).map_err(perr)?;
            let cert = match prism::prism_certificate(&f, *n, deg) {
                Ok(c) => to_value(&c.to_json()),
                Err(e) => json!({ "n": n, "pass": false, "error": e.to_string() }),
            };
            Ok((report.pass, json!({ "spec": spec_value(&field), "certificate": cert, "report": report, "pass": report.pass })))
        }
    }
}
