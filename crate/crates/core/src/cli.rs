//! The `synlab` batch front end: input parsing, dispatch, reports.
//!
//! ```text
//! synlab <command> --input <file> [--tol-eig X] [--tol-psd X] [--seed N] [--trials N] [--format text|json]
//! ```
//!
//! Exit status: 0 when every check passes, 1 when a check fails or a
//! computation breaks its own invariants, 2 on input or usage errors.

use std::ffi::OsString;
use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::antilattice::{
    antilattice_suite, corner_descent, exchange_symmetry, existsk_construct, falsifier_holds,
    infimum_decide, witness_pipeline, ExchangeDirection, InfimumStatus,
};
use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, Tolerances};
use crate::order::{commutator_norm, psd_check};
use crate::projection::{carrier, proj_join, proj_meet, Projection, Symmetry};
use crate::sampling;
use crate::spectral::{q_lambda_clause_check, spectral_bounds, spectral_resolution};
use crate::structure::{center, commutant_in, is_factor, AlgebraSpec, Element};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Interior probes per element for `qsublambda-check`.
const QLAMBDA_PROBES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectral,
    Carrier,
    Meet,
    Join,
    Inf,
    Commutant,
    Center,
    Factor,
    Exchange,
    Existsk,
    Witness,
    Suite,
    QsublambdaCheck,
}

impl Command {
    pub const ALL: [Command; 13] = [
        Command::Spectral,
        Command::Carrier,
        Command::Meet,
        Command::Join,
        Command::Inf,
        Command::Commutant,
        Command::Center,
        Command::Factor,
        Command::Exchange,
        Command::Existsk,
        Command::Witness,
        Command::Suite,
        Command::QsublambdaCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Spectral => "spectral",
            Command::Carrier => "carrier",
            Command::Meet => "meet",
            Command::Join => "join",
            Command::Inf => "inf",
            Command::Commutant => "commutant",
            Command::Center => "center",
            Command::Factor => "factor",
            Command::Exchange => "exchange",
            Command::Existsk => "existsk",
            Command::Witness => "witness",
            Command::Suite => "suite",
            Command::QsublambdaCheck => "qsublambda-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownCommand(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "synlab",
    version,
    about = "Order, projection and spectral checks on direct sums of real symmetric matrix algebras"
)]
struct Args {
    /// spectral | carrier | meet | join | inf | commutant | center | factor |
    /// exchange | existsk | witness | suite | qsublambda-check
    command: String,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    tol_eig: Option<f64>,
    #[arg(long)]
    tol_psd: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

/// A resolved invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: PathBuf,
    pub seed: u64,
    pub trials: usize,
    pub tolerances: Tolerances,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: Command, input: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            input: input.into(),
            seed: 0,
            trials: 500,
            tolerances: Tolerances::default(),
            format: Format::Text,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Validation("--trials must be at least 1".into()));
        }
        self.tolerances.validate()
    }

    fn from_args(args: Args) -> Result<Self> {
        let mut tolerances = Tolerances::default();
        if let Some(eig) = args.tol_eig {
            tolerances.eig = eig;
        }
        if let Some(psd) = args.tol_psd {
            tolerances.psd = psd;
        }
        let config = RunConfig {
            command: args.command.parse()?,
            input: args.input,
            seed: args.seed,
            trials: args.trials,
            tolerances,
            format: args.format,
        };
        config.validate()?;
        Ok(config)
    }
}

/// A parsed input file: an algebra and named elements in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub algebra: AlgebraSpec,
    pub elements: IndexMap<String, Element>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    blocks: Vec<usize>,
    #[serde(default)]
    elements: IndexMap<String, Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct RawOutput<'a> {
    blocks: &'a [usize],
    elements: IndexMap<&'a str, Vec<Vec<f64>>>,
}

pub fn parse_spec(path: &Path, tol: &Tolerances) -> Result<InputSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_spec_str(&text, tol)
}

/// Parses and validates the input document: block sizes, square shape over the
/// total dimension, symmetry, and vanishing off-block entries, each up to
/// `tol.recon` relative to the largest entry.
pub fn parse_spec_str(text: &str, tol: &Tolerances) -> Result<InputSpec> {
    let raw: RawInput = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let algebra = AlgebraSpec::new(raw.blocks)?;
    let n = algebra.total_dim();
    let mut elements = IndexMap::new();
    for (name, rows) in raw.elements {
        let invalid = |msg: String| Error::Validation(format!("element `{name}`: {msg}"));
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(invalid(format!("expected a {n}×{n} array")));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invalid("non-finite entry".into()));
        }
        let scale = rows.iter().flatten().fold(1.0_f64, |m, x| m.max(x.abs()));
        for (i, row) in rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate().take(i) {
                if (x - rows[j][i]).abs() > tol.recon * scale {
                    return Err(invalid(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        let matrix = SymMatrix::from_rows(&rows)?;
        let element = Element::new(&algebra, matrix, tol).map_err(|e| invalid(e.to_string()))?;
        elements.insert(name, element);
    }
    Ok(InputSpec { algebra, elements })
}

/// Serializes an input document in the format [`parse_spec_str`] reads.
pub fn spec_to_json(spec: &InputSpec) -> String {
    let raw = RawOutput {
        blocks: spec.algebra.blocks(),
        elements: spec
            .elements
            .iter()
            .map(|(k, v)| (k.as_str(), v.matrix().to_rows()))
            .collect(),
    };
    to_json_string(&raw, false)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

impl Check {
    fn residual(name: impl Into<String>, residual: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            pass: residual <= bound,
            residual,
        }
    }

    fn flag(name: impl Into<String>, pass: bool, residual: f64) -> Self {
        Check {
            name: name.into(),
            pass,
            residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: Command,
    pub config: RunConfig,
    pub results: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }

    pub fn to_json(&self) -> String {
        to_json_string(self, true)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let t = &self.config.tolerances;
        out.push_str(&format!("command   {}\n", self.command));
        out.push_str(&format!("input     {}\n", self.config.input.display()));
        out.push_str(&format!(
            "seed      {}  trials {}  tol eig {:e} recon {:e} ortho {:e} psd {:e}\n",
            self.config.seed, self.config.trials, t.eig, t.recon, t.ortho, t.psd
        ));
        out.push('\n');
        flatten_text(&self.results, "", &mut out);
        if !self.checks.is_empty() {
            out.push('\n');
            let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            for c in &self.checks {
                let status = if c.pass { "PASS" } else { "FAIL" };
                out.push_str(&format!(
                    "{status}  {:<width$}  {:.3e}\n",
                    c.name, c.residual
                ));
            }
        }
        out
    }
}

fn flatten_text(v: &Value, path: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                flatten_text(x, &p, out);
            }
        }
        other => out.push_str(&format!("{path} = {other}\n")),
    }
}

/// Writes floats with 17 significant digits.
struct ExactFloats<F>(F);

impl<F: serde_json::ser::Formatter> serde_json::ser::Formatter for ExactFloats<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// JSON with every float at 17 significant digits; `pretty` indents by two.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T, pretty: bool) -> String {
    let mut buf = Vec::new();
    let result = if pretty {
        let fmt = ExactFloats(serde_json::ser::PrettyFormatter::with_indent(b"  "));
        value.serialize(&mut serde_json::Serializer::with_formatter(&mut buf, fmt))
    } else {
        let fmt = ExactFloats(serde_json::ser::CompactFormatter);
        value.serialize(&mut serde_json::Serializer::with_formatter(&mut buf, fmt))
    };
    result.expect("report types serialize infallibly");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize infallibly")
}

fn require(spec: &InputSpec, count: usize, command: Command) -> Result<Vec<(&str, &Element)>> {
    if spec.elements.len() < count {
        return Err(Error::Validation(format!(
            "`{command}` needs at least {count} element(s), found {}",
            spec.elements.len()
        )));
    }
    Ok(spec.elements.iter().map(|(k, v)| (k.as_str(), v)).collect())
}

fn projection_arg(name: &str, e: &Element, tol: &Tolerances) -> Result<Projection> {
    Projection::new(e.matrix(), tol).map_err(|err| match err {
        Error::NotProjection(msg) => Error::NotProjection(format!("`{name}`: {msg}")),
        other => other,
    })
}

fn order_slack(lo: &SymMatrix, hi: &SymMatrix, tol: &Tolerances) -> Result<(bool, f64)> {
    let d = hi.sub(lo)?;
    let (ok, min) = psd_check(&d, tol)?;
    Ok((ok, (-min).max(0.0)))
}

/// Runs one command on a parsed input.
pub fn dispatch(config: &RunConfig, spec: &InputSpec) -> Result<Report> {
    config.validate()?;
    let tol = &config.tolerances;
    let algebra = &spec.algebra;
    let mut checks = Vec::new();
    let results = match config.command {
        Command::Spectral => {
            let mut out = serde_json::Map::new();
            for (name, e) in require(spec, 1, config.command)? {
                let a = e.matrix();
                let res = spectral_resolution(a, tol)?;
                let bounds = spectral_bounds(a)?;
                let mut rebuilt = SymMatrix::zeros(a.dim());
                let mut previous = SymMatrix::zeros(a.dim());
                for j in &res.jumps {
                    rebuilt = rebuilt.add(&j.projection.matrix().sub(&previous)?.scale(j.at))?;
                    previous = j.projection.matrix().clone();
                }
                let scale = a.frobenius_norm().max(1.0);
                checks.push(Check::residual(
                    format!("{name}: Σ λ Δp_λ = a"),
                    rebuilt.distance(a)? / scale,
                    tol.recon,
                ));
                let (lo_ok, lo) = order_slack(&SymMatrix::scalar(a.dim(), bounds.lower), a, tol)?;
                let (hi_ok, hi) = order_slack(a, &SymMatrix::scalar(a.dim(), bounds.upper), tol)?;
                checks.push(Check::flag(
                    format!("{name}: L ≤ a ≤ U"),
                    lo_ok && hi_ok,
                    lo.max(hi),
                ));
                out.insert(
                    name.to_string(),
                    json!({
                        "spectrum": res.spectrum(),
                        "lower": bounds.lower,
                        "upper": bounds.upper,
                        "norm": bounds.norm(),
                        "jumps": res.jumps.iter().map(|j| json!({"at": j.at, "projection": to_value(&j.projection)})).collect::<Vec<_>>(),
                    }),
                );
            }
            Value::Object(out)
        }
        Command::Carrier => {
            let mut out = serde_json::Map::new();
            for (name, e) in require(spec, 1, config.command)? {
                let p = carrier(e.matrix(), tol)?;
                let residual = e.matrix().mul(p.matrix())?.into_sym_residual(e.matrix());
                checks.push(Check::residual(
                    format!("{name}: a·a° = a"),
                    residual / e.matrix().frobenius_norm().max(1.0),
                    tol.recon,
                ));
                out.insert(
                    name.to_string(),
                    json!({"carrier": to_value(&p), "rank": p.rank()}),
                );
            }
            Value::Object(out)
        }
        Command::Meet | Command::Join => {
            let els = require(spec, 2, config.command)?;
            let p = projection_arg(els[0].0, els[0].1, tol)?;
            let q = projection_arg(els[1].0, els[1].1, tol)?;
            let (r, below) = if config.command == Command::Meet {
                (proj_meet(&p, &q, tol)?, true)
            } else {
                (proj_join(&p, &q, tol)?, false)
            };
            for (name, x) in [(els[0].0, &p), (els[1].0, &q)] {
                let (ok, slack) = if below {
                    order_slack(r.matrix(), x.matrix(), tol)?
                } else {
                    order_slack(x.matrix(), r.matrix(), tol)?
                };
                let rel = if below { "≤" } else { "≥" };
                checks.push(Check::flag(format!("result {rel} {name}"), ok, slack));
            }
            checks.push(Check::residual(
                "idempotent",
                r.idempotency_residual(),
                tol.recon,
            ));
            json!({"projection": to_value(&r), "rank": r.rank()})
        }
        Command::Inf => {
            let els = require(spec, 2, config.command)?;
            let (c, d) = (els[0].1, els[1].1);
            let v = infimum_decide(c, d, tol)?;
            match v.status {
                InfimumStatus::Exists => {
                    let value = v.value.as_ref().expect("exists carries a value");
                    let (a_ok, a) = order_slack(value.matrix(), c.matrix(), tol)?;
                    let (b_ok, b) = order_slack(value.matrix(), d.matrix(), tol)?;
                    checks.push(Check::flag(
                        "infimum is a lower bound",
                        a_ok && b_ok,
                        a.max(b),
                    ));
                }
                InfimumStatus::NotExists => {
                    let ok = falsifier_holds(c, d, &v, tol)?;
                    checks.push(Check::flag(
                        "falsifier is a lower bound not below c ⊓ d",
                        ok,
                        0.0,
                    ));
                }
                InfimumStatus::Unknown => {}
            }
            to_value(&v)
        }
        Command::Commutant => {
            let els = require(spec, 1, config.command)?;
            let members: Vec<Element> = els.iter().map(|(_, e)| (*e).clone()).collect();
            let c = commutant_in(algebra, &members, tol)?;
            let mut worst = 0.0_f64;
            for x in c.basis() {
                for m in &members {
                    worst = worst.max(commutator_norm(x.matrix(), m.matrix())?);
                }
            }
            checks.push(Check::residual(
                "basis commutes with inputs",
                worst,
                tol.recon,
            ));
            json!({"dim": c.dim(), "basis": to_value(&c.basis())})
        }
        Command::Center => {
            let z = center(algebra, tol)?;
            let mut worst = 0.0_f64;
            for x in z.basis() {
                for e in algebra.standard_basis() {
                    worst = worst.max(commutator_norm(x.matrix(), e.matrix())?);
                }
            }
            checks.push(Check::residual("basis is central", worst, tol.recon));
            checks.push(Check::flag(
                "dim equals block count",
                z.dim() == algebra.blocks().len(),
                0.0,
            ));
            json!({"dim": z.dim(), "basis": to_value(&z.basis())})
        }
        Command::Factor => {
            let f = is_factor(algebra, tol)?;
            if let Some(h) = &f.witness {
                let p = Projection::new(h.matrix(), tol)?;
                let mut worst = 0.0_f64;
                for e in algebra.standard_basis() {
                    worst = worst.max(commutator_norm(h.matrix(), e.matrix())?);
                }
                checks.push(Check::residual("witness is central", worst, tol.recon));
                checks.push(Check::flag(
                    "witness is neither 0 nor 1",
                    !p.is_zero() && !p.is_one(),
                    0.0,
                ));
            }
            checks.push(Check::flag(
                "factor iff single block",
                f.is_factor == algebra.is_single_block(),
                0.0,
            ));
            json!({"is_factor": f.is_factor, "center_dim": f.center_dim, "witness": to_value(&f.witness)})
        }
        Command::Exchange => {
            let els = require(spec, 2, config.command)?;
            let p = projection_arg(els[0].0, els[0].1, tol)?;
            let q = projection_arg(els[1].0, els[1].1, tol)?;
            let ex = exchange_symmetry(&p, &q, algebra, tol)?;
            let t = ex.symmetry.matrix();
            let n = algebra.total_dim();
            checks.push(Check::residual(
                "t² = 1",
                t.square().distance(&SymMatrix::identity(n))?,
                tol.recon,
            ));
            checks.push(Check::flag("t ≠ ±1", !ex.symmetry.is_trivial(tol), 0.0));
            let (from, to) = match ex.direction {
                ExchangeDirection::PIntoQ => (&p, &q),
                ExchangeDirection::QIntoP => (&q, &p),
            };
            let (ok, slack) = order_slack(&t.sandwich(from.matrix())?, to.matrix(), tol)?;
            checks.push(Check::flag("moved projection below target", ok, slack));
            let descent = corner_descent(algebra, from, to, &ex.symmetry, tol)?;
            checks.push(Check::residual(
                "s² = u",
                descent.s_squared_residual,
                tol.recon,
            ));
            checks.push(Check::residual(
                "sps = tpt",
                descent.sps_residual,
                tol.recon,
            ));
            checks.push(Check::flag(
                "k ≤ p, k ≤ tpt, k ≰ 0",
                descent.k_below_p && descent.k_below_tpt && descent.k_max_eigenvalue > tol.psd,
                0.0,
            ));
            json!({
                "symmetry": to_value(t),
                "direction": to_value(&ex.direction),
                "corner_descent": to_value(&descent),
            })
        }
        Command::Existsk => {
            let els = require(spec, 2, config.command)?;
            let p = projection_arg(els[0].0, els[0].1, tol)?;
            let s = Symmetry::new(els[1].1.matrix(), tol)?;
            let r = existsk_construct(&p, &s, tol)?;
            let p_slack = (-r.p_minus_k_min_eigenvalue).max(0.0);
            let perp_slack = (-r.p_perp_minus_k_min_eigenvalue).max(0.0);
            checks.push(Check::flag("k ≤ p", p_slack <= tol.psd, p_slack));
            checks.push(Check::flag("k ≤ p^⊥", perp_slack <= tol.psd, perp_slack));
            checks.push(Check::flag("k ≰ 0", r.k_max_eigenvalue > tol.psd, 0.0));
            checks.push(Check::residual(
                "d² = p − k",
                r.identity_residual,
                tol.recon,
            ));
            checks.push(Check::flag(
                "scalar identities exact",
                r.scalar_identities_exact,
                0.0,
            ));
            to_value(&r)
        }
        Command::Witness => {
            let els = require(spec, 2, config.command)?;
            let w = witness_pipeline(els[0].1, els[1].1, tol)?;
            checks.push(Check::residual("pq = 0", w.pq_residual, tol.recon));
            checks.push(Check::flag(
                "p, q nonzero",
                w.p.frobenius_norm() > tol.recon && w.q.frobenius_norm() > tol.recon,
                0.0,
            ));
            for (label, x, lambda) in [("λp ≤ a", &w.p, w.lambda), ("μq ≤ b", &w.q, w.mu)] {
                let base = if label.starts_with('λ') { &w.a } else { &w.b };
                let (ok, slack) = order_slack(&x.matrix().scale(lambda), base.matrix(), tol)?;
                checks.push(Check::flag(label, ok, slack));
            }
            to_value(&w)
        }
        Command::Suite => {
            let r = antilattice_suite(algebra, config.trials, config.seed, tol)?;
            checks.push(Check::flag(
                "verdict matches factor test",
                r.consistent(),
                0.0,
            ));
            if let Some(ce) = &r.counterexample {
                let incomparable =
                    !crate::order::loewner_cmp(ce.c.matrix(), ce.d.matrix(), tol)?.comparable();
                checks.push(Check::flag(
                    "counterexample pair incomparable",
                    incomparable,
                    0.0,
                ));
                let v = infimum_decide(&ce.c, &ce.d, tol)?;
                let same = v
                    .value
                    .as_ref()
                    .map(|x| x.matrix().distance(ce.infimum.matrix()))
                    .transpose()?;
                checks.push(Check::flag(
                    "counterexample infimum reproduces",
                    v.is_exists() && same.is_some_and(|d| d <= tol.recon),
                    same.unwrap_or(f64::INFINITY),
                ));
            }
            if r.is_factor {
                let f = &r.falsification;
                checks.push(Check::flag(
                    "no infimum on incomparable pairs",
                    f.exists_on_incomparable == 0,
                    f.exists_on_incomparable as f64,
                ));
                checks.push(Check::flag(
                    "every falsifier verified",
                    f.falsifiers_verified == f.not_exists_verdicts,
                    (f.not_exists_verdicts - f.falsifiers_verified) as f64,
                ));
                checks.push(Check::flag(
                    "exchange symmetries verified",
                    r.exchange.passed == r.exchange.pairs_tested,
                    (r.exchange.pairs_tested - r.exchange.passed) as f64,
                ));
            }
            to_value(&r)
        }
        Command::QsublambdaCheck => {
            let mut out = serde_json::Map::new();
            for (index, (name, e)) in require(spec, 1, config.command)?.into_iter().enumerate() {
                let mut rng = sampling::trial_rng(config.seed, index as u64);
                let probes: Vec<f64> = (0..QLAMBDA_PROBES)
                    .map(|_| rng.random_range(0.01..0.99))
                    .collect();
                let r = q_lambda_clause_check(e.matrix(), &probes, tol)?;
                let slack = tol.psd.max(tol.recon);
                checks.push(Check::flag(
                    format!("{name}: all clauses"),
                    r.pass(slack),
                    worst_residual(&r),
                ));
                out.insert(name.to_string(), to_value(&r));
            }
            Value::Object(out)
        }
    };
    Ok(Report {
        command: config.command,
        config: config.clone(),
        results,
        checks,
    })
}

fn worst_residual(r: &crate::spectral::QLambdaReport) -> f64 {
    [
        r.commutation,
        r.negative_is_one,
        r.zero_is_carrier,
        r.lower_order,
        r.upper_order,
        r.beyond_norm_is_zero,
        r.below_part,
        r.above_part,
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

trait SymResidual {
    fn into_sym_residual(self, target: &SymMatrix) -> f64;
}

impl SymResidual for crate::linalg::Matrix {
    fn into_sym_residual(self, target: &SymMatrix) -> f64 {
        self.sub(&target.clone().into_matrix())
            .map(|d| d.frobenius_norm())
            .unwrap_or(f64::INFINITY)
    }
}

/// Exit code for an error: broken invariants count as failed checks,
/// everything else is an input problem.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvariantViolation(_) | Error::NonConvergence { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name), runs, writes the report to
/// `out` and diagnostics to `err`, and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_INPUT,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let result = RunConfig::from_args(args).and_then(|config| {
        let spec = parse_spec(&config.input, &config.tolerances)?;
        Ok((dispatch(&config, &spec)?, config.format))
    });
    match result {
        Ok((report, format)) => {
            let text = match format {
                Format::Json => report.to_json() + "\n",
                Format::Text => report.to_text(),
            };
            let _ = out.write_all(text.as_bytes());
            report.exit_code()
        }
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", e.name());
            exit_code_for(&e)
        }
    }
}
