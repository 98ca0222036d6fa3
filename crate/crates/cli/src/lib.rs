//! Command-line front end for `stokes-core`.
//!
//! Every subcommand prints one JSON report on standard output. Exit codes: 0
//! success, 1 a check or verdict failed on well-formed input, 2 invalid input.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use stokes_core::birkhoff::{self, DEFAULT_TRUNCATION_CAP};
use stokes_core::generate::{self, GenParams};
use stokes_core::io::{self, AnyStokesData, InputError, ToJson};
use stokes_core::order::{self, Factor};
use stokes_core::stokes::{self, StokesData};
use stokes_core::{cech, linalg, pairing};
use stokes_core::{
    Complex64, GaussianRational, Rational, Scalar, ScalarMode, StokesError, Tolerance,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "stokes",
    version,
    about = "Stokes data of exponential type: checks and certificates"
)]
pub struct Cli {
    /// Relative tolerance for float mode.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Override the instance's scalar mode (float, gaussian_rational, rational).
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Instance {
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct AtPoint {
    pub file: PathBuf,
    /// Evaluation point as JSON, e.g. `["5", "0"]`; defaults to an admissible point above every factor.
    #[arg(long)]
    pub c: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the defining clauses of Stokes data.
    Validate(Instance),
    /// Sorted factors, Stokes directions and an admissible point.
    Order {
        file: PathBuf,
        /// Write a diagram of the factors, θ₀ and the Stokes directions.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    Monodromy(Instance),
    Iota(Instance),
    Dual(Instance),
    /// Basis of morphisms from the first instance to the second.
    Hom {
        source: PathBuf,
        target: PathBuf,
    },
    Minimality(Instance),
    #[command(name = "induced-form")]
    InducedForm(Instance),
    #[command(name = "k-spaces")]
    KSpaces(Instance),
    Split(Instance),
    /// Certificate for one or more instances.
    Certify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    Cohomology(AtPoint),
    #[command(name = "cech-check")]
    CechCheck {
        #[command(flatten)]
        at: AtPoint,
        /// Residual bound in float mode.
        #[arg(long, default_value_t = 1e-10)]
        abs_tol: f64,
    },
    /// Partial indices of a matrix loop file.
    Indices {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION_CAP)]
        cap: usize,
    },
    /// Write a random instance satisfying the certificate hypotheses.
    Gen {
        /// Number of factors (each of dimension 1 unless --dims is given).
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated block dimensions.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Rank of Σ + Σ†; defaults to the total dimension.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Order { .. } => "order",
            Command::Monodromy(_) => "monodromy",
            Command::Iota(_) => "iota",
            Command::Dual(_) => "dual",
            Command::Hom { .. } => "hom",
            Command::Minimality(_) => "minimality",
            Command::InducedForm(_) => "induced-form",
            Command::KSpaces(_) => "k-spaces",
            Command::Split(_) => "split",
            Command::Certify { .. } => "certify",
            Command::Cohomology(_) => "cohomology",
            Command::CechCheck { .. } => "cech-check",
            Command::Indices { .. } => "indices",
            Command::Gen { .. } => "gen",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Input(InputError),
    Library(StokesError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INVALID_INPUT,
            CliError::Library(e) if is_input_error(e) => EXIT_INVALID_INPUT,
            CliError::Library(_) => EXIT_CHECK_FAILED,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            CliError::Input(e) => json!(e),
            CliError::Library(e) => {
                let mut v = json!(InputError::from_stokes(e));
                v["kind"] = json!(error_kind(e));
                v
            }
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e)
    }
}

impl From<StokesError> for CliError {
    fn from(e: StokesError) -> Self {
        CliError::Library(e)
    }
}

fn is_input_error(e: &StokesError) -> bool {
    matches!(
        e,
        StokesError::InvalidData(_)
            | StokesError::NotGeneric(..)
            | StokesError::EqualFactors(_)
            | StokesError::OnStokesDirection(..)
            | StokesError::NotAdmissible(..)
            | StokesError::Shape(_)
            | StokesError::TypeMismatch(_)
            | StokesError::BadParams(_)
            | StokesError::BadPairing(_)
            | StokesError::IncompatiblePairing { .. }
            | StokesError::NotHermitian { .. }
            | StokesError::ConventionViolation(_)
    )
}

fn error_kind(e: &StokesError) -> &'static str {
    match e {
        StokesError::NotHermitian { .. } => "NotHermitian",
        StokesError::EqualFactors(_) => "EqualFactors",
        StokesError::NotGeneric(..) => "NotGeneric",
        StokesError::OnStokesDirection(..) => "OnStokesDirection",
        StokesError::NotAdmissible(..) => "NotAdmissible",
        StokesError::InvalidData(_) => "InvalidData",
        StokesError::ConventionViolation(_) => "ConventionViolation",
        StokesError::TypeMismatch(_) => "TypeMismatch",
        StokesError::Shape(_) => "Shape",
        StokesError::Singular => "Singular",
        StokesError::IncompatiblePairing { .. } => "IncompatiblePairing",
        StokesError::BadPairing(_) => "BadPairing",
        StokesError::NotSkew { .. } => "NotSkew",
        StokesError::DegenerateKForm(_) => "DegenerateKForm",
        StokesError::InvariantViolated(_) => "InvariantViolated",
        StokesError::Unsatisfiable(_) => "Unsatisfiable",
        StokesError::SingularLoop(_) => "SingularLoop",
        StokesError::NotStabilized(_) => "NotStabilized",
        StokesError::BadParams(_) => "BadParams",
    }
}

/// Result of one subcommand before it is wrapped into a report.
pub struct Outcome {
    pub verdict: String,
    pub passed: bool,
    pub details: Value,
}

impl Outcome {
    fn new(verdict: impl Into<String>, passed: bool, details: Value) -> Self {
        Outcome {
            verdict: verdict.into(),
            passed,
            details,
        }
    }
}

type CmdResult = std::result::Result<Outcome, CliError>;

struct Settings {
    tol: Tolerance,
    mode: Option<ScalarMode>,
}

macro_rules! dispatch {
    ($any:expr, $d:ident => $body:expr) => {
        match $any {
            AnyStokesData::Float($d) => $body,
            AnyStokesData::Gaussian($d) => $body,
            AnyStokesData::Rational($d) => $body,
        }
    };
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(path: &Path) -> std::result::Result<Vec<u8>, CliError> {
    std::fs::read(path)
        .map_err(|e| CliError::Input(InputError::new("file", format!("{}: {e}", path.display()))))
}

fn load(path: &Path, s: &Settings) -> std::result::Result<(AnyStokesData, String), CliError> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| InputError::new("file", format!("{} is not UTF-8", path.display())))?;
    Ok((io::load_instance(&text, s.mode, &s.tol)?, digest(&bytes)))
}

/// Parses `argv` and runs the command; returns the exit code and the report.
pub fn run<I, T>(argv: I) -> (i32, Value)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID_INPUT
            } else {
                EXIT_OK
            };
            return (code, json!({"command": null, "usage": e.to_string()}));
        }
    };
    run_cli(cli)
}

pub fn run_cli(cli: Cli) -> (i32, Value) {
    let start = Instant::now();
    let command = cli.command.name();
    let settings = match settings(&cli) {
        Ok(s) => s,
        Err(e) => return (e.exit_code(), error_report(command, None, &e)),
    };
    if let Command::Certify { files, jobs } = &cli.command {
        if files.len() > 1 {
            return certify_batch(files, *jobs, &settings, start);
        }
    }
    let (result, input_digest) = execute(&cli.command, &settings);
    match result {
        Ok(out) => {
            let code = if out.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            };
            let mut r = report(command, input_digest, &settings, out);
            r["timings"] = json!({"total_ms": start.elapsed().as_secs_f64() * 1e3});
            (code, r)
        }
        Err(e) => (e.exit_code(), error_report(command, input_digest, &e)),
    }
}

fn settings(cli: &Cli) -> std::result::Result<Settings, CliError> {
    let tol = match cli.tol {
        Some(t) if t.is_finite() && t >= 0.0 => Tolerance::new(t),
        Some(t) => return Err(InputError::new("--tol", format!("invalid tolerance {t}")).into()),
        None => Tolerance::default(),
    };
    let mode = match &cli.mode {
        Some(m) => Some(
            ScalarMode::parse(m)
                .ok_or_else(|| InputError::new("--mode", format!("unknown mode {m:?}")))?,
        ),
        None => None,
    };
    Ok(Settings { tol, mode })
}

fn report(command: &str, input_digest: Option<String>, s: &Settings, out: Outcome) -> Value {
    json!({
        "command": command,
        "input_digest": input_digest,
        "tolerance": s.tol.rel_eps,
        "verdict": out.verdict,
        "details": out.details,
    })
}

fn error_report(command: &str, input_digest: Option<String>, e: &CliError) -> Value {
    json!({
        "command": command,
        "input_digest": input_digest,
        "verdict": if e.exit_code() == EXIT_INVALID_INPUT { "INVALID_INPUT" } else { "ERROR" },
        "error": e.to_json(),
    })
}

fn execute(cmd: &Command, s: &Settings) -> (CmdResult, Option<String>) {
    let single = |file: &Path, f: &dyn Fn(&AnyStokesData) -> CmdResult| match load(file, s) {
        Ok((d, dig)) => (
            f(&d).map(|mut o| {
                o.details["scalar_mode"] = json!(d.mode().name());
                o
            }),
            Some(dig),
        ),
        Err(e) => (Err(e), None),
    };
    let tol = &s.tol;
    match cmd {
        Command::Validate(i) => single(&i.file, &|d| dispatch!(d, d => cmd_validate(d, tol))),
        Command::Order { file, svg } => single(
            file,
            &|d| dispatch!(d, d => cmd_order(d, svg.as_deref(), tol)),
        ),
        Command::Monodromy(i) => single(&i.file, &|d| dispatch!(d, d => cmd_monodromy(d, tol))),
        Command::Iota(i) => single(&i.file, &|d| dispatch!(d, d => cmd_iota(d, tol))),
        Command::Dual(i) => single(&i.file, &|d| dispatch!(d, d => cmd_dual(d, tol))),
        Command::Hom { source, target } => {
            let (a, da) = match load(source, s) {
                Ok(x) => x,
                Err(e) => return (Err(e), None),
            };
            let target_settings = Settings {
                tol: s.tol,
                mode: Some(a.mode()),
            };
            let (b, db) = match load(target, &target_settings) {
                Ok(x) => x,
                Err(e) => return (Err(e), Some(da)),
            };
            let dig = digest(format!("{da}{db}").as_bytes());
            let r = match (&a, &b) {
                (AnyStokesData::Float(x), AnyStokesData::Float(y)) => cmd_hom(x, y, tol),
                (AnyStokesData::Gaussian(x), AnyStokesData::Gaussian(y)) => cmd_hom(x, y, tol),
                (AnyStokesData::Rational(x), AnyStokesData::Rational(y)) => cmd_hom(x, y, tol),
                _ => Err(StokesError::TypeMismatch("scalar modes differ".into()).into()),
            };
            (r, Some(dig))
        }
        Command::Minimality(i) => single(&i.file, &|d| dispatch!(d, d => cmd_minimality(d, tol))),
        Command::InducedForm(i) => {
            single(&i.file, &|d| dispatch!(d, d => cmd_induced_form(d, tol)))
        }
        Command::KSpaces(i) => single(&i.file, &|d| dispatch!(d, d => cmd_k_spaces(d, tol))),
        Command::Split(i) => single(&i.file, &|d| dispatch!(d, d => cmd_split(d, tol))),
        Command::Certify { files, .. } => {
            single(&files[0], &|d| dispatch!(d, d => cmd_certify(d, tol)))
        }
        Command::Cohomology(at) => single(
            &at.file,
            &|d| dispatch!(d, d => cmd_cohomology(d, at.c.as_deref(), tol)),
        ),
        Command::CechCheck { at, abs_tol } => single(
            &at.file,
            &|d| dispatch!(d, d => cmd_cech_check(d, at.c.as_deref(), *abs_tol, tol)),
        ),
        Command::Indices { file, cap } => match read(file) {
            Ok(bytes) => (cmd_indices(&bytes, *cap, tol), Some(digest(&bytes))),
            Err(e) => (Err(e), None),
        },
        Command::Gen {
            n,
            dims,
            rank,
            seed,
            out,
        } => cmd_gen(*n, dims.as_deref(), *rank, *seed, out.as_deref(), s),
    }
}

fn certify_batch(files: &[PathBuf], jobs: usize, s: &Settings, start: Instant) -> (i32, Value) {
    let one = |f: &PathBuf| {
        let (r, dig) = execute(
            &Command::Certify {
                files: vec![f.clone()],
                jobs: 1,
            },
            s,
        );
        let (code, mut v) = match r {
            Ok(out) => {
                let code = if out.passed {
                    EXIT_OK
                } else {
                    EXIT_CHECK_FAILED
                };
                (code, report("certify", dig, s, out))
            }
            Err(e) => (e.exit_code(), error_report("certify", dig, &e)),
        };
        v["file"] = json!(f.display().to_string());
        (code, v)
    };
    let results: Vec<(i32, Value)> = match rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
    {
        Ok(pool) => pool.install(|| files.par_iter().map(one).collect()),
        Err(_) => files.iter().map(one).collect(),
    };
    let code = results.iter().map(|r| r.0).max().unwrap_or(EXIT_OK);
    let all = digest(
        results
            .iter()
            .map(|r| r.1["input_digest"].as_str().unwrap_or(""))
            .collect::<String>()
            .as_bytes(),
    );
    let certified = results
        .iter()
        .filter(|r| r.1["verdict"] == "CERTIFIED_PURE_POLARIZED")
        .count();
    let verdict = if code == EXIT_OK {
        "ALL_CERTIFIED"
    } else {
        "NOT_ALL_CERTIFIED"
    };
    (
        code,
        json!({
            "command": "certify",
            "input_digest": all,
            "tolerance": s.tol.rel_eps,
            "verdict": verdict,
            "details": {"certified": certified, "total": results.len()},
            "results": results.into_iter().map(|r| r.1).collect::<Vec<_>>(),
            "timings": {"total_ms": start.elapsed().as_secs_f64() * 1e3, "jobs": jobs},
        }),
    )
}

fn cmd_validate<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> CmdResult {
    let r = d.validate(tol);
    let ok = r.is_valid();
    Ok(Outcome::new(
        if ok { "VALID" } else { "INVALID" },
        ok,
        json!({"violations": r.violations, "clauses": r.clauses()}),
    ))
}

fn cmd_order<S: Scalar>(d: &StokesData<S>, svg: Option<&Path>, tol: &Tolerance) -> CmdResult {
    let ty = &d.ty;
    let mut pairs = Vec::new();
    for j in 0..ty.n_factors() {
        for i in 0..j {
            let (a, b) = order::stokes_directions(&ty.factors[i], &ty.factors[j])?;
            pairs.push(json!({
                "pair": [i, j],
                "directions": [io::direction_to_json(&a), io::direction_to_json(&b)],
                "angles": [a.angle(), b.angle()],
            }));
        }
    }
    let c = order::admissible_point(&ty.factors, &ty.theta0, tol)?;
    if let Some(path) = svg {
        std::fs::write(path, order_svg(ty))
            .map_err(|e| InputError::new("--svg", format!("{}: {e}", path.display())))?;
    }
    Ok(Outcome::new(
        "OK",
        true,
        json!({
            "theta0": io::direction_to_json(&ty.theta0),
            "theta0_angle": ty.theta0.angle(),
            "factors": ty.factors.iter().map(io::factor_to_json).collect::<Vec<_>>(),
            "dims": ty.dims,
            "stokes_directions": pairs,
            "admissible_point": io::factor_to_json(&c),
        }),
    ))
}

/// Factors as points, θ₀ as a solid ray and the Stokes directions as dashed rays.
pub fn order_svg<R: stokes_core::scalar::RealScalar>(ty: &stokes::StokesType<R>) -> String {
    let (cx, cy, radius) = (250.0, 250.0, 200.0);
    let ray = |theta: f64, r: f64| (cx + r * theta.cos(), cy - r * theta.sin());
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="500" height="500" viewBox="0 0 500 500">"#
    );
    let _ = writeln!(
        s,
        r#"<circle cx="{cx}" cy="{cy}" r="{radius}" fill="none" stroke="black"/>"#
    );
    for j in 0..ty.n_factors() {
        for i in 0..j {
            if let Ok((a, b)) = order::stokes_directions(&ty.factors[i], &ty.factors[j]) {
                for dir in [a, b] {
                    let (x, y) = ray(dir.angle(), radius);
                    let _ = writeln!(
                        s,
                        r#"<line x1="{cx}" y1="{cy}" x2="{x:.2}" y2="{y:.2}" stroke="gray" stroke-dasharray="4 3"><title>c{} / c{}</title></line>"#,
                        i + 1,
                        j + 1
                    );
                }
            }
        }
    }
    let (x, y) = ray(ty.theta0.angle(), radius + 20.0);
    let _ = writeln!(
        s,
        r#"<line x1="{cx}" y1="{cy}" x2="{x:.2}" y2="{y:.2}" stroke="red" stroke-width="2"/><text x="{x:.2}" y="{y:.2}" fill="red">θ₀</text>"#
    );
    let max = ty.factors.iter().map(Factor::norm).fold(0.0, f64::max);
    let scale = if max > 0.0 { 0.75 * radius / max } else { 1.0 };
    for (k, f) in ty.factors.iter().enumerate() {
        let (re, im) = f.to_f64_pair();
        let (x, y) = (cx + scale * re, cy - scale * im);
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="blue"/><text x="{:.2}" y="{:.2}">c{} = {f}</text>"#,
            x + 6.0,
            y - 6.0,
            k + 1
        );
    }
    s.push_str("</svg>\n");
    s
}

fn cmd_monodromy<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> CmdResult {
    Ok(Outcome::new("OK", true, d.monodromy(tol)?.to_json()))
}

fn round_trip<S: Scalar>(
    d: &StokesData<S>,
    image: StokesData<S>,
    back: StokesData<S>,
    tol: &Tolerance,
) -> CmdResult {
    let valid = image.validate(tol);
    let involutive = back.approx_eq(d, tol);
    let ok = valid.is_valid() && involutive;
    Ok(Outcome::new(
        if ok { "OK" } else { "CHECK_FAILED" },
        ok,
        json!({
            "result": io::instance_to_json(&image),
            "result_violations": valid.violations,
            "involutive": involutive,
        }),
    ))
}

fn cmd_iota<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> CmdResult {
    let image = d.iota(tol)?;
    let back = image.iota(tol)?;
    round_trip(d, image, back, tol)
}

fn cmd_dual<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> CmdResult {
    let image = d.dualize(tol)?;
    let back = image.dualize(tol)?;
    round_trip(d, image, back, tol)
}

fn cmd_hom<S: Scalar>(d: &StokesData<S>, e: &StokesData<S>, tol: &Tolerance) -> CmdResult {
    let basis = stokes::hom_space(d, e, tol)?;
    Ok(Outcome::new(
        "OK",
        true,
        json!({
            "dim": basis.len(),
            "basis": basis.iter().map(|m| json!({
                "lambda1": m.lambda1.to_json(),
                "lambda2": m.lambda2.to_json(),
            })).collect::<Vec<_>>(),
        }),
    ))
}

fn cmd_minimality<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> CmdResult {
    let ks = pairing::k_spaces(d, tol)?;
    let minimal = ks.iter().all(|k| k.dim() == 0);
    Ok(Outcome::new(
        if minimal { "MINIMAL" } else { "NOT_MINIMAL" },
        true,
        json!({
            "minimal": minimal,
            "k_dims": ks.iter().map(|k| k.dim()).collect::<Vec<_>>(),
        }),
    ))
}

fn cmd_induced_form<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> CmdResult {
    let form = pairing::induced_form_on_f(d, tol)?;
    let class = linalg::hermitian_classify(&form.gram, tol)?;
    let mut details = form.to_json();
    details["classification"] = class.to_json();
    Ok(Outcome::new(class.class.label(), true, details))
}

fn cmd_k_spaces<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> CmdResult {
    let ks = pairing::k_spaces(d, tol)?;
    Ok(Outcome::new(
        "OK",
        true,
        json!({"k_spaces": ks.iter().map(ToJson::to_json).collect::<Vec<_>>()}),
    ))
}

fn cmd_split<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> CmdResult {
    let split = pairing::split_minimal(d, tol)?;
    let back = pairing::reassemble(&split, tol)?;
    let reproduces = back.approx_eq(d, tol);
    let mut details = split.to_json();
    details["reassembly_matches"] = json!(reproduces);
    Ok(Outcome::new(
        if reproduces { "OK" } else { "CHECK_FAILED" },
        reproduces,
        details,
    ))
}

fn cmd_certify<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> CmdResult {
    d.ensure_valid(tol)?;
    let cert = pairing::certify(d, tol)?;
    let ok = cert.verdict.is_certified();
    let verdict = if ok {
        "CERTIFIED_PURE_POLARIZED"
    } else {
        "FAILED"
    };
    Ok(Outcome::new(verdict, ok, cert.to_json()))
}

fn evaluation_point<S: Scalar>(
    d: &StokesData<S>,
    c: Option<&str>,
    tol: &Tolerance,
) -> std::result::Result<Factor<S::Real>, CliError> {
    match c {
        Some(text) => {
            let v = io::parse_json(text).map_err(|mut e| {
                e.field = "--c".into();
                e
            })?;
            Ok(io::factor_from_json(&v, "--c")?)
        }
        None => Ok(order::admissible_point(&d.ty.factors, &d.ty.theta0, tol)?),
    }
}

fn cmd_cohomology<S: Scalar>(d: &StokesData<S>, c: Option<&str>, tol: &Tolerance) -> CmdResult {
    d.ensure_valid(tol)?;
    let c = evaluation_point(d, c, tol)?;
    let r = cech::cohomology_report(d, &c, tol)?;
    Ok(Outcome::new("OK", true, r.to_json()))
}

fn cmd_cech_check<S: Scalar>(
    d: &StokesData<S>,
    c: Option<&str>,
    abs_tol: f64,
    tol: &Tolerance,
) -> CmdResult {
    d.ensure_valid(tol)?;
    let c = evaluation_point(d, c, tol)?;
    let r = cech::cech_check(d, &c, tol, abs_tol)?;
    let mut details = json!(r);
    details["c"] = io::factor_to_json(&c);
    Ok(Outcome::new(
        if r.passed { "AGREE" } else { "DISAGREE" },
        r.passed,
        details,
    ))
}

fn cmd_indices(bytes: &[u8], cap: usize, tol: &Tolerance) -> CmdResult {
    let text = std::str::from_utf8(bytes).map_err(|_| InputError::new("file", "not UTF-8"))?;
    let g = io::load_loop(text)?;
    let r = birkhoff::partial_indices_with_cap(&g, tol, cap)?;
    let pure = r.is_pure_weight_zero();
    Ok(Outcome::new(
        if pure { "PURE_WEIGHT_ZERO" } else { "NOT_PURE" },
        true,
        r.to_json(),
    ))
}

fn cmd_gen(
    n: Option<usize>,
    dims: Option<&[usize]>,
    rank: Option<usize>,
    seed: u64,
    out: Option<&Path>,
    s: &Settings,
) -> (CmdResult, Option<String>) {
    let dims = match (n, dims) {
        (_, Some(d)) if n.is_some_and(|n| n != d.len()) => {
            return (
                Err(InputError::new("--n", "disagrees with the length of --dims").into()),
                None,
            )
        }
        (_, Some(d)) => d.to_vec(),
        (Some(n), None) => vec![1; n],
        (None, None) => {
            return (
                Err(InputError::new("--n", "give --n or --dims").into()),
                None,
            )
        }
    };
    let total: usize = dims.iter().sum();
    let params = GenParams::new(dims, rank.unwrap_or(total), seed);
    let mode = s.mode.unwrap_or(ScalarMode::GaussianRational);
    let data = match mode {
        ScalarMode::Float => {
            generate::generate_certified::<Complex64>(&params).map(|d| io::instance_to_json(&d))
        }
        ScalarMode::GaussianRational => generate::generate_certified::<GaussianRational>(&params)
            .map(|d| io::instance_to_json(&d)),
        ScalarMode::Rational => {
            generate::generate_certified::<Rational>(&params).map(|d| io::instance_to_json(&d))
        }
    };
    let instance = match data {
        Ok(v) => v,
        Err(e) => return (Err(e.into()), None),
    };
    let text = match serde_json::to_string_pretty(&instance) {
        Ok(t) => t + "\n",
        Err(e) => return (Err(InputError::new("instance", e.to_string()).into()), None),
    };
    let dig = digest(text.as_bytes());
    if let Some(path) = out {
        if let Err(e) = std::fs::write(path, &text) {
            return (
                Err(InputError::new("--out", format!("{}: {e}", path.display())).into()),
                None,
            );
        }
    }
    let mut details = json!({
        "seed": params.seed,
        "dims": params.dims,
        "rank": params.rank,
        "scalar_mode": mode.name(),
        "out": out.map(|p| p.display().to_string()),
    });
    if out.is_none() {
        details["instance"] = instance;
    }
    (Ok(Outcome::new("OK", true, details)), Some(dig))
}
