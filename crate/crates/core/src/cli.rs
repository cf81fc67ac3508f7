//! Command-line front end behind the `holonomy` binary.
//!
//! Every command prints a JSON [`Report`] (to `--output` or stdout). Tables go
//! to `--csv` when requested. Exit codes: 0 success, 2 input or usage error,
//! 3 undefined holonomy or phase, 4 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::coherent::{self, RegimeCell};
use crate::continuum::{self, BuiltinPath, ConvergenceStudy};
use crate::error::{Error, Result};
use crate::grassmann::{self, SubspaceSequence};
use crate::holonomy::{self, Closure, HolonomyResult};
use crate::interferometer;
use crate::io::{matrix_rows, SequenceFile};
use crate::matops::Tolerance;
use crate::uhlmann;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNDEFINED: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_KAPPA_GRID: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "holonomy", version, about = "Discrete non-Abelian holonomies and their interferometric readout")]
pub struct Cli {
    /// Relative rank threshold (singular values below tol·σ_max count as zero).
    #[arg(long, global = true, env = "HOLONOMY_TOL", default_value_t = crate::matops::DEFAULT_RELATIVE_TOL)]
    pub tol: f64,
    /// Seed for every random draw.
    #[arg(long, global = true, env = "HOLONOMY_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Report destination (stdout if absent); for `gen`, the sequence file.
    #[arg(long, global = true, env = "HOLONOMY_OUTPUT")]
    pub output: Option<PathBuf>,
    /// Table destination for commands that produce one.
    #[arg(long, global = true, env = "HOLONOMY_CSV")]
    pub csv: Option<PathBuf>,
    /// Include wall-clock timing in the report (makes reports run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Direct and/or iterative holonomy of a sequence file.
    Holonomy(HolonomyArgs),
    /// Abelian phases of a rank-1 sequence and the interferometric κ scan.
    Pancharatnam(PancharatnamArgs),
    /// Spin-j four-direction example, or its regime map with --grid.
    Coherent(CoherentArgs),
    /// Convergence of both discrete holonomies along a built-in path.
    Converge(ConvergeArgs),
    /// Uhlmann holonomy of the projector sequence and its match with U_I.
    Uhlmann(InputArgs),
    /// Write a sequence file.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Direct,
    Iterative,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    #[arg(long, env = "HOLONOMY_INPUT")]
    pub input: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct HolonomyArgs {
    #[arg(long, env = "HOLONOMY_INPUT")]
    pub input: PathBuf,
    #[arg(long, value_enum, env = "HOLONOMY_MODE", default_value = "both")]
    pub mode: Mode,
    /// Omit the closing link back to the first frame.
    #[arg(long)]
    pub open: bool,
    /// Also test interferometric maximality against this many random unitaries.
    #[arg(long, env = "HOLONOMY_TRIALS")]
    pub trials: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct PancharatnamArgs {
    #[arg(long, env = "HOLONOMY_INPUT")]
    pub input: PathBuf,
    /// Number of κ points in [0, 2π).
    #[arg(long, env = "HOLONOMY_GRID", default_value_t = DEFAULT_KAPPA_GRID)]
    pub grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CoherentArgs {
    /// Integer spin.
    #[arg(long, default_value_t = 1)]
    pub j: u32,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub theta0: f64,
    /// Defaults to θ0 + π/2.
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub phi1: f64,
    /// Points per axis of the (θ0, Δφ) regime map; switches to grid mode.
    #[arg(long, env = "HOLONOMY_GRID")]
    pub grid: Option<usize>,
    /// Spins of the regime map.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub js: Vec<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvergeArgs {
    /// One of great-circle, small-circle, open-arc, coherent-open, coherent-closed, partial-endpoint.
    #[arg(long)]
    pub path: String,
    /// Resolutions m.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128,256,512,1024,2048,4096")]
    pub m: Vec<usize>,
    /// Coarse step count of the Richardson reference.
    #[arg(long, env = "HOLONOMY_STEPS", default_value_t = continuum::REFERENCE_STEPS)]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Random,
    PathSample,
    PartialPair,
    FourPoint,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Number of frames.
    #[arg(long)]
    pub m: Option<usize>,
    /// Rank of the partial link (partial-pair).
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    /// Built-in path (path-sample).
    #[arg(long, default_value = "coherent-open")]
    pub path: String,
    #[arg(long, default_value_t = 1)]
    pub j: u32,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub theta0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub phi1: f64,
}

/// Machine-readable result of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub parameters: Value,
    pub config: Config,
    /// `"ok"`, `"undefined"` or `"error"`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Config {
    pub tol_relative: f64,
    pub tol_absolute: f64,
    pub seed: u64,
}

struct Outcome {
    results: Value,
    undefined: bool,
}

impl Outcome {
    fn ok(results: Value) -> Self {
        Self { results, undefined: false }
    }
}

/// Exit code for an error surfaced by the library.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::UndefinedPhase { .. } | Error::Inadmissible { .. } => EXIT_UNDEFINED,
        Error::NonFinite | Error::Numerical(_) => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// its outputs. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (report, code) = execute(&cli);
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    let destination = match cli.command {
        Command::Gen(_) => None,
        _ => cli.output.as_deref(),
    };
    if let Err(e) = emit(destination, &text) {
        eprintln!("holonomy: {e}");
        return EXIT_INPUT;
    }
    if let Some(msg) = &report.error {
        eprintln!("holonomy: {msg}");
    }
    code
}

/// Runs the parsed command and builds its report with the matching exit code.
pub fn execute(cli: &Cli) -> (Report, i32) {
    let start = Instant::now();
    let tol = Tolerance::with_relative(cli.tol);
    let config = Config {
        tol_relative: tol.relative,
        tol_absolute: tol.absolute,
        seed: cli.seed,
    };
    let (name, parameters) = match &cli.command {
        Command::Holonomy(a) => ("holonomy", to_value(a)),
        Command::Pancharatnam(a) => ("pancharatnam", to_value(a)),
        Command::Coherent(a) => ("coherent", to_value(a)),
        Command::Converge(a) => ("converge", to_value(a)),
        Command::Uhlmann(a) => ("uhlmann", to_value(a)),
        Command::Gen(a) => ("gen", to_value(a)),
    };
    let outcome = if !(cli.tol > 0.0 && cli.tol < 1.0) {
        Err(Error::InvalidArgument(format!("--tol must lie in (0, 1), got {}", cli.tol)))
    } else {
        match &cli.command {
            Command::Holonomy(a) => cmd_holonomy(a, tol, cli.seed),
            Command::Pancharatnam(a) => cmd_pancharatnam(a, tol, cli.csv.as_deref()),
            Command::Coherent(a) => cmd_coherent(a, tol, cli.csv.as_deref()),
            Command::Converge(a) => cmd_converge(a, tol, cli.csv.as_deref()),
            Command::Uhlmann(a) => cmd_uhlmann(a, tol),
            Command::Gen(a) => cmd_gen(a, cli.seed, cli.output.as_deref()),
        }
    };
    let timing_ms = cli.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    let mut report = Report {
        command: name.to_string(),
        parameters,
        config,
        status: "ok".into(),
        error: None,
        results: Value::Null,
        timing_ms,
    };
    let code = match outcome {
        Ok(o) => {
            report.results = o.results;
            if o.undefined {
                report.status = "undefined".into();
                EXIT_UNDEFINED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let code = exit_code(&e);
            report.status = if code == EXIT_UNDEFINED { "undefined" } else { "error" }.into();
            report.error = Some(e.to_string());
            code
        }
    };
    (report, code)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("arguments serialize")
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::InvalidArgument(format!("stdout: {e}")))
        }
    }
}

fn load(path: &Path) -> Result<SubspaceSequence> {
    SequenceFile::read(path)?.to_sequence()
}

fn sequence_summary(seq: &SubspaceSequence) -> Value {
    json!({ "ambient_dim": seq.ambient_dim(), "rank": seq.rank(), "length": seq.len() })
}

fn complex(z: num_complex::Complex64) -> Value {
    json!([z.re, z.im])
}

fn cmd_holonomy(a: &HolonomyArgs, tol: Tolerance, seed: u64) -> Result<Outcome> {
    let seq = load(&a.input)?;
    let closure = if a.open { Closure::Open } else { Closure::Closed };
    let direct = matches!(a.mode, Mode::Direct | Mode::Both)
        .then(|| holonomy::direct_holonomy_with(&seq, closure, tol))
        .transpose()?;
    let iterative = matches!(a.mode, Mode::Iterative | Mode::Both)
        .then(|| holonomy::iterative_holonomy_with(&seq, closure, tol))
        .transpose()?;
    let difference = match (&direct, &iterative) {
        (Some(HolonomyResult { matrix: Some(d), .. }), Some(HolonomyResult { matrix: Some(i), .. })) => {
            Some((d - i).norm())
        }
        _ => None,
    };
    let undefined = [&direct, &iterative]
        .iter()
        .any(|r| r.as_ref().is_some_and(|r| !r.is_defined()));
    let maximality = match (a.trials, &direct) {
        (Some(trials), Some(d)) if d.is_defined() && !a.open => {
            Some(interferometer::verify_maximality(&seq, trials, seed, tol)?)
        }
        _ => None,
    };
    Ok(Outcome {
        results: json!({
            "sequence": sequence_summary(&seq),
            "closure": closure,
            "direct": direct,
            "iterative": iterative,
            "difference_frobenius": difference,
            "maximality": maximality,
        }),
        undefined,
    })
}

fn cmd_pancharatnam(a: &PancharatnamArgs, tol: Tolerance, csv: Option<&Path>) -> Result<Outcome> {
    if a.grid < 2 {
        return Err(Error::InvalidArgument("--grid must be at least 2".into()));
    }
    let seq = load(&a.input)?;
    let gamma_d = holonomy::pancharatnam_direct(&seq, tol)?;
    let chain = holonomy::pancharatnam_iterative(&seq, tol)?;
    let scan = interferometer::kappa_scan(&seq, a.grid)?;
    let (kappa_max, intensity_max) = interferometer::scan_argmax(&scan).expect("nonempty scan");
    let arg = gamma_d.arg();
    let offset = (kappa_max - arg).rem_euclid(std::f64::consts::TAU);
    let kappa_error = offset.min(std::f64::consts::TAU - offset);
    if let Some(path) = csv {
        write_csv(path, &["kappa", "intensity"], scan.iter().map(|&(k, v)| vec![num(k), num(v)]))?;
    }
    Ok(Outcome::ok(json!({
        "sequence": sequence_summary(&seq),
        "gamma_direct": complex(gamma_d),
        "gamma_iterative": complex(chain.phase),
        "phase_direct": arg,
        "agreement": (gamma_d - chain.phase).norm(),
        "iterative_chain": chain.accumulated.iter().map(|&z| complex(z)).collect::<Vec<_>>(),
        "grid": a.grid,
        "grid_resolution": std::f64::consts::TAU / a.grid as f64,
        "kappa_argmax": kappa_max,
        "intensity_max": intensity_max,
        "kappa_error": kappa_error,
    })))
}

fn cmd_coherent(a: &CoherentArgs, tol: Tolerance, csv: Option<&Path>) -> Result<Outcome> {
    if let Some(points) = a.grid {
        let report = coherent::regime_grid(&a.js, points, points, a.phi0, tol)?;
        if let Some(path) = csv {
            write_csv(path, REGIME_COLUMNS, report.cells.iter().map(regime_row))?;
        }
        return Ok(Outcome::ok(json!({ "grid": points, "js": a.js, "summary": report.summary })));
    }
    let theta1 = a.theta1.unwrap_or(a.theta0 + std::f64::consts::FRAC_PI_2);
    let fp = coherent::four_point_example(a.j, a.theta0, theta1, a.phi0, a.phi1, tol)?;
    let undefined = fp.direct_undefined()
        || fp.iterative_undefined()
        || !fp.direct_oracle.is_defined()
        || !fp.iterative_oracle.is_defined();
    Ok(Outcome {
        results: serde_json::to_value(&fp).expect("four-point bundle serializes"),
        undefined,
    })
}

const REGIME_COLUMNS: &[&str] = &[
    "j",
    "theta0",
    "dphi",
    "q_d",
    "q_i",
    "eta0",
    "chi0",
    "chi1",
    "r_dominant_32",
    "r_dominant_14",
    "q_i_sign_agrees",
    "dev_link32",
    "dev_link14",
    "dev_direct",
    "dev_iterative",
    "dev_direct_corrected",
    "oracle_gap",
    "match_link32",
    "match_link14",
    "match_direct",
    "match_iterative",
    "match_direct_corrected",
];

fn regime_row(c: &RegimeCell) -> Vec<String> {
    vec![
        c.j.to_string(),
        num(c.theta0),
        num(c.dphi),
        num(c.q_d),
        num(c.q_i),
        num(c.eta0),
        num(c.chi0),
        num(c.chi1),
        c.r_dominant_32.to_string(),
        c.r_dominant_14.to_string(),
        c.q_i_sign_agrees.to_string(),
        num(c.dev_link32),
        num(c.dev_link14),
        opt_num(c.dev_direct),
        opt_num(c.dev_iterative),
        opt_num(c.dev_direct_corrected),
        opt_num(c.oracle_gap),
        c.match_link32.to_string(),
        c.match_link14.to_string(),
        c.match_direct.to_string(),
        c.match_iterative.to_string(),
        c.match_direct_corrected.to_string(),
    ]
}

fn cmd_converge(a: &ConvergeArgs, tol: Tolerance, csv: Option<&Path>) -> Result<Outcome> {
    let builtin: BuiltinPath = a.path.parse()?;
    if a.m.iter().any(|&m| m < 2) {
        return Err(Error::InvalidArgument("every m must be at least 2".into()));
    }
    let path = builtin.build()?;
    let reference = continuum::reference_holonomy(&path, a.steps, tol)?;
    let study = continuum::convergence_study_against(&path, &a.m, reference, tol)?;
    if let Some(p) = csv {
        write_csv(p, CONVERGENCE_COLUMNS, convergence_rows(&study))?;
    }
    Ok(Outcome::ok(json!({
        "path": builtin.name(),
        "closed": builtin.is_closed(),
        "reference": {
            "steps": study.reference.steps,
            "closing_rank": study.reference.closing_rank,
            "closing": matrix_rows::to_rows(&study.reference.closing),
            "holonomy": matrix_rows::to_rows(&study.reference.holonomy),
        },
        "rows": study.rows,
        "direct_ratios": study.direct_ratios(),
        "iterative_ratios": study.iterative_ratios(),
    })))
}

const CONVERGENCE_COLUMNS: &[&str] = &["m", "dev_direct", "dev_iterative", "ratio_direct", "ratio_iterative", "flagged"];

fn convergence_rows(study: &ConvergenceStudy) -> Vec<Vec<String>> {
    let (rd, ri) = (study.direct_ratios(), study.iterative_ratios());
    study
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let ratio = |v: &[Option<f64>]| if i == 0 { None } else { v[i - 1] };
            vec![
                r.m.to_string(),
                opt_num(r.dev_direct),
                opt_num(r.dev_iterative),
                opt_num(ratio(&rd)),
                opt_num(ratio(&ri)),
                r.flagged.to_string(),
            ]
        })
        .collect()
}

fn cmd_uhlmann(a: &InputArgs, tol: Tolerance) -> Result<Outcome> {
    let seq = load(&a.input)?;
    let projectors = uhlmann::ProjectorSequence::from_sequence(&seq);
    let u = uhlmann::uhlmann_holonomy(&projectors, tol)?;
    let deviation = uhlmann::compare_iterative(&seq, tol)?;
    Ok(Outcome::ok(json!({
        "sequence": sequence_summary(&seq),
        "uhlmann": matrix_rows::to_rows(&u),
        "max_element_deviation": deviation,
    })))
}

fn cmd_gen(a: &GenArgs, seed: u64, output: Option<&Path>) -> Result<Outcome> {
    let output = output.ok_or_else(|| Error::InvalidArgument("gen needs --output for the sequence file".into()))?;
    let (seq, kind) = match a.kind {
        GenKind::Random => (grassmann::random_sequence(a.n, a.k, a.m.unwrap_or(5), seed)?, "random"),
        GenKind::PathSample => {
            let path: BuiltinPath = a.path.parse()?;
            (continuum::discretize(&path.build()?, a.m.unwrap_or(16))?, "path-sample")
        }
        GenKind::PartialPair => (
            grassmann::random_partial_sequence(a.n, a.k, a.m.unwrap_or(2), a.rank, seed)?,
            "partial-pair",
        ),
        GenKind::FourPoint => {
            let theta1 = a.theta1.unwrap_or(a.theta0 + std::f64::consts::FRAC_PI_2);
            (coherent::four_point_sequence(a.j, a.theta0, theta1, a.phi0, a.phi1)?, "four-point")
        }
    };
    let file = SequenceFile::from_sequence(&seq)
        .with_metadata("kind", kind)
        .with_metadata("seed", seed)
        .with_metadata("parameters", to_value(a));
    file.write(output)?;
    Ok(Outcome::ok(json!({
        "written": output.display().to_string(),
        "sequence": sequence_summary(&seq),
    })))
}

/// `{:.16e}`: 17 significant digits, enough to round-trip an `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write_csv<R>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()>
where
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let io_err = |e: csv::Error| Error::InvalidArgument(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row).map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}
