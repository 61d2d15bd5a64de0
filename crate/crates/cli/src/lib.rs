//! `pframe` command-line interface.
//!
//! Exit codes: 0 when every requested check passes, 1 when a theorem flag
//! fails, 2 on malformed arguments or unreadable input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use pframe::certify::{self, CheckConfig, OptimizerConfig, ScanReport};
use pframe::duality::{self, VectorFrame};
use pframe::frames::{self, AnalysisFrame, FrameKind, PARSEVAL_TOL};
use pframe::report::{FrameFile, Report};
use pframe::search::{self, Family, FamilyParams};
use pframe::spaces::{Functional, Vector};

/// Offsets applied to `--seed` for each randomised component.
const SAMPLE_SEED_OFFSET: u64 = 0;
const OPTIMIZER_SEED_OFFSET: u64 = 1_000_003;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "pframe",
    version,
    about = "Parseval p-frames and entropic uncertainty certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a frame file from a named construction.
    Gen(GenArgs),
    /// Report the sampled Parseval defect of a frame file.
    Check(CheckArgs),
    /// Certify the uncertainty chain for two analysis frames.
    Certify(CertifyArgs),
    /// Certify the dual chain for two vector frames.
    DualCertify(DualCertifyArgs),
    /// Compare the coherence estimate with the Buzano bound for two orthonormal bases.
    Deutsch(DeutschArgs),
    /// Tabulate R_f + R_g over Renyi orders.
    Sweep(SweepArgs),
    /// Minimise the equality gap over a frame family.
    Search(SearchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Coordinate,
    Orthonormal,
    Fourier,
    RandomParseval2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Role {
    Analysis,
    Vector,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Number of frame elements (fourier, random-parseval2).
    #[arg(long)]
    n: Option<usize>,
    /// Space dimension (coordinate, random-parseval2).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Per-coordinate weights, e.g. "0.5,0.5;1" (coordinate).
    #[arg(long)]
    weights: Option<String>,
    /// JSON file with basis rows as [[re, im], ...] lists (orthonormal).
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "analysis")]
    role: Role,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CheckArgs {
    frame: PathBuf,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = PARSEVAL_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = frames::DEFAULT_EPS_SUPP)]
    eps_supp: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl Common {
    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            starts: self.starts,
            max_iters: self.max_iters,
            seed: self.seed.wrapping_add(OPTIMIZER_SEED_OFFSET),
            ..OptimizerConfig::default()
        }
    }

    fn checks(&self) -> CheckConfig {
        CheckConfig {
            tol: self.tol,
            eps_supp: self.eps_supp,
        }
    }

    fn sample_seed(&self) -> u64 {
        self.seed.wrapping_add(SAMPLE_SEED_OFFSET)
    }

    fn echo(&self) -> serde_json::Value {
        json!({
            "seed": self.seed,
            "optimizer": self.optimizer(),
            "checks": self.checks(),
        })
    }
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    f: PathBuf,
    #[arg(long)]
    g: PathBuf,
    /// Evaluation point as comma-separated entries ("re" or "re:im").
    #[arg(long, conflicts_with = "samples")]
    x: Option<String>,
    /// Number of random sphere points to certify.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DualCertifyArgs {
    #[arg(long)]
    tau: PathBuf,
    #[arg(long)]
    omega: PathBuf,
    /// Functional coordinates, comma-separated ("re" or "re:im").
    #[arg(long = "functional", conflicts_with = "samples")]
    functional: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DeutschArgs {
    #[arg(long)]
    tau: PathBuf,
    #[arg(long)]
    omega: PathBuf,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Slack allowed between the coherence estimate and the Buzano bound.
    #[arg(long, default_value_t = 1e-6)]
    buzano_tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    f: PathBuf,
    #[arg(long)]
    g: PathBuf,
    #[arg(long)]
    x: String,
    /// Comma-separated Renyi orders.
    #[arg(long, default_value = "0.25,0.5,0.999,1.001,2,3")]
    alphas: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyKind {
    RotatedOnb,
    WeightedCoordinate,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, value_enum)]
    family: FamilyKind,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 2)]
    splits: usize,
    /// Use one weight table for both frames.
    #[arg(long)]
    tied: bool,
    /// Number of ranked candidates to write.
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[command(flatten)]
    common: Common,
}

/// Distinguishes bad input (exit 2) from other failures.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(pframe::Error),
}

impl From<pframe::Error> for CliError {
    fn from(e: pframe::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Check(a) => check(a),
        Command::Certify(a) => certify_cmd(a),
        Command::DualCertify(a) => dual_certify_cmd(a),
        Command::Deutsch(a) => deutsch(a),
        Command::Sweep(a) => sweep(a),
        Command::Search(a) => search_cmd(a),
    };
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_scalars(text: &str) -> CliResult<Vec<Complex64>> {
    text.split(',')
        .map(|entry| {
            let entry = entry.trim();
            let (re, im) = entry.split_once(':').unwrap_or((entry, "0"));
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("invalid number {s:?} in {text:?}")))
            };
            Ok(Complex64::new(parse(re)?, parse(im)?))
        })
        .collect()
}

fn parse_reals(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid number {s:?}")))
        })
        .collect()
}

fn parse_weights(text: &str) -> CliResult<Vec<Vec<f64>>> {
    text.split(';').map(parse_reals).collect()
}

fn need<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this kind")))
}

fn read_analysis(path: &Path) -> CliResult<AnalysisFrame> {
    Ok(FrameFile::read(path)?.into_analysis()?)
}

fn read_vector(path: &Path) -> CliResult<VectorFrame> {
    Ok(FrameFile::read(path)?.into_vector()?)
}

fn gen(a: GenArgs) -> CliResult<bool> {
    let kind = match a.kind {
        Kind::Coordinate => FrameKind::Coordinate {
            p: a.p,
            dim: need(a.dim, "dim")?,
            weights: a.weights.as_deref().map(parse_weights).transpose()?,
        },
        Kind::Orthonormal => {
            let path = need(a.matrix, "matrix")?;
            let rows: Vec<Vec<[f64; 2]>> =
                serde_json::from_str(&fs::read_to_string(path)?).map_err(pframe::Error::from)?;
            FrameKind::Orthonormal {
                basis: rows
                    .into_iter()
                    .map(|r| {
                        r.into_iter()
                            .map(|[re, im]| Complex64::new(re, im))
                            .collect()
                    })
                    .collect(),
            }
        }
        Kind::Fourier => FrameKind::Fourier { n: need(a.n, "n")? },
        Kind::RandomParseval2 => FrameKind::RandomParseval2 {
            n: need(a.n, "n")?,
            d: need(a.dim, "dim")?,
        },
    };
    let file = match a.role {
        Role::Analysis => FrameFile::Analysis(frames::generate_frame(&kind, a.seed)?),
        Role::Vector => FrameFile::Vector(duality::generate_vector_frame(&kind, a.seed)?),
    };
    file.write(&a.out)?;
    eprintln!("wrote {}", a.out.display());
    Ok(true)
}

#[derive(Serialize)]
struct CheckResult {
    role: &'static str,
    elements: usize,
    samples: usize,
    defect: f64,
    max_element_norm: f64,
    tolerance: f64,
    parseval_ok: bool,
    norms_ok: bool,
}

fn check(a: CheckArgs) -> CliResult<bool> {
    let file = FrameFile::read(&a.frame)?;
    let (role, elements, defect, max_element_norm) = match &file {
        FrameFile::Analysis(f) => (
            "analysis_frame",
            f.len(),
            frames::sampled_parseval_defect(f, a.samples, a.seed)?,
            f.max_functional_norm(),
        ),
        FrameFile::Vector(f) => (
            "vector_frame",
            f.len(),
            duality::sampled_dual_parseval_defect(f, a.samples, a.seed)?,
            f.max_vector_norm(),
        ),
    };
    let result = CheckResult {
        role,
        elements,
        samples: a.samples,
        defect,
        max_element_norm,
        tolerance: a.tol,
        parseval_ok: defect <= a.tol,
        norms_ok: max_element_norm <= 1.0 + a.tol,
    };
    let ok = result.parseval_ok && result.norms_ok;
    let mut report = Report::new(
        "check",
        json!({ "samples": a.samples, "seed": a.seed, "tol": a.tol }),
        result,
    );
    report.inputs.insert("frame".into(), file.fingerprint()?);
    emit(a.out.as_deref(), &report.to_json()?)?;
    Ok(ok)
}

fn emit_scan<F: Serialize>(
    command: &str,
    common: &Common,
    names: [(&str, &F); 2],
    scan: ScanReport,
) -> CliResult<bool> {
    let ok = scan.passed();
    eprintln!(
        "{} samples, {} violations, c_hat = {}",
        scan.samples,
        scan.violations.len(),
        scan.c_hat
    );
    match common.format {
        Format::Csv => {
            let mut buf = Vec::new();
            scan.write_csv(&mut buf)?;
            emit(common.out.as_deref(), &String::from_utf8_lossy(&buf))?;
        }
        Format::Json => {
            let report = Report::new(command, common.echo(), scan)
                .with_input(names[0].0, names[0].1)?
                .with_input(names[1].0, names[1].1)?;
            emit(common.out.as_deref(), &report.to_json()?)?;
        }
    }
    Ok(ok)
}

fn emit_certificate<F: Serialize>(
    command: &str,
    common: &Common,
    names: [(&str, &F); 2],
    cert: certify::Certificate,
) -> CliResult<bool> {
    if let Format::Csv = common.format {
        return Err(CliError::Usage(
            "CSV output is only available with --samples".into(),
        ));
    }
    let ok = cert.passes.all();
    let report = Report::new(command, common.echo(), cert)
        .with_input(names[0].0, names[0].1)?
        .with_input(names[1].0, names[1].1)?;
    emit(common.out.as_deref(), &report.to_json()?)?;
    Ok(ok)
}

fn certify_cmd(a: CertifyArgs) -> CliResult<bool> {
    let f = read_analysis(&a.f)?;
    let g = read_analysis(&a.g)?;
    let c = &a.common;
    match (&a.x, a.samples) {
        (Some(x), _) => {
            let x = Vector::new(parse_scalars(x)?);
            let cert = certify::certify_point(&f, &g, &x, &c.optimizer(), &c.checks())?;
            emit_certificate("certify", c, [("f", &f), ("g", &g)], cert)
        }
        (None, samples) => {
            let scan = certify::counterexample_scan(
                &f,
                &g,
                samples.unwrap_or(1000),
                c.sample_seed(),
                &c.checks(),
                &c.optimizer(),
            )?;
            emit_scan("certify", c, [("f", &f), ("g", &g)], scan)
        }
    }
}

fn dual_certify_cmd(a: DualCertifyArgs) -> CliResult<bool> {
    let tau = read_vector(&a.tau)?;
    let omega = read_vector(&a.omega)?;
    let c = &a.common;
    match (&a.functional, a.samples) {
        (Some(text), _) => {
            let f = Functional::new(parse_scalars(text)?);
            let cert = duality::dual_certify(&tau, &omega, &f, &c.optimizer(), &c.checks())?;
            emit_certificate("dual-certify", c, [("tau", &tau), ("omega", &omega)], cert)
        }
        (None, samples) => {
            let scan = duality::dual_counterexample_scan(
                &tau,
                &omega,
                samples.unwrap_or(1000),
                c.sample_seed(),
                &c.checks(),
                &c.optimizer(),
            )?;
            emit_scan("dual-certify", c, [("tau", &tau), ("omega", &omega)], scan)
        }
    }
}

#[derive(Serialize)]
struct DeutschResult {
    n: usize,
    mu: f64,
    buzano_bound: f64,
    deutsch_rhs: f64,
    upper: f64,
    c_hat: f64,
    buzano_ok: bool,
    samples: usize,
    chain_violations: Vec<usize>,
    chain_ok: bool,
}

fn deutsch(a: DeutschArgs) -> CliResult<bool> {
    let tau = read_analysis(&a.tau)?;
    let omega = read_analysis(&a.omega)?;
    let c = &a.common;
    let mu = certify::mutual_coherence(&tau, &omega)?;
    let buzano_bound = (1.0 + mu) / 2.0;
    let deutsch_rhs = -2.0 * buzano_bound.ln();
    let n = tau.len();
    let upper = 2.0 * (n as f64).ln();
    let scan = certify::counterexample_scan(
        &tau,
        &omega,
        a.samples,
        c.sample_seed(),
        &c.checks(),
        &c.optimizer(),
    )?;
    let tol = c.tol;
    let chain_violations: Vec<usize> = scan
        .rows
        .iter()
        .filter(|r| !(r.lhs <= upper + tol && r.lhs >= deutsch_rhs - tol))
        .map(|r| r.sample_index)
        .collect();
    let result = DeutschResult {
        n,
        mu,
        buzano_bound,
        deutsch_rhs,
        upper,
        c_hat: scan.c_hat,
        buzano_ok: scan.c_hat <= buzano_bound + a.buzano_tol,
        samples: a.samples,
        chain_ok: chain_violations.is_empty(),
        chain_violations,
    };
    eprintln!("mu = {mu:.6}, Buzano bound = {buzano_bound:.6}, Deutsch RHS = {deutsch_rhs:.6}, c_hat = {:.6}", result.c_hat);
    let ok = result.buzano_ok && result.chain_ok;
    let report = Report::new("deutsch", c.echo(), result)
        .with_input("tau", &tau)?
        .with_input("omega", &omega)?;
    emit(c.out.as_deref(), &report.to_json()?)?;
    Ok(ok)
}

#[derive(Serialize)]
struct SweepPoint {
    alpha: f64,
    renyi_sum: f64,
}

fn sweep(a: SweepArgs) -> CliResult<bool> {
    let f = read_analysis(&a.f)?;
    let g = read_analysis(&a.g)?;
    let x = Vector::new(parse_scalars(&a.x)?);
    let alphas = parse_reals(&a.alphas)?;
    let curve: Vec<SweepPoint> = search::renyi_sweep(&f, &g, &x, &alphas)?
        .into_iter()
        .map(|(alpha, renyi_sum)| SweepPoint { alpha, renyi_sum })
        .collect();
    let shannon_sum = pframe::entropy::p_shannon_entropy(&f, &x)?.value
        + pframe::entropy::p_shannon_entropy(&g, &x)?.value;
    let result = json!({ "shannon_sum": shannon_sum, "curve": curve });
    let report = Report::new("sweep", json!({ "x": a.x, "alphas": alphas }), result)
        .with_input("f", &f)?
        .with_input("g", &g)?;
    emit(a.out.as_deref(), &report.to_json()?)?;
    Ok(true)
}

fn search_cmd(a: SearchArgs) -> CliResult<bool> {
    let family = match a.family {
        FamilyKind::RotatedOnb => Family::RotatedOnb { dim: a.dim },
        FamilyKind::WeightedCoordinate => Family::WeightedCoordinate {
            p: a.p,
            dim: a.dim,
            splits: a.splits,
            tied: a.tied,
        },
    };
    let c = &a.common;
    if let Format::Csv = c.format {
        return Err(CliError::Usage(
            "search writes JSON lines; CSV is not available".into(),
        ));
    }
    let init = FamilyParams::initial(family)?;
    let mut records = search::search_candidates(&init, &c.optimizer(), &c.checks())?;
    records.truncate(a.top);
    let ok = records.iter().all(|r| r.gap >= -c.tol);
    if let Some(best) = records.first() {
        eprintln!(
            "best gap {:.3e} ({} candidates, {})",
            best.gap,
            records.len(),
            search::CANDIDATE_LABEL
        );
    }
    let mut buf = Vec::new();
    search::write_jsonl(&records, &mut buf)?;
    emit(c.out.as_deref(), &String::from_utf8_lossy(&buf))?;
    Ok(ok)
}
