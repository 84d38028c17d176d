//! Command-line front end: one operation per invocation, configured by a
//! JSON file, reported as deterministic JSON plus optional CSV.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::certificate::Certificate;
use crate::commutant::{commutant_diagonal_identity, commutant_obstruction, rosenblum_obstruction, DEFAULT_BOUND};
use crate::constructions::{
    build_case1_model, build_case2_model, build_case3_model, design_case4_weights, disturbance_sandwich_check,
    eigenvalue_exclusion_check, Case4WeightDesign,
};
use crate::error::{Error, Result};
use crate::opcore::{OperatorExpr, TruncationWindow, C64};
use crate::schauder::{basis_const_estimate, blowup, unboundedness_evidence_example35, unconditional_const_estimate, SchauderSystem};
use crate::seqcore::ScalarSeq;
use crate::spectral::{
    fredholm_index_certificate, fredholm_kernel, kernel_residual, shift_spectrum, spectral_radius_estimate,
    KERNEL_RESIDUAL_TOL,
};

pub const REPORT_SCHEMA: &str = "schauder-lab.report/1";
pub const CONFIG_SCHEMA_PATH: &str = "crates/core/schema/config.schema.json";

#[derive(Debug, Parser)]
#[command(name = "schauder-lab", version, about = "Certificates and numerics for structured infinite operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Report path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Table output path.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Overrides the config window.
    #[arg(long, value_name = "LO:HI")]
    pub window: Option<String>,
    /// Overrides the config K (or N for blowup).
    #[arg(long = "max-k", value_name = "N")]
    pub max_k: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrum of a bilateral weighted shift and a truncated radius estimate.
    Spectrum(CommonArgs),
    /// Kernel vector of T - lambda inside the weight gap.
    Kernel(CommonArgs),
    /// Index-one certificate for T - lambda.
    IndexCert(CommonArgs),
    /// Diagonal rearranged into a bilateral shift plus a diagonal.
    Case1(CommonArgs),
    /// Diagonal with eigenvalues accumulating at 0 rearranged into a shift.
    Case2(CommonArgs),
    /// Glued bilateral shift and its index certificate.
    Case3(CommonArgs),
    /// Weight schedule keeping the formal eigenvector profile above 1/sqrt(n).
    #[command(name = "case4-design")]
    Case4Design(CommonArgs),
    /// Divergence check excluding eta^2 as an eigenvalue.
    Exclusion(CommonArgs),
    /// Commutant coefficient divergence certificate.
    #[command(name = "commutant-cert")]
    CommutantCert(CommonArgs),
    /// Intertwining (Rosenblum kernel) divergence certificate.
    #[command(name = "rosenblum-cert")]
    RosenblumCert(CommonArgs),
    /// Basis constant table of a Schauder system.
    Basisconst(CommonArgs),
    /// Unconditional constant lower bound by subset search.
    Uncond(CommonArgs),
    /// Finite-rank approximation of the blowing-up operator.
    Blowup(CommonArgs),
    /// Norm growth of the Toeplitz sections of the conditional example.
    #[command(name = "example35-growth")]
    Example35Growth(CommonArgs),
    /// Small-disturbance sandwich inequality for basis constants.
    Disturb(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Kernel(_) => "kernel",
            Command::IndexCert(_) => "index-cert",
            Command::Case1(_) => "case1",
            Command::Case2(_) => "case2",
            Command::Case3(_) => "case3",
            Command::Case4Design(_) => "case4-design",
            Command::Exclusion(_) => "exclusion",
            Command::CommutantCert(_) => "commutant-cert",
            Command::RosenblumCert(_) => "rosenblum-cert",
            Command::Basisconst(_) => "basisconst",
            Command::Uncond(_) => "uncond",
            Command::Blowup(_) => "blowup",
            Command::Example35Growth(_) => "example35-growth",
            Command::Disturb(_) => "disturb",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Spectrum(a)
            | Command::Kernel(a)
            | Command::IndexCert(a)
            | Command::Case1(a)
            | Command::Case2(a)
            | Command::Case3(a)
            | Command::Case4Design(a)
            | Command::Exclusion(a)
            | Command::CommutantCert(a)
            | Command::RosenblumCert(a)
            | Command::Basisconst(a)
            | Command::Uncond(a)
            | Command::Blowup(a)
            | Command::Example35Growth(a)
            | Command::Disturb(a) => a,
        }
    }
}

/// A complex number written as `1.5`, `[re, im]` or `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Pair([f64; 2]),
    Parts {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl From<ComplexInput> for C64 {
    fn from(z: ComplexInput) -> C64 {
        match z {
            ComplexInput::Real(re) => C64::new(re, 0.0),
            ComplexInput::Pair([re, im]) => C64::new(re, im),
            ComplexInput::Parts { re, im } => C64::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
struct SpectrumConfig {
    weights: ScalarSeq,
    window: Option<String>,
    #[serde(default = "default_max_power")]
    max_power: u32,
}

fn default_max_power() -> u32 {
    32
}

#[derive(Debug, Deserialize)]
struct KernelConfig {
    weights: ScalarSeq,
    lambda: ComplexInput,
    window: Option<String>,
}

#[derive(Debug, Deserialize)]
struct Case1Config {
    beta: ScalarSeq,
    alpha: ScalarSeq,
    gamma: ScalarSeq,
    #[serde(default = "default_radius")]
    radius: i64,
}

fn default_radius() -> i64 {
    128
}

#[derive(Debug, Deserialize)]
struct Case2Config {
    lambda: ScalarSeq,
    #[serde(default = "default_radius")]
    radius: i64,
}

#[derive(Debug, Deserialize)]
struct Case3Config {
    lambda: ScalarSeq,
    eta: ScalarSeq,
    window: Option<String>,
}

#[derive(Debug, Deserialize)]
struct Case4Config {
    lambda_lo: f64,
    eta_sq: f64,
    lambda_hi: f64,
    horizon: usize,
}

#[derive(Debug, Deserialize)]
struct ExclusionConfig {
    eta_sq: f64,
    lambda_lo: Option<f64>,
    lambda_hi: Option<f64>,
    #[serde(default = "default_horizon")]
    horizon: usize,
    /// Checks an explicit weight sequence instead of the built-in schedule.
    gamma: Option<ScalarSeq>,
    n: usize,
}

fn default_horizon() -> usize {
    100
}

#[derive(Debug, Deserialize)]
struct CommutantConfig {
    weights: ScalarSeq,
    k: i64,
    n: i64,
    #[serde(default = "default_bound")]
    bound: f64,
}

fn default_bound() -> f64 {
    DEFAULT_BOUND
}

#[derive(Debug, Deserialize)]
struct RosenblumConfig {
    gamma_j: ScalarSeq,
    gamma_j1: ScalarSeq,
    gap_ratio: f64,
    n: i64,
    #[serde(default = "default_ks")]
    ks: Vec<i64>,
    #[serde(default = "default_bound")]
    bound: f64,
}

fn default_ks() -> Vec<i64> {
    vec![0]
}

#[derive(Debug, Deserialize)]
struct BasisConfig {
    system: SchauderSystem,
    k: usize,
    window: Option<String>,
}

#[derive(Debug, Deserialize)]
struct UncondConfig {
    system: SchauderSystem,
    k: usize,
    window: Option<String>,
    #[serde(default = "default_budget")]
    budget: usize,
    #[serde(default)]
    seed: u64,
}

fn default_budget() -> usize {
    2000
}

#[derive(Debug, Deserialize)]
struct BlowupConfig {
    system: SchauderSystem,
    alpha: ScalarSeq,
    n_max: usize,
    window: Option<String>,
}

#[derive(Debug, Deserialize)]
struct GrowthConfig {
    alpha: ScalarSeq,
    sizes: Vec<usize>,
}

#[derive(Debug, Deserialize)]
struct DisturbConfig {
    system: SchauderSystem,
    x: OperatorExpr,
    x_inv: OperatorExpr,
    delta: f64,
    k: usize,
    window: Option<String>,
}

/// Outcome of one invocation.
#[derive(Debug)]
pub struct Outcome {
    /// `None` for commands that compute without certifying.
    pub pass: Option<bool>,
    pub report: Value,
    pub csv: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self.pass {
            Some(false) => 2,
            _ => 0,
        }
    }
}

fn parse_config<T: DeserializeOwned>(text: &str, path: &Path, command: &str) -> Result<T> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?;
    if let Some(c) = value.get("command") {
        if c.as_str() != Some(command) {
            return Err(Error::Config(format!(
                "{}: field `command` is {c}, but the subcommand is {command:?}",
                path.display()
            )));
        }
    }
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let inner = e.inner();
        let field = e.path().to_string();
        Error::Config(format!(
            "{}:{}:{}: field `{field}`: {inner}",
            path.display(),
            inner.line(),
            inner.column()
        ))
    })
}

fn window_or(flag: &Option<String>, config: &Option<String>, default: TruncationWindow) -> Result<TruncationWindow> {
    match flag.as_ref().or(config.as_ref()) {
        Some(s) => s.parse(),
        None => Ok(default),
    }
}

fn certified(cert: Certificate, extra: Value, csv: Option<String>) -> Outcome {
    let pass = cert.pass;
    let mut report = json!({ "certificate": cert });
    if let (Value::Object(r), Value::Object(e)) = (&mut report, extra) {
        r.extend(e);
    }
    Outcome {
        pass: Some(pass),
        report,
        csv,
    }
}

/// Runs one command on already-read config text.
pub fn execute(command: &Command, text: &str) -> Result<Outcome> {
    let args = command.args();
    let name = command.name();
    let path = args.config.as_path();
    Ok(match command {
        Command::Spectrum(_) => {
            let c: SpectrumConfig = parse_config(text, path, name)?;
            let w = window_or(&args.window, &c.window, TruncationWindow::symmetric(256))?;
            let spectrum = shift_spectrum(&c.weights)?;
            let radius = spectral_radius_estimate(&OperatorExpr::weighted_shift(c.weights.clone()), w, c.max_power)?;
            let mut csv = String::from("power,norm,root\n");
            for p in &radius.table {
                csv.push_str(&format!("{},{:e},{:e}\n", p.power, p.norm, p.root));
            }
            Outcome {
                pass: None,
                report: json!({ "spectrum": spectrum, "radius_estimate": radius }),
                csv: Some(csv),
            }
        }
        Command::Kernel(_) => {
            let c: KernelConfig = parse_config(text, path, name)?;
            let w = window_or(&args.window, &c.window, TruncationWindow::symmetric(64))?;
            let kernel = fredholm_kernel(&c.weights, c.lambda.into(), w)?;
            let residual = kernel_residual(&c.weights, &kernel)?;
            let pass = residual <= KERNEL_RESIDUAL_TOL;
            Outcome {
                pass: Some(pass),
                report: json!({
                    "residual": residual,
                    "residual_tolerance": KERNEL_RESIDUAL_TOL,
                    "window_norm_sq": kernel.window_norm_sq(),
                    "kernel": kernel,
                }),
                csv: Some(kernel.to_csv()),
            }
        }
        Command::IndexCert(_) => {
            let c: KernelConfig = parse_config(text, path, name)?;
            let w = window_or(&args.window, &c.window, TruncationWindow::symmetric(64))?;
            certified(fredholm_index_certificate(&c.weights, c.lambda.into(), w)?, json!({}), None)
        }
        Command::Case1(_) => {
            let c: Case1Config = parse_config(text, path, name)?;
            let model = build_case1_model(c.beta, c.alpha, c.gamma)?;
            let identity = model.block_identity(c.radius)?;
            let (spectrum, connected) = model.connectedness()?;
            Outcome {
                pass: Some(identity.pass && connected.pass),
                report: json!({
                    "lambda_min": model.lambda_min,
                    "lambda_max": model.lambda_max,
                    "spectrum_b": spectrum,
                    "block_identity": identity,
                    "connectedness": connected,
                }),
                csv: None,
            }
        }
        Command::Case2(_) => {
            let c: Case2Config = parse_config(text, path, name)?;
            let model = build_case2_model(c.lambda)?;
            certified(model.factorization_identity(c.radius)?, json!({}), None)
        }
        Command::Case3(_) => {
            let c: Case3Config = parse_config(text, path, name)?;
            let w = window_or(&args.window, &c.window, TruncationWindow::symmetric(64))?;
            let model = build_case3_model(c.lambda, c.eta, w)?;
            let spectrum = shift_spectrum(&model.weights)?;
            certified(
                model.index_certificate.clone(),
                json!({ "gap": model.gap, "lambda_star": model.lambda_star, "spectrum": spectrum }),
                None,
            )
        }
        Command::Case4Design(_) => {
            let c: Case4Config = parse_config(text, path, name)?;
            let horizon = args.max_k.unwrap_or(c.horizon);
            let design = design_case4_weights(c.lambda_lo, c.eta_sq, c.lambda_hi, horizon)?;
            let mut csv = String::from("n,gamma,profile\n");
            for (n, (g, p)) in design.gamma.iter().zip(&design.profile).enumerate() {
                csv.push_str(&format!("{},{:e},{:e}\n", n, g, p));
            }
            let density = design.density_ok();
            Outcome {
                pass: Some(design.profile_ok && density),
                report: json!({ "design": design, "density_ok": density }),
                csv: Some(csv),
            }
        }
        Command::Exclusion(_) => {
            let c: ExclusionConfig = parse_config(text, path, name)?;
            let design = match c.gamma {
                Some(g) => Case4WeightDesign::from_sequence(c.eta_sq, g, c.horizon)?,
                None => {
                    let (lo, hi) = c.lambda_lo.zip(c.lambda_hi).ok_or_else(|| {
                        Error::Config("exclusion needs either `gamma` or both `lambda_lo` and `lambda_hi`".into())
                    })?;
                    design_case4_weights(lo, c.eta_sq, hi, c.horizon)?
                }
            };
            let n = args.max_k.unwrap_or(c.n);
            certified(eigenvalue_exclusion_check(&design, n), json!({}), None)
        }
        Command::CommutantCert(_) => {
            let c: CommutantConfig = parse_config(text, path, name)?;
            let n = args.max_k.map_or(c.n, |k| k as i64);
            let cert = if c.k == 0 {
                commutant_diagonal_identity(&c.weights, n)?
            } else {
                commutant_obstruction(&c.weights, c.k, n, c.bound)?
            };
            let csv = cert.get_series("ratios").map(|r| {
                let mut s = String::from("i,ratio\n");
                for (i, v) in (-n..=n).zip(r) {
                    s.push_str(&format!("{i},{v:e}\n"));
                }
                s
            });
            certified(cert, json!({}), csv)
        }
        Command::RosenblumCert(_) => {
            let c: RosenblumConfig = parse_config(text, path, name)?;
            let n = args.max_k.map_or(c.n, |k| k as i64);
            certified(
                rosenblum_obstruction(&c.gamma_j, &c.gamma_j1, c.gap_ratio, n, &c.ks, c.bound)?,
                json!({}),
                None,
            )
        }
        Command::Basisconst(_) => {
            let c: BasisConfig = parse_config(text, path, name)?;
            let k = args.max_k.unwrap_or(c.k);
            let w = window_or(&args.window, &c.window, TruncationWindow::prefix(2 * k + 4))?;
            let system = c.system.rebuild(w)?;
            let r = basis_const_estimate(&system, k, w)?;
            Outcome {
                pass: None,
                csv: Some(r.to_csv()),
                report: json!({ "basis_constants": r }),
            }
        }
        Command::Uncond(_) => {
            let c: UncondConfig = parse_config(text, path, name)?;
            let k = args.max_k.unwrap_or(c.k);
            let w = window_or(&args.window, &c.window, TruncationWindow::prefix(2 * k + 4))?;
            let seed = args.seed.unwrap_or(c.seed);
            let system = c.system.rebuild(w)?;
            let r = unconditional_const_estimate(&system, k, w, c.budget, seed)?;
            Outcome {
                pass: None,
                report: json!({ "unconditional": r }),
                csv: None,
            }
        }
        Command::Blowup(_) => {
            let c: BlowupConfig = parse_config(text, path, name)?;
            let n_max = args.max_k.unwrap_or(c.n_max);
            let w = window_or(&args.window, &c.window, TruncationWindow::prefix((n_max + 1).max(64)))?;
            let system = c.system.rebuild(w)?;
            let r = blowup(&system, &c.alpha, w, n_max)?;
            let mut csv = String::from("n,error,bound\n");
            for (n, (e, b)) in r.errors.iter().zip(&r.bounds).enumerate() {
                csv.push_str(&format!("{n},{e:e},{b:e}\n"));
            }
            Outcome {
                pass: Some(r.pass),
                report: json!({ "blowup": r }),
                csv: Some(csv),
            }
        }
        Command::Example35Growth(_) => {
            let c: GrowthConfig = parse_config(text, path, name)?;
            let r = unboundedness_evidence_example35(&c.alpha, &c.sizes)?;
            let mut csv = String::from("n,norm,lower_bound\n");
            for ((n, a), b) in r.sizes.iter().zip(&r.norms).zip(&r.lower_bounds) {
                csv.push_str(&format!("{n},{a:e},{b:e}\n"));
            }
            Outcome {
                pass: Some(r.norms_nondecreasing && r.lower_bounds_nondecreasing),
                report: json!({ "growth": r }),
                csv: Some(csv),
            }
        }
        Command::Disturb(_) => {
            let c: DisturbConfig = parse_config(text, path, name)?;
            let k = args.max_k.unwrap_or(c.k);
            let w = window_or(&args.window, &c.window, TruncationWindow::prefix(2 * k + 2))?;
            let system = c.system.rebuild(w)?;
            let cert = disturbance_sandwich_check(&system, &c.x, &c.x_inv, c.delta, k, w)?;
            let csv = {
                let q = cert.get_series("q_norms").unwrap_or_default();
                let p = cert.get_series("conjugated_norms").unwrap_or_default();
                let mut s = String::from("k,q_norm,conjugated_norm\n");
                for (i, (a, b)) in q.iter().zip(&p).enumerate() {
                    s.push_str(&format!("{},{a:e},{b:e}\n", i + 1));
                }
                s
            };
            certified(cert, json!({}), Some(csv))
        }
    })
}

fn input_hash(command: &Command, text: &str) -> String {
    let args = command.args();
    let mut h = Sha256::new();
    h.update(command.name().as_bytes());
    h.update([0]);
    h.update(text.as_bytes());
    h.update([0]);
    let overrides = json!({
        "seed": args.seed,
        "window": args.window,
        "max_k": args.max_k,
    });
    h.update(overrides.to_string().as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Full report for a command: the outcome wrapped with provenance fields.
pub fn report(command: &Command, text: &str, outcome: &Outcome) -> Value {
    let args = command.args();
    json!({
        "schema_version": REPORT_SCHEMA,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "command_echo": {
            "config": args.config,
            "seed": args.seed,
            "window": args.window,
            "max_k": args.max_k,
            "csv": args.csv,
        },
        "input_hash": input_hash(command, text),
        "pass": outcome.pass,
        "result": outcome.report,
    })
}

/// Parses arguments, runs the command and writes outputs. Returns the
/// process exit code (0 pass, 2 certificate failure, 1 error).
pub fn main_with_args<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(command: &Command) -> Result<u8> {
    let args = command.args();
    if let Some(n) = args.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let start = Instant::now();
    let outcome = execute(command, &text)?;
    let elapsed = start.elapsed().as_secs_f64();
    let body = serde_json::to_string_pretty(&report(command, &text, &outcome))? + "\n";
    match &args.out {
        Some(p) => {
            std::fs::write(p, body)?;
            let mut timing = p.clone().into_os_string();
            timing.push(".timing.json");
            std::fs::write(timing, serde_json::to_string_pretty(&json!({ "wall_seconds": elapsed }))? + "\n")?;
        }
        None => print!("{body}"),
    }
    if let Some(p) = &args.csv {
        let table = outcome
            .csv
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{} produces no table for --csv", command.name())))?;
        std::fs::write(p, table)?;
    }
    Ok(outcome.exit_code())
}
