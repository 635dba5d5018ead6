//! Command-line front end: job description, flag handling and output.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fit::geometric_grid;
use crate::kernels::{trace_modified, KernelIndex, TraceOptions};
use crate::quadrature::QuadratureOptions;
use crate::spectrum::{parse_tridiagonal, OperatorModel, PowerLaw, SpectrumSource};
use crate::verify::default_suite;
use crate::zeta::{det_zeta, residue_at, seeley_coefficient, zeta, zeta_at_zero, zeta_continued, zeta_prime_at_zero, Route, ZetaOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Eval,
    Det,
    Residues,
    KernelTable,
    Verify,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// Spectrum part of a model description. A tridiagonal matrix may be given
/// inline or as a two-column text file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpectrum {
    DirichletInterval { length: f64 },
    Explicit { eigenvalues: Vec<(f64, u32)> },
    KnownSequence {
        c: f64,
        p: f64,
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        shift: f64,
        #[serde(default = "one")]
        multiplicity: u32,
    },
    TridiagonalMatrix { diagonal: Vec<f64>, off_diagonal: Vec<f64> },
    TridiagonalFile { path: PathBuf },
}

fn one() -> u32 {
    1
}

fn default_n() -> u32 {
    1
}

fn default_h() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_n")]
    pub n: u32,
    #[serde(default = "default_h")]
    pub h: u32,
    pub spectrum: ModelSpectrum,
}

impl ModelConfig {
    pub fn build(&self) -> Result<OperatorModel> {
        let source = match &self.spectrum {
            ModelSpectrum::DirichletInterval { length } => SpectrumSource::DirichletInterval { length: *length },
            ModelSpectrum::Explicit { eigenvalues } => SpectrumSource::Explicit {
                eigenvalues: eigenvalues.clone(),
            },
            ModelSpectrum::KnownSequence {
                c,
                p,
                offset,
                shift,
                multiplicity,
            } => SpectrumSource::KnownSequence(PowerLaw {
                offset: *offset,
                shift: *shift,
                multiplicity: *multiplicity,
                ..PowerLaw::new(*c, *p)
            }),
            ModelSpectrum::TridiagonalMatrix {
                diagonal,
                off_diagonal,
            } => SpectrumSource::TridiagonalMatrix {
                diagonal: diagonal.clone(),
                off_diagonal: off_diagonal.clone(),
            },
            ModelSpectrum::TridiagonalFile { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                let (diagonal, off_diagonal) = parse_tridiagonal(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                SpectrumSource::TridiagonalMatrix {
                    diagonal,
                    off_diagonal,
                }
            }
        };
        OperatorModel::new(self.n, self.h, source)
    }

    fn kind(&self) -> &'static str {
        match self.spectrum {
            ModelSpectrum::DirichletInterval { .. } => "dirichlet_interval",
            ModelSpectrum::Explicit { .. } => "explicit",
            ModelSpectrum::KnownSequence { .. } => "known_sequence",
            ModelSpectrum::TridiagonalMatrix { .. } | ModelSpectrum::TridiagonalFile { .. } => "tridiagonal_matrix",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Settings {
    pub theta: f64,
    pub tau_min: f64,
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Integrand evaluations per quadrature.
    pub budget: usize,
    /// Eigenvalues per trace evaluation.
    pub mode_budget: usize,
    pub lattice_eps: f64,
}

impl Default for Settings {
    fn default() -> Self {
        let z = ZetaOptions::default();
        Self {
            theta: z.trace.theta,
            tau_min: z.trace.tau_min,
            tol_abs: z.quad.tol_abs,
            tol_rel: z.quad.tol_rel,
            budget: z.quad.budget,
            mode_budget: z.trace.mode_budget,
            lattice_eps: z.lattice_eps,
        }
    }
}

impl Settings {
    pub fn zeta_options(&self) -> ZetaOptions {
        ZetaOptions {
            trace: TraceOptions {
                theta: self.theta,
                tau_min: self.tau_min,
                mode_budget: self.mode_budget,
            },
            quad: QuadratureOptions {
                tol_abs: self.tol_abs,
                tol_rel: self.tol_rel,
                tau_min: self.tau_min,
                budget: self.budget,
            },
            lattice_eps: self.lattice_eps,
        }
    }
}

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: CommandKind,
    #[serde(default)]
    pub model: Option<ModelConfig>,
    /// Points for `eval`.
    #[serde(default)]
    pub s: Vec<f64>,
    /// Seeley indices for `residues`.
    #[serde(default)]
    pub k: Vec<u32>,
    /// Parts-depth for `kernel-table`, or a forced depth for `eval`.
    #[serde(default)]
    pub m: Option<i32>,
    /// τ-points for `kernel-table`.
    #[serde(default)]
    pub tau: Vec<f64>,
    #[serde(default)]
    pub settings: Settings,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl JobConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            model: None,
            s: Vec::new(),
            k: Vec::new(),
            m: None,
            tau: Vec::new(),
            settings: Settings::default(),
            format: Format::default(),
            out: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Parses a config document; errors name the line, column and field.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Dirichlet,
    Explicit,
    KnownSequence,
    Tridiagonal,
}

#[derive(Debug, Parser)]
#[command(name = "spectral-zeta", version, about = "Spectral zeta functions through modified heat kernels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// ζ(s) at a list of points by the best applicable route.
    Eval(JobArgs),
    /// ζ(0), ζ'(0) and the zeta-regularized determinant.
    Det(JobArgs),
    /// Residues and heat coefficients over a range of Seeley indices.
    Residues(JobArgs),
    /// Modified trace 𝓚_{n,m}(τ) on a τ-grid.
    KernelTable(JobArgs),
    /// Verification suite for the modified heat equations.
    Verify(JobArgs),
}

#[derive(Debug, Default, clap::Args)]
pub struct JobArgs {
    /// JSON job description; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Interval length of the Dirichlet model.
    #[arg(long, allow_hyphen_values = true)]
    pub length: Option<f64>,
    /// Two-column file with the diagonal and off-diagonal of a matrix.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Comma-separated eigenvalues, each optionally `value:multiplicity`.
    #[arg(long)]
    pub eigenvalues: Option<String>,
    /// λ_k = c·k^p for the known-sequence model.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub h: Option<u32>,
    /// Comma-separated s-values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub s: Option<Vec<f64>>,
    /// Seeley indices: `a..b` (inclusive) or a comma list.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<i32>,
    /// Comma-separated τ-points for kernel-table.
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub tau_min: Option<f64>,
    /// Absolute and relative quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Integrand evaluations per quadrature.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the resolved job as JSON and exit.
    #[arg(long)]
    pub print_config: bool,
}

fn parse_eigenvalues(text: &str) -> Result<Vec<(f64, u32)>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|item| {
            let bad = || Error::Config(format!("--eigenvalues: cannot read `{item}`"));
            match item.split_once(':') {
                Some((v, m)) => Ok((v.trim().parse().map_err(|_| bad())?, m.trim().parse().map_err(|_| bad())?)),
                None => Ok((item.parse().map_err(|_| bad())?, 1)),
            }
        })
        .collect()
}

/// `a..b` inclusive, or `a,b,c`.
pub fn parse_k_range(text: &str) -> Result<Vec<u32>> {
    let bad = || Error::Config(format!("--k: cannot read `{text}`"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn model_from_flags(args: &JobArgs, base: Option<&ModelConfig>) -> Result<Option<ModelConfig>> {
    let kind = args.model.or_else(|| {
        if args.length.is_some() {
            Some(ModelKind::Dirichlet)
        } else if args.file.is_some() {
            Some(ModelKind::Tridiagonal)
        } else if args.eigenvalues.is_some() {
            Some(ModelKind::Explicit)
        } else if args.c.is_some() || args.p.is_some() {
            Some(ModelKind::KnownSequence)
        } else {
            None
        }
    });
    let Some(kind) = kind else {
        let Some(base) = base else { return Ok(None) };
        let mut m = base.clone();
        m.n = args.n.unwrap_or(m.n);
        m.h = args.h.unwrap_or(m.h);
        return Ok(Some(m));
    };
    let base_spectrum = base.map(|b| &b.spectrum);
    let spectrum = match kind {
        ModelKind::Dirichlet => ModelSpectrum::DirichletInterval {
            length: args.length.unwrap_or(match base_spectrum {
                Some(ModelSpectrum::DirichletInterval { length }) => *length,
                _ => std::f64::consts::PI,
            }),
        },
        ModelKind::Explicit => match (&args.eigenvalues, base_spectrum) {
            (Some(t), _) => ModelSpectrum::Explicit {
                eigenvalues: parse_eigenvalues(t)?,
            },
            (None, Some(s @ ModelSpectrum::Explicit { .. })) => s.clone(),
            _ => return Err(Error::Config("--model explicit needs --eigenvalues".into())),
        },
        ModelKind::KnownSequence => {
            let (c0, p0, offset, shift, multiplicity) = match base_spectrum {
                Some(ModelSpectrum::KnownSequence {
                    c,
                    p,
                    offset,
                    shift,
                    multiplicity,
                }) => (Some(*c), Some(*p), *offset, *shift, *multiplicity),
                _ => (None, None, 0.0, 0.0, 1),
            };
            let (Some(c), Some(p)) = (args.c.or(c0), args.p.or(p0)) else {
                return Err(Error::Config("--model known-sequence needs --c and --p".into()));
            };
            ModelSpectrum::KnownSequence {
                c,
                p,
                offset,
                shift,
                multiplicity,
            }
        }
        ModelKind::Tridiagonal => match (&args.file, base_spectrum) {
            (Some(path), _) => ModelSpectrum::TridiagonalFile { path: path.clone() },
            (None, Some(s @ (ModelSpectrum::TridiagonalFile { .. } | ModelSpectrum::TridiagonalMatrix { .. }))) => {
                s.clone()
            }
            _ => return Err(Error::Config("--model tridiagonal needs --file".into())),
        },
    };
    let n = args.n.or(base.map(|b| b.n)).unwrap_or(1);
    let h = args.h.or(base.map(|b| b.h)).unwrap_or(2);
    Ok(Some(ModelConfig { n, h, spectrum }))
}

/// Builds the job: config file (if any), then flags on top.
pub fn resolve(command: CommandKind, args: &JobArgs) -> Result<JobConfig> {
    let mut job = match &args.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let mut job: JobConfig = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            // files named in a config are relative to it
            if let Some(ModelConfig {
                spectrum: ModelSpectrum::TridiagonalFile { path: p },
                ..
            }) = &mut job.model
            {
                if p.is_relative() {
                    *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
                }
            }
            job
        }
        None => JobConfig::new(command),
    };
    job.command = command;
    job.model = model_from_flags(args, job.model.as_ref())?;
    if let Some(s) = &args.s {
        job.s = s.clone();
    }
    if let Some(k) = &args.k {
        job.k = parse_k_range(k)?;
    }
    if args.m.is_some() {
        job.m = args.m;
    }
    if let Some(t) = &args.tau {
        job.tau = t.clone();
    }
    let st = &mut job.settings;
    if let Some(v) = args.theta {
        st.theta = v;
    }
    if let Some(v) = args.tau_min {
        st.tau_min = v;
    }
    if let Some(v) = args.tol {
        st.tol_abs = v;
        st.tol_rel = v;
    }
    if let Some(v) = args.budget {
        st.budget = v;
    }
    if let Some(f) = args.format {
        job.format = f;
    }
    if args.out.is_some() {
        job.out = args.out.clone();
    }
    validate_settings(&job.settings)?;
    Ok(job)
}

fn validate_settings(s: &Settings) -> Result<()> {
    let positive = [
        ("theta", s.theta),
        ("tau_min", s.tau_min),
        ("tol_abs", s.tol_abs),
        ("tol_rel", s.tol_rel),
        ("lattice_eps", s.lattice_eps),
    ];
    for (name, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("settings.{name} = {v} must be positive")));
        }
    }
    if s.budget == 0 || s.mode_budget == 0 {
        return Err(Error::Config("budgets must be positive".into()));
    }
    Ok(())
}

/// 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn csv_document(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn json_document(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON serializes");
    s.push('\n');
    s
}

fn require_model(job: &JobConfig) -> Result<(OperatorModel, &ModelConfig)> {
    let cfg = job
        .model
        .as_ref()
        .ok_or_else(|| Error::Config("no model given (use --model or a config file)".into()))?;
    Ok((cfg.build()?, cfg))
}

fn run_eval(job: &JobConfig) -> Result<String> {
    let (model, cfg) = require_model(job)?;
    if job.s.is_empty() {
        return Err(Error::Config("eval needs at least one s (--s)".into()));
    }
    let opts = job.settings.zeta_options();
    let mut objs = Vec::new();
    for &s in &job.s {
        let v = match job.m {
            Some(m) => zeta_continued(&model, s, Some(m), &opts)?,
            None => zeta(&model, s, &opts)?,
        };
        objs.push(json!({
            "model": cfg.kind(),
            "n": model.n(),
            "h": model.h(),
            "s": s,
            "m": v.plan.as_ref().map(|p| p.m),
            "value": v.value,
            "error": v.error_estimate,
            "route": v.route,
            "lattice_offset_used": v.route == Route::LatticeOffset,
            "modes_max": v.modes_max,
            "evaluations": v.evaluations,
        }));
    }
    match job.format {
        Format::Json => Ok(json_document(&Value::Array(objs))),
        Format::Csv => csv_document(
            &["s", "value", "error", "route", "m", "lattice_offset_used", "modes_max", "evaluations"],
            objs.iter()
                .map(|o| {
                    vec![
                        fmt_num(o["s"].as_f64().unwrap_or(f64::NAN)),
                        fmt_num(o["value"].as_f64().unwrap_or(f64::NAN)),
                        fmt_num(o["error"].as_f64().unwrap_or(f64::NAN)),
                        o["route"].as_str().unwrap_or_default().to_string(),
                        o["m"].as_i64().map(|m| m.to_string()).unwrap_or_default(),
                        o["lattice_offset_used"].to_string(),
                        o["modes_max"].to_string(),
                        o["evaluations"].to_string(),
                    ]
                })
                .collect(),
        ),
    }
}

fn run_det(job: &JobConfig) -> Result<String> {
    let (model, _) = require_model(job)?;
    let opts = job.settings.zeta_options();
    let z0 = zeta_at_zero(&model, &opts)?;
    let zp = zeta_prime_at_zero(&model, &opts)?;
    let (det, det_err) = det_zeta(&model, &opts)?;
    match job.format {
        Format::Json => Ok(json_document(&json!({
            "zeta0": z0.value,
            "zeta0_error": z0.error_estimate,
            "zeta_prime0": zp.value,
            "zeta_prime0_error": zp.error_estimate,
            "det": det,
            "det_error": det_err,
        }))),
        Format::Csv => csv_document(
            &["zeta0", "zeta0_error", "zeta_prime0", "zeta_prime0_error", "det", "det_error"],
            vec![[z0.value, z0.error_estimate, zp.value, zp.error_estimate, det, det_err]
                .iter()
                .map(|&v| fmt_num(v))
                .collect()],
        ),
    }
}

fn run_residues(job: &JobConfig) -> Result<String> {
    let (model, _) = require_model(job)?;
    let opts = job.settings.zeta_options();
    let ks: Vec<u32> = if job.k.is_empty() { (0..=4).collect() } else { job.k.clone() };
    let mut objs = Vec::new();
    for k in ks {
        let r = residue_at(&model, k, &opts)?;
        let (a_k, a_k_error) = match (r.a_k, r.a_k_error) {
            (Some(a), Some(e)) => (a, e),
            _ => seeley_coefficient(&model, k, &opts)?,
        };
        objs.push(json!({
            "k": k,
            "s0": r.s0,
            "residue": r.residue,
            "residue_error": r.residue_error,
            "boundary_residue": r.boundary_residue,
            "a_k": a_k,
            "a_k_error": a_k_error,
            "route": r.route,
        }));
    }
    match job.format {
        Format::Json => Ok(json_document(&Value::Array(objs))),
        Format::Csv => csv_document(
            &["k", "s0", "residue", "residue_error", "boundary_residue", "a_k", "a_k_error", "route"],
            objs.iter()
                .map(|o| {
                    let num = |key: &str| o[key].as_f64().map(fmt_num).unwrap_or_default();
                    vec![
                        o["k"].to_string(),
                        num("s0"),
                        num("residue"),
                        num("residue_error"),
                        num("boundary_residue"),
                        num("a_k"),
                        num("a_k_error"),
                        o["route"].as_str().unwrap_or_default().to_string(),
                    ]
                })
                .collect(),
        ),
    }
}

fn run_kernel_table(job: &JobConfig) -> Result<String> {
    let (model, _) = require_model(job)?;
    let idx = KernelIndex::new(model.n(), model.h(), job.m.unwrap_or(0))?;
    let opts = job.settings.zeta_options().trace;
    let grid = if job.tau.is_empty() {
        let s = model.lambda_min().powf(-1.0 / model.h() as f64);
        geometric_grid(0.02 * s, 4.0 * s, 40)
    } else {
        job.tau.clone()
    };
    let mut samples = Vec::with_capacity(grid.len());
    for &t in &grid {
        samples.push(trace_modified(&model, idx, t, &opts)?);
    }
    match job.format {
        Format::Csv => csv_document(
            &["tau", "value", "modes", "trunc_bound"],
            samples
                .iter()
                .map(|s| {
                    vec![
                        fmt_num(s.tau),
                        fmt_num(s.value),
                        s.modes_used.to_string(),
                        fmt_num(s.truncation_bound),
                    ]
                })
                .collect(),
        ),
        Format::Json => Ok(json_document(&json!({
            "n": idx.n,
            "h": idx.h,
            "m": idx.m,
            "samples": samples,
        }))),
    }
}

fn run_verify(job: &JobConfig) -> Result<String> {
    let rows = default_suite()?;
    match job.format {
        Format::Json => Ok(json_document(&serde_json::to_value(&rows).expect("rows serialize"))),
        Format::Csv => csv_document(
            &["variant", "n", "h", "m", "lambda", "relative_residual", "threshold", "asserted", "pass"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.variant.clone(),
                        r.n.to_string(),
                        r.h.to_string(),
                        r.m.to_string(),
                        r.lambda.to_string(),
                        fmt_num(r.relative_residual),
                        fmt_num(r.threshold),
                        r.asserted.to_string(),
                        r.pass.to_string(),
                    ]
                })
                .collect(),
        ),
    }
}

/// Runs a resolved job and returns the output document.
pub fn run(job: &JobConfig) -> Result<String> {
    match job.command {
        CommandKind::Eval => run_eval(job),
        CommandKind::Det => run_det(job),
        CommandKind::Residues => run_residues(job),
        CommandKind::KernelTable => run_kernel_table(job),
        CommandKind::Verify => run_verify(job),
    }
}

/// Full invocation: parse, resolve, run, write. Returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, args) = match &cli.command {
        Sub::Eval(a) => (CommandKind::Eval, a),
        Sub::Det(a) => (CommandKind::Det, a),
        Sub::Residues(a) => (CommandKind::Residues, a),
        Sub::KernelTable(a) => (CommandKind::KernelTable, a),
        Sub::Verify(a) => (CommandKind::Verify, a),
    };
    let outcome = resolve(command, args).and_then(|job| {
        if args.print_config {
            return Ok((job.to_json() + "\n", None));
        }
        let doc = run(&job)?;
        Ok((doc, job.out.clone()))
    });
    match outcome {
        Ok((doc, None)) => {
            print!("{doc}");
            0
        }
        Ok((doc, Some(path))) => match std::fs::write(&path, doc) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                1
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
