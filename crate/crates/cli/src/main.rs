//! `pblab`: verification suites, family tables, figure data and squeezed-state
//! reports from the command line.
//!
//! Exit codes: 0 when every check passes, 1 when one fails, 2 on a
//! configuration error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use pblab_core::figures::{format_number, plot_data, FigureId, DEFAULT_POINTS};
use pblab_core::operators::{apply, build_ab, squeeze_identity_gaps, Strategy};
use pblab_core::squeeze::{
    annihilation_residual, closed_form_states, coefficient_cancellation, functional_kappa, functional_tau, standard_bump,
    Truncation,
};
use pblab_core::verify::{ANNIHILATION_TOL, CANCELLATION_TOL, SERIES_TAIL, SERIES_TOL, SQUEEZE_IDENTITY_TOL};
use pblab_core::{
    inner_product, run_catalog, FamilyMember, Function1d, Method, PbProfile, ProfileKind, Side, SqueezeParams, TowerIndex,
    VerifyOptions,
};

#[derive(Parser, Debug)]
#[command(name = "pblab", version, about = "Pseudo-bosonic ladder operators, su(1,1) triples and squeezed states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full relation catalog and emit a JSON report.
    Verify(VerifyArgs),
    /// Tabulate family or tower members at given points.
    Table(TableArgs),
    /// Emit the CSV data behind a figure panel.
    PlotData(PlotArgs),
    /// Report the squeezed-state identities for one z = r e^{i theta}.
    Squeeze(SqueezeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProfileName {
    Constant,
    Quartic,
    Cosine,
    Custom,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[arg(long, value_enum, default_value = "constant")]
    profile: ProfileName,
    /// Scale k > 0 of the lowering operator.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    k: f64,
    /// Deformation strength of the quartic (>= 0) or cosine (|gamma| < 1) profile.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Value of the constant profile.
    #[arg(long, allow_hyphen_values = true)]
    alpha_const: Option<f64>,
    /// Expression in x for the custom profile.
    #[arg(long)]
    alpha: Option<String>,
    /// Normalization of the phi family.
    #[arg(long, allow_hyphen_values = true)]
    nphi: Option<f64>,
    /// Normalization of the psi family.
    #[arg(long, allow_hyphen_values = true)]
    npsi: Option<f64>,
}

/// Default strength when `--gamma` is omitted.
const DEFAULT_GAMMA: f64 = 0.5;

impl ProfileArgs {
    fn build(&self) -> Result<Arc<PbProfile>, String> {
        let stray = |flag: &str| Err(format!("{flag} does not apply to the {:?} profile", self.profile).to_lowercase());
        let profile = match self.profile {
            ProfileName::Constant => {
                if self.gamma.is_some() {
                    return stray("--gamma");
                }
                if self.alpha.is_some() {
                    return stray("--alpha");
                }
                PbProfile::builtin(ProfileKind::Constant { alpha: self.alpha_const.unwrap_or(1.0) }, self.k)
                    .map_err(|e| e.to_string())?
            }
            ProfileName::Quartic | ProfileName::Cosine => {
                if self.alpha_const.is_some() {
                    return stray("--alpha-const");
                }
                if self.alpha.is_some() {
                    return stray("--alpha");
                }
                let gamma = self.gamma.unwrap_or(DEFAULT_GAMMA);
                let kind = if self.profile == ProfileName::Quartic {
                    ProfileKind::Quartic { gamma }
                } else {
                    ProfileKind::Cosine { gamma }
                };
                PbProfile::builtin(kind, self.k).map_err(|e| e.to_string())?
            }
            ProfileName::Custom => {
                if self.gamma.is_some() {
                    return stray("--gamma");
                }
                if self.alpha_const.is_some() {
                    return stray("--alpha-const");
                }
                let src = self.alpha.as_deref().ok_or("the custom profile needs --alpha \"<expr>\"")?;
                PbProfile::parse_custom(src, self.k).map_err(|e| e.to_string())?
            }
        };
        let profile = if self.nphi.is_some() || self.npsi.is_some() {
            profile.with_normalization(self.nphi, self.npsi).map_err(|e| e.to_string())?
        } else {
            profile
        };
        Ok(Arc::new(profile))
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// Replaces every tolerance except the finite-difference one.
    #[arg(long)]
    tol: Option<f64>,
    /// Tolerance of the finite-difference cross-check.
    #[arg(long)]
    fd_tol: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TowerName {
    PhiEven,
    PhiOdd,
    PsiEven,
    PsiOdd,
}

impl TowerName {
    fn side(self) -> Side {
        match self {
            TowerName::PhiEven | TowerName::PhiOdd => Side::Phi,
            TowerName::PsiEven | TowerName::PsiOdd => Side::Psi,
        }
    }

    fn index(self, m: usize) -> TowerIndex {
        match self {
            TowerName::PhiEven | TowerName::PsiEven => TowerIndex::even(m),
            TowerName::PhiOdd | TowerName::PsiOdd => TowerIndex::odd(m),
        }
    }

    fn column(self) -> &'static str {
        match self {
            TowerName::PhiEven => "phi_even",
            TowerName::PhiOdd => "phi_odd",
            TowerName::PsiEven => "psi_even",
            TowerName::PsiOdd => "psi_odd",
        }
    }
}

/// How `phi_n`, `psi_n` are evaluated in `table`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EvalPath {
    /// The Hermite closed form.
    Closed,
    /// One raising step with exact derivatives of the previous member.
    Symbolic,
    /// One raising step through the ladder action on the family.
    Family,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// Family index `n` or inclusive range `a..b`.
    #[arg(long, conflicts_with_all = ["tower", "m"])]
    n: Option<String>,
    /// Tower to tabulate instead of `phi_n`, `psi_n`.
    #[arg(long, value_enum, requires = "m")]
    tower: Option<TowerName>,
    /// Tower index `m` or inclusive range `a..b`.
    #[arg(long, requires = "tower")]
    m: Option<String>,
    /// Comma-separated evaluation points.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    #[arg(long, value_enum, default_value = "closed")]
    path: EvalPath,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Panel id: fig1a, fig1b, fig2a, fig2b, fig3a, fig3b, fig3c or fig3d.
    #[arg(long, required_unless_present = "all", conflicts_with = "all")]
    figure: Option<String>,
    /// Every panel, one file each in `--out-dir`.
    #[arg(long, requires = "out_dir")]
    all: bool,
    #[arg(long, allow_hyphen_values = true)]
    xmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xmax: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Single-panel output file; standard output when omitted.
    #[arg(long, short, conflicts_with = "out_dir")]
    output: Option<PathBuf>,
    /// Directory receiving `<id>.csv` per panel.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SqueezeArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    #[arg(long, allow_hyphen_values = true)]
    r: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, value_enum, default_value = "json")]
    report: ReportFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(String),
    Runtime(String),
}

type Outcome = Result<bool, Failure>;

fn config<E: ToString>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime<E: ToString>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| runtime(format!("writing {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                // a closed reader (e.g. `| head`) ends output normally
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(runtime(format!("writing output: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn check_tolerance(flag: &str, v: Option<f64>) -> Result<(), Failure> {
    match v {
        Some(t) if !(t >= 0.0 && t.is_finite()) => Err(config(format!("{flag} must be finite and non-negative, got {t}"))),
        _ => Ok(()),
    }
}

fn run_verify(args: &VerifyArgs) -> Outcome {
    check_tolerance("--tol", args.tol)?;
    check_tolerance("--fd-tol", args.fd_tol)?;
    let profile = args.profile.build().map_err(config)?;
    let report = run_catalog(&profile, &VerifyOptions { tolerance: args.tol, fd_tolerance: args.fd_tol });
    let mut json = serde_json::to_string_pretty(&report).map_err(runtime)?;
    json.push('\n');
    emit(&args.output, &json)?;
    let passed = report.records.iter().filter(|r| r.passed).count();
    eprintln!("{passed}/{} relations passed for {}", report.records.len(), report.profile);
    for r in report.records.iter().filter(|r| !r.passed) {
        eprintln!("FAIL {}: residual {:?}, tolerance {:e}; {}", r.id, r.residual, r.tolerance, r.detail);
    }
    Ok(report.passed)
}

/// `a` or the inclusive range `a..b`.
fn parse_range(flag: &str, s: &str) -> Result<Vec<usize>, Failure> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| config(format!("{flag}: cannot read {t:?} as an index")));
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(config(format!("{flag}: empty range {s}")));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![num(s)?]),
    }
}

/// `phi_n(x)` or `psi_n(x)` along `path`.
fn member_value(profile: &Arc<PbProfile>, side: Side, n: usize, x: f64, path: EvalPath) -> Result<f64, String> {
    let strategy = match path {
        EvalPath::Closed => None,
        EvalPath::Symbolic => Some(Strategy::Symbolic),
        EvalPath::Family => Some(Strategy::FamilyCalculus),
    };
    match strategy {
        Some(s) if n > 0 => {
            // b phi_{n-1} = sqrt(n) phi_n and a^dagger psi_{n-1} = sqrt(n) psi_n
            let ab = build_ab(profile);
            let op = if side == Side::Phi { &ab.b } else { &ab.a_dag };
            let prev = FamilyMember::on_side(profile, side, n - 1);
            let v: C64 = apply(op, &prev, x, s).map_err(|e| e.to_string())?;
            Ok(v.re / (n as f64).sqrt())
        }
        _ => FamilyMember::on_side(profile, side, n).eval(x).map_err(|e| e.to_string()),
    }
}

fn run_table(args: &TableArgs) -> Outcome {
    let profile = args.profile.build().map_err(config)?;
    if args.x.iter().any(|x| !x.is_finite()) {
        return Err(config("--x values must be finite"));
    }
    let mut out = String::new();
    match (&args.n, args.tower, &args.m) {
        (Some(n), None, None) => {
            let ns = parse_range("--n", n)?;
            let cells: Vec<(f64, usize)> = args.x.iter().flat_map(|&x| ns.iter().map(move |&n| (x, n))).collect();
            let rows = cells
                .par_iter()
                .map(|&(x, n)| {
                    Ok((
                        member_value(&profile, Side::Phi, n, x, args.path)?,
                        member_value(&profile, Side::Psi, n, x, args.path)?,
                    ))
                })
                .collect::<Result<Vec<_>, String>>()
                .map_err(runtime)?;
            out.push_str("x,n,phi,psi\n");
            for ((x, n), (phi, psi)) in cells.iter().zip(rows) {
                let _ = writeln!(out, "{},{n},{},{}", format_number(*x), format_number(phi), format_number(psi));
            }
        }
        (None, Some(tower), Some(m)) => {
            if args.path != EvalPath::Closed {
                return Err(config("--path applies to --n tables only"));
            }
            let ms = parse_range("--m", m)?;
            let cells: Vec<(f64, usize)> = args.x.iter().flat_map(|&x| ms.iter().map(move |&m| (x, m))).collect();
            let rows = cells
                .par_iter()
                .map(|&(x, m)| FamilyMember::tower(&profile, tower.side(), tower.index(m)).eval(x))
                .collect::<Result<Vec<_>, _>>()
                .map_err(runtime)?;
            let _ = writeln!(out, "x,m,{}", tower.column());
            for ((x, m), v) in cells.iter().zip(rows) {
                let _ = writeln!(out, "{},{m},{}", format_number(*x), format_number(v));
            }
        }
        _ => return Err(config("table needs either --n or both --tower and --m")),
    }
    emit(&args.output, &out)?;
    Ok(true)
}

fn run_plot(args: &PlotArgs) -> Outcome {
    let ids: Vec<FigureId> = match &args.figure {
        Some(name) => vec![FigureId::from_name(name).ok_or_else(|| {
            let known: Vec<&str> = FigureId::ALL.iter().map(|f| f.name()).collect();
            config(format!("unknown figure id {name:?}; expected one of {}", known.join(", ")))
        })?],
        None => FigureId::ALL.to_vec(),
    };
    if args.points < 2 {
        return Err(config("--points must be at least 2"));
    }
    for id in &ids {
        let (lo, hi) = id.range();
        let (xmin, xmax) = (args.xmin.unwrap_or(lo), args.xmax.unwrap_or(hi));
        if !(xmin < xmax && xmin.is_finite() && xmax.is_finite()) {
            return Err(config(format!("need finite --xmin < --xmax, got [{xmin}, {xmax}]")));
        }
        let csv = plot_data(*id, xmin, xmax, args.points).map_err(runtime)?.to_csv();
        match &args.out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| runtime(format!("creating {}: {e}", dir.display())))?;
                emit(&Some(dir.join(format!("{}.csv", id.name()))), &csv)?;
            }
            None => emit(&args.output, &csv)?,
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct SeriesSummary {
    value: C64,
    closed_form: C64,
    gap: f64,
    bound: f64,
    terms: usize,
    tail_bound: f64,
    quadrature_error: f64,
    last_ratio: f64,
}

#[derive(Serialize)]
struct SqueezeReport {
    profile: String,
    r: f64,
    theta: f64,
    mu: f64,
    nu: f64,
    eta: C64,
    lambda: C64,
    d_tau: C64,
    d_kappa: C64,
    norm_factor: C64,
    hamiltonian_gap: f64,
    commutator_gap: f64,
    cancellation_max: f64,
    annihilation_tau: C64,
    annihilation_kappa: C64,
    g_norm: f64,
    annihilation_relative: f64,
    tau: SeriesSummary,
    kappa: SeriesSummary,
    passed: bool,
}

/// Series value against the closed-form pairing; agreement is required up to
/// the larger of the fixed tolerance and the combined error estimates.
fn series_summary(series: pblab_core::squeeze::SeriesReport, closed: pblab_core::PairingResult) -> SeriesSummary {
    let gap = (series.value - closed.value).norm();
    let bound = SERIES_TOL.max(series.tail_bound + series.quadrature_error + closed.abs_error_estimate);
    SeriesSummary {
        value: series.value,
        closed_form: closed.value,
        gap,
        bound,
        terms: series.terms,
        tail_bound: series.tail_bound,
        quadrature_error: series.quadrature_error,
        last_ratio: series.last_ratio,
    }
}

fn squeeze_report(profile: &Arc<PbProfile>, z: &SqueezeParams) -> Result<SqueezeReport, String> {
    let gaps = squeeze_identity_gaps(profile, z).map_err(|e| e.to_string())?;
    let cancellation = coefficient_cancellation(z, 20).map_err(|e| e.to_string())?;
    let g: Arc<dyn Function1d> = Arc::new(standard_bump());
    let ann = annihilation_residual(profile, z, Arc::clone(&g)).map_err(|e| e.to_string())?;
    let (tau, kappa) = closed_form_states(profile, z).map_err(|e| e.to_string())?;
    let truncation = Truncation::Auto { tol: SERIES_TAIL };
    let ft = functional_tau(profile, z, Arc::clone(&g), truncation).map_err(|e| e.to_string())?;
    let fk = functional_kappa(profile, z, Arc::clone(&g), truncation).map_err(|e| e.to_string())?;
    let ct = inner_product(&tau, g.as_ref(), Method::AdaptiveX).map_err(|e| e.to_string())?;
    let ck = inner_product(&kappa, g.as_ref(), Method::AdaptiveX).map_err(|e| e.to_string())?;
    let (tau, kappa) = (series_summary(ft, ct), series_summary(fk, ck));
    let passed = gaps.hamiltonian <= SQUEEZE_IDENTITY_TOL
        && gaps.commutator <= SQUEEZE_IDENTITY_TOL
        && cancellation.max_relative <= CANCELLATION_TOL
        && ann.relative() <= ANNIHILATION_TOL
        && tau.gap <= tau.bound
        && kappa.gap <= kappa.bound;
    Ok(SqueezeReport {
        profile: profile.describe(),
        r: z.r(),
        theta: z.theta(),
        mu: z.mu(),
        nu: z.nu(),
        eta: z.eta(),
        lambda: z.lambda(),
        d_tau: z.d_tau(),
        d_kappa: z.d_kappa(),
        norm_factor: z.norm_factor(),
        hamiltonian_gap: gaps.hamiltonian,
        commutator_gap: gaps.commutator,
        cancellation_max: cancellation.max_relative,
        annihilation_tau: ann.tau,
        annihilation_kappa: ann.kappa,
        g_norm: ann.g_norm,
        annihilation_relative: ann.relative(),
        tau,
        kappa,
        passed,
    })
}

/// One header row and one value row; complex quantities split into `_re`/`_im`.
fn squeeze_csv(r: &SqueezeReport) -> String {
    let mut cols: Vec<(String, String)> = Vec::new();
    let mut real = |name: &str, v: f64| cols.push((name.into(), format_number(v)));
    real("r", r.r);
    real("theta", r.theta);
    real("mu", r.mu);
    real("nu", r.nu);
    real("hamiltonian_gap", r.hamiltonian_gap);
    real("commutator_gap", r.commutator_gap);
    real("cancellation_max", r.cancellation_max);
    real("g_norm", r.g_norm);
    real("annihilation_relative", r.annihilation_relative);
    for (name, s) in [("tau", &r.tau), ("kappa", &r.kappa)] {
        real(&format!("{name}_gap"), s.gap);
        real(&format!("{name}_bound"), s.bound);
        real(&format!("{name}_tail_bound"), s.tail_bound);
        real(&format!("{name}_quadrature_error"), s.quadrature_error);
    }
    let mut complex = |name: &str, v: C64| {
        cols.push((format!("{name}_re"), format_number(v.re)));
        cols.push((format!("{name}_im"), format_number(v.im)));
    };
    complex("eta", r.eta);
    complex("lambda", r.lambda);
    complex("d_tau", r.d_tau);
    complex("d_kappa", r.d_kappa);
    complex("norm_factor", r.norm_factor);
    complex("annihilation_tau", r.annihilation_tau);
    complex("annihilation_kappa", r.annihilation_kappa);
    complex("tau_series", r.tau.value);
    complex("tau_closed_form", r.tau.closed_form);
    complex("kappa_series", r.kappa.value);
    complex("kappa_closed_form", r.kappa.closed_form);
    cols.push(("tau_terms".into(), r.tau.terms.to_string()));
    cols.push(("kappa_terms".into(), r.kappa.terms.to_string()));
    cols.push(("passed".into(), r.passed.to_string()));
    let header: Vec<&str> = cols.iter().map(|c| c.0.as_str()).collect();
    let values: Vec<&str> = cols.iter().map(|c| c.1.as_str()).collect();
    format!("{}\n{}\n", header.join(","), values.join(","))
}

fn run_squeeze(args: &SqueezeArgs) -> Outcome {
    let profile = args.profile.build().map_err(config)?;
    if profile.k() != 1.0 {
        return Err(config(format!("squeezed states need k = 1, got k = {}", profile.k())));
    }
    let z = SqueezeParams::new(args.r, args.theta).map_err(config)?;
    let report = squeeze_report(&profile, &z).map_err(runtime)?;
    let text = match args.report {
        ReportFormat::Json => serde_json::to_string_pretty(&report).map_err(runtime)? + "\n",
        ReportFormat::Csv => squeeze_csv(&report),
    };
    emit(&args.output, &text)?;
    Ok(report.passed)
}

/// Caps the global pool at `PBLAB_THREADS` when set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("PBLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config(format!("PBLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(runtime)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| match &cli.command {
        Command::Verify(a) => run_verify(a),
        Command::Table(a) => run_table(a),
        Command::PlotData(a) => run_plot(a),
        Command::Squeeze(a) => run_squeeze(a),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_range("--n", "3").ok(), Some(vec![3]));
        assert_eq!(parse_range("--n", "2..4").ok(), Some(vec![2, 3, 4]));
        assert!(parse_range("--n", "4..2").is_err());
        assert!(parse_range("--n", "x").is_err());
    }
}
