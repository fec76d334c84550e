//! Command-line front end for `mixstab-core`.
//!
//! [`run`] holds all logic so that tests can drive the tool in-process;
//! the binary only forwards `std::env::args`.

pub mod config;
pub mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{
    closure_fluctuations, parse_branch, resolve_droplet, resolve_fluctuations, resolve_params, ConfigFile, DropletArgs,
    FluctArgs, ParamArgs,
};
use mixstab_core::bogoliubov::{dispersion_minus, dispersion_plus, solve_bdg, BdgMode, ModeBranch};
use mixstab_core::droplet::{default_bracket, figure_curve, minima_summary, DensityGrid};
use mixstab_core::fluctuations::{
    fluctuation_report, self_consistent_loop, FluctuationMode, FluctuationQuadratureSettings, SelfConsistencySettings,
};
use mixstab_core::numerics::QuadratureSettings;
use mixstab_core::stability::stability_check;
use mixstab_core::validation::run_all;
use mixstab_core::{gamma_1d, reduce_symmetric, validate, BranchLabel, Error, FluctuationSet, MixtureParams};
use output::{fmt_f64, json_document, Csv};
use rayon::prelude::*;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Real and imaginary parts of a frequency.
type Complex = (f64, f64);

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "mixstab",
    version,
    about = "Binary Bose mixture stability, spectra and droplet energetics"
)]
pub struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for grid evaluations (default: MIXSTAB_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the primary output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bogoliubov dispersion on a wavenumber grid (CSV).
    Spectrum(SpectrumArgs),
    /// Reduced fluctuations of a balanced mixture (JSON).
    Fluct(FluctCmdArgs),
    /// Generalized couplings and stability verdict (JSON).
    Stability(StabilityArgs),
    /// Droplet minima (JSON) and optional energy curves (CSV).
    Droplet(DropletCmdArgs),
    /// Stability map over one parameter (CSV).
    Scan(ScanArgs),
    /// Run the built-in oracle suite.
    Validate,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub fluct: FluctArgs,
    #[arg(long, default_value_t = 1e-3)]
    pub k_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub k_max: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Linear instead of logarithmic k spacing.
    #[arg(long)]
    pub linear: bool,
    /// Use the 4×4 solver even for balanced input and report its deviation
    /// from the analytic branches.
    #[arg(long)]
    pub general: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Args)]
pub struct FluctCmdArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_parser = parse_branch, default_value = "minus")]
    pub branch: BranchLabel,
    #[arg(long, value_enum, default_value_t = ModeArg::ClosedForm)]
    pub mode: ModeArg,
    /// Infrared cutoff for the quadrature (default: 1e-3 healing wavenumbers).
    #[arg(long)]
    pub k_min: Option<f64>,
    /// Temperature in energy units; nonzero values are unvalidated.
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
    /// Also run the self-consistent feedback loop.
    #[arg(long)]
    pub self_consistent: bool,
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub fluct: FluctArgs,
    /// Attach a finite-difference Hessian check.
    #[arg(long)]
    pub fd_check: bool,
}

#[derive(Debug, Args)]
pub struct DropletCmdArgs {
    #[command(flatten)]
    pub droplet: DropletArgs,
    /// Write the energy curves to this CSV file.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long)]
    pub grid_lo: Option<f64>,
    #[arg(long)]
    pub grid_hi: Option<f64>,
    #[arg(long, default_value_t = 400)]
    pub grid_points: usize,
    /// Linear instead of logarithmic density spacing.
    #[arg(long)]
    pub grid_linear: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanParam {
    Lambda,
    G12,
    N,
    Dg,
}

impl ScanParam {
    fn name(self) -> &'static str {
        match self {
            ScanParam::Lambda => "lambda",
            ScanParam::G12 => "g12",
            ScanParam::N => "n",
            ScanParam::Dg => "dg",
        }
    }

    fn apply(self, base: &MixtureParams, v: f64) -> MixtureParams {
        let mut p = *base;
        match self {
            ScanParam::Lambda => p.g12 = v * p.g11,
            ScanParam::G12 => p.g12 = v,
            ScanParam::Dg => p.g12 = v - p.g11,
            ScanParam::N => {
                let (r1, r2) = (base.nc1 / base.n1, base.nc2 / base.n2);
                p.n1 = v;
                p.n2 = v;
                p.nc1 = r1 * v;
                p.nc2 = r2 * v;
            }
        }
        p
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub param: ScanParam,
    #[arg(long, allow_hyphen_values = true)]
    pub start: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub stop: f64,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "count")]
    pub step: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub fluct: FluctArgs,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            kind: "config",
            message: message.into(),
        }
    }

    fn to_json(&self) -> String {
        json!({ "error": self.kind, "message": self.message, "exit_code": self.code }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::InvalidParams(_) => (EXIT_CONFIG, "invalid_params"),
            Error::Asymmetric { .. } => (EXIT_CONFIG, "asymmetric_params"),
            Error::Domain(_) => (EXIT_CONFIG, "domain"),
            Error::BranchDomain { .. } => (EXIT_CONFIG, "branch_domain"),
            Error::InvalidBracket { .. } => (EXIT_CONFIG, "invalid_bracket"),
            Error::MissingInfraredCutoff => (EXIT_CONFIG, "missing_infrared_cutoff"),
            Error::InvalidSettings(_) => (EXIT_CONFIG, "invalid_settings"),
            Error::InvalidGrid(_) => (EXIT_CONFIG, "invalid_grid"),
            Error::Config(_) => (EXIT_CONFIG, "config"),
            Error::QuadratureNotConverged { .. } => (EXIT_NUMERICAL, "quadrature_not_converged"),
            Error::DynamicallyUnstable { .. } => (EXIT_NUMERICAL, "dynamically_unstable"),
            Error::MaxIterations { .. } => (EXIT_NUMERICAL, "max_iterations"),
            Error::UnstableIteration { .. } => (EXIT_NUMERICAL, "unstable_iteration"),
            Error::InconsistentHessian { .. } => (EXIT_NUMERICAL, "inconsistent_hessian"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Errors are written to `stderr` as one JSON object.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let f = Failure {
                code: EXIT_USAGE,
                kind: "usage",
                message: e.to_string().trim_end().to_string(),
            };
            let _ = writeln!(stderr, "{}", f.to_json());
            return EXIT_USAGE;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.to_json());
            f.code
        }
    }
}

fn thread_count(flag: Option<usize>) -> std::result::Result<usize, Failure> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var("MIXSTAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::config(format!("MIXSTAB_THREADS must be a non-negative integer, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

fn emit(cli: &Cli, stdout: &mut dyn Write, text: &str) -> std::result::Result<(), Failure> {
    match &cli.out {
        Some(path) => write_file(path, text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure {
            code: EXIT_CONFIG,
            kind: "io",
            message: e.to_string(),
        }),
    }
}

fn write_file(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Outcome {
    let file = ConfigFile::load(cli.config.as_deref())?;
    let threads = thread_count(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    let (text, code) = pool.install(|| match &cli.command {
        Command::Spectrum(a) => spectrum(&file, a),
        Command::Fluct(a) => fluct(&file, a),
        Command::Stability(a) => stability(&file, a),
        Command::Droplet(a) => droplet(&file, a),
        Command::Scan(a) => scan(&file, a),
        Command::Validate => Ok(self_check()),
    })?;
    emit(cli, stdout, &text)?;
    Ok(code)
}

type Produced = std::result::Result<(String, i32), Failure>;

fn grid(lo: f64, hi: f64, points: usize, log: bool) -> std::result::Result<Vec<f64>, Failure> {
    DensityGrid { lo, hi, points, log }.values().map_err(Failure::from)
}

fn pick_modes(modes: &[BdgMode], balanced: bool) -> (Option<Complex>, Option<Complex>) {
    if balanced {
        let find = |b: ModeBranch| modes.iter().find(|m| m.branch == b).map(|m| (m.omega.re, m.omega.im));
        (find(ModeBranch::Minus), find(ModeBranch::Plus))
    } else {
        let at = |i: usize| modes.get(i).map(|m| (m.omega.re, m.omega.im));
        (at(0), at(1))
    }
}

fn spectrum(file: &ConfigFile, a: &SpectrumArgs) -> Produced {
    let params = resolve_params(file, &a.params);
    let violations = validate(&params);
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations).into());
    }
    let fl = resolve_fluctuations(file, &a.fluct, &params)?;
    let sym = reduce_symmetric(&params).ok().filter(|_| fl.set.is_symmetric());
    let general = a.general || sym.is_none();
    let ks = grid(a.k_min, a.k_max, a.points, !a.linear)?;
    let eps_of = |k: f64| params.hbar * params.hbar * k * k / (2.0 * params.m1 * params.g11 * params.nc1);
    let omega_unit = params.g11 * params.nc1 / params.hbar;

    type Row = (f64, f64, Option<Complex>, Option<Complex>, f64);
    let rows: Vec<std::result::Result<Row, Error>> = ks
        .par_iter()
        .map(|&k| {
            let eps = eps_of(k);
            let analytic = sym.map(|s| {
                let m = dispersion_minus(eps, s.lambda, fl.set.f12()) * omega_unit;
                let p = dispersion_plus(eps, s.lambda) * omega_unit;
                ((m.re, m.im), (p.re, p.im))
            });
            if general {
                let modes = solve_bdg(k, &params, &fl.set)?;
                let (m, p) = pick_modes(&modes, sym.is_some());
                let dev = match (analytic, m, p) {
                    (Some((am, ap)), Some(m), Some(p)) => rel_dev(am, m).max(rel_dev(ap, p)),
                    (Some(_), _, _) => f64::INFINITY,
                    _ => f64::NAN,
                };
                Ok((k, eps, m, p, dev))
            } else {
                let (m, p) = analytic.expect("balanced input");
                Ok((k, eps, Some(m), Some(p), 0.0))
            }
        })
        .collect();
    let rows = rows.into_iter().collect::<std::result::Result<Vec<_>, _>>()?;

    let config = json!({
        "command": "spectrum",
        "params": params,
        "fluctuations": fl,
        "k_min": a.k_min, "k_max": a.k_max, "points": a.points, "log": !a.linear,
        "solver": if general { "general" } else { "analytic" },
    });
    let mut csv = Csv::new(
        &config,
        &[
            "k",
            "eps",
            "omega_minus_re",
            "omega_minus_im",
            "omega_plus_re",
            "omega_plus_im",
        ],
    );
    if general && sym.is_some() {
        let worst = rows.iter().fold(0.0f64, |m, r| m.max(r.4));
        csv.comment(&format!("max_rel_deviation_from_analytic={}", fmt_f64(worst)));
    }
    let cell = |z: Option<Complex>| z.map_or((f64::NAN, f64::NAN), |z| z);
    for (k, eps, m, p, _) in rows {
        let (mr, mi) = cell(m);
        let (pr, pi) = cell(p);
        csv.row(&[k, eps, mr, mi, pr, pi].map(fmt_f64));
    }
    Ok((csv.finish(), EXIT_OK))
}

fn rel_dev(a: Complex, b: Complex) -> f64 {
    let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let s = (a.0 * a.0 + a.1 * a.1).sqrt();
    if s > 0.0 {
        d / s
    } else {
        d
    }
}

fn fluct(file: &ConfigFile, a: &FluctCmdArgs) -> Produced {
    let params = resolve_params(file, &a.params);
    let sym = reduce_symmetric(&params)?;
    let gamma = gamma_1d(&sym)?;
    let k_min = a.k_min.unwrap_or(1e-3 * sym.healing_wavenumber());
    let settings = FluctuationQuadratureSettings {
        quad: QuadratureSettings {
            k_min,
            ..QuadratureSettings::default()
        },
        temperature: a.temperature,
        mode: match a.mode {
            ModeArg::ClosedForm => FluctuationMode::ClosedForm,
            ModeArg::Quadrature => FluctuationMode::Quadrature,
        },
    };
    let report = fluctuation_report(&sym, a.branch, &settings)?;
    let mut body = serde_json::to_value(report).expect("serializable");
    let extra = body.as_object_mut().expect("report is an object");
    if settings.mode == FluctuationMode::Quadrature {
        let closed = fluctuation_report(&sym, a.branch, &FluctuationQuadratureSettings::default())?;
        extra.insert(
            "closed_form".into(),
            json!({ "nt": closed.nt, "mt": closed.mt, "lhy_sum": closed.lhy_sum }),
        );
        extra.insert("unvalidated_temperature".into(), json!(a.temperature > 0.0));
    }
    if a.self_consistent {
        let sc = SelfConsistencySettings {
            damping: a.damping,
            tol: a.tol,
            max_iter: a.max_iter,
        };
        let r = self_consistent_loop(&sym, a.branch, &sc)?;
        extra.insert("self_consistent".into(), serde_json::to_value(r).expect("serializable"));
    }
    let mut warnings = Vec::new();
    if gamma.weak_coupling_exceeded {
        warnings.push(format!("gamma1d = {} exceeds the weak-coupling limit", gamma.value));
    }
    extra.insert("warnings".into(), json!(warnings));
    let config = json!({
        "command": "fluct",
        "params": params,
        "branch": a.branch,
        "mode": settings.mode,
        "k_min": k_min,
        "temperature": a.temperature,
        "self_consistent": a.self_consistent.then(|| json!({ "damping": a.damping, "tol": a.tol, "max_iter": a.max_iter })),
    });
    Ok((json_document(&config, &body), EXIT_OK))
}

fn stability(file: &ConfigFile, a: &StabilityArgs) -> Produced {
    let params = resolve_params(file, &a.params);
    let fl = resolve_fluctuations(file, &a.fluct, &params)?;
    let report = stability_check(&params, &fl.set, a.fd_check)?;
    let config = json!({
        "command": "stability",
        "params": params,
        "fluctuations": fl,
        "fd_check": a.fd_check,
    });
    Ok((json_document(&config, &report), EXIT_OK))
}

fn droplet(file: &ConfigFile, a: &DropletCmdArgs) -> Produced {
    let cfg = resolve_droplet(file, &a.droplet);
    cfg.check()?;
    let summary = minima_summary(&cfg)?;
    let config = json!({ "command": "droplet", "droplet": cfg });
    let ratios = summary.ratios;
    let mut body = serde_json::to_value(summary).expect("serializable");
    let fields = body.as_object_mut().expect("summary is an object");
    fields.insert("ratio_n".into(), json!(ratios.n));
    fields.insert("ratio_e".into(), json!(ratios.e));
    fields.insert("warnings".into(), json!(cfg.warnings()));

    if let Some(path) = &a.curve {
        let (lo, hi) = default_bracket(&cfg.with_correlated(true));
        let grid_spec = DensityGrid {
            lo: a.grid_lo.unwrap_or(lo),
            hi: a.grid_hi.unwrap_or(hi),
            points: a.grid_points,
            log: !a.grid_linear,
        };
        let curve = figure_curve(&cfg, &grid_spec)?;
        let curve_config = json!({ "command": "droplet", "droplet": cfg, "grid": grid_spec });
        let mut csv = Csv::new(&curve_config, &["n", "e_correlated", "e_uncorrelated"]);
        for (label, m) in [
            ("correlated", curve.minimum_correlated),
            ("uncorrelated", curve.minimum_uncorrelated),
        ] {
            if let Some(m) = m {
                csv.comment(&format!("minimum_{label} n={} e={}", fmt_f64(m.n), fmt_f64(m.e)));
            }
        }
        for s in &curve.samples {
            csv.row(&[s.n, s.e_correlated, s.e_uncorrelated].map(fmt_f64));
        }
        write_file(path, &csv.finish())?;
    }
    Ok((json_document(&config, &body), EXIT_OK))
}

fn scan_values(a: &ScanArgs) -> std::result::Result<Vec<f64>, Failure> {
    let mut values = match (a.step, a.count) {
        (_, Some(count)) => {
            if count == 0 {
                return Err(Failure::config("--count must be positive"));
            }
            if count == 1 {
                vec![a.start]
            } else {
                let last = (count - 1) as f64;
                (0..count)
                    .map(|i| a.start + (a.stop - a.start) * i as f64 / last)
                    .collect()
            }
        }
        (Some(step), None) => {
            if step == 0.0 || !step.is_finite() || (a.stop - a.start) * step < 0.0 {
                return Err(Failure::config(format!(
                    "--step {step} does not lead from {} to {}",
                    a.start, a.stop
                )));
            }
            let n = ((a.stop - a.start) / step + 1e-9).floor() as usize + 1;
            (0..n).map(|i| a.start + step * i as f64).collect()
        }
        (None, None) => return Err(Failure::config("scan needs --step or --count")),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::config("scan range must be finite"));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn scan(file: &ConfigFile, a: &ScanArgs) -> Produced {
    let base = resolve_params(file, &a.params);
    let fl = resolve_fluctuations(file, &a.fluct, &base)?;
    let values = scan_values(a)?;
    let rows: Vec<std::result::Result<[String; 7], Error>> = values
        .par_iter()
        .map(|&v| {
            let p = a.param.apply(&base, v);
            let set: FluctuationSet = match fl.closure_branch {
                Some(branch) => closure_fluctuations(&p, branch)?,
                None => fl.set,
            };
            let r = stability_check(&p, &set, false)?;
            Ok([
                fmt_f64(v),
                fmt_f64(r.g1_eff),
                fmt_f64(r.g2_eff),
                fmt_f64(r.g12_eff),
                fmt_f64(r.trace_a),
                fmt_f64(r.det_a),
                r.verdict.as_str().to_string(),
            ])
        })
        .collect();
    let config = json!({
        "command": "scan",
        "param": a.param.name(),
        "start": a.start, "stop": a.stop, "step": a.step, "count": a.count,
        "params": base,
        "fluctuations": fl,
    });
    let mut csv = Csv::new(
        &config,
        &[a.param.name(), "G1", "G2", "G12", "trace_a", "det_a", "verdict"],
    );
    for row in rows {
        csv.row(&row?);
    }
    Ok((csv.finish(), EXIT_OK))
}

fn self_check() -> (String, i32) {
    let results = run_all();
    let mut text = format!(
        "{:<22} {:<6} {:>12} {:>12}  detail\n",
        "check", "status", "measured", "tolerance"
    );
    for r in &results {
        text.push_str(&format!(
            "{:<22} {:<6} {:>12.3e} {:>12.3e}  {}\n",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.measured,
            r.tolerance,
            r.detail
        ));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    text.push_str(&format!("{} passed, {failed} failed\n", results.len() - failed));
    (text, if failed == 0 { EXIT_OK } else { EXIT_VALIDATION })
}
