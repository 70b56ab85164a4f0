//! Configuration-driven batch runner behind the `qso-lab` binary.
//!
//! A run reads an optional JSON config, applies flag overrides, executes one
//! mode and writes `report.json` (plus per-step CSV where the mode has one)
//! into the output directory. Failures leave `error.json` behind and print
//! the same record on stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::classical::{
    ergodicity_diagnostic, ergodicity_diagnostic_fn, nonergodic_predicate, VolterraOrbit, VolterraParams,
};
use crate::convolution::{convolve_direct, CharacterTransform};
use crate::dynamics::{
    cesaro_series, check_exceptional_state, enumerate_exceptional_states, envelope_f, envelope_f_oracle,
    instability_report, is_coset, iterate, verify_coset_criterion, Cycle, Verdict, DEFAULT_MAX_STEPS,
    DEFAULT_TOL, MONOTONE_SLACK,
};
use crate::error::Error;
use crate::group::{enumerate_subgroups, max_order_bound, parse_group_spec, subgroup_closure, GroupSpec, Subgroup};
use crate::operator::{
    build_operator, build_operator_with_mode, check_stochasticity, quotient_operator, OperatorMode, QsoOperator,
};
use crate::simplex::{haar_center, sample_interior, sample_interior_n, validate_simplex, SimplexPoint, MASS_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Largest path deviation `bench` accepts.
pub const BENCH_DEVIATION_TOL: f64 = 1e-10;
/// Bound on `|G|` for the exhaustive subset check in `lemma-suite`.
pub const EXHAUSTIVE_SUBSET_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Trajectory,
    Cesaro,
    Exceptional,
    LemmaSuite,
    Classic,
    Bench,
}

/// Where the operator's measure comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSource {
    Weights(Vec<f64>),
    Dirichlet { dirichlet_seed: u64 },
    File { file: PathBuf },
    Named(String),
}

impl Default for MeasureSource {
    fn default() -> Self {
        MeasureSource::Named("uniform".into())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub group: Option<String>,
    /// Residue vectors; empty means the trivial subgroup.
    pub subgroup_generators: Vec<Vec<i64>>,
    pub mu: MeasureSource,
    pub mode: Option<Mode>,
    pub operator_mode: OperatorMode,
    pub steps: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    /// Explicit initial point; replaces the seeded sample.
    pub x0: Option<Vec<f64>>,
    /// Cesàro horizon.
    pub k: Option<usize>,
    pub window: Option<usize>,
    pub horizon: Option<usize>,
    pub trials: Option<usize>,
    /// Volterra `[a, b, c]`; defaults to `[1, 1, 1]`.
    pub volterra: Option<[f64; 3]>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("unparseable config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Flags win over file values.
    pub fn apply(&mut self, flags: &Overrides) {
        if let Some(g) = &flags.group {
            self.group = Some(g.clone());
        }
        if let Some(m) = flags.mode {
            self.mode = Some(m);
        }
        if let Some(s) = flags.seed {
            self.seed = Some(s);
            self.seeds = None;
        }
        if let Some(s) = flags.steps {
            self.steps = Some(s);
        }
        if let Some(t) = flags.tol {
            self.tol = Some(t);
        }
        if let Some(t) = flags.trials {
            self.trials = Some(t);
        }
        if let Some(o) = &flags.out {
            self.out = Some(o.clone());
        }
    }

    fn seed_list(&self) -> Vec<u64> {
        match (&self.seeds, self.seed) {
            (Some(list), _) if !list.is_empty() => list.clone(),
            (_, Some(s)) => vec![s],
            _ => vec![0],
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("qso-out"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Io(_) => "io",
        }
    }

    fn config(e: Error) -> Self {
        CliError::Config(e.to_string())
    }

    fn numeric(e: Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    exit_code: i32,
    message: String,
}

#[derive(Parser, Debug)]
#[command(name = "qso-lab", version, about = "Quadratic stochastic operators on finite Abelian groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the mode named in the config (or by --mode).
    Run(Overrides),
    /// Iterate the operator from seeded interior points.
    Trajectory(Overrides),
    /// Running Cesàro means.
    Cesaro(Overrides),
    /// Enumerate coset-uniform states and their doubling orbits.
    Exceptional(Overrides),
    /// Oracle checks for the configured group.
    LemmaSuite(Overrides),
    /// Volterra / Zakharevitch ergodicity diagnostic.
    Classic(Overrides),
    /// Time direct against transform convolution.
    Bench(Overrides),
}

#[derive(Args, Debug, Default, Clone)]
pub struct Overrides {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args`, runs, reports errors, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (fixed, flags) = match cli.command {
        Command::Run(o) => (None, o),
        Command::Trajectory(o) => (Some(Mode::Trajectory), o),
        Command::Cesaro(o) => (Some(Mode::Cesaro), o),
        Command::Exceptional(o) => (Some(Mode::Exceptional), o),
        Command::LemmaSuite(o) => (Some(Mode::LemmaSuite), o),
        Command::Classic(o) => (Some(Mode::Classic), o),
        Command::Bench(o) => (Some(Mode::Bench), o),
    };
    let mut out_hint = flags.out.clone();
    let result = resolve(fixed, &flags).and_then(|cfg| {
        out_hint = Some(cfg.out_dir());
        run(&cfg)
    });
    match result {
        Ok(summary) => {
            println!("{}", summary.display());
            EXIT_OK
        }
        Err(e) => {
            report_error(&e, out_hint.as_deref());
            e.exit_code()
        }
    }
}

fn resolve(fixed: Option<Mode>, flags: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(flags);
    if let Some(mode) = fixed {
        if flags.mode.is_some_and(|m| m != mode) {
            return Err(CliError::Config("--mode conflicts with the subcommand".into()));
        }
        cfg.mode = Some(mode);
    }
    Ok(cfg)
}

fn report_error(e: &CliError, out: Option<&Path>) {
    let record = ErrorRecord {
        error: ErrorBody {
            kind: e.kind(),
            exit_code: e.exit_code(),
            message: e.to_string(),
        },
    };
    let line = serde_json::to_string(&record).expect("error record serializes");
    eprintln!("{line}");
    if let Some(dir) = out {
        if fs::create_dir_all(dir).is_ok() {
            let _ = fs::write(dir.join("error.json"), format!("{line}\n"));
        }
    }
}

/// Where a successful run left its files.
#[derive(Debug)]
pub struct RunSummary {
    pub mode: Mode,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    fn display(&self) -> String {
        let files: Vec<String> = self.files.iter().map(|f| f.display().to_string()).collect();
        format!("{:?}: wrote {}", self.mode, files.join(", "))
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    generated_at: u64,
    mode: Mode,
    config: &'a RunConfig,
    result: T,
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn create(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
        }
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }

    fn report<T: Serialize>(&mut self, cfg: &RunConfig, mode: Mode, result: T) -> Result<(), CliError> {
        let generated_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let report = Report {
            generated_at,
            mode,
            config: cfg,
            result,
        };
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Numeric(e.to_string()))?;
        self.write("report.json", &(text + "\n"))
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip an `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SERIES_HEADER: &str = "step,sup_norm,center_distance";

pub fn series_csv(sup_norm: &[f64], center_distance: &[f64]) -> String {
    let mut out = String::with_capacity(48 * sup_norm.len() + 32);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for (step, (s, d)) in sup_norm.iter().zip(center_distance).enumerate() {
        let _ = writeln!(out, "{step},{},{}", format_real(*s), format_real(*d));
    }
    out
}

/// Executes one resolved config.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let mode = cfg
        .mode
        .ok_or_else(|| CliError::Config("no mode given (config `mode` or --mode)".into()))?;
    validate_common(cfg)?;
    let mut out = Output::create(cfg.out_dir())?;
    let outcome = match mode {
        Mode::Trajectory => run_trajectory(cfg, &mut out),
        Mode::Cesaro => run_cesaro(cfg, &mut out),
        Mode::Exceptional => run_exceptional(cfg, &mut out),
        Mode::LemmaSuite => run_lemma_suite(cfg, &mut out),
        Mode::Classic => run_classic(cfg, &mut out),
        Mode::Bench => run_bench(cfg, &mut out),
    };
    outcome?;
    Ok(RunSummary {
        mode,
        out_dir: out.dir,
        files: out.files,
    })
}

fn validate_common(cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(t) = cfg.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("tol must be positive, got {t}")));
        }
    }
    if cfg.steps == Some(0) {
        return Err(CliError::Config("steps must be at least 1".into()));
    }
    if cfg.trials == Some(0) {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    Ok(())
}

fn require_group(cfg: &RunConfig, bounded: bool) -> Result<GroupSpec, CliError> {
    let text = cfg
        .group
        .as_deref()
        .ok_or_else(|| CliError::Config("no group given (config `group` or --group)".into()))?;
    let group = parse_group_spec(text).map_err(CliError::config)?;
    let bound = max_order_bound();
    if bounded && group.order() > bound {
        return Err(CliError::config(Error::OrderBound {
            order: group.order(),
            bound,
        }));
    }
    Ok(group)
}

fn configured_subgroup(cfg: &RunConfig, group: &GroupSpec) -> Result<Subgroup, CliError> {
    let gens = cfg
        .subgroup_generators
        .iter()
        .map(|g| group.element(g))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(CliError::config)?;
    subgroup_closure(group, &gens).map_err(CliError::config)
}

fn configured_measure(cfg: &RunConfig, group: &GroupSpec) -> Result<SimplexPoint, CliError> {
    match &cfg.mu {
        MeasureSource::Named(name) if name.eq_ignore_ascii_case("uniform") => Ok(haar_center(group)),
        MeasureSource::Named(name) => Err(CliError::Config(format!("unknown measure {name:?}"))),
        MeasureSource::Weights(w) => SimplexPoint::on_group(group, w).map_err(CliError::config),
        MeasureSource::Dirichlet { dirichlet_seed } => Ok(sample_interior(group, *dirichlet_seed)),
        MeasureSource::File { file } => {
            let text = fs::read_to_string(file)
                .map_err(|e| CliError::Io(format!("cannot read measure {}: {e}", file.display())))?;
            let w: Vec<f64> = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("measure file {}: {e}", file.display())))?;
            SimplexPoint::on_group(group, &w).map_err(CliError::config)
        }
    }
}

fn configured_operator(cfg: &RunConfig) -> Result<QsoOperator, CliError> {
    let group = require_group(cfg, true)?;
    let h = configured_subgroup(cfg, &group)?;
    let mu = configured_measure(cfg, &group)?;
    build_operator_with_mode(&group, &h, &mu, cfg.operator_mode).map_err(CliError::config)
}

/// Initial points, one per seed, or the explicit `x0`.
fn initial_points(cfg: &RunConfig, group: &GroupSpec) -> Result<Vec<(Option<u64>, SimplexPoint)>, CliError> {
    if let Some(x0) = &cfg.x0 {
        let x = SimplexPoint::on_group(group, x0).map_err(CliError::config)?;
        return Ok(vec![(None, x)]);
    }
    Ok(cfg
        .seed_list()
        .into_iter()
        .map(|s| (Some(s), sample_interior(group, s)))
        .collect())
}

/// Runs `job` on every input across worker threads; results keep input order.
fn sweep<T, R, F>(inputs: &[T], job: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(inputs.len())
        .max(1);
    if workers == 1 {
        return inputs.iter().map(&job).collect();
    }
    let chunk = inputs.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .chunks(chunk)
            .map(|part| {
                let job = &job;
                scope.spawn(move || part.iter().map(job).collect::<Vec<R>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

fn check_point(label: &str, x: &SimplexPoint) -> Result<(), CliError> {
    let negative = x.weights().iter().any(|&w| w < 0.0 || !w.is_finite());
    if negative || (x.mass() - 1.0).abs() > MASS_TOL * x.len() as f64 {
        return Err(CliError::Numeric(format!("{label} left the simplex (mass {})", x.mass())));
    }
    Ok(())
}

fn run_dir(seed: Option<u64>) -> String {
    seed.map_or_else(|| "x0".to_string(), |s| format!("seed-{s}"))
}

#[derive(Serialize)]
struct TrajectorySummary {
    seed: Option<u64>,
    steps: usize,
    verdict: Verdict,
    cycle: Option<Cycle>,
    initial_sup_norm: f64,
    final_center_distance: f64,
    max_sup_norm_increase: f64,
    monotone: bool,
    final_state: SimplexPoint,
}

#[derive(Serialize)]
struct TrajectoryResult {
    steps_budget: usize,
    tol: f64,
    runs: Vec<TrajectorySummary>,
    converged: usize,
    monotone_violations: usize,
}

fn run_trajectory(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let op = configured_operator(cfg)?;
    let starts = initial_points(cfg, op.group())?;
    let steps = cfg.steps.unwrap_or(DEFAULT_MAX_STEPS);
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let results = sweep(&starts, |(_, x0)| iterate(&op, x0, steps, tol));
    let mut runs = Vec::with_capacity(starts.len());
    let mut series = Vec::with_capacity(starts.len());
    for ((seed, _), r) in starts.iter().zip(results) {
        let r = r.map_err(CliError::numeric)?;
        check_point("final state", &r.final_state)?;
        series.push((*seed, series_csv(&r.sup_norm_series, &r.center_distance_series)));
        runs.push(TrajectorySummary {
            seed: *seed,
            steps: r.steps,
            verdict: r.verdict,
            cycle: r.cycle,
            initial_sup_norm: r.sup_norm_series[0],
            final_center_distance: r.final_center_distance(),
            max_sup_norm_increase: if r.steps > 0 { r.max_sup_norm_increase() } else { 0.0 },
            monotone: r.is_monotone(),
            final_state: r.final_state,
        });
    }
    write_series(out, &series)?;
    let monotone_violations = runs.iter().filter(|r| !r.monotone).count();
    let result = TrajectoryResult {
        steps_budget: steps,
        tol,
        converged: runs.iter().filter(|r| r.verdict == Verdict::ConvergedToCenter).count(),
        monotone_violations,
        runs,
    };
    out.report(cfg, Mode::Trajectory, result)?;
    if monotone_violations > 0 {
        return Err(CliError::Numeric(format!(
            "sup-norm increased by more than {MONOTONE_SLACK:e} in {monotone_violations} run(s)"
        )));
    }
    Ok(())
}

/// The first run's series goes to `series.csv`; a sweep also keeps one file per run.
fn write_series(out: &mut Output, series: &[(Option<u64>, String)]) -> Result<(), CliError> {
    if let Some((_, first)) = series.first() {
        out.write("series.csv", first)?;
    }
    if series.len() > 1 {
        for (seed, csv) in series {
            out.write(&format!("{}/series.csv", run_dir(*seed)), csv)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CesaroSummary {
    seed: Option<u64>,
    k: usize,
    final_center_distance: f64,
    mean: SimplexPoint,
}

fn run_cesaro(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let op = configured_operator(cfg)?;
    let starts = initial_points(cfg, op.group())?;
    let k = cfg.k.or(cfg.steps).unwrap_or(1000);
    if k == 0 {
        return Err(CliError::Config("k must be at least 1".into()));
    }
    let results = sweep(&starts, |(_, x0)| cesaro_series(&op, x0, k));
    let mut runs = Vec::new();
    let mut series = Vec::new();
    for ((seed, _), means) in starts.iter().zip(results) {
        let means = means.map_err(CliError::numeric)?;
        let sup: Vec<f64> = means.iter().map(SimplexPoint::sup_norm).collect();
        let dist: Vec<f64> = means.iter().map(SimplexPoint::sup_distance_to_center).collect();
        series.push((*seed, series_csv(&sup, &dist)));
        let mean = means.into_iter().last().expect("k >= 1");
        check_point("Cesàro mean", &mean)?;
        runs.push(CesaroSummary {
            seed: *seed,
            k,
            final_center_distance: mean.sup_distance_to_center(),
            mean,
        });
    }
    write_series(out, &series)?;
    out.report(cfg, Mode::Cesaro, runs)
}

#[derive(Serialize)]
struct ExceptionalRow {
    shift: Vec<usize>,
    shift_index: usize,
    subgroup_order: usize,
    subgroup: Vec<usize>,
    preperiod: usize,
    period: usize,
    image_deviation: f64,
    vector_cycle_matches: bool,
    growth_factor: Option<f64>,
    fd_relative_deviation: Option<f64>,
}

#[derive(Serialize)]
struct ExceptionalResult {
    group: String,
    states: Vec<ExceptionalRow>,
}

fn run_exceptional(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let group = require_group(cfg, true)?;
    let op = build_operator(&group, &Subgroup::trivial(&group), &haar_center(&group)).map_err(CliError::config)?;
    let states = enumerate_exceptional_states(&group).map_err(CliError::config)?;
    let rows = sweep(&states, |ex| -> Result<ExceptionalRow, Error> {
        let check = check_exceptional_state(&op, ex)?;
        let growth = if ex.is_periodic() && !ex.subgroup.is_whole() {
            Some(instability_report(&group, ex)?)
        } else {
            None
        };
        Ok(ExceptionalRow {
            shift: ex.shift.residues().to_vec(),
            shift_index: ex.shift_index,
            subgroup_order: ex.subgroup.order(),
            subgroup: ex.subgroup.members().to_vec(),
            preperiod: ex.doubling_preperiod,
            period: ex.doubling_period,
            image_deviation: check.image_deviation,
            vector_cycle_matches: check.cycles_match(),
            growth_factor: growth.as_ref().map(|g| g.growth_factor),
            fd_relative_deviation: growth.as_ref().map(|g| g.fd_relative_deviation),
        })
    });
    let states = rows
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::numeric)?;
    let mismatches = states
        .iter()
        .filter(|s| !s.vector_cycle_matches || s.image_deviation > 1e-14)
        .count();
    out.report(
        cfg,
        Mode::Exceptional,
        ExceptionalResult {
            group: group.to_string(),
            states,
        },
    )?;
    if mismatches > 0 {
        return Err(CliError::Numeric(format!(
            "{mismatches} state(s) disagree with the doubling orbit"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    cases: usize,
    max_deviation: f64,
    detail: String,
}

impl Check {
    fn new(name: &'static str, cases: usize, max_deviation: f64, tol: f64, detail: String) -> Self {
        Self {
            name,
            passed: max_deviation <= tol,
            cases,
            max_deviation,
            detail,
        }
    }
}

fn run_lemma_suite(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let op = configured_operator(cfg)?;
    let group = op.group().clone();
    let n = group.order();
    let trials = cfg.trials.unwrap_or(100);
    let base_seed = cfg.seed_list()[0];
    let points: Vec<SimplexPoint> = (0..trials as u64)
        .map(|i| sample_interior(&group, base_seed.wrapping_add(i)))
        .collect();
    let subgroups = enumerate_subgroups(&group).map_err(CliError::config)?;
    let num = CliError::numeric;
    let mut checks = Vec::new();

    let mut worst = 0.0_f64;
    let mut cases = 0;
    for h in &subgroups {
        for i in 0..trials as u64 {
            let mu = sample_interior(&group, base_seed.wrapping_add(1_000_003 * (i + 1)));
            let r = check_stochasticity(&build_operator(&group, h, &mu).map_err(num)?);
            worst = worst
                .max(r.max_row_deviation)
                .max(r.symmetry_deviation)
                .max(-r.min_coefficient);
            cases += 1;
        }
    }
    checks.push(Check::new(
        "stochasticity",
        cases,
        worst,
        1e-12,
        format!("{} subgroups x {trials} random measures", subgroups.len()),
    ));

    let trivial = build_operator(&group, &Subgroup::trivial(&group), &haar_center(&group)).map_err(num)?;
    let mut worst = 0.0_f64;
    for x in &points {
        let s = x.sup_norm();
        let v = trivial.apply(x).map_err(num)?.sup_norm();
        let q = x.sum_of_squares();
        let f = envelope_f(s).map_err(num)?;
        worst = worst.max(v - q).max(q - f).max(f - s);
    }
    checks.push(Check::new(
        "sup-norm chain",
        points.len(),
        worst.max(0.0),
        1e-12,
        "sup(Vx) <= sum x^2 <= f(sup x) <= sup x".into(),
    ));

    let mut worst = 0.0_f64;
    let mut cases = 0;
    for i in 1..=1000 {
        let p = i as f64 * 1e-3;
        if (n as f64) * p < 1.0 {
            continue;
        }
        let closed = envelope_f(p).map_err(num)?;
        let oracle = envelope_f_oracle(p, n).map_err(num)?;
        worst = worst.max((closed - oracle).abs());
        cases += 1;
    }
    checks.push(Check::new("envelope oracle", cases, worst, 1e-12, format!("p grid step 1e-3, n = {n}")));

    let mut worst = 0.0_f64;
    let mut cases = 0;
    for k in subgroups.iter().filter(|k| op.subgroup().is_subset_of(k)) {
        let qd = quotient_operator(&op, k).map_err(num)?;
        for x in &points {
            let lhs = qd.project(&op.apply(x).map_err(num)?).map_err(num)?;
            let rhs = qd.operator.apply(&qd.project(x).map_err(num)?).map_err(num)?;
            worst = worst.max(lhs.max_abs_diff(&rhs));
            cases += 1;
        }
    }
    checks.push(Check::new(
        "quotient intertwining",
        cases,
        worst,
        1e-12,
        "projection commutes with the operator".into(),
    ));

    let transform = CharacterTransform::new(&group);
    let mut worst = 0.0_f64;
    for x in &points {
        let direct = convolve_direct(&group, x.weights(), x.weights());
        let fast = transform.self_convolve(x.weights());
        worst = direct.iter().zip(&fast).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    checks.push(Check::new("transform path", points.len(), worst, 1e-10, "direct vs character transform".into()));

    let states = enumerate_exceptional_states(&group).map_err(num)?;
    let mut worst = 0.0_f64;
    let mut mismatched = 0;
    for ex in &states {
        let c = check_exceptional_state(&trivial, ex).map_err(num)?;
        worst = worst.max(c.image_deviation);
        mismatched += usize::from(!c.cycles_match());
    }
    let mut check = Check::new(
        "exceptional states",
        states.len(),
        worst,
        1e-14,
        format!("{mismatched} cycle mismatches"),
    );
    check.passed &= mismatched == 0;
    checks.push(check);

    if n <= EXHAUSTIVE_SUBSET_ORDER {
        let mut disagreements = 0;
        for mask in 1u32..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            disagreements += usize::from(verify_coset_criterion(&group, &set) != is_coset(&group, &set));
        }
        checks.push(Check::new(
            "coset criterion",
            (1 << n) - 1,
            disagreements as f64,
            0.0,
            "exhaustive over non-empty subsets".into(),
        ));
    }

    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    out.report(cfg, Mode::LemmaSuite, &checks)?;
    if !failed.is_empty() {
        return Err(CliError::Numeric(format!("failed checks: {}", failed.join(", "))));
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassicResult {
    params: [f64; 3],
    nonergodic_predicate: bool,
    grade: &'static str,
    diagnostic: f64,
    window: usize,
    horizon: usize,
    comparison: Option<Comparison>,
}

#[derive(Serialize)]
struct Comparison {
    group: String,
    seed: u64,
    diagnostic: f64,
    ratio: f64,
}

fn run_classic(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let [a, b, c] = cfg.volterra.unwrap_or([1.0, 1.0, 1.0]);
    let params = VolterraParams::new(a, b, c).map_err(CliError::config)?;
    let horizon = cfg.horizon.or(cfg.steps).unwrap_or(1_000_000);
    let window = cfg.window.unwrap_or((horizon / 10).max(1));
    if window == 0 || horizon < 2 * window {
        return Err(CliError::Config(format!(
            "classic needs horizon >= 2 * window (window {window}, horizon {horizon})"
        )));
    }
    let x0 = validate_simplex(cfg.x0.as_deref().unwrap_or(&[0.5, 0.3, 0.2])).map_err(CliError::config)?;
    if x0.len() != 3 {
        return Err(CliError::config(Error::DimensionMismatch {
            expected: 3,
            found: x0.len(),
        }));
    }
    let orbit = VolterraOrbit::new(&params, &x0).map_err(CliError::config)?;
    let diag = ergodicity_diagnostic(orbit, window, horizon).map_err(CliError::numeric)?;

    let comparison = match cfg.group {
        Some(_) => {
            let op = configured_operator(cfg)?;
            let seed = cfg.seed_list()[0];
            let y0 = sample_interior(op.group(), seed);
            let d = ergodicity_diagnostic_fn(|x| op.apply(x), &y0, window, horizon).map_err(CliError::numeric)?;
            Some(Comparison {
                group: op.group().to_string(),
                seed,
                diagnostic: d.value,
                ratio: diag.value / d.value,
            })
        }
        None => None,
    };

    let mut csv = String::from("checkpoint,x,y,z\n");
    for (t, r) in diag.checkpoints.iter().zip(&diag.running_means) {
        let _ = writeln!(csv, "{t},{},{},{}", format_real(r[0]), format_real(r[1]), format_real(r[2]));
    }
    out.write("running_means.csv", &csv)?;
    out.report(
        cfg,
        Mode::Classic,
        ClassicResult {
            params: [a, b, c],
            nonergodic_predicate: nonergodic_predicate(&params),
            grade: "evidence (numerical diagnostic, not a proof)",
            diagnostic: diag.value,
            window,
            horizon,
            comparison,
        },
    )
}

#[derive(Serialize)]
pub struct PathTiming {
    pub median_ns: u64,
    pub p95_ns: u64,
}

#[derive(Serialize)]
pub struct BenchResult {
    pub group: String,
    pub order: usize,
    pub trials: usize,
    pub direct: PathTiming,
    pub transform: PathTiming,
    pub max_deviation: f64,
    pub faster: &'static str,
}

fn timing(mut ns: Vec<u64>) -> PathTiming {
    ns.sort_unstable();
    let at = |q: f64| ns[((ns.len() - 1) as f64 * q).round() as usize];
    PathTiming {
        median_ns: at(0.5),
        p95_ns: at(0.95),
    }
}

/// Median and p95 wall time of one self-convolution per path.
pub fn bench(group: &GroupSpec, trials: usize, seed: u64) -> crate::Result<BenchResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("bench needs at least one trial".into()));
    }
    let transform = CharacterTransform::new(group);
    let mut direct_ns = Vec::with_capacity(trials);
    let mut transform_ns = Vec::with_capacity(trials);
    let mut max_deviation = 0.0_f64;
    for t in 0..trials as u64 {
        let x = sample_interior_n(group.order(), seed.wrapping_add(t));
        let start = Instant::now();
        let direct = convolve_direct(group, x.weights(), x.weights());
        direct_ns.push(start.elapsed().as_nanos() as u64);
        let start = Instant::now();
        let fast = transform.self_convolve(x.weights());
        transform_ns.push(start.elapsed().as_nanos() as u64);
        max_deviation = direct
            .iter()
            .zip(&fast)
            .map(|(a, b)| (a - b).abs())
            .fold(max_deviation, f64::max);
    }
    let direct = timing(direct_ns);
    let transform = timing(transform_ns);
    let faster = if transform.median_ns < direct.median_ns { "transform" } else { "direct" };
    Ok(BenchResult {
        group: group.to_string(),
        order: group.order(),
        trials,
        direct,
        transform,
        max_deviation,
        faster,
    })
}

fn run_bench(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let group = require_group(cfg, false)?;
    let h = configured_subgroup(cfg, &group)?;
    if !h.is_trivial() {
        return Err(CliError::config(Error::NontrivialSubgroup(h.order())));
    }
    if cfg.operator_mode == OperatorMode::Dense {
        build_operator_with_mode(&group, &h, &haar_center(&group), OperatorMode::Dense).map_err(CliError::config)?;
    }
    let result = bench(&group, cfg.trials.unwrap_or(100), cfg.seed_list()[0]).map_err(CliError::config)?;
    let deviation = result.max_deviation;
    let mut csv = String::from("path,median_ns,p95_ns,max_deviation\n");
    for (name, t) in [("direct", &result.direct), ("transform", &result.transform)] {
        let _ = writeln!(csv, "{name},{},{},{}", t.median_ns, t.p95_ns, format_real(deviation));
    }
    out.write("bench.csv", &csv)?;
    out.report(cfg, Mode::Bench, result)?;
    if deviation > BENCH_DEVIATION_TOL {
        return Err(CliError::Numeric(format!(
            "direct and transform paths differ by {deviation:e}"
        )));
    }
    Ok(())
}
