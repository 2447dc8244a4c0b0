//! Command-line front end. The `emaxpk` binary forwards to [`main_with_args`].
//!
//! Exit codes: 0 success, 2 invalid input, 3 non-convergence, 4 property failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::design::{d_criterion, fisher_info, fmt_sig, DesignMeasure, FisherInfo, InterestSet, VarianceFunction};
use crate::error::{Error, Result};
use crate::models::{Model, ModelId};
use crate::numerics::inverse;
use crate::robust::{
    default_schedule, efficiency_vs_r, eseuld, esuld, lri_report, ExpansionSchedule, LriValue, DEFAULT_LRI_STEP,
};
use crate::scenario::Scenario;
use crate::search::{ld_design, SearchResult};
use crate::verify::{
    check_cofactor_signs, check_interior_maxima_count, check_nuisance_equivalence, run_suite, PropertyOutcome,
    SuiteConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_PROPERTY: i32 = 4;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "emaxpk",
    version,
    about = "Locally D-optimal and robust sampling designs for Emax-PK models"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Scenario file with `key = value` lines.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Nominal scenario used when no file is given [default: pk1].
    #[arg(long, global = true, conflicts_with = "scenario")]
    pub preset: Option<ModelId>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// LD design with its equivalence-theorem certificate.
    Ld {
        /// Add wall-clock runtime to summary.json (breaks byte-identical reruns).
        #[arg(long)]
        timing: bool,
    },
    /// Equally spaced uniform designs over a range of support sizes.
    Esuld {
        /// Sizes, e.g. `4..12` (inclusive) [default: k..k+8].
        #[arg(long)]
        sizes: Option<SizeRange>,
    },
    /// Equal-step expansions of the LD design.
    Eseuld {
        /// Step length in hours [default: 1 for pk1, 0.2 for pk2].
        #[arg(long)]
        r: Option<f64>,
        /// Sizes, e.g. `4..10` [default: every size the schedule allows].
        #[arg(long)]
        sizes: Option<SizeRange>,
        /// Base design CSV [default: the computed LD design].
        #[arg(long)]
        base: Option<PathBuf>,
        /// Custom schedule such as `+1,+2,-4` (one-based base indices).
        #[arg(long)]
        schedule: Option<ExpansionSchedule>,
    },
    /// Variance function d(t) of a design on a grid.
    Dcurve {
        /// Design CSV [default: the computed LD design].
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long)]
        t_lo: Option<f64>,
        #[arg(long)]
        t_hi: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Efficiency of an expanded design as a function of the step length.
    Rcurve {
        /// Target size for the default schedule [default: base size + 2].
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        schedule: Option<ExpansionSchedule>,
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long)]
        r_lo: Option<f64>,
        #[arg(long)]
        r_hi: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Efficiency of a design relative to a reference.
    Eff {
        #[arg(long)]
        design: PathBuf,
        /// Reference design CSV [default: the computed LD design].
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Locally robust index of a design for every parameter.
    Lri {
        /// Design CSV [default: the computed LD design].
        #[arg(long)]
        design: Option<PathBuf>,
        /// Relative finite-difference step.
        #[arg(long, default_value_t = DEFAULT_LRI_STEP)]
        fd_step: f64,
    },
    /// Randomized property suite plus structural checks on the LD design.
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

/// Inclusive range of support sizes: `5`, `4..12` or `4-12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeRange {
    pub lo: usize,
    pub hi: usize,
}

impl FromStr for SizeRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad size range '{s}' (expected N, A..B or A-B)"));
        let (a, b) = match s.split_once("..").or_else(|| s.split_once('-')) {
            Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
            None => (s.trim(), s.trim()),
        };
        let lo: usize = a.parse().map_err(|_| bad())?;
        let hi: usize = b.parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        Ok(SizeRange { lo, hi })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SingularThroughout
            | Error::SingularMatrix(_)
            | Error::SingularNuisanceBlock
            | Error::NonFinite { .. }
            | Error::EmptyDesign => EXIT_NONCONVERGENCE,
            _ => EXIT_INVALID,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Executes a parsed command; `Ok` carries 0, 3 or 4.
pub fn run(cli: &Cli) -> CliResult<i32> {
    let scenario = load_scenario(&cli.common)?;
    let model = scenario.model()?;
    let out = cli.common.out.clone();
    fs::create_dir_all(&out).map_err(|e| CliError::invalid(format!("{}: {e}", out.display())))?;
    let cx = Context { scenario, model, out };
    match &cli.command {
        Command::Ld { timing } => cmd_ld(&cx, *timing),
        Command::Esuld { sizes } => cmd_esuld(&cx, *sizes),
        Command::Eseuld {
            r,
            sizes,
            base,
            schedule,
        } => cmd_eseuld(&cx, *r, *sizes, base.as_deref(), schedule.as_ref()),
        Command::Dcurve {
            design,
            t_lo,
            t_hi,
            step,
        } => cmd_dcurve(&cx, design.as_deref(), *t_lo, *t_hi, *step),
        Command::Rcurve {
            size,
            schedule,
            base,
            r_lo,
            r_hi,
            step,
        } => cmd_rcurve(&cx, *size, schedule.as_ref(), base.as_deref(), (*r_lo, *r_hi, *step)),
        Command::Eff { design, reference } => cmd_eff(&cx, design, reference.as_deref()),
        Command::Lri { design, fd_step } => cmd_lri(&cx, design.as_deref(), *fd_step),
        Command::Verify { trials } => cmd_verify(&cx, *trials),
    }
}

fn load_scenario(common: &CommonArgs) -> CliResult<Scenario> {
    let sc = match &common.scenario {
        Some(path) => Scenario::read(path).map_err(|e| CliError::invalid(e.to_string()))?,
        None => Scenario::preset(common.preset.unwrap_or(ModelId::Pk1)),
    };
    Ok(match common.seed {
        Some(seed) => sc.with_seed(seed),
        None => sc,
    })
}

struct Context {
    scenario: Scenario,
    model: Model,
    out: PathBuf,
}

fn inverse_ok(mi: &FisherInfo) -> bool {
    inverse(&mi.m).is_ok()
}

impl Context {
    fn model(&self) -> &Model {
        &self.model
    }

    fn ld(&self) -> CliResult<SearchResult> {
        Ok(ld_design(
            self.model(),
            self.scenario.space,
            &self.scenario.search_config(),
        )?)
    }

    /// The certified LD design, or exit 3.
    fn certified_ld(&self) -> CliResult<SearchResult> {
        let r = self.ld()?;
        if !r.converged {
            return Err(CliError {
                code: EXIT_NONCONVERGENCE,
                message: format!("LD search did not certify (sup d = {})", fmt_sig(r.report.sup_d)),
            });
        }
        Ok(r)
    }

    fn write(&self, name: &str, body: &str) -> CliResult<PathBuf> {
        let path = self.out.join(name);
        fs::write(&path, body).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    /// CSV body prefixed by the scenario as comment lines.
    fn write_table(&self, name: &str, header: &str, rows: &[String]) -> CliResult<PathBuf> {
        let mut s = self.scenario.comment_block();
        s.push_str(header);
        s.push('\n');
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        self.write(name, &s)
    }

    /// Reads a user design; singular designs are invalid input.
    fn read_design(&self, path: &Path) -> CliResult<DesignMeasure> {
        let xi = DesignMeasure::read_csv(path, self.scenario.space).map_err(|e| CliError::invalid(e.to_string()))?;
        if !inverse_ok(&fisher_info(self.model(), &xi)) {
            return Err(CliError::invalid(format!(
                "{}: information matrix is singular",
                path.display()
            )));
        }
        Ok(xi)
    }

    fn design_or_ld(&self, path: Option<&Path>) -> CliResult<DesignMeasure> {
        match path {
            Some(p) => self.read_design(p),
            None => Ok(self.certified_ld()?.design),
        }
    }
}

fn join_times(xi: &DesignMeasure) -> String {
    xi.times().iter().map(|t| fmt_sig(*t)).collect::<Vec<_>>().join(";")
}

fn lri_cells(model: &Model, xi: &DesignMeasure) -> CliResult<Vec<String>> {
    let report = lri_report(model, xi, DEFAULT_LRI_STEP)?;
    Ok(report.values[1..].iter().map(|v| fmt_lri(*v)).collect())
}

fn fmt_lri(v: LriValue) -> String {
    match v {
        LriValue::Finite(x) => fmt_sig(x),
        LriValue::Infinite => "inf".to_string(),
    }
}

fn lri_header(model: &Model) -> String {
    (1..model.k())
        .map(|i| format!("lri_beta{i}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Rounds to the 9 significant digits used in every output file.
fn sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

#[derive(Serialize)]
struct LdSummary {
    model: ModelId,
    seed: u64,
    support_size: usize,
    times: Vec<f64>,
    weights: Vec<f64>,
    criterion: f64,
    sup_d: f64,
    argmax_t: f64,
    threshold: f64,
    cert_tol: f64,
    interior_maxima: Vec<[f64; 2]>,
    converged: bool,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<f64>,
}

fn cmd_ld(cx: &Context, timing: bool) -> CliResult<i32> {
    let start = Instant::now();
    let result = cx.ld()?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let model = cx.model();
    let xi = &result.design;

    cx.write("design.csv", &xi.to_csv())?;

    let vf = VarianceFunction::new(model, xi, &InterestSet::all(model.k()))?;
    let space = cx.scenario.space;
    let rows: Vec<String> = space
        .grid(cx.scenario.search.grid_n)
        .into_iter()
        .map(|t| format!("{},{}", fmt_sig(t), fmt_sig(vf.eval(t))))
        .collect();
    cx.write_table("equivalence.csv", "t,d", &rows)?;

    let report = &result.report;
    let summary = LdSummary {
        model: model.id(),
        seed: cx.scenario.seed,
        support_size: xi.len(),
        times: xi.times().into_iter().map(sig).collect(),
        weights: xi.weights().into_iter().map(sig).collect(),
        criterion: sig(result.criterion),
        sup_d: sig(report.sup_d),
        argmax_t: sig(report.argmax_t),
        threshold: report.threshold,
        cert_tol: report.cert_tol,
        interior_maxima: report.local_maxima.iter().map(|&(t, d)| [sig(t), sig(d)]).collect(),
        converged: result.converged,
        iterations: result.iterations,
        runtime_ms: timing.then_some(sig(elapsed)),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::invalid(e.to_string()))?;
    cx.write("summary.json", &(json + "\n"))?;

    println!(
        "{} LD design: t = [{}], sup d = {}, converged = {}",
        model.id(),
        join_times(xi).replace(';', ", "),
        fmt_sig(report.sup_d),
        result.converged
    );
    Ok(if result.converged { EXIT_OK } else { EXIT_NONCONVERGENCE })
}

fn cmd_esuld(cx: &Context, sizes: Option<SizeRange>) -> CliResult<i32> {
    let model = cx.model();
    let k = model.k();
    let sizes = sizes.unwrap_or(SizeRange { lo: k, hi: k + 8 });
    if sizes.lo < k {
        return Err(CliError::invalid(format!(
            "support size {} is below the parameter count {k}",
            sizes.lo
        )));
    }
    let ld = cx.certified_ld()?.design;
    let mut rows = Vec::new();
    for s in sizes.lo..=sizes.hi {
        // At s = k the row reports the LD design itself.
        let (spacing, xi, eff) = if s == k {
            (String::new(), ld.clone(), 1.0)
        } else {
            let r = esuld(model, cx.scenario.space, s, &ld)?;
            (fmt_sig(r.spec.h), r.spec.design, r.efficiency)
        };
        let mut row = format!("{s},{spacing},{},{}", join_times(&xi), fmt_sig(eff));
        for cell in lri_cells(model, &xi)? {
            let _ = write!(row, ",{cell}");
        }
        rows.push(row);
    }
    let path = cx.write_table(
        "esuld.csv",
        &format!("size,spacing,support,efficiency,{}", lri_header(model)),
        &rows,
    )?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(EXIT_OK)
}

fn default_r(id: ModelId) -> f64 {
    match id {
        ModelId::Pk1 => 1.0,
        ModelId::Pk2 => 0.2,
    }
}

/// Base design and the full schedule to truncate.
fn expansion_inputs(
    cx: &Context,
    ld: &DesignMeasure,
    base: Option<&Path>,
    schedule: Option<&ExpansionSchedule>,
    max_size: Option<usize>,
) -> CliResult<(DesignMeasure, ExpansionSchedule)> {
    let base = match base {
        Some(p) => cx.read_design(p)?,
        None => ld.clone(),
    };
    let schedule = match schedule {
        Some(s) => s.clone(),
        None => {
            let id = cx.model().id();
            let full = crate::robust::full_schedule(id);
            let target = max_size.unwrap_or(base.len() + full.len());
            default_schedule(id, base.len(), target)?
        }
    };
    Ok((base, schedule))
}

fn cmd_eseuld(
    cx: &Context,
    r: Option<f64>,
    sizes: Option<SizeRange>,
    base: Option<&Path>,
    schedule: Option<&ExpansionSchedule>,
) -> CliResult<i32> {
    let model = cx.model();
    let r = r.unwrap_or_else(|| default_r(model.id()));
    if !r.is_finite() {
        return Err(CliError::invalid(format!("step length must be finite, got {r}")));
    }
    let ld = cx.certified_ld()?.design;
    let (base, full) = expansion_inputs(cx, &ld, base, schedule, sizes.map(|s| s.hi))?;
    let sizes = sizes.unwrap_or(SizeRange {
        lo: base.len(),
        hi: base.len() + full.len(),
    });
    if sizes.lo < base.len() || sizes.hi > base.len() + full.len() {
        return Err(CliError::invalid(format!(
            "sizes must lie in {}..{} for this base and schedule",
            base.len(),
            base.len() + full.len()
        )));
    }
    let ref_det = d_criterion(&fisher_info(model, &ld));
    let blank_lri = vec![String::new(); model.k() - 1].join(",");
    let mut rows = Vec::new();
    for size in sizes.lo..=sizes.hi {
        let sched = full.truncated(size - base.len());
        // A zero step collapses every expansion onto its anchor.
        let xi = if r > 0.0 { eseuld(&base, r, &sched).ok() } else { None };
        let row = match xi.filter(|xi| inverse_ok(&fisher_info(model, xi))) {
            Some(xi) => {
                let eff = d_criterion(&fisher_info(model, &xi)) / ref_det;
                format!(
                    "{size},{},{},{},{},true",
                    fmt_sig(r),
                    join_times(&xi),
                    fmt_sig(eff),
                    lri_cells(model, &xi)?.join(",")
                )
            }
            None => format!("{size},{},,,{blank_lri},false", fmt_sig(r)),
        };
        rows.push(row);
    }
    let header = format!("size,r,support,efficiency,{},feasible", lri_header(model));
    let path = cx.write_table("eseuld.csv", &header, &rows)?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(EXIT_OK)
}

/// `lo, lo + step, ...` up to `hi` (inclusive within rounding).
fn linear_range(lo: f64, hi: f64, step: f64, what: &str) -> CliResult<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || !(hi > lo) || !(step > 0.0) {
        return Err(CliError::invalid(format!(
            "empty {what} range: lo = {lo}, hi = {hi}, step = {step}"
        )));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return Err(CliError::invalid(format!("{what} range has too many points ({n})")));
    }
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

fn cmd_dcurve(
    cx: &Context,
    design: Option<&Path>,
    t_lo: Option<f64>,
    t_hi: Option<f64>,
    step: Option<f64>,
) -> CliResult<i32> {
    let model = cx.model();
    let xi = cx.design_or_ld(design)?;
    let space = cx.scenario.space;
    let lo = t_lo.unwrap_or(space.lo());
    let hi = t_hi.unwrap_or(space.hi());
    if lo < 0.0 {
        return Err(CliError::invalid(format!("t_lo must be >= 0, got {lo}")));
    }
    let ts = linear_range(lo, hi, step.unwrap_or((hi - lo) / 1000.0), "t")?;
    let vf = VarianceFunction::new(model, &xi, &InterestSet::all(model.k()))?;
    let rows: Vec<String> = ts
        .iter()
        .map(|&t| format!("{},{}", fmt_sig(t), fmt_sig(vf.eval(t))))
        .collect();
    let path = cx.write_table("dcurve.csv", "t,d", &rows)?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(EXIT_OK)
}

fn cmd_rcurve(
    cx: &Context,
    size: Option<usize>,
    schedule: Option<&ExpansionSchedule>,
    base: Option<&Path>,
    (r_lo, r_hi, step): (Option<f64>, Option<f64>, Option<f64>),
) -> CliResult<i32> {
    let model = cx.model();
    let ld = cx.certified_ld()?.design;
    let base_len = match base {
        Some(p) => cx.read_design(p)?.len(),
        None => ld.len(),
    };
    let target = size.unwrap_or(base_len + 2);
    let (base, sched) = expansion_inputs(cx, &ld, base, schedule, Some(target))?;
    let default_hi = 5.0 * default_r(model.id());
    let lo = r_lo.unwrap_or(default_hi / 500.0);
    let hi = r_hi.unwrap_or(default_hi);
    let rs = linear_range(lo, hi, step.unwrap_or((hi - lo) / 499.0), "r")?;
    let curve = efficiency_vs_r(model, &base, &sched, &ld, &rs)?;
    let rows: Vec<String> = curve
        .iter()
        .map(|p| match p.efficiency {
            Some(e) => format!("{},{},true", fmt_sig(p.r), fmt_sig(e)),
            None => format!("{},,false", fmt_sig(p.r)),
        })
        .collect();
    let path = cx.write_table("rcurve.csv", "r,efficiency,feasible", &rows)?;
    println!("wrote {} rows to {} (schedule {sched})", rows.len(), path.display());
    Ok(EXIT_OK)
}

fn cmd_eff(cx: &Context, design: &Path, reference: Option<&Path>) -> CliResult<i32> {
    let model = cx.model();
    let xi = cx.read_design(design)?;
    let reference = cx.design_or_ld(reference)?;
    let det = d_criterion(&fisher_info(model, &xi));
    let ref_det = d_criterion(&fisher_info(model, &reference));
    let eff = det / ref_det;
    let row = format!("{},{},{}", fmt_sig(det), fmt_sig(ref_det), fmt_sig(eff));
    cx.write_table("efficiency.csv", "criterion,reference_criterion,efficiency", &[row])?;
    println!("efficiency = {}", fmt_sig(eff));
    Ok(EXIT_OK)
}

fn cmd_lri(cx: &Context, design: Option<&Path>, fd_step: f64) -> CliResult<i32> {
    if !(fd_step > 0.0) {
        return Err(CliError::invalid(format!("fd_step must be positive, got {fd_step}")));
    }
    let model = cx.model();
    let xi = cx.design_or_ld(design)?;
    let report = lri_report(model, &xi, fd_step)?;
    let rows: Vec<String> = report
        .names
        .iter()
        .zip(&report.values)
        .map(|(n, v)| format!("{n},{}", fmt_lri(*v)))
        .collect();
    for r in &rows {
        println!("{}", r.replace(',', " = "));
    }
    cx.write_table("lri.csv", "parameter,lri", &rows)?;
    Ok(EXIT_OK)
}

fn structural_checks(cx: &Context) -> CliResult<Vec<PropertyOutcome>> {
    let model = cx.model();
    let ld = cx.certified_ld()?.design;
    let mut out = Vec::new();

    let mut t3 = PropertyOutcome::new("ld_nuisance_equivalence");
    let report = check_nuisance_equivalence(model, &ld, cx.scenario.search.cert_tol)?;
    t3.record(report.passed, || {
        format!("sup d_s = {} > {}", fmt_sig(report.sup_d), report.threshold)
    });
    out.push(t3);

    let mut maxima = PropertyOutcome::new("ld_interior_maxima");
    let count = check_interior_maxima_count(model, &ld)?;
    let ok = match model.id() {
        ModelId::Pk1 => count <= 2,
        ModelId::Pk2 => count == 4,
    };
    maxima.record(ok, || format!("{} interior maxima", count));
    out.push(maxima);

    if let Model::Pk1(p) = model {
        let mut cof = PropertyOutcome::new("ld_cofactor_signs");
        let c = check_cofactor_signs(&ld, p)?;
        cof.record(c.ok, || format!("cof14 = {:e}, cof24 = {:e}", c.cof14, c.cof24));
        out.push(cof);
    }
    Ok(out)
}

fn cmd_verify(cx: &Context, trials: usize) -> CliResult<i32> {
    if trials == 0 {
        return Err(CliError::invalid("trials must be positive"));
    }
    let mut outcomes = run_suite(&SuiteConfig::new(trials, cx.scenario.seed))?;
    outcomes.extend(structural_checks(cx)?);

    let rows: Vec<String> = outcomes
        .iter()
        .map(|o| format!("{},{},{},{}", o.name, o.trials, o.failures, o.passed()))
        .collect();
    cx.write_table("verify.csv", "property,trials,failures,passed", &rows)?;
    let mut witnesses = String::new();
    for o in &outcomes {
        for w in &o.witnesses {
            let _ = writeln!(witnesses, "{}: {w}", o.name);
        }
    }
    cx.write("witnesses.txt", &witnesses)?;

    for o in &outcomes {
        println!(
            "{:<26} {:>6} trials {:>4} failures  {}",
            o.name,
            o.trials,
            o.failures,
            if o.passed() { "ok" } else { "FAIL" }
        );
    }
    Ok(if outcomes.iter().all(PropertyOutcome::passed) {
        EXIT_OK
    } else {
        EXIT_PROPERTY
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_range_forms() {
        assert_eq!("5".parse::<SizeRange>().unwrap(), SizeRange { lo: 5, hi: 5 });
        assert_eq!("4..12".parse::<SizeRange>().unwrap(), SizeRange { lo: 4, hi: 12 });
        assert_eq!("4..=12".parse::<SizeRange>().unwrap(), SizeRange { lo: 4, hi: 12 });
        assert_eq!("4-12".parse::<SizeRange>().unwrap(), SizeRange { lo: 4, hi: 12 });
        assert!("12..4".parse::<SizeRange>().is_err());
        assert!("x".parse::<SizeRange>().is_err());
    }

    #[test]
    fn linear_range_rejects_empty() {
        assert!(linear_range(1.0, 1.0, 0.1, "t").is_err());
        assert!(linear_range(0.0, 1.0, 0.0, "t").is_err());
        assert_eq!(linear_range(0.0, 1.0, 0.25, "t").unwrap().len(), 5);
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::SingularThroughout).code, EXIT_NONCONVERGENCE);
        assert_eq!(CliError::from(Error::InvalidParams("x".into())).code, EXIT_INVALID);
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
