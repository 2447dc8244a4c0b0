//! Empirical checks of the structural facts behind the LD designs: cofactor
//! signs, Chebyshev-system positivity, the level-crossing bound of the
//! variance function, the nuisance-parameter equivalence and σ / β0
//! invariances.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::design::{
    d_criterion, efficiency, equivalence_check, fisher_info, DesignMeasure, EquivalenceReport, InterestSet,
    SupportPoint, VarianceFunction, DEFAULT_CHECK_GRID,
};
use crate::error::{Error, Result};
use crate::models::{Model, ModelId, ParamsPk1, ParamsPk2};
use crate::numerics::{cofactor, det, inverse, Interval, Matrix, Vector};

/// Values within this band of zero do not count as a sign.
pub const CROSSING_DEAD_BAND: f64 = 1e-10;

/// Grid used by the randomized level-crossing check.
pub const CROSSING_GRID: usize = 100_000;

/// Upper bound on the number of level crossings of `d` for PK1.
pub const MAX_CROSSINGS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub witnesses: Vec<String>,
}

impl PropertyOutcome {
    pub fn new(name: &str) -> Self {
        PropertyOutcome {
            name: name.to_string(),
            trials: 0,
            failures: 0,
            witnesses: Vec::new(),
        }
    }

    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
            self.witnesses.push(witness());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CofactorSigns {
    pub cof14: f64,
    pub cof24: f64,
    /// `cof14 > 0` and `cof24 < 0`.
    pub ok: bool,
    /// `-cof14 - cof24 > 0`; reported separately from `ok`.
    pub sum_ok: bool,
}

fn check_cofactor_support(xi: &DesignMeasure) -> Result<()> {
    let positive = xi.times().into_iter().filter(|&t| t > 0.0).count();
    if positive < 3 {
        return Err(Error::Precondition(format!(
            "cofactor check needs at least 3 positive support times, got {positive}"
        )));
    }
    Ok(())
}

/// Cofactor signs of `M(ξ, β)` at σ = 1 built from an arbitrary gradient.
pub fn cofactor_signs_with(xi: &DesignMeasure, grad: impl Fn(f64) -> Vector) -> Result<CofactorSigns> {
    check_cofactor_support(xi)?;
    let mut m = Matrix::zeros(4);
    for p in xi.points() {
        let g = grad(p.t);
        if g.len() != 4 {
            return Err(Error::Precondition(format!(
                "gradient has length {}, expected 4",
                g.len()
            )));
        }
        m.add_scaled_outer(p.weight, &g);
    }
    let cof14 = cofactor(&m, 0, 3);
    let cof24 = cofactor(&m, 1, 3);
    Ok(CofactorSigns {
        cof14,
        cof24,
        ok: cof14 > 0.0 && cof24 < 0.0,
        sum_ok: -cof14 - cof24 > 0.0,
    })
}

/// `Cof14 > 0` and `Cof24 < 0` for the PK1 information matrix.
pub fn check_cofactor_signs(xi: &DesignMeasure, p: &ParamsPk1) -> Result<CofactorSigns> {
    let unit = ParamsPk1 { sigma: 1.0, ..*p };
    let model = Model::pk1(unit)?;
    cofactor_signs_with(xi, |t| model.grad(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChebyshevSystem {
    /// `{1, e^{bt}, t e^{bt}}`
    ExpTexp,
    /// `{1, e^{bt}, e^{2bt}}`
    ExpExp2,
    /// `{1, t, e^{bt}}`
    OneTExp,
}

impl ChebyshevSystem {
    pub const ALL: [ChebyshevSystem; 3] = [
        ChebyshevSystem::ExpTexp,
        ChebyshevSystem::ExpExp2,
        ChebyshevSystem::OneTExp,
    ];

    fn row(self, t: f64, b: f64) -> [f64; 3] {
        let e = (b * t).exp();
        match self {
            ChebyshevSystem::ExpTexp => [1.0, e, t * e],
            ChebyshevSystem::ExpExp2 => [1.0, e, e * e],
            ChebyshevSystem::OneTExp => [1.0, t, e],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChebyshevSystem::ExpTexp => "exp-texp",
            ChebyshevSystem::ExpExp2 => "exp-exp2",
            ChebyshevSystem::OneTExp => "one-t-exp",
        }
    }
}

/// Generalized Vandermonde determinant with rows = basis at `t1, t2, t3`.
pub fn chebyshev_det(t1: f64, t2: f64, t3: f64, beta3: f64, system: ChebyshevSystem) -> f64 {
    let rows = [system.row(t1, beta3), system.row(t2, beta3), system.row(t3, beta3)];
    let m = Matrix::from_fn(3, |i, j| rows[i][j]);
    det(&m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingCount {
    /// Largest count over all levels.
    pub max: usize,
    pub per_level: Vec<usize>,
    pub grid_n: usize,
}

fn sign_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut last: Option<bool> = None;
    let mut changes = 0;
    for v in values {
        if v.abs() <= CROSSING_DEAD_BAND {
            continue;
        }
        let positive = v > 0.0;
        if last.is_some_and(|l| l != positive) {
            changes += 1;
        }
        last = Some(positive);
    }
    changes
}

/// Sign changes of `d(t) + c` for each `c` in `levels` on a grid over the
/// open design interval.
pub fn count_level_crossings(
    model: &Model,
    xi: &DesignMeasure,
    levels: &[f64],
    grid_n: usize,
) -> Result<CrossingCount> {
    if grid_n < 2 {
        return Err(Error::Precondition(format!(
            "crossing grid needs at least 2 points, got {grid_n}"
        )));
    }
    let vf = VarianceFunction::new(model, xi, &InterestSet::all(model.k()))?;
    let d = sample_interior(&vf, xi.space(), grid_n);
    let per_level: Vec<usize> = levels.iter().map(|&c| sign_changes(d.iter().map(|v| v + c))).collect();
    Ok(CrossingCount {
        max: per_level.iter().copied().max().unwrap_or(0),
        per_level,
        grid_n,
    })
}

fn sample_interior(vf: &VarianceFunction, space: Interval, grid_n: usize) -> Vec<f64> {
    let step = space.width() / (grid_n + 1) as f64;
    (1..=grid_n).map(|i| vf.eval(space.lo() + i as f64 * step)).collect()
}

/// Equivalence check for the non-baseline parameters with `s = k - 1`.
pub fn check_nuisance_equivalence(model: &Model, xi_ld: &DesignMeasure, cert_tol: f64) -> Result<EquivalenceReport> {
    equivalence_check(
        model,
        xi_ld,
        &InterestSet::without_baseline(model.k()),
        DEFAULT_CHECK_GRID,
        cert_tol,
    )
}

/// Refined local maxima of `d` strictly inside the design interval.
pub fn check_interior_maxima_count(model: &Model, xi_ld: &DesignMeasure) -> Result<usize> {
    let report = equivalence_check(model, xi_ld, &InterestSet::all(model.k()), DEFAULT_CHECK_GRID, 1e-3)?;
    Ok(report.interior_maxima())
}

/// Sizes of the randomized suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub trials: usize,
    pub grad_params: usize,
    pub grad_times: usize,
    pub crossing_designs: usize,
    pub crossing_levels: usize,
    pub crossing_grid: usize,
    pub seed: u64,
}

impl SuiteConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        SuiteConfig {
            trials,
            grad_params: 200,
            grad_times: 20,
            crossing_designs: 100,
            crossing_levels: 20,
            crossing_grid: CROSSING_GRID,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("trials", self.trials),
            ("grad_params", self.grad_params),
            ("grad_times", self.grad_times),
            ("crossing_designs", self.crossing_designs),
            ("crossing_levels", self.crossing_levels),
        ];
        for (name, n) in sizes {
            if n == 0 {
                return Err(Error::Precondition(format!("{name} must be positive")));
            }
        }
        if self.crossing_grid < 2 {
            return Err(Error::Precondition("crossing_grid must be at least 2".into()));
        }
        Ok(())
    }
}

/// Independent stream per property so suites stay comparable when one grows.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Random PK1 parameters: β1 ∈ [1, 20], β2 ∈ [0.1, 10], β3 ∈ [0.01, 1], D ∈ [1, 10].
pub fn random_pk1(rng: &mut impl Rng) -> ParamsPk1 {
    let beta = [
        rng.gen_range(-5.0..5.0),
        rng.gen_range(1.0..20.0),
        rng.gen_range(0.1..10.0),
        rng.gen_range(0.01..1.0),
    ];
    ParamsPk1::new(beta, rng.gen_range(1.0..10.0), 1.0).expect("ranges are valid")
}

/// Random PK2 parameters, with absorption at least 5% faster than elimination.
pub fn random_pk2(rng: &mut impl Rng) -> ParamsPk2 {
    loop {
        let b3 = rng.gen_range(0.01..1.0);
        let b2 = rng.gen_range(0.1..10.0);
        if b2 < 1.05 * b3 {
            continue;
        }
        let beta = [
            rng.gen_range(-5.0..5.0),
            rng.gen_range(1.0..20.0),
            b2,
            b3,
            rng.gen_range(0.1..10.0),
        ];
        return ParamsPk2::new(beta, rng.gen_range(1.0..10.0), 1.0).expect("ranges are valid");
    }
}

fn random_model(rng: &mut impl Rng, id: ModelId) -> Model {
    match id {
        ModelId::Pk1 => Model::Pk1(random_pk1(rng)),
        ModelId::Pk2 => Model::Pk2(random_pk2(rng)),
    }
}

/// Horizon `u ∈ [5, 10] / β3`, long enough for the effect to decay.
fn random_horizon(rng: &mut impl Rng, model: &Model) -> Interval {
    let elimination = model.beta()[3];
    Interval::new(0.0, rng.gen_range(5.0..10.0) / elimination).expect("positive horizon")
}

/// Random `n`-point design on `space` whose information matrix inverts.
pub fn random_design(rng: &mut impl Rng, model: &Model, space: Interval, n: usize) -> DesignMeasure {
    loop {
        let mut times: Vec<f64> = (0..n).map(|_| rng.gen_range(space.lo()..space.hi())).collect();
        times.sort_by(f64::total_cmp);
        if times.windows(2).any(|w| w[1] - w[0] < 1e-6 * space.width()) {
            continue;
        }
        let points = times
            .into_iter()
            .map(|t| SupportPoint {
                t,
                weight: rng.gen_range(0.1..1.0),
            })
            .collect();
        let xi = DesignMeasure::normalized(points, space).expect("distinct in-range times");
        if inverse(&fisher_info(model, &xi).m).is_ok() {
            return xi;
        }
    }
}

fn fmt_beta(model: &Model) -> String {
    let mut s = String::new();
    for (i, b) in model.beta().iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{b:.6}");
    }
    let _ = write!(s, " D={:.6}", model.dose());
    s
}

fn fmt_times(xi: &DesignMeasure) -> String {
    let parts: Vec<String> = xi.times().iter().map(|t| format!("{t:.6}")).collect();
    parts.join(" ")
}

/// Analytic gradients against central differences, both models.
pub fn gradient_fd_check(cfg: &SuiteConfig) -> PropertyOutcome {
    let mut out = PropertyOutcome::new("gradient_vs_fd");
    let mut rng = stream(cfg.seed, 1);
    for id in [ModelId::Pk1, ModelId::Pk2] {
        for _ in 0..cfg.grad_params {
            let model = random_model(&mut rng, id);
            let space = random_horizon(&mut rng, &model);
            for _ in 0..cfg.grad_times {
                let t = rng.gen_range(space.lo()..space.hi());
                let g = model.grad(t);
                let beta = model.beta();
                for j in 0..model.k() {
                    let h = 1e-6 * beta[j].abs().max(1.0);
                    let up = model.with_param(j, beta[j] + h).map(|m| m.eta(t));
                    let down = model.with_param(j, beta[j] - h).map(|m| m.eta(t));
                    let fd = match (up, down) {
                        (Ok(a), Ok(b)) => (a - b) / (2.0 * h),
                        _ => f64::NAN,
                    };
                    let ok = (g[j] - fd).abs() <= 1e-5 * g[j].abs() + 1e-8;
                    out.record(ok, || {
                        format!(
                            "{id} beta=[{}] t={t:.6} j={j} analytic={:e} fd={fd:e}",
                            fmt_beta(&model),
                            g[j]
                        )
                    });
                }
            }
        }
    }
    out
}

/// Cofactor signs and their sum over random PK1 parameters and 4-point designs.
pub fn cofactor_check(cfg: &SuiteConfig) -> Vec<PropertyOutcome> {
    let mut signs = PropertyOutcome::new("cofactor_signs");
    let mut sum = PropertyOutcome::new("cofactor_sum");
    let mut rng = stream(cfg.seed, 2);
    for _ in 0..cfg.trials {
        let p = random_pk1(&mut rng);
        let model = Model::Pk1(p);
        let space = random_horizon(&mut rng, &model);
        let xi = random_design(&mut rng, &model, space, 4);
        let case = || format!("beta=[{}] t=[{}]", fmt_beta(&model), fmt_times(&xi));
        match check_cofactor_signs(&xi, &p) {
            Ok(c) => {
                let values = || format!("{} cof14={:e} cof24={:e}", case(), c.cof14, c.cof24);
                signs.record(c.ok, values);
                sum.record(c.sum_ok, values);
            }
            Err(e) => {
                signs.record(false, || format!("{} error: {e}", case()));
                sum.record(false, || format!("{} error: {e}", case()));
            }
        }
    }
    vec![signs, sum]
}

/// Chebyshev determinants over random ordered triples, every system.
pub fn chebyshev_check(cfg: &SuiteConfig) -> PropertyOutcome {
    let mut out = PropertyOutcome::new("chebyshev_positivity");
    let mut rng = stream(cfg.seed, 3);
    for _ in 0..cfg.trials {
        let b3: f64 = rng.gen_range(0.01..1.0);
        let u = rng.gen_range(5.0..10.0) / b3;
        let mut t = [rng.gen_range(0.0..u), rng.gen_range(0.0..u), rng.gen_range(0.0..u)];
        t.sort_by(f64::total_cmp);
        if t[1] - t[0] < 1e-6 * u || t[2] - t[1] < 1e-6 * u {
            // Resolution floor: a nearly repeated row is zero up to rounding.
            t[1] = t[0] + (t[2] - t[0]) / 2.0;
        }
        for system in ChebyshevSystem::ALL {
            let v = chebyshev_det(t[0], t[1], t[2], b3, system);
            out.record(v > 0.0, || {
                format!(
                    "{} b3={b3:.6} t=[{:.6} {:.6} {:.6}] det={v:e}",
                    system.name(),
                    t[0],
                    t[1],
                    t[2]
                )
            });
        }
    }
    out
}

/// Level crossings of `d` for random PK1 designs at levels spread over its range.
pub fn crossing_check(cfg: &SuiteConfig) -> Result<PropertyOutcome> {
    let mut out = PropertyOutcome::new("level_crossings");
    let mut rng = stream(cfg.seed, 4);
    for _ in 0..cfg.crossing_designs {
        let model = Model::Pk1(random_pk1(&mut rng));
        let space = random_horizon(&mut rng, &model);
        let n = rng.gen_range(4..=6);
        let xi = random_design(&mut rng, &model, space, n);
        let vf = VarianceFunction::new(&model, &xi, &InterestSet::all(4))?;
        let d = sample_interior(&vf, space, cfg.crossing_grid);
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let levels = cfg.crossing_levels;
        for j in 0..levels {
            let c = -(lo + (j as f64 + 0.5) / levels as f64 * (hi - lo));
            let count = sign_changes(d.iter().map(|v| v + c));
            out.record(count <= MAX_CROSSINGS, || {
                format!(
                    "beta=[{}] t=[{}] level={c:e} crossings={count}",
                    fmt_beta(&model),
                    fmt_times(&xi)
                )
            });
        }
    }
    Ok(out)
}

/// Exact σ- and β0-invariance of det M, d and efficiency.
pub fn invariance_check(cfg: &SuiteConfig) -> Result<Vec<PropertyOutcome>> {
    let mut sigma_out = PropertyOutcome::new("sigma_invariance");
    let mut beta0_out = PropertyOutcome::new("beta0_invariance");
    let mut rng = stream(cfg.seed, 5);
    for trial in 0..cfg.trials {
        let id = if trial % 2 == 0 { ModelId::Pk1 } else { ModelId::Pk2 };
        let model = random_model(&mut rng, id);
        let space = random_horizon(&mut rng, &model);
        let n = model.k() + rng.gen_range(0..3);
        let xi = random_design(&mut rng, &model, space, n);
        let reference = random_design(&mut rng, &model, space, n);
        let probe = rng.gen_range(space.lo()..space.hi());
        let interest = InterestSet::all(model.k());
        let det1 = d_criterion(&fisher_info(&model, &xi));
        let d1 = VarianceFunction::new(&model, &xi, &interest)?.eval(probe);
        let eff1 = efficiency(&model, &xi, &reference)?;

        for sigma in [0.5, 2.0] {
            let scaled = model.with_sigma(sigma)?;
            let det_s = d_criterion(&fisher_info(&scaled, &xi));
            let d_s = VarianceFunction::new(&scaled, &xi, &interest)?.eval(probe);
            let eff_s = efficiency(&scaled, &xi, &reference)?;
            let factor = sigma.powi(-2 * model.k() as i32);
            let ok = det_s == det1 * factor && d_s == d1 && eff_s == eff1;
            sigma_out.record(ok, || {
                format!(
                    "{id} sigma={sigma} beta=[{}] t=[{}] det {det1:e}->{det_s:e} d {d1:e}->{d_s:e} eff {eff1:e}->{eff_s:e}",
                    fmt_beta(&model),
                    fmt_times(&xi)
                )
            });
        }

        let shift = rng.gen_range(-100.0..100.0);
        let shifted = model.with_param(0, model.beta()[0] + shift)?;
        let det_b = d_criterion(&fisher_info(&shifted, &xi));
        let d_b = VarianceFunction::new(&shifted, &xi, &interest)?.eval(probe);
        let eff_b = efficiency(&shifted, &xi, &reference)?;
        let ok = det_b == det1 && d_b == d1 && eff_b == eff1;
        beta0_out.record(ok, || {
            format!(
                "{id} shift={shift:.6} beta=[{}] det {det1:e}->{det_b:e} d {d1:e}->{d_b:e}",
                fmt_beta(&model)
            )
        });
    }
    Ok(vec![sigma_out, beta0_out])
}

/// Runs every randomized property; outcomes in a fixed order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<PropertyOutcome>> {
    cfg.validate()?;
    let mut outcomes = vec![gradient_fd_check(cfg)];
    outcomes.extend(cofactor_check(cfg));
    outcomes.push(chebyshev_check(cfg));
    outcomes.push(crossing_check(cfg)?);
    outcomes.extend(invariance_check(cfg)?);
    Ok(outcomes)
}
