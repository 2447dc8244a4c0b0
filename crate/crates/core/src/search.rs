//! Two-step locally D-optimal search: best `n`-point uniform design, then
//! Fedorov's V-algorithm with support collapse.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::{
    d_criterion, equivalence_check, fisher_info, fisher_info_raw, DesignMeasure, EquivalenceReport, InterestSet,
    SupportPoint, VarianceFunction, DEFAULT_CERT_TOL, DEFAULT_CHECK_GRID, MIN_GAP,
};
use crate::error::{Error, Result};
use crate::models::{Model, ModelId};
use crate::numerics::{
    find_local_maxima, log_det_psd, maximize_multivariate_with, maximize_scalar_with, Interval,
    DEFAULT_SIMPLEX_MAX_ITER,
};

/// Relative slack allowed when checking that `det M` never decreases.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Support size of the uniform design in step one.
    pub n_points: usize,
    /// Pin the left end of the design space into the support.
    pub fix_left: bool,
    /// Pin the right end of the design space into the support.
    pub fix_right: bool,
    pub multistarts: usize,
    /// Simplex diameter at which the uniform search stops (hours).
    pub tol_t: f64,
    pub cert_tol: f64,
    pub max_iter: usize,
    /// Support points closer than this are merged (hours).
    pub merge_tol: f64,
    pub drop_weight: f64,
    /// Linear grid used for argmax and certification.
    pub grid_n: usize,
    pub seed: u64,
}

impl SearchConfig {
    /// Defaults for a model: PK1 pins both ends, PK2 pins only `t = 0`.
    pub fn for_model(id: ModelId) -> Self {
        let (fix_left, fix_right) = match id {
            ModelId::Pk1 => (true, true),
            ModelId::Pk2 => (true, false),
        };
        SearchConfig {
            n_points: id.k(),
            fix_left,
            fix_right,
            multistarts: 16,
            tol_t: 1e-4,
            cert_tol: DEFAULT_CERT_TOL,
            max_iter: 5000,
            merge_tol: 0.05,
            drop_weight: 1e-4,
            grid_n: DEFAULT_CHECK_GRID,
            seed: 0,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.n_points < k {
            return Err(Error::Precondition(format!(
                "n_points = {} is below the parameter count {k}",
                self.n_points
            )));
        }
        let pinned = usize::from(self.fix_left) + usize::from(self.fix_right);
        if pinned > self.n_points {
            return Err(Error::Precondition("more pinned points than support points".into()));
        }
        for (name, v) in [
            ("tol_t", self.tol_t),
            ("cert_tol", self.cert_tol),
            ("drop_weight", self.drop_weight),
        ] {
            if !(v > 0.0) {
                return Err(Error::Precondition(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.merge_tol >= 0.0) {
            return Err(Error::Precondition("merge_tol must be >= 0".into()));
        }
        if self.multistarts == 0 || self.max_iter == 0 || self.grid_n < 100 {
            return Err(Error::Precondition(
                "multistarts and max_iter must be positive and grid_n >= 100".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub design: DesignMeasure,
    /// `det M` of the returned design.
    pub criterion: f64,
    pub report: EquivalenceReport,
    pub iterations: usize,
    /// Always implies `report.passed`.
    pub converged: bool,
}

fn certify(model: &Model, design: DesignMeasure, iterations: usize, cfg: &SearchConfig) -> Result<SearchResult> {
    let report = equivalence_check(model, &design, &InterestSet::all(model.k()), cfg.grid_n, cfg.cert_tol)?;
    let criterion = d_criterion(&fisher_info(model, &design));
    Ok(SearchResult {
        converged: report.passed,
        design,
        criterion,
        report,
        iterations,
    })
}

/// Maps `m` free coordinates plus pinned ends to sorted support times.
struct UniformLayout {
    space: Interval,
    fix_left: bool,
    fix_right: bool,
    n: usize,
}

impl UniformLayout {
    fn free(&self) -> usize {
        self.n - usize::from(self.fix_left) - usize::from(self.fix_right)
    }

    fn times(&self, free: &[f64]) -> Vec<f64> {
        let mut ts = Vec::with_capacity(self.n);
        if self.fix_left {
            ts.push(self.space.lo());
        }
        ts.extend_from_slice(free);
        if self.fix_right {
            ts.push(self.space.hi());
        }
        ts.sort_by(f64::total_cmp);
        ts
    }
}

const SINGULAR_OBJECTIVE: f64 = -1e10;

fn uniform_objective(model: &Model, layout: &UniformLayout, free: &[f64]) -> f64 {
    let ts = layout.times(free);
    let w = 1.0 / ts.len() as f64;
    let gap_floor = 1e-6 * layout.space.width();
    let crowding: f64 = ts
        .windows(2)
        .map(|p| ((gap_floor - (p[1] - p[0])) / gap_floor).max(0.0))
        .sum();
    let value = log_det_psd(&fisher_info_raw(model, ts.iter().map(|&t| (t, w))).m);
    if value.is_finite() {
        value - 1e3 * crowding
    } else {
        SINGULAR_OBJECTIVE - crowding
    }
}

/// Latin-hypercube sample of `count` points in the box.
fn latin_hypercube(rng: &mut ChaCha8Rng, count: usize, bounds: &[Interval]) -> Vec<Vec<f64>> {
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(bounds.len());
    for b in bounds {
        let mut strata: Vec<usize> = (0..count).collect();
        for i in (1..count).rev() {
            let j = rng.gen_range(0..=i);
            strata.swap(i, j);
        }
        columns.push(
            strata
                .into_iter()
                .map(|s| b.lo() + b.width() * (s as f64 + rng.gen::<f64>()) / count as f64)
                .collect(),
        );
    }
    (0..count).map(|i| columns.iter().map(|c| c[i]).collect()).collect()
}

/// Best equally weighted `cfg.n_points`-point design, ends pinned per config.
/// Simplex from `start`, restarted from the converged point until the objective stalls.
fn refine_free(
    objective: impl Fn(&[f64]) -> f64,
    start: Vec<f64>,
    bounds: &[Interval],
    tol: f64,
) -> Result<(Vec<f64>, f64, usize)> {
    let mut x = start;
    x.sort_by(f64::total_cmp);
    let mut value = f64::NEG_INFINITY;
    let mut iterations = 0;
    for _ in 0..4 {
        let r = maximize_multivariate_with(&objective, &x, bounds, tol, DEFAULT_SIMPLEX_MAX_ITER)?;
        iterations += r.iterations;
        let mut rx = r.x;
        rx.sort_by(f64::total_cmp);
        let improved = r.f > value + 1e-12 * value.abs().max(1.0);
        x = rx;
        value = r.f;
        if !improved {
            break;
        }
    }
    Ok((x, value, iterations))
}

/// Best equal-weight design with `cfg.n_points` points, pinned ends honoured.
///
/// Optimizes at σ = 1; the reported criterion uses the caller's σ.
pub fn uniform_ld_search(model: &Model, space: Interval, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate(model.k())?;
    let caller = model;
    let model = &caller.with_sigma(1.0)?;
    let layout = UniformLayout {
        space,
        fix_left: cfg.fix_left,
        fix_right: cfg.fix_right,
        n: cfg.n_points,
    };
    let m = layout.free();
    let objective = |x: &[f64]| uniform_objective(model, &layout, x);

    let (free, iterations) = if m == 0 {
        (Vec::new(), 0)
    } else {
        let bounds = vec![space; m];
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut iterations = 0;
        for start in latin_hypercube(&mut rng, cfg.multistarts, &bounds) {
            let (x, value, used) = refine_free(objective, start, &bounds, cfg.tol_t)?;
            iterations += used;
            let better = match &best {
                None => true,
                Some((bx, bv)) => value > *bv || (value == *bv && x[0] < bx[0]),
            };
            if better {
                best = Some((x, value));
            }
        }
        let (x, value) = best.expect("at least one start");
        if value <= SINGULAR_OBJECTIVE / 2.0 {
            return Err(Error::SingularThroughout);
        }
        (x, iterations)
    };

    let times = layout.times(&free);
    let design = DesignMeasure::uniform(&times, space)?;
    if !(d_criterion(&fisher_info(model, &design)) > 0.0) {
        return Err(Error::SingularThroughout);
    }
    certify(caller, design, iterations, cfg)
}

/// Merges clustered support points and drops negligible weights.
///
/// Consecutive points closer than `merge_tol` form one cluster whose weight is
/// the sum and whose location is the weighted mean. Points with weight below
/// `drop_weight` are then removed and the rest renormalized.
pub fn collapse_support(xi: &DesignMeasure, merge_tol: f64, drop_weight: f64) -> Result<DesignMeasure> {
    let mut clusters: Vec<(f64, f64)> = Vec::new(); // (Σ w t, Σ w)
    let mut last_t = f64::NEG_INFINITY;
    for p in xi.points() {
        match clusters.last_mut() {
            Some(c) if p.t - last_t < merge_tol => {
                c.0 += p.weight * p.t;
                c.1 += p.weight;
            }
            _ => clusters.push((p.weight * p.t, p.weight)),
        }
        last_t = p.t;
    }
    let points: Vec<SupportPoint> = clusters
        .into_iter()
        .filter(|&(_, w)| w >= drop_weight)
        .map(|(wt, w)| SupportPoint {
            t: xi.space().clamp(wt / w),
            weight: w,
        })
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyDesign);
    }
    DesignMeasure::normalized(points, xi.space())
}

/// Adds mass `alpha` at `t`, shrinking existing weights by `1 - alpha`.
fn fedorov_step(xi: &DesignMeasure, t: f64, alpha: f64) -> Result<DesignMeasure> {
    let mut points: Vec<SupportPoint> = xi
        .points()
        .iter()
        .map(|p| SupportPoint {
            t: p.t,
            weight: (1.0 - alpha) * p.weight,
        })
        .collect();
    match points.iter_mut().find(|p| (p.t - t).abs() < MIN_GAP) {
        Some(p) => p.weight += alpha,
        None => points.push(SupportPoint { t, weight: alpha }),
    }
    // A full away step removes the point exactly.
    points.retain(|p| p.weight > 1e-15);
    DesignMeasure::normalized(points, xi.space())
}

const MAX_POLISH_ROUNDS: usize = 50;

/// Multiplicative reweighting on a fixed support: `w_i <- w_i d(t_i) / k`.
///
/// Monotone in `det M`; stops when every `|d(t_i) - k| < tol`.
pub fn reweight(model: &Model, xi: &DesignMeasure, max_rounds: usize, tol: f64) -> Result<DesignMeasure> {
    let k = model.k() as f64;
    let interest = InterestSet::all(model.k());
    let mut current = xi.clone();
    for _ in 0..max_rounds {
        let vf = VarianceFunction::new(model, &current, &interest)?;
        let ds: Vec<f64> = current.points().iter().map(|p| vf.eval(p.t)).collect();
        if ds.iter().all(|d| (d - k).abs() < tol) {
            break;
        }
        let points = current
            .points()
            .iter()
            .zip(&ds)
            .map(|(p, d)| SupportPoint {
                t: p.t,
                weight: p.weight * d / k,
            })
            .collect();
        current = DesignMeasure::normalized(points, current.space())?;
    }
    Ok(current)
}

/// Moves every support point's mass onto the nearest local maximum of `d`
/// (design-space ends count as candidates), then reweights.
fn polish(
    model: &Model,
    xi: &DesignMeasure,
    vf: &VarianceFunction,
    cfg: &SearchConfig,
) -> Result<Option<(DesignMeasure, f64)>> {
    let space = xi.space();
    let mut peaks: Vec<f64> = vec![space.lo()];
    peaks.extend(
        find_local_maxima(|t| vf.eval(t), space, cfg.grid_n, MIN_GAP.max(1e-6))?
            .into_iter()
            .map(|(t, _)| t),
    );
    peaks.push(space.hi());
    let mut mass = vec![0.0; peaks.len()];
    for p in xi.points() {
        let nearest = peaks
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - p.t).abs().total_cmp(&(b.1 - p.t).abs()))
            .map(|(i, _)| i)
            .expect("peaks non-empty");
        mass[nearest] += p.weight;
    }
    let points: Vec<SupportPoint> = peaks
        .into_iter()
        .zip(mass)
        .filter(|&(_, w)| w > 0.0)
        .map(|(t, weight)| SupportPoint { t, weight })
        .collect();
    if points.len() < model.k() {
        return Ok(None);
    }
    let candidate = DesignMeasure::normalized(points, space)?;
    if !(d_criterion(&fisher_info(model, &candidate)) > 0.0) {
        return Ok(None);
    }
    let candidate = if candidate.len() == model.k() {
        // Saturated: equal weights are optimal, so only the locations move.
        let times = candidate.times();
        let layout = UniformLayout {
            space,
            fix_left: times[0] == space.lo(),
            fix_right: times[times.len() - 1] == space.hi(),
            n: times.len(),
        };
        let lo = usize::from(layout.fix_left);
        let free = times[lo..lo + layout.free()].to_vec();
        let bounds = vec![space; free.len()];
        let (x, _, _) = refine_free(
            |x: &[f64]| uniform_objective(model, &layout, x),
            free,
            &bounds,
            cfg.tol_t,
        )?;
        DesignMeasure::uniform(&layout.times(&x), space)?
    } else {
        reweight(model, &candidate, 500, 1e-10)?
    };
    let det = d_criterion(&fisher_info(model, &candidate));
    Ok(Some((candidate, det)))
}

/// Fedorov's V-algorithm from `init`.
///
/// Each iteration moves mass `α = (d* - k) / (k (d* - 1))` to the maximizer
/// `t*` of `d(t)`, then collapses the support. When the support point with
/// the smallest `d` is further below `k` than `d*` is above it, mass is
/// removed from that point instead. Once `d* <= k (1 + cert_tol)`, the
/// support is pulled onto the peaks of `d` and kept only if `det M` grows;
/// hitting `max_iter` yields `converged = false`.
///
/// Iterates at σ = 1; the reported criterion uses the caller's σ.
pub fn fedorov_v(model: &Model, init: &DesignMeasure, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate(model.k().min(cfg.n_points))?;
    let caller = model;
    let model = &caller.with_sigma(1.0)?;
    let k = model.k() as f64;
    let interest = InterestSet::all(model.k());
    let space = init.space();
    let mut xi = init.clone();
    let mut det_prev = d_criterion(&fisher_info(model, &xi));
    if !(det_prev > 0.0) {
        return Err(Error::SingularMatrix("initial design has det M = 0".into()));
    }
    let limit = k * (1.0 + cfg.cert_tol);
    let mut iterations = 0;
    let mut polish_rounds = 0;
    while iterations < cfg.max_iter {
        let vf = VarianceFunction::new(model, &xi, &interest)?;
        let (t_star, d_star) = maximize_scalar_with(|t| vf.eval(t), space, 1e-8, cfg.grid_n)?;
        if d_star <= limit {
            if polish_rounds >= MAX_POLISH_ROUNDS {
                break;
            }
            polish_rounds += 1;
            match polish(model, &xi, &vf, cfg)? {
                Some((better, det_better)) if det_better > det_prev * (1.0 + MONOTONE_SLACK) => {
                    xi = better;
                    det_prev = det_better;
                    continue;
                }
                _ => break,
            }
        }
        iterations += 1;
        // Away step: the support point with the smallest variance.
        let (away_idx, d_away) = xi
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| (i, vf.eval(p.t)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty design");
        let stepped = if k - d_away > d_star - k && xi.len() > model.k() {
            let p = xi.points()[away_idx].weight;
            let alpha = ((d_away - k) / (k * (d_away - 1.0))).max(-p / (1.0 - p));
            fedorov_step(&xi, xi.points()[away_idx].t, alpha)?
        } else {
            fedorov_step(&xi, t_star, (d_star - k) / (k * (d_star - 1.0)))?
        };
        let det_stepped = d_criterion(&fisher_info(model, &stepped));
        let collapsed = collapse_support(&stepped, cfg.merge_tol, cfg.drop_weight)?;
        let det_collapsed = d_criterion(&fisher_info(model, &collapsed));
        // Keep the uncollapsed step whenever collapsing would lose ground.
        let (next, det_next) = if det_collapsed >= det_prev * (1.0 - MONOTONE_SLACK) {
            (collapsed, det_collapsed)
        } else {
            let pruned = collapse_support(&stepped, 0.0, cfg.drop_weight)?;
            let det_pruned = d_criterion(&fisher_info(model, &pruned));
            if det_pruned >= det_prev * (1.0 - MONOTONE_SLACK) {
                (pruned, det_pruned)
            } else {
                (stepped, det_stepped)
            }
        };
        debug_assert!(
            det_next >= det_prev * (1.0 - MONOTONE_SLACK),
            "det M decreased from {det_prev} to {det_next}"
        );
        xi = next;
        det_prev = det_next;
    }
    certify(caller, xi, iterations, cfg)
}

/// Full two-step search: uniform search with `n_points = k`, Fedorov
/// refinement, and (for PK2) growing the uniform support up to the
/// Carathéodory bound `k (k + 1) / 2` until certification succeeds.
pub fn ld_design(model: &Model, space: Interval, cfg: &SearchConfig) -> Result<SearchResult> {
    let k = model.k();
    let max_points = match model.id() {
        ModelId::Pk1 => k,
        ModelId::Pk2 => k * (k + 1) / 2,
    };
    let mut last: Option<SearchResult> = None;
    for n in k..=max_points.max(k) {
        let step_cfg = SearchConfig {
            n_points: n,
            ..cfg.clone()
        };
        let uniform = uniform_ld_search(model, space, &step_cfg)?;
        let iters = uniform.iterations;
        let mut refined = fedorov_v(model, &uniform.design, &step_cfg)?;
        refined.iterations += iters;
        if refined.converged {
            return Ok(refined);
        }
        last = Some(refined);
    }
    Ok(last.expect("at least one pass"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(hi: f64) -> Interval {
        Interval::new(0.0, hi).unwrap()
    }

    #[test]
    fn collapse_merges_close_points() {
        let xi = DesignMeasure::new(
            vec![
                SupportPoint { t: 0.0, weight: 0.5 },
                SupportPoint {
                    t: 13.479,
                    weight: 0.25,
                },
                SupportPoint {
                    t: 13.481,
                    weight: 0.25,
                },
            ],
            space(160.0),
        )
        .unwrap();
        let c = collapse_support(&xi, 0.01, 1e-4).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c.points()[1].t - 13.48).abs() < 1e-12);
        assert!((c.points()[1].weight - 0.5).abs() < 1e-15);
    }

    #[test]
    fn collapse_is_identity_without_clusters() {
        let xi = DesignMeasure::uniform(&[0.0, 1.0, 2.0], space(10.0)).unwrap();
        assert_eq!(collapse_support(&xi, 0.01, 1e-4).unwrap(), xi);
    }

    #[test]
    fn collapse_drops_small_weights() {
        let xi = DesignMeasure::normalized(
            vec![
                SupportPoint { t: 0.0, weight: 0.5 },
                SupportPoint { t: 1.0, weight: 0.4999 },
                SupportPoint { t: 2.0, weight: 1e-4 },
            ],
            space(10.0),
        )
        .unwrap();
        let c = collapse_support(&xi, 0.01, 1e-3).unwrap();
        assert_eq!(c.len(), 2);
        let total: f64 = c.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(matches!(collapse_support(&xi, 0.01, 0.9), Err(Error::EmptyDesign)));
    }

    #[test]
    fn config_validation() {
        let mut cfg = SearchConfig::for_model(ModelId::Pk1);
        assert!(cfg.validate(4).is_ok());
        cfg.n_points = 3;
        assert!(cfg.validate(4).is_err());
    }

    #[test]
    fn fedorov_step_adds_mass() {
        let xi = DesignMeasure::uniform(&[0.0, 10.0], space(10.0)).unwrap();
        let s = fedorov_step(&xi, 5.0, 0.2).unwrap();
        assert_eq!(s.times(), vec![0.0, 5.0, 10.0]);
        assert!((s.weights()[1] - 0.2).abs() < 1e-15);
        let same = fedorov_step(&xi, 10.0, 0.2).unwrap();
        assert_eq!(same.len(), 2);
        assert!((same.weights()[1] - 0.6).abs() < 1e-15);
    }
}
