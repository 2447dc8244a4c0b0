//! Derivative-free maximization and finite differencing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of grid points used to seed scalar maximization.
pub const DEFAULT_SEED_GRID: usize = 2000;
/// Default golden-section tolerance (hours when the argument is time).
pub const DEFAULT_GOLDEN_TOL: f64 = 1e-8;
/// Default iteration cap for the simplex search.
pub const DEFAULT_SIMPLEX_MAX_ITER: usize = 10_000;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Closed interval `[lo, hi]` with `0 <= lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi {
            Ok(Interval { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// `n` equally spaced points including both ends (`n >= 2`).
    pub fn grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "grid needs at least two points");
        let h = self.width() / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { self.hi } else { self.lo + h * i as f64 })
            .collect()
    }
}

/// Symmetric difference quotient `(f(x+h) - f(x-h)) / 2h`.
pub fn central_diff<E>(
    mut f: impl FnMut(f64) -> std::result::Result<f64, E>,
    x: f64,
    step: f64,
) -> std::result::Result<f64, E> {
    debug_assert!(step > 0.0);
    let up = f(x + step)?;
    let down = f(x - step)?;
    Ok((up - down) / (2.0 * step))
}

/// Golden-section maximization on `[a, b]`, assuming unimodality there.
///
/// Returns the best point evaluated, including the bracket ends.
pub fn golden_section_max(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (a.min(b), a.max(b));
    let fa = f(a);
    let fb = f(b);
    let mut best = if fb > fa { (b, fb) } else { (a, fa) };
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    for (x, fx) in [(x1, f1), (x2, f2)] {
        if fx > best.1 || (fx == best.1 && x < best.0) {
            best = (x, fx);
        }
    }
    best
}

fn evaluate_grid(f: &mut impl FnMut(f64) -> f64, xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter()
        .map(|&x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { x })
            }
        })
        .collect()
}

fn better(candidate: (f64, f64), incumbent: (f64, f64)) -> bool {
    candidate.1 > incumbent.1 || (candidate.1 == incumbent.1 && candidate.0 < incumbent.0)
}

/// Global-within-grid maximization with the default seed grid.
pub fn maximize_scalar(f: impl FnMut(f64) -> f64, iv: Interval, tol: f64) -> Result<(f64, f64)> {
    maximize_scalar_with(f, iv, tol, DEFAULT_SEED_GRID)
}

/// Scans `grid_n` points, refines every grid-local maximum by golden section
/// within its neighbouring cells, and returns the best refinement.
///
/// The result is never below the best raw grid value; ties prefer smaller `x`.
pub fn maximize_scalar_with(
    mut f: impl FnMut(f64) -> f64,
    iv: Interval,
    tol: f64,
    grid_n: usize,
) -> Result<(f64, f64)> {
    if !(tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let n = grid_n.max(1000);
    let xs = iv.grid(n);
    let fs = evaluate_grid(&mut f, &xs)?;

    let mut best = (xs[0], fs[0]);
    for i in 0..n {
        if better((xs[i], fs[i]), best) {
            best = (xs[i], fs[i]);
        }
    }
    for i in 0..n {
        let rises = i == 0 || fs[i] > fs[i - 1];
        let holds = i == n - 1 || fs[i] >= fs[i + 1];
        if !(rises && holds) {
            continue;
        }
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(n - 1)];
        let refined = golden_section_max(&mut f, a, b, tol);
        if refined.1.is_finite() && better(refined, best) {
            best = refined;
        }
    }
    Ok(best)
}

/// Interior local maxima of `f` on `iv`.
///
/// Every interior grid point strictly above both neighbours is refined by
/// golden section inside `[x_{i-1}, x_{i+1}]`; refined maxima closer than
/// `tol` are merged keeping the larger. Output is sorted by `x`.
pub fn find_local_maxima(
    mut f: impl FnMut(f64) -> f64,
    iv: Interval,
    grid_n: usize,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    if grid_n < 100 {
        return Err(Error::Precondition(format!(
            "find_local_maxima needs grid_n >= 100, got {grid_n}"
        )));
    }
    let xs = iv.grid(grid_n);
    let fs = evaluate_grid(&mut f, &xs)?;
    let golden_tol = DEFAULT_GOLDEN_TOL.min(tol);
    let mut found: Vec<(f64, f64)> = Vec::new();
    for i in 1..grid_n - 1 {
        if fs[i] > fs[i - 1] && fs[i] > fs[i + 1] {
            let mut refined = golden_section_max(&mut f, xs[i - 1], xs[i + 1], golden_tol);
            if refined.1 < fs[i] {
                refined = (xs[i], fs[i]);
            }
            found.push(refined);
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(found.len());
    for m in found {
        match merged.last_mut() {
            Some(last) if m.0 - last.0 < tol => {
                if m.1 > last.1 {
                    *last = m;
                }
            }
            _ => merged.push(m),
        }
    }
    Ok(merged)
}

/// Outcome of a bounded simplex search.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    /// `false` when the iteration cap was hit; `x` is then the best so far.
    pub converged: bool,
}

/// Nelder-Mead maximization with every trial point projected onto the box.
///
/// Converged once the simplex diameter drops below `tol`.
pub fn maximize_multivariate(
    f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    bounds: &[Interval],
    tol: f64,
) -> Result<SimplexResult> {
    maximize_multivariate_with(f, x0, bounds, tol, DEFAULT_SIMPLEX_MAX_ITER)
}

pub fn maximize_multivariate_with(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    bounds: &[Interval],
    tol: f64,
    max_iter: usize,
) -> Result<SimplexResult> {
    let n = x0.len();
    if n == 0 || bounds.len() != n {
        return Err(Error::Precondition(
            "start point and bounds must be non-empty and of equal length".into(),
        ));
    }
    if x0.iter().zip(bounds).any(|(&x, b)| !b.contains(x)) {
        return Err(Error::Precondition("start point outside bounds".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }

    let project = |x: &mut [f64]| {
        for (xi, b) in x.iter_mut().zip(bounds) {
            *xi = b.clamp(*xi);
        }
    };
    // Minimize the negated objective; non-finite values rank worst.
    let mut cost = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        let step = 0.05 * bounds[i].width();
        v[i] = if v[i] + step <= bounds[i].hi() {
            v[i] + step
        } else {
            v[i] - step
        };
        project(&mut v);
        simplex.push(v);
    }
    let mut costs: Vec<f64> = simplex.iter().map(|v| cost(v)).collect();

    let diameter = |s: &[Vec<f64>]| {
        let mut d = 0.0f64;
        for v in &s[1..] {
            let dist = v.iter().zip(&s[0]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            d = d.max(dist);
        }
        d
    };

    let mut iterations = 0;
    let mut converged = false;
    loop {
        // Order vertices by cost, ties by lexicographic position for determinism.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| {
            costs[a]
                .total_cmp(&costs[b])
                .then_with(|| lex_cmp(&simplex[a], &simplex[b]))
        });
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        costs = order.iter().map(|&i| costs[i]).collect();

        if diameter(&simplex) < tol {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect();
            project(&mut p);
            p
        };

        let reflected = along(1.0);
        let fr = cost(&reflected);
        if fr < costs[0] {
            let expanded = along(2.0);
            let fe = cost(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                costs[n] = fe;
            } else {
                simplex[n] = reflected;
                costs[n] = fr;
            }
            continue;
        }
        if fr < costs[n - 1] {
            simplex[n] = reflected;
            costs[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < costs[n] {
            let c = along(0.5);
            let fc = cost(&c);
            (c, fc)
        } else {
            let c = along(-0.5);
            let fc = cost(&c);
            (c, fc)
        };
        if fc < costs[n].min(fr) {
            simplex[n] = contracted;
            costs[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            let mut v: Vec<f64> = best.iter().zip(&simplex[i]).map(|(b, x)| b + 0.5 * (x - b)).collect();
            project(&mut v);
            costs[i] = cost(&v);
            simplex[i] = v;
        }
    }

    Ok(SimplexResult {
        x: simplex[0].clone(),
        f: -costs[0],
        iterations,
        converged,
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}
