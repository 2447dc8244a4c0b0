//! Design measures, Fisher information and the D / D_s optimality machinery.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::{det_psd, find_local_maxima, inverse, Interval, Matrix, Vector};

/// Minimum admissible distance between two support points (hours).
pub const MIN_GAP: f64 = 1e-9;
/// Tolerance on `Σ p = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Default relative certification slack: `sup d <= s (1 + cert_tol)`.
pub const DEFAULT_CERT_TOL: f64 = 1e-3;
/// Default linear grid size for the equivalence check.
pub const DEFAULT_CHECK_GRID: usize = 4000;
/// Refined local maxima closer than this (hours) are merged.
pub const MAXIMA_MERGE_TOL: f64 = 1e-6;

/// Header of the two-column design interchange CSV.
pub const DESIGN_CSV_HEADER: &str = "t_hours,weight";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub t: f64,
    pub weight: f64,
}

/// Probability measure on sampling times within a design space `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignMeasure {
    points: Vec<SupportPoint>,
    space: Interval,
}

impl DesignMeasure {
    /// Validates ordering, spacing, range and weights.
    pub fn new(points: Vec<SupportPoint>, space: Interval) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDesign("design has no support points".into()));
        }
        let mut sum = 0.0;
        for (i, p) in points.iter().enumerate() {
            if !p.t.is_finite() || !space.contains(p.t) {
                return Err(Error::InvalidDesign(format!(
                    "support point t = {} outside [{}, {}]",
                    p.t,
                    space.lo(),
                    space.hi()
                )));
            }
            if !(p.weight > 0.0) || !p.weight.is_finite() {
                return Err(Error::InvalidDesign(format!(
                    "weight {} at t = {} is not positive",
                    p.weight, p.t
                )));
            }
            if i > 0 && !(p.t - points[i - 1].t >= MIN_GAP) {
                return Err(Error::InvalidDesign(format!(
                    "support points must be strictly increasing with gap >= {MIN_GAP:e}; got {} then {}",
                    points[i - 1].t,
                    p.t
                )));
            }
            sum += p.weight;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDesign(format!("weights sum to {sum}, not 1")));
        }
        Ok(DesignMeasure { points, space })
    }

    /// Sorts by time and divides weights by their total before validating.
    pub fn normalized(mut points: Vec<SupportPoint>, space: Interval) -> Result<Self> {
        points.sort_by(|a, b| a.t.total_cmp(&b.t));
        let total: f64 = points.iter().map(|p| p.weight).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDesign("weights do not sum to a positive value".into()));
        }
        for p in &mut points {
            p.weight /= total;
        }
        DesignMeasure::new(points, space)
    }

    /// Equal weights on the given times (sorted internally).
    pub fn uniform(times: &[f64], space: Interval) -> Result<Self> {
        let w = 1.0 / times.len().max(1) as f64;
        let mut ts = times.to_vec();
        ts.sort_by(f64::total_cmp);
        DesignMeasure::new(ts.into_iter().map(|t| SupportPoint { t, weight: w }).collect(), space)
    }

    pub fn points(&self) -> &[SupportPoint] {
        &self.points
    }

    pub fn space(&self) -> Interval {
        self.space
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.weight).collect()
    }

    /// Same support, different design space (re-validated).
    pub fn with_space(&self, space: Interval) -> Result<Self> {
        DesignMeasure::new(self.points.clone(), space)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(DESIGN_CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(out, "{},{}", fmt_sig(p.t), fmt_sig(p.weight));
        }
        out
    }

    /// Parses the interchange CSV. Lines starting with `#` are ignored, weights
    /// are renormalized to absorb rounding from the 9-digit text form.
    pub fn from_csv(text: &str, space: Interval) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some(h) if h.replace(' ', "") == DESIGN_CSV_HEADER => {}
            Some(h) => {
                return Err(Error::Parse(format!(
                    "expected header '{DESIGN_CSV_HEADER}', found '{h}'"
                )))
            }
            None => return Err(Error::Parse("empty design file".into())),
        }
        let mut points = Vec::new();
        for (n, line) in lines.enumerate() {
            let mut fields = line.split(',').map(str::trim);
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Parse(format!("row {}: missing field", n + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", n + 1)))
            };
            let t = parse(fields.next())?;
            let weight = parse(fields.next())?;
            if fields.next().is_some() {
                return Err(Error::Parse(format!("row {}: expected two columns", n + 1)));
            }
            points.push(SupportPoint { t, weight });
        }
        let total: f64 = points.iter().map(|p| p.weight).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidDesign(format!("weights sum to {total}, not 1")));
        }
        for w in 1..points.len() {
            if !(points[w].t > points[w - 1].t) {
                return Err(Error::InvalidDesign("design times must be strictly increasing".into()));
            }
        }
        DesignMeasure::normalized(points, space)
    }

    pub fn read_csv(path: &Path, space: Interval) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        DesignMeasure::from_csv(&text, space)
    }
}

/// Formats with 9 significant digits using the shortest exact representation
/// of the rounded value.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    format!("{rounded}")
}

/// Normalized Fisher information `σ⁻² Σ p g gᵀ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FisherInfo {
    pub m: Matrix,
    pub k: usize,
    pub sigma_used: f64,
}

/// Indices of the parameters of interest; the complement is the nuisance block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterestSet {
    indices: Vec<usize>,
    k: usize,
}

impl InterestSet {
    /// Order of `indices` is irrelevant; duplicates are rejected.
    pub fn new(indices: &[usize], k: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Precondition("interest set must be non-empty".into()));
        }
        let mut v = indices.to_vec();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("interest set has duplicate indices".into()));
        }
        if v[v.len() - 1] >= k {
            return Err(Error::Precondition(format!(
                "interest index {} out of range for k = {k}",
                v[v.len() - 1]
            )));
        }
        Ok(InterestSet { indices: v, k })
    }

    pub fn all(k: usize) -> Self {
        InterestSet {
            indices: (0..k).collect(),
            k,
        }
    }

    /// Every parameter except the baseline `β0`.
    pub fn without_baseline(k: usize) -> Self {
        InterestSet {
            indices: (1..k).collect(),
            k,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of parameters of interest (`s`).
    pub fn s(&self) -> usize {
        self.indices.len()
    }

    pub fn nuisance(&self) -> Vec<usize> {
        (0..self.k).filter(|i| !self.indices.contains(i)).collect()
    }
}

/// `σ⁻² g(t) g(t)ᵀ`.
pub fn point_info(model: &Model, t: f64) -> Result<FisherInfo> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Precondition(format!("time must be finite and >= 0, got {t}")));
    }
    let sigma = model.sigma();
    let m = Matrix::outer(&model.grad(t)).scale(1.0 / (sigma * sigma));
    Ok(FisherInfo {
        m,
        k: model.k(),
        sigma_used: sigma,
    })
}

/// `M(ξ, β) = σ⁻² Σ p_i g(t_i) g(t_i)ᵀ`.
pub fn fisher_info(model: &Model, xi: &DesignMeasure) -> FisherInfo {
    fisher_info_raw(model, xi.points().iter().map(|p| (p.t, p.weight)))
}

pub(crate) fn fisher_info_raw(model: &Model, points: impl IntoIterator<Item = (f64, f64)>) -> FisherInfo {
    let k = model.k();
    let sigma = model.sigma();
    let mut acc = Matrix::zeros(k);
    for (t, w) in points {
        acc.add_scaled_outer(w, &model.grad(t));
    }
    FisherInfo {
        m: acc.scale(1.0 / (sigma * sigma)),
        k,
        sigma_used: sigma,
    }
}

/// `det M`, never negative; zero flags a non-informative design.
pub fn d_criterion(mi: &FisherInfo) -> f64 {
    det_psd(&mi.m)
}

/// `det M / det M22` where `M22` is the nuisance block.
pub fn ds_criterion(mi: &FisherInfo, interest: &InterestSet) -> Result<f64> {
    let nuisance = interest.nuisance();
    let full = det_psd(&mi.m);
    if nuisance.is_empty() {
        return Ok(full);
    }
    let block = det_psd(&mi.m.submatrix(&nuisance));
    if !(block > 0.0) {
        return Err(Error::SingularNuisanceBlock);
    }
    Ok(full / block)
}

/// Pre-factored `d(t, ξ, β)` for repeated evaluation.
#[derive(Clone, Debug)]
pub struct VarianceFunction {
    model: Model,
    m_inv: Matrix,
    nuisance: Vec<usize>,
    m22_inv: Option<Matrix>,
    inv_sigma_sq: f64,
}

impl VarianceFunction {
    pub fn new(model: &Model, xi: &DesignMeasure, interest: &InterestSet) -> Result<Self> {
        if interest.k() != model.k() {
            return Err(Error::Precondition(format!(
                "interest set built for k = {}, model has k = {}",
                interest.k(),
                model.k()
            )));
        }
        let mi = fisher_info(model, xi);
        let m_inv = inverse(&mi.m)?;
        let nuisance = interest.nuisance();
        let m22_inv = if nuisance.is_empty() {
            None
        } else {
            Some(inverse(&mi.m.submatrix(&nuisance)).map_err(|_| Error::SingularNuisanceBlock)?)
        };
        let sigma = model.sigma();
        Ok(VarianceFunction {
            model: *model,
            m_inv,
            nuisance,
            m22_inv,
            inv_sigma_sq: 1.0 / (sigma * sigma),
        })
    }

    /// `tr{I(t) M⁻¹} - tr{I22(t) M22⁻¹}` (second term only when `s < k`).
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let g = self.model.grad(t);
        let mut d = self.m_inv.quad_form(&g);
        if let Some(m22_inv) = &self.m22_inv {
            let mut g22 = Vector::zeros(self.nuisance.len());
            for (slot, &i) in self.nuisance.iter().enumerate() {
                g22[slot] = g[i];
            }
            d -= m22_inv.quad_form(&g22);
        }
        d * self.inv_sigma_sq
    }
}

/// Single evaluation of the variance function.
pub fn variance_fn(model: &Model, t: f64, xi: &DesignMeasure, interest: &InterestSet) -> Result<f64> {
    Ok(VarianceFunction::new(model, xi, interest)?.eval(t))
}

/// Outcome of the equivalence-theorem check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub sup_d: f64,
    pub argmax_t: f64,
    /// Refined interior local maxima `(t, d)`, sorted by `t`.
    pub local_maxima: Vec<(f64, f64)>,
    /// Number of parameters of interest `s`.
    pub threshold: f64,
    pub cert_tol: f64,
    pub passed: bool,
    pub grid_n: usize,
}

impl EquivalenceReport {
    pub fn interior_maxima(&self) -> usize {
        self.local_maxima.len()
    }
}

/// Grid scan plus local refinement of `d` over the design space.
pub fn equivalence_check(
    model: &Model,
    xi: &DesignMeasure,
    interest: &InterestSet,
    grid_n: usize,
    cert_tol: f64,
) -> Result<EquivalenceReport> {
    let vf = VarianceFunction::new(model, xi, interest)?;
    let space = xi.space();
    let grid_n = grid_n.max(100);
    let mut best = (space.lo(), f64::NEG_INFINITY);
    for t in space.grid(grid_n) {
        let d = vf.eval(t);
        if !d.is_finite() {
            return Err(Error::NonFinite { x: t });
        }
        if d > best.1 {
            best = (t, d);
        }
    }
    let local_maxima = find_local_maxima(|t| vf.eval(t), space, grid_n, MAXIMA_MERGE_TOL)?;
    for &(t, d) in &local_maxima {
        if d > best.1 {
            best = (t, d);
        }
    }
    let threshold = interest.s() as f64;
    Ok(EquivalenceReport {
        sup_d: best.1,
        argmax_t: best.0,
        local_maxima,
        threshold,
        cert_tol,
        passed: best.1 <= threshold * (1.0 + cert_tol),
        grid_n,
    })
}

/// `det M(ξ) / det M(ξ_ref)` (raw determinant ratio).
pub fn efficiency(model: &Model, xi: &DesignMeasure, xi_ref: &DesignMeasure) -> Result<f64> {
    let reference = d_criterion(&fisher_info(model, xi_ref));
    if !(reference > 0.0) {
        return Err(Error::DegenerateReference);
    }
    Ok(d_criterion(&fisher_info(model, xi)) / reference)
}
