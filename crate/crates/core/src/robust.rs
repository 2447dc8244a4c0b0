//! Robust design families built around an LD design: equally spaced uniform
//! designs (ESULD), equal-step expansions of an LD support (ESEULD), relative
//! efficiency curves and the locally robust index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::{d_criterion, fisher_info, fisher_info_raw, DesignMeasure, MIN_GAP};
use crate::error::{Error, Result};
use crate::models::{Model, ModelId};
use crate::numerics::{maximize_scalar, Interval};

/// Default relative finite-difference step for [`lri`].
pub const DEFAULT_LRI_STEP: f64 = 1e-5;

/// Derivatives below this magnitude make the index infinite.
pub const LRI_ZERO_DERIVATIVE: f64 = 1e-300;

/// Support `{0, h, …, (s-1)h}` with weights `1/s`.
#[derive(Debug, Clone, PartialEq)]
pub struct EsuldSpec {
    pub s: usize,
    pub h: f64,
    pub design: DesignMeasure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsuldResult {
    pub spec: EsuldSpec,
    pub criterion: f64,
    pub efficiency: f64,
}

fn grid_times(s: usize, h: f64) -> impl Iterator<Item = f64> {
    (0..s).map(move |i| i as f64 * h)
}

/// Equally spaced design with `s` points and spacing `h` on `space`.
pub fn esuld_design(s: usize, h: f64, space: Interval) -> Result<EsuldSpec> {
    if s < 2 {
        return Err(Error::UnsupportedSize(format!(
            "equally spaced design needs s >= 2, got {s}"
        )));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidDesign(format!("spacing must be positive, got {h}")));
    }
    let times: Vec<f64> = grid_times(s, h).map(|t| space.lo() + t).collect();
    let design = DesignMeasure::uniform(&times, space)?;
    Ok(EsuldSpec { s, h, design })
}

/// Best spacing for an `s`-point equally spaced design, with efficiency
/// relative to `reference` (normally the certified LD design).
pub fn esuld(model: &Model, space: Interval, s: usize, reference: &DesignMeasure) -> Result<EsuldResult> {
    let k = model.k();
    if s < k {
        return Err(Error::UnsupportedSize(format!(
            "support size {s} is below the parameter count {k}"
        )));
    }
    let ref_det = d_criterion(&fisher_info(model, reference));
    if !(ref_det > 0.0) {
        return Err(Error::DegenerateReference);
    }
    let w = 1.0 / s as f64;
    let lo = space.lo();
    let h_max = space.width() / (s - 1) as f64;
    let det_at = |h: f64| d_criterion(&fisher_info_raw(model, grid_times(s, h).map(|t| (lo + t, w))));
    let (h, criterion) = maximize_scalar(det_at, Interval::new(0.0, h_max)?, 1e-9)?;
    if !(criterion > 0.0) || !(h > 0.0) {
        return Err(Error::SingularThroughout);
    }
    // Guard against the last point landing a rounding error beyond `hi`.
    let h = h.min(h_max * (1.0 - f64::EPSILON));
    let spec = esuld_design(s, h, space)?;
    Ok(EsuldResult {
        criterion,
        efficiency: criterion / ref_det,
        spec,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Plus,
    Minus,
}

/// One expansion step: add `t_index ± r`, with `index` zero-based into the
/// base support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shift {
    pub index: usize,
    pub direction: Direction,
}

impl Shift {
    pub fn plus(index: usize) -> Self {
        Shift {
            index,
            direction: Direction::Plus,
        }
    }

    pub fn minus(index: usize) -> Self {
        Shift {
            index,
            direction: Direction::Minus,
        }
    }
}

/// Displayed one-based, e.g. `+r@2`.
impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.direction {
            Direction::Plus => '+',
            Direction::Minus => '-',
        };
        write!(f, "{sign}r@{}", self.index + 1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionSchedule {
    pub steps: Vec<Shift>,
}

impl ExpansionSchedule {
    pub fn new(steps: Vec<Shift>) -> Self {
        ExpansionSchedule { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// First `n` steps.
    pub fn truncated(&self, n: usize) -> Self {
        ExpansionSchedule {
            steps: self.steps.iter().copied().take(n).collect(),
        }
    }
}

impl fmt::Display for ExpansionSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.steps.iter().map(Shift::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses comma-separated steps such as `+1,+2,-4` or `+r@1,-r@4`
/// (one-based indices).
impl FromStr for ExpansionSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for raw in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || Error::Parse(format!("bad schedule step '{raw}'"));
            let (direction, rest) = match raw.as_bytes()[0] {
                b'+' => (Direction::Plus, &raw[1..]),
                b'-' => (Direction::Minus, &raw[1..]),
                _ => return Err(bad()),
            };
            let rest = rest.strip_prefix("r@").unwrap_or(rest);
            let one_based: usize = rest.parse().map_err(|_| bad())?;
            if one_based == 0 {
                return Err(bad());
            }
            steps.push(Shift {
                index: one_based - 1,
                direction,
            });
        }
        Ok(ExpansionSchedule { steps })
    }
}

/// Full expansion order for each model's LD support.
pub fn full_schedule(model_id: ModelId) -> ExpansionSchedule {
    use Shift as S;
    let steps = match model_id {
        ModelId::Pk1 => vec![
            S::plus(0),
            S::plus(1),
            S::plus(2),
            S::minus(3),
            S::minus(1),
            S::minus(2),
        ],
        ModelId::Pk2 => vec![S::plus(1), S::plus(2), S::plus(3), S::minus(4), S::minus(2)],
    };
    ExpansionSchedule { steps }
}

/// Schedule that grows a `base_size`-point LD support to `target_size` points.
pub fn default_schedule(model_id: ModelId, base_size: usize, target_size: usize) -> Result<ExpansionSchedule> {
    let expected = match model_id {
        ModelId::Pk1 => 4,
        ModelId::Pk2 => 5,
    };
    if base_size != expected {
        return Err(Error::UnsupportedSize(format!(
            "{model_id} schedules expand a {expected}-point base, got {base_size}"
        )));
    }
    let full = full_schedule(model_id);
    if target_size < base_size || target_size - base_size > full.len() {
        return Err(Error::UnsupportedSize(format!(
            "{model_id} target size must lie in {base_size}..={}, got {target_size}",
            base_size + full.len()
        )));
    }
    Ok(full.truncated(target_size - base_size))
}

/// Expands `base` by `sched` with step length `r`; uniform weights on the result.
pub fn eseuld(base: &DesignMeasure, r: f64, sched: &ExpansionSchedule) -> Result<DesignMeasure> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidDesign(format!(
            "step length must be finite and >= 0, got {r}"
        )));
    }
    let space = base.space();
    let base_times = base.times();
    let mut times = base_times.clone();
    for step in &sched.steps {
        let t0 = *base_times.get(step.index).ok_or_else(|| {
            Error::InvalidDesign(format!("step {step} refers past a {}-point base", base_times.len()))
        })?;
        let t = match step.direction {
            Direction::Plus => t0 + r,
            Direction::Minus => t0 - r,
        };
        if !space.contains(t) {
            return Err(Error::OutOfRange {
                t,
                lo: space.lo(),
                hi: space.hi(),
            });
        }
        times.push(t);
    }
    times.sort_by(f64::total_cmp);
    if let Some(w) = times.windows(2).find(|w| w[1] - w[0] <= MIN_GAP) {
        return Err(Error::CollidingPoints { t: w[1] });
    }
    DesignMeasure::uniform(&times, space)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LriValue {
    Finite(f64),
    Infinite,
}

impl LriValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            LriValue::Finite(v) => Some(v),
            LriValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, LriValue::Infinite)
    }
}

/// Locally robust index for every parameter, in parameter order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LriReport {
    pub names: Vec<String>,
    pub values: Vec<LriValue>,
}

/// `d det M / d β_i` by central differences with one Richardson refinement.
pub fn det_derivative(model: &Model, xi: &DesignMeasure, i: usize, fd_step: f64) -> Result<f64> {
    let k = model.k();
    if i >= k {
        return Err(Error::Precondition(format!(
            "parameter index {i} out of range for k = {k}"
        )));
    }
    if !(fd_step > 0.0) {
        return Err(Error::Precondition(format!(
            "finite-difference step must be positive, got {fd_step}"
        )));
    }
    let beta_i = model.beta()[i];
    let h = fd_step * beta_i.abs().max(1.0);
    let det_at = |v: f64| -> Result<f64> { Ok(d_criterion(&fisher_info(&model.with_param(i, v)?, xi))) };
    let central = |h: f64| -> Result<f64> { Ok((det_at(beta_i + h)? - det_at(beta_i - h)?) / (2.0 * h)) };
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `|1 / (d det M / d β_i)|` at the model's parameters and σ.
pub fn lri(model: &Model, xi: &DesignMeasure, i: usize, fd_step: f64) -> Result<LriValue> {
    let deriv = det_derivative(model, xi, i, fd_step)?;
    if !deriv.is_finite() {
        return Err(Error::NonFinite { x: model.beta()[i] });
    }
    if deriv.abs() < LRI_ZERO_DERIVATIVE {
        return Ok(LriValue::Infinite);
    }
    Ok(LriValue::Finite((1.0 / deriv).abs()))
}

pub fn lri_report(model: &Model, xi: &DesignMeasure, fd_step: f64) -> Result<LriReport> {
    let values = (0..model.k())
        .map(|i| lri(model, xi, i, fd_step))
        .collect::<Result<Vec<_>>>()?;
    Ok(LriReport {
        names: model.id().param_names().iter().map(|s| s.to_string()).collect(),
        values,
    })
}

/// One point of an efficiency-versus-step-length curve; `None` marks a gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: f64,
    pub efficiency: Option<f64>,
}

/// Efficiency of `eseuld(base, r, sched)` relative to `reference` for each `r`.
///
/// Collisions, out-of-range points and singular information become gaps.
pub fn efficiency_vs_r(
    model: &Model,
    base: &DesignMeasure,
    sched: &ExpansionSchedule,
    reference: &DesignMeasure,
    r_grid: &[f64],
) -> Result<Vec<CurvePoint>> {
    let ref_det = d_criterion(&fisher_info(model, reference));
    if !(ref_det > 0.0) {
        return Err(Error::DegenerateReference);
    }
    Ok(r_grid
        .iter()
        .map(|&r| {
            let efficiency = eseuld(base, r, sched)
                .ok()
                .map(|xi| d_criterion(&fisher_info(model, &xi)) / ref_det)
                .filter(|e| *e > 0.0);
            CurvePoint { r, efficiency }
        })
        .collect())
}
