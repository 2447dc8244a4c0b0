//! Composed Emax-pharmacokinetic mean functions and their parameter gradients.
//!
//! * PK1 (IV bolus, first-order elimination):
//!   `η(t) = β0 + β1·D / (β2·e^{β3 t} + D)`, parameters `(β0, β1, β2, β3)`.
//! * PK2 (first-order absorption and elimination):
//!   `η(t) = β0 + β1·A(t) / (B + A(t))` with `A(t) = D(e^{-β3 t} - e^{-β2 t})`
//!   and `B = β4(1 - β3/β2)`, parameters `(β0, β1, β2, β3, β4)`.
//!
//! `β0` always occupies slot 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Vector;

/// Minimum relative separation between absorption and elimination rates.
pub const RATE_SEPARATION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    Pk1,
    Pk2,
}

impl ModelId {
    pub fn k(self) -> usize {
        match self {
            ModelId::Pk1 => 4,
            ModelId::Pk2 => 5,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelId::Pk1 => &["beta0", "beta1", "beta2", "beta3"],
            ModelId::Pk2 => &["beta0", "beta1", "beta2", "beta3", "beta4"],
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelId::Pk1 => "pk1",
            ModelId::Pk2 => "pk2",
        })
    }
}

impl FromStr for ModelId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pk1" => Ok(ModelId::Pk1),
            "pk2" => Ok(ModelId::Pk2),
            other => Err(Error::Parse(format!("unknown model '{other}' (expected pk1 or pk2)"))),
        }
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be finite, got {v}")))
    }
}

fn require_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("time must be finite and >= 0, got {t}")))
    }
}

/// Emax-PK1 parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsPk1 {
    /// Minimum residual effect.
    pub beta0: f64,
    /// Maximum drug effect.
    pub beta1: f64,
    /// ED50 (mg/kg).
    pub beta2: f64,
    /// Total elimination rate (1/h).
    pub beta3: f64,
    pub sigma: f64,
    /// Administered dose (mg/kg).
    pub dose: f64,
}

impl ParamsPk1 {
    pub fn new(beta: [f64; 4], dose: f64, sigma: f64) -> Result<Self> {
        let p = ParamsPk1 {
            beta0: beta[0],
            beta1: beta[1],
            beta2: beta[2],
            beta3: beta[3],
            sigma,
            dose,
        };
        p.validate()?;
        Ok(p)
    }

    /// β = (0.5, 10, 1, 0.1), D = 5 mg/kg, σ = 1.
    pub fn nominal() -> Self {
        ParamsPk1 {
            beta0: 0.5,
            beta1: 10.0,
            beta2: 1.0,
            beta3: 0.1,
            sigma: 1.0,
            dose: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_finite("beta0", self.beta0)?;
        require_positive("beta1", self.beta1)?;
        require_positive("beta2", self.beta2)?;
        require_positive("beta3", self.beta3)?;
        require_positive("sigma", self.sigma)?;
        require_positive("dose", self.dose)
    }

    pub fn beta(&self) -> [f64; 4] {
        [self.beta0, self.beta1, self.beta2, self.beta3]
    }
}

/// Emax-PK2 parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsPk2 {
    /// Baseline effect.
    pub beta0: f64,
    /// Emax.
    pub beta1: f64,
    /// Absorption rate (1/h).
    pub beta2: f64,
    /// Total elimination rate (1/h).
    pub beta3: f64,
    /// ED50 (mg/kg).
    pub beta4: f64,
    pub sigma: f64,
    pub dose: f64,
}

impl ParamsPk2 {
    pub fn new(beta: [f64; 5], dose: f64, sigma: f64) -> Result<Self> {
        let p = ParamsPk2 {
            beta0: beta[0],
            beta1: beta[1],
            beta2: beta[2],
            beta3: beta[3],
            beta4: beta[4],
            sigma,
            dose,
        };
        p.validate()?;
        Ok(p)
    }

    /// β = (0.5, 10, 0.5, 0.1, 1), D = 5 mg/kg, σ = 1.
    pub fn nominal() -> Self {
        ParamsPk2 {
            beta0: 0.5,
            beta1: 10.0,
            beta2: 0.5,
            beta3: 0.1,
            beta4: 1.0,
            sigma: 1.0,
            dose: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_finite("beta0", self.beta0)?;
        require_positive("beta1", self.beta1)?;
        require_positive("beta2", self.beta2)?;
        require_positive("beta3", self.beta3)?;
        require_positive("beta4", self.beta4)?;
        require_positive("sigma", self.sigma)?;
        require_positive("dose", self.dose)?;
        if !(self.beta2 > self.beta3) {
            return Err(Error::InvalidParams(format!(
                "pk2 requires beta2 (absorption) > beta3 (elimination), got beta2 = {}, beta3 = {}",
                self.beta2, self.beta3
            )));
        }
        if (self.beta2 - self.beta3).abs() <= RATE_SEPARATION * self.beta2 {
            return Err(Error::InvalidParams(format!(
                "pk2 requires |beta2 - beta3| > {RATE_SEPARATION:e}·beta2, got beta2 = {}, beta3 = {}",
                self.beta2, self.beta3
            )));
        }
        Ok(())
    }

    pub fn beta(&self) -> [f64; 5] {
        [self.beta0, self.beta1, self.beta2, self.beta3, self.beta4]
    }
}

fn pk1_eta_unchecked(t: f64, p: &ParamsPk1) -> f64 {
    // Written in e^{-β3 t} so that large t cannot overflow.
    let x = (-p.beta3 * t).exp();
    p.beta0 + p.beta1 * p.dose * x / (p.beta2 + p.dose * x)
}

fn pk1_grad_unchecked(t: f64, p: &ParamsPk1) -> Vector {
    let d = p.dose;
    let x = (-p.beta3 * t).exp();
    let q = p.beta2 + d * x;
    let q2 = q * q;
    Vector::from_slice(&[
        1.0,
        d * x / q,
        -p.beta1 * d * x / q2,
        -p.beta1 * d * p.beta2 * t * x / q2,
    ])
}

fn pk2_eta_unchecked(t: f64, p: &ParamsPk2) -> f64 {
    let a = p.dose * ((-p.beta3 * t).exp() - (-p.beta2 * t).exp());
    let b = p.beta4 * (1.0 - p.beta3 / p.beta2);
    p.beta0 + p.beta1 * a / (b + a)
}

fn pk2_grad_unchecked(t: f64, p: &ParamsPk2) -> Vector {
    let d = p.dose;
    let e2 = (-p.beta2 * t).exp();
    let e3 = (-p.beta3 * t).exp();
    let a = d * (e3 - e2);
    let ratio = 1.0 - p.beta3 / p.beta2;
    let b = p.beta4 * ratio;
    let s = b + a;
    let s2 = s * s;
    let da_d2 = d * t * e2;
    let db_d2 = p.beta4 * p.beta3 / (p.beta2 * p.beta2);
    let da_d3 = -d * t * e3;
    let db_d3 = -p.beta4 / p.beta2;
    Vector::from_slice(&[
        1.0,
        a / s,
        p.beta1 * (b * da_d2 - a * db_d2) / s2,
        p.beta1 * (b * da_d3 - a * db_d3) / s2,
        -p.beta1 * a * ratio / s2,
    ])
}

pub fn eta_pk1(t: f64, p: &ParamsPk1) -> Result<f64> {
    p.validate()?;
    require_time(t)?;
    Ok(pk1_eta_unchecked(t, p))
}

/// `(∂η/∂β0, ∂η/∂β1, ∂η/∂β2, ∂η/∂β3)` for PK1.
pub fn grad_pk1(t: f64, p: &ParamsPk1) -> Result<Vector> {
    p.validate()?;
    require_time(t)?;
    Ok(pk1_grad_unchecked(t, p))
}

pub fn eta_pk2(t: f64, p: &ParamsPk2) -> Result<f64> {
    p.validate()?;
    require_time(t)?;
    Ok(pk2_eta_unchecked(t, p))
}

/// `(∂η/∂β0, …, ∂η/∂β4)` for PK2.
pub fn grad_pk2(t: f64, p: &ParamsPk2) -> Result<Vector> {
    p.validate()?;
    require_time(t)?;
    Ok(pk2_grad_unchecked(t, p))
}

/// A validated model instance: mean function, gradient and parameter count.
///
/// Construction checks the parameter invariants once, so evaluation in hot
/// loops is infallible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    Pk1(ParamsPk1),
    Pk2(ParamsPk2),
}

impl Model {
    pub fn pk1(p: ParamsPk1) -> Result<Self> {
        p.validate()?;
        Ok(Model::Pk1(p))
    }

    pub fn pk2(p: ParamsPk2) -> Result<Self> {
        p.validate()?;
        Ok(Model::Pk2(p))
    }

    pub fn nominal(id: ModelId) -> Self {
        match id {
            ModelId::Pk1 => Model::Pk1(ParamsPk1::nominal()),
            ModelId::Pk2 => Model::Pk2(ParamsPk2::nominal()),
        }
    }

    /// Builds from a β vector in canonical order.
    pub fn from_beta(id: ModelId, beta: &[f64], dose: f64, sigma: f64) -> Result<Self> {
        if beta.len() != id.k() {
            return Err(Error::InvalidParams(format!(
                "{id} expects {} parameters, got {}",
                id.k(),
                beta.len()
            )));
        }
        match id {
            ModelId::Pk1 => Model::pk1(ParamsPk1::new([beta[0], beta[1], beta[2], beta[3]], dose, sigma)?),
            ModelId::Pk2 => Model::pk2(ParamsPk2::new(
                [beta[0], beta[1], beta[2], beta[3], beta[4]],
                dose,
                sigma,
            )?),
        }
    }

    pub fn id(&self) -> ModelId {
        match self {
            Model::Pk1(_) => ModelId::Pk1,
            Model::Pk2(_) => ModelId::Pk2,
        }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.id().k()
    }

    pub fn sigma(&self) -> f64 {
        match self {
            Model::Pk1(p) => p.sigma,
            Model::Pk2(p) => p.sigma,
        }
    }

    pub fn dose(&self) -> f64 {
        match self {
            Model::Pk1(p) => p.dose,
            Model::Pk2(p) => p.dose,
        }
    }

    pub fn beta(&self) -> Vec<f64> {
        match self {
            Model::Pk1(p) => p.beta().to_vec(),
            Model::Pk2(p) => p.beta().to_vec(),
        }
    }

    pub fn with_beta(&self, beta: &[f64]) -> Result<Self> {
        Model::from_beta(self.id(), beta, self.dose(), self.sigma())
    }

    /// Same model with parameter `i` replaced by `value`.
    pub fn with_param(&self, i: usize, value: f64) -> Result<Self> {
        let mut beta = self.beta();
        if i >= beta.len() {
            return Err(Error::InvalidParams(format!("parameter index {i} out of range")));
        }
        beta[i] = value;
        self.with_beta(&beta)
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Model::from_beta(self.id(), &self.beta(), self.dose(), sigma)
    }

    #[inline]
    pub fn eta(&self, t: f64) -> f64 {
        match self {
            Model::Pk1(p) => pk1_eta_unchecked(t, p),
            Model::Pk2(p) => pk2_eta_unchecked(t, p),
        }
    }

    #[inline]
    pub fn grad(&self, t: f64) -> Vector {
        match self {
            Model::Pk1(p) => pk1_grad_unchecked(t, p),
            Model::Pk2(p) => pk2_grad_unchecked(t, p),
        }
    }
}
