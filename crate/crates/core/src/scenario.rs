//! Plain-text scenario files: one `key = value` per line, `#` starts a comment.
//!
//! ```text
//! model = pk1
//! beta = 0.5, 10, 1, 0.1
//! dose = 5
//! sigma = 1
//! space_hi = 160
//! seed = 0
//! ```
//!
//! Optional search overrides use the [`SearchConfig`] field names
//! (`n_points`, `fix_left`, `multistarts`, `cert_tol`, ...).

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::design::fmt_sig;
use crate::error::{Error, Result};
use crate::models::{Model, ModelId};
use crate::numerics::Interval;
use crate::search::SearchConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model_id: ModelId,
    pub beta: Vec<f64>,
    pub dose: f64,
    pub sigma: f64,
    pub space: Interval,
    pub seed: u64,
    pub search: SearchConfig,
}

/// Default horizon for each model (hours).
pub fn default_space_hi(id: ModelId) -> f64 {
    match id {
        ModelId::Pk1 => 160.0,
        ModelId::Pk2 => 200.0,
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for '{key}': '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse(format!(
            "bad value for '{key}': '{value}' (expected true/false)"
        ))),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

impl Scenario {
    /// Nominal parameters, σ = 1, default horizon, seed 0.
    pub fn preset(id: ModelId) -> Self {
        let model = Model::nominal(id);
        Scenario {
            model_id: id,
            beta: model.beta(),
            dose: model.dose(),
            sigma: 1.0,
            space: Interval::new(0.0, default_space_hi(id)).expect("positive horizon"),
            seed: 0,
            search: SearchConfig::for_model(id),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected 'key = value'", lineno + 1)))?;
            pairs.push((key.trim().to_ascii_lowercase(), value.trim().to_string()));
        }
        let model_id: ModelId = match pairs.iter().find(|(k, _)| k == "model") {
            Some((_, v)) => v.parse()?,
            None => return Err(Error::Parse("scenario is missing 'model'".into())),
        };
        let mut sc = Scenario::preset(model_id);
        let mut lo = sc.space.lo();
        let mut hi = sc.space.hi();
        for (key, value) in &pairs {
            let (key, value) = (key.as_str(), value.as_str());
            match key {
                "model" => {}
                "beta" => sc.beta = parse_list(key, value)?,
                "dose" => sc.dose = parse_value(key, value)?,
                "sigma" => sc.sigma = parse_value(key, value)?,
                "space_lo" => lo = parse_value(key, value)?,
                "space_hi" => hi = parse_value(key, value)?,
                "seed" => sc.seed = parse_value(key, value)?,
                "n_points" => sc.search.n_points = parse_value(key, value)?,
                "fix_left" => sc.search.fix_left = parse_bool(key, value)?,
                "fix_right" => sc.search.fix_right = parse_bool(key, value)?,
                "multistarts" => sc.search.multistarts = parse_value(key, value)?,
                "tol_t" => sc.search.tol_t = parse_value(key, value)?,
                "cert_tol" => sc.search.cert_tol = parse_value(key, value)?,
                "max_iter" => sc.search.max_iter = parse_value(key, value)?,
                "merge_tol" => sc.search.merge_tol = parse_value(key, value)?,
                "drop_weight" => sc.search.drop_weight = parse_value(key, value)?,
                "grid_n" => sc.search.grid_n = parse_value(key, value)?,
                other => return Err(Error::Parse(format!("unknown scenario key '{other}'"))),
            }
        }
        sc.space = Interval::new(lo, hi)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Scenario::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model()?;
        self.search_config().validate(self.model_id.k())
    }

    pub fn model(&self) -> Result<Model> {
        Model::from_beta(self.model_id, &self.beta, self.dose, self.sigma)
    }

    /// Search settings with the scenario seed applied.
    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            seed: self.seed,
            ..self.search.clone()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Round-trippable text form; every key is written.
    pub fn to_text(&self) -> String {
        let cfg = &self.search;
        let beta: Vec<String> = self.beta.iter().map(|b| fmt_sig(*b)).collect();
        let mut s = String::new();
        let _ = writeln!(s, "model = {}", self.model_id);
        let _ = writeln!(s, "beta = {}", beta.join(", "));
        let _ = writeln!(s, "dose = {}", fmt_sig(self.dose));
        let _ = writeln!(s, "sigma = {}", fmt_sig(self.sigma));
        let _ = writeln!(s, "space_lo = {}", fmt_sig(self.space.lo()));
        let _ = writeln!(s, "space_hi = {}", fmt_sig(self.space.hi()));
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "n_points = {}", cfg.n_points);
        let _ = writeln!(s, "fix_left = {}", cfg.fix_left);
        let _ = writeln!(s, "fix_right = {}", cfg.fix_right);
        let _ = writeln!(s, "multistarts = {}", cfg.multistarts);
        let _ = writeln!(s, "tol_t = {}", fmt_sig(cfg.tol_t));
        let _ = writeln!(s, "cert_tol = {}", fmt_sig(cfg.cert_tol));
        let _ = writeln!(s, "max_iter = {}", cfg.max_iter);
        let _ = writeln!(s, "merge_tol = {}", fmt_sig(cfg.merge_tol));
        let _ = writeln!(s, "drop_weight = {}", fmt_sig(cfg.drop_weight));
        let _ = writeln!(s, "grid_n = {}", cfg.grid_n);
        s
    }

    /// [`Scenario::to_text`] with every line prefixed by `# `.
    pub fn comment_block(&self) -> String {
        self.to_text().lines().map(|l| format!("# {l}\n")).collect()
    }
}
