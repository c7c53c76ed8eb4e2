//! Experiment configuration files.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: String,
    pub params: Params,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
}

/// τ and τ′ are given by their imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_tau_prime")]
    pub tau_prime: f64,
    pub t_grid: Vec<f64>,
    /// `half`, `ratio:<ρ>` (n ≈ t/(2ρ)) or `fixed:<n>`; n is rounded to even.
    #[serde(default = "default_n_rule")]
    pub n_rule: String,
    /// Oracle tolerance. Unset: 1e−10 for one-dimensional integrals, and for
    /// double integrals 1e−6 up to t = 256 and 1e−5 beyond.
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Kernel angle for `kernel-slope`.
    #[serde(default)]
    pub c: Option<f64>,
    /// K-type indices for `spectrum-totals`.
    #[serde(default)]
    pub n_grid: Option<Vec<i64>>,
}

fn default_tau() -> f64 {
    0.3
}

fn default_tau_prime() -> f64 {
    0.7
}

fn default_n_rule() -> String {
    "half".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    pub metric: String,
    pub op: Op,
    pub value: f64,
}

impl Assertion {
    pub fn holds(&self, x: f64) -> bool {
        match self.op {
            Op::Lt => x < self.value,
            Op::Le => x <= self.value,
            Op::Gt => x > self.value,
            Op::Ge => x >= self.value,
            Op::Eq => x == self.value,
        }
    }
}

/// Parsed form of `Params::n_rule`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NRule {
    Half,
    Ratio(f64),
    Fixed(i64),
}

impl NRule {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        let s = s.trim();
        if s == "half" {
            return Ok(Self::Half);
        }
        if let Some(r) = s.strip_prefix("ratio:") {
            let r: f64 = r.parse().context("ratio must be a number")?;
            if !(r > 0.0) {
                bail!("ratio must be positive");
            }
            return Ok(Self::Ratio(r));
        }
        if let Some(n) = s.strip_prefix("fixed:") {
            let n: i64 = n.parse().context("fixed n must be an integer")?;
            if n < 0 || n % 2 != 0 {
                bail!("fixed n must be even and nonnegative");
            }
            return Ok(Self::Fixed(n));
        }
        bail!("unknown n_rule {s:?}; expected half, ratio:<r> or fixed:<n>")
    }

    /// Even n for spectral parameter t.
    pub fn n_for(self, t: f64) -> i64 {
        let even = |x: f64| 2 * (x / 2.0).round() as i64;
        match self {
            Self::Half => even(t / 2.0),
            Self::Ratio(r) => even(t / (2.0 * r)),
            Self::Fixed(n) => n,
        }
    }
}

impl Config {
    /// Parses and validates; every failure here maps to exit code 2.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Config = serde_json::from_str(text).context("invalid config JSON")?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> anyhow::Result<()> {
        let p = &self.params;
        NRule::parse(&p.n_rule)?;
        if p.t_grid.is_empty() || p.t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            bail!("t_grid must be a nonempty list of positive numbers");
        }
        if p.tol.is_some_and(|tol| !(tol > 0.0 && tol < 1.0)) {
            bail!("tol must lie in (0, 1)");
        }
        if !(p.tau.is_finite() && p.tau_prime.is_finite()) {
            bail!("tau and tau_prime must be finite");
        }
        Ok(())
    }

    pub fn n_rule(&self) -> NRule {
        NRule::parse(&self.params.n_rule).expect("validated")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let c = Config::parse(r#"{"experiment":"airy-peak","params":{"t_grid":[100,200]},"assertions":[{"metric":"slope","op":"<=","value":-1.55}]}"#).unwrap();
        assert_eq!(c.params.tau, 0.3);
        assert_eq!(c.n_rule(), NRule::Half);
        assert!(c.assertions[0].holds(-1.6) && !c.assertions[0].holds(-1.5));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(Config::parse("{").is_err());
        assert!(Config::parse(r#"{"experiment":"x","params":{"t_grid":[]}}"#).is_err());
        assert!(Config::parse(r#"{"experiment":"x","params":{"t_grid":[1],"n_rule":"odd"}}"#).is_err());
        assert!(Config::parse(r#"{"experiment":"x","params":{"t_grid":[1]},"extra":1}"#).is_err());
        assert!(Config::parse(r#"{"experiment":"x","params":{"t_grid":[1]},"assertions":[{"metric":"m","op":"~","value":1}]}"#).is_err());
    }

    #[test]
    fn n_rules() {
        assert_eq!(NRule::parse("half").unwrap().n_for(201.0), 100);
        assert_eq!(NRule::parse("ratio:0.5").unwrap().n_for(100.0), 100);
        assert_eq!(NRule::parse("fixed:12").unwrap().n_for(3.0), 12);
        assert!(NRule::parse("fixed:3").is_err());
    }

    proptest::proptest! {
        #[test]
        fn n_rules_give_even_n_near_target(t in 1.0..5000.0f64, r in 0.1..5.0f64) {
            for (rule, target) in [(NRule::Half, t / 2.0), (NRule::Ratio(r), t / (2.0 * r))] {
                let n = rule.n_for(t);
                proptest::prop_assert!(n % 2 == 0 && (n as f64 - target).abs() <= 1.0);
            }
        }
    }
}
