//! Scenario configuration: one JSON document, unknown keys rejected.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use guarantee_core::binom::BoundKind;
use guarantee_core::config::GridConfig;
use guarantee_core::contracts::InsuranceContract;
use guarantee_core::economics::PolicyEconomics;
use guarantee_core::implementer::ImplementerPolicy;
use guarantee_core::law::DiscreteLaw;
use guarantee_core::researcher::{ResearcherPayoffModel, RiskStrategy, UtilitySpec};
use guarantee_core::researchers::{Conditioning, ResearcherStrategy};

pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.json");

/// A configuration problem, reported as `source:line:column: message`.
#[derive(Debug)]
pub struct ConfigError {
    pub source: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.source, self.line, self.column, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn default_draws() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    #[serde(default = "default_draws")]
    pub mc_draws: u64,
    #[serde(default)]
    pub grids: GridConfig,
    pub economics: PolicyEconomics,
    pub strategy: ResearcherStrategy,
    pub belief: BeliefBlock,
    #[serde(default)]
    pub contract: Option<InsuranceContract>,
    pub utility: UtilitySpec,
    pub researcher: ResearcherBlock,
    pub pool: PoolBlock,
    pub figure: FigureBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeliefBlock {
    pub implementer: ImplementerPolicy,
    /// The published lower bound the implementer is deciding on.
    pub published_l: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResearcherBlock {
    pub risk: RiskStrategy,
    pub payoff: ResearcherPayoffModel,
    pub scale: usize,
    pub p_step: f64,
    /// Success rate at which the exact and simulated utilities are compared.
    pub mc_check_p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolBlock {
    pub base: f64,
    pub loss: DiscreteLaw,
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureBlock {
    pub p_c: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub n: u64,
    pub pi: f64,
    pub truthful: BoundKind,
    /// Fixed variant; calibrated against `target_alpha` when absent.
    #[serde(default)]
    pub variant: Option<Conditioning>,
    pub target_alpha: f64,
    pub calibration_alpha: f64,
    pub calibration_p_c: f64,
}

/// 1-based line and column of the first `"key"` in `text`.
fn locate(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    for (i, line) in text.lines().enumerate() {
        if let Some(col) = line.find(&needle) {
            return (i + 1, col + 1);
        }
    }
    (1, 1)
}

/// Tagged enums are buffered before their fields are checked, so serde
/// reports an unknown key at the closing brace. Point at the key instead.
fn unknown_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("unknown field `")?;
    rest.find('`').map(|end| &rest[..end])
}

/// Last line at or before `limit` with `"key"` on it.
fn locate_before(text: &str, key: &str, limit: usize) -> Option<(usize, usize)> {
    let needle = format!("\"{key}\"");
    text.lines()
        .take(limit)
        .enumerate()
        .filter_map(|(i, line)| line.find(&needle).map(|c| (i + 1, c + 1)))
        .last()
}

fn block_error(source: &str, text: &str, block: &str, e: impl fmt::Display) -> ConfigError {
    let (line, column) = locate(text, block);
    ConfigError { source: source.into(), line, column, message: format!("{block}: {e}") }
}

impl Scenario {
    pub fn parse(text: &str, source: &str) -> Result<Self, ConfigError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // Strip serde's own position suffix; the prefix carries it.
            let message = match msg.rfind(" at line ") {
                Some(i) => msg[..i].to_string(),
                None => msg,
            };
            let (line, column) = match unknown_field(&message) {
                Some(key) => locate_before(text, key, e.line()).unwrap_or((e.line(), e.column())),
                None => (e.line(), e.column()),
            };
            ConfigError { source: source.into(), line, column, message }
        })?;
        scenario.validate(text, source)?;
        Ok(scenario)
    }

    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Self::parse(DEFAULT_CONFIG, "default.json")?),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", p.display()))?;
                Ok(Self::parse(&text, &p.display().to_string())?)
            }
        }
    }

    fn validate(&self, text: &str, source: &str) -> Result<(), ConfigError> {
        let err = |block: &str, e: &dyn fmt::Display| block_error(source, text, block, e);
        if self.mc_draws < 2 {
            return Err(err("mc_draws", &"at least two draws are needed"));
        }
        self.grids.validate().map_err(|e| err("grids", &e))?;
        self.economics.validate().map_err(|e| err("economics", &e))?;
        self.strategy.validate().map_err(|e| err("strategy", &e))?;
        self.belief.implementer.validate().map_err(|e| err("implementer", &e))?;
        if !(0.0..=1.0).contains(&self.belief.published_l) {
            return Err(err("published_l", &"must lie in [0, 1]"));
        }
        if let Some(c) = &self.contract {
            c.validate(Some(self.economics.costs.full_cost())).map_err(|e| err("contract", &e))?;
        }
        self.utility.validate().map_err(|e| err("utility", &e))?;
        let r = &self.researcher;
        r.risk.validate().map_err(|e| err("risk", &e))?;
        r.payoff.validate().map_err(|e| err("payoff", &e))?;
        if r.scale == 0 || r.scale > self.economics.population() {
            return Err(err("scale", &format!("must lie in 1..={}", self.economics.population())));
        }
        if !(r.p_step > 0.0 && r.p_step < 1.0) {
            return Err(err("p_step", &"must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&r.mc_check_p) {
            return Err(err("mc_check_p", &"must lie in [0, 1]"));
        }
        if self.pool.sizes.is_empty() || self.pool.sizes.contains(&0) {
            return Err(err("sizes", &"pool sizes must be positive"));
        }
        if self.pool.loss.atoms().iter().any(|(z, _)| *z > 0.0) {
            return Err(err("loss", &"pool losses must be non-positive"));
        }
        let f = &self.figure;
        let open = |x: f64| x > 0.0 && x < 1.0;
        if f.p_c.is_empty() || !f.p_c.iter().all(|&p| open(p)) {
            return Err(err("p_c", &"needs at least one value in (0, 1)"));
        }
        if f.alpha_grid.is_empty() || !f.alpha_grid.iter().all(|&a| open(a)) {
            return Err(err("alpha_grid", &"needs at least one level in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&f.pi) {
            return Err(err("pi", &"must lie in [0, 1]"));
        }
        if !open(f.calibration_alpha) || !open(f.calibration_p_c) || !open(f.target_alpha) {
            return Err(err("figure", &"calibration settings must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        Scenario::parse(DEFAULT_CONFIG, "default.json").unwrap();
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let text = DEFAULT_CONFIG.replacen("\"seed\"", "\"sede\": 1,\n  \"seed\"", 1);
        let e = Scenario::parse(&text, "x.json").unwrap_err();
        assert!(e.message.contains("unknown field `sede`"), "{e}");
        assert_eq!(e.line, locate(&text, "sede").0);
    }

    #[test]
    fn semantic_error_points_at_block() {
        let text = DEFAULT_CONFIG.replacen("\"pi\": 0.5", "\"pi\": 1.5", 1);
        let e = Scenario::parse(&text, "x.json").unwrap_err();
        assert_eq!(e.line, locate(&text, "pi").0);
        assert!(e.to_string().starts_with("x.json:"));
    }
}
