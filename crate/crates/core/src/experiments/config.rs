use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::MeasureSpec;
use crate::regularity::RegularityOptions;
use crate::uniformity::Objective;

/// Levels above this need an explicit `max_level`.
pub const DEFAULT_MAX_LEVEL: u32 = 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExperimentKind {
    Improvement,
    Repeated,
    PorousDual,
    InftyJump,
    Regularity,
    Sumset,
    Uniformize,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Improvement,
        ExperimentKind::Repeated,
        ExperimentKind::PorousDual,
        ExperimentKind::InftyJump,
        ExperimentKind::Regularity,
        ExperimentKind::Sumset,
        ExperimentKind::Uniformize,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::Improvement => "IMPROVEMENT",
            ExperimentKind::Repeated => "REPEATED",
            ExperimentKind::PorousDual => "POROUS_DUAL",
            ExperimentKind::InftyJump => "INFTY_JUMP",
            ExperimentKind::Regularity => "REGULARITY",
            ExperimentKind::Sumset => "SUMSET",
            ExperimentKind::Uniformize => "UNIFORMIZE",
        }
    }

    /// Levels used when neither the config nor the command line sets them.
    pub fn default_levels(self) -> Vec<u32> {
        match self {
            ExperimentKind::Improvement | ExperimentKind::PorousDual => (12..=24).collect(),
            ExperimentKind::Repeated | ExperimentKind::InftyJump => (12..=20).collect(),
            ExperimentKind::Regularity | ExperimentKind::Sumset => (12..=16).collect(),
            ExperimentKind::Uniformize => vec![12],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Accepts the tag in any case, with `-` or `_`: `porous-dual`, `POROUS_DUAL`.
impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.tag() == norm)
            .ok_or_else(|| {
                let tags: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.tag()).collect();
                Error::InvalidConfig(format!(
                    "unknown experiment `{s}` (expected one of {})",
                    tags.join(", ")
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniformizeParams {
    /// Block length D; the level must be a multiple of it.
    pub d: u32,
    pub objective: Objective,
}

impl Default for UniformizeParams {
    fn default() -> Self {
        UniformizeParams {
            d: 2,
            objective: Objective::Count,
        }
    }
}

/// Everything an experiment reads. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub mu: Option<MeasureSpec>,
    pub nu: Option<MeasureSpec>,
    /// Factors for REPEATED; empty means `mu` repeated `n_max` times.
    pub measures: Vec<MeasureSpec>,
    /// Shortcut for INFTY_JUMP: the symmetric α-regular central Cantor example.
    pub alpha: Option<f64>,
    pub q: Vec<f64>,
    pub levels: Option<Vec<u32>>,
    pub max_level: u32,
    /// IMPROVEMENT requires exponent(μ) ≤ 1 − η at the top level.
    pub eta: f64,
    /// POROUS_DUAL requires the L^p exponent of ν to be at least σ.
    pub sigma: f64,
    pub p: f64,
    /// Smallest admissible support diameter of ν.
    pub a: f64,
    pub n_max: Option<usize>,
    /// Porosity depth for POROUS_DUAL; fitted when absent.
    pub porosity_k: Option<u32>,
    pub regularity: RegularityOptions,
    pub uniformize: UniformizeParams,
    /// Trailing scales in slope fits.
    pub window: usize,
    /// Recorded in the report. No runner draws random numbers.
    pub seed: u64,
    pub max_work: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            mu: None,
            nu: None,
            measures: Vec::new(),
            alpha: None,
            q: vec![2.0],
            levels: None,
            max_level: DEFAULT_MAX_LEVEL,
            eta: 0.05,
            sigma: 0.1,
            p: 2.0,
            a: 0.0,
            n_max: None,
            porosity_k: None,
            regularity: RegularityOptions::default(),
            uniformize: UniformizeParams::default(),
            window: crate::dimension::DEFAULT_WINDOW,
            seed: 0,
            max_work: None,
            out: None,
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment: Some(kind),
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| bad(format!("at `{}`: {}", e.path(), e.inner())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Levels in increasing order, defaulted per experiment.
    pub fn resolved_levels(&self, kind: ExperimentKind) -> Vec<u32> {
        let mut v = self.levels.clone().unwrap_or_else(|| kind.default_levels());
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn top_level(&self, kind: ExperimentKind) -> u32 {
        *self
            .resolved_levels(kind)
            .last()
            .expect("validated non-empty")
    }

    pub fn max_work(&self) -> u64 {
        self.max_work
            .unwrap_or_else(crate::convolve::default_max_work)
    }

    /// Structural checks that need no computation.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        if let Some(k) = self.experiment {
            if k != kind {
                return Err(bad(format!("config is for {k}, command asked for {kind}")));
            }
        }
        if self.q.is_empty() {
            return Err(bad("q list is empty"));
        }
        if let Some(q) = self.q.iter().find(|&&q| !(q > 1.0) || !q.is_finite()) {
            return Err(bad(format!(
                "q = {q}: entries must be finite and > 1 (q = ∞ is INFTY_JUMP)"
            )));
        }
        let levels = self.resolved_levels(kind);
        if levels.is_empty() {
            return Err(bad("level list is empty"));
        }
        if let Some(m) = levels.iter().find(|&&m| m > self.max_level) {
            return Err(bad(format!(
                "level {m} exceeds max_level {}",
                self.max_level
            )));
        }
        if levels[0] == 0 {
            return Err(bad("levels must be at least 1"));
        }
        if !(self.eta >= 0.0 && self.eta < 1.0) {
            return Err(bad(format!("eta must lie in [0, 1), got {}", self.eta)));
        }
        if !(self.sigma >= 0.0 && self.sigma <= 1.0) {
            return Err(bad(format!("sigma must lie in [0, 1], got {}", self.sigma)));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(bad(format!("p must be finite and > 1, got {}", self.p)));
        }
        if !(self.a >= 0.0) {
            return Err(bad(format!("a must be ≥ 0, got {}", self.a)));
        }
        if self.n_max == Some(0) {
            return Err(bad("n_max must be at least 1"));
        }
        if self.window == 0 {
            return Err(bad("window must be at least 1"));
        }
        let specs = self.mu.iter().chain(&self.nu).chain(&self.measures);
        for (i, s) in specs.enumerate() {
            s.validate(&format!("measure[{i}]"))
                .map_err(|e| bad(e.to_string()))?;
        }
        Ok(())
    }
}

/// Parses `a..b` (inclusive) or a comma list.
pub fn parse_levels(s: &str) -> Result<Vec<u32>> {
    let num = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| bad(format!("bad level `{t}` in `{s}`")))
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(bad(format!("empty level range `{s}`")));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

/// Parses a comma list of q values.
pub fn parse_q_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("bad q `{t}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_parsing() {
        assert_eq!(
            "porous-dual".parse::<ExperimentKind>().unwrap(),
            ExperimentKind::PorousDual
        );
        assert_eq!(
            "INFTY_JUMP".parse::<ExperimentKind>().unwrap(),
            ExperimentKind::InftyJump
        );
        assert!("jump".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let mut c = ExperimentConfig::new(ExperimentKind::Sumset);
        c.mu = Some(MeasureSpec::middle_thirds());
        c.levels = Some(vec![10, 12]);
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let err =
            ExperimentConfig::from_json(r#"{"experiment":"SUMSET","levles":[3]}"#).unwrap_err();
        assert!(err.to_string().contains("levles"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"q":[2,"x"]}"#).unwrap_err();
        assert!(err.to_string().contains("q[1]"), "{err}");
    }

    #[test]
    fn validation() {
        let kind = ExperimentKind::Improvement;
        let mut c = ExperimentConfig::new(kind);
        assert!(c.validate(kind).is_ok());
        assert_eq!(c.resolved_levels(kind), (12..=24).collect::<Vec<_>>());
        c.q = vec![1.0];
        assert!(c.validate(kind).is_err());
        c.q = vec![2.0];
        c.levels = Some(vec![30]);
        assert!(c.validate(kind).is_err());
        c.max_level = 30;
        assert!(c.validate(kind).is_ok());
        assert!(c.validate(ExperimentKind::Sumset).is_err());
    }

    #[test]
    fn level_and_q_lists() {
        assert_eq!(parse_levels("3..6").unwrap(), vec![3, 4, 5, 6]);
        assert_eq!(parse_levels("3..=4").unwrap(), vec![3, 4]);
        assert_eq!(parse_levels("8,10").unwrap(), vec![8, 10]);
        assert!(parse_levels("6..3").is_err());
        assert_eq!(parse_q_list("1.5, 2,4").unwrap(), vec![1.5, 2.0, 4.0]);
    }
}
