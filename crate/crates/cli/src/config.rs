use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qms_core::classical::BirthDeathChain;
use qms_core::models::{Boundary, GenericQMSParams, KPhotonParams, TwoPhotonParams};
use qms_core::numerics::Tolerances;

/// A configuration problem, with the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { path: path.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Spectrum,
    RPlus,
    ErgodicCheck,
    Rate,
    Decompose,
    Nfd,
    Gas,
    Evolve,
    Classical,
    Consistency,
}

impl Analysis {
    pub const ALL: [Analysis; 10] = [
        Analysis::Spectrum,
        Analysis::RPlus,
        Analysis::ErgodicCheck,
        Analysis::Rate,
        Analysis::Decompose,
        Analysis::Nfd,
        Analysis::Gas,
        Analysis::Evolve,
        Analysis::Classical,
        Analysis::Consistency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Spectrum => "spectrum",
            Analysis::RPlus => "r-plus",
            Analysis::ErgodicCheck => "ergodic-check",
            Analysis::Rate => "rate",
            Analysis::Decompose => "decompose",
            Analysis::Nfd => "nfd",
            Analysis::Gas => "gas",
            Analysis::Evolve => "evolve",
            Analysis::Classical => "classical",
            Analysis::Consistency => "consistency",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// Matrix entry: a real number or `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl Entry {
    pub fn value(self) -> qms_core::numerics::c64 {
        match self {
            Entry::Real(re) => qms_core::numerics::cx(re, 0.0),
            Entry::Complex { re, im } => qms_core::numerics::cx(re, im),
        }
    }
}

/// Row-major matrix.
pub type MatrixSpec = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericModel {
    pub dim: usize,
    /// Explicit rate matrix, entry [m][j] for m → j.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Vec<f64>>>,
    /// Birth–death rates; used instead of `gamma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<BirthDeathChain>,
    #[serde(default)]
    pub kappa: Vec<f64>,
    #[serde(default)]
    pub boundary: Boundary,
}

impl GenericModel {
    pub fn params(&self) -> Result<GenericQMSParams, ConfigError> {
        match (&self.gamma, &self.chain) {
            (Some(gamma), None) => Ok(GenericQMSParams {
                gamma: gamma.clone(),
                kappa: self.kappa.clone(),
                dim: self.dim,
                boundary: self.boundary,
            }),
            (None, Some(chain)) => {
                let mut p = chain.to_generic_params(self.dim);
                p.kappa = self.kappa.clone();
                p.boundary = self.boundary;
                Ok(p)
            }
            _ => Err(ConfigError::new("model", "exactly one of `gamma` or `chain` is required")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    pub dim: usize,
    pub hamiltonian: MatrixSpec,
    #[serde(default)]
    pub jumps: Vec<MatrixSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ModelConfig {
    TwoPhoton(TwoPhotonParams),
    GenericQms(GenericModel),
    KPhoton(KPhotonParams),
    CustomGkls(CustomModel),
}

impl ModelConfig {
    pub fn dim(&self) -> usize {
        match self {
            ModelConfig::TwoPhoton(p) => p.dim,
            ModelConfig::GenericQms(g) => g.dim,
            ModelConfig::KPhoton(p) => p.dim,
            ModelConfig::CustomGkls(c) => c.dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Linear,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { t_max: 10.0, points: 51, spacing: Spacing::Linear }
    }
}

impl TimeGrid {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(ConfigError::new("time_grid.t_max", "must be finite and >= 0"));
        }
        if self.points == 0 {
            return Err(ConfigError::new("time_grid.points", "must be at least 1"));
        }
        Ok(())
    }

    /// Sample times; t_max = 0 or a single point gives [0].
    pub fn times(&self) -> Vec<f64> {
        if self.t_max == 0.0 || self.points == 1 {
            return vec![0.0];
        }
        let n = self.points - 1;
        match self.spacing {
            Spacing::Linear => (0..=n).map(|i| self.t_max * i as f64 / n as f64).collect(),
            Spacing::Geometric => {
                let lo = self.t_max * 1e-3;
                let mut t = vec![0.0];
                if n == 1 {
                    t.push(self.t_max);
                } else {
                    t.extend((0..n).map(|i| lo * (self.t_max / lo).powf(i as f64 / (n - 1) as f64)));
                }
                t
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubspaceSpec {
    RPlus,
    Full,
    Indices(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    #[default]
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateOptions {
    /// Empty means the default geometric sweep.
    pub t0_candidates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubspaceOptions {
    pub subspace: SubspaceSpec,
    pub mode: ModeSpec,
    /// Channel time for discrete mode.
    pub t0: f64,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        Self { subspace: SubspaceSpec::RPlus, mode: ModeSpec::Discrete, t0: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub seed: u64,
    /// Initial state for `evolve`: maximally-mixed, fock:n, unit:i,j or random.
    #[serde(default = "default_state")]
    pub state: String,
    #[serde(default)]
    pub rate: RateOptions,
    #[serde(default)]
    pub nfd: SubspaceOptions,
    #[serde(default)]
    pub gas: SubspaceOptions,
    /// Chain for the classical analyses when the model does not carry one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<BirthDeathChain>,
}

fn default_state() -> String {
    "maximally-mixed".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSpec {
    MaximallyMixed,
    Fock(usize),
    Unit(usize, usize),
    Random,
}

impl StateSpec {
    pub fn parse(s: &str, dim: usize) -> Result<Self, ConfigError> {
        let bad = |m: String| ConfigError::new("state", m);
        let index = |x: &str| -> Result<usize, ConfigError> {
            let i: usize = x.trim().parse().map_err(|_| bad(format!("`{x}` is not an index")))?;
            if i >= dim {
                return Err(bad(format!("index {i} out of range for dimension {dim}")));
            }
            Ok(i)
        };
        match s.split_once(':') {
            None if s == "maximally-mixed" => Ok(StateSpec::MaximallyMixed),
            None if s == "random" => Ok(StateSpec::Random),
            Some(("fock", n)) => Ok(StateSpec::Fock(index(n)?)),
            Some(("unit", ij)) => {
                let (i, j) = ij.split_once(',').ok_or_else(|| bad("expected unit:i,j".into()))?;
                Ok(StateSpec::Unit(index(i)?, index(j)?))
            }
            _ => Err(bad(format!(
                "unknown state `{s}` (expected maximally-mixed, fock:n, unit:i,j or random)"
            ))),
        }
    }
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de)
            .map_err(|e| ConfigError::new(e.path().to_string(), e.inner()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Schema-level and parameter checks; nothing is computed.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let model_err = |e: qms_core::Error| match e {
            qms_core::Error::InvalidParameter { name, reason } => {
                ConfigError::new(format!("model.{name}"), reason)
            }
            other => ConfigError::new("model", other),
        };
        match &self.model {
            ModelConfig::TwoPhoton(p) => p.validate().map_err(model_err)?,
            ModelConfig::KPhoton(p) => p.validate().map_err(model_err)?,
            ModelConfig::GenericQms(g) => {
                if let Some(chain) = &g.chain {
                    chain.validate().map_err(|e| ConfigError::new("model.chain", e))?;
                }
                g.params()?.validate().map_err(model_err)?;
            }
            ModelConfig::CustomGkls(c) => {
                if c.dim == 0 {
                    return Err(ConfigError::new("model.dim", "must be at least 1"));
                }
                check_shape("model.hamiltonian", &c.hamiltonian, c.dim)?;
                for (i, j) in c.jumps.iter().enumerate() {
                    check_shape(&format!("model.jumps[{i}]"), j, c.dim)?;
                }
            }
        }
        self.tolerances.validate().map_err(|e| match e {
            qms_core::Error::InvalidParameter { name, reason } => {
                ConfigError::new(format!("tolerances.{name}"), reason)
            }
            other => ConfigError::new("tolerances", other),
        })?;
        self.time_grid.validate()?;
        StateSpec::parse(&self.state, self.model.dim())?;
        if let Some(chain) = &self.chain {
            chain.validate().map_err(|e| ConfigError::new("chain", e))?;
        }
        if !self.rate.t0_candidates.iter().all(|t| t.is_finite() && *t > 0.0) {
            return Err(ConfigError::new("rate.t0_candidates", "entries must be finite and > 0"));
        }
        for (name, opts) in [("nfd", &self.nfd), ("gas", &self.gas)] {
            if !(opts.t0.is_finite() && opts.t0 > 0.0) {
                return Err(ConfigError::new(format!("{name}.t0"), "must be finite and > 0"));
            }
            if let SubspaceSpec::Indices(idx) = &opts.subspace {
                if let Some(i) = idx.iter().find(|&&i| i >= self.model.dim()) {
                    return Err(ConfigError::new(
                        format!("{name}.subspace.indices"),
                        format!("index {i} out of range for dimension {}", self.model.dim()),
                    ));
                }
            }
        }
        let needs_chain = self
            .analyses
            .iter()
            .any(|a| matches!(a, Analysis::Classical | Analysis::Consistency));
        if needs_chain && self.birth_death_chain().is_none() {
            return Err(ConfigError::new(
                "analyses",
                "classical and consistency analyses need a birth-death chain (`chain` or a generic-qms model with `chain`)",
            ));
        }
        Ok(())
    }

    pub fn birth_death_chain(&self) -> Option<&BirthDeathChain> {
        self.chain.as_ref().or(match &self.model {
            ModelConfig::GenericQms(g) => g.chain.as_ref(),
            _ => None,
        })
    }
}

fn check_shape(path: &str, m: &MatrixSpec, dim: usize) -> Result<(), ConfigError> {
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        return Err(ConfigError::new(path, format!("must be a {dim}x{dim} matrix")));
    }
    if m.iter().flatten().any(|e| !(e.value().re.is_finite() && e.value().im.is_finite())) {
        return Err(ConfigError::new(path, "entries must be finite"));
    }
    Ok(())
}
