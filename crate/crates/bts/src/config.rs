//! Experiment files.
//!
//! ```toml
//! master_seed = 7
//! output_dir = "out"
//!
//! [[experiment]]
//! name = "two_arms"
//! horizon = 10000
//! replications = 200
//! trace_stride = 100
//! arms = [{ kind = "bernoulli", p = 0.75 }, { kind = "bernoulli", p = 0.25 }]
//!
//! [[experiment.policy]]
//! policy = "batched_ts"
//! alpha = [1.00001, 2.0]   # one run per value
//! variant = "full"         # or "skip"; sigma2 defaults to 1
//!
//! [[experiment.policy]]
//! policy = "classical_ts"
//! ```
//!
//! Values are validated while parsing, so errors point at the offending
//! table in the file.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use bts_core::{ArmSpec, EnvironmentSpec, PolicyConfig, RunConfig, Variant};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}", path = .path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}", path = .path.display())]
    Invalid { path: PathBuf, message: String },
    #[error("no experiment named `{0}`")]
    UnknownExperiment(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentFile {
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub experiments: Vec<Experiment>,
    pub verify: VerifySettings,
}

impl ExperimentFile {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text).map_err(|message| ConfigError::Invalid {
            path: path.to_owned(),
            message,
        })
    }

    /// Parses and validates a file's contents; errors are rendered messages.
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let raw: RawFile = toml::from_str(text).map_err(|e| e.to_string())?;
        let mut seen = HashSet::new();
        for experiment in &raw.experiment {
            if !seen.insert(experiment.name.as_str()) {
                return Err(format!("duplicate experiment name `{}`", experiment.name));
            }
        }
        Ok(ExperimentFile {
            master_seed: raw.master_seed,
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            experiments: raw.experiment,
            verify: raw.verify.unwrap_or_default(),
        })
    }

    pub fn experiment(&self, name: &str) -> Result<&Experiment, ConfigError> {
        self.experiments
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| ConfigError::UnknownExperiment(name.to_owned()))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    master_seed: u64,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    experiment: Vec<Experiment>,
    verify: Option<VerifySettings>,
}

/// One environment with the policies to compare on it.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawExperiment")]
pub struct Experiment {
    pub name: String,
    pub environment: EnvironmentSpec,
    pub horizon: u64,
    pub replications: u64,
    pub trace_stride: u64,
    /// Expanded policy list: a batched entry with several alphas yields one
    /// policy per alpha, in the order given.
    pub policies: Vec<PolicyConfig>,
}

impl Experiment {
    pub fn run_config(&self, policy: PolicyConfig, master_seed: u64) -> RunConfig {
        RunConfig::new(self.environment.clone(), policy, self.horizon)
            .with_replications(self.replications)
            .with_seed(master_seed)
            .with_stride(self.trace_stride)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: String,
    horizon: u64,
    replications: u64,
    #[serde(default = "one")]
    trace_stride: u64,
    arms: Vec<RawArm>,
    policy: Vec<PolicyEntry>,
}

fn one() -> u64 {
    1
}

impl TryFrom<RawExperiment> for Experiment {
    type Error = String;

    fn try_from(raw: RawExperiment) -> Result<Self, String> {
        let name = raw.name;
        let fail = |key: &str, e: &dyn fmt::Display| format!("experiment `{name}`: {key}: {e}");
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(format!(
                "experiment name `{name}` must be non-empty and contain no path separators"
            ));
        }
        let arms = raw
            .arms
            .into_iter()
            .map(ArmSpec::try_from)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| fail("arms", &e))?;
        let environment = EnvironmentSpec::new(arms).map_err(|e| fail("arms", &e))?;
        if raw.policy.is_empty() {
            return Err(fail("policy", &"at least one policy is required"));
        }
        let experiment = Experiment {
            environment,
            horizon: raw.horizon,
            replications: raw.replications,
            trace_stride: raw.trace_stride,
            policies: raw.policy.into_iter().flat_map(|p| p.0).collect(),
            name: name.clone(),
        };
        for policy in &experiment.policies {
            experiment
                .run_config(*policy, 0)
                .validate()
                .map_err(|e| fail("run", &e))?;
        }
        Ok(experiment)
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawArm {
    Bernoulli { p: f64 },
    Gaussian { mean: f64, variance: f64 },
}

impl TryFrom<RawArm> for ArmSpec {
    type Error = bts_core::Error;

    fn try_from(raw: RawArm) -> bts_core::Result<Self> {
        match raw {
            RawArm::Bernoulli { p } => ArmSpec::bernoulli(p),
            RawArm::Gaussian { mean, variance } => ArmSpec::gaussian(mean, variance),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum PolicyKind {
    BatchedTs,
    ClassicalTs,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum RawVariant {
    Skip,
    Full,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    policy: PolicyKind,
    alpha: Option<OneOrMany>,
    #[serde(default = "unit_variance")]
    sigma2: f64,
    variant: Option<RawVariant>,
}

fn unit_variance() -> f64 {
    1.0
}

/// One `[[experiment.policy]]` table, expanded over its alpha values.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawPolicy")]
struct PolicyEntry(Vec<PolicyConfig>);

impl TryFrom<RawPolicy> for PolicyEntry {
    type Error = String;

    fn try_from(raw: RawPolicy) -> Result<Self, String> {
        let variant = match raw.variant {
            Some(RawVariant::Skip) => Variant::Skip,
            Some(RawVariant::Full) | None => Variant::Full,
        };
        let policies = match (raw.policy, raw.alpha) {
            (PolicyKind::BatchedTs, None) => return Err("batched_ts needs `alpha`".into()),
            (PolicyKind::BatchedTs, Some(alpha)) => {
                let alphas = match alpha {
                    OneOrMany::One(a) => vec![a],
                    OneOrMany::Many(list) if list.is_empty() => {
                        return Err("`alpha` list is empty".into())
                    }
                    OneOrMany::Many(list) => list,
                };
                alphas
                    .into_iter()
                    .map(|a| PolicyConfig::batched(a, raw.sigma2, variant))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| e.to_string())?
            }
            (PolicyKind::ClassicalTs, Some(_)) => {
                return Err("classical_ts takes no `alpha`".into())
            }
            (PolicyKind::ClassicalTs, None) => {
                if matches!(raw.variant, Some(RawVariant::Skip)) {
                    return Err(
                        "classical_ts always uses every reward; drop `variant = \"skip\"`".into(),
                    );
                }
                vec![PolicyConfig::classical(raw.sigma2).map_err(|e| e.to_string())?]
            }
        };
        Ok(PolicyEntry(policies))
    }
}

/// Parameters of the `--verify` suite. Every key is optional.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// Episodes per Monte Carlo check.
    pub replications: u64,
    /// Bernoulli success probabilities of the test environment.
    pub arms: Vec<f64>,
    pub alpha: f64,
    pub sigma2: f64,
    /// Arm whose statistics are tracked (0-based).
    pub arm: usize,
    pub lambdas: Vec<f64>,
    pub checkpoints: Vec<u64>,
    pub martingale_horizon: u64,
    pub tail_horizon: u64,
    pub tail_visit: u64,
    pub tail_levels: Vec<f64>,
    pub misestimation_horizon: u64,
    pub misestimation_steps: Vec<u64>,
    pub misestimation_constants: Vec<f64>,
    /// Draws per lambda for the Monte Carlo Hoeffding check.
    pub mgf_samples: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            replications: 10_000,
            arms: vec![0.75, 0.25],
            alpha: 2.0,
            sigma2: 1.0,
            arm: 1,
            lambdas: vec![-1.0, -0.25, 0.0, 0.25, 1.0],
            checkpoints: vec![100, 500, 2000],
            martingale_horizon: 2000,
            tail_horizon: 5000,
            tail_visit: 4,
            tail_levels: vec![0.5, 1.0, 2.0],
            misestimation_horizon: 1000,
            misestimation_steps: vec![200, 1000],
            misestimation_constants: vec![32.0, 1.0],
            mgf_samples: 100_000,
        }
    }
}

impl VerifySettings {
    pub fn environment(&self) -> bts_core::Result<EnvironmentSpec> {
        EnvironmentSpec::new(
            self.arms
                .iter()
                .map(|&p| ArmSpec::bernoulli(p))
                .collect::<Result<_, _>>()?,
        )
    }

    /// Batched skip-variant run on the test environment.
    pub fn run_config(&self, horizon: u64, master_seed: u64) -> bts_core::Result<RunConfig> {
        let policy = PolicyConfig::batched(self.alpha, self.sigma2, Variant::Skip)?;
        let config = RunConfig::new(self.environment()?, policy, horizon)
            .with_replications(self.replications)
            .with_seed(master_seed);
        config.validate()?;
        Ok(config)
    }
}
