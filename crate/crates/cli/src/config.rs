//! Experiment configuration: a flat TOML file overlaid by command-line flags.
//!
//! Keys mirror the long flags: `system`, `param` (list of `key=value`
//! strings), `n`, `eps`, `omega_samples`, `seed`, `method`, `partition`,
//! `out`, `exact_cap` and `threads`. A flag given on the command line replaces
//! the file's value; for `param` the replacement is per key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rds_entropy::entropy::{check_eps_list, PartitionSpec};
use rds_entropy::systems::{build_system, ModelSystem};
use rds_entropy::{SolverMethod, DEFAULT_EXACT_CAP, MAX_EXACT_CAP};
use serde::Deserialize;

/// A configuration problem, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
    /// The configuration is well formed but asks for more than the resource
    /// caps allow.
    pub resource_cap: bool,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
            resource_cap: false,
        }
    }

    pub fn cap(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            resource_cap: true,
            ..Self::new(field, message)
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Values read from a config file or from flags; anything unset falls back to
/// the next layer.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub system: Option<String>,
    pub param: Option<Vec<String>>,
    pub n: Option<Vec<usize>>,
    pub eps: Option<Vec<f64>>,
    pub omega_samples: Option<usize>,
    pub seed: Option<u64>,
    pub method: Option<String>,
    pub partition: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub exact_cap: Option<usize>,
    pub threads: Option<usize>,
}

impl ConfigLayer {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::new("config", e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// `self` with every value set in `flags` taking precedence.
    pub fn overlay(self, flags: ConfigLayer) -> ConfigLayer {
        let param = match (self.param, flags.param) {
            (Some(mut base), Some(top)) => {
                base.extend(top);
                Some(base)
            }
            (a, b) => b.or(a),
        };
        ConfigLayer {
            system: flags.system.or(self.system),
            param,
            n: flags.n.or(self.n),
            eps: flags.eps.or(self.eps),
            omega_samples: flags.omega_samples.or(self.omega_samples),
            seed: flags.seed.or(self.seed),
            method: flags.method.or(self.method),
            partition: flags.partition.or(self.partition),
            out: flags.out.or(self.out),
            exact_cap: flags.exact_cap.or(self.exact_cap),
            threads: flags.threads.or(self.threads),
        }
    }
}

/// What a subcommand needs from the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    /// `n` and `eps`.
    Top,
    /// `n` only.
    Fiber,
    /// `n` and `eps`, plus partitions.
    Both,
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: String,
    pub params: BTreeMap<String, String>,
    pub n_list: Vec<usize>,
    pub eps_list: Vec<f64>,
    pub omega_samples: usize,
    pub master_seed: u64,
    pub method: SolverMethod,
    /// Empty means the system's canonical partitions.
    pub partitions: Vec<String>,
    pub out: Option<PathBuf>,
    pub exact_cap: usize,
    pub threads: Option<usize>,
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| ConfigError::new("param", format!("`{item}` is not key=value")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::new("param", format!("`{item}` has an empty key")));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

/// Resolves a partition name against a system: canonical names first, then
/// the generic forms `trivial`, `symbol`, `arcs<c>` and `boxes<s>`.
pub fn resolve_partition(system: &dyn ModelSystem, name: &str) -> Result<PartitionSpec, ConfigError> {
    if let Some(p) = system.partition_named(name) {
        return Ok(p.partition);
    }
    let count = |prefix: &str| name.strip_prefix(prefix).and_then(|s| s.parse::<u64>().ok()).filter(|&c| c > 0);
    let spec = if name == "trivial" {
        PartitionSpec::trivial()
    } else if let Some(c) = count("arcs") {
        PartitionSpec::circle_arcs(c)
    } else if let Some(s) = count("boxes") {
        PartitionSpec::torus_boxes(s)
    } else {
        return Err(ConfigError::new(
            "partition",
            format!("unknown partition `{name}` for system `{}`", system.name()),
        ));
    };
    let w = system.environment(0);
    spec.validate(system.fiber(&w))
        .map_err(|e| ConfigError::new("partition", format!("`{name}`: {e}")))?;
    Ok(spec)
}

impl ExperimentConfig {
    /// Validates a merged layer for a subcommand.
    pub fn resolve(layer: ConfigLayer, needs: Needs) -> Result<Self, ConfigError> {
        let system = layer
            .system
            .ok_or_else(|| ConfigError::new("system", "no system given"))?;
        let params = parse_params(layer.param.as_deref().unwrap_or_default())?;
        let built = build_system(&system, &params).map_err(|e| match e {
            rds_entropy::Error::InvalidParameter { name, reason } => ConfigError::new(
                if name == "system" { "system".to_string() } else { format!("param {name}") },
                reason,
            ),
            rds_entropy::Error::ResourceCap(m) => ConfigError::cap("param", m),
            other => ConfigError::new("param", other.to_string()),
        })?;

        let n_list = layer.n.unwrap_or_default();
        if n_list.is_empty() {
            return Err(ConfigError::new("n", "at least one window index is required"));
        }
        if n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::new("n", "must be positive and strictly increasing"));
        }

        let eps_list = layer.eps.unwrap_or_default();
        if needs != Needs::Fiber {
            let w = built.environment(0);
            check_eps_list(&eps_list, built.fiber(&w).grid_spacing())
                .map_err(|e| ConfigError::new("eps", e.to_string()))?;
        }

        let omega_samples = layer.omega_samples.unwrap_or(1);
        if omega_samples == 0 {
            return Err(ConfigError::new("omega_samples", "must be at least 1"));
        }
        let method = match layer.method.as_deref() {
            None => SolverMethod::Greedy,
            Some(m) => m.parse().map_err(|_| ConfigError::new("method", format!("expected exact|greedy, got `{m}`")))?,
        };
        let exact_cap = layer.exact_cap.unwrap_or(DEFAULT_EXACT_CAP);
        if exact_cap == 0 || exact_cap > MAX_EXACT_CAP {
            return Err(ConfigError::new("exact_cap", format!("must lie in 1..={MAX_EXACT_CAP}")));
        }
        if layer.threads == Some(0) {
            return Err(ConfigError::new("threads", "must be at least 1"));
        }
        let partitions = layer.partition.unwrap_or_default();
        for p in &partitions {
            resolve_partition(built.as_ref(), p)?;
        }
        Ok(Self {
            system,
            params,
            n_list,
            eps_list,
            omega_samples,
            master_seed: layer.seed.unwrap_or(0),
            method,
            partitions,
            out: layer.out,
            exact_cap,
            threads: layer.threads,
        })
    }

    pub fn build_system(&self) -> Box<dyn ModelSystem> {
        build_system(&self.system, &self.params).expect("validated at load")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(text: &str) -> ConfigLayer {
        ConfigLayer::from_toml(text).unwrap()
    }

    #[test]
    fn flags_override_file() {
        let file = layer("system = \"full-shift\"\nparam = [\"k=2\", \"n_max=8\"]\nn = [2, 4]\neps = [0.5]\nseed = 5\n");
        let flags = ConfigLayer {
            param: Some(vec!["n_max=16".into()]),
            n: Some(vec![4, 8, 16]),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(file.overlay(flags), Needs::Top).unwrap();
        assert_eq!(cfg.n_list, vec![4, 8, 16]);
        assert_eq!(cfg.params["n_max"], "16");
        assert_eq!(cfg.params["k"], "2");
        assert_eq!(cfg.master_seed, 5);
        assert_eq!(cfg.method, SolverMethod::Greedy);
    }

    #[test]
    fn violations_name_the_field() {
        let base = "system = \"doubling\"\nparam = [\"q=8\"]\n";
        let field = |extra: &str, needs| {
            ExperimentConfig::resolve(layer(&format!("{base}{extra}")), needs)
                .unwrap_err()
                .field
        };
        assert_eq!(field("n = [4, 2]\neps = [0.25]", Needs::Top), "n");
        assert_eq!(field("n = [2]\neps = [0.1, 0.2]", Needs::Top), "eps");
        assert_eq!(field("n = [2]\neps = [0.01]", Needs::Top), "eps");
        assert_eq!(field("n = [2]\neps = [0.25]\nomega_samples = 0", Needs::Top), "omega_samples");
        assert_eq!(field("n = [2]\neps = [0.25]\nmethod = \"fast\"", Needs::Top), "method");
        assert_eq!(field("n = [2]\npartition = [\"symbol\"]", Needs::Fiber), "partition");
        assert!(ExperimentConfig::resolve(layer(&format!("{base}n = [2]")), Needs::Fiber).is_ok());
        assert!(ConfigLayer::from_toml("colour = 3").is_err());
        let unknown = ExperimentConfig::resolve(layer("system = \"nope\"\nn = [1]"), Needs::Fiber).unwrap_err();
        assert_eq!(unknown.field, "system");
    }
}
