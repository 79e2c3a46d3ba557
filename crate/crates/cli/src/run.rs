//! Subcommand bodies. Each returns the text for standard output, the CSV
//! table if any, and whether the checked property held.

use std::fmt::Write as _;

use rds_entropy::audit::{run_audit, AuditConfig};
use rds_entropy::entropy::{
    estimate_fiber_entropy, estimate_h_top, variational_audit, EntropyEstimate, EntropyTable,
    Extrapolation, TopEntropyConfig,
};
use rds_entropy::systems::{CanonicalPartition, ModelSystem, SYSTEM_NAMES};
use rds_entropy::{build_system, Error};

use crate::config::{resolve_partition, ConfigError, ExperimentConfig};

/// Exit status of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Config = 1,
    ResourceCap = 2,
    PropertyFailure = 3,
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    ResourceCap(String),
    Failed(Error),
}

impl RunError {
    pub fn status(&self) -> ExitStatus {
        match self {
            RunError::Config(_) | RunError::Failed(_) => ExitStatus::Config,
            RunError::ResourceCap(_) => ExitStatus::ResourceCap,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::ResourceCap(m) => write!(f, "resource cap: {m}"),
            RunError::Failed(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        if e.resource_cap {
            RunError::ResourceCap(e.to_string())
        } else {
            RunError::Config(e)
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceCap(m) => RunError::ResourceCap(m),
            e @ Error::TooLargeForExact { .. } => RunError::ResourceCap(e.to_string()),
            other => RunError::Failed(other),
        }
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub summary: String,
    pub table: Option<EntropyTable>,
    pub passed: bool,
}

fn describe_estimate(label: &str, e: &EntropyEstimate) -> String {
    let mut s = format!("{label} {} ci {}", e.value, e.ci_halfwidth);
    if let Some(eps) = e.epsilon_used {
        let _ = write!(s, " eps {eps}");
    }
    let how = match e.extrapolation {
        Extrapolation::LinearInverseN => "linear-in-1/n",
        Extrapolation::None => "none",
    };
    let _ = write!(s, " extrapolation {how} n_max {}", e.n_max);
    if let Some((lo, hi)) = e.bracket {
        let _ = write!(s, " bracket [{lo}, {hi}]");
    }
    s
}

fn header(system: &dyn ModelSystem) -> String {
    let oracle = system.oracle();
    format!("system {} ({})\noracle {} ({})\n", system.name(), system.params(), oracle.value, oracle.derivation)
}

fn top_config(cfg: &ExperimentConfig) -> TopEntropyConfig {
    TopEntropyConfig {
        n_list: cfg.n_list.clone(),
        eps_list: cfg.eps_list.clone(),
        omega_samples: cfg.omega_samples,
        master_seed: cfg.master_seed,
        method: cfg.method,
        exact_cap: cfg.exact_cap,
    }
}

fn partitions(system: &dyn ModelSystem, cfg: &ExperimentConfig) -> Result<Vec<CanonicalPartition>, ConfigError> {
    if cfg.partitions.is_empty() {
        return Ok(system.canonical_partitions());
    }
    cfg.partitions
        .iter()
        .map(|name| {
            Ok(system.partition_named(name).unwrap_or(CanonicalPartition {
                partition: resolve_partition(system, name)?,
                generating: false,
            }))
        })
        .collect()
}

pub fn list_systems() -> RunOutput {
    let mut s = String::new();
    for (name, params) in SYSTEM_NAMES {
        let system = build_system(name, &Default::default()).expect("defaults are valid");
        let parts: Vec<String> = system
            .canonical_partitions()
            .iter()
            .map(|p| p.partition.name().to_string() + if p.generating { "*" } else { "" })
            .collect();
        let _ = writeln!(
            s,
            "{name}\tparams: {params}\toracle: {}\tpartitions: {}",
            system.oracle().value,
            parts.join(" ")
        );
    }
    s.push_str("(* marks a generating partition)\n");
    RunOutput {
        summary: s,
        table: None,
        passed: true,
    }
}

pub fn estimate_top(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let system = cfg.build_system();
    let (estimate, table) = estimate_h_top(system.as_ref(), &top_config(cfg))?;
    let summary = format!("{}{}\n", header(system.as_ref()), describe_estimate("h_top", &estimate));
    Ok(RunOutput {
        summary,
        table: Some(table),
        passed: true,
    })
}

pub fn estimate_fiber(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let system = cfg.build_system();
    let mut summary = header(system.as_ref());
    let mut table = EntropyTable::new(system.name());
    for p in partitions(system.as_ref(), cfg)? {
        let (estimate, rows) = estimate_fiber_entropy(
            system.as_ref(),
            |w: &_| system.invariant_measure(w),
            &p.partition,
            &cfg.n_list,
            cfg.omega_samples,
            cfg.master_seed,
        )?;
        table.extend(rows)?;
        summary.push_str(&describe_estimate(&format!("fiber {}", p.partition.name()), &estimate));
        summary.push('\n');
    }
    Ok(RunOutput {
        summary,
        table: Some(table),
        passed: true,
    })
}

pub fn varprin(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let system = cfg.build_system();
    let parts = partitions(system.as_ref(), cfg)?;
    let report = variational_audit(system.as_ref(), &top_config(cfg), &cfg.n_list, &parts)?;
    Ok(RunOutput {
        summary: report.render(),
        passed: report.pass,
        table: Some(report.table),
    })
}

pub fn audit(seed: u64) -> RunOutput {
    let summary = run_audit(&AuditConfig {
        seed,
        ..AuditConfig::default()
    });
    RunOutput {
        summary: summary.render(),
        table: None,
        passed: summary.passed(),
    }
}
