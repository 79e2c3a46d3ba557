//! Separated-set and fiber entropy of random dynamical systems over `Z` and
//! `Z^2`.
//!
//! A system supplies a driving law, a finite metric fiber over each
//! environment and a cocycle `F_{g,ω}`. On top of that the crate computes
//! Bowen-metric separated sets, Monte Carlo entropy rates and their
//! extrapolation, partition entropies under invariant fiber measures, and an
//! audit of the variational inequality against closed-form oracles.

pub mod audit;
pub mod entropy;
pub mod error;
pub mod group;
pub mod rds;
pub mod separated;
pub mod systems;

pub use error::{Error, Result};
pub use group::{compose, folner_box, folner_defect, FolnerWindow, GroupElement, WindowKind};
pub use rds::{
    apply_cocycle, bowen_distance, cocycle_audit, identity_audit, sample_environment,
    shift_environment, skew_step, CocycleDomain, EnvironmentPath, FiberMetric, FiberModel, PointId,
    RandomDynamicalSystem, SymbolLaw, WindowOrbits,
};
pub use separated::{
    is_separated, max_separated_exact, max_separated_greedy, separated_count, spanning_number,
    SeparatedSetResult, SepCount, SolverMethod, DEFAULT_EXACT_CAP, MAX_EXACT_CAP,
};
pub use systems::{build_system, oracle_entropy, CanonicalPartition, ModelSystem, Oracle};
