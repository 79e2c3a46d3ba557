//! Shannon entropy, conditional partition entropy and the log-sum-exp bound.

use std::collections::BTreeMap;

use crate::entropy::measure::{compensated_sum, EmpiricalFiberMeasure};
use crate::entropy::partition::PartitionSpec;
use crate::error::{Error, Result};
use crate::rds::FiberModel;

/// Allowed deviation of a probability vector's total from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

fn check_probability_vector(p: &[f64]) -> Result<()> {
    if let Some(bad) = p.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidDistribution(format!("weight {bad}")));
    }
    let total = compensated_sum(p.iter().copied());
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
    }
    Ok(())
}

/// `-Σ p log p` in nats, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    check_probability_vector(p)?;
    Ok(entropy_of_masses(p.iter().copied()))
}

/// `-Σ p log p` without validation; zero masses are skipped.
pub(crate) fn entropy_of_masses(p: impl IntoIterator<Item = f64>) -> f64 {
    let h = compensated_sum(p.into_iter().filter(|&w| w > 0.0).map(|w| -w * w.ln()));
    h.max(0.0)
}

/// Both sides of `Σ p_m (a_m - log p_m) ≤ log Σ e^{a_m}`. Terms with `p_m = 0`
/// contribute nothing to the left side.
pub fn entropy_bound_check(p: &[f64], a: &[f64]) -> Result<(f64, f64)> {
    if p.len() != a.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: a.len(),
        });
    }
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty probability vector".into()));
    }
    check_probability_vector(p)?;
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("a", "entries must be finite"));
    }
    let lhs = compensated_sum(
        p.iter()
            .zip(a)
            .filter(|(&pm, _)| pm > 0.0)
            .map(|(&pm, &am)| pm * (am - pm.ln())),
    );
    let top = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rhs = top + compensated_sum(a.iter().map(|&am| (am - top).exp())).ln();
    Ok((lhs, rhs))
}

/// `H_μ(α)`.
pub fn partition_entropy(
    measure: &EmpiricalFiberMeasure,
    alpha: &PartitionSpec,
    fiber: &FiberModel,
) -> Result<f64> {
    alpha.validate(fiber)?;
    let mut masses = vec![0.0; alpha.cell_count()];
    for &(x, w) in measure.weights() {
        fiber.check_point(x)?;
        masses[alpha.cell_of(fiber, x)] += w;
    }
    Ok(entropy_of_masses(masses))
}

/// `H_μ(α | C) = -Σ_m Σ_n μ(C_m ∩ A_n) log(μ(C_m ∩ A_n) / μ(C_m))`; cells of
/// zero mass contribute nothing.
pub fn conditional_partition_entropy(
    measure: &EmpiricalFiberMeasure,
    alpha: &PartitionSpec,
    given: &PartitionSpec,
    fiber: &FiberModel,
) -> Result<f64> {
    alpha.validate(fiber)?;
    given.validate(fiber)?;
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut marginal = vec![0.0; given.cell_count()];
    for &(x, w) in measure.weights() {
        fiber.check_point(x)?;
        let c = given.cell_of(fiber, x);
        *joint.entry((c, alpha.cell_of(fiber, x))).or_insert(0.0) += w;
        marginal[c] += w;
    }
    let h = compensated_sum(
        joint
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .map(|((c, _), w)| -w * (w / marginal[c]).ln()),
    );
    Ok(h.max(0.0))
}
