use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rds::{FiberMetric, FiberModel, PointId, ENUMERATION_CAP};

/// Normalization tolerance for stored measures.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Neumaier summation; large uniform measures would otherwise drift past
/// [`MASS_TOLERANCE`].
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

/// A finitely supported probability measure on one fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalFiberMeasure {
    /// Sorted by point id, no duplicates, strictly positive weights.
    weights: Vec<(PointId, f64)>,
}

impl EmpiricalFiberMeasure {
    /// Builds a measure from (point, weight) pairs; weights on repeated points
    /// are summed and zero weights dropped. The total must be 1 within
    /// [`MASS_TOLERANCE`].
    pub fn new(pairs: impl IntoIterator<Item = (PointId, f64)>) -> Result<Self> {
        let mut map: BTreeMap<PointId, f64> = BTreeMap::new();
        for (x, w) in pairs {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidDistribution(format!("weight {w} on point {x}")));
            }
            *map.entry(x).or_insert(0.0) += w;
        }
        let total = compensated_sum(map.values().copied());
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        Ok(Self {
            weights: map.into_iter().filter(|&(_, w)| w > 0.0).collect(),
        })
    }

    pub fn point_mass(x: PointId) -> Self {
        Self {
            weights: vec![(x, 1.0)],
        }
    }

    /// Uniform weights on the distinct ids in `support`.
    pub fn uniform_on(support: &[PointId]) -> Result<Self> {
        let mut ids = support.to_vec();
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let w = 1.0 / ids.len() as f64;
        Ok(Self {
            weights: ids.into_iter().map(|x| (x, w)).collect(),
        })
    }

    /// Uniform measure on every point of an enumerable fiber.
    pub fn uniform_fiber(fiber: &FiberModel) -> Result<Self> {
        let ids = fiber.enumerate(ENUMERATION_CAP)?;
        Self::uniform_on(&ids)
    }

    pub fn weights(&self) -> &[(PointId, f64)] {
        &self.weights
    }

    pub fn support(&self) -> impl Iterator<Item = PointId> + '_ {
        self.weights.iter().map(|&(x, _)| x)
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.weights.iter().map(|&(_, w)| w))
    }

    pub fn mass_of(&self, x: PointId) -> f64 {
        self.weights
            .binary_search_by_key(&x, |&(p, _)| p)
            .map_or(0.0, |i| self.weights[i].1)
    }

    /// Image measure under `map`; weights of colliding images are summed.
    pub fn pushforward(&self, mut map: impl FnMut(PointId) -> PointId) -> Self {
        let mut out: BTreeMap<PointId, f64> = BTreeMap::new();
        for &(x, w) in &self.weights {
            *out.entry(map(x)).or_insert(0.0) += w;
        }
        Self {
            weights: out.into_iter().collect(),
        }
    }

    /// `sup_A |μ(A) - ν(A)| = ½ Σ |μ(x) - ν(x)|`.
    pub fn total_variation(&self, other: &Self) -> f64 {
        let mut diff: BTreeMap<PointId, f64> = self.weights.iter().copied().collect();
        for &(x, w) in &other.weights {
            *diff.entry(x).or_insert(0.0) -= w;
        }
        diff.values().map(|d| d.abs()).sum::<f64>() / 2.0
    }
}

/// Fiber measure attached to a driving point: either listed point by point or
/// a Bernoulli product on word fibers too large to list.
#[derive(Debug, Clone, PartialEq)]
pub enum FiberMeasure {
    Empirical(EmpiricalFiberMeasure),
    /// i.i.d. symbols with the given marginal on every coordinate of a
    /// `PeriodicWords` fiber.
    Bernoulli { marginal: Vec<f64> },
}

impl FiberMeasure {
    /// Lists the measure point by point when the fiber is enumerable.
    pub fn to_empirical(&self, fiber: &FiberModel) -> Result<EmpiricalFiberMeasure> {
        match self {
            FiberMeasure::Empirical(m) => Ok(m.clone()),
            FiberMeasure::Bernoulli { marginal } => {
                let FiberMetric::PeriodicWords { alphabet, period } = *fiber.metric() else {
                    return Err(Error::param("measure", "Bernoulli measures live on word fibers"));
                };
                if marginal.len() as u64 != alphabet {
                    return Err(Error::LengthMismatch {
                        left: marginal.len(),
                        right: alphabet as usize,
                    });
                }
                let ids = fiber.enumerate(ENUMERATION_CAP)?;
                let k = alphabet;
                EmpiricalFiberMeasure::new(ids.into_iter().map(|x| {
                    let mut a = x;
                    let mut w = 1.0;
                    for _ in 0..period {
                        w *= marginal[(a % k) as usize];
                        a /= k;
                    }
                    (x, w)
                }))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks_mass() {
        assert!(EmpiricalFiberMeasure::new([(0, 0.5), (1, 0.4)]).is_err());
        assert!(EmpiricalFiberMeasure::new([(0, -0.5), (1, 1.5)]).is_err());
        let m = EmpiricalFiberMeasure::new([(3, 0.25), (1, 0.5), (3, 0.25), (7, 0.0)]).unwrap();
        assert_eq!(m.weights(), &[(1, 0.5), (3, 0.5)]);
        assert_eq!(m.mass_of(3), 0.5);
        assert_eq!(m.mass_of(7), 0.0);
    }

    #[test]
    fn uniform_and_pushforward() {
        let m = EmpiricalFiberMeasure::uniform_on(&[4, 2, 4, 9]).unwrap();
        assert_eq!(m.support_len(), 3);
        let collapsed = m.pushforward(|_| 0);
        assert_eq!(collapsed, EmpiricalFiberMeasure::point_mass(0));
        assert!((m.total_variation(&collapsed) - 1.0).abs() < 1e-15);
        assert_eq!(m.total_variation(&m), 0.0);
    }

    #[test]
    fn bernoulli_lists_product_weights() {
        let fiber = FiberModel::new(
            "w",
            FiberMetric::PeriodicWords {
                alphabet: 2,
                period: 3,
            },
        )
        .unwrap();
        let m = FiberMeasure::Bernoulli {
            marginal: vec![0.25, 0.75],
        }
        .to_empirical(&fiber)
        .unwrap();
        assert_eq!(m.support_len(), 8);
        assert!((m.mass_of(0) - 0.25f64.powi(3)).abs() < 1e-15);
        assert!((m.mass_of(0b101) - 0.75 * 0.75 * 0.25).abs() < 1e-15);
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
    }
}
