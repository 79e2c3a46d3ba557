//! Driving environments, finite fibers, cocycles, the skew product and the
//! Bowen metric.
//!
//! A driving point ω is an i.i.d. symbol field over the group, realized
//! lazily: the symbol at `g` is a hash of the per-sample seed and the shifted
//! site, so any bounded region can be evaluated and shifting ω only moves an
//! offset. Fibers are finite metric spaces whose points are identified by
//! `PointId`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{FolnerWindow, GroupElement};

pub type PointId = u64;

/// Fibers larger than this are never enumerated point by point.
pub const ENUMERATION_CAP: u128 = 1 << 24;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `sample_index`-th environment drawn under `master_seed`:
/// `mix64(master_seed ^ mix64(sample_index))`. Each sample depends only on its
/// own index, so samples can be drawn in any order or in parallel.
pub fn derive_sample_seed(master_seed: u64, sample_index: u64) -> u64 {
    mix64(master_seed ^ mix64(sample_index))
}

/// A distribution over the symbols `0..k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolLaw {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SymbolLaw {
    /// Normalizes nonnegative weights into a law.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty symbol law".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "symbol weights must be finite and nonnegative: {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("symbol weights sum to zero".into()));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self {
            weights,
            cumulative,
        })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(&vec![1.0; k])
    }

    pub fn point_mass(k: usize, symbol: usize) -> Result<Self> {
        if symbol >= k {
            return Err(Error::param("symbol", format!("{symbol} >= alphabet size {k}")));
        }
        let mut w = vec![0.0; k];
        w[symbol] = 1.0;
        Self::new(&w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alphabet_size(&self) -> usize {
        self.weights.len()
    }

    /// True when a single symbol carries all the mass (Ω is a point).
    pub fn is_degenerate(&self) -> bool {
        self.weights.iter().filter(|&&w| w > 0.0).count() == 1
    }

    /// Inverse-CDF lookup of a uniform variate in `[0, 1)`.
    pub fn symbol_for(&self, u: f64) -> usize {
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // Guard against rounding in the last cumulative value; never land on a
        // zero-weight trailing symbol.
        let mut idx = idx.min(self.weights.len() - 1);
        while self.weights[idx] == 0.0 && idx > 0 {
            idx -= 1;
        }
        while self.weights[idx] == 0.0 {
            idx += 1;
        }
        idx
    }
}

/// A seeded realization of a driving point ω.
#[derive(Clone, PartialEq)]
pub struct EnvironmentPath {
    seed: u64,
    law: Arc<SymbolLaw>,
    base_offset: GroupElement,
}

impl EnvironmentPath {
    pub fn new(seed: u64, law: Arc<SymbolLaw>, dim: usize) -> Result<Self> {
        Ok(Self {
            seed,
            law,
            base_offset: GroupElement::identity(dim)?,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn law(&self) -> &Arc<SymbolLaw> {
        &self.law
    }

    pub fn base_offset(&self) -> GroupElement {
        self.base_offset
    }

    pub fn dim(&self) -> usize {
        self.base_offset.dim()
    }

    /// The symbol of ω at site `g`; a pure function of seed, law and
    /// `base_offset ∘ g`.
    pub fn symbol_at(&self, g: &GroupElement) -> Result<usize> {
        let site = self.base_offset.compose(g)?;
        Ok(self.symbol_at_site(&site))
    }

    pub(crate) fn symbol_at_site(&self, site: &GroupElement) -> usize {
        if self.law.is_degenerate() {
            return self.law.symbol_for(0.0);
        }
        let c = site.coords();
        let mut h = mix64(self.seed ^ mix64(c[0] as u64));
        if let Some(&b) = c.get(1) {
            h = mix64(h ^ mix64(b as u64).rotate_left(29));
        }
        let u = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        self.law.symbol_for(u)
    }

    /// Symbol at the integer site `t` of a Z-environment.
    pub fn symbol_at_z(&self, t: i64) -> usize {
        let site = GroupElement::z(self.base_offset.coords()[0] + t);
        self.symbol_at_site(&site)
    }
}

impl fmt::Debug for EnvironmentPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnvironmentPath")
            .field("seed", &format_args!("{:#018x}", self.seed))
            .field("base_offset", &self.base_offset)
            .finish()
    }
}

/// Draws the `sample_index`-th environment of a Monte Carlo run.
pub fn sample_environment(
    law: &Arc<SymbolLaw>,
    dim: usize,
    master_seed: u64,
    sample_index: u64,
) -> Result<EnvironmentPath> {
    EnvironmentPath::new(
        derive_sample_seed(master_seed, sample_index),
        Arc::clone(law),
        dim,
    )
}

/// The driving action `h ω`: `(hω).symbol_at(g) = ω.symbol_at(h ∘ g)`.
pub fn shift_environment(h: &GroupElement, omega: &EnvironmentPath) -> Result<EnvironmentPath> {
    Ok(EnvironmentPath {
        seed: omega.seed,
        law: Arc::clone(&omega.law),
        base_offset: omega.base_offset.compose(h)?,
    })
}

/// Base metric of a finite fiber.
#[derive(Debug, Clone, PartialEq)]
pub enum FiberMetric {
    /// Points `i / modulus` on the circle R/Z with arc distance.
    CircleGrid { modulus: u64 },
    /// Points `(x, y) / modulus` on the 2-torus, id `x + modulus * y`, with the
    /// max of the two arc distances.
    TorusGrid { modulus: u64 },
    /// Period-`period` words over `alphabet` symbols, id `Σ x_j alphabet^j`,
    /// with `d(x, y) = 2^-min{|i| : x_i ≠ y_i}` on the bi-infinite periodic
    /// extension.
    PeriodicWords { alphabet: u64, period: u32 },
    /// Arbitrary points on the circle given by coordinates in `[0, 1)`.
    CirclePoints(Arc<[f64]>),
    /// `size` points, all at mutual distance 1.
    Discrete { size: u64 },
}

/// A finite metric model of one fiber `E_ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberModel {
    label: String,
    metric: FiberMetric,
}

fn arc(a: u64, b: u64, modulus: u64) -> u64 {
    let d = a.abs_diff(b);
    d.min(modulus - d)
}

impl FiberModel {
    pub fn new(label: impl Into<String>, metric: FiberMetric) -> Result<Self> {
        match &metric {
            FiberMetric::CircleGrid { modulus } | FiberMetric::TorusGrid { modulus }
                if *modulus == 0 =>
            {
                return Err(Error::param("modulus", "must be positive"));
            }
            FiberMetric::PeriodicWords { alphabet, period } => {
                if *alphabet < 2 || *period == 0 {
                    return Err(Error::param("words", "need alphabet >= 2 and period >= 1"));
                }
                let size = (*alphabet as u128).checked_pow(*period);
                if size.is_none_or(|s| s > u64::MAX as u128 + 1) {
                    return Err(Error::ResourceCap(format!(
                        "{alphabet}^{period} words do not fit 64-bit point ids"
                    )));
                }
            }
            FiberMetric::CirclePoints(pts) => {
                if pts.is_empty() {
                    return Err(Error::param("points", "fiber must be nonempty"));
                }
                if pts.iter().any(|p| !(0.0..1.0).contains(p)) {
                    return Err(Error::param("points", "circle coordinates must lie in [0, 1)"));
                }
                let mut sorted = pts.to_vec();
                sorted.sort_by(f64::total_cmp);
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::param("points", "duplicate circle coordinates"));
                }
            }
            FiberMetric::Discrete { size } if *size == 0 => {
                return Err(Error::param("size", "fiber must be nonempty"));
            }
            _ => {}
        }
        Ok(Self {
            label: label.into(),
            metric,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn metric(&self) -> &FiberMetric {
        &self.metric
    }

    /// Number of points.
    pub fn size(&self) -> u128 {
        match &self.metric {
            FiberMetric::CircleGrid { modulus } => *modulus as u128,
            FiberMetric::TorusGrid { modulus } => (*modulus as u128) * (*modulus as u128),
            FiberMetric::PeriodicWords { alphabet, period } => (*alphabet as u128).pow(*period),
            FiberMetric::CirclePoints(p) => p.len() as u128,
            FiberMetric::Discrete { size } => *size as u128,
        }
    }

    pub fn contains(&self, x: PointId) -> bool {
        (x as u128) < self.size()
    }

    pub fn check_point(&self, x: PointId) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::PointOutOfRange {
                point: x,
                size: self.size(),
            })
        }
    }

    /// All point ids in increasing order, refusing fibers above `cap`.
    pub fn enumerate(&self, cap: u128) -> Result<Vec<PointId>> {
        let size = self.size();
        if size > cap {
            return Err(Error::ResourceCap(format!(
                "fiber `{}` has {size} points, enumeration cap is {cap}",
                self.label
            )));
        }
        Ok((0..size as u64).collect())
    }

    /// Base distance `d(x, y)`.
    pub fn distance(&self, x: PointId, y: PointId) -> f64 {
        if x == y {
            return 0.0;
        }
        match &self.metric {
            FiberMetric::CircleGrid { modulus } => arc(x, y, *modulus) as f64 / *modulus as f64,
            FiberMetric::TorusGrid { modulus } => {
                let m = *modulus;
                let d = arc(x % m, y % m, m).max(arc(x / m, y / m, m));
                d as f64 / m as f64
            }
            FiberMetric::PeriodicWords { alphabet, period } => {
                let p = *period as u64;
                let mut best = u64::MAX;
                let (mut a, mut b) = (x, y);
                for j in 0..p {
                    if a % alphabet != b % alphabet {
                        best = best.min(j.min(p - j));
                    }
                    a /= alphabet;
                    b /= alphabet;
                }
                (-(best as f64)).exp2()
            }
            FiberMetric::CirclePoints(pts) => {
                let d = (pts[x as usize] - pts[y as usize]).abs();
                d.min(1.0 - d)
            }
            FiberMetric::Discrete { .. } => 1.0,
        }
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        match &self.metric {
            FiberMetric::CircleGrid { modulus } | FiberMetric::TorusGrid { modulus } => {
                (*modulus / 2) as f64 / *modulus as f64
            }
            FiberMetric::PeriodicWords { .. } | FiberMetric::Discrete { .. } => {
                if self.size() > 1 {
                    1.0
                } else {
                    0.0
                }
            }
            FiberMetric::CirclePoints(pts) => {
                let mut best = 0.0f64;
                for (i, a) in pts.iter().enumerate() {
                    for b in &pts[i + 1..] {
                        let d = (a - b).abs();
                        best = best.max(d.min(1.0 - d));
                    }
                }
                best
            }
        }
    }

    /// Grid spacing of grid fibers.
    pub fn grid_spacing(&self) -> Option<f64> {
        match &self.metric {
            FiberMetric::CircleGrid { modulus } | FiberMetric::TorusGrid { modulus } => {
                Some(1.0 / *modulus as f64)
            }
            _ => None,
        }
    }

    /// Circle coordinates of a point for fibers whose metric is the max of arc
    /// distances over those coordinates; `None` otherwise.
    pub fn circle_coords(&self, x: PointId) -> Option<([f64; 2], usize)> {
        match &self.metric {
            FiberMetric::CircleGrid { modulus } => Some(([x as f64 / *modulus as f64, 0.0], 1)),
            FiberMetric::TorusGrid { modulus } => {
                let m = *modulus as f64;
                Some(([(x % modulus) as f64 / m, (x / modulus) as f64 / m], 2))
            }
            FiberMetric::CirclePoints(pts) => Some(([pts[x as usize], 0.0], 1)),
            _ => None,
        }
    }

    /// Human-readable point descriptor.
    pub fn describe(&self, x: PointId) -> String {
        match &self.metric {
            FiberMetric::CircleGrid { modulus } => format!("{x}/{modulus}"),
            FiberMetric::TorusGrid { modulus } => {
                format!("({}, {})/{modulus}", x % modulus, x / modulus)
            }
            FiberMetric::PeriodicWords { alphabet, period } => {
                let mut a = x;
                (0..*period)
                    .map(|_| {
                        let s = a % alphabet;
                        a /= alphabet;
                        char::from_digit(s as u32, 36).unwrap_or('?')
                    })
                    .collect()
            }
            FiberMetric::CirclePoints(pts) => format!("{}", pts[x as usize]),
            FiberMetric::Discrete { .. } => format!("#{x}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CocycleDomain {
    /// Every group element acts (invertible fiber maps).
    Group,
    /// Only elements with nonnegative coordinates act.
    ForwardMonoid,
}

impl CocycleDomain {
    pub fn contains(&self, g: &GroupElement) -> bool {
        match self {
            CocycleDomain::Group => true,
            CocycleDomain::ForwardMonoid => g.is_forward(),
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            CocycleDomain::Group => "whole group",
            CocycleDomain::ForwardMonoid => "forward monoid",
        }
    }
}

/// A bundle random dynamical system with finite fibers: the driving law, the
/// fiber over each ω and the cocycle `F_{g,ω}: E_ω → E_{gω}`.
pub trait RandomDynamicalSystem: Send + Sync {
    fn name(&self) -> &str;

    fn group_dim(&self) -> usize;

    fn domain(&self) -> CocycleDomain;

    fn law(&self) -> &Arc<SymbolLaw>;

    /// The fiber `E_ω`.
    fn fiber(&self, omega: &EnvironmentPath) -> &FiberModel;

    /// Raw evaluation of `F_{g,ω} x`. Callers should use [`apply_cocycle`],
    /// which validates the domain and the point first.
    fn evaluate(&self, g: &GroupElement, omega: &EnvironmentPath, x: PointId) -> PointId;

    /// True when the fiber is a `PeriodicWords` model and the cocycle is the
    /// left shift `(F_{g,ω} x)_i = x_{i+g}`.
    fn is_word_shift(&self) -> bool {
        false
    }

    /// Batch form of [`RandomDynamicalSystem::evaluate`].
    fn evaluate_many(&self, g: &GroupElement, omega: &EnvironmentPath, xs: &[PointId]) -> Vec<PointId> {
        xs.iter().map(|&x| self.evaluate(g, omega, x)).collect()
    }

    /// The `sample_index`-th environment drawn from the driving law.
    fn sample(&self, master_seed: u64, sample_index: u64) -> EnvironmentPath {
        sample_environment(self.law(), self.group_dim(), master_seed, sample_index)
            .expect("systems act by Z or Z^2")
    }

    /// Shorthand for `sample(0, sample_index)`.
    fn environment(&self, sample_index: u64) -> EnvironmentPath {
        self.sample(0, sample_index)
    }
}

fn check_element<S: RandomDynamicalSystem + ?Sized>(system: &S, g: &GroupElement) -> Result<()> {
    if g.dim() != system.group_dim() {
        return Err(Error::DimensionMismatch {
            left: system.group_dim(),
            right: g.dim(),
        });
    }
    let domain = system.domain();
    if !domain.contains(g) {
        return Err(Error::Domain {
            element: g.to_string(),
            domain: domain.describe(),
        });
    }
    Ok(())
}

pub fn check_window<S: RandomDynamicalSystem + ?Sized>(system: &S, window: &FolnerWindow) -> Result<()> {
    window.iter().try_for_each(|g| check_element(system, g))
}

/// `F_{g,ω} x`, with domain and membership checks.
pub fn apply_cocycle<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    g: &GroupElement,
    omega: &EnvironmentPath,
    x: PointId,
) -> Result<PointId> {
    check_element(system, g)?;
    system.fiber(omega).check_point(x)?;
    Ok(system.evaluate(g, omega, x))
}

/// The skew product `Θ_g(ω, x) = (gω, F_{g,ω} x)`.
pub fn skew_step<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    g: &GroupElement,
    omega: &EnvironmentPath,
    x: PointId,
) -> Result<(EnvironmentPath, PointId)> {
    let y = apply_cocycle(system, g, omega, x)?;
    Ok((shift_environment(g, omega)?, y))
}

/// `d^ω_F(x, y) = max_{s ∈ F} d(F_{s,ω} x, F_{s,ω} y)`.
pub fn bowen_distance<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    x: PointId,
    y: PointId,
) -> Result<f64> {
    check_window(system, window)?;
    let fiber = system.fiber(omega);
    fiber.check_point(x)?;
    fiber.check_point(y)?;
    let mut best = 0.0f64;
    for s in window.iter() {
        let (fx, fy) = (system.evaluate(s, omega, x), system.evaluate(s, omega, y));
        best = best.max(system.fiber(&shift_environment(s, omega)?).distance(fx, fy));
    }
    Ok(best)
}

/// Checks `F_{g2, g1 ω} ∘ F_{g1, ω} = F_{g2 g1, ω}` at `x`, exactly.
pub fn cocycle_audit<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    g1: &GroupElement,
    g2: &GroupElement,
    x: PointId,
) -> Result<bool> {
    let first = apply_cocycle(system, g1, omega, x)?;
    let shifted = shift_environment(g1, omega)?;
    let lhs = apply_cocycle(system, g2, &shifted, first)?;
    let rhs = apply_cocycle(system, &g2.compose(g1)?, omega, x)?;
    Ok(lhs == rhs)
}

/// Checks `F_{e,ω} x = x`.
pub fn identity_audit<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    x: PointId,
) -> Result<bool> {
    let e = GroupElement::identity(system.group_dim())?;
    Ok(apply_cocycle(system, &e, omega, x)? == x)
}

/// Images of a fixed list of points under every element of a window, so Bowen
/// distances among them cost one table lookup per window element.
#[derive(Debug, Clone)]
pub struct WindowOrbits {
    fibers: Vec<FiberModel>,
    points: Vec<PointId>,
    images: Vec<Vec<PointId>>,
}

impl WindowOrbits {
    pub fn new<S: RandomDynamicalSystem + ?Sized>(
        system: &S,
        omega: &EnvironmentPath,
        window: &FolnerWindow,
        points: Vec<PointId>,
    ) -> Result<Self> {
        check_window(system, window)?;
        let base = system.fiber(omega);
        for &x in &points {
            base.check_point(x)?;
        }
        let mut fibers = Vec::with_capacity(window.len());
        let mut images = Vec::with_capacity(window.len());
        for s in window.iter() {
            fibers.push(system.fiber(&shift_environment(s, omega)?).clone());
            images.push(system.evaluate_many(s, omega, &points));
        }
        Ok(Self {
            fibers,
            points,
            images,
        })
    }

    /// Orbits of every point of the fiber.
    pub fn whole_fiber<S: RandomDynamicalSystem + ?Sized>(
        system: &S,
        omega: &EnvironmentPath,
        window: &FolnerWindow,
    ) -> Result<Self> {
        let points = system.fiber(omega).enumerate(ENUMERATION_CAP)?;
        Self::new(system, omega, window, points)
    }

    pub fn points(&self) -> &[PointId] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window_len(&self) -> usize {
        self.images.len()
    }

    /// `F_{s,ω}` applied to the `i`-th point, `s` the `t`-th window element.
    pub fn image(&self, t: usize, i: usize) -> PointId {
        self.images[t][i]
    }

    pub fn fiber_at(&self, t: usize) -> &FiberModel {
        &self.fibers[t]
    }

    /// Bowen distance between the `i`-th and `j`-th points.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.images
            .iter()
            .zip(&self.fibers)
            .map(|(img, fiber)| fiber.distance(img[i], img[j]))
            .fold(0.0, f64::max)
    }

    /// `d^ω_F > eps`, stopping at the first window element that separates.
    pub fn separated(&self, i: usize, j: usize, eps: f64) -> bool {
        self.images
            .iter()
            .zip(&self.fibers)
            .rev()
            .any(|(img, fiber)| fiber.distance(img[i], img[j]) > eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_law_validation() {
        assert!(SymbolLaw::new(&[]).is_err());
        assert!(SymbolLaw::new(&[1.0, -1.0]).is_err());
        assert!(SymbolLaw::new(&[0.0, 0.0]).is_err());
        let law = SymbolLaw::new(&[1.0, 3.0]).unwrap();
        assert_eq!(law.weights(), &[0.25, 0.75]);
        assert_eq!(law.symbol_for(0.0), 0);
        assert_eq!(law.symbol_for(0.2499), 0);
        assert_eq!(law.symbol_for(0.25), 1);
        assert_eq!(law.symbol_for(0.999_999), 1);
    }

    #[test]
    fn zero_weight_symbols_never_drawn() {
        let law = SymbolLaw::new(&[0.0, 1.0, 0.0]).unwrap();
        for u in [0.0, 0.5, 0.999_999_999] {
            assert_eq!(law.symbol_for(u), 1);
        }
    }

    #[test]
    fn environment_is_deterministic() {
        let law = Arc::new(SymbolLaw::uniform(3).unwrap());
        let a = sample_environment(&law, 1, 7, 4).unwrap();
        let b = sample_environment(&law, 1, 7, 4).unwrap();
        for t in -100..=100 {
            let g = GroupElement::z(t);
            assert_eq!(a.symbol_at(&g).unwrap(), b.symbol_at(&g).unwrap());
        }
    }

    #[test]
    fn distinct_samples_differ() {
        let law = Arc::new(SymbolLaw::uniform(2).unwrap());
        for seed in 0..20u64 {
            let a = sample_environment(&law, 1, seed, 0).unwrap();
            let b = sample_environment(&law, 1, seed, 1).unwrap();
            assert!((0..100).any(|t| a.symbol_at_z(t) != b.symbol_at_z(t)));
        }
    }

    #[test]
    fn point_mass_law_is_constant() {
        let law = Arc::new(SymbolLaw::point_mass(4, 2).unwrap());
        let w = sample_environment(&law, 2, 99, 3).unwrap();
        for a in -5..5 {
            for b in -5..5 {
                assert_eq!(w.symbol_at(&GroupElement::z2(a, b)).unwrap(), 2);
            }
        }
    }

    #[test]
    fn shift_examples() {
        let law = Arc::new(SymbolLaw::uniform(5).unwrap());
        let w = sample_environment(&law, 1, 1, 0).unwrap();
        let same = shift_environment(&GroupElement::z(0), &w).unwrap();
        let back = shift_environment(
            &GroupElement::z(-7),
            &shift_environment(&GroupElement::z(7), &w).unwrap(),
        )
        .unwrap();
        let twice = shift_environment(
            &GroupElement::z(5),
            &shift_environment(&GroupElement::z(3), &w).unwrap(),
        )
        .unwrap();
        let once = shift_environment(&GroupElement::z(8), &w).unwrap();
        for t in 0..100 {
            let g = GroupElement::z(t);
            assert_eq!(same.symbol_at(&g).unwrap(), w.symbol_at(&g).unwrap());
            assert_eq!(back.symbol_at(&g).unwrap(), w.symbol_at(&g).unwrap());
            assert_eq!(twice.symbol_at(&g).unwrap(), once.symbol_at(&g).unwrap());
        }
    }

    #[test]
    fn circle_grid_distances_are_exact() {
        let f = FiberModel::new("c", FiberMetric::CircleGrid { modulus: 64 }).unwrap();
        assert_eq!(f.distance(0, 32), 0.5);
        assert_eq!(f.distance(1, 63), 2.0 / 64.0);
        assert_eq!(f.distance(5, 5), 0.0);
        assert_eq!(f.diameter(), 0.5);
    }

    #[test]
    fn word_metric_uses_nearest_disagreement() {
        // period 4, binary: ids are little-endian words x_0 x_1 x_2 x_3
        let f = FiberModel::new(
            "w",
            FiberMetric::PeriodicWords {
                alphabet: 2,
                period: 4,
            },
        )
        .unwrap();
        assert_eq!(f.distance(0b0000, 0b0001), 1.0);
        assert_eq!(f.distance(0b0000, 0b0010), 0.5);
        assert_eq!(f.distance(0b0000, 0b0100), 0.25);
        // x_3 sits at i = -1 on the periodic extension
        assert_eq!(f.distance(0b0000, 0b1000), 0.5);
        assert_eq!(f.describe(0b0110), "0110");
    }

    #[test]
    fn fiber_rejects_bad_models() {
        assert!(FiberModel::new("x", FiberMetric::CircleGrid { modulus: 0 }).is_err());
        assert!(FiberModel::new(
            "x",
            FiberMetric::PeriodicWords {
                alphabet: 3,
                period: 64
            }
        )
        .is_err());
        assert!(FiberModel::new("x", FiberMetric::CirclePoints(Arc::from(vec![0.1, 0.1]))).is_err());
        assert!(FiberModel::new("x", FiberMetric::CirclePoints(Arc::from(vec![1.2]))).is_err());
    }
}
