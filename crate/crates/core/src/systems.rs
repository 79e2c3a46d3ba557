//! Concrete random dynamical systems with known entropy.
//!
//! Every fiber is an exact finite set (periodic words or rational grids) and
//! every cocycle is evaluated in integer arithmetic, so identity and cocycle
//! laws can be checked for exact equality.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::entropy::measure::{EmpiricalFiberMeasure, FiberMeasure};
use crate::entropy::partition::PartitionSpec;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::rds::{
    CocycleDomain, EnvironmentPath, FiberMetric, FiberModel, PointId, RandomDynamicalSystem,
    SymbolLaw,
};

/// Closed-form entropy of a model system.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    pub value: f64,
    pub derivation: String,
}

/// A partition shipped with a model system.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPartition {
    pub partition: PartitionSpec,
    /// Iterated joins separate points, so its fiber entropy attains the
    /// supremum.
    pub generating: bool,
}

/// A random dynamical system bundled with its invariant fiber measures,
/// canonical partitions and entropy oracle.
pub trait ModelSystem: RandomDynamicalSystem {
    /// Parameter string, e.g. `k=2,m=1,n_max=64`.
    fn params(&self) -> String;

    /// Fiber measure `μ_ω` of the invariant measure's disintegration.
    fn invariant_measure(&self, omega: &EnvironmentPath) -> Result<FiberMeasure>;

    fn canonical_partitions(&self) -> Vec<CanonicalPartition>;

    fn oracle(&self) -> Oracle;

    fn partition_named(&self, name: &str) -> Option<CanonicalPartition> {
        self.canonical_partitions()
            .into_iter()
            .find(|p| p.partition.name() == name)
    }
}

/// Stored closed-form entropy of a system.
pub fn oracle_entropy<S: ModelSystem + ?Sized>(system: &S) -> Oracle {
    system.oracle()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn deterministic_law() -> Arc<SymbolLaw> {
    Arc::new(SymbolLaw::point_mass(1, 0).expect("one-symbol law"))
}

/// Two-sided full shift on `k` symbols, modeled on its period-`P` points with
/// `P = n_max + 2m - 2`, so that `Sep(F_n, 2^-m) = k^(n + 2m - 2)` for every
/// `n ≤ n_max`. Ω is a single point.
#[derive(Debug, Clone)]
pub struct FullShift {
    name: String,
    alphabet: u64,
    resolution: u32,
    n_max: usize,
    period: u32,
    fiber: FiberModel,
    law: Arc<SymbolLaw>,
}

pub fn make_full_shift(k: u64, m: u32, n_max: usize) -> Result<FullShift> {
    if k < 2 {
        return Err(Error::param("k", "alphabet needs at least 2 symbols"));
    }
    if m == 0 {
        return Err(Error::param("m", "resolution exponent must be at least 1"));
    }
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    let period = (n_max as u64 + 2 * m as u64 - 2).max(1);
    if period > u32::MAX as u64 {
        return Err(Error::ResourceCap(format!("period {period}")));
    }
    let fiber = FiberModel::new(
        format!("{k}-ary words of period {period}"),
        FiberMetric::PeriodicWords {
            alphabet: k,
            period: period as u32,
        },
    )?;
    Ok(FullShift {
        name: "full-shift".into(),
        alphabet: k,
        resolution: m,
        n_max,
        period: period as u32,
        fiber,
        law: deterministic_law(),
    })
}

impl FullShift {
    pub fn alphabet(&self) -> u64 {
        self.alphabet
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    /// `ε = 2^-m`.
    pub fn epsilon(&self) -> f64 {
        (-(self.resolution as f64)).exp2()
    }

    /// `k^(n + 2m - 2)`.
    pub fn closed_form_sep(&self, n: usize) -> u128 {
        (self.alphabet as u128).pow(n as u32 + 2 * self.resolution - 2)
    }
}

impl RandomDynamicalSystem for FullShift {
    fn name(&self) -> &str {
        &self.name
    }

    fn group_dim(&self) -> usize {
        1
    }

    fn domain(&self) -> CocycleDomain {
        CocycleDomain::Group
    }

    fn law(&self) -> &Arc<SymbolLaw> {
        &self.law
    }

    fn fiber(&self, _omega: &EnvironmentPath) -> &FiberModel {
        &self.fiber
    }

    fn is_word_shift(&self) -> bool {
        true
    }

    /// `(σ^g x)_i = x_{i+g}`: rotate the digit string by `g` places.
    fn evaluate(&self, g: &GroupElement, _omega: &EnvironmentPath, x: PointId) -> PointId {
        let p = self.period as i64;
        let r = g.coords()[0].rem_euclid(p) as u32;
        let k = self.alphabet as u128;
        let low = k.pow(r);
        let x = x as u128;
        ((x / low) + (x % low) * k.pow(self.period - r)) as PointId
    }
}

impl ModelSystem for FullShift {
    fn params(&self) -> String {
        format!("k={},m={},n_max={}", self.alphabet, self.resolution, self.n_max)
    }

    fn invariant_measure(&self, _omega: &EnvironmentPath) -> Result<FiberMeasure> {
        Ok(FiberMeasure::Bernoulli {
            marginal: vec![1.0 / self.alphabet as f64; self.alphabet as usize],
        })
    }

    fn canonical_partitions(&self) -> Vec<CanonicalPartition> {
        vec![
            CanonicalPartition {
                partition: PartitionSpec::trivial(),
                generating: false,
            },
            CanonicalPartition {
                partition: PartitionSpec::symbol(self.alphabet as usize),
                generating: true,
            },
        ]
    }

    fn oracle(&self) -> Oracle {
        Oracle {
            value: (self.alphabet as f64).ln(),
            derivation: format!("full shift on {} symbols: h = log k", self.alphabet),
        }
    }
}

/// `x ↦ m(ω_0) x mod 1` on the grid `{j / modulus}`, with `m` drawn i.i.d.
/// from a law over integer multipliers. Forward monoid only.
#[derive(Debug, Clone)]
pub struct RandomExpansion {
    name: String,
    multipliers: Vec<u64>,
    law: Arc<SymbolLaw>,
    modulus: u64,
    fiber: FiberModel,
}

/// Random expansion on the dyadic grid `Z / 2^q`.
pub fn make_random_expansion(multipliers: &[u64], weights: &[f64], q: u32) -> Result<RandomExpansion> {
    if !(2..=40).contains(&q) {
        return Err(Error::param("q", "grid exponent must lie in 2..=40"));
    }
    make_random_expansion_on(multipliers, weights, 1u64 << q)
}

/// Random expansion on the grid `Z / modulus`. The uniform grid measure is
/// exactly invariant iff every multiplier is coprime to `modulus`.
pub fn make_random_expansion_on(
    multipliers: &[u64],
    weights: &[f64],
    modulus: u64,
) -> Result<RandomExpansion> {
    if multipliers.is_empty() || multipliers.iter().any(|&m| m < 2) {
        return Err(Error::param("multipliers", "need at least one multiplier, each >= 2"));
    }
    if multipliers.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: multipliers.len(),
            right: weights.len(),
        });
    }
    if modulus < 2 || modulus as u128 > crate::rds::ENUMERATION_CAP {
        return Err(Error::param("modulus", "grid size must lie in 2..=2^24"));
    }
    let law = Arc::new(SymbolLaw::new(weights)?);
    let name = if law.is_degenerate() && multipliers[law.symbol_for(0.0)] == 2 {
        "doubling"
    } else {
        "random-expansion"
    };
    Ok(RandomExpansion {
        name: name.into(),
        multipliers: multipliers.to_vec(),
        law,
        modulus,
        fiber: FiberModel::new(
            format!("circle grid Z/{modulus}"),
            FiberMetric::CircleGrid { modulus },
        )?,
    })
}

/// The doubling map `x ↦ 2x mod 1` on `Z / 2^q`.
pub fn make_doubling(q: u32) -> Result<RandomExpansion> {
    make_random_expansion(&[2], &[1.0], q)
}

impl RandomExpansion {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn multipliers(&self) -> &[u64] {
        &self.multipliers
    }

    /// The multiplier applied at step `t` of ω.
    pub fn multiplier_at(&self, omega: &EnvironmentPath, t: i64) -> u64 {
        self.multipliers[omega.symbol_at_z(t)]
    }

    /// `Π_{i<t} m(ω_i) mod modulus`.
    fn product(&self, omega: &EnvironmentPath, t: i64) -> u64 {
        (0..t).fold(1 % self.modulus, |acc, i| {
            mul_mod(acc, self.multiplier_at(omega, i), self.modulus)
        })
    }

    /// `E[log m]`.
    pub fn mean_log_multiplier(&self) -> f64 {
        self.law
            .weights()
            .iter()
            .zip(&self.multipliers)
            .map(|(w, &m)| w * (m as f64).ln())
            .sum()
    }
}

impl RandomDynamicalSystem for RandomExpansion {
    fn name(&self) -> &str {
        &self.name
    }

    fn group_dim(&self) -> usize {
        1
    }

    fn domain(&self) -> CocycleDomain {
        CocycleDomain::ForwardMonoid
    }

    fn law(&self) -> &Arc<SymbolLaw> {
        &self.law
    }

    fn fiber(&self, _omega: &EnvironmentPath) -> &FiberModel {
        &self.fiber
    }

    fn evaluate(&self, g: &GroupElement, omega: &EnvironmentPath, x: PointId) -> PointId {
        mul_mod(x, self.product(omega, g.coords()[0]), self.modulus)
    }

    fn evaluate_many(&self, g: &GroupElement, omega: &EnvironmentPath, xs: &[PointId]) -> Vec<PointId> {
        let factor = self.product(omega, g.coords()[0]);
        xs.iter().map(|&x| mul_mod(x, factor, self.modulus)).collect()
    }
}

impl ModelSystem for RandomExpansion {
    fn params(&self) -> String {
        let ms: Vec<String> = self.multipliers.iter().map(u64::to_string).collect();
        let ws: Vec<String> = self.law.weights().iter().map(f64::to_string).collect();
        format!(
            "multipliers={},weights={},modulus={}",
            ms.join(":"),
            ws.join(":"),
            self.modulus
        )
    }

    fn invariant_measure(&self, _omega: &EnvironmentPath) -> Result<FiberMeasure> {
        Ok(FiberMeasure::Empirical(EmpiricalFiberMeasure::uniform_fiber(&self.fiber)?))
    }

    /// Arcs of length at most `1/m` are injectivity domains of `x ↦ mx`, so
    /// arc partitions with at least `max m` cells generate.
    fn canonical_partitions(&self) -> Vec<CanonicalPartition> {
        let top = self
            .multipliers
            .iter()
            .zip(self.law.weights())
            .filter(|(_, &w)| w > 0.0)
            .map(|(&m, _)| m)
            .max()
            .unwrap_or(2);
        let mut cells = vec![2, top];
        cells.dedup();
        let mut out = vec![CanonicalPartition {
            partition: PartitionSpec::trivial(),
            generating: false,
        }];
        out.extend(cells.into_iter().map(|c| CanonicalPartition {
            partition: PartitionSpec::circle_arcs(c),
            generating: c >= top,
        }));
        out
    }

    fn oracle(&self) -> Oracle {
        Oracle {
            value: self.mean_log_multiplier(),
            derivation: "random expansion x -> m(w0) x mod 1: h = E[log m]".into(),
        }
    }
}

type Matrix = [[i64; 2]; 2];

/// `x ↦ A x mod 1` on the torus grid `(Z / 2^q)^2` for a unimodular integer
/// matrix `A`; the whole group acts. Ω is a single point.
#[derive(Debug, Clone)]
pub struct ToralAutomorphism {
    name: String,
    matrix: Matrix,
    inverse: Matrix,
    modulus: u64,
    fiber: FiberModel,
    law: Arc<SymbolLaw>,
}

pub const CAT_MAP: Matrix = [[2, 1], [1, 1]];

pub fn make_toral_automorphism(matrix: Matrix, q: u32) -> Result<ToralAutomorphism> {
    let [[a, b], [c, d]] = matrix;
    let det = a * d - b * c;
    if det.abs() != 1 {
        return Err(Error::param("matrix", format!("determinant {det} is not ±1")));
    }
    if !(1..=12).contains(&q) {
        return Err(Error::param("q", "grid exponent must lie in 1..=12"));
    }
    let modulus = 1u64 << q;
    Ok(ToralAutomorphism {
        name: if matrix == CAT_MAP { "cat-map" } else { "toral" }.into(),
        matrix,
        inverse: [[det * d, -det * b], [-det * c, det * a]],
        modulus,
        fiber: FiberModel::new(
            format!("torus grid (Z/{modulus})^2"),
            FiberMetric::TorusGrid { modulus },
        )?,
        law: deterministic_law(),
    })
}

pub fn make_cat_map(q: u32) -> Result<ToralAutomorphism> {
    make_toral_automorphism(CAT_MAP, q)
}

fn reduce(m: &Matrix, modulus: u64) -> [[u64; 2]; 2] {
    let r = |v: i64| v.rem_euclid(modulus as i64) as u64;
    [[r(m[0][0]), r(m[0][1])], [r(m[1][0]), r(m[1][1])]]
}

fn mat_mul_mod(x: &[[u64; 2]; 2], y: &[[u64; 2]; 2], m: u64) -> [[u64; 2]; 2] {
    let e = |i: usize, j: usize| (mul_mod(x[i][0], y[0][j], m) + mul_mod(x[i][1], y[1][j], m)) % m;
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

impl ToralAutomorphism {
    pub fn matrix(&self) -> Matrix {
        self.matrix
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `A^t mod modulus` for any integer `t`.
    fn power(&self, t: i64) -> [[u64; 2]; 2] {
        let m = self.modulus;
        let mut base = reduce(if t >= 0 { &self.matrix } else { &self.inverse }, m);
        let mut acc = [[1 % m, 0], [0, 1 % m]];
        let mut e = t.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = mat_mul_mod(&acc, &base, m);
            }
            base = mat_mul_mod(&base, &base, m);
            e >>= 1;
        }
        acc
    }

    fn apply(&self, p: &[[u64; 2]; 2], x: PointId) -> PointId {
        let m = self.modulus;
        let (u, v) = (x % m, x / m);
        let nu = (mul_mod(p[0][0], u, m) + mul_mod(p[0][1], v, m)) % m;
        let nv = (mul_mod(p[1][0], u, m) + mul_mod(p[1][1], v, m)) % m;
        nu + m * nv
    }

    /// Spectral radius of the matrix.
    pub fn spectral_radius(&self) -> f64 {
        let [[a, b], [c, d]] = self.matrix;
        let tr = (a + d) as f64;
        let det = (a * d - b * c) as f64;
        let disc = tr * tr - 4.0 * det;
        if disc >= 0.0 {
            let s = disc.sqrt();
            ((tr + s) / 2.0).abs().max(((tr - s) / 2.0).abs())
        } else {
            det.abs().sqrt()
        }
    }
}

impl RandomDynamicalSystem for ToralAutomorphism {
    fn name(&self) -> &str {
        &self.name
    }

    fn group_dim(&self) -> usize {
        1
    }

    fn domain(&self) -> CocycleDomain {
        CocycleDomain::Group
    }

    fn law(&self) -> &Arc<SymbolLaw> {
        &self.law
    }

    fn fiber(&self, _omega: &EnvironmentPath) -> &FiberModel {
        &self.fiber
    }

    fn evaluate(&self, g: &GroupElement, _omega: &EnvironmentPath, x: PointId) -> PointId {
        self.apply(&self.power(g.coords()[0]), x)
    }

    fn evaluate_many(&self, g: &GroupElement, _omega: &EnvironmentPath, xs: &[PointId]) -> Vec<PointId> {
        let p = self.power(g.coords()[0]);
        xs.iter().map(|&x| self.apply(&p, x)).collect()
    }
}

impl ModelSystem for ToralAutomorphism {
    fn params(&self) -> String {
        let [[a, b], [c, d]] = self.matrix;
        format!("matrix={a}:{b}:{c}:{d},modulus={}", self.modulus)
    }

    fn invariant_measure(&self, _omega: &EnvironmentPath) -> Result<FiberMeasure> {
        Ok(FiberMeasure::Empirical(EmpiricalFiberMeasure::uniform_fiber(&self.fiber)?))
    }

    fn canonical_partitions(&self) -> Vec<CanonicalPartition> {
        vec![
            CanonicalPartition {
                partition: PartitionSpec::trivial(),
                generating: false,
            },
            CanonicalPartition {
                partition: PartitionSpec::torus_boxes(2),
                generating: false,
            },
            CanonicalPartition {
                partition: PartitionSpec::torus_boxes(4),
                generating: false,
            },
        ]
    }

    fn oracle(&self) -> Oracle {
        Oracle {
            value: self.spectral_radius().ln().max(0.0),
            derivation: "toral automorphism: h = log of the spectral radius".into(),
        }
    }
}

/// A deterministic system given by an explicit self-map of a small fiber:
/// `F_{t,ω} = f^t`. Permutations act by the whole group, other maps by the
/// forward monoid.
#[derive(Debug, Clone)]
pub struct FiniteMapSystem {
    name: String,
    fiber: FiberModel,
    map: Vec<PointId>,
    inverse: Option<Vec<PointId>>,
    law: Arc<SymbolLaw>,
}

impl FiniteMapSystem {
    pub fn new(name: impl Into<String>, fiber: FiberModel, map: Vec<PointId>) -> Result<Self> {
        if map.len() as u128 != fiber.size() {
            return Err(Error::LengthMismatch {
                left: map.len(),
                right: fiber.size() as usize,
            });
        }
        for &y in &map {
            fiber.check_point(y)?;
        }
        let mut inverse = vec![PointId::MAX; map.len()];
        let mut bijective = true;
        for (x, &y) in map.iter().enumerate() {
            if inverse[y as usize] != PointId::MAX {
                bijective = false;
                break;
            }
            inverse[y as usize] = x as PointId;
        }
        Ok(Self {
            name: name.into(),
            fiber,
            map,
            inverse: bijective.then_some(inverse),
            law: deterministic_law(),
        })
    }

    /// Identity dynamics on explicit circle points.
    pub fn circle_identity(points: &[f64]) -> Result<Self> {
        let fiber = FiberModel::new("circle points", FiberMetric::CirclePoints(points.into()))?;
        let map = (0..points.len() as PointId).collect();
        Self::new("circle-identity", fiber, map)
    }

    /// Identity dynamics on `k` points with the discrete metric.
    pub fn discrete_identity(k: u64) -> Result<Self> {
        let fiber = FiberModel::new("discrete", FiberMetric::Discrete { size: k })?;
        Self::new("discrete-identity", fiber, (0..k).collect())
    }

    pub fn map(&self) -> &[PointId] {
        &self.map
    }
}

impl RandomDynamicalSystem for FiniteMapSystem {
    fn name(&self) -> &str {
        &self.name
    }

    fn group_dim(&self) -> usize {
        1
    }

    fn domain(&self) -> CocycleDomain {
        if self.inverse.is_some() {
            CocycleDomain::Group
        } else {
            CocycleDomain::ForwardMonoid
        }
    }

    fn law(&self) -> &Arc<SymbolLaw> {
        &self.law
    }

    fn fiber(&self, _omega: &EnvironmentPath) -> &FiberModel {
        &self.fiber
    }

    fn evaluate(&self, g: &GroupElement, _omega: &EnvironmentPath, x: PointId) -> PointId {
        let t = g.coords()[0];
        let step = match (t >= 0, &self.inverse) {
            (true, _) => &self.map,
            (false, Some(inv)) => inv,
            (false, None) => panic!("negative power of a non-invertible map"),
        };
        (0..t.unsigned_abs()).fold(x, |y, _| step[y as usize])
    }
}

/// Systems reachable by name from the command line.
pub const SYSTEM_NAMES: &[(&str, &str)] = &[
    ("full-shift", "k=2 m=1 n_max=64"),
    ("doubling", "q=16"),
    ("random-expansion", "multipliers=2:3 weights=1:1 q=16 | modulus=N"),
    ("cat-map", "q=8"),
    ("toral", "matrix=2:1:1:1 q=8"),
];

fn take<T: std::str::FromStr>(params: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match params.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse()
            .map_err(|_| Error::param(key, format!("cannot parse `{raw}`"))),
    }
}

fn take_list<T: std::str::FromStr>(params: &BTreeMap<String, String>, key: &str, default: &str) -> Result<Vec<T>> {
    let raw = params.get(key).map_or(default, String::as_str);
    raw.split(':')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::param(key, format!("cannot parse `{raw}`")))
        })
        .collect()
}

fn reject_unknown(params: &BTreeMap<String, String>, known: &[&str]) -> Result<()> {
    match params.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(Error::param(k.clone(), format!("unknown parameter (expected one of {known:?})"))),
        None => Ok(()),
    }
}

/// Builds a model system from its name and `key=value` parameters.
pub fn build_system(name: &str, params: &BTreeMap<String, String>) -> Result<Box<dyn ModelSystem>> {
    match name {
        "full-shift" => {
            reject_unknown(params, &["k", "m", "n_max"])?;
            Ok(Box::new(make_full_shift(
                take(params, "k", 2)?,
                take(params, "m", 1)?,
                take(params, "n_max", 64)?,
            )?))
        }
        "doubling" => {
            reject_unknown(params, &["q"])?;
            Ok(Box::new(make_doubling(take(params, "q", 16)?)?))
        }
        "random-expansion" => {
            reject_unknown(params, &["multipliers", "weights", "q", "modulus"])?;
            let ms: Vec<u64> = take_list(params, "multipliers", "2:3")?;
            let ws: Vec<f64> = match params.get("weights") {
                Some(_) => take_list(params, "weights", "")?,
                None => vec![1.0; ms.len()],
            };
            match params.get("modulus") {
                Some(_) if params.contains_key("q") => {
                    Err(Error::param("modulus", "give either q or modulus, not both"))
                }
                Some(_) => Ok(Box::new(make_random_expansion_on(&ms, &ws, take(params, "modulus", 0)?)?)),
                None => Ok(Box::new(make_random_expansion(&ms, &ws, take(params, "q", 16)?)?)),
            }
        }
        "cat-map" => {
            reject_unknown(params, &["q"])?;
            Ok(Box::new(make_cat_map(take(params, "q", 8)?)?))
        }
        "toral" => {
            reject_unknown(params, &["matrix", "q"])?;
            let m: Vec<i64> = take_list(params, "matrix", "2:1:1:1")?;
            let [a, b, c, d] = m[..] else {
                return Err(Error::param("matrix", "expected four entries a:b:c:d"));
            };
            Ok(Box::new(make_toral_automorphism([[a, b], [c, d]], take(params, "q", 8)?)?))
        }
        other => Err(Error::param(
            "system",
            format!(
                "unknown system `{other}` (known: {})",
                SYSTEM_NAMES.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            ),
        )),
    }
}
