//! Separated sets in the Bowen metric.
//!
//! A set is `(ω, F, ε)`-separated when every pair of distinct points has
//! `d^ω_F > ε`. Two points conflict when `d^ω_F ≤ ε`; maximum separated sets
//! are maximum independent sets of that conflict graph. The exact solver runs
//! branch-and-bound on small instances, the greedy solver sweeps the fiber in
//! point-id order and keeps every point that conflicts with nothing kept so
//! far, which yields a set that is maximal by inclusion with
//! `Sep(2ε) ≤ |greedy(ε)| ≤ Sep(ε)`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::group::FolnerWindow;
use crate::rds::{
    check_window, EnvironmentPath, FiberMetric, PointId, RandomDynamicalSystem, WindowOrbits,
    ENUMERATION_CAP,
};

/// Default largest instance handed to the exact solver.
pub const DEFAULT_EXACT_CAP: usize = 24;

/// Hard ceiling on the exact cap: conflict rows are 64-bit masks.
pub const MAX_EXACT_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverMethod {
    Exact,
    Greedy,
}

impl SolverMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverMethod::Exact => "exact",
            SolverMethod::Greedy => "greedy",
        }
    }
}

impl fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolverMethod::Exact),
            "greedy" => Ok(SolverMethod::Greedy),
            other => Err(Error::param("method", format!("expected exact|greedy, got `{other}`"))),
        }
    }
}

/// A separated set together with how it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedSetResult {
    pub cardinality: usize,
    pub witness: Vec<PointId>,
    pub method: SolverMethod,
    pub epsilon: f64,
    pub window: FolnerWindow,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::param("eps", format!("must be a positive real, got {eps}")))
    }
}

/// True iff every pair of distinct points is more than `eps` apart in `d^ω_F`.
pub fn is_separated<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    points: &[PointId],
    eps: f64,
) -> Result<bool> {
    let orbits = WindowOrbits::new(system, omega, window, points.to_vec())?;
    Ok(is_separated_on(&orbits, eps))
}

/// [`is_separated`] over every point of precomputed orbits. Repeated ids count
/// as one point.
pub fn is_separated_on(orbits: &WindowOrbits, eps: f64) -> bool {
    let pts = orbits.points();
    (0..pts.len()).all(|i| {
        (i + 1..pts.len()).all(|j| pts[i] == pts[j] || orbits.separated(i, j, eps))
    })
}

/// Maximum separated subset of the listed points by branch-and-bound. Among
/// maximum sets the lexicographically smallest (in list order) is returned.
/// Returns indices into `orbits.points()`.
pub fn max_separated_exact_on(orbits: &WindowOrbits, eps: f64, cap: usize) -> Result<Vec<usize>> {
    check_eps(eps)?;
    if cap > MAX_EXACT_CAP {
        return Err(Error::param("exact_cap", format!("at most {MAX_EXACT_CAP}")));
    }
    let n = orbits.len();
    if n > cap {
        return Err(Error::TooLargeForExact {
            size: n as u128,
            cap,
        });
    }
    let mut conflicts = vec![0u64; n];
    for i in 0..n {
        for j in i + 1..n {
            if !orbits.separated(i, j, eps) {
                conflicts[i] |= 1 << j;
                conflicts[j] |= 1 << i;
            }
        }
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut search = BranchAndBound {
        conflicts: &conflicts,
        best: 0,
        best_size: 0,
    };
    search.run(all, 0, 0);
    Ok((0..n).filter(|&i| search.best & (1 << i) != 0).collect())
}

struct BranchAndBound<'a> {
    conflicts: &'a [u64],
    best: u64,
    best_size: u32,
}

impl BranchAndBound<'_> {
    // Include-before-exclude on the lowest candidate visits independent sets
    // in lexicographic order, so the first maximum found is the smallest one.
    fn run(&mut self, candidates: u64, chosen: u64, size: u32) {
        if candidates == 0 {
            if size > self.best_size {
                self.best = chosen;
                self.best_size = size;
            }
            return;
        }
        if size + candidates.count_ones() <= self.best_size {
            return;
        }
        let v = candidates.trailing_zeros() as usize;
        let bit = 1u64 << v;
        let rest = candidates & !bit;
        self.run(rest & !self.conflicts[v], chosen | bit, size + 1);
        // An isolated candidate belongs to some maximum set extending `chosen`.
        if self.conflicts[v] & rest != 0 {
            self.run(rest, chosen, size);
        }
    }
}

/// Greedy sweep over the listed points in order: keep a point iff it is
/// separated from every point kept before it. Returns indices.
pub fn max_separated_greedy_on(orbits: &WindowOrbits, eps: f64) -> Result<Vec<usize>> {
    check_eps(eps)?;
    match BucketGrid::new(orbits, eps) {
        Some(mut grid) => {
            let mut kept = Vec::new();
            for i in 0..orbits.len() {
                if grid.accepts(orbits, i, eps) {
                    grid.insert(i);
                    kept.push(i);
                }
            }
            Ok(kept)
        }
        None => {
            let mut kept: Vec<usize> = Vec::new();
            for i in 0..orbits.len() {
                if kept.iter().all(|&j| orbits.separated(i, j, eps)) {
                    kept.push(i);
                }
            }
            Ok(kept)
        }
    }
}

/// Spatial hash over grid coordinates at a few window times. If two points
/// are within `eps` in the Bowen metric, then at every window time each circle
/// coordinate differs by at most `eps`, so with buckets of width `1/B ≥ eps`
/// their bucket indices differ by at most one (cyclically).
struct BucketGrid {
    /// (window time index, coordinate index) pairs that make up a key.
    axes: Vec<(usize, usize)>,
    modulus: u64,
    buckets: u64,
    heads: Buckets,
    next: Vec<u32>,
    /// Key of the point most recently passed to `accepts`.
    pending_key: u64,
}

enum Buckets {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

const NIL: u32 = u32::MAX;
const DENSE_LIMIT: u128 = 1 << 22;

impl BucketGrid {
    fn new(orbits: &WindowOrbits, eps: f64) -> Option<Self> {
        if orbits.is_empty() || orbits.len() >= NIL as usize {
            return None;
        }
        let (modulus, coords) = match orbits.fiber_at(0).metric() {
            FiberMetric::CircleGrid { modulus } => (*modulus, 1),
            FiberMetric::TorusGrid { modulus } => (*modulus, 2),
            _ => return None,
        };
        if (0..orbits.window_len()).any(|t| orbits.fiber_at(t).metric() != orbits.fiber_at(0).metric()) {
            return None;
        }
        let buckets = ((1.0 / eps).floor() as u64).clamp(1, modulus);
        if buckets < 3 {
            return None;
        }
        let t_len = orbits.window_len();
        let max_times = if coords == 1 { 3 } else { 2 };
        let mut times: Vec<usize> = vec![t_len - 1, 0, t_len / 2];
        times.truncate(max_times.min(t_len));
        times.sort_unstable();
        times.dedup();
        // Drop times until the key space is manageable; fall back to hashing.
        let mut axes: Vec<(usize, usize)>;
        loop {
            axes = times.iter().flat_map(|&t| (0..coords).map(move |c| (t, c))).collect();
            let space = (buckets as u128).checked_pow(axes.len() as u32);
            if space.is_some_and(|s| s <= DENSE_LIMIT) || times.len() == 1 {
                break;
            }
            times.pop();
        }
        let heads = match (buckets as u128).checked_pow(axes.len() as u32) {
            Some(s) if s <= DENSE_LIMIT => Buckets::Dense(vec![NIL; s as usize]),
            Some(s) if s <= u64::MAX as u128 => Buckets::Sparse(HashMap::new()),
            _ => return None,
        };
        Some(Self {
            axes,
            modulus,
            buckets,
            heads,
            next: vec![NIL; orbits.len()],
            pending_key: 0,
        })
    }

    fn bucket_of(&self, orbits: &WindowOrbits, i: usize, t: usize, c: usize) -> u64 {
        let img = orbits.image(t, i);
        let coord = if c == 0 { img % self.modulus } else { img / self.modulus };
        ((coord as u128 * self.buckets as u128) / self.modulus as u128) as u64
    }

    fn key_parts(&self, orbits: &WindowOrbits, i: usize) -> Vec<u64> {
        self.axes
            .iter()
            .map(|&(t, c)| self.bucket_of(orbits, i, t, c))
            .collect()
    }

    fn encode(&self, parts: &[u64]) -> u64 {
        parts.iter().fold(0u64, |acc, &p| acc * self.buckets + p)
    }

    fn head(&self, key: u64) -> u32 {
        match &self.heads {
            Buckets::Dense(v) => v[key as usize],
            Buckets::Sparse(m) => m.get(&key).copied().unwrap_or(NIL),
        }
    }

    fn insert(&mut self, i: usize) {
        let key = self.pending_key;
        let old = self.head(key);
        self.next[i] = old;
        match &mut self.heads {
            Buckets::Dense(v) => v[key as usize] = i as u32,
            Buckets::Sparse(m) => {
                m.insert(key, i as u32);
            }
        }
    }

    fn accepts(&mut self, orbits: &WindowOrbits, i: usize, eps: f64) -> bool {
        let parts = self.key_parts(orbits, i);
        self.pending_key = self.encode(&parts);
        let b = self.buckets;
        let mut offsets = vec![0usize; parts.len()];
        let mut probe = vec![0u64; parts.len()];
        loop {
            for (k, (&p, &o)) in parts.iter().zip(&offsets).enumerate() {
                probe[k] = (p + b + o as u64 - 1) % b;
            }
            let mut j = self.head(self.encode(&probe));
            while j != NIL {
                if !orbits.separated(i, j as usize, eps) {
                    return false;
                }
                j = self.next[j as usize];
            }
            // odometer over {-1, 0, +1}^axes
            let mut k = 0;
            loop {
                if k == offsets.len() {
                    return true;
                }
                offsets[k] += 1;
                if offsets[k] < 3 {
                    break;
                }
                offsets[k] = 0;
                k += 1;
            }
        }
    }
}

fn whole_fiber_result(
    orbits: &WindowOrbits,
    picked: Vec<usize>,
    method: SolverMethod,
    eps: f64,
    window: &FolnerWindow,
) -> SeparatedSetResult {
    let witness: Vec<PointId> = picked.into_iter().map(|i| orbits.points()[i]).collect();
    SeparatedSetResult {
        cardinality: witness.len(),
        witness,
        method,
        epsilon: eps,
        window: window.clone(),
    }
}

/// `Sep(ω, F, ε)` with a witness, by exhaustive branch-and-bound over the
/// whole fiber. Fibers larger than `cap` are refused.
pub fn max_separated_exact<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    eps: f64,
    cap: usize,
) -> Result<SeparatedSetResult> {
    check_eps(eps)?;
    let size = system.fiber(omega).size();
    if size > cap as u128 {
        return Err(Error::TooLargeForExact { size, cap });
    }
    let orbits = WindowOrbits::whole_fiber(system, omega, window)?;
    let picked = max_separated_exact_on(&orbits, eps, cap)?;
    Ok(whole_fiber_result(&orbits, picked, SolverMethod::Exact, eps, window))
}

/// Lexicographic greedy sweep over the whole fiber.
pub fn max_separated_greedy<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    eps: f64,
) -> Result<SeparatedSetResult> {
    check_eps(eps)?;
    let orbits = WindowOrbits::whole_fiber(system, omega, window)?;
    let picked = max_separated_greedy_on(&orbits, eps)?;
    Ok(whole_fiber_result(&orbits, picked, SolverMethod::Greedy, eps, window))
}

/// Fibers up to this size get a max-coverage greedy cover; larger ones fall
/// back to the sweep, whose maximal separated set is also `eps`-spanning.
const SET_COVER_LIMIT: usize = 1 << 12;

/// Size of a greedy `eps`-cover of the fiber in `d^ω_F`: every point lies
/// within `eps` of a center.
pub fn spanning_number<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    eps: f64,
) -> Result<usize> {
    check_eps(eps)?;
    let orbits = WindowOrbits::whole_fiber(system, omega, window)?;
    let n = orbits.len();
    if n > SET_COVER_LIMIT {
        return Ok(max_separated_greedy_on(&orbits, eps)?.len());
    }
    let balls: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| !orbits.separated(i, j, eps)).collect())
        .collect();
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut centers = 0;
    while remaining > 0 {
        // most newly covered points, ties to the lowest id
        let (best, gain) = balls
            .iter()
            .enumerate()
            .map(|(i, ball)| (i, ball.iter().filter(|&&j| !covered[j]).count()))
            .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        debug_assert!(gain > 0);
        for &j in &balls[best] {
            if !covered[j] {
                covered[j] = true;
                remaining -= 1;
            }
        }
        centers += 1;
    }
    Ok(centers)
}

/// How a separated-set count was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountRoute {
    /// Exact or greedy solver over the enumerated fiber.
    Graph,
    /// Closed-ball counting in an ultrametric word fiber.
    CylinderClasses,
}

/// Cardinality of a separated set, possibly too large to list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SepCount {
    pub cardinality: u128,
    pub log_cardinality: f64,
    pub method: SolverMethod,
    pub route: CountRoute,
}

/// Smallest `m ≥ 0` with `2^-m ≤ eps`: in the word metric `d ≤ eps` iff the
/// two words agree on `|i| < m`.
pub fn word_agreement_radius(eps: f64) -> u32 {
    let mut m = 0u32;
    while (-(m as f64)).exp2() > eps {
        m += 1;
    }
    m
}

/// Number of closed `eps`-balls of `d^ω_F` on the full shift over period-`P`
/// words.
///
/// The word metric is an ultrametric and so is every `d^ω_F` built from it, so
/// closed `eps`-balls partition the fiber and a maximum separated set takes
/// exactly one point per ball. Under the shift, `d^ω_F(x, y) ≤ eps` iff `x`
/// and `y` agree on `S = {s + i mod P : s ∈ F, |i| < m}`, giving `k^|S|` balls.
pub fn cylinder_class_count(alphabet: u64, period: u32, window: &FolnerWindow, eps: f64) -> Result<SepCount> {
    check_eps(eps)?;
    if window.dim() != 1 {
        return Err(Error::UnsupportedDimension(window.dim()));
    }
    let m = word_agreement_radius(eps) as i64;
    let p = period as i64;
    let mut coords = vec![false; period as usize];
    for s in window.iter() {
        let s = s.coords()[0];
        for i in (1 - m)..m {
            coords[(s + i).rem_euclid(p) as usize] = true;
        }
    }
    let span = coords.iter().filter(|&&c| c).count() as u32;
    Ok(SepCount {
        cardinality: (alphabet as u128).pow(span),
        log_cardinality: span as f64 * (alphabet as f64).ln(),
        method: SolverMethod::Exact,
        route: CountRoute::CylinderClasses,
    })
}

/// `Sep(ω, F, ε)` (exact) or the greedy lower bound, without a witness.
/// Word-shift systems are counted by closed balls, which is exact for either
/// method; everything else goes through the graph solvers.
pub fn separated_count<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    eps: f64,
    method: SolverMethod,
    exact_cap: usize,
) -> Result<SepCount> {
    check_eps(eps)?;
    check_window(system, window)?;
    if system.is_word_shift() {
        if let FiberMetric::PeriodicWords { alphabet, period } = system.fiber(omega).metric() {
            let mut count = cylinder_class_count(*alphabet, *period, window, eps)?;
            count.method = method;
            return Ok(count);
        }
    }
    let size = system.fiber(omega).size();
    if method == SolverMethod::Exact && size > exact_cap as u128 {
        return Err(Error::TooLargeForExact {
            size,
            cap: exact_cap,
        });
    }
    if size > ENUMERATION_CAP {
        return Err(Error::ResourceCap(format!(
            "fiber of {size} points exceeds the enumeration cap {ENUMERATION_CAP}"
        )));
    }
    let orbits = WindowOrbits::whole_fiber(system, omega, window)?;
    let n = match method {
        SolverMethod::Exact => max_separated_exact_on(&orbits, eps, exact_cap)?.len(),
        SolverMethod::Greedy => max_separated_greedy_on(&orbits, eps)?.len(),
    };
    Ok(SepCount {
        cardinality: n as u128,
        log_cardinality: (n as f64).ln(),
        method,
        route: CountRoute::Graph,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement;
    use crate::systems::{make_full_shift, FiniteMapSystem};

    fn circle(points: &[f64]) -> FiniteMapSystem {
        FiniteMapSystem::circle_identity(points).unwrap()
    }

    fn e() -> FolnerWindow {
        FolnerWindow::singleton(1).unwrap()
    }

    #[test]
    fn is_separated_examples() {
        let sys = circle(&[0.0, 0.3, 0.6, 0.9]);
        let w = sys.environment(0);
        assert!(is_separated(&sys, &w, &e(), &[2], 0.25).unwrap());
        assert!(is_separated(&sys, &w, &e(), &[0, 1, 2], 0.25).unwrap());
        assert!(!is_separated(&sys, &w, &e(), &[0, 3], 0.25).unwrap());
    }

    #[test]
    fn exact_examples() {
        let sys = circle(&[0.0, 0.3, 0.6, 0.9]);
        let w = sys.environment(0);
        let r = max_separated_exact(&sys, &w, &e(), 0.25, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(r.cardinality, 3);
        assert_eq!(r.witness, vec![0, 1, 2]);
        assert_eq!(r.method, SolverMethod::Exact);

        let discrete = FiniteMapSystem::discrete_identity(7).unwrap();
        let w = discrete.environment(0);
        assert_eq!(max_separated_exact(&discrete, &w, &e(), 0.5, 24).unwrap().cardinality, 7);

        let single = circle(&[0.5]);
        assert_eq!(
            max_separated_exact(&single, &single.environment(0), &e(), 0.1, 24).unwrap().cardinality,
            1
        );
    }

    #[test]
    fn exact_refuses_large_fibers() {
        let discrete = FiniteMapSystem::discrete_identity(30).unwrap();
        let err = max_separated_exact(&discrete, &discrete.environment(0), &e(), 0.5, 24).unwrap_err();
        assert_eq!(err, Error::TooLargeForExact { size: 30, cap: 24 });
    }

    #[test]
    fn greedy_examples() {
        let sys = circle(&[0.0, 0.3, 0.6, 0.9]);
        let w = sys.environment(0);
        let r = max_separated_greedy(&sys, &w, &e(), 0.25).unwrap();
        assert_eq!(r.witness, vec![0, 1, 2]);
        let discrete = FiniteMapSystem::discrete_identity(9).unwrap();
        assert_eq!(
            max_separated_greedy(&discrete, &discrete.environment(0), &e(), 0.99)
                .unwrap()
                .cardinality,
            9
        );
        let wide = max_separated_greedy(&sys, &w, &e(), 0.6).unwrap();
        assert_eq!(wide.witness, vec![0]);
    }

    #[test]
    fn spanning_examples() {
        let single = circle(&[0.25]);
        assert_eq!(spanning_number(&single, &single.environment(0), &e(), 0.1).unwrap(), 1);
        let discrete = FiniteMapSystem::discrete_identity(5).unwrap();
        assert_eq!(spanning_number(&discrete, &discrete.environment(0), &e(), 0.7).unwrap(), 5);
        let sys = circle(&[0.0, 0.3, 0.6, 0.9]);
        assert!(spanning_number(&sys, &sys.environment(0), &e(), 0.35).unwrap() <= 2);
    }

    #[test]
    fn doubling_grid_greedy_matches_plain_sweep() {
        // bucketed and unbucketed sweeps must pick the same points
        let sys = crate::systems::make_doubling(10).unwrap();
        let w = sys.environment(0);
        let window = FolnerWindow::interval(4).unwrap();
        let orbits = WindowOrbits::whole_fiber(&sys, &w, &window).unwrap();
        for eps in [1.0 / 64.0, 0.05, 0.2, 0.3] {
            let fast = max_separated_greedy_on(&orbits, eps).unwrap();
            let mut slow: Vec<usize> = Vec::new();
            for i in 0..orbits.len() {
                if slow.iter().all(|&j| orbits.separated(i, j, eps)) {
                    slow.push(i);
                }
            }
            assert_eq!(fast, slow, "eps = {eps}");
        }
    }

    #[test]
    fn word_radius() {
        assert_eq!(word_agreement_radius(1.0), 0);
        assert_eq!(word_agreement_radius(2.0), 0);
        assert_eq!(word_agreement_radius(0.5), 1);
        assert_eq!(word_agreement_radius(0.3), 2);
        assert_eq!(word_agreement_radius(0.25), 2);
    }

    #[test]
    fn cylinder_count_matches_graph_solver() {
        for (k, m, n_max) in [(2u64, 1u32, 2usize), (2, 2, 3), (3, 1, 3), (2, 1, 4)] {
            let sys = make_full_shift(k, m, n_max).unwrap();
            let w = sys.environment(0);
            for n in 1..=n_max {
                let window = FolnerWindow::interval(n).unwrap();
                for eps in [1.0, 0.5, 0.3, 0.2, 0.1] {
                    let fast = separated_count(&sys, &w, &window, eps, SolverMethod::Exact, 24).unwrap();
                    let orbits = WindowOrbits::whole_fiber(&sys, &w, &window).unwrap();
                    let slow = max_separated_greedy_on(&orbits, eps).unwrap().len();
                    assert_eq!(fast.cardinality, slow as u128, "k={k} m={m} n={n} eps={eps}");
                    if orbits.len() <= 24 {
                        let exact = max_separated_exact_on(&orbits, eps, 24).unwrap().len();
                        assert_eq!(exact, slow);
                    }
                }
            }
        }
    }

    #[test]
    fn forward_domain_is_enforced() {
        let sys = crate::systems::make_doubling(6).unwrap();
        let w = sys.environment(0);
        let back = FolnerWindow::from_elements([GroupElement::z(-1), GroupElement::z(0)]).unwrap();
        assert!(matches!(
            max_separated_greedy(&sys, &w, &back, 0.1),
            Err(Error::Domain { .. })
        ));
    }
}
