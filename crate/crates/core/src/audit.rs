//! Named invariant suites over the group, the cocycles of the model systems,
//! the separated-set solvers and the entropy inequalities.
//!
//! Probes come from a SplitMix64 stream keyed by the audit seed, so a run is
//! fully determined by its seed.

use std::fmt;

use crate::entropy::info::{conditional_partition_entropy, entropy_bound_check, shannon_entropy};
use crate::entropy::measure::EmpiricalFiberMeasure;
use crate::entropy::partition::PartitionSpec;
use crate::entropy::rates::atom_injectivity_check;
use crate::error::Result;
use crate::group::{folner_box, folner_defect, FolnerWindow, GroupElement};
use crate::rds::{
    cocycle_audit, identity_audit, mix64, shift_environment, CocycleDomain, FiberMetric, FiberModel,
    PointId, RandomDynamicalSystem, WindowOrbits,
};
use crate::separated::{max_separated_exact_on, max_separated_greedy_on, MAX_EXACT_CAP};
use crate::systems::{
    make_cat_map, make_doubling, make_full_shift, make_random_expansion, make_random_expansion_on,
    make_toral_automorphism, FiniteMapSystem, ModelSystem,
};

/// Probe counts and seed of an audit run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditConfig {
    pub seed: u64,
    /// Random probes per cocycle, identity and metric check.
    pub probes: usize,
    /// Random small instances for the solver and entropy suites.
    pub instances: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            probes: 1000,
            instances: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// Result of one named check on one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub subject: String,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        write!(f, "{tag} {} [{}] {}", self.name, self.subject, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditSummary {
    pub checks: Vec<CheckOutcome>,
}

impl AuditSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.status == Status::Fail)
    }

    pub fn render(&self) -> String {
        let mut out: String = self.checks.iter().map(|c| format!("{c}\n")).collect();
        match self.first_failure() {
            None => out.push_str("PASS\n"),
            Some(c) => out.push_str(&format!("FAIL first failing property: {}\n", c.name)),
        }
        out
    }

    fn record(&mut self, name: &'static str, subject: &str, outcome: Result<std::result::Result<String, String>>) {
        let (status, detail) = match outcome {
            Ok(Ok(d)) => (Status::Pass, d),
            Ok(Err(d)) => (Status::Fail, d),
            Err(e) => (Status::Fail, format!("error: {e}")),
        };
        self.checks.push(CheckOutcome {
            name,
            subject: subject.to_string(),
            status,
            detail,
        });
    }

    fn skip(&mut self, name: &'static str, subject: &str, why: &str) {
        self.checks.push(CheckOutcome {
            name,
            subject: subject.to_string(),
            status: Status::Skip,
            detail: why.to_string(),
        });
    }
}

/// A deterministic SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct ProbeStream(u64);

impl ProbeStream {
    pub fn new(seed: u64, label: &str) -> Self {
        let salt = label.bytes().fold(0u64, |h, b| mix64(h ^ b as u64));
        Self(seed ^ salt)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix64(self.0)
    }

    /// Uniform in `0..bound` for `bound ≥ 1`.
    pub fn below(&mut self, bound: u128) -> u128 {
        if bound > u64::MAX as u128 {
            return self.next_u64() as u128 % bound;
        }
        (self.next_u64() as u128 * bound) >> 64
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u128) as i64
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn random_element(rng: &mut ProbeStream, dim: usize, domain: CocycleDomain, reach: i64) -> GroupElement {
    let lo = if domain == CocycleDomain::Group { -reach } else { 0 };
    let mut c = [0i64; 2];
    for v in c.iter_mut().take(dim) {
        *v = rng.range(lo, reach);
    }
    GroupElement::new(&c[..dim]).expect("dimension 1 or 2")
}

fn random_point(rng: &mut ProbeStream, fiber: &FiberModel) -> PointId {
    rng.below(fiber.size()) as PointId
}

fn verdict(ok: bool, detail: String) -> std::result::Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Group axioms on random triples and the Følner defect bound on boxes.
pub fn audit_group(config: &AuditConfig, summary: &mut AuditSummary) {
    let mut rng = ProbeStream::new(config.seed, "group");
    summary.record(
        "group_axioms",
        "Z, Z^2",
        (|| {
            for i in 0..config.probes {
                let dim = 1 + i % 2;
                let g = random_element(&mut rng, dim, CocycleDomain::Group, 1000);
                let h = random_element(&mut rng, dim, CocycleDomain::Group, 1000);
                let k = random_element(&mut rng, dim, CocycleDomain::Group, 1000);
                let e = GroupElement::identity(dim)?;
                let ok = g.compose(&h)?.compose(&k)? == g.compose(&h.compose(&k)?)?
                    && g.compose(&h)? == h.compose(&g)?
                    && g.compose(&e)? == g
                    && g.compose(&g.inverse())? == e;
                if !ok {
                    return Ok(Err(format!("fails at g={g}, h={h}, k={k}")));
                }
            }
            Ok(Ok(format!("{} triples", config.probes)))
        })(),
    );
    summary.record(
        "folner_defect",
        "boxes n=1..64",
        (|| {
            for dim in 1..=2usize {
                let generators: Vec<GroupElement> = if dim == 1 {
                    vec![GroupElement::z(1)]
                } else {
                    vec![GroupElement::z2(1, 0), GroupElement::z2(0, 1)]
                };
                for g in &generators {
                    let mut prev = None;
                    for n in 1..=64usize {
                        let d = folner_defect(&folner_box(dim, n)?, g)?;
                        let bound = num_rational::Ratio::new(2 * dim, n);
                        if d > bound || prev.is_some_and(|p| d > p) {
                            return Ok(Err(format!("d={dim}, n={n}, g={g}: defect {d}")));
                        }
                        prev = Some(d);
                    }
                }
            }
            Ok(Ok("nonincreasing and <= 2d/n".into()))
        })(),
    );
}

/// Identity law, cocycle law and metric axioms of one system.
pub fn audit_dynamics(system: &dyn RandomDynamicalSystem, config: &AuditConfig, summary: &mut AuditSummary) {
    let name = system.name().to_string();
    let mut rng = ProbeStream::new(config.seed, &format!("dynamics/{name}"));
    let dim = system.group_dim();
    let domain = system.domain();

    summary.record(
        "identity_audit",
        &name,
        (|| {
            for i in 0..config.probes {
                let w = system.sample(config.seed, i as u64);
                let x = random_point(&mut rng, system.fiber(&w));
                if !identity_audit(system, &w, x)? {
                    return Ok(Err(format!("F_e moves {x} over sample {i}")));
                }
            }
            Ok(Ok(format!("{} probes", config.probes)))
        })(),
    );

    summary.record(
        "cocycle_audit",
        &name,
        (|| {
            for i in 0..config.probes {
                let w = system.sample(config.seed, i as u64);
                let g1 = random_element(&mut rng, dim, domain, 12);
                let g2 = random_element(&mut rng, dim, domain, 12);
                let x = random_point(&mut rng, system.fiber(&w));
                if !cocycle_audit(system, &w, &g1, &g2, x)? {
                    return Ok(Err(format!("g1={g1}, g2={g2}, x={x}, sample {i}")));
                }
            }
            Ok(Ok(format!("{} probes", config.probes)))
        })(),
    );

    summary.record(
        "metric_axioms",
        &name,
        (|| {
            let w = system.sample(config.seed, 0);
            let fiber = system.fiber(&w);
            for _ in 0..config.probes {
                let [x, y, z] = [(); 3].map(|_| random_point(&mut rng, fiber));
                let (dxy, dyz, dxz) = (fiber.distance(x, y), fiber.distance(y, z), fiber.distance(x, z));
                let ok = fiber.distance(x, x) == 0.0
                    && dxy == fiber.distance(y, x)
                    && (dxy > 0.0) == (x != y)
                    && dxz <= dxy + dyz + 1e-12
                    && dxy <= fiber.diameter();
                if !ok {
                    return Ok(Err(format!("points {x}, {y}, {z}")));
                }
            }
            Ok(Ok(format!("{} triples", config.probes)))
        })(),
    );
}

/// `F_{1,ω*} μ_ω = μ_{1ω}` in total variation, on enumerable fibers where the
/// one-step map is a bijection.
pub fn audit_invariance(system: &dyn ModelSystem, config: &AuditConfig, summary: &mut AuditSummary) {
    const CHECK_CAP: u128 = 1 << 18;
    let name = system.name().to_string();
    let w = system.sample(config.seed, 0);
    let fiber = system.fiber(&w);
    if fiber.size() > CHECK_CAP {
        summary.skip("invariant_measure", &name, "fiber too large to list");
        return;
    }
    summary.record(
        "invariant_measure",
        &name,
        (|| {
            let step = GroupElement::identity(system.group_dim())?.compose(&match system.group_dim() {
                1 => GroupElement::z(1),
                _ => GroupElement::z2(1, 0),
            })?;
            let samples = config.probes.clamp(1, 8);
            let mut worst = 0.0f64;
            for i in 0..samples {
                let w = system.sample(config.seed, i as u64);
                let mu = system.invariant_measure(&w)?.to_empirical(system.fiber(&w))?;
                let points: Vec<PointId> = mu.support().collect();
                let images = system.evaluate_many(&step, &w, &points);
                let mut distinct = images.clone();
                distinct.sort_unstable();
                distinct.dedup();
                if distinct.len() != points.len() {
                    return Ok(Ok("not applicable: one-step map is not injective on the grid".into()));
                }
                let pushed = EmpiricalFiberMeasure::new(images.into_iter().zip(mu.weights().iter().map(|p| p.1)))?;
                let next = shift_environment(&step, &w)?;
                let target = system.invariant_measure(&next)?.to_empirical(system.fiber(&next))?;
                worst = worst.max(pushed.total_variation(&target));
            }
            Ok(verdict(worst <= 1e-9, format!("max total variation {worst:e} over {samples} samples")))
        })(),
    );
    if let Some(c) = summary.checks.last_mut() {
        if c.status == Status::Pass && c.detail.starts_with("not applicable") {
            c.status = Status::Skip;
        }
    }
}

/// Random circle-point systems with up to `max_points` points and a random
/// self-map, as used by the solver suites.
pub fn random_finite_system(rng: &mut ProbeStream, max_points: usize) -> Result<FiniteMapSystem> {
    let n = 1 + rng.below(max_points as u128) as usize;
    let mut slots: Vec<u64> = (0..64).collect();
    for i in 0..n {
        let j = i + rng.below((64 - i) as u128) as usize;
        slots.swap(i, j);
    }
    let points: Vec<f64> = slots[..n].iter().map(|&s| s as f64 / 64.0).collect();
    let fiber = FiberModel::new("random circle points", FiberMetric::CirclePoints(points.into()))?;
    let map = (0..n).map(|_| rng.below(n as u128) as PointId).collect();
    FiniteMapSystem::new("random-finite", fiber, map)
}

/// Largest separated subset by enumerating every subset.
fn brute_force_sep(orbits: &WindowOrbits, eps: f64) -> usize {
    let n = orbits.len();
    (0u32..1 << n)
        .filter(|&mask| {
            (0..n).all(|i| mask >> i & 1 == 0 || (i + 1..n).all(|j| mask >> j & 1 == 0 || orbits.separated(i, j, eps)))
        })
        .map(u32::count_ones)
        .max()
        .unwrap_or(0) as usize
}

/// Exact solver against subset enumeration, greedy bracketing and
/// monotonicity in `ε` and in the window, on random small instances.
pub fn audit_separated(config: &AuditConfig, summary: &mut AuditSummary) {
    let mut rng = ProbeStream::new(config.seed, "separated");
    let mut outcome = || -> Result<[std::result::Result<String, String>; 3]> {
        let mut fails: [Option<String>; 3] = [None, None, None];
        for i in 0..config.instances {
            let sys = random_finite_system(&mut rng, 12)?;
            let w = sys.environment(0);
            let n = 1 + rng.below(3) as usize;
            let eps = 0.01 + 0.3 * rng.unit();
            let sep = |win: &FolnerWindow, e: f64| -> Result<usize> {
                let orbits = WindowOrbits::whole_fiber(&sys, &w, win)?;
                Ok(max_separated_exact_on(&orbits, e, MAX_EXACT_CAP)?.len())
            };
            let win = folner_box(1, n)?;
            let orbits = WindowOrbits::whole_fiber(&sys, &w, &win)?;
            let exact = max_separated_exact_on(&orbits, eps, MAX_EXACT_CAP)?.len();
            if exact != brute_force_sep(&orbits, eps) && fails[0].is_none() {
                fails[0] = Some(format!("instance {i}"));
            }
            let greedy = max_separated_greedy_on(&orbits, eps)?.len();
            if !(sep(&win, 2.0 * eps)? <= greedy && greedy <= exact) && fails[1].is_none() {
                fails[1] = Some(format!("instance {i}"));
            }
            let monotone = sep(&win, 1.5 * eps)? <= exact && exact <= sep(&folner_box(1, n + 1)?, eps)?;
            if !monotone && fails[2].is_none() {
                fails[2] = Some(format!("instance {i}"));
            }
        }
        let label = format!("{} instances", config.instances);
        Ok(fails.map(|f| f.map_or(Ok(label.clone()), Err)))
    };
    match outcome() {
        Ok([a, b, c]) => {
            summary.record("separated_oracle", "random circle maps", Ok(a));
            summary.record("greedy_bracket", "random circle maps", Ok(b));
            summary.record("sep_monotonicity", "random circle maps", Ok(c));
        }
        Err(e) => summary.record("separated_oracle", "random circle maps", Err(e)),
    }
}

/// The log-sum-exp inequality, the conditional bound `H(α|C) ≤ μ(C_0) log l`
/// for `C_m ⊆ A_m`, and one-point-per-atom on maximal separated sets.
pub fn audit_entropy(config: &AuditConfig, summary: &mut AuditSummary) {
    let mut rng = ProbeStream::new(config.seed, "entropy");
    summary.record(
        "entropy_bound",
        "random (p, a)",
        (|| {
            for i in 0..config.probes {
                let k = 1 + rng.below(8) as usize;
                let raw: Vec<f64> = (0..k).map(|_| rng.unit()).collect();
                let total: f64 = raw.iter().sum();
                if total == 0.0 {
                    continue;
                }
                let p: Vec<f64> = raw.iter().map(|r| r / total).collect();
                let a: Vec<f64> = (0..k).map(|_| 10.0 * rng.unit() - 5.0).collect();
                let (lhs, rhs) = entropy_bound_check(&p, &a)?;
                if lhs > rhs + 1e-12 {
                    return Ok(Err(format!("draw {i}: {lhs} > {rhs}")));
                }
                let z: f64 = a.iter().map(|x| x.exp()).sum();
                let gibbs: Vec<f64> = a.iter().map(|x| x.exp() / z).collect();
                let (lhs, rhs) = entropy_bound_check(&gibbs, &a)?;
                if (lhs - rhs).abs() > 1e-12 {
                    return Ok(Err(format!("draw {i}: Gibbs case {lhs} != {rhs}")));
                }
            }
            Ok(Ok(format!("{} draws", config.probes)))
        })(),
    );

    summary.record(
        "conditional_bound",
        "random (alpha, C, mu)",
        (|| {
            for i in 0..config.instances {
                let size = 4 + rng.below(60) as u64;
                let fiber = FiberModel::new("d", FiberMetric::Discrete { size })?;
                let l = 1 + rng.below(5) as usize;
                let alpha: Vec<u32> = (0..size).map(|_| rng.below(l as u128) as u32).collect();
                // C_m ⊆ A_m for m ≥ 1; everything else in C_0
                let c: Vec<u32> = alpha
                    .iter()
                    .map(|&a| if rng.unit() < 0.5 { a + 1 } else { 0 })
                    .collect();
                let raw: Vec<f64> = (0..size).map(|_| rng.unit()).collect();
                let total: f64 = raw.iter().sum();
                let mu = EmpiricalFiberMeasure::new((0..size).zip(raw.iter().map(|r| r / total)))?;
                let a = PartitionSpec::from_labels("alpha", alpha, l, None)?;
                let cp = PartitionSpec::from_labels("C", c.clone(), l + 1, None)?;
                let h = conditional_partition_entropy(&mu, &a, &cp, &fiber)?;
                let c0: f64 = (0..size).filter(|&x| c[x as usize] == 0).map(|x| mu.mass_of(x)).sum();
                if h > c0 * (l as f64).ln() + 1e-12 {
                    return Ok(Err(format!("instance {i}: {h} > {c0} log {l}")));
                }
                let plain = shannon_entropy(&{
                    let mut m = vec![0.0; l];
                    for &(x, w) in mu.weights() {
                        m[a.cell_of(&fiber, x)] += w;
                    }
                    m
                })?;
                if h > plain + 1e-12 {
                    return Ok(Err(format!("instance {i}: conditioning raised entropy")));
                }
            }
            Ok(Ok(format!("{} instances", config.instances)))
        })(),
    );

    summary.record(
        "atom_injectivity",
        "full shift and doubling",
        (|| {
            let shift = make_full_shift(2, 1, 6)?;
            let doubling = make_doubling(8)?;
            let trials = config.instances.min(100);
            for i in 0..trials {
                let n = 1 + rng.below(6) as usize;
                let win = folner_box(1, n)?;
                let ok = if i % 2 == 0 {
                    let w = shift.environment(0);
                    let orbits = WindowOrbits::whole_fiber(&shift, &w, &win)?;
                    let picked = max_separated_greedy_on(&orbits, 0.5)?;
                    let witness: Vec<PointId> = picked.iter().map(|&j| orbits.points()[j]).collect();
                    atom_injectivity_check(&shift, &w, &win, &PartitionSpec::symbol(2), &witness)?
                } else {
                    let cells = 2 + rng.below(7) as u64;
                    let eps = 1.0 / cells as f64 + rng.unit() * 0.1;
                    let w = doubling.environment(0);
                    let orbits = WindowOrbits::whole_fiber(&doubling, &w, &win)?;
                    let picked = max_separated_greedy_on(&orbits, eps)?;
                    let witness: Vec<PointId> = picked.iter().map(|&j| orbits.points()[j]).collect();
                    atom_injectivity_check(&doubling, &w, &win, &PartitionSpec::circle_arcs(cells), &witness)?
                };
                if !ok {
                    return Ok(Err(format!("trial {i}")));
                }
            }
            Ok(Ok(format!("{trials} trials")))
        })(),
    );
}

/// The systems audited by default.
pub fn standard_zoo() -> Result<Vec<Box<dyn ModelSystem>>> {
    Ok(vec![
        Box::new(make_full_shift(2, 1, 16)?),
        Box::new(make_full_shift(3, 2, 8)?),
        Box::new(make_doubling(16)?),
        Box::new(make_random_expansion(&[2, 3], &[0.5, 0.5], 16)?),
        Box::new(make_random_expansion_on(&[2, 3], &[0.5, 0.5], 65537)?),
        Box::new(make_cat_map(8)?),
        Box::new(make_toral_automorphism([[1, 1], [0, 1]], 6)?),
    ])
}

/// Runs every suite over the standard zoo plus any injected systems.
pub fn run_audit_with(config: &AuditConfig, extra: &[&dyn RandomDynamicalSystem]) -> AuditSummary {
    let mut summary = AuditSummary::default();
    audit_group(config, &mut summary);
    match standard_zoo() {
        Ok(zoo) => {
            for sys in &zoo {
                audit_dynamics(sys.as_ref(), config, &mut summary);
                audit_invariance(sys.as_ref(), config, &mut summary);
            }
        }
        Err(e) => summary.record("model_systems", "standard zoo", Err(e)),
    }
    for sys in extra {
        audit_dynamics(*sys, config, &mut summary);
    }
    audit_separated(config, &mut summary);
    audit_entropy(config, &mut summary);
    summary
}

pub fn run_audit(config: &AuditConfig) -> AuditSummary {
    run_audit_with(config, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::rds::{EnvironmentPath, SymbolLaw};

    /// `F_t = x + t` except `F_2`, which adds 3.
    struct Broken {
        fiber: FiberModel,
        law: Arc<SymbolLaw>,
    }

    impl RandomDynamicalSystem for Broken {
        fn name(&self) -> &str {
            "broken"
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
        fn fiber(&self, _: &EnvironmentPath) -> &FiberModel {
            &self.fiber
        }
        fn evaluate(&self, g: &GroupElement, _: &EnvironmentPath, x: PointId) -> PointId {
            let t = if g.coords()[0] == 2 { 3 } else { g.coords()[0] };
            (x as i64 + t).rem_euclid(16) as PointId
        }
    }

    fn quick() -> AuditConfig {
        AuditConfig {
            seed: 3,
            probes: 200,
            instances: 20,
        }
    }

    #[test]
    fn broken_cocycle_is_named() {
        let broken = Broken {
            fiber: FiberModel::new("d", FiberMetric::Discrete { size: 16 }).unwrap(),
            law: Arc::new(SymbolLaw::point_mass(1, 0).unwrap()),
        };
        let mut summary = AuditSummary::default();
        audit_dynamics(&broken, &quick(), &mut summary);
        assert_eq!(summary.first_failure().unwrap().name, "cocycle_audit");
    }

    #[test]
    fn zoo_passes_deterministically() {
        let a = run_audit(&quick());
        assert!(a.passed(), "{}", a.render());
        assert_eq!(a.render(), run_audit(&quick()).render());
        let skipped: Vec<&str> = a
            .checks
            .iter()
            .filter(|c| c.status == Status::Skip)
            .map(|c| c.subject.as_str())
            .collect();
        assert!(!skipped.contains(&"cat-map"));
    }

    #[test]
    fn probe_stream_ranges() {
        let mut r = ProbeStream::new(1, "x");
        for _ in 0..1000 {
            let v = r.range(-3, 3);
            assert!((-3..=3).contains(&v));
            assert!(r.unit() < 1.0);
            assert!(r.below(1u128 << 64) < 1u128 << 64);
        }
    }
}
