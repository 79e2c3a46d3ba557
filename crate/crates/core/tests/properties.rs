//! Randomized properties checked against brute force on small fibers.

use proptest::prelude::*;
use proptest::sample::subsequence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rds_entropy::entropy::{
    atom_injectivity_check, conditional_partition_entropy, empirical_nu, entropy_bound_check, join_labels,
    partition_entropy, sep_entropy_rate, shannon_entropy, EmpiricalFiberMeasure, PartitionSpec,
};
use rds_entropy::systems::FiniteMapSystem;
use rds_entropy::{
    bowen_distance, folner_box, folner_defect, max_separated_exact, max_separated_greedy, FiberMetric, FiberModel,
    GroupElement, PointId, RandomDynamicalSystem, SolverMethod,
};

/// Circle points on the 1/128 grid and a self-map of them.
#[derive(Debug, Clone)]
struct Instance {
    points: Vec<f64>,
    map: Vec<PointId>,
}

impl Instance {
    fn system(&self) -> FiniteMapSystem {
        let fiber = FiberModel::new("pts", FiberMetric::CirclePoints(self.points.clone().into())).unwrap();
        FiniteMapSystem::new("instance", fiber, self.map.clone()).unwrap()
    }

    fn injective(&self) -> bool {
        let mut seen = self.map.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == self.map.len()
    }

    fn bowen(&self, n: usize, x: usize, y: usize) -> f64 {
        let (mut a, mut b, mut d) = (x, y, 0.0f64);
        for _ in 0..n {
            let e = (self.points[a] - self.points[b]).abs();
            d = d.max(e.min(1.0 - e));
            a = self.map[a] as usize;
            b = self.map[b] as usize;
        }
        d
    }

    /// Largest separated subset, by enumerating all subsets.
    fn brute_sep(&self, n: usize, eps: f64) -> usize {
        let k = self.points.len();
        (0u32..1 << k)
            .filter(|&mask| {
                (0..k).all(|i| {
                    mask & 1 << i == 0 || (i + 1..k).all(|j| mask & 1 << j == 0 || self.bowen(n, i, j) > eps)
                })
            })
            .map(u32::count_ones)
            .max()
            .unwrap() as usize
    }
}

fn instance(max_points: usize) -> impl Strategy<Value = Instance> {
    subsequence((0u32..128).collect::<Vec<_>>(), 1..=max_points).prop_flat_map(|grid| {
        let k = grid.len();
        let points: Vec<f64> = grid.iter().map(|&g| g as f64 / 128.0).collect();
        (Just(points), prop::collection::vec(0..k as PointId, k))
            .prop_map(|(points, map)| Instance { points, map })
    })
}

/// Scales strictly between grid distances.
fn scale() -> impl Strategy<Value = f64> {
    (0u32..64).prop_map(|j| (j as f64 + 0.5) / 128.0)
}

fn element(dim: usize, reach: i64) -> impl Strategy<Value = GroupElement> {
    prop::collection::vec(-reach..=reach, dim).prop_map(|c| GroupElement::new(&c).unwrap())
}

fn probability(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], len).prop_map(|mut p| {
        if p.iter().all(|&x| x == 0.0) {
            p[0] = 1.0;
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_axioms(dim in 1usize..=2, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || {
            let c: Vec<i64> = (0..dim).map(|_| rng.random_range(-1000..=1000)).collect();
            GroupElement::new(&c).unwrap()
        };
        let (g, h, k) = (draw(), draw(), draw());
        let e = GroupElement::identity(dim).unwrap();
        prop_assert_eq!(g.compose(&h).unwrap().compose(&k).unwrap(), g.compose(&h.compose(&k).unwrap()).unwrap());
        prop_assert_eq!(g.compose(&h).unwrap(), h.compose(&g).unwrap());
        prop_assert_eq!(g.compose(&e).unwrap(), g);
        prop_assert!(g.compose(&g.inverse()).unwrap().is_identity());
    }

    #[test]
    fn folner_defect_is_at_most_two_d_over_n(dim in 1usize..=2, n in 1usize..=64, g in element(2, 1)) {
        let g = GroupElement::new(&g.coords()[..dim]).unwrap();
        let window = folner_box(dim, n).unwrap();
        let defect = folner_defect(&window, &g).unwrap();
        prop_assert!(*defect.numer() * n <= 2 * dim * *defect.denom());
        prop_assert_eq!(window.len(), n.pow(dim as u32));
    }

    #[test]
    fn bowen_distance_is_a_metric(inst in instance(12), n in 1usize..=5, picks in prop::collection::vec(any::<prop::sample::Index>(), 3)) {
        let sys = inst.system();
        let w = sys.environment(0);
        let window = folner_box(1, n).unwrap();
        let k = inst.points.len();
        let [x, y, z] = [0, 1, 2].map(|i| picks[i].index(k) as PointId);
        let d = |a, b| bowen_distance(&sys, &w, &window, a, b).unwrap();
        prop_assert_eq!(d(x, y), d(y, x));
        prop_assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-12);
        prop_assert!(d(x, y) >= 0.0);
        prop_assert_eq!(d(x, x), 0.0);
        if inst.injective() && x != y {
            prop_assert!(d(x, y) > 0.0);
        }
        prop_assert_eq!(d(x, y), inst.bowen(n, x as usize, y as usize));
    }

    #[test]
    fn exact_solver_matches_brute_force(inst in instance(16), n in 1usize..=4, eps in scale()) {
        let sys = inst.system();
        let w = sys.environment(0);
        let window = folner_box(1, n).unwrap();
        let got = max_separated_exact(&sys, &w, &window, eps, 16).unwrap();
        prop_assert_eq!(got.cardinality, inst.brute_sep(n, eps));
        prop_assert_eq!(got.cardinality, got.witness.len());
        let again = max_separated_exact(&sys, &w, &window, eps, 16).unwrap();
        prop_assert_eq!(again.witness, got.witness);
    }

    #[test]
    fn greedy_is_bracketed(inst in instance(16), n in 1usize..=4, eps in scale()) {
        let sys = inst.system();
        let w = sys.environment(0);
        let window = folner_box(1, n).unwrap();
        let greedy = max_separated_greedy(&sys, &w, &window, eps).unwrap().cardinality;
        prop_assert!(inst.brute_sep(n, 2.0 * eps) <= greedy);
        prop_assert!(greedy <= inst.brute_sep(n, eps));
    }

    #[test]
    fn sep_is_monotone(inst in instance(16), n in 1usize..=4, a in scale(), b in scale()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let sys = inst.system();
        let w = sys.environment(0);
        let sep = |n, eps| max_separated_exact(&sys, &w, &folner_box(1, n).unwrap(), eps, 16).unwrap().cardinality;
        prop_assert!(sep(n, lo) >= sep(n, hi));
        prop_assert!(sep(n, lo) <= sep(n + 1, lo));
    }

    #[test]
    fn exact_rate_is_nonincreasing_in_eps(inst in instance(16), n in 1usize..=4, a in scale(), b in scale()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let sys = inst.system();
        let rate = |eps| sep_entropy_rate(&sys, n, eps, 3, 0, SolverMethod::Exact, 16).unwrap();
        let (fine, coarse) = (rate(lo), rate(hi));
        prop_assert!(fine.mean_rate >= coarse.mean_rate);
        prop_assert_eq!(fine.std_error, 0.0);
    }

    #[test]
    fn separated_witness_fills_distinct_atoms(inst in instance(16), n in 1usize..=4, cells in 2u64..=16) {
        let sys = inst.system();
        let w = sys.environment(0);
        let window = folner_box(1, n).unwrap();
        let arcs = PartitionSpec::circle_arcs(cells);
        let eps = 1.0 / cells as f64;
        prop_assert!(arcs.max_cell_diameter(sys.fiber(&w)).unwrap() <= eps);
        let nu = empirical_nu(&sys, &w, &window, eps, SolverMethod::Exact, 16).unwrap();
        let witness: Vec<PointId> = nu.support().collect();
        prop_assert!(atom_injectivity_check(&sys, &w, &window, &arcs, &witness).unwrap());
        let (labels, _) = join_labels(&sys, &w, &window, &arcs, &witness).unwrap();
        let atoms = labels.iter().max().map_or(0, |&l| l as usize + 1);
        let joined = PartitionSpec::from_labels("joined", labels, atoms, None).unwrap();
        let on_witness = FiberModel::new("w", FiberMetric::Discrete { size: witness.len() as u64 }).unwrap();
        let relabeled = EmpiricalFiberMeasure::uniform_on(&(0..witness.len() as PointId).collect::<Vec<_>>()).unwrap();
        let h = partition_entropy(&relabeled, &joined, &on_witness).unwrap();
        prop_assert!((h - (witness.len() as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_bound_holds(p in (1usize..=24).prop_flat_map(probability), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..p.len()).map(|_| rng.random_range(-10.0..10.0)).collect();
        let (lhs, rhs) = entropy_bound_check(&p, &a).unwrap();
        prop_assert!(lhs <= rhs + 1e-12);
        let z: f64 = a.iter().map(|x| x.exp()).sum();
        let gibbs: Vec<f64> = a.iter().map(|x| x.exp() / z).collect();
        let (lhs, rhs) = entropy_bound_check(&gibbs, &a).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn conditioning_reduces_entropy(
        size in 1usize..=30,
        alpha_cells in 1usize..=6,
        given_cells in 1usize..=6,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fiber = FiberModel::new("d", FiberMetric::Discrete { size: size as u64 }).unwrap();
        let alpha_labels = (0..size).map(|_| rng.random_range(0..alpha_cells as u32)).collect();
        let given_labels = (0..size).map(|_| rng.random_range(0..given_cells as u32)).collect();
        let alpha = PartitionSpec::from_labels("alpha", alpha_labels, alpha_cells, None).unwrap();
        let given = PartitionSpec::from_labels("given", given_labels, given_cells, None).unwrap();
        let weights: Vec<f64> = (0..size).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let mu = EmpiricalFiberMeasure::new((0..size as PointId).zip(weights.iter().map(|w| w / total))).unwrap();
        prop_assert!((mu.total_mass() - 1.0).abs() <= 1e-12);
        let h_alpha = partition_entropy(&mu, &alpha, &fiber).unwrap();
        let h_cond = conditional_partition_entropy(&mu, &alpha, &given, &fiber).unwrap();
        prop_assert!(h_cond <= h_alpha + 1e-12);
        prop_assert!(h_alpha <= (alpha_cells as f64).ln() + 1e-12);
    }

    #[test]
    fn shannon_entropy_is_bounded_by_support(p in (1usize..=24).prop_flat_map(probability)) {
        let h = shannon_entropy(&p).unwrap();
        let support = p.iter().filter(|&&x| x > 0.0).count();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (support as f64).ln() + 1e-12);
    }
}
