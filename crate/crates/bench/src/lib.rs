//! Fixtures shared by the benchmarks in `benches/`.

use rds_entropy::systems::FiniteMapSystem;
use rds_entropy::{FiberMetric, FiberModel, PointId};

/// `k` evenly spaced circle points with the map `i -> 3i mod k`.
pub fn tripling_points(k: usize) -> FiniteMapSystem {
    let points: Vec<f64> = (0..k).map(|i| i as f64 / k as f64).collect();
    let fiber = FiberModel::new("points", FiberMetric::CirclePoints(points.into())).expect("valid fiber");
    let map = (0..k).map(|i| (3 * i % k) as PointId).collect();
    FiniteMapSystem::new("tripling", fiber, map).expect("valid map")
}
