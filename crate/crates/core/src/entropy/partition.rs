use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::FolnerWindow;
use crate::rds::{
    check_window, shift_environment, EnvironmentPath, FiberMetric, FiberModel, PointId,
    RandomDynamicalSystem, ENUMERATION_CAP,
};

/// How a partition assigns cells to fiber points.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionKind {
    /// A single cell.
    Trivial,
    /// `cells` equal arcs `[j/cells, (j+1)/cells)` of the circle.
    CircleArcs { cells: u64 },
    /// `per_side²` equal boxes of the torus, cell `i + per_side * j`.
    TorusBoxes { per_side: u64 },
    /// Cell `coding[x_0]` on word fibers.
    SymbolCoding { coding: Vec<usize>, cells: usize },
    /// One label per point of an enumerated fiber. `itineraries[c]`, when
    /// present, records the cell sequence that produced label `c`.
    Labels {
        labels: Arc<[u32]>,
        cells: usize,
        itineraries: Option<Arc<[Vec<u32>]>>,
    },
}

/// A finite partition of a fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    name: String,
    kind: PartitionKind,
    declared_diameter: Option<f64>,
}

impl PartitionSpec {
    pub fn new(name: impl Into<String>, kind: PartitionKind, declared_diameter: Option<f64>) -> Self {
        Self {
            name: name.into(),
            kind,
            declared_diameter,
        }
    }

    pub fn trivial() -> Self {
        Self::new("trivial", PartitionKind::Trivial, None)
    }

    pub fn circle_arcs(cells: u64) -> Self {
        let diameter = (cells >= 2).then(|| 1.0 / cells as f64);
        Self::new(format!("arcs{cells}"), PartitionKind::CircleArcs { cells }, diameter)
    }

    pub fn torus_boxes(per_side: u64) -> Self {
        let diameter = (per_side >= 2).then(|| 1.0 / per_side as f64);
        Self::new(
            format!("boxes{per_side}"),
            PartitionKind::TorusBoxes { per_side },
            diameter,
        )
    }

    /// The time-zero symbol partition of a `k`-letter word fiber. Words with
    /// the same `x_0` first differ at some `|i| ≥ 1`, so cells have diameter ½.
    pub fn symbol(k: usize) -> Self {
        Self::new(
            "symbol",
            PartitionKind::SymbolCoding {
                coding: (0..k).collect(),
                cells: k,
            },
            Some(0.5),
        )
    }

    pub fn symbol_coding(name: impl Into<String>, coding: Vec<usize>) -> Self {
        let cells = coding.iter().max().map_or(0, |m| m + 1);
        Self::new(name, PartitionKind::SymbolCoding { coding, cells }, Some(0.5))
    }

    /// Explicit labels `labels[x]` in `0..cells`; cells may be empty.
    pub fn from_labels(
        name: impl Into<String>,
        labels: Vec<u32>,
        cells: usize,
        declared_diameter: Option<f64>,
    ) -> Result<Self> {
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= cells) {
            return Err(Error::param("labels", format!("label {bad} >= cell count {cells}")));
        }
        Ok(Self::new(
            name,
            PartitionKind::Labels {
                labels: labels.into(),
                cells,
                itineraries: None,
            },
            declared_diameter,
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &PartitionKind {
        &self.kind
    }

    pub fn declared_diameter(&self) -> Option<f64> {
        self.declared_diameter
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn cell_count(&self) -> usize {
        match &self.kind {
            PartitionKind::Trivial => 1,
            PartitionKind::CircleArcs { cells } => *cells as usize,
            PartitionKind::TorusBoxes { per_side } => (per_side * per_side) as usize,
            PartitionKind::SymbolCoding { cells, .. } | PartitionKind::Labels { cells, .. } => *cells,
        }
    }

    /// Itinerary of each cell of a joined partition.
    pub fn itineraries(&self) -> Option<&[Vec<u32>]> {
        match &self.kind {
            PartitionKind::Labels { itineraries, .. } => itineraries.as_deref(),
            _ => None,
        }
    }

    /// Checks the partition can classify points of `fiber`.
    pub fn validate(&self, fiber: &FiberModel) -> Result<()> {
        let incompatible = || {
            Error::param(
                "partition",
                format!("`{}` cannot classify points of fiber `{}`", self.name, fiber.label()),
            )
        };
        match (&self.kind, fiber.metric()) {
            (PartitionKind::Trivial, _) => Ok(()),
            (PartitionKind::CircleArcs { cells }, FiberMetric::CircleGrid { .. })
            | (PartitionKind::CircleArcs { cells }, FiberMetric::CirclePoints(_)) => {
                if *cells == 0 {
                    Err(Error::param("cells", "must be positive"))
                } else {
                    Ok(())
                }
            }
            (PartitionKind::TorusBoxes { per_side }, FiberMetric::TorusGrid { .. }) => {
                if *per_side == 0 {
                    Err(Error::param("per_side", "must be positive"))
                } else {
                    Ok(())
                }
            }
            (PartitionKind::SymbolCoding { coding, .. }, FiberMetric::PeriodicWords { alphabet, .. }) => {
                if coding.len() as u64 == *alphabet {
                    Ok(())
                } else {
                    Err(Error::LengthMismatch {
                        left: coding.len(),
                        right: *alphabet as usize,
                    })
                }
            }
            (PartitionKind::Labels { labels, .. }, _) => {
                if labels.len() as u128 == fiber.size() {
                    Ok(())
                } else {
                    Err(Error::LengthMismatch {
                        left: labels.len(),
                        right: fiber.size() as usize,
                    })
                }
            }
            _ => Err(incompatible()),
        }
    }

    /// Cell of `x`. The caller is expected to have validated the pairing.
    pub fn cell_of(&self, fiber: &FiberModel, x: PointId) -> usize {
        match (&self.kind, fiber.metric()) {
            (PartitionKind::Trivial, _) => 0,
            (PartitionKind::CircleArcs { cells }, FiberMetric::CircleGrid { modulus }) => {
                ((x as u128 * *cells as u128) / *modulus as u128) as usize
            }
            (PartitionKind::CircleArcs { cells }, FiberMetric::CirclePoints(pts)) => {
                ((pts[x as usize] * *cells as f64).floor() as usize).min(*cells as usize - 1)
            }
            (PartitionKind::TorusBoxes { per_side }, FiberMetric::TorusGrid { modulus }) => {
                let s = *per_side as u128;
                let m = *modulus as u128;
                let i = ((x % modulus) as u128 * s) / m;
                let j = ((x / modulus) as u128 * s) / m;
                (i + s * j) as usize
            }
            (PartitionKind::SymbolCoding { coding, .. }, FiberMetric::PeriodicWords { alphabet, .. }) => {
                coding[(x % alphabet) as usize]
            }
            (PartitionKind::Labels { labels, .. }, _) => labels[x as usize] as usize,
            _ => panic!("partition `{}` used on an incompatible fiber", self.name),
        }
    }

    /// Points of each cell, in id order; empty cells included.
    pub fn cells(&self, fiber: &FiberModel) -> Result<Vec<Vec<PointId>>> {
        self.validate(fiber)?;
        let mut cells = vec![Vec::new(); self.cell_count()];
        for x in fiber.enumerate(ENUMERATION_CAP)? {
            cells[self.cell_of(fiber, x)].push(x);
        }
        Ok(cells)
    }

    /// Every point falls in exactly one cell of index below `cell_count`.
    pub fn covers(&self, fiber: &FiberModel) -> Result<bool> {
        self.validate(fiber)?;
        let n = self.cell_count();
        Ok(fiber
            .enumerate(ENUMERATION_CAP)?
            .into_iter()
            .all(|x| self.cell_of(fiber, x) < n))
    }

    /// Largest base-metric distance inside a cell, by exhaustive pairs.
    pub fn max_cell_diameter(&self, fiber: &FiberModel) -> Result<f64> {
        let mut best = 0.0f64;
        for cell in self.cells(fiber)? {
            for (i, &x) in cell.iter().enumerate() {
                for &y in &cell[i + 1..] {
                    best = best.max(fiber.distance(x, y));
                }
            }
        }
        Ok(best)
    }
}

/// Relabels `(previous label, next cell)` pairs densely in order of first
/// appearance. Returns the new labels and, for each new label, its parent pair.
fn refine(prev: &[u32], prev_count: usize, cells: &[u32], cell_count: usize) -> (Vec<u32>, Vec<(u32, u32)>) {
    const NIL: u32 = u32::MAX;
    let mut remap = vec![NIL; prev_count * cell_count];
    let mut parents = Vec::new();
    let labels = prev
        .iter()
        .zip(cells)
        .map(|(&p, &c)| {
            let slot = &mut remap[p as usize * cell_count + c as usize];
            if *slot == NIL {
                *slot = parents.len() as u32;
                parents.push((p, c));
            }
            *slot
        })
        .collect();
    (labels, parents)
}

/// Atoms of `∨_{g ∈ F} F_{g,ω}^{-1} C(gω)` restricted to `points`, as dense
/// labels plus the itinerary of each label. Itineraries list the cell of
/// `F_{g,ω} x` for each `g` in window order.
pub fn join_labels<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    partition: &PartitionSpec,
    points: &[PointId],
) -> Result<(Vec<u32>, Vec<Vec<u32>>)> {
    check_window(system, window)?;
    let mut labels = vec![0u32; points.len()];
    let mut itineraries: Vec<Vec<u32>> = vec![Vec::new()];
    for g in window.iter() {
        let target = system.fiber(&shift_environment(g, omega)?);
        partition.validate(target)?;
        let cells: Vec<u32> = system
            .evaluate_many(g, omega, points)
            .into_iter()
            .map(|y| partition.cell_of(target, y) as u32)
            .collect();
        let (next, parents) = refine(&labels, itineraries.len(), &cells, partition.cell_count());
        itineraries = parents
            .into_iter()
            .map(|(p, c)| {
                let mut it = itineraries[p as usize].clone();
                it.push(c);
                it
            })
            .collect();
        labels = next;
    }
    Ok((labels, itineraries))
}

/// The joined partition `C_F(ω)` over the whole fiber, with cells sorted by
/// itinerary. Empty itinerary classes do not appear.
pub fn joined_partition<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    partition: &PartitionSpec,
) -> Result<PartitionSpec> {
    let points = system.fiber(omega).enumerate(ENUMERATION_CAP)?;
    let (labels, itineraries) = join_labels(system, omega, window, partition, &points)?;
    let mut order: Vec<usize> = (0..itineraries.len()).collect();
    order.sort_by(|&a, &b| itineraries[a].cmp(&itineraries[b]));
    let mut rank = vec![0u32; order.len()];
    for (r, &old) in order.iter().enumerate() {
        rank[old] = r as u32;
    }
    let sorted: Vec<Vec<u32>> = order.iter().map(|&i| itineraries[i].clone()).collect();
    let labels: Arc<[u32]> = labels.into_iter().map(|l| rank[l as usize]).collect();
    Ok(PartitionSpec::new(
        format!("{}^{}", partition.name(), window.len()),
        PartitionKind::Labels {
            labels,
            cells: sorted.len(),
            itineraries: Some(sorted.into()),
        },
        None,
    ))
}
