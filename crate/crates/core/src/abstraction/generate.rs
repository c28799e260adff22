use super::TransitTimeTable;
use crate::dynsys::DynSystem;
use crate::partition::{Partition, PartitionError};
use crate::ta::{Atom, ClockConstraint, Edge, Location, Rel, TaError, TimedAutomaton};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GenerateError {
    #[error("expected one transit table per family ({expected}), got {got}")]
    TableCount { expected: usize, got: usize },
    #[error("transit table for `{family}` has no entry for slice {slice}")]
    TableGap { family: String, slice: u32 },
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Ta(#[from] TaError),
}

pub fn clock_name(family: usize) -> String {
    format!("c{}", family + 1)
}

pub fn symbol_name(family: usize) -> String {
    format!("sigma{}", family + 1)
}

/// Initial locations: `alpha` over `samples` seeded points of the initial
/// box, or every cell when the system has none.
pub fn initial_cells(
    sys: &DynSystem,
    partition: &Partition,
    samples: usize,
    seed: u64,
) -> Result<Vec<usize>, PartitionError> {
    let Some(init) = sys.init() else {
        return Ok((0..partition.cells().len()).collect());
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeSet::new();
    for _ in 0..samples {
        out.extend(partition.alpha(&init.sample(&mut rng))?);
    }
    Ok(out.into_iter().collect())
}

/// One location per cell, one clock and one symbol per family.
///
/// The invariant of `e(g,h)` bounds each clock `c_i` by the upper transit
/// time of slice `g_i` (dropped when infinite). Each adjacency that
/// decrements family `i` becomes an edge guarded by `c_i >= t_low`,
/// labelled `sigma_i`, resetting `c_i`.
pub fn generate_ta(
    partition: &Partition,
    tables: &[TransitTimeTable],
    initial: Vec<usize>,
) -> Result<TimedAutomaton, GenerateError> {
    let families = partition.families();
    if tables.len() != families.len() {
        return Err(GenerateError::TableCount {
            expected: families.len(),
            got: tables.len(),
        });
    }
    let gap = |i: usize, slice: u32| GenerateError::TableGap {
        family: tables[i].family.clone(),
        slice,
    };
    let mut locations = Vec::with_capacity(partition.cells().len());
    for cell in partition.cells() {
        let mut inv = ClockConstraint::truth();
        for (i, &gi) in cell.g.iter().enumerate() {
            let t_high = tables[i].t_high(gi).ok_or_else(|| gap(i, gi))?;
            if t_high.is_finite() {
                inv = inv.and(Atom::new(i, Rel::Le, t_high));
            }
        }
        locations.push(Location {
            id: cell.label(),
            g: cell.g.clone(),
            h: cell.h,
            invariant: inv,
        });
    }
    let mut edges = Vec::with_capacity(partition.adjacency().len());
    for adj in partition.adjacency() {
        let i = adj.family;
        let gi = partition.cells()[adj.from].g[i];
        let t_low = tables[i].t_low(gi).ok_or_else(|| gap(i, gi))?;
        edges.push(Edge {
            src: adj.from,
            dst: adj.to,
            symbol: i,
            guard: ClockConstraint::new(vec![Atom::new(i, Rel::Ge, t_low)]),
            reset: vec![i],
        });
    }
    let k = families.len();
    Ok(TimedAutomaton::new(
        (0..k).map(clock_name).collect(),
        (0..k).map(symbol_name).collect(),
        locations,
        initial,
        edges,
    )?)
}
