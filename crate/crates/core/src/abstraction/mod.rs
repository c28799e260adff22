//! Transit-time estimation and timed-automaton generation.

mod generate;
mod transit;

pub use generate::{clock_name, generate_ta, initial_cells, symbol_name, GenerateError};
pub use transit::{
    estimate_transit_times, has_critical_point, measure_transit, SliceStatus, SliceTransit,
    TransitStats, TransitTimeTable,
};

use crate::config::Options;
use crate::dynsys::{DynSystem, FlowError};
use crate::partition::{build_cells, Grid, Partition, PartitionError, PartitionFunction};
use crate::ta::TimedAutomaton;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum AbstractionError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

/// A partition together with its transit tables and generated automaton.
#[derive(Clone, Debug)]
pub struct Abstraction {
    pub partition: Partition,
    pub tables: Vec<TransitTimeTable>,
    pub ta: TimedAutomaton,
}

pub fn abstract_system(
    sys: &DynSystem,
    families: Vec<PartitionFunction>,
    opts: &Options,
) -> Result<Abstraction, AbstractionError> {
    let grid = Grid::new(sys.domain(), opts.grid)?;
    let tables = families
        .iter()
        .map(|pf| estimate_transit_times(sys, pf, &grid, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let partition = build_cells(families, grid)?;
    let initial = initial_cells(sys, &partition, opts.init_samples, opts.seed)?;
    let ta = generate_ta(&partition, &tables, initial)?;
    Ok(Abstraction {
        partition,
        tables,
        ta,
    })
}
