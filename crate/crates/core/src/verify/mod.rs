//! Sampling-based verdicts about a partition and its abstraction.

mod completeness;
mod geometry;
mod invariance;
mod soundness;
mod verdict;

pub use completeness::check_completeness;
pub use geometry::{
    check_critical_points, check_levelset_sync, check_unstable_manifold_containment,
    containment_is_proper,
};
pub use invariance::check_positive_invariance;
pub use soundness::check_soundness;
pub use verdict::{Status, Verdict, VerdictKind, Witness};

use crate::abstraction::AbstractionError;
use crate::dynsys::{FlowError, ManifoldError, SystemError};
use crate::expr::EvalError;
use crate::partition::PartitionError;
use crate::ta::TaError;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Ta(#[from] TaError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("level {level} of {family} has no points on the lattice")]
    EmptyLevel { family: String, level: f64 },
}
