//! Level-set abstraction of continuous dynamical systems into timed automata.

pub mod abstraction;
pub mod config;
pub mod dynsys;
pub mod expr;
pub mod io;
pub mod partition;
pub mod ta;
pub mod verify;

pub use abstraction::{abstract_system, Abstraction, TransitTimeTable};
pub use config::Options;
pub use dynsys::{BoxDomain, DynSystem};
pub use expr::{Expr, Func};
pub use partition::{Cell, Grid, Partition, PartitionFunction};
pub use ta::TimedAutomaton;
pub use verify::{Verdict, VerdictKind};
