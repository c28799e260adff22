//! Fixtures shared by the benchmarks.

use levelta_core::io::{parse_model, Model};

pub const SADDLE: &str = include_str!("../../../models/saddle.model");

pub fn saddle() -> Model {
    parse_model(SADDLE).expect("bundled model parses")
}
