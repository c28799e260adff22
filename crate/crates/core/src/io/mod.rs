//! Model files, automaton JSON, GraphViz and CSV output.

mod csv_out;
mod dot;
mod model;
mod ta_json;

pub use csv_out::{write_flow, write_membership, write_run};
pub use dot::ta_to_dot;
pub use model::{load_model, parse_model, print_model, Model, ModelError};
pub use ta_json::{
    export_ta_json, format_constant, import_ta_json, parse_ta_json, ta_from_json, ta_to_json,
    TaJsonError,
};
