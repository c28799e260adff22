#![allow(dead_code)]

use levelta_core::io::{parse_model, Model};

pub const SADDLE: &str = "\
system {
  dim = 2
  f1 = -x1
  f2 = x2
  domain = [-4, 4] x [-4, 4]
  init = [4, 4] x [-1, 1]
}
partition {
  name = phi1
  phi = x1^2
  levels = [0, 1, 4, 16]
}
partition {
  name = phi2
  phi = -x2^2
  levels = [-16, -4, -1, 0]
}
";

pub fn saddle() -> Model {
    parse_model(SADDLE).unwrap()
}

pub fn with_options(extra: &str) -> Model {
    parse_model(&format!("{SADDLE}options {{\n{extra}\n}}\n")).unwrap()
}
