//! GraphViz export.

use crate::ta::TimedAutomaton;
use std::fmt::Write;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Locations are labelled with their id, `g`/`h` and invariant; edges with
/// their symbol, guard and reset. Initial locations get a double border.
pub fn ta_to_dot(ta: &TimedAutomaton) -> String {
    let clocks = ta.clocks();
    let mut out = String::from("digraph ta {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for (i, l) in ta.locations().iter().enumerate() {
        let mut label = l.id.clone();
        if !l.g.is_empty() {
            let g: Vec<String> = l.g.iter().map(u32::to_string).collect();
            let _ = write!(label, "\ng=({}) h={}", g.join(","), l.h);
        }
        if !l.invariant.is_true() {
            let _ = write!(label, "\n{}", l.invariant.display(clocks));
        }
        let peripheries = if ta.is_initial(i) {
            ", peripheries=2"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "  {} [label={}{peripheries}];",
            quote(&l.id),
            quote(&label)
        );
    }
    for e in ta.edges() {
        let mut label = ta.symbols()[e.symbol].clone();
        if !e.guard.is_true() {
            let _ = write!(label, "\n{}", e.guard.display(clocks));
        }
        if !e.reset.is_empty() {
            let r: Vec<&str> = e.reset.iter().map(|&c| clocks[c].as_str()).collect();
            let _ = write!(label, "\nreset {}", r.join(", "));
        }
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&ta.location(e.src).id),
            quote(&ta.location(e.dst).id),
            quote(&label)
        );
    }
    out.push_str("}\n");
    out
}
