//! Timed automata: syntax, transition-system semantics, runs and zones.

mod constraint;
pub mod random;
mod reach;
mod run;
mod zone;

pub use constraint::{delay, reset, satisfies, Atom, ClockConstraint, Rel, Valuation};
pub use reach::{discrete_flow, reachable_locations, ZoneGraph, MAX_ZONES};
pub use run::{
    simulate_run, simulate_run_with, DelayPolicy, Run, RunEnd, RunViolation, Segment,
    MAX_RUN_SEGMENTS,
};
pub use zone::{Bound, Zone, ZONE_EPS};

use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TaError {
    #[error("unknown clock index {0}")]
    UnknownClock(usize),
    #[error("unknown location index {0}")]
    UnknownLocation(usize),
    #[error("unknown symbol index {0}")]
    UnknownSymbol(usize),
    #[error("duplicate location id `{0}`")]
    DuplicateLocation(String),
    #[error("duplicate clock name `{0}`")]
    DuplicateClock(String),
    #[error("clock constant {0} must be finite and nonnegative")]
    BadConstant(f64),
    #[error("delay must be nonnegative, got {0}")]
    NegativeDelay(f64),
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("interval [{0}, {1}] is reversed")]
    ReversedInterval(f64, f64),
    #[error("valuation violates the invariant of location `{0}`")]
    InvalidState(String),
    #[error("location `{0}` is not initial")]
    NotInitial(String),
    #[error("zone exploration exceeded {0} zones")]
    ZoneLimit(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Location {
    pub id: String,
    /// Slice-index vector of the abstracted cell; empty for other automata.
    pub g: Vec<u32>,
    pub h: u32,
    pub invariant: ClockConstraint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub symbol: usize,
    pub guard: ClockConstraint,
    pub reset: Vec<usize>,
}

/// `(E, E0, C, Sigma, I, Delta)`, with locations, clocks and symbols
/// referred to by index.
#[derive(Clone, Debug, PartialEq)]
pub struct TimedAutomaton {
    clocks: Vec<String>,
    symbols: Vec<String>,
    locations: Vec<Location>,
    initial: Vec<usize>,
    edges: Vec<Edge>,
    outgoing: Vec<Vec<usize>>,
}

impl TimedAutomaton {
    pub fn new(
        clocks: Vec<String>,
        symbols: Vec<String>,
        locations: Vec<Location>,
        initial: Vec<usize>,
        edges: Vec<Edge>,
    ) -> Result<Self, TaError> {
        let mut names = BTreeSet::new();
        for c in &clocks {
            if !names.insert(c.as_str()) {
                return Err(TaError::DuplicateClock(c.clone()));
            }
        }
        let mut ids = BTreeSet::new();
        let check = |c: &ClockConstraint| -> Result<(), TaError> {
            for a in &c.atoms {
                if a.clock >= clocks.len() {
                    return Err(TaError::UnknownClock(a.clock));
                }
                if !(a.k >= 0.0 && a.k.is_finite()) {
                    return Err(TaError::BadConstant(a.k));
                }
            }
            Ok(())
        };
        for l in &locations {
            if !ids.insert(l.id.as_str()) {
                return Err(TaError::DuplicateLocation(l.id.clone()));
            }
            check(&l.invariant)?;
        }
        for &i in &initial {
            if i >= locations.len() {
                return Err(TaError::UnknownLocation(i));
            }
        }
        let mut outgoing = vec![Vec::new(); locations.len()];
        for (k, e) in edges.iter().enumerate() {
            for l in [e.src, e.dst] {
                if l >= locations.len() {
                    return Err(TaError::UnknownLocation(l));
                }
            }
            if e.symbol >= symbols.len() {
                return Err(TaError::UnknownSymbol(e.symbol));
            }
            check(&e.guard)?;
            if let Some(&c) = e.reset.iter().find(|&&c| c >= clocks.len()) {
                return Err(TaError::UnknownClock(c));
            }
            outgoing[e.src].push(k);
        }
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        Ok(TimedAutomaton {
            clocks,
            symbols,
            locations,
            initial,
            edges,
            outgoing,
        })
    }

    pub fn clocks(&self) -> &[String] {
        &self.clocks
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn location(&self, i: usize) -> &Location {
        &self.locations[i]
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge indices leaving `loc`.
    pub fn outgoing(&self, loc: usize) -> &[usize] {
        &self.outgoing[loc]
    }

    pub fn location_index(&self, id: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.id == id)
    }

    pub fn is_initial(&self, loc: usize) -> bool {
        self.initial.binary_search(&loc).is_ok()
    }
}

/// A state `(e, v)` of the transition system.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub location: usize,
    pub valuation: Valuation,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Action {
    Delay(f64),
    Symbol(usize),
}

/// Successors of `state` under `action`.
///
/// A delay `d` is allowed when the invariant holds at `v + d'` for every
/// `d'` in `[0, d]`; conjunctions of bounds are convex, so checking both
/// ends suffices.
pub fn step(ta: &TimedAutomaton, state: &State, action: Action) -> Result<Vec<State>, TaError> {
    let loc = ta
        .locations
        .get(state.location)
        .ok_or(TaError::UnknownLocation(state.location))?;
    if !satisfies(&state.valuation, &loc.invariant)? {
        return Err(TaError::InvalidState(loc.id.clone()));
    }
    match action {
        Action::Delay(d) => {
            let v = delay(&state.valuation, d)?;
            Ok(if satisfies(&v, &loc.invariant)? {
                vec![State {
                    location: state.location,
                    valuation: v,
                }]
            } else {
                Vec::new()
            })
        }
        Action::Symbol(sigma) => {
            if sigma >= ta.symbols.len() {
                return Err(TaError::UnknownSymbol(sigma));
            }
            let mut out = Vec::new();
            for &k in ta.outgoing(state.location) {
                let e = &ta.edges[k];
                if e.symbol != sigma || !satisfies(&state.valuation, &e.guard)? {
                    continue;
                }
                let v = reset(&state.valuation, &e.reset)?;
                if satisfies(&v, &ta.locations[e.dst].invariant)? {
                    out.push(State {
                        location: e.dst,
                        valuation: v,
                    });
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    pub fn loc(id: &str, invariant: Vec<Atom>) -> Location {
        Location {
            id: id.to_string(),
            g: Vec::new(),
            h: 1,
            invariant: ClockConstraint::new(invariant),
        }
    }

    pub fn edge(
        src: usize,
        dst: usize,
        symbol: usize,
        guard: Vec<Atom>,
        reset: Vec<usize>,
    ) -> Edge {
        Edge {
            src,
            dst,
            symbol,
            guard: ClockConstraint::new(guard),
            reset,
        }
    }

    pub fn names(prefix: &str, n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }

    /// `a --(c >= ln 2)--> b`, `a` with invariant `c <= 1`.
    pub fn two_locations() -> TimedAutomaton {
        TimedAutomaton::new(
            names("c", 1),
            names("s", 1),
            vec![loc("a", vec![Atom::new(0, Rel::Le, 1.0)]), loc("b", vec![])],
            vec![0],
            vec![edge(
                0,
                1,
                0,
                vec![Atom::new(0, Rel::Ge, std::f64::consts::LN_2)],
                vec![0],
            )],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn construction_is_validated() {
        let bad_reset = TimedAutomaton::new(
            names("c", 1),
            names("s", 1),
            vec![loc("a", vec![])],
            vec![0],
            vec![edge(0, 0, 0, vec![], vec![1])],
        );
        assert_eq!(bad_reset.unwrap_err(), TaError::UnknownClock(1));
        let bad_dst = TimedAutomaton::new(
            names("c", 1),
            names("s", 1),
            vec![loc("a", vec![])],
            vec![0],
            vec![edge(0, 4, 0, vec![], vec![])],
        );
        assert_eq!(bad_dst.unwrap_err(), TaError::UnknownLocation(4));
        let negative = TimedAutomaton::new(
            names("c", 1),
            names("s", 1),
            vec![loc("a", vec![Atom::new(0, Rel::Le, -1.0)])],
            vec![0],
            vec![],
        );
        assert!(matches!(negative, Err(TaError::BadConstant(_))));
        let dup = TimedAutomaton::new(
            names("c", 1),
            vec![],
            vec![loc("a", vec![]), loc("a", vec![])],
            vec![],
            vec![],
        );
        assert!(matches!(dup, Err(TaError::DuplicateLocation(_))));
    }

    #[test]
    fn delay_respects_the_invariant_ceiling() {
        let ta = TimedAutomaton::new(
            names("c", 1),
            names("s", 1),
            vec![loc("a", vec![Atom::new(0, Rel::Le, 1.0)])],
            vec![0],
            vec![],
        )
        .unwrap();
        let s = State {
            location: 0,
            valuation: Valuation(vec![0.5]),
        };
        assert!(step(&ta, &s, Action::Delay(0.6)).unwrap().is_empty());
        assert_eq!(step(&ta, &s, Action::Delay(0.5)).unwrap().len(), 1);
        let bad = State {
            location: 0,
            valuation: Valuation(vec![1.5]),
        };
        assert!(matches!(
            step(&ta, &bad, Action::Delay(0.0)),
            Err(TaError::InvalidState(_))
        ));
    }

    #[test]
    fn guard_enables_and_resets() {
        let ta = two_locations();
        let s = State {
            location: 0,
            valuation: Valuation(vec![0.7]),
        };
        let next = step(&ta, &s, Action::Symbol(0)).unwrap();
        assert_eq!(
            next,
            vec![State {
                location: 1,
                valuation: Valuation(vec![0.0])
            }]
        );
        let early = State {
            location: 0,
            valuation: Valuation(vec![0.6]),
        };
        assert!(step(&ta, &early, Action::Symbol(0)).unwrap().is_empty());
        let at_b = State {
            location: 1,
            valuation: Valuation(vec![0.0]),
        };
        assert!(step(&ta, &at_b, Action::Symbol(0)).unwrap().is_empty());
    }
}
