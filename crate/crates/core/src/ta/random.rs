//! Seeded random automata for oracle tests and benchmarks.

use super::{Atom, ClockConstraint, Edge, Location, Rel, TimedAutomaton};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONSTANTS: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];

fn atom<R: Rng>(rng: &mut R, clocks: usize, rels: &[Rel]) -> Atom {
    Atom::new(
        rng.gen_range(0..clocks),
        *rels.choose(rng).expect("relations are nonempty"),
        *CONSTANTS.choose(rng).expect("constants are nonempty"),
    )
}

/// An acyclic automaton: edges only go from `l{i}` to `l{j}` with `i < j`,
/// and `l0` is the single initial location. Invariants are upper bounds;
/// guards mix every relation over constants in `[0, 3]`.
pub fn random_dag(seed: u64, max_locations: usize, max_clocks: usize) -> TimedAutomaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_locations.max(2));
    let m = rng.gen_range(1..=max_clocks.max(1));
    let clocks: Vec<String> = (1..=m).map(|i| format!("c{i}")).collect();
    let symbols = vec!["a".to_string(), "b".to_string()];
    let locations = (0..n)
        .map(|i| {
            let mut inv = ClockConstraint::truth();
            if i > 0 && rng.gen_bool(0.4) {
                let mut a = atom(&mut rng, m, &[Rel::Le, Rel::Lt]);
                a.k = a.k.max(1.0);
                inv = inv.and(a);
            }
            Location {
                id: format!("l{i}"),
                g: Vec::new(),
                h: 0,
                invariant: inv,
            }
        })
        .collect();
    let mut edges = Vec::new();
    for src in 0..n {
        for dst in src + 1..n {
            if !rng.gen_bool((2.0 / (n - src) as f64).min(0.8)) {
                continue;
            }
            let mut guard = ClockConstraint::truth();
            for _ in 0..rng.gen_range(0..=2) {
                guard = guard.and(atom(&mut rng, m, &Rel::ALL));
            }
            let reset: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.5)).collect();
            edges.push(Edge {
                src,
                dst,
                symbol: rng.gen_range(0..2),
                guard,
                reset,
            });
        }
    }
    TimedAutomaton::new(clocks, symbols, locations, vec![0], edges)
        .expect("generated automata are well formed")
}
