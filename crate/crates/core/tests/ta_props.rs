use levelta_core::ta::random::random_dag;
use levelta_core::ta::{
    delay, satisfies, simulate_run, simulate_run_with, Atom, ClockConstraint, DelayPolicy, Rel,
    Valuation, Zone, ZoneGraph,
};
use proptest::prelude::*;
use std::collections::BTreeSet;

#[derive(Clone, Debug)]
enum Op {
    Up,
    Constrain(usize, Rel, f64),
    Reset(usize),
}

fn ops(clocks: usize) -> impl Strategy<Value = Vec<Op>> {
    let rel = prop::sample::select(Rel::ALL.to_vec());
    let op = prop_oneof![
        Just(Op::Up),
        (0..clocks, rel, 0.0..5.0f64).prop_map(|(c, r, k)| Op::Constrain(c, r, k)),
        (0..clocks).prop_map(Op::Reset),
    ];
    prop::collection::vec(op, 0..12)
}

fn build(clocks: usize, ops: &[Op]) -> Zone {
    let mut z = Zone::origin(clocks);
    for op in ops {
        match *op {
            Op::Up => z.up(),
            Op::Constrain(c, r, k) => z.constrain(Atom::new(c, r, k)),
            Op::Reset(c) => z.reset(&[c]),
        }
    }
    z
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonicalization_is_idempotent(c in 1..=3usize, ops in ops(3)) {
        let ops: Vec<Op> = ops.into_iter().filter(|o| match o {
            Op::Constrain(k, ..) | Op::Reset(k) => *k < c,
            Op::Up => true,
        }).collect();
        let mut z = build(c, &ops);
        z.canonicalize();
        let mut again = z.clone();
        again.canonicalize();
        prop_assert_eq!(&again, &z);
        if !z.is_empty() {
            // elapse and reset keep canonical form
            let mut up = z.clone();
            up.up();
            let mut closed = up.clone();
            closed.canonicalize();
            prop_assert_eq!(closed, up);
            let mut r = z.clone();
            r.reset(&[0]);
            let mut closed = r.clone();
            closed.canonicalize();
            prop_assert_eq!(closed, r);
        }
    }

    #[test]
    fn upper_bounds_stay_false_under_delay(
        v in prop::collection::vec(0.0..5.0f64, 2),
        k in 0.0..5.0f64,
        strict in any::<bool>(),
        d1 in 0.0..3.0f64,
        d2 in 0.0..3.0f64,
    ) {
        let rel = if strict { Rel::Lt } else { Rel::Le };
        let c = ClockConstraint::truth().and(Atom::new(1, rel, k));
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let v = Valuation(v);
        let early = satisfies(&delay(&v, lo).unwrap(), &c).unwrap();
        let late = satisfies(&delay(&v, hi).unwrap(), &c).unwrap();
        prop_assert!(early || !late);
    }

    #[test]
    fn simulated_runs_are_valid(seed in 0..200u64, run_seed in any::<u64>(), horizon in 0.0..6.0f64) {
        let ta = random_dag(seed, 12, 2);
        let run = simulate_run(&ta, 0, run_seed, horizon).unwrap();
        prop_assert!(run.check(&ta).is_ok(), "{:?}", run.check(&ta));
        prop_assert!(run.end_time() <= horizon);
    }
}

const HORIZON: f64 = 4.0;
const PROBES: usize = 25;
const SAMPLES: u64 = 10_000;
const WINDOW_EPS: f64 = 1e-9;

/// Whether `t` touches the elapsed-time projection of `loc`'s zones only
/// within `WINDOW_EPS` of an endpoint.
fn only_on_boundary(g: &ZoneGraph, loc: usize, t: f64) -> bool {
    g.zones()
        .iter()
        .filter(|(l, z)| *l == loc && z.admits_elapsed(t, t))
        .all(|(_, z)| {
            let (lo, hi) = z.elapsed_range();
            (t - lo).abs() <= WINDOW_EPS || (t - hi).abs() <= WINDOW_EPS || hi - lo <= WINDOW_EPS
        })
}

#[test]
fn zones_agree_with_sampled_runs() {
    let probes: Vec<f64> = (0..PROBES)
        .map(|i| HORIZON * i as f64 / (PROBES - 1) as f64)
        .collect();
    let mut interior_misses = Vec::new();
    for seed in 0..20 {
        let ta = random_dag(seed, 12, 2);
        let g = ZoneGraph::explore(&ta, 0, HORIZON).unwrap();
        let zone_sets: Vec<BTreeSet<usize>> = probes.iter().map(|&t| g.locations_at(t)).collect();
        let mut seen: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); PROBES];
        for s in 0..SAMPLES {
            let run = simulate_run_with(&ta, 0, s, HORIZON, DelayPolicy::BoundaryBiased).unwrap();
            for (k, &t) in probes.iter().enumerate() {
                if t <= run.end_time() {
                    seen[k].extend(run.locations_at(t));
                }
            }
        }
        for k in 0..PROBES {
            assert!(
                seen[k].is_subset(&zone_sets[k]),
                "automaton {seed} at t = {}: sampled {:?} but zones give {:?}",
                probes[k],
                seen[k],
                zone_sets[k]
            );
            for &loc in zone_sets[k].difference(&seen[k]) {
                if !only_on_boundary(&g, loc, probes[k]) {
                    interior_misses.push((seed, probes[k], ta.location(loc).id.clone()));
                }
            }
        }
    }
    assert!(interior_misses.is_empty(), "{interior_misses:?}");
}
