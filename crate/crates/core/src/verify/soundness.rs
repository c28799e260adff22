use super::{Verdict, VerdictKind, VerifyError, Witness};
use crate::dynsys::{flow_at_times, DynSystem};
use crate::partition::Partition;
use crate::ta::{TimedAutomaton, ZoneGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

const MAX_WITNESSES: usize = 5;

/// Empirical soundness: for random `x0` in the initial box and each probe
/// time `t`, every cell of `alpha(flow(t, x0))` must be reachable by the
/// automaton at time `t` from some cell of `alpha(x0)`.
///
/// Probe times after a trajectory leaves the domain are skipped.
pub fn check_soundness(
    sys: &DynSystem,
    partition: &Partition,
    ta: &TimedAutomaton,
    n_traj: usize,
    t_grid: &[f64],
    seed: u64,
    h: f64,
) -> Result<Verdict, VerifyError> {
    let mut times = t_grid.to_vec();
    times.sort_by(|a, b| a.partial_cmp(b).expect("probe times are not NaN"));
    let horizon = times.last().copied().unwrap_or(0.0);
    let mut graphs: BTreeMap<usize, ZoneGraph> = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = sys.init_or_domain();
    let mut verdict =
        Verdict::new(VerdictKind::Sound, "automaton").tolerance("zone_eps", crate::ta::ZONE_EPS);
    let (mut checked, mut skipped, mut violations) = (0usize, 0usize, 0usize);
    for _ in 0..n_traj {
        let x0 = init.sample(&mut rng);
        let start = partition.alpha(&x0)?;
        for &e in &start {
            if !graphs.contains_key(&e) {
                graphs.insert(e, ZoneGraph::explore(ta, e, horizon)?);
            }
        }
        let states = flow_at_times(sys, &x0, &times, h)?;
        for (&t, x) in times.iter().zip(&states) {
            let Some(x) = x else {
                skipped += 1;
                continue;
            };
            checked += 1;
            let reachable: BTreeSet<usize> = start
                .iter()
                .flat_map(|e| graphs[e].locations_at(t))
                .collect();
            let actual = partition.alpha(x)?;
            if let Some(&missing) = actual.iter().find(|c| !reachable.contains(c)) {
                violations += 1;
                if violations <= MAX_WITNESSES {
                    verdict.witness(
                        Witness::new(format!(
                            "trajectory from {:?} is in {} but the automaton cannot be",
                            x0,
                            ta.location(missing).id
                        ))
                        .at(x)
                        .time(t),
                    );
                }
            }
        }
    }
    if violations > 0 {
        verdict.fail();
    }
    Ok(verdict.coverage(format!(
        "{n_traj} trajectories x {} probe times in [0, {horizon}]: {checked} checked, \
         {skipped} skipped after domain exit, {violations} violations",
        times.len()
    )))
}
