use super::{TaError, TimedAutomaton, Zone};
use std::collections::{BTreeSet, VecDeque};

/// Cap on stored zones per exploration.
pub const MAX_ZONES: usize = 200_000;

/// Symbolic states reachable from one initial location with elapsed time
/// at most `horizon`.
#[derive(Clone, Debug)]
pub struct ZoneGraph {
    start: usize,
    horizon: f64,
    /// `(location, zone)`; zones are time-elapsed and intersected with the
    /// location invariant.
    zones: Vec<(usize, Zone)>,
}

impl ZoneGraph {
    /// Breadth-first exploration by discrete depth, dropping zones included
    /// in one already stored at the same location.
    pub fn explore(ta: &TimedAutomaton, start: usize, horizon: f64) -> Result<Self, TaError> {
        if start >= ta.locations().len() {
            return Err(TaError::UnknownLocation(start));
        }
        if !(horizon >= 0.0) {
            return Err(TaError::NegativeTime(horizon));
        }
        let m = ta.clocks().len();
        let mut by_loc: Vec<Vec<usize>> = vec![Vec::new(); ta.locations().len()];
        let mut zones: Vec<(usize, Zone)> = Vec::new();
        let mut queue = VecDeque::new();

        let settle = |mut z: Zone, loc: usize| -> Option<Zone> {
            let inv = &ta.location(loc).invariant;
            z.constrain_all(inv);
            if z.is_empty() {
                return None;
            }
            z.up();
            z.constrain_all(inv);
            z.constrain_elapsed(0.0, horizon);
            (!z.is_empty()).then_some(z)
        };

        let mut push = |loc: usize,
                        z: Zone,
                        zones: &mut Vec<(usize, Zone)>,
                        queue: &mut VecDeque<usize>|
         -> Result<(), TaError> {
            if by_loc[loc].iter().any(|&k| z.included_in(&zones[k].1)) {
                return Ok(());
            }
            if zones.len() >= MAX_ZONES {
                return Err(TaError::ZoneLimit(MAX_ZONES));
            }
            by_loc[loc].push(zones.len());
            queue.push_back(zones.len());
            zones.push((loc, z));
            Ok(())
        };

        if let Some(z) = settle(Zone::origin(m), start) {
            push(start, z, &mut zones, &mut queue)?;
        }
        while let Some(k) = queue.pop_front() {
            let (loc, zone) = zones[k].clone();
            for &ei in ta.outgoing(loc) {
                let e = &ta.edges()[ei];
                let mut z = zone.clone();
                z.constrain_all(&e.guard);
                if z.is_empty() {
                    continue;
                }
                z.reset(&e.reset);
                if let Some(z) = settle(z, e.dst) {
                    push(e.dst, z, &mut zones, &mut queue)?;
                }
            }
        }
        Ok(ZoneGraph {
            start,
            horizon,
            zones,
        })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn zones(&self) -> &[(usize, Zone)] {
        &self.zones
    }

    /// Locations with a stored zone admitting elapsed time in `[t1, t2]`.
    /// Both ends must lie within the explored horizon.
    pub fn locations_between(&self, t1: f64, t2: f64) -> BTreeSet<usize> {
        self.zones
            .iter()
            .filter(|(_, z)| z.admits_elapsed(t1, t2))
            .map(|(l, _)| *l)
            .collect()
    }

    pub fn locations_at(&self, t: f64) -> BTreeSet<usize> {
        self.locations_between(t, t)
    }
}

/// `Phi_A(t, e0)`: locations reachable from `(e0, 0)` at exactly time `t`.
pub fn discrete_flow(ta: &TimedAutomaton, e0: usize, t: f64) -> Result<BTreeSet<usize>, TaError> {
    if !(t >= 0.0) {
        return Err(TaError::NegativeTime(t));
    }
    Ok(ZoneGraph::explore(ta, e0, t)?.locations_at(t))
}

/// Locations reachable from any of `initial` at some time in `[t1, t2]`.
pub fn reachable_locations(
    ta: &TimedAutomaton,
    initial: &[usize],
    t1: f64,
    t2: f64,
) -> Result<BTreeSet<usize>, TaError> {
    if !(t1 <= t2) {
        return Err(TaError::ReversedInterval(t1, t2));
    }
    if !(t1 >= 0.0) {
        return Err(TaError::NegativeTime(t1));
    }
    let mut out = BTreeSet::new();
    for &e in initial {
        out.extend(ZoneGraph::explore(ta, e, t2)?.locations_between(t1, t2));
    }
    Ok(out)
}
