use super::{reset, satisfies, Atom, ClockConstraint, Rel, TaError, TimedAutomaton, Valuation};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub const MAX_RUN_SEGMENTS: usize = 100_000;

/// A delay spent in `location` starting from `entry`, followed by the
/// discrete step along `edge` unless this is the last segment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub location: usize,
    pub entry: Vec<f64>,
    /// Switching time at which the segment starts.
    pub start: f64,
    pub delay: f64,
    pub edge: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunEnd {
    Horizon,
    /// No edge can be taken and the invariant forbids waiting further.
    Deadlock,
    StepLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Run {
    pub segments: Vec<Segment>,
    pub end: RunEnd,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RunViolation {
    #[error("run is empty")]
    Empty,
    #[error("segment {0}: the run must start in an initial location with all clocks zero")]
    BadStart(usize),
    #[error("segment {0}: invariant violated during the delay")]
    Invariant(usize),
    #[error("segment {0}: guard not satisfied at the switch")]
    Guard(usize),
    #[error("segment {0}: edge does not leave the segment's location")]
    WrongSource(usize),
    #[error("segment {0}: entry valuation is not the reset of the previous one")]
    Reset(usize),
    #[error("segment {0}: switching times are inconsistent")]
    Time(usize),
    #[error("segment {0}: only the last segment may lack an edge")]
    Alternation(usize),
    #[error(transparent)]
    Ta(#[from] TaError),
}

impl Run {
    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.start + s.delay)
    }

    /// Switching times `t_i`, starting with 0.
    pub fn switching_times(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.start).collect()
    }

    /// Locations occupied at time `t` (several when switches happen at `t`).
    pub fn locations_at(&self, t: f64) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .segments
            .iter()
            .filter(|s| s.start <= t && t <= s.start + s.delay)
            .map(|s| s.location)
            .collect();
        out.dedup();
        out
    }

    /// Checks alternation, invariants along delays, guards at switches and
    /// resets, using nothing but the automaton.
    pub fn check(&self, ta: &TimedAutomaton) -> Result<(), RunViolation> {
        let first = self.segments.first().ok_or(RunViolation::Empty)?;
        if !ta.is_initial(first.location)
            || first.start != 0.0
            || first.entry.iter().any(|&c| c != 0.0)
        {
            return Err(RunViolation::BadStart(0));
        }
        let last = self.segments.len() - 1;
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.delay >= 0.0) {
                return Err(RunViolation::Time(i));
            }
            let inv = &ta.location(s.location).invariant;
            let v0 = Valuation(s.entry.clone());
            let v1 = Valuation(s.entry.iter().map(|c| c + s.delay).collect());
            if !satisfies(&v0, inv)? || !satisfies(&v1, inv)? {
                return Err(RunViolation::Invariant(i));
            }
            let Some(k) = s.edge else {
                if i != last {
                    return Err(RunViolation::Alternation(i));
                }
                continue;
            };
            if i == last {
                return Err(RunViolation::Alternation(i));
            }
            let e = &ta.edges()[k];
            if e.src != s.location {
                return Err(RunViolation::WrongSource(i));
            }
            if !satisfies(&v1, &e.guard)? {
                return Err(RunViolation::Guard(i));
            }
            let next = &self.segments[i + 1];
            if next.location != e.dst || reset(&v1, &e.reset)?.0 != next.entry {
                return Err(RunViolation::Reset(i + 1));
            }
            if next.start != s.start + s.delay {
                return Err(RunViolation::Time(i + 1));
            }
        }
        Ok(())
    }
}

/// Interval of delays `d >= 0` for which `v + d` satisfies `c`, with
/// strictness of each end.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Window {
    lo: f64,
    lo_strict: bool,
    hi: f64,
    hi_strict: bool,
}

impl Window {
    fn all() -> Self {
        Window {
            lo: 0.0,
            lo_strict: false,
            hi: f64::INFINITY,
            hi_strict: true,
        }
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_strict || self.hi_strict))
    }

    fn raise(&mut self, lo: f64, strict: bool) {
        if lo > self.lo || (lo == self.lo && strict) {
            self.lo = lo;
            self.lo_strict = strict;
        }
    }

    fn lower(&mut self, hi: f64, strict: bool) {
        if hi < self.hi || (hi == self.hi && strict) {
            self.hi = hi;
            self.hi_strict = strict;
        }
    }

    /// Narrows by `clock_value + d rel k`; a clock `reset` after the delay
    /// is constrained at value 0 instead.
    fn apply(&mut self, a: &Atom, value: f64) {
        let r = a.k - value;
        match a.rel {
            Rel::Le => self.lower(r, false),
            Rel::Lt => self.lower(r, true),
            Rel::Ge => self.raise(r, false),
            Rel::Gt => self.raise(r, true),
            Rel::Eq => {
                self.raise(r, false);
                self.lower(r, false);
            }
        }
    }

    fn constrain(&mut self, c: &ClockConstraint, v: &[f64]) {
        for a in &c.atoms {
            self.apply(a, v[a.clock]);
        }
    }

    /// Atoms on clocks frozen at 0 either hold for every delay or none.
    fn constrain_after_reset(&mut self, c: &ClockConstraint, v: &[f64], reset: &[usize]) {
        for a in &c.atoms {
            if reset.contains(&a.clock) {
                if !a.rel.holds(0.0, a.k) {
                    self.lo = f64::INFINITY;
                    self.hi = 0.0;
                }
            } else {
                self.apply(a, v[a.clock]);
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        for _ in 0..16 {
            let d = rng.gen_range(self.lo..=self.hi);
            let ok_lo = if self.lo_strict {
                d > self.lo
            } else {
                d >= self.lo
            };
            let ok_hi = if self.hi_strict {
                d < self.hi
            } else {
                d <= self.hi
            };
            if ok_lo && ok_hi {
                return d;
            }
        }
        0.5 * (self.lo + self.hi)
    }

    fn sample_with(&self, policy: DelayPolicy, rng: &mut ChaCha8Rng) -> f64 {
        if policy == DelayPolicy::Uniform || self.lo == self.hi {
            return self.sample(rng);
        }
        let span = self.hi - self.lo;
        match rng.gen_range(0..4) {
            0 if self.lo_strict => (self.lo + f64::EPSILON * self.lo.abs().max(1.0)).min(self.hi),
            0 => self.lo,
            1 if self.hi_strict => (self.hi - f64::EPSILON * self.hi.abs().max(1.0)).max(self.lo),
            1 => self.hi,
            2 if span.is_finite() => self.lo + span * rng.gen::<f64>().powi(4),
            _ => self.sample(rng),
        }
    }
}

/// How `simulate_run_with` draws a delay from an edge's window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DelayPolicy {
    /// Uniform over the window.
    #[default]
    Uniform,
    /// Mix of the endpoints, delays skewed toward the lower end, and uniform.
    BoundaryBiased,
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else if x > 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

fn next_down(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

/// `d` moved by a few ulps so that `ok(d)` holds despite `v + d` rounding,
/// or `d` unchanged if no nearby value works.
fn fit(d: f64, ok: impl Fn(f64) -> bool) -> f64 {
    if ok(d) {
        return d;
    }
    let (mut up, mut down) = (d, d);
    for _ in 0..8 {
        up = next_up(up);
        if ok(up) {
            return up;
        }
        down = next_down(down);
        if ok(down) {
            return down;
        }
    }
    d
}

/// Samples a run from `e0` up to `horizon`.
///
/// At each location the enabled edges are those whose guard and target
/// invariant leave a nonempty window of delays inside the invariant ceiling
/// and the horizon. One option is drawn uniformly from the enabled edges and
/// staying put; the delay is then uniform in the chosen edge's window. Staying
/// put delays to the horizon when the invariant allows it, and otherwise to the
/// invariant ceiling, ending the run in a deadlock. Same seed, same run.
pub fn simulate_run(
    ta: &TimedAutomaton,
    e0: usize,
    seed: u64,
    horizon: f64,
) -> Result<Run, TaError> {
    simulate_run_with(ta, e0, seed, horizon, DelayPolicy::Uniform)
}

/// `simulate_run` with delays drawn according to `policy`.
pub fn simulate_run_with(
    ta: &TimedAutomaton,
    e0: usize,
    seed: u64,
    horizon: f64,
    policy: DelayPolicy,
) -> Result<Run, TaError> {
    if e0 >= ta.locations().len() {
        return Err(TaError::UnknownLocation(e0));
    }
    if !ta.is_initial(e0) {
        return Err(TaError::NotInitial(ta.location(e0).id.clone()));
    }
    if !(horizon >= 0.0) {
        return Err(TaError::NegativeTime(horizon));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut loc = e0;
    let mut v = vec![0.0; ta.clocks().len()];
    let mut t = 0.0;
    let mut segments = Vec::new();
    if !satisfies(&Valuation(v.clone()), &ta.location(e0).invariant)? {
        return Err(TaError::InvalidState(ta.location(e0).id.clone()));
    }
    loop {
        if segments.len() >= MAX_RUN_SEGMENTS {
            return Ok(Run {
                segments,
                end: RunEnd::StepLimit,
            });
        }
        let remaining = (horizon - t).max(0.0);
        let mut stay = Window::all();
        stay.constrain(&ta.location(loc).invariant, &v);
        let ceiling = stay;
        stay.lower(remaining, false);

        let mut options: Vec<(Option<usize>, Window)> = Vec::new();
        for &k in ta.outgoing(loc) {
            let e = &ta.edges()[k];
            let mut w = stay;
            w.constrain(&e.guard, &v);
            w.constrain_after_reset(&ta.location(e.dst).invariant, &v, &e.reset);
            if !w.is_empty() {
                options.push((Some(k), w));
            }
        }
        let can_reach_horizon = !stay.is_empty()
            && (remaining < ceiling.hi || (remaining == ceiling.hi && !ceiling.hi_strict));
        // staying put runs to the horizon or, failing that, waits out the
        // invariant and deadlocks
        options.push((None, stay));
        let inv = &ta.location(loc).invariant;
        let inv_ok = |d: f64| {
            let moved = Valuation(v.iter().map(|c| c + d).collect());
            satisfies(&moved, inv).unwrap_or(false)
        };
        let (choice, window) = if stay.is_empty() && options.len() > 1 {
            options[rng.gen_range(0..options.len() - 1)]
        } else {
            options[rng.gen_range(0..options.len())]
        };
        match choice {
            None if can_reach_horizon => {
                let d = fit(remaining, |d| t + d <= horizon && inv_ok(d));
                segments.push(Segment {
                    location: loc,
                    entry: v,
                    start: t,
                    delay: d,
                    edge: None,
                });
                return Ok(Run {
                    segments,
                    end: RunEnd::Horizon,
                });
            }
            None => {
                let d = if window.is_empty() {
                    0.0
                } else if window.hi_strict {
                    (window.hi - f64::EPSILON * window.hi.abs().max(1.0)).max(window.lo)
                } else {
                    window.hi
                };
                let d = fit(d, |d| d <= remaining && inv_ok(d));
                segments.push(Segment {
                    location: loc,
                    entry: v,
                    start: t,
                    delay: d,
                    edge: None,
                });
                return Ok(Run {
                    segments,
                    end: RunEnd::Deadlock,
                });
            }
            Some(k) => {
                let e = &ta.edges()[k];
                let d = fit(window.sample_with(policy, &mut rng), |d| {
                    let moved = Valuation(v.iter().map(|c| c + d).collect());
                    inv_ok(d)
                        && satisfies(&moved, &e.guard).unwrap_or(false)
                        && reset(&moved, &e.reset)
                            .and_then(|r| satisfies(&r, &ta.location(e.dst).invariant))
                            .unwrap_or(false)
                });
                segments.push(Segment {
                    location: loc,
                    entry: v.clone(),
                    start: t,
                    delay: d,
                    edge: Some(k),
                });
                v = reset(&Valuation(v.iter().map(|c| c + d).collect()), &e.reset)?.0;
                t += d;
                loc = e.dst;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::testing::*;
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn single_location_delays_to_the_horizon() {
        let ta = TimedAutomaton::new(
            names("c", 1),
            vec![],
            vec![loc("a", vec![])],
            vec![0],
            vec![],
        )
        .unwrap();
        let run = simulate_run(&ta, 0, 1, 5.0).unwrap();
        assert_eq!(run.segments.len(), 1);
        assert_eq!(run.segments[0].delay, 5.0);
        assert_eq!(run.end, RunEnd::Horizon);
        run.check(&ta).unwrap();
    }

    #[test]
    fn forced_switch_inside_the_window() {
        let ta = two_locations();
        for seed in 0..50 {
            let run = simulate_run(&ta, 0, seed, 3.0).unwrap();
            run.check(&ta).unwrap();
            let d = run.segments[0].delay;
            if run.end == RunEnd::Deadlock {
                assert_eq!(run.segments.len(), 1);
                assert_eq!(d, 1.0);
                continue;
            }
            assert_eq!(run.segments.len(), 2);
            assert!((LN_2..=1.0).contains(&d));
            assert_eq!(run.end_time(), 3.0);
        }
    }

    #[test]
    fn same_seed_same_run() {
        let ta = two_locations();
        assert_eq!(
            simulate_run(&ta, 0, 9, 3.0).unwrap(),
            simulate_run(&ta, 0, 9, 3.0).unwrap()
        );
    }

    #[test]
    fn timelock_is_a_deadlock() {
        let ta = TimedAutomaton::new(
            names("c", 1),
            vec![],
            vec![loc("a", vec![Atom::new(0, Rel::Le, 1.0)])],
            vec![0],
            vec![],
        )
        .unwrap();
        let run = simulate_run(&ta, 0, 0, 5.0).unwrap();
        assert_eq!(run.end, RunEnd::Deadlock);
        assert_eq!(run.end_time(), 1.0);
        assert!(run.locations_at(2.0).is_empty());
        run.check(&ta).unwrap();
    }

    #[test]
    fn check_catches_tampering() {
        let ta = two_locations();
        let seed = (0..)
            .find(|&s| simulate_run(&ta, 0, s, 3.0).unwrap().end == RunEnd::Horizon)
            .unwrap();
        let mut run = simulate_run(&ta, 0, seed, 3.0).unwrap();
        run.segments[0].delay = 0.1;
        assert!(matches!(run.check(&ta), Err(RunViolation::Guard(0))));
        let mut run = simulate_run(&ta, 0, seed, 3.0).unwrap();
        run.segments[1].entry = vec![0.5];
        assert!(matches!(run.check(&ta), Err(RunViolation::Reset(1))));
        let mut run = simulate_run(&ta, 0, seed, 3.0).unwrap();
        run.segments[0].delay = 1.5;
        assert!(matches!(run.check(&ta), Err(RunViolation::Invariant(0))));
    }

    #[test]
    fn non_initial_start_is_rejected() {
        assert!(matches!(
            simulate_run(&two_locations(), 1, 0, 1.0),
            Err(TaError::NotInitial(_))
        ));
    }
}
