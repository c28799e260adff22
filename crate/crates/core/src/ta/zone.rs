use super::{Atom, ClockConstraint, Rel};
use std::cmp::Ordering;

/// Slack used when deciding emptiness and inclusion. Constants are reals
/// and shortest paths accumulate rounding.
pub const ZONE_EPS: f64 = 1e-9;

/// Upper bound on a clock difference: `x_i - x_j < value` or `<= value`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub strict: bool,
}

impl Bound {
    pub const INF: Bound = Bound {
        value: f64::INFINITY,
        strict: true,
    };
    /// Filler for every entry of an empty zone.
    pub const EMPTY: Bound = Bound {
        value: -1.0,
        strict: true,
    };
    pub const ZERO: Bound = Bound {
        value: 0.0,
        strict: false,
    };

    pub fn le(value: f64) -> Self {
        Bound {
            value,
            strict: false,
        }
    }

    pub fn lt(value: f64) -> Self {
        Bound {
            value,
            strict: true,
        }
    }

    pub fn is_inf(self) -> bool {
        self.value == f64::INFINITY
    }

    fn add(self, other: Bound) -> Bound {
        if self.is_inf() || other.is_inf() {
            return Bound::INF;
        }
        Bound {
            value: self.value + other.value,
            strict: self.strict || other.strict,
        }
    }

    fn cmp_tight(self, other: Bound) -> Ordering {
        match self
            .value
            .partial_cmp(&other.value)
            .expect("bounds are not NaN")
        {
            Ordering::Equal => other.strict.cmp(&self.strict),
            o => o,
        }
    }

    fn min(self, other: Bound) -> Bound {
        if self.cmp_tight(other) == Ordering::Greater {
            other
        } else {
            self
        }
    }
}

/// Difference-bound matrix over a reference clock (index 0), the automaton
/// clocks (1..=m) and an elapsed-time clock (m + 1) that is never reset.
#[derive(Clone, Debug, PartialEq)]
pub struct Zone {
    n: usize,
    d: Vec<Bound>,
}

impl Zone {
    /// All clocks and elapsed time equal to zero.
    pub fn origin(clocks: usize) -> Self {
        let n = clocks + 2;
        Zone {
            n,
            d: vec![Bound::ZERO; n * n],
        }
    }

    pub fn clocks(&self) -> usize {
        self.n - 2
    }

    fn tau(&self) -> usize {
        self.n - 1
    }

    pub fn get(&self, i: usize, j: usize) -> Bound {
        self.d[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, b: Bound) {
        self.d[i * self.n + j] = b;
    }

    fn tighten(&mut self, i: usize, j: usize, b: Bound) {
        let cur = self.get(i, j);
        self.set(i, j, cur.min(b));
    }

    /// Floyd-Warshall closure. An empty result is normalized to a fixed
    /// matrix so that closing again changes nothing.
    pub fn canonicalize(&mut self) {
        let n = self.n;
        for k in 0..n {
            for i in 0..n {
                let ik = self.get(i, k);
                if ik.is_inf() {
                    continue;
                }
                for j in 0..n {
                    let via = ik.add(self.get(k, j));
                    self.tighten(i, j, via);
                }
            }
        }
        if self.is_empty() {
            self.d.fill(Bound::EMPTY);
        }
    }

    /// A negative cycle, with `ZONE_EPS` of slack for non-strict bounds.
    /// Strict bounds are taken exactly.
    pub fn is_empty(&self) -> bool {
        (0..self.n).any(|i| {
            let b = self.get(i, i);
            b.value < -ZONE_EPS || (b.strict && b.value <= 0.0)
        })
    }

    /// Time elapse: drops the upper bounds of every clock.
    pub fn up(&mut self) {
        for i in 1..self.n {
            self.set(i, 0, Bound::INF);
        }
    }

    fn constrain_clock(&mut self, c: usize, rel: Rel, k: f64) {
        match rel {
            Rel::Le => self.tighten(c, 0, Bound::le(k)),
            Rel::Lt => self.tighten(c, 0, Bound::lt(k)),
            Rel::Ge => self.tighten(0, c, Bound::le(-k)),
            Rel::Gt => self.tighten(0, c, Bound::lt(-k)),
            Rel::Eq => {
                self.tighten(c, 0, Bound::le(k));
                self.tighten(0, c, Bound::le(-k));
            }
        }
    }

    /// Intersects with one atom over the automaton's clocks and closes.
    pub fn constrain(&mut self, atom: Atom) {
        self.constrain_clock(atom.clock + 1, atom.rel, atom.k);
        self.canonicalize();
    }

    pub fn constrain_all(&mut self, c: &ClockConstraint) {
        if c.atoms.is_empty() {
            return;
        }
        for a in &c.atoms {
            self.constrain_clock(a.clock + 1, a.rel, a.k);
        }
        self.canonicalize();
    }

    /// Intersects with `lo <= tau <= hi`.
    pub fn constrain_elapsed(&mut self, lo: f64, hi: f64) {
        let t = self.tau();
        self.tighten(t, 0, Bound::le(hi));
        self.tighten(0, t, Bound::le(-lo));
        self.canonicalize();
    }

    /// Sets the given automaton clocks to zero; stays canonical.
    pub fn reset(&mut self, clocks: &[usize]) {
        for &c in clocks {
            let c = c + 1;
            for j in 0..self.n {
                let b0j = self.get(0, j);
                let bj0 = self.get(j, 0);
                self.set(c, j, b0j);
                self.set(j, c, bj0);
            }
            self.set(c, c, Bound::ZERO);
        }
    }

    /// `self` is a subset of `other`, within `ZONE_EPS`.
    pub fn included_in(&self, other: &Zone) -> bool {
        self.d
            .iter()
            .zip(&other.d)
            .all(|(a, b)| b.is_inf() || (!a.is_inf() && a.value <= b.value + ZONE_EPS))
    }

    /// Whether some valuation in the zone has elapsed time in `[lo, hi]`.
    /// The zone must be canonical, where the projection onto elapsed time
    /// is read off directly.
    pub fn admits_elapsed(&self, lo: f64, hi: f64) -> bool {
        let (min, max) = self.elapsed_range();
        min <= hi + ZONE_EPS && lo <= max + ZONE_EPS
    }

    /// Interval of elapsed time, `(min, max)`.
    pub fn elapsed_range(&self) -> (f64, f64) {
        let t = self.tau();
        (-self.get(0, t).value, self.get(t, 0).value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_then_up_is_the_diagonal() {
        let mut z = Zone::origin(2);
        z.up();
        z.canonicalize();
        // every clock still equals elapsed time
        assert_eq!(z.get(1, 3), Bound::ZERO);
        assert_eq!(z.get(3, 2), Bound::ZERO);
        assert!(z.get(1, 0).is_inf());
        assert!(!z.is_empty());
    }

    #[test]
    fn invariant_and_guard_meet_in_a_point() {
        let ln2 = std::f64::consts::LN_2;
        let mut z = Zone::origin(1);
        z.up();
        z.constrain(Atom::new(0, Rel::Le, ln2));
        z.constrain(Atom::new(0, Rel::Ge, ln2));
        assert!(!z.is_empty());
        assert_eq!(z.elapsed_range(), (ln2, ln2));
        z.constrain(Atom::new(0, Rel::Lt, 0.5));
        assert!(z.is_empty());
    }

    #[test]
    fn reset_keeps_elapsed_time() {
        let mut z = Zone::origin(2);
        z.up();
        z.constrain(Atom::new(0, Rel::Eq, 1.0));
        z.reset(&[0]);
        let (lo, hi) = z.elapsed_range();
        assert_eq!((lo, hi), (1.0, 1.0));
        assert_eq!(z.get(1, 0), Bound::ZERO);
        assert_eq!(z.get(2, 0), Bound::le(1.0));
        let mut again = z.clone();
        again.canonicalize();
        assert_eq!(again, z);
    }

    #[test]
    fn inclusion() {
        let mut small = Zone::origin(1);
        small.up();
        small.constrain(Atom::new(0, Rel::Le, 1.0));
        let mut big = Zone::origin(1);
        big.up();
        assert!(small.included_in(&big));
        assert!(!big.included_in(&small));
        assert!(small.admits_elapsed(0.5, 0.5));
        assert!(!small.admits_elapsed(1.5, 2.0));
    }
}
