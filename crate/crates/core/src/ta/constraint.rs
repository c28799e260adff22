use super::TaError;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Rel {
    pub const ALL: [Rel; 5] = [Rel::Le, Rel::Lt, Rel::Eq, Rel::Gt, Rel::Ge];

    pub fn as_str(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Eq => "==",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }

    pub fn from_str(s: &str) -> Option<Rel> {
        Rel::ALL.into_iter().find(|r| r.as_str() == s)
    }

    pub fn holds(self, lhs: f64, k: f64) -> bool {
        match self {
            Rel::Le => lhs <= k,
            Rel::Lt => lhs < k,
            Rel::Eq => lhs == k,
            Rel::Gt => lhs > k,
            Rel::Ge => lhs >= k,
        }
    }
}

/// `clock rel k`, `clock` indexing the automaton's clock list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub clock: usize,
    pub rel: Rel,
    pub k: f64,
}

impl Atom {
    pub fn new(clock: usize, rel: Rel, k: f64) -> Self {
        Atom { clock, rel, k }
    }
}

/// Conjunction of atoms; empty means true.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ClockConstraint {
    pub atoms: Vec<Atom>,
}

impl ClockConstraint {
    pub fn truth() -> Self {
        ClockConstraint::default()
    }

    pub fn new(atoms: Vec<Atom>) -> Self {
        ClockConstraint { atoms }
    }

    pub fn and(mut self, atom: Atom) -> Self {
        self.atoms.push(atom);
        self
    }

    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn satisfied_by(&self, v: &Valuation) -> Result<bool, TaError> {
        satisfies(v, self)
    }

    /// Renders with the given clock names, `true` when empty.
    pub fn display<'a>(&'a self, clocks: &'a [String]) -> impl fmt::Display + 'a {
        ConstraintDisplay {
            c: self,
            names: clocks,
        }
    }
}

struct ConstraintDisplay<'a> {
    c: &'a ClockConstraint,
    names: &'a [String],
}

impl fmt::Display for ConstraintDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.atoms.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.c.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            let name = self.names.get(a.clock).map(String::as_str).unwrap_or("?");
            write!(f, "{} {} {}", name, a.rel.as_str(), a.k)?;
        }
        Ok(())
    }
}

/// Clock values, one per clock, all nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct Valuation(pub Vec<f64>);

impl Valuation {
    pub fn zero(clocks: usize) -> Self {
        Valuation(vec![0.0; clocks])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, clock: usize) -> Option<f64> {
        self.0.get(clock).copied()
    }
}

pub fn satisfies(v: &Valuation, psi: &ClockConstraint) -> Result<bool, TaError> {
    let mut ok = true;
    for a in &psi.atoms {
        let x = v.get(a.clock).ok_or(TaError::UnknownClock(a.clock))?;
        ok &= a.rel.holds(x, a.k);
    }
    Ok(ok)
}

/// `v + d`.
pub fn delay(v: &Valuation, d: f64) -> Result<Valuation, TaError> {
    if !(d >= 0.0) {
        return Err(TaError::NegativeDelay(d));
    }
    Ok(Valuation(v.0.iter().map(|x| x + d).collect()))
}

/// `v[R]`: clocks in `r` set to zero.
pub fn reset(v: &Valuation, r: &[usize]) -> Result<Valuation, TaError> {
    let mut out = v.clone();
    for &c in r {
        *out.0.get_mut(c).ok_or(TaError::UnknownClock(c))? = 0.0;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn satisfaction_examples() {
        let v = Valuation(vec![2.0]);
        assert!(satisfies(&v, &ClockConstraint::new(vec![Atom::new(0, Rel::Le, 3.0)])).unwrap());
        let half_open =
            ClockConstraint::new(vec![Atom::new(0, Rel::Ge, 1.0), Atom::new(0, Rel::Lt, 2.0)]);
        assert!(!satisfies(&v, &half_open).unwrap());
        assert!(satisfies(&v, &ClockConstraint::truth()).unwrap());
        let unknown = ClockConstraint::new(vec![Atom::new(3, Rel::Eq, 0.0)]);
        assert_eq!(satisfies(&v, &unknown), Err(TaError::UnknownClock(3)));
    }

    #[test]
    fn delay_and_reset_examples() {
        let v = Valuation(vec![0.0, 1.0]);
        assert_eq!(delay(&v, 0.5).unwrap(), Valuation(vec![0.5, 1.5]));
        assert!(matches!(delay(&v, -0.1), Err(TaError::NegativeDelay(_))));
        assert_eq!(reset(&v, &[]).unwrap(), v);
        assert_eq!(
            reset(&Valuation(vec![3.0, 1.0]), &[0]).unwrap(),
            Valuation(vec![0.0, 1.0])
        );
    }

    #[test]
    fn display_uses_names() {
        let names = vec!["c1".to_string(), "c2".to_string()];
        let c = ClockConstraint::new(vec![Atom::new(0, Rel::Ge, 0.5), Atom::new(1, Rel::Lt, 2.0)]);
        assert_eq!(c.display(&names).to_string(), "c1 >= 0.5 && c2 < 2");
        assert_eq!(ClockConstraint::truth().display(&names).to_string(), "true");
    }

    #[test]
    fn rel_names_roundtrip() {
        for r in Rel::ALL {
            assert_eq!(Rel::from_str(r.as_str()), Some(r));
        }
        assert_eq!(Rel::from_str("=<"), None);
    }
}
