//! Autonomous systems `x' = f(x)` on an axis-aligned box, their numerical
//! flow, equilibria, and planar saddle manifolds.

mod equilibria;
mod flow;
mod manifold;

pub use equilibria::{find_equilibria, Equilibrium, EquilibriumKind};
pub use flow::{flow, flow_at_times, flow_until_level, FlowError, FlowSample, LevelCrossing};
pub use manifold::{approximate_manifold, Branch, ManifoldApprox, ManifoldError};

use crate::expr::{EvalError, Expr};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SystemError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("expected {expected} vector field components, got {got}")]
    FieldArity { expected: usize, got: usize },
    #[error("vector field component {component} references x{index} beyond dimension {dim}")]
    VarOutOfRange {
        component: usize,
        index: usize,
        dim: usize,
    },
    #[error("box has {got} axes, expected {expected}")]
    BoxArity { expected: usize, got: usize },
    #[error("box axis {axis} is malformed: [{lo}, {hi}]")]
    MalformedBox { axis: usize, lo: f64, hi: f64 },
    #[error("initial box is not contained in the domain")]
    InitOutsideDomain,
    #[error("need at least 2 seeds per axis, got {0}")]
    TooFewSeeds(usize),
}

/// Closed axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, SystemError> {
        if lo.len() != hi.len() {
            return Err(SystemError::BoxArity {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        for (axis, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l <= h) {
                return Err(SystemError::MalformedBox { axis, lo: l, hi: h });
            }
        }
        Ok(BoxDomain { lo, hi })
    }

    /// Box from `(lo, hi)` pairs, one per axis.
    pub fn from_intervals(bounds: &[(f64, f64)]) -> Result<Self, SystemError> {
        Self::new(
            bounds.iter().map(|b| b.0).collect(),
            bounds.iter().map(|b| b.1).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    pub fn contains_box(&self, other: &BoxDomain) -> bool {
        other.dim() == self.dim() && self.contains(&other.lo) && self.contains(&other.hi)
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }

    /// Uniform sample from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| if l == h { l } else { rng.gen_range(l..=h) })
            .collect()
    }
}

/// Dynamical system `x' = f(x)` restricted to a box domain.
#[derive(Clone, Debug, PartialEq)]
pub struct DynSystem {
    field: Vec<Expr>,
    jacobian: Vec<Vec<Expr>>,
    domain: BoxDomain,
    init: Option<BoxDomain>,
}

impl DynSystem {
    pub fn new(
        field: Vec<Expr>,
        domain: BoxDomain,
        init: Option<BoxDomain>,
    ) -> Result<Self, SystemError> {
        let dim = domain.dim();
        if dim == 0 {
            return Err(SystemError::ZeroDimension);
        }
        if field.len() != dim {
            return Err(SystemError::FieldArity {
                expected: dim,
                got: field.len(),
            });
        }
        for (component, f) in field.iter().enumerate() {
            let index = f.max_var();
            if index > dim {
                return Err(SystemError::VarOutOfRange {
                    component: component + 1,
                    index,
                    dim,
                });
            }
        }
        if let Some(init) = &init {
            if init.dim() != dim {
                return Err(SystemError::BoxArity {
                    expected: dim,
                    got: init.dim(),
                });
            }
            if !domain.contains_box(init) {
                return Err(SystemError::InitOutsideDomain);
            }
        }
        let jacobian = field
            .iter()
            .map(|fi| (1..=dim).map(|j| fi.differentiate(j)).collect())
            .collect();
        Ok(DynSystem {
            field,
            jacobian,
            domain,
            init,
        })
    }

    pub fn dim(&self) -> usize {
        self.field.len()
    }

    pub fn field(&self) -> &[Expr] {
        &self.field
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn init(&self) -> Option<&BoxDomain> {
        self.init.as_ref()
    }

    /// The initial box, or the whole domain when none was given.
    pub fn init_or_domain(&self) -> &BoxDomain {
        self.init.as_ref().unwrap_or(&self.domain)
    }

    /// Writes `f(x)` into `out`.
    pub fn eval_field(&self, x: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        for (o, f) in out.iter_mut().zip(&self.field) {
            *o = f.eval(x)?;
        }
        Ok(())
    }

    pub fn field_at(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut out = vec![0.0; self.dim()];
        self.eval_field(x, &mut out)?;
        Ok(out)
    }

    /// Row-major Jacobian `df_i / dx_j` at `x`.
    pub fn jacobian_at(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        self.jacobian
            .iter()
            .map(|row| row.iter().map(|e| e.eval(x)).collect())
            .collect()
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
