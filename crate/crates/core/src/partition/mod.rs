//! Level-set partitions of the state space into closed cells.

mod cells;
mod grid;
mod levelset;

pub use cells::{build_cells, Adjacency, Cell, Partition, PartitionWarning};
pub use grid::{Grid, MAX_GRID_DIM};
pub use levelset::{level_set_points, LEVEL_SAMPLE_TOL};

use crate::dynsys::DynSystem;
use crate::expr::{gradient, lie_derivative, EvalError, Expr};
use crate::verify::{Verdict, VerdictKind, Witness};
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PartitionError {
    #[error("partition `{name}`: at least two levels are required")]
    TooFewLevels { name: String },
    #[error("partition `{name}`: levels not strictly increasing at position {position}")]
    LevelsNotIncreasing { name: String, position: usize },
    #[error("partition `{name}`: only the first and last level may be infinite")]
    InfiniteInteriorLevel { name: String },
    #[error("partition `{name}`: phi uses x{index} but the system has dimension {dim}")]
    VarOutOfRange {
        name: String,
        index: usize,
        dim: usize,
    },
    #[error("grid resolution must be at least 3, got {0}")]
    Resolution(usize),
    #[error("grids are limited to {MAX_GRID_DIM} dimensions, got {0}")]
    TooManyDimensions(usize),
    #[error("partition `{name}`: phi = {value} at {point:?} lies outside the level range")]
    Uncovered {
        name: String,
        point: Vec<f64>,
        value: f64,
    },
    #[error("point {0:?} is outside the domain")]
    OutsideDomain(Vec<f64>),
    #[error("no partition functions given")]
    NoFamilies,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Relative tolerance deciding that a value sits on a level.
pub const ON_LEVEL_TOL: f64 = 1e-12;

pub(crate) fn on_level(v: f64, a: f64) -> bool {
    if a.is_infinite() {
        return v == a;
    }
    (v - a).abs() <= ON_LEVEL_TOL * a.abs().max(1.0)
}

/// One slice: the closed value interval `[lower, upper]` of a family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Slice {
    /// 1-based.
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionFunction {
    name: String,
    phi: Expr,
    levels: Vec<f64>,
    psi: Expr,
    grad: Vec<Expr>,
}

impl PartitionFunction {
    pub fn new(
        name: impl Into<String>,
        phi: Expr,
        levels: Vec<f64>,
        sys: &DynSystem,
    ) -> Result<Self, PartitionError> {
        let name = name.into();
        if levels.len() < 2 {
            return Err(PartitionError::TooFewLevels { name });
        }
        for (position, w) in levels.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(PartitionError::LevelsNotIncreasing {
                    name,
                    position: position + 1,
                });
            }
        }
        let last = levels.len() - 1;
        if levels[1..last].iter().any(|a| a.is_infinite())
            || levels[0] == f64::INFINITY
            || levels[last] == f64::NEG_INFINITY
        {
            return Err(PartitionError::InfiniteInteriorLevel { name });
        }
        let dim = sys.dim();
        if let Some(index) = Some(phi.max_var()).filter(|&i| i > dim) {
            return Err(PartitionError::VarOutOfRange { name, index, dim });
        }
        let psi = lie_derivative(&phi, sys.field());
        let grad = gradient(&phi, dim);
        Ok(PartitionFunction {
            name,
            phi,
            levels,
            psi,
            grad,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn phi(&self) -> &Expr {
        &self.phi
    }

    pub fn psi(&self) -> &Expr {
        &self.psi
    }

    pub fn grad(&self) -> &[Expr] {
        &self.grad
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn slice_count(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn slices(&self) -> Vec<Slice> {
        build_slices(self)
    }

    pub fn grad_norm(&self, x: &[f64]) -> Result<f64, EvalError> {
        let mut s = 0.0;
        for g in &self.grad {
            let v = g.eval(x)?;
            s += v * v;
        }
        Ok(s.sqrt())
    }

    /// Slices whose closed interval contains `v`, as an inclusive 1-based
    /// range. `None` when `v` lies outside `[a_0, a_k]`.
    pub fn slice_range(&self, v: f64) -> Option<(u32, u32)> {
        let a = &self.levels;
        let k = a.len() - 1;
        if v.is_nan() {
            return None;
        }
        if v < a[0] && !on_level(v, a[0]) || v > a[k] && !on_level(v, a[k]) {
            return None;
        }
        // first slice i with v <= a_i (within tolerance)
        let mut lo = 1;
        while lo < k && !(v <= a[lo] || on_level(v, a[lo])) {
            lo += 1;
        }
        let mut hi = lo;
        while hi < k && on_level(v, a[hi]) {
            hi += 1;
        }
        Some((lo as u32, hi as u32))
    }
}

/// Slice descriptors `[a_{i-1}, a_i]`, `i = 1..=k`.
pub fn build_slices(pf: &PartitionFunction) -> Vec<Slice> {
    pf.levels
        .windows(2)
        .enumerate()
        .map(|(i, w)| Slice {
            index: i + 1,
            lower: w[0],
            upper: w[1],
        })
        .collect()
}

/// Default tolerance on `psi <= 0`.
pub const TOL_PSI: f64 = 1e-9;

/// Checks `psi(x) <= tol_psi` at every grid point.
pub fn validate_nonincreasing(pf: &PartitionFunction, grid: &Grid, tol_psi: f64) -> Verdict {
    let mut verdict = Verdict::new(VerdictKind::Nonincreasing, pf.name())
        .tolerance("psi", tol_psi)
        .coverage(format!(
            "{} grid points ({} per axis)",
            grid.len(),
            grid.resolution()
        ));
    let mut worst: Option<(usize, f64)> = None;
    let mut x = vec![0.0; grid.dim()];
    let mut undefined = None;
    for idx in 0..grid.len() {
        grid.point_into(idx, &mut x);
        match pf.psi.eval(&x) {
            Ok(v) => {
                if v > tol_psi && worst.map_or(true, |(_, w)| v > w) {
                    worst = Some((idx, v));
                }
            }
            Err(_) if undefined.is_none() => undefined = Some(idx),
            Err(_) => {}
        }
    }
    if let Some((idx, v)) = worst {
        verdict.fail();
        verdict.witness(Witness::new("max psi").at(&grid.point(idx)).value(v));
    }
    if let Some(idx) = undefined {
        verdict.fail();
        verdict.witness(Witness::new("psi undefined").at(&grid.point(idx)));
    }
    verdict
}
