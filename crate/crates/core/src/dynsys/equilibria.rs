use super::{distance, norm, DynSystem, SystemError};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumKind {
    Stable,
    Unstable,
    Saddle,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equilibrium {
    pub point: Vec<f64>,
    /// Row-major Jacobian at `point`.
    pub jacobian: Vec<Vec<f64>>,
    /// `(re, im)` pairs.
    pub eigenvalues: Vec<(f64, f64)>,
    pub kind: EquilibriumKind,
}

const NEWTON_MAX_ITER: usize = 200;
const STEP_TOL: f64 = 1e-14;
/// Accepted residual `|f(x*)|`.
pub(crate) const EQUILIBRIUM_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-6;
const DEGENERATE_TOL: f64 = 1e-9;

fn classify(eigenvalues: &[(f64, f64)]) -> EquilibriumKind {
    if eigenvalues.iter().any(|(re, _)| re.abs() < DEGENERATE_TOL) {
        EquilibriumKind::Degenerate
    } else if eigenvalues.iter().all(|(re, _)| *re < 0.0) {
        EquilibriumKind::Stable
    } else if eigenvalues.iter().all(|(re, _)| *re > 0.0) {
        EquilibriumKind::Unstable
    } else {
        EquilibriumKind::Saddle
    }
}

fn newton(sys: &DynSystem, seed: &[f64]) -> Option<Vec<f64>> {
    let n = sys.dim();
    let mut x = seed.to_vec();
    for _ in 0..NEWTON_MAX_ITER {
        let f = sys.field_at(&x).ok()?;
        if norm(&f) == 0.0 {
            return Some(x);
        }
        let jac = sys.jacobian_at(&x).ok()?;
        let j = DMatrix::from_fn(n, n, |r, c| jac[r][c]);
        let step = j.lu().solve(&DVector::from_vec(f))?;
        if step.iter().any(|v| !v.is_finite()) {
            return None;
        }
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi -= si;
        }
        // keep going past the residual tolerance so degenerate zeros, where
        // Newton is only linear, still collapse onto one point
        if step.norm() < STEP_TOL * (1.0 + norm(&x)) {
            break;
        }
    }
    let f = sys.field_at(&x).ok()?;
    (norm(&f) < EQUILIBRIUM_TOL).then_some(x)
}

/// Equilibria of `sys` inside its domain, found by Newton iteration from a
/// uniform grid of `seeds_per_axis^n` seeds.
///
/// Seeds whose iteration hits a singular Jacobian, diverges, or converges
/// outside the domain are dropped. Results are sorted lexicographically.
pub fn find_equilibria(
    sys: &DynSystem,
    seeds_per_axis: usize,
) -> Result<Vec<Equilibrium>, SystemError> {
    if seeds_per_axis < 2 {
        return Err(SystemError::TooFewSeeds(seeds_per_axis));
    }
    let n = sys.dim();
    let dom = sys.domain();
    let total = seeds_per_axis.pow(n as u32);
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut seed = vec![0.0; n];
    for flat in 0..total {
        let mut rem = flat;
        for axis in (0..n).rev() {
            let k = rem % seeds_per_axis;
            rem /= seeds_per_axis;
            let (lo, hi) = (dom.lo()[axis], dom.hi()[axis]);
            seed[axis] = lo + (hi - lo) * k as f64 / (seeds_per_axis - 1) as f64;
        }
        let Some(x) = newton(sys, &seed) else {
            continue;
        };
        if !dom.contains(&x) {
            continue;
        }
        if found.iter().all(|p| distance(p, &x) >= DEDUP_TOL) {
            found.push(x);
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).expect("finite equilibria"));
    let mut out = Vec::with_capacity(found.len());
    for mut point in found {
        // clean up -0.0 and sub-tolerance noise for stable output
        for v in point.iter_mut() {
            if v.abs() < 1e-15 {
                *v = 0.0;
            }
        }
        let jacobian = sys
            .jacobian_at(&point)
            .expect("jacobian evaluated during Newton");
        let j = DMatrix::from_fn(n, n, |r, c| jacobian[r][c]);
        let mut eigenvalues: Vec<(f64, f64)> = j
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect();
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        let kind = classify(&eigenvalues);
        out.push(Equilibrium {
            point,
            jacobian,
            eigenvalues,
            kind,
        });
    }
    Ok(out)
}
