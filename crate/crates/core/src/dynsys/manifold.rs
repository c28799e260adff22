use super::flow::integrate;
use super::{DynSystem, Equilibrium, EquilibriumKind};
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Stable,
    Unstable,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ManifoldError {
    #[error("manifold shooting is implemented for planar systems only (dimension {0})")]
    NotPlanar(usize),
    #[error("equilibrium at {0:?} is not a saddle")]
    NotSaddle(Vec<f64>),
    #[error("seed offset must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error(transparent)]
    Flow(#[from] super::FlowError),
}

/// One half-branch of a saddle's stable or unstable manifold as a polyline.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifoldApprox {
    pub equilibrium: Vec<f64>,
    pub branch: Branch,
    /// Unit eigenvector the seed was displaced along (already signed).
    pub direction: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

/// Real eigenvalues of a 2x2 matrix with negative determinant, ascending.
fn saddle_eigenvalues(j: &[Vec<f64>]) -> (f64, f64) {
    let (a, b, c, d) = (j[0][0], j[0][1], j[1][0], j[1][1]);
    let half_tr = 0.5 * (a + d);
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    (half_tr - disc, half_tr + disc)
}

fn eigenvector(j: &[Vec<f64>], lambda: f64) -> [f64; 2] {
    let (a, b, c, d) = (j[0][0], j[0][1], j[1][0], j[1][1]);
    let v = if b.abs() >= c.abs() && b != 0.0 {
        [b, lambda - a]
    } else if c != 0.0 {
        [lambda - d, c]
    } else if (a - lambda).abs() <= (d - lambda).abs() {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / n, v[1] / n]
}

/// Approximates both half-branches of `W^s(p)` or `W^u(p)` at a planar saddle.
///
/// Each half starts at `p +- delta * v` with `v` the eigenvector of the
/// negative (stable) or positive (unstable) eigenvalue and follows the field
/// forward, or backward for the stable branch, until it leaves the domain or
/// `t_horizon` elapses.
pub fn approximate_manifold(
    sys: &DynSystem,
    eq: &Equilibrium,
    branch: Branch,
    delta: f64,
    t_horizon: f64,
    h: f64,
) -> Result<Vec<ManifoldApprox>, ManifoldError> {
    if sys.dim() != 2 {
        return Err(ManifoldError::NotPlanar(sys.dim()));
    }
    if eq.kind != EquilibriumKind::Saddle {
        return Err(ManifoldError::NotSaddle(eq.point.clone()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(ManifoldError::BadDelta(delta));
    }
    let (neg, pos) = saddle_eigenvalues(&eq.jacobian);
    let (lambda, sign) = match branch {
        Branch::Unstable => (pos, 1.0),
        Branch::Stable => (neg, -1.0),
    };
    let v = eigenvector(&eq.jacobian, lambda);
    let mut out = Vec::with_capacity(2);
    for s in [1.0, -1.0] {
        let direction = vec![s * v[0], s * v[1]];
        let seed = vec![
            eq.point[0] + delta * direction[0],
            eq.point[1] + delta * direction[1],
        ];
        let points = if sys.domain().contains(&seed) {
            integrate(sys, &seed, t_horizon, h, sign)?.states
        } else {
            Vec::new()
        };
        out.push(ManifoldApprox {
            equilibrium: eq.point.clone(),
            branch,
            direction,
            points,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::find_equilibria;
    use crate::dynsys::testing::saddle;

    fn saddle_eq() -> Equilibrium {
        find_equilibria(&saddle(), 9).unwrap().remove(0)
    }

    #[test]
    fn unstable_branch_is_the_x2_axis() {
        let sys = saddle();
        let w =
            approximate_manifold(&sys, &saddle_eq(), Branch::Unstable, 1e-4, 50.0, 1e-3).unwrap();
        assert_eq!(w.len(), 2);
        for half in &w {
            assert!(half.points.len() > 100);
            assert!(half.points.iter().all(|p| p[0].abs() < 1e-6));
            assert!(half.points.iter().all(|p| sys.domain().contains(p)));
            // reaches the domain edge
            assert!(half.points.last().unwrap()[1].abs() > 3.9);
        }
    }

    #[test]
    fn stable_branch_is_the_x1_axis() {
        let w = approximate_manifold(&saddle(), &saddle_eq(), Branch::Stable, 1e-4, 50.0, 1e-3)
            .unwrap();
        for half in &w {
            assert!(half.points.iter().all(|p| p[1].abs() < 1e-6));
            assert!(half.points.last().unwrap()[0].abs() > 3.9);
        }
    }

    #[test]
    fn rotated_saddle() {
        // x1' = x2, x2' = x1: unstable along (1, 1), stable along (1, -1)
        let sys = DynSystem::new(
            vec![
                crate::expr::parse("x2", 2).unwrap(),
                crate::expr::parse("x1", 2).unwrap(),
            ],
            crate::dynsys::BoxDomain::from_intervals(&[(-2.0, 2.0), (-2.0, 2.0)]).unwrap(),
            None,
        )
        .unwrap();
        let eq = find_equilibria(&sys, 5).unwrap().remove(0);
        let w = approximate_manifold(&sys, &eq, Branch::Unstable, 1e-4, 20.0, 1e-3).unwrap();
        for half in &w {
            assert!(half.points.iter().all(|p| (p[0] - p[1]).abs() < 1e-6));
        }
        let w = approximate_manifold(&sys, &eq, Branch::Stable, 1e-4, 20.0, 1e-3).unwrap();
        for half in &w {
            assert!(half.points.iter().all(|p| (p[0] + p[1]).abs() < 1e-6));
        }
    }

    #[test]
    fn rejects_zero_delta() {
        let err = approximate_manifold(&saddle(), &saddle_eq(), Branch::Unstable, 0.0, 1.0, 1e-3)
            .unwrap_err();
        assert_eq!(err, ManifoldError::BadDelta(0.0));
    }

    #[test]
    fn rejects_non_saddle() {
        let mut eq = saddle_eq();
        eq.kind = EquilibriumKind::Stable;
        assert!(matches!(
            approximate_manifold(&saddle(), &eq, Branch::Unstable, 1e-4, 1.0, 1e-3),
            Err(ManifoldError::NotSaddle(_))
        ));
    }
}
