use super::Grid;
use crate::expr::{EvalError, Expr};

/// Level-set samples satisfy `|phi(x) - a| <= LEVEL_SAMPLE_TOL`.
pub const LEVEL_SAMPLE_TOL: f64 = 1e-10;

const BISECT_MAX_ITER: usize = 200;

fn lerp(p: &[f64], q: &[f64], s: f64, out: &mut [f64]) {
    for ((o, a), b) in out.iter_mut().zip(p).zip(q) {
        *o = a + s * (b - a);
    }
}

/// Points on `phi^-1(a)` found from the lattice.
///
/// Lattice points already within tolerance are taken as they are; every
/// lattice edge with a strict sign change of `phi - a` is bisected. Results
/// follow lattice order and are thinned by an even stride to at most `max`.
/// `values` must be `grid.sample(phi)`.
pub fn level_set_points(
    grid: &Grid,
    phi: &Expr,
    values: &[f64],
    a: f64,
    max: usize,
) -> Result<Vec<Vec<f64>>, EvalError> {
    let mut out = Vec::new();
    if !a.is_finite() || max == 0 {
        return Ok(out);
    }
    let exact = |v: f64| (v - a).abs() <= LEVEL_SAMPLE_TOL;
    let n = grid.dim();
    let (mut p, mut q, mut x) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for idx in 0..grid.len() {
        let vp = values[idx];
        if exact(vp) {
            out.push(grid.point(idx));
            continue;
        }
        for (_, nb) in grid.forward_neighbors(idx) {
            let vq = values[nb];
            if exact(vq) || (vp - a) * (vq - a) >= 0.0 {
                continue;
            }
            grid.point_into(idx, &mut p);
            grid.point_into(nb, &mut q);
            let (mut lo, mut hi) = (0.0, 1.0);
            let below = vp < a;
            let mut best = (f64::INFINITY, 0.0);
            for _ in 0..BISECT_MAX_ITER {
                let mid = 0.5 * (lo + hi);
                lerp(&p, &q, mid, &mut x);
                let v = phi.eval(&x)?;
                let err = (v - a).abs();
                if err < best.0 {
                    best = (err, mid);
                }
                if err <= LEVEL_SAMPLE_TOL * 1e-2 || hi - lo < 1e-15 {
                    break;
                }
                if (v < a) == below {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if best.0 <= LEVEL_SAMPLE_TOL {
                let mut pt = vec![0.0; n];
                lerp(&p, &q, best.1, &mut pt);
                out.push(pt);
            }
        }
    }
    if out.len() > max {
        let len = out.len();
        out = (0..max).map(|j| out[j * len / max].clone()).collect();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::BoxDomain;
    use crate::expr::parse;

    fn grid(res: usize) -> Grid {
        Grid::new(
            &BoxDomain::from_intervals(&[(-4.0, 4.0), (-4.0, 4.0)]).unwrap(),
            res,
        )
        .unwrap()
    }

    #[test]
    fn circle_samples_lie_on_the_level() {
        let g = grid(51);
        let phi = parse("x1^2 + x2^2", 2).unwrap();
        let vals = g.sample(&phi).unwrap();
        let pts = level_set_points(&g, &phi, &vals, 2.0, 1000).unwrap();
        assert!(pts.len() > 40);
        assert_eq!(
            level_set_points(&g, &phi, &vals, 2.0, 30).unwrap().len(),
            30
        );
        for p in &pts {
            assert!((phi.eval(p).unwrap() - 2.0).abs() <= LEVEL_SAMPLE_TOL);
        }
    }

    #[test]
    fn lattice_points_on_a_level_extremum_are_found() {
        // -x2^2 touches 0 without changing sign
        let g = grid(21);
        let phi = parse("-x2^2", 2).unwrap();
        let vals = g.sample(&phi).unwrap();
        let pts = level_set_points(&g, &phi, &vals, 0.0, 1000).unwrap();
        assert_eq!(pts.len(), 21);
        assert!(pts.iter().all(|p| p[1] == 0.0));
    }

    #[test]
    fn levels_outside_the_range_are_empty() {
        let g = grid(21);
        let phi = parse("x1^2", 2).unwrap();
        let vals = g.sample(&phi).unwrap();
        assert!(level_set_points(&g, &phi, &vals, -1.0, 10)
            .unwrap()
            .is_empty());
        assert!(level_set_points(&g, &phi, &vals, f64::INFINITY, 10)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn thinning_is_deterministic() {
        let g = grid(41);
        let phi = parse("x1 + 0.3 * x2", 2).unwrap();
        let vals = g.sample(&phi).unwrap();
        let a = level_set_points(&g, &phi, &vals, 0.1, 7).unwrap();
        let b = level_set_points(&g, &phi, &vals, 0.1, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 7);
    }
}
