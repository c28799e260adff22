use super::PartitionError;
use crate::dynsys::BoxDomain;
use crate::expr::{EvalError, Expr};

/// Uniform lattice covering a box inclusively, `resolution` points per axis.
///
/// Points are numbered row-major with the first axis most significant, so
/// index order is lexicographic order of the integer coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    resolution: usize,
    axes: Vec<Vec<f64>>,
    strides: Vec<usize>,
}

pub const MAX_GRID_DIM: usize = 3;

impl Grid {
    pub fn new(domain: &BoxDomain, resolution: usize) -> Result<Self, PartitionError> {
        if resolution < 3 {
            return Err(PartitionError::Resolution(resolution));
        }
        let n = domain.dim();
        if n > MAX_GRID_DIM {
            return Err(PartitionError::TooManyDimensions(n));
        }
        let axes = (0..n)
            .map(|a| {
                let (lo, hi) = (domain.lo()[a], domain.hi()[a]);
                (0..resolution)
                    .map(|k| {
                        if k + 1 == resolution {
                            hi
                        } else {
                            lo + (hi - lo) * k as f64 / (resolution - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        let mut strides = vec![1; n];
        for a in (0..n.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * resolution;
        }
        Ok(Grid {
            resolution,
            axes,
            strides,
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis(&self, a: usize) -> &[f64] {
        &self.axes[a]
    }

    pub fn coords(&self, idx: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| (idx / s) % self.resolution)
            .collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.point_into(idx, &mut out);
        out
    }

    pub fn point_into(&self, idx: usize, out: &mut [f64]) {
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.axes[a][(idx / self.strides[a]) % self.resolution];
        }
    }

    /// Orthogonal neighbours (up to `2n`).
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let r = self.resolution;
        self.strides.iter().flat_map(move |&s| {
            let c = (idx / s) % r;
            let down = (c > 0).then(|| idx - s);
            let up = (c + 1 < r).then(|| idx + s);
            down.into_iter().chain(up)
        })
    }

    /// Neighbours in the positive direction of each axis, with the axis.
    pub fn forward_neighbors(&self, idx: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let r = self.resolution;
        self.strides
            .iter()
            .enumerate()
            .filter_map(move |(a, &s)| ((idx / s) % r + 1 < r).then(|| (a, idx + s)))
    }

    /// Evaluates `e` at every lattice point.
    pub fn sample(&self, e: &Expr) -> Result<Vec<f64>, EvalError> {
        let mut x = vec![0.0; self.dim()];
        (0..self.len())
            .map(|idx| {
                self.point_into(idx, &mut x);
                e.eval(&x)
            })
            .collect()
    }

    /// Lower-corner coordinate, per axis, of the lattice box containing `x`
    /// (clamped to the lattice).
    pub fn enclosing(&self, x: &[f64]) -> Vec<usize> {
        let r = self.resolution;
        self.axes
            .iter()
            .zip(x)
            .map(|(axis, &v)| {
                let (lo, hi) = (axis[0], axis[r - 1]);
                if hi <= lo {
                    return 0;
                }
                let f = ((v - lo) / (hi - lo) * (r - 1) as f64).floor();
                (f.max(0.0) as usize).min(r - 2)
            })
            .collect()
    }

    /// Lattice indices in the `(2 * radius)^n` block around `x`.
    pub fn block_around(&self, x: &[f64], radius: usize) -> Vec<usize> {
        let base = self.enclosing(x);
        let r = self.resolution as isize;
        let ranges: Vec<(isize, isize)> = base
            .iter()
            .map(|&c| {
                let c = c as isize;
                let lo = (c + 1 - radius as isize).max(0);
                let hi = (c + radius as isize).min(r - 1);
                (lo, hi)
            })
            .collect();
        let mut out = Vec::new();
        let mut cur: Vec<isize> = ranges.iter().map(|r| r.0).collect();
        'outer: loop {
            let coords: Vec<usize> = cur.iter().map(|&c| c as usize).collect();
            out.push(self.index(&coords));
            for a in (0..cur.len()).rev() {
                if cur[a] < ranges[a].1 {
                    cur[a] += 1;
                    continue 'outer;
                }
                cur[a] = ranges[a].0;
            }
            break;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Grid {
        Grid::new(
            &BoxDomain::from_intervals(&[(-4.0, 4.0), (-4.0, 4.0)]).unwrap(),
            201,
        )
        .unwrap()
    }

    #[test]
    fn covers_box_inclusively() {
        let g = square();
        assert_eq!(g.len(), 201 * 201);
        assert_eq!(g.point(0), vec![-4.0, -4.0]);
        assert_eq!(g.point(g.len() - 1), vec![4.0, 4.0]);
        // the level values of the saddle example land exactly on the lattice
        assert!(g.axis(0).contains(&0.0));
        assert!(g.axis(0).contains(&1.0));
        assert!(g.axis(0).contains(&-2.0));
    }

    #[test]
    fn index_roundtrip_and_neighbors() {
        let g = square();
        let idx = g.index(&[3, 7]);
        assert_eq!(g.coords(idx), vec![3, 7]);
        assert_eq!(g.neighbors(idx).count(), 4);
        assert_eq!(g.neighbors(0).count(), 2);
        assert_eq!(g.forward_neighbors(g.len() - 1).count(), 0);
    }

    #[test]
    fn rejects_bad_shapes() {
        let d = BoxDomain::from_intervals(&[(0.0, 1.0)]).unwrap();
        assert!(Grid::new(&d, 2).is_err());
        let d4 = BoxDomain::from_intervals(&[(0.0, 1.0); 4]).unwrap();
        assert!(matches!(
            Grid::new(&d4, 5),
            Err(PartitionError::TooManyDimensions(4))
        ));
    }

    #[test]
    fn block_is_clamped() {
        let g = square();
        assert_eq!(g.block_around(&[-4.0, -4.0], 1).len(), 4);
        assert_eq!(g.block_around(&[0.01, 0.01], 2).len(), 16);
        assert_eq!(g.block_around(&[4.0, 4.0], 2).len(), 9);
    }
}
