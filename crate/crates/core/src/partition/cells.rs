use super::{Grid, PartitionError, PartitionFunction};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// A connected component of an extended cell, as a set of lattice points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cell {
    /// 1-based slice index per family.
    pub g: Vec<u32>,
    /// 1-based component label within the extended cell `g`.
    pub h: u32,
    /// Ascending lattice indices.
    pub points: Vec<usize>,
}

impl Cell {
    pub fn label(&self) -> String {
        let g: Vec<String> = self.g.iter().map(|v| v.to_string()).collect();
        format!("e({})h{}", g.join(","), self.h)
    }

    pub fn g_sum(&self) -> u32 {
        self.g.iter().sum()
    }
}

/// `from` and `to` touch and `to.g` is `from.g` with `family` decremented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Adjacency {
    pub from: usize,
    pub to: usize,
    /// 0-based family index.
    pub family: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum PartitionWarning {
    EmptySlice {
        family: String,
        slice: usize,
    },
    /// Gradients of two families are (near) parallel at lattice points on
    /// both families' level boundaries.
    ParallelGradients {
        families: (String, String),
        count: usize,
        point: Vec<f64>,
    },
}

const PARALLEL_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct Partition {
    families: Vec<PartitionFunction>,
    grid: Grid,
    values: Vec<Vec<f64>>,
    ranges: Vec<Vec<(u32, u32)>>,
    cells: Vec<Cell>,
    offsets: Vec<usize>,
    point_cells: Vec<u32>,
    adjacency: Vec<Adjacency>,
    warnings: Vec<PartitionWarning>,
}

/// Steps `g` to the next vector of the product of ranges, last axis
/// fastest. Returns false after the last one (with `g` reset).
fn advance(g: &mut [u32], range: impl Fn(usize) -> (u32, u32)) -> bool {
    for i in (0..g.len()).rev() {
        let (lo, hi) = range(i);
        if g[i] < hi {
            g[i] += 1;
            return true;
        }
        g[i] = lo;
    }
    false
}

fn contains(range: (u32, u32), gi: u32) -> bool {
    range.0 <= gi && gi <= range.1
}

/// Builds every cell, the point-to-cell index and the adjacency relation.
pub fn build_cells(
    families: Vec<PartitionFunction>,
    grid: Grid,
) -> Result<Partition, PartitionError> {
    if families.is_empty() {
        return Err(PartitionError::NoFamilies);
    }
    for pf in &families {
        if let Some(index) = Some(pf.phi().max_var()).filter(|&i| i > grid.dim()) {
            return Err(PartitionError::VarOutOfRange {
                name: pf.name().to_string(),
                index,
                dim: grid.dim(),
            });
        }
    }
    let npts = grid.len();
    let mut values = Vec::with_capacity(families.len());
    let mut ranges = Vec::with_capacity(families.len());
    for pf in &families {
        let vals = grid.sample(pf.phi())?;
        let mut rs = Vec::with_capacity(npts);
        for (idx, &v) in vals.iter().enumerate() {
            match pf.slice_range(v) {
                Some(r) => rs.push(r),
                None => {
                    return Err(PartitionError::Uncovered {
                        name: pf.name().to_string(),
                        point: grid.point(idx),
                        value: v,
                    })
                }
            }
        }
        values.push(vals);
        ranges.push(rs);
    }

    // every point goes to each g in the product of its slice ranges
    let m = families.len();
    let mut by_g: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
    let mut g = vec![0u32; m];
    for idx in 0..npts {
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = ranges[i][idx].0;
        }
        loop {
            by_g.entry(g.clone()).or_default().push(idx);
            if !advance(&mut g, |i| ranges[i][idx]) {
                break;
            }
        }
    }

    let in_g = |q: usize, g: &[u32]| {
        g.iter()
            .enumerate()
            .all(|(i, &gi)| contains(ranges[i][q], gi))
    };
    let mut cells = Vec::new();
    let mut seen = vec![0u32; npts];
    let mut stamp = 0u32;
    let mut stack = Vec::new();
    for (g, pts) in &by_g {
        stamp += 1;
        let mut h = 0;
        for &start in pts {
            if seen[start] == stamp {
                continue;
            }
            h += 1;
            seen[start] = stamp;
            stack.push(start);
            let mut comp = Vec::new();
            while let Some(p) = stack.pop() {
                comp.push(p);
                for q in grid.neighbors(p) {
                    if seen[q] != stamp && in_g(q, g) {
                        seen[q] = stamp;
                        stack.push(q);
                    }
                }
            }
            comp.sort_unstable();
            cells.push(Cell {
                g: g.clone(),
                h,
                points: comp,
            });
        }
    }

    let mut offsets = vec![0usize; npts + 1];
    for c in &cells {
        for &p in &c.points {
            offsets[p + 1] += 1;
        }
    }
    for i in 0..npts {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut point_cells = vec![0u32; offsets[npts]];
    for (ci, c) in cells.iter().enumerate() {
        for &p in &c.points {
            point_cells[fill[p]] = ci as u32;
            fill[p] += 1;
        }
    }

    let mut partition = Partition {
        families,
        grid,
        values,
        ranges,
        cells,
        offsets,
        point_cells,
        adjacency: Vec::new(),
        warnings: Vec::new(),
    };
    partition.adjacency = partition.compute_adjacency();
    partition.warnings = partition.compute_warnings()?;
    Ok(partition)
}

impl Partition {
    pub fn families(&self) -> &[PartitionFunction] {
        &self.families
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn adjacency(&self) -> &[Adjacency] {
        &self.adjacency
    }

    pub fn warnings(&self) -> &[PartitionWarning] {
        &self.warnings
    }

    /// Sampled `phi` of family `i` at every lattice point.
    pub fn values(&self, family: usize) -> &[f64] {
        &self.values[family]
    }

    /// Indices of the cells containing lattice point `p`.
    pub fn cells_at(&self, p: usize) -> &[u32] {
        &self.point_cells[self.offsets[p]..self.offsets[p + 1]]
    }

    pub fn cell_index(&self, g: &[u32], h: u32) -> Option<usize> {
        self.cells.iter().position(|c| c.g == g && c.h == h)
    }

    pub fn extended_cell_count(&self) -> usize {
        let mut n = 0;
        let mut last: Option<&[u32]> = None;
        for c in &self.cells {
            if last != Some(&c.g[..]) {
                n += 1;
                last = Some(&c.g);
            }
        }
        n
    }

    fn point_in_g(&self, p: usize, g: &[u32]) -> bool {
        g.iter()
            .enumerate()
            .all(|(i, &gi)| contains(self.ranges[i][p], gi))
    }

    fn compute_adjacency(&self) -> Vec<Adjacency> {
        let mut set = BTreeSet::new();
        for (a, cell) in self.cells.iter().enumerate() {
            for i in 0..cell.g.len() {
                if cell.g[i] < 2 {
                    continue;
                }
                let mut target = cell.g.clone();
                target[i] -= 1;
                for &p in &cell.points {
                    for q in std::iter::once(p).chain(self.grid.neighbors(p)) {
                        for &b in self.cells_at(q) {
                            if self.cells[b as usize].g == target {
                                set.insert(Adjacency {
                                    from: a,
                                    to: b as usize,
                                    family: i,
                                });
                            }
                        }
                    }
                }
            }
        }
        set.into_iter().collect()
    }

    fn is_boundary(&self, family: usize, p: usize) -> bool {
        let r = self.ranges[family][p];
        r.0 != r.1 || self.grid.neighbors(p).any(|q| self.ranges[family][q] != r)
    }

    fn compute_warnings(&self) -> Result<Vec<PartitionWarning>, PartitionError> {
        let mut out = Vec::new();
        for (i, pf) in self.families.iter().enumerate() {
            let mut hit = vec![false; pf.slice_count() + 1];
            for r in &self.ranges[i] {
                for s in r.0..=r.1 {
                    hit[s as usize] = true;
                }
            }
            for (s, &h) in hit.iter().enumerate().skip(1) {
                if !h {
                    out.push(PartitionWarning::EmptySlice {
                        family: pf.name().to_string(),
                        slice: s,
                    });
                }
            }
        }
        let n = self.grid.dim();
        if n < 2 {
            return Ok(out);
        }
        let m = self.families.len();
        let mut x = vec![0.0; n];
        for i in 0..m {
            for j in i + 1..m {
                let mut count = 0;
                let mut first = None;
                for p in 0..self.grid.len() {
                    if !(self.is_boundary(i, p) && self.is_boundary(j, p)) {
                        continue;
                    }
                    self.grid.point_into(p, &mut x);
                    let a = self.families[i]
                        .grad()
                        .iter()
                        .map(|e| e.eval(&x))
                        .collect::<Result<Vec<_>, _>>()?;
                    let b = self.families[j]
                        .grad()
                        .iter()
                        .map(|e| e.eval(&x))
                        .collect::<Result<Vec<_>, _>>()?;
                    let cross = if n == 2 {
                        (a[0] * b[1] - a[1] * b[0]).abs()
                    } else {
                        let c = [
                            a[1] * b[2] - a[2] * b[1],
                            a[2] * b[0] - a[0] * b[2],
                            a[0] * b[1] - a[1] * b[0],
                        ];
                        (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
                    };
                    if cross < PARALLEL_TOL {
                        count += 1;
                        first.get_or_insert_with(|| x.clone());
                    }
                }
                if let Some(point) = first {
                    out.push(PartitionWarning::ParallelGradients {
                        families: (
                            self.families[i].name().to_string(),
                            self.families[j].name().to_string(),
                        ),
                        count,
                        point,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Cells that may contain `x`: for each slice-index vector allowed by
    /// the closed value intervals at `x`, the component of the nearest
    /// lattice point carrying that vector. Never empty.
    pub fn alpha(&self, x: &[f64]) -> Result<Vec<usize>, PartitionError> {
        let grid = &self.grid;
        let n = grid.dim();
        let r = grid.resolution();
        if x.len() != n || (0..n).any(|a| !(x[a] >= grid.axis(a)[0] && x[a] <= grid.axis(a)[r - 1]))
        {
            return Err(PartitionError::OutsideDomain(x.to_vec()));
        }
        let mut ranges = Vec::with_capacity(self.families.len());
        for pf in &self.families {
            let v = pf.phi().eval(x)?;
            let k = pf.slice_count() as u32;
            let range =
                pf.slice_range(v)
                    .unwrap_or(if v < pf.levels()[0] { (1, 1) } else { (k, k) });
            ranges.push(range);
        }
        let dist2 = |p: usize| {
            (0..n)
                .map(|a| {
                    let d = grid.axis(a)[grid.coords(p)[a]] - x[a];
                    d * d
                })
                .sum::<f64>()
        };
        let mut out = Vec::new();
        let mut g: Vec<u32> = ranges.iter().map(|r| r.0).collect();
        let blocks = [grid.block_around(x, 1), grid.block_around(x, 2)];
        loop {
            for block in &blocks {
                let best = block
                    .iter()
                    .copied()
                    .filter(|&p| self.point_in_g(p, &g))
                    .map(|p| (dist2(p), p))
                    .min_by(|a, b| a.partial_cmp(b).expect("finite distances"));
                if let Some((_, p)) = best {
                    out.extend(
                        self.cells_at(p)
                            .iter()
                            .map(|&c| c as usize)
                            .filter(|&c| self.cells[c].g == g),
                    );
                    break;
                }
            }
            if !advance(&mut g, |i| ranges[i]) {
                break;
            }
        }
        if out.is_empty() {
            let nearest = grid
                .block_around(x, 1)
                .into_iter()
                .map(|p| (dist2(p), p))
                .min_by(|a, b| a.partial_cmp(b).expect("finite distances"))
                .map(|(_, p)| p)
                .expect("lattice blocks are never empty");
            out.extend(self.cells_at(nearest).iter().map(|&c| c as usize));
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}
