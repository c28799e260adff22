use crate::config::Options;
use crate::dynsys::{flow_until_level, DynSystem, FlowError, LevelCrossing};
use crate::partition::{level_set_points, Grid, PartitionFunction};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceStatus {
    /// Both bounding levels are regular values.
    Regular,
    /// A bounding level set contains a point with vanishing gradient.
    Critical,
    /// No lattice point found on the upper level.
    Empty,
    /// A bounding level is infinite.
    Unbounded,
}

/// Transit-time statistics for trajectories started on one level and
/// followed down to a lower one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitStats {
    pub upper: f64,
    pub lower: f64,
    /// Zero when nothing crossed.
    pub t_low: f64,
    /// Infinite when some trajectory stayed in the domain for `t_max`
    /// without crossing, or when nothing crossed.
    pub t_high: f64,
    pub samples: usize,
    pub crossed: usize,
    /// Left the domain before crossing; these carry no transit time.
    pub censored: usize,
    /// Ran for `t_max` inside the domain without crossing.
    pub stalled: usize,
}

impl TransitStats {
    pub fn spread(&self) -> f64 {
        self.t_high - self.t_low
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceTransit {
    /// 1-based slice index.
    pub slice: usize,
    pub status: SliceStatus,
    pub stats: TransitStats,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitTimeTable {
    pub family: String,
    pub slices: Vec<SliceTransit>,
}

impl TransitTimeTable {
    /// Entry for 1-based slice index `g`.
    pub fn get(&self, g: u32) -> Option<&SliceTransit> {
        self.slices.get((g as usize).checked_sub(1)?)
    }

    pub fn t_low(&self, g: u32) -> Option<f64> {
        self.get(g).map(|s| s.stats.t_low)
    }

    pub fn t_high(&self, g: u32) -> Option<f64> {
        self.get(g).map(|s| s.stats.t_high)
    }
}

/// Whether some point has `|grad phi| < tol`. Undefined gradients count as
/// critical.
pub fn has_critical_point(pf: &PartitionFunction, points: &[Vec<f64>], tol: f64) -> bool {
    points
        .iter()
        .any(|p| pf.grad_norm(p).map_or(true, |g| g < tol))
}

/// Flows each start point until `phi` reaches `lower`.
pub fn measure_transit(
    sys: &DynSystem,
    pf: &PartitionFunction,
    starts: &[Vec<f64>],
    upper: f64,
    lower: f64,
    t_max: f64,
    h: f64,
) -> Result<TransitStats, FlowError> {
    let mut stats = TransitStats {
        upper,
        lower,
        t_low: f64::INFINITY,
        t_high: 0.0,
        samples: starts.len(),
        crossed: 0,
        censored: 0,
        stalled: 0,
    };
    for x0 in starts {
        match flow_until_level(sys, x0, pf.phi(), lower, t_max, h)? {
            LevelCrossing::Crossed { time, .. } => {
                stats.crossed += 1;
                stats.t_low = stats.t_low.min(time);
                stats.t_high = stats.t_high.max(time);
            }
            LevelCrossing::TimeLimit => stats.stalled += 1,
            LevelCrossing::DomainExit { .. } => stats.censored += 1,
        }
    }
    if stats.crossed == 0 {
        stats.t_low = 0.0;
        stats.t_high = f64::INFINITY;
    }
    if stats.stalled > 0 {
        stats.t_high = f64::INFINITY;
    }
    Ok(stats)
}

/// Lower and upper transit times across every slice of `pf`, starting from
/// up to `samples_per_level` points on each slice's upper level.
pub fn estimate_transit_times(
    sys: &DynSystem,
    pf: &PartitionFunction,
    grid: &Grid,
    opts: &Options,
) -> Result<TransitTimeTable, FlowError> {
    let values = grid.sample(pf.phi())?;
    let levels = pf.levels();
    let mut points = Vec::with_capacity(levels.len());
    let mut critical = Vec::with_capacity(levels.len());
    for &a in levels {
        let pts = level_set_points(grid, pf.phi(), &values, a, opts.samples_per_level)?;
        critical.push(has_critical_point(pf, &pts, opts.tol_grad));
        points.push(pts);
    }
    let mut slices = Vec::with_capacity(pf.slice_count());
    for g in 1..levels.len() {
        let (lower, upper) = (levels[g - 1], levels[g]);
        let unknown = TransitStats {
            upper,
            lower,
            t_low: 0.0,
            t_high: f64::INFINITY,
            samples: 0,
            crossed: 0,
            censored: 0,
            stalled: 0,
        };
        let (status, stats) = if lower.is_infinite() || upper.is_infinite() {
            (SliceStatus::Unbounded, unknown)
        } else if points[g].is_empty() {
            (SliceStatus::Empty, unknown)
        } else {
            let stats =
                measure_transit(sys, pf, &points[g], upper, lower, opts.t_max, opts.rk4_step)?;
            let status = if critical[g] || critical[g - 1] {
                SliceStatus::Critical
            } else {
                SliceStatus::Regular
            };
            (status, stats)
        };
        slices.push(SliceTransit {
            slice: g,
            status,
            stats,
        });
    }
    Ok(TransitTimeTable {
        family: pf.name().to_string(),
        slices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::testing::saddle;
    use crate::partition::testing::saddle_families;
    use std::f64::consts::LN_2;

    fn tables() -> Vec<TransitTimeTable> {
        let sys = saddle();
        let grid = Grid::new(sys.domain(), 201).unwrap();
        let opts = Options::default();
        saddle_families(&sys)
            .iter()
            .map(|pf| estimate_transit_times(&sys, pf, &grid, &opts).unwrap())
            .collect()
    }

    #[test]
    fn saddle_transit_times() {
        let t = tables();
        let phi1 = &t[0];
        assert_eq!(phi1.get(1).unwrap().status, SliceStatus::Critical);
        assert_eq!(phi1.t_high(1), Some(f64::INFINITY));
        for g in [2, 3] {
            let s = phi1.get(g).unwrap();
            assert_eq!(s.status, SliceStatus::Regular);
            assert!((s.stats.t_low - LN_2).abs() < 1e-6, "{:?}", s.stats);
            assert!((s.stats.t_high - LN_2).abs() < 1e-6, "{:?}", s.stats);
            assert!(s.stats.crossed > 10);
        }
        let phi2 = &t[1];
        for g in [1, 2] {
            let s = phi2.get(g).unwrap();
            assert_eq!(s.status, SliceStatus::Regular);
            assert!(s.stats.spread() < 1e-6);
            assert!((s.stats.t_low - LN_2).abs() < 1e-6);
        }
        assert_eq!(phi2.get(3).unwrap().status, SliceStatus::Critical);
        assert_eq!(phi2.t_high(3), Some(f64::INFINITY));
        assert_eq!(phi2.get(4), None);
        assert_eq!(phi2.get(0), None);
    }

    #[test]
    fn infinite_levels_are_unbounded() {
        let sys = saddle();
        let pf = PartitionFunction::new(
            "p",
            crate::expr::parse("x1^2", 2).unwrap(),
            vec![0.0, 4.0, f64::INFINITY],
            &sys,
        )
        .unwrap();
        let grid = Grid::new(sys.domain(), 51).unwrap();
        let t = estimate_transit_times(&sys, &pf, &grid, &Options::default()).unwrap();
        assert_eq!(t.get(2).unwrap().status, SliceStatus::Unbounded);
        assert_eq!(t.t_high(2), Some(f64::INFINITY));
    }

    #[test]
    fn empty_upper_level() {
        let sys = saddle();
        let pf = PartitionFunction::new(
            "p",
            crate::expr::parse("x1^2", 2).unwrap(),
            vec![0.0, 16.0, 20.0],
            &sys,
        )
        .unwrap();
        let grid = Grid::new(sys.domain(), 51).unwrap();
        let t = estimate_transit_times(&sys, &pf, &grid, &Options::default()).unwrap();
        assert_eq!(t.get(2).unwrap().status, SliceStatus::Empty);
    }
}
