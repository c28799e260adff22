use serde::Serialize;

/// Numerical knobs shared by partitioning, abstraction and verification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Options {
    /// Lattice points per axis.
    pub grid: usize,
    pub rk4_step: f64,
    /// Integration cap for transit-time estimation.
    pub t_max: f64,
    pub seed: u64,
    pub tol_complete: f64,
    pub tol_complete_rel: f64,
    pub samples_per_level: usize,
    pub extra_level_pairs: usize,
    pub tol_psi: f64,
    /// Below this gradient norm a level-set point is critical.
    pub tol_grad: f64,
    /// Initial-box samples used to pick initial locations.
    pub init_samples: usize,
    pub n_traj: usize,
    /// Soundness probe times are `t_grid_points` evenly spaced in `[0, t_grid_max]`.
    pub t_grid_points: usize,
    pub t_grid_max: f64,
    pub sync_samples: usize,
    pub manifold_delta: f64,
    pub manifold_horizon: f64,
    pub manifold_tol: f64,
    pub proper_radius: f64,
    pub proper_tol: f64,
    /// Extra points tested for proper containment besides the lattice.
    pub proper_candidates: Vec<Vec<f64>>,
    pub invariance_samples: usize,
    pub invariance_t_probe: f64,
    /// Newton seeds per axis for equilibrium search.
    pub equilibrium_seeds: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            grid: 201,
            rk4_step: 1e-3,
            t_max: 50.0,
            seed: 42,
            tol_complete: 1e-4,
            tol_complete_rel: 1e-3,
            samples_per_level: 200,
            extra_level_pairs: 5,
            tol_psi: 1e-9,
            tol_grad: 1e-6,
            init_samples: 1000,
            n_traj: 200,
            t_grid_points: 50,
            t_grid_max: 2.0,
            sync_samples: 200,
            manifold_delta: 1e-4,
            manifold_horizon: 50.0,
            manifold_tol: 1e-6,
            proper_radius: 0.1,
            proper_tol: 1e-8,
            proper_candidates: Vec::new(),
            invariance_samples: 200,
            invariance_t_probe: 2.0,
            equilibrium_seeds: 9,
        }
    }
}

impl Options {
    /// Evenly spaced soundness probe times.
    pub fn t_grid(&self) -> Vec<f64> {
        match self.t_grid_points {
            0 => Vec::new(),
            1 => vec![0.0],
            n => (0..n)
                .map(|i| self.t_grid_max * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_grid_spans_the_interval() {
        let o = Options::default();
        let t = o.t_grid();
        assert_eq!(t.len(), 50);
        assert_eq!(t[0], 0.0);
        assert_eq!(*t.last().unwrap(), 2.0);
    }
}
