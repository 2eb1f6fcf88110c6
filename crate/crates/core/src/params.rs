//! Solver parameters and the default schedule by problem size.

use serde::{Deserialize, Serialize};

use crate::container::PolyhedralContainer;
use crate::error::{Error, Result};
use crate::geometry::Metric;
use crate::optimize::OptimizerSettings;

/// Tabu memory: an entry forbids moving the same point back to within
/// `radius_scale·D` of the position it vacated, for `tenure` iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TabuMemory {
    pub tenure: usize,
    pub capacity: usize,
    pub radius_scale: f64,
}

impl Default for TabuMemory {
    fn default() -> Self {
        Self {
            tenure: 10,
            capacity: 10,
            radius_scale: 0.5,
        }
    }
}

/// Monotonic basin hopping: `trials` perturbations of `⌈p·subset_fraction⌉`
/// points by Gaussian noise with standard deviation `scale·D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MbhSettings {
    pub trials: usize,
    pub subset_fraction: f64,
    pub scale: f64,
}

impl Default for MbhSettings {
    fn default() -> Self {
        Self {
            trials: 3,
            subset_fraction: 1.0 / 3.0,
            scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Non-improving tabu iterations tolerated.
    pub beta: usize,
    /// High-energy points and vacancy sites considered per tabu iteration.
    pub q: usize,
    pub epsilon: f64,
    /// Restarts after the initial stage.
    pub iterations: usize,
    pub sumt_rounds: usize,
    pub mu_init: f64,
    pub mu_factor: f64,
    pub d_init: f64,
    pub rho_init: f64,
    pub rays: usize,
    pub seed: u64,
    /// Vacancy pool size is `pool_factor·p`.
    pub pool_factor: usize,
    /// Rejection sampling gives up after `attempt_factor·p` proposals.
    pub attempt_factor: usize,
    pub optimizer: OptimizerSettings,
    pub tabu: TabuMemory,
    pub mbh: MbhSettings,
    /// Evaluate tabu neighborhoods on the rayon pool.
    pub parallel: bool,
}

pub const DEFAULT_RHO_INIT: f64 = 0.3;

/// Radius at which `p` balls fill a fraction `rho` of the container volume.
pub fn packing_radius(volume: f64, p: usize, rho: f64) -> f64 {
    (3.0 * volume * rho / (4.0 * std::f64::consts::PI * p as f64)).cbrt()
}

/// Parameter schedule by `p`: small (`p < 10`), medium (`p < 30`), large.
pub fn default_params(p: usize, container: &PolyhedralContainer) -> Result<SolverParams> {
    default_params_for(p, container, Metric::Euclidean)
}

/// As [`default_params`], but a medium or large `D_init` never exceeds the
/// radius at which `p` balls of `metric` fill `rho_init` of the volume.
pub fn default_params_for(p: usize, container: &PolyhedralContainer, metric: Metric) -> Result<SolverParams> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be >= 1".into()));
    }
    let (iterations, beta) = match p {
        0..=9 => (1, 5),
        10..=29 => (3, 10),
        _ => (5, 15),
    };
    let d_init = if p < 10 {
        0.01
    } else {
        let euclidean = packing_radius(container.volume(), p, DEFAULT_RHO_INIT);
        let own = (container.volume() * DEFAULT_RHO_INIT / (metric.unit_ball_volume() * p as f64)).cbrt();
        euclidean.min(own)
    };
    let epsilon = 1e-8;
    Ok(SolverParams {
        beta,
        q: 3,
        epsilon,
        iterations,
        sumt_rounds: 15,
        mu_init: 10.0,
        mu_factor: 5.0,
        d_init,
        rho_init: DEFAULT_RHO_INIT,
        rays: container.rays(),
        seed: 0,
        pool_factor: 10,
        attempt_factor: 1000,
        optimizer: OptimizerSettings {
            energy_target: epsilon / 10.0,
            ..Default::default()
        },
        tabu: TabuMemory::default(),
        mbh: MbhSettings::default(),
        parallel: true,
    })
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.beta == 0 || self.q == 0 || self.sumt_rounds == 0 {
            return bad("beta, q and sumt_rounds must be >= 1");
        }
        if !(self.epsilon > 0.0) || !(self.d_init > 0.0) || !(self.rho_init > 0.0) {
            return bad("epsilon, d_init and rho_init must be positive");
        }
        if !(self.mu_init > 0.0 && self.mu_init <= 100.0) {
            return bad("mu_init must lie in (0, 100]");
        }
        if !(self.mu_factor > 1.0) {
            return bad("mu_factor must exceed 1");
        }
        if self.rays == 0 || self.rays % 2 == 0 {
            return bad("rays must be odd");
        }
        if self.pool_factor == 0 || self.attempt_factor == 0 {
            return bad("pool_factor and attempt_factor must be >= 1");
        }
        if self.tabu.tenure == 0 || self.tabu.capacity == 0 || !(self.tabu.radius_scale > 0.0) {
            return bad("tabu tenure, capacity and radius scale must be positive");
        }
        if !(self.mbh.subset_fraction > 0.0 && self.mbh.subset_fraction <= 1.0) || !(self.mbh.scale > 0.0) {
            return bad("mbh subset fraction must lie in (0, 1] and scale be positive");
        }
        self.optimizer.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::builtin_container;
    use approx::assert_abs_diff_eq;

    #[test]
    fn schedule() {
        let cube = builtin_container("unit_cube").unwrap();
        let p5 = default_params(5, &cube).unwrap();
        assert_eq!((p5.iterations, p5.beta, p5.q), (1, 5, 3));
        assert_eq!(p5.d_init, 0.01);
        assert_eq!(p5.epsilon, 1e-8);
        assert_eq!(p5.sumt_rounds, 15);

        let p10 = default_params(10, &cube).unwrap();
        assert_eq!((p10.iterations, p10.beta), (3, 10));
        assert_abs_diff_eq!(p10.d_init, 0.19276, epsilon = 1e-5);

        let p20 = default_params(20, &cube).unwrap();
        assert_abs_diff_eq!(p20.d_init, 0.15300, epsilon = 1e-5);

        let p30 = default_params(30, &cube).unwrap();
        assert_eq!((p30.iterations, p30.beta), (5, 15));
        assert!(p30.validate().is_ok());
        assert!(default_params(0, &cube).is_err());
    }

    #[test]
    fn chebyshev_start_fits() {
        let cube = builtin_container("unit_cube").unwrap();
        let cheb = default_params_for(10, &cube, Metric::Chebyshev).unwrap();
        assert_abs_diff_eq!(cheb.d_init, (0.3f64 / 80.0).cbrt(), epsilon = 1e-12);
        assert!(cheb.d_init < 1.0 / 6.0);
        let man = default_params_for(10, &cube, Metric::Manhattan).unwrap();
        assert_eq!(man.d_init, default_params(10, &cube).unwrap().d_init);
    }

    #[test]
    fn validation() {
        let cube = builtin_container("unit_cube").unwrap();
        let mut p = default_params(4, &cube).unwrap();
        p.mu_init = 500.0;
        assert!(p.validate().is_err());
        p.mu_init = 10.0;
        p.rays = 4;
        assert!(p.validate().is_err());
    }
}
