//! Radius maximization and the multi-start driver.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::container::PolyhedralContainer;
use crate::energy::{Configuration, EnergyBreakdown, EnergyModel};
use crate::error::{Error, Result};
use crate::geometry::{Metric, Point3};
use crate::optimize::{local_opt, local_opt_phi};
use crate::oracle::Oracle;
use crate::params::SolverParams;
use crate::tabu::tabu_search;

/// A feasible configuration and its radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub configuration: Configuration,
    pub radius: f64,
    pub energy: EnergyBreakdown,
    pub seed: u64,
    /// Best radius after the initial stage and after each restart.
    pub radius_history: Vec<f64>,
    /// Wall-clock time of the solve. Not serialized, so solution files stay
    /// reproducible.
    #[serde(skip)]
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Adjusted {
    pub points: Vec<Point3>,
    pub radius: f64,
    pub energy: f64,
}

/// Penalty continuation on `Φ_μ`: `K` joint minimizations with `μ` growing
/// geometrically. Falls back to the best feasible iterate (or the input) if
/// the final iterate cannot be made feasible at its radius.
pub fn adjust_distance<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    points: &[Point3],
    radius: f64,
    params: &SolverParams,
    rng: &mut R,
) -> Adjusted {
    let model = EnergyModel::new(container, metric);
    let eps = params.epsilon;
    let mut best = Adjusted {
        points: points.to_vec(),
        radius,
        energy: model.total_energy(points, radius, rng),
    };
    let mut x = points.to_vec();
    let mut d = radius;
    let mut mu = params.mu_init;
    for round in 0..params.sumt_rounds {
        let out = local_opt_phi(container, metric, &x, d, mu, &params.optimizer, rng);
        x = out.points;
        d = out.radius;
        let e = model.total_energy(&x, d, rng);
        log::debug!("sumt round {round}: mu = {mu:.3e}, D = {d:.10}, E = {e:.3e}");
        if e <= eps && d > best.radius {
            best = Adjusted {
                points: x.clone(),
                radius: d,
                energy: e,
            };
        }
        mu *= params.mu_factor;
    }
    let mut e = model.total_energy(&x, d, rng);
    if e > eps {
        let out = local_opt(container, metric, &x, d, &params.optimizer, rng);
        x = out.points;
        e = out.energy;
    }
    if e <= eps && d >= best.radius {
        Adjusted {
            points: x,
            radius: d,
            energy: e,
        }
    } else {
        best
    }
}

/// `p` uniform interior points.
pub fn random_solution<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    p: usize,
    params: &SolverParams,
    rng: &mut R,
) -> Result<Vec<Point3>> {
    container.sample_interior_batch(p, params.attempt_factor * p, rng)
}

/// Largest radius for which `points` satisfy every constraint exactly, by
/// direct evaluation. `None` if some point lies outside.
pub fn certified_radius(container: &PolyhedralContainer, metric: Metric, points: &[Point3]) -> Option<f64> {
    let report = Oracle::new(container, metric).check(points, 0.0, 0.0);
    report.certified_radius().filter(|d| *d > 0.0)
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Adjusts a feasible configuration and certifies the resulting radius.
fn adjust_and_certify<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    points: &[Point3],
    radius: f64,
    params: &SolverParams,
    rng: &mut R,
) -> Option<(Vec<Point3>, f64)> {
    let adjusted = adjust_distance(container, metric, points, radius, params, rng);
    if let Some(d) = certified_radius(container, metric, &adjusted.points) {
        return Some((adjusted.points, d));
    }
    certified_radius(container, metric, points).map(|d| (points.to_vec(), d))
}

/// Multi-start global optimization: an initial tabu search and radius
/// adjustment from `d_init`, then `N` restarts from fresh random
/// configurations at the incumbent radius. Restart `i` draws from its own
/// RNG stream.
pub fn solve(container: &PolyhedralContainer, metric: Metric, p: usize, params: &SolverParams) -> Result<Solution> {
    params.validate()?;
    if p == 0 {
        return Err(Error::InvalidParameter("p must be >= 1".into()));
    }
    let started = Instant::now();
    let container = container.clone().with_rays(params.rays)?;
    let c = &container;

    let mut rng = stream(params.seed, 0);
    let x0 = random_solution(c, p, params, &mut rng)?;
    let first = tabu_search(c, metric, &x0, params.d_init, params, &mut rng)?;
    if first.energy > params.epsilon {
        return Err(Error::InfeasibleResult {
            radius: params.d_init,
            energy: first.energy,
        });
    }
    let (mut best_x, mut best_d) = adjust_and_certify(c, metric, &first.points, params.d_init, params, &mut rng)
        .ok_or(Error::InfeasibleResult {
            radius: params.d_init,
            energy: first.energy,
        })?;
    log::info!("initial stage: D = {best_d:.10}");
    let mut history = vec![best_d];

    for i in 1..=params.iterations {
        let mut rng = stream(params.seed, i as u64);
        let d_i = best_d;
        let xi = random_solution(c, p, params, &mut rng)?;
        let t = tabu_search(c, metric, &xi, d_i, params, &mut rng)?;
        if t.energy < params.epsilon {
            if let Some((x, d)) = adjust_and_certify(c, metric, &t.points, d_i, params, &mut rng) {
                if d > best_d {
                    best_x = x;
                    best_d = d;
                }
            }
        }
        log::info!("restart {i}: tabu E = {:.3e}, D* = {best_d:.10}", t.energy);
        history.push(best_d);
    }

    let energy = EnergyModel::new(c, metric).breakdown(&best_x, best_d, &mut stream(params.seed, u64::MAX));
    Ok(Solution {
        configuration: Configuration::new(best_x)?,
        radius: best_d,
        energy,
        seed: params.seed,
        radius_history: history,
        runtime_seconds: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::builtin_container;
    use crate::geometry::Vec3;
    use crate::params::default_params;

    #[test]
    fn adjust_single_point() {
        let cube = builtin_container("unit_cube").unwrap();
        let params = default_params(1, &cube).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = adjust_distance(&cube, Metric::Euclidean, &[Vec3::new(0.5, 0.5, 0.5)], 0.1, &params, &mut rng);
        assert!(out.radius >= 0.4999, "{out:?}");
        assert!(out.energy <= params.epsilon);
    }

    #[test]
    fn adjust_eight_corners() {
        let cube = builtin_container("unit_cube").unwrap();
        let params = default_params(8, &cube).unwrap();
        let mut pts = Vec::new();
        for x in [0.25, 0.75] {
            for y in [0.25, 0.75] {
                for z in [0.25, 0.75] {
                    pts.push(Vec3::new(x, y, z));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = adjust_distance(&cube, Metric::Euclidean, &pts, 0.2, &params, &mut rng);
        assert!(out.radius >= 0.2499, "{out:?}");
        assert!(out.energy <= params.epsilon);
    }

    #[test]
    fn solve_single_point_cube() {
        let cube = builtin_container("unit_cube").unwrap();
        let params = default_params(1, &cube).unwrap();
        let s = solve(&cube, Metric::Euclidean, 1, &params).unwrap();
        assert!((s.radius - 0.5).abs() < 1e-6, "{}", s.radius);
        assert!(s.energy.total <= params.epsilon);
    }
}
