//! Fixed-radius feasibility search: tabu moves between high-energy points and
//! low-energy vacancy sites, each refined by local optimization, followed by
//! monotonic basin hopping.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::container::PolyhedralContainer;
use crate::energy::EnergyModel;
use crate::error::Result;
use crate::geometry::{Metric, Point3};
use crate::optimize::{local_opt, OptimizerSettings};
use crate::params::{MbhSettings, SolverParams, TabuMemory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TabuEntry {
    pub point_index: usize,
    pub vacated_position: Point3,
    pub expires_at_iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub point_index: usize,
    pub target: Point3,
}

/// Bounded FIFO of recent moves.
#[derive(Debug, Clone)]
pub struct TabuList {
    entries: VecDeque<TabuEntry>,
    memory: TabuMemory,
}

impl TabuList {
    pub fn new(memory: TabuMemory) -> Self {
        Self {
            entries: VecDeque::with_capacity(memory.capacity),
            memory,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &TabuEntry> {
        self.entries.iter()
    }

    /// Records that `mv` vacated `from` at `iteration`.
    pub fn record(&mut self, mv: Move, from: Point3, iteration: usize) {
        self.expire(iteration);
        if self.entries.len() == self.memory.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(TabuEntry {
            point_index: mv.point_index,
            vacated_position: from,
            expires_at_iteration: iteration + self.memory.tenure,
        });
    }

    /// Drops entries whose tenure has run out.
    pub fn expire(&mut self, iteration: usize) {
        self.entries.retain(|e| e.expires_at_iteration > iteration);
    }

    /// A move is forbidden if it sends a point back within `radius_scale·D`
    /// of a position it recently vacated.
    pub fn is_forbidden(&self, mv: &Move, radius: f64, iteration: usize) -> bool {
        let r = self.memory.radius_scale * radius;
        self.entries.iter().any(|e| {
            e.expires_at_iteration > iteration
                && e.point_index == mv.point_index
                && (e.vacated_position - mv.target).norm() <= r
        })
    }
}

/// Indices of the `q` largest point energies, ties by lowest index.
pub fn high_energy_points<R: Rng + ?Sized>(
    model: &EnergyModel,
    points: &[Point3],
    radius: f64,
    q: usize,
    rng: &mut R,
) -> Vec<usize> {
    let energies: Vec<f64> = (0..points.len())
        .map(|i| model.point_energy(points, i, radius, rng).expect("index in range"))
        .collect();
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| energies[b].total_cmp(&energies[a]).then(a.cmp(&b)));
    idx.truncate(q.min(points.len()));
    idx
}

/// The `q` lowest-energy sites from a pool of `pool_factor·p` uniform
/// interior samples, ties by generation order.
pub fn vacancy_sites<R: Rng + ?Sized>(
    model: &EnergyModel,
    points: &[Point3],
    radius: f64,
    q: usize,
    pool_factor: usize,
    attempt_factor: usize,
    rng: &mut R,
) -> Result<Vec<Point3>> {
    let p = points.len();
    let pool = model
        .container
        .sample_interior_batch(pool_factor * p, attempt_factor * p, rng)?;
    let mut scored: Vec<(f64, usize)> = pool
        .iter()
        .enumerate()
        .map(|(k, &c)| (model.vacancy_energy(points, c, radius, rng), k))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(scored.iter().take(q).map(|&(_, k)| pool[k]).collect())
}

/// Monotonic basin hopping: perturb a random subset, reoptimize, keep only
/// strict improvements.
#[allow(clippy::too_many_arguments)]
pub fn mbh<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    points: &[Point3],
    energy: f64,
    radius: f64,
    settings: &MbhSettings,
    optimizer: &OptimizerSettings,
    rng: &mut R,
) -> (Vec<Point3>, f64) {
    let mut best = points.to_vec();
    let mut best_e = energy;
    if best_e == 0.0 {
        return (best, best_e);
    }
    let p = points.len();
    let k = ((p as f64 * settings.subset_fraction).ceil() as usize).clamp(1, p);
    let noise = Normal::new(0.0, settings.scale * radius).expect("positive scale");
    for _ in 0..settings.trials {
        let mut trial = best.clone();
        for i in rand::seq::index::sample(rng, p, k) {
            let c = &mut trial[i];
            c.x += noise.sample(rng);
            c.y += noise.sample(rng);
            c.z += noise.sample(rng);
        }
        let out = local_opt(container, metric, &trial, radius, optimizer, rng);
        if out.energy < best_e {
            best = out.points;
            best_e = out.energy;
            if best_e == 0.0 {
                break;
            }
        }
    }
    (best, best_e)
}

#[derive(Debug, Clone)]
pub struct TabuOutcome {
    pub points: Vec<Point3>,
    pub energy: f64,
    pub iterations: usize,
}

struct Candidate {
    mv: Move,
    points: Vec<Point3>,
    energy: f64,
}

/// Searches for a configuration with `E_D ≤ ε` at fixed `D`. Always returns
/// the best configuration found.
pub fn tabu_search<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    points: &[Point3],
    radius: f64,
    params: &SolverParams,
    rng: &mut R,
) -> Result<TabuOutcome> {
    let model = EnergyModel::new(container, metric);
    let p = points.len();
    let q = params.q.min(p);
    let opt = &params.optimizer;

    let start = local_opt(container, metric, points, radius, opt, rng);
    let mut x = start.points;
    let mut best = x.clone();
    let mut best_e = start.energy;
    let mut no_improve = 0;
    let mut tabu = TabuList::new(params.tabu);
    let mut iteration = 0;

    while no_improve <= params.beta && best_e > params.epsilon {
        let movers = high_energy_points(&model, &x, radius, q, rng);
        let sites = vacancy_sites(&model, &x, radius, q, params.pool_factor, params.attempt_factor, rng)?;

        let moved = |i: usize, target: Point3| {
            let mut y = x.clone();
            y[i] = target;
            y
        };
        let seed_move = Move {
            point_index: movers[0],
            target: sites[0],
        };
        let seed_points = moved(seed_move.point_index, seed_move.target);
        let seed_energy = model.total_energy(&seed_points, radius, rng);

        let stream_seed: u64 = rng.random();
        let pairs: Vec<(usize, usize)> = (0..q).flat_map(|a| (0..q).map(move |b| (a, b))).collect();
        let evaluate = |&(a, b): &(usize, usize)| {
            let mut sub = ChaCha8Rng::seed_from_u64(stream_seed);
            sub.set_stream((a * q + b) as u64);
            let mv = Move {
                point_index: movers[a],
                target: sites[b],
            };
            let out = local_opt(container, metric, &moved(mv.point_index, mv.target), radius, opt, &mut sub);
            Candidate {
                mv,
                points: out.points,
                energy: out.energy,
            }
        };
        let candidates: Vec<Candidate> = if params.parallel {
            pairs.par_iter().map(evaluate).collect()
        } else {
            pairs.iter().map(evaluate).collect()
        };

        let mut nb_points = seed_points;
        let mut nb_energy = seed_energy;
        let mut best_move = seed_move;
        for cand in candidates {
            let allowed = !tabu.is_forbidden(&cand.mv, radius, iteration) || cand.energy < best_e;
            if allowed && cand.energy < nb_energy {
                nb_points = cand.points;
                nb_energy = cand.energy;
                best_move = cand.mv;
            }
        }

        let vacated = x[best_move.point_index];
        tabu.record(best_move, vacated, iteration);
        let (hopped, hopped_e) = mbh(container, metric, &nb_points, nb_energy, radius, &params.mbh, opt, rng);
        x = hopped;
        if hopped_e < best_e {
            best = x.clone();
            best_e = hopped_e;
            no_improve = 0;
        } else {
            no_improve += 1;
        }
        iteration += 1;
        log::trace!("tabu iteration {iteration}: E = {hopped_e:.3e}, best = {best_e:.3e}");
    }

    Ok(TabuOutcome {
        points: best,
        energy: best_e,
        iterations: iteration,
    })
}
