//! Limited-memory BFGS for the piecewise-smooth energy.
//!
//! Backtracking Armijo line search. The curvature history is dropped whenever
//! the active set of the objective changes, since pairs collected on one
//! smooth piece mislead the model on the next.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::container::PolyhedralContainer;
use crate::energy::{flatten, unflatten, EnergyModel};
use crate::error::{Error, Result};
use crate::geometry::{Metric, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Stored curvature pairs.
    pub memory: usize,
    /// Iteration cap for fixed-radius minimization.
    pub max_iters: usize,
    /// Iteration cap per penalty stage of the joint minimization.
    pub sumt_max_iters: usize,
    pub grad_tol: f64,
    pub step_tol: f64,
    /// Fixed-radius minimization stops once the energy drops below this.
    pub energy_target: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iters: 500,
            sumt_max_iters: 2000,
            grad_tol: 1e-9,
            step_tol: 1e-12,
            energy_target: 1e-9,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.memory == 0 {
            return Err(Error::InvalidParameter("optimizer memory must be >= 1".into()));
        }
        if !(self.grad_tol > 0.0 && self.step_tol > 0.0) {
            return Err(Error::InvalidParameter("optimizer tolerances must be positive".into()));
        }
        if !(self.energy_target >= 0.0) {
            return Err(Error::InvalidParameter("energy target must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetReached,
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    LineSearchFailed,
    NonFinite,
}

/// Objective value, gradient and active-set signature at a point.
#[derive(Debug, Clone)]
pub struct Sample {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub signature: u64,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub termination: Termination,
}

const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn is_finite(s: &Sample) -> bool {
    s.value.is_finite() && s.gradient.iter().all(|g| g.is_finite())
}

fn steepest(g: &[f64]) -> Vec<f64> {
    let scale = 1.0f64.min(1.0 / dot(g, g).sqrt());
    g.iter().map(|x| -x * scale).collect()
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|x| *x = -*x);
    q
}

/// Backtracking search along `d`; returns the accepted point and sample.
fn line_search(
    f: &mut impl FnMut(&[f64]) -> Sample,
    x: &[f64],
    cur: &Sample,
    d: &[f64],
    step_tol: f64,
) -> Option<(Vec<f64>, Sample)> {
    let slope = dot(&cur.gradient, d);
    if !(slope < 0.0) {
        return None;
    }
    let dn = inf_norm(d);
    let mut alpha = 1.0;
    for _ in 0..MAX_BACKTRACKS {
        if alpha * dn < step_tol {
            return None;
        }
        let xn: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        let s = f(&xn);
        if is_finite(&s) && s.value <= cur.value + ARMIJO_C * alpha * slope && s.value < cur.value {
            return Some((xn, s));
        }
        alpha *= SHRINK;
    }
    None
}

/// Minimizes `f` from `x0`. Stops when the value drops below `target`.
pub fn lbfgs(
    mut f: impl FnMut(&[f64]) -> Sample,
    x0: Vec<f64>,
    settings: &OptimizerSettings,
    max_iters: usize,
    target: f64,
) -> Minimum {
    let mut x = x0;
    let mut cur = f(&x);
    if !is_finite(&cur) {
        log::warn!("non-finite objective at the starting point");
        return Minimum {
            x,
            value: cur.value,
            iterations: 0,
            termination: Termination::NonFinite,
        };
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(settings.memory);
    for iter in 0..max_iters {
        let stop = if cur.value < target {
            Some(Termination::TargetReached)
        } else if inf_norm(&cur.gradient) < settings.grad_tol {
            Some(Termination::GradientTolerance)
        } else {
            None
        };
        if let Some(termination) = stop {
            return Minimum {
                x,
                value: cur.value,
                iterations: iter,
                termination,
            };
        }

        let mut d = if history.is_empty() {
            steepest(&cur.gradient)
        } else {
            two_loop(&cur.gradient, &history)
        };
        let mut accepted = line_search(&mut f, &x, &cur, &d, settings.step_tol);
        if accepted.is_none() && !history.is_empty() {
            history.clear();
            d = steepest(&cur.gradient);
            accepted = line_search(&mut f, &x, &cur, &d, settings.step_tol);
        }
        let Some((xn, next)) = accepted else {
            return Minimum {
                x,
                value: cur.value,
                iterations: iter,
                termination: Termination::LineSearchFailed,
            };
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next.gradient.iter().zip(&cur.gradient).map(|(a, b)| a - b).collect();
        let step = inf_norm(&s);
        if next.signature != cur.signature {
            history.clear();
        } else {
            let sy = dot(&s, &y);
            if sy > 1e-16 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
                if history.len() == settings.memory {
                    history.pop_front();
                }
                history.push_back((s, y, 1.0 / sy));
            }
        }
        x = xn;
        cur = next;
        if step < settings.step_tol {
            return Minimum {
                x,
                value: cur.value,
                iterations: iter + 1,
                termination: Termination::StepTolerance,
            };
        }
    }
    let termination = if cur.value < target {
        Termination::TargetReached
    } else {
        Termination::MaxIterations
    };
    Minimum {
        x,
        value: cur.value,
        iterations: max_iters,
        termination,
    }
}

#[derive(Debug, Clone)]
pub struct LocalOptOutcome {
    pub points: Vec<Point3>,
    pub energy: f64,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone)]
pub struct PhiOutcome {
    pub points: Vec<Point3>,
    pub radius: f64,
    pub phi: f64,
    pub iterations: usize,
    pub termination: Termination,
}

/// Minimizes `E_D` over the points at fixed `D`.
pub fn local_opt<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    points: &[Point3],
    radius: f64,
    settings: &OptimizerSettings,
    rng: &mut R,
) -> LocalOptOutcome {
    let model = EnergyModel::new(container, metric);
    let objective = |x: &[f64]| {
        let e = model.evaluate(&unflatten(x), radius, rng);
        Sample {
            value: e.energy,
            gradient: flatten(&e.gradient),
            signature: e.signature,
        }
    };
    let m = lbfgs(objective, flatten(points), settings, settings.max_iters, settings.energy_target);
    if m.termination == Termination::NonFinite {
        log::warn!("local optimization aborted on a non-finite energy");
    }
    LocalOptOutcome {
        points: unflatten(&m.x),
        energy: m.value,
        iterations: m.iterations,
        termination: m.termination,
    }
}

/// Minimizes `Φ_μ(X, D) = −D² + μ·E(X, D)` jointly over the points and `D`.
/// Radii `D ≤ 0` are rejected by the line search.
pub fn local_opt_phi<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    points: &[Point3],
    radius: f64,
    mu: f64,
    settings: &OptimizerSettings,
    rng: &mut R,
) -> PhiOutcome {
    let model = EnergyModel::new(container, metric);
    let objective = |x: &[f64]| {
        let (xs, d) = x.split_at(x.len() - 1);
        let d = d[0];
        if !(d > 0.0) {
            return Sample {
                value: f64::INFINITY,
                gradient: vec![0.0; x.len()],
                signature: 0,
            };
        }
        let e = model.evaluate(&unflatten(xs), d, rng);
        let mut gradient: Vec<f64> = e.gradient.iter().flat_map(|g| (*g * mu).to_array()).collect();
        gradient.push(-2.0 * d + mu * e.d_radius);
        Sample {
            value: -d * d + mu * e.energy,
            gradient,
            signature: e.signature,
        }
    };
    let mut x0 = flatten(points);
    x0.push(radius);
    let m = lbfgs(objective, x0, settings, settings.sumt_max_iters, f64::NEG_INFINITY);
    let (xs, d) = m.x.split_at(m.x.len() - 1);
    PhiOutcome {
        points: unflatten(xs),
        radius: d[0],
        phi: m.value,
        iterations: m.iterations,
        termination: m.termination,
    }
}
