#![allow(dead_code)]

use pdisp_core::{EnergyModel, Point3, PolyhedralContainer, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed for ray casting inside energy evaluations.
pub const EVAL_SEED: u64 = 99;

pub fn eval_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(EVAL_SEED)
}

/// Uniform point in the bounding box grown by `grow` times the diagonal.
pub fn random_box_point<R: Rng>(c: &PolyhedralContainer, grow: f64, rng: &mut R) -> Point3 {
    let (lo, hi) = c.bounding_box();
    let pad = c.diagonal() * grow;
    Vec3::new(
        rng.random_range(lo.x - pad..hi.x + pad),
        rng.random_range(lo.y - pad..hi.y + pad),
        rng.random_range(lo.z - pad..hi.z + pad),
    )
}

fn with_coord(points: &[Point3], radius: f64, k: usize, delta: f64) -> (Vec<Point3>, f64) {
    let mut pts = points.to_vec();
    let mut r = radius;
    if k == 3 * pts.len() {
        r += delta;
    } else {
        let p = &mut pts[k / 3];
        match k % 3 {
            0 => p.x += delta,
            1 => p.y += delta,
            _ => p.z += delta,
        }
    }
    (pts, r)
}

/// Relative error between the analytic gradient (points and radius) and
/// central differences at step `1e-6`. `None` if the active set changes
/// within `1e-4` of the configuration along any coordinate.
pub fn gradient_relative_error(model: &EnergyModel, points: &[Point3], radius: f64) -> Option<f64> {
    let base = model.evaluate(points, radius, &mut eval_rng());
    let n = 3 * points.len() + 1;
    for k in 0..n {
        for s in [-1e-4, 1e-4] {
            let (pts, r) = with_coord(points, radius, k, s);
            if model.evaluate(&pts, r, &mut eval_rng()).signature != base.signature {
                return None;
            }
        }
    }
    let mut analytic: Vec<f64> = base.gradient.iter().flat_map(|g| g.to_array()).collect();
    analytic.push(base.d_radius);
    let h = 1e-6;
    let mut diff2 = 0.0;
    for (k, a) in analytic.iter().enumerate() {
        let (pp, rp) = with_coord(points, radius, k, h);
        let (pm, rm) = with_coord(points, radius, k, -h);
        let ep = model.evaluate(&pp, rp, &mut eval_rng()).energy;
        let em = model.evaluate(&pm, rm, &mut eval_rng()).energy;
        let fd = (ep - em) / (2.0 * h);
        diff2 += (fd - a).powi(2);
    }
    let norm = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    Some(diff2.sqrt() / norm.max(1e-3))
}
