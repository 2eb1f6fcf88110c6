//! Brute-force feasibility checker.
//!
//! Evaluates the three constraints directly: containment, pairwise
//! separation `d(c_i, c_j) ≥ 2D` and boundary clearance `d(c_i, ∂C) ≥ D`.
//! It shares no code with the energy model's active-set logic:
//!
//! * interiority comes from half-space tests on convex containers and from
//!   the generalized winding number otherwise;
//! * Euclidean boundary distance is the exact closest point over every fan
//!   triangle;
//! * other metrics measure the orthogonal foot of every face plane the point
//!   faces, every feature edge and every vertex.

use serde::{Deserialize, Serialize};

use crate::container::PolyhedralContainer;
use crate::geometry::{distance_point_segment, Metric, Point3};

/// Default tolerance for accepting a solution.
pub const ORACLE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairViolation {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub radius: f64,
    pub tolerance: f64,
    /// Indices of points outside the container.
    pub outside: Vec<usize>,
    /// `min d(c_i, c_j) − 2D`; `+∞` for a single point.
    pub pair_margin: f64,
    /// `min d(c_i, ∂C) − D` over the points inside.
    pub boundary_margin: f64,
    pub violated_pairs: Vec<PairViolation>,
    /// Points with `d(c_i, ∂C) < D − tol`.
    pub violated_boundary: Vec<usize>,
    /// Per-point boundary distance.
    pub boundary_distances: Vec<f64>,
}

impl FeasibilityReport {
    /// Largest radius this configuration certifies:
    /// `min(½·min pair distance, min boundary distance)`.
    pub fn certified_radius(&self) -> Option<f64> {
        if !self.outside.is_empty() {
            return None;
        }
        let pair_half = (self.pair_margin + 2.0 * self.radius) / 2.0;
        let boundary = self.boundary_distances.iter().copied().fold(f64::INFINITY, f64::min);
        Some(pair_half.min(boundary))
    }
}

fn closest_point_on_triangle(p: Point3, a: Point3, b: Point3, c: Point3) -> Point3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

fn triangle_contains_projection(p: Point3, a: Point3, b: Point3, c: Point3) -> bool {
    let n = (b - a).cross(c - a);
    let tol = 1e-12 * n.norm();
    [(a, b), (b, c), (c, a)]
        .iter()
        .all(|&(u, v)| (v - u).cross(p - u).dot(n) >= -tol * (v - u).norm())
}

/// Signed solid angle of a triangle seen from `p`.
fn solid_angle(p: Point3, a: Point3, b: Point3, c: Point3) -> f64 {
    let (ra, rb, rc) = (a - p, b - p, c - p);
    let (la, lb, lc) = (ra.norm(), rb.norm(), rc.norm());
    let num = ra.dot(rb.cross(rc));
    let den = la * lb * lc + ra.dot(rb) * lc + rb.dot(rc) * la + rc.dot(ra) * lb;
    2.0 * num.atan2(den)
}

/// Brute-force checker bound to one container.
#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    container: &'a PolyhedralContainer,
    metric: Metric,
    convex: bool,
}

impl<'a> Oracle<'a> {
    pub fn new(container: &'a PolyhedralContainer, metric: Metric) -> Self {
        let convex = container.holes() == 0
            && container.faces().iter().all(|f| {
                container
                    .vertices()
                    .iter()
                    .all(|&v| f.inward_normal.dot(v - f.plane_point) >= -1e-9 * container.diagonal())
            });
        Self {
            container,
            metric,
            convex,
        }
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// Containment including the boundary.
    pub fn contains(&self, p: Point3) -> bool {
        if self.convex {
            return self
                .container
                .faces()
                .iter()
                .all(|f| f.inward_normal.dot(p - f.plane_point) >= -1e-12);
        }
        if self.euclidean_boundary_distance(p) <= 1e-12 {
            return true;
        }
        let w: f64 = self
            .container
            .triangles()
            .iter()
            .map(|t| {
                let (a, b, c) = t.vertices();
                let n = self.container.faces()[t.face].inward_normal;
                if (b - a).cross(c - a).dot(n) >= 0.0 {
                    solid_angle(p, a, b, c)
                } else {
                    solid_angle(p, a, c, b)
                }
            })
            .sum::<f64>()
            / (4.0 * std::f64::consts::PI);
        w.abs() > 0.5
    }

    fn euclidean_boundary_distance(&self, p: Point3) -> f64 {
        self.container
            .triangles()
            .iter()
            .map(|t| {
                let (a, b, c) = t.vertices();
                (p - closest_point_on_triangle(p, a, b, c)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `d(p, ∂C)` under the oracle's metric.
    pub fn boundary_distance(&self, p: Point3) -> f64 {
        if self.metric == Metric::Euclidean {
            return self.euclidean_boundary_distance(p);
        }
        let m = self.metric;
        let mut best = f64::INFINITY;
        for &v in self.container.vertices() {
            best = best.min(m.distance(p, v));
        }
        for e in self.container.edges() {
            best = best.min(distance_point_segment(m, p, e).0);
        }
        for t in self.container.triangles() {
            let n = self.container.faces()[t.face].inward_normal;
            let (a, b, c) = t.vertices();
            let s = n.dot(p - a);
            if s < 0.0 {
                continue;
            }
            let foot = p - n * s;
            if triangle_contains_projection(foot, a, b, c) {
                best = best.min(m.distance(p, foot));
            }
        }
        best
    }

    pub fn check(&self, points: &[Point3], radius: f64, tolerance: f64) -> FeasibilityReport {
        let m = self.metric;
        let mut outside = Vec::new();
        let mut boundary_distances = Vec::with_capacity(points.len());
        let mut violated_boundary = Vec::new();
        let mut boundary_margin = f64::INFINITY;
        for (i, &c) in points.iter().enumerate() {
            let d = self.boundary_distance(c);
            boundary_distances.push(d);
            if !self.contains(c) {
                outside.push(i);
                continue;
            }
            boundary_margin = boundary_margin.min(d - radius);
            if d < radius - tolerance {
                violated_boundary.push(i);
            }
        }
        let mut pair_margin = f64::INFINITY;
        let mut violated_pairs = Vec::new();
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let d = m.distance(points[i], points[j]);
                pair_margin = pair_margin.min(d - 2.0 * radius);
                if d < 2.0 * radius - tolerance {
                    violated_pairs.push(PairViolation { i, j, distance: d });
                }
            }
        }
        FeasibilityReport {
            feasible: outside.is_empty() && violated_pairs.is_empty() && violated_boundary.is_empty(),
            radius,
            tolerance,
            outside,
            pair_margin,
            boundary_margin,
            violated_pairs,
            violated_boundary,
            boundary_distances,
        }
    }
}

pub fn check_feasibility(
    container: &PolyhedralContainer,
    metric: Metric,
    points: &[Point3],
    radius: f64,
    tolerance: f64,
) -> FeasibilityReport {
    Oracle::new(container, metric).check(points, radius, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::builtin_container;
    use crate::geometry::Vec3;
    use approx::assert_abs_diff_eq;

    fn v(x: f64, y: f64, z: f64) -> Point3 {
        Vec3::new(x, y, z)
    }

    fn corners() -> Vec<Point3> {
        let mut pts = Vec::new();
        for x in [0.25, 0.75] {
            for y in [0.25, 0.75] {
                for z in [0.25, 0.75] {
                    pts.push(v(x, y, z));
                }
            }
        }
        pts
    }

    #[test]
    fn cube_corner_configuration() {
        let cube = builtin_container("unit_cube").unwrap();
        let r = check_feasibility(&cube, Metric::Euclidean, &corners(), 0.25, ORACLE_TOL);
        assert!(r.feasible);
        assert!(r.pair_margin >= -ORACLE_TOL && r.boundary_margin >= -ORACLE_TOL);
        assert_abs_diff_eq!(r.certified_radius().unwrap(), 0.25, epsilon = 1e-12);

        let r = check_feasibility(&cube, Metric::Euclidean, &corners(), 0.26, ORACLE_TOL);
        assert!(!r.feasible);
        assert_eq!(r.violated_pairs.len(), 12);
        assert_eq!(r.violated_boundary.len(), 8);
    }

    #[test]
    fn single_center_point() {
        let cube = builtin_container("unit_cube").unwrap();
        let r = check_feasibility(&cube, Metric::Euclidean, &[v(0.5, 0.5, 0.5)], 0.5, ORACLE_TOL);
        assert!(r.feasible);
        assert_abs_diff_eq!(r.boundary_margin, 0.0, epsilon = 1e-15);
        assert_eq!(r.pair_margin, f64::INFINITY);
    }

    #[test]
    fn outside_point_is_infeasible() {
        let cube = builtin_container("unit_cube").unwrap();
        let r = check_feasibility(&cube, Metric::Euclidean, &[v(1.5, 0.5, 0.5)], 0.1, ORACLE_TOL);
        assert!(!r.feasible);
        assert_eq!(r.outside, vec![0]);
        assert!(r.certified_radius().is_none());
    }

    #[test]
    fn winding_number_on_h_box() {
        let hbox = builtin_container("h_box").unwrap();
        let o = Oracle::new(&hbox, Metric::Euclidean);
        assert!(!o.is_convex());
        assert!(o.contains(v(0.5, 0.5, 2.5)));
        assert!(o.contains(v(1.5, 0.5, 1.5)));
        assert!(!o.contains(v(1.5, 0.5, 2.5)));
        assert!(!o.contains(v(1.5, 0.5, 0.5)));
        assert!(o.contains(v(1.0, 0.5, 1.5)));
        assert_abs_diff_eq!(o.boundary_distance(v(1.5, 0.5, 1.5)), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(o.boundary_distance(v(1.5, 0.5, 2.5)), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn chebyshev_boundary_distance_in_cube() {
        let cube = builtin_container("unit_cube").unwrap();
        let o = Oracle::new(&cube, Metric::Chebyshev);
        assert_abs_diff_eq!(o.boundary_distance(v(0.2, 0.5, 0.6)), 0.2, epsilon = 1e-12);
        let o = Oracle::new(&cube, Metric::Manhattan);
        assert_abs_diff_eq!(o.boundary_distance(v(0.2, 0.5, 0.6)), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn closest_point_regions() {
        let (a, b, c) = (v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0));
        assert_eq!(closest_point_on_triangle(v(-1.0, -1.0, 0.0), a, b, c), a);
        let q = closest_point_on_triangle(v(0.2, 0.3, 5.0), a, b, c);
        assert!((q - v(0.2, 0.3, 0.0)).norm() < 1e-15);
        assert_eq!(closest_point_on_triangle(v(0.5, -2.0, 1.0), a, b, c), v(0.5, 0.0, 0.0));
        let q = closest_point_on_triangle(v(1.0, 1.0, 0.0), a, b, c);
        assert_abs_diff_eq!(q.x, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(q.y, 0.5, epsilon = 1e-15);
    }
}
