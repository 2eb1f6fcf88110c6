//! Ray-casting point-in-polyhedron test with majority voting.
//!
//! Each ray counts crossings against every fan triangle of every face (outer
//! shell and holes). A ray that passes within [`GRAZE_TOL`] of a triangle
//! edge or vertex is discarded and recast in a fresh direction.

use rand::Rng;

use super::PolyhedralContainer;
use crate::geometry::{random_unit_direction, Point3, Vec3};

pub const DEFAULT_RAYS: usize = 5;
pub const MAX_RECASTS: usize = 20;
pub const GRAZE_TOL: f64 = 1e-9;

/// A fan triangle of a face, with altitudes for edge-distance checks.
#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    a: Point3,
    e1: Vec3,
    e2: Vec3,
    unit_normal: Vec3,
    /// Altitude from A, B, C onto the opposite edge.
    altitudes: [f64; 3],
    pub face: usize,
}

impl Triangle {
    pub fn new(a: Point3, b: Point3, c: Point3, face: usize) -> Self {
        let e1 = b - a;
        let e2 = c - a;
        let n = e1.cross(e2);
        let area2 = n.norm();
        let altitudes = [area2 / (c - b).norm(), area2 / e2.norm(), area2 / e1.norm()];
        Self {
            a,
            e1,
            e2,
            unit_normal: n / area2,
            altitudes,
            face,
        }
    }

    pub fn vertices(&self) -> (Point3, Point3, Point3) {
        (self.a, self.a + self.e1, self.a + self.e2)
    }

    /// Intersects the ray `origin + t·dir`, `t >= 0`, with this triangle.
    pub fn intersect(&self, origin: Point3, dir: Vec3) -> RayOutcome {
        let pvec = dir.cross(self.e2);
        let det = self.e1.dot(pvec);
        let tvec = origin - self.a;
        let plane_dist = self.unit_normal.dot(tvec);
        if det.abs() < 1e-14 * self.e1.norm() * self.e2.norm() {
            // Ray parallel to the plane: only ambiguous if it lies in it.
            return if plane_dist.abs() <= GRAZE_TOL {
                RayOutcome::Graze
            } else {
                RayOutcome::Crossings(0)
            };
        }
        let inv = 1.0 / det;
        let u = tvec.dot(pvec) * inv;
        let qvec = tvec.cross(self.e1);
        let v = dir.dot(qvec) * inv;
        let t = self.e2.dot(qvec) * inv;
        // Signed distances of the plane hit from the three edge lines.
        let bary = [1.0 - u - v, u, v];
        let edge_dist = [
            bary[0] * self.altitudes[0],
            bary[1] * self.altitudes[1],
            bary[2] * self.altitudes[2],
        ];
        let min_edge = edge_dist.iter().copied().fold(f64::INFINITY, f64::min);

        if plane_dist.abs() <= GRAZE_TOL {
            return if min_edge >= -GRAZE_TOL {
                RayOutcome::OnBoundary
            } else {
                RayOutcome::Crossings(0)
            };
        }
        if t <= 0.0 || min_edge < -GRAZE_TOL {
            RayOutcome::Crossings(0)
        } else if min_edge <= GRAZE_TOL {
            RayOutcome::Graze
        } else {
            RayOutcome::Crossings(1)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayOutcome {
    Crossings(usize),
    /// Passed within tolerance of an edge or vertex.
    Graze,
    /// The origin lies on the surface.
    OnBoundary,
}

fn cast(container: &PolyhedralContainer, origin: Point3, dir: Vec3) -> (RayOutcome, usize) {
    let mut crossings = 0;
    let mut grazed = false;
    for tri in container.triangles() {
        match tri.intersect(origin, dir) {
            RayOutcome::Crossings(n) => crossings += n,
            RayOutcome::Graze => grazed = true,
            RayOutcome::OnBoundary => return (RayOutcome::OnBoundary, crossings),
        }
    }
    if grazed {
        (RayOutcome::Graze, crossings)
    } else {
        (RayOutcome::Crossings(crossings), crossings)
    }
}

pub(super) fn contains<R: Rng + ?Sized>(container: &PolyhedralContainer, p: Point3, rng: &mut R) -> bool {
    let (lo, hi) = container.bounding_box();
    if p.x < lo.x - GRAZE_TOL
        || p.y < lo.y - GRAZE_TOL
        || p.z < lo.z - GRAZE_TOL
        || p.x > hi.x + GRAZE_TOL
        || p.y > hi.y + GRAZE_TOL
        || p.z > hi.z + GRAZE_TOL
    {
        return false;
    }
    let rays = container.rays();
    let mut inside_votes = 0;
    for _ in 0..rays {
        let mut vote = None;
        for attempt in 0..=MAX_RECASTS {
            let dir = random_unit_direction(rng);
            match cast(container, p, dir) {
                (RayOutcome::OnBoundary, _) => return true,
                (RayOutcome::Crossings(n), _) => {
                    vote = Some(n % 2 == 1);
                    break;
                }
                (RayOutcome::Graze, n) if attempt == MAX_RECASTS => {
                    vote = Some(n % 2 == 1);
                }
                (RayOutcome::Graze, _) => {}
            }
        }
        if vote == Some(true) {
            inside_votes += 1;
        }
    }
    2 * inside_votes > rays
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_hit_miss_graze() {
        let t = Triangle::new(
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            0,
        );
        let up = Vec3::new(0.0, 0.0, 1.0);
        assert_eq!(t.intersect(Vec3::new(0.2, 0.2, -1.0), up), RayOutcome::Crossings(1));
        assert_eq!(t.intersect(Vec3::new(0.2, 0.2, 1.0), up), RayOutcome::Crossings(0));
        assert_eq!(t.intersect(Vec3::new(0.8, 0.8, -1.0), up), RayOutcome::Crossings(0));
        assert_eq!(t.intersect(Vec3::new(0.5, 0.0, -1.0), up), RayOutcome::Graze);
        assert_eq!(t.intersect(Vec3::new(0.0, 0.0, -1.0), up), RayOutcome::Graze);
        assert_eq!(t.intersect(Vec3::new(0.2, 0.2, 0.0), up), RayOutcome::OnBoundary);
        let side = Vec3::new(1.0, 0.0, 0.0);
        assert_eq!(t.intersect(Vec3::new(-1.0, 0.2, 0.0), side), RayOutcome::Graze);
        assert_eq!(t.intersect(Vec3::new(-1.0, 0.2, 0.5), side), RayOutcome::Crossings(0));
    }
}
