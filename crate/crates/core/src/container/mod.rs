//! Oriented polyhedral containers with polyhedral holes.
//!
//! A container is built from one outer shell and any number of hole shells,
//! each given as vertices plus convex planar face loops. Construction derives
//! the edge set, orients every face normal into the solid (holes included),
//! and computes the volume and bounding box. Interiority is decided by
//! majority-voted ray casting, see [`raycast`].

mod builtin;
mod io;
mod raycast;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use builtin::{builtin_container, BUILTIN_NAMES};
pub use io::{ContainerFile, ShellFile};
pub use raycast::{RayOutcome, Triangle, DEFAULT_RAYS, GRAZE_TOL, MAX_RECASTS};

use crate::error::{Error, Result};
use crate::geometry::{Point3, Segment3, Vec3};

/// Boundary tolerance of the in-polygon test for footpoints.
pub const FOOTPOINT_TOL: f64 = 1e-9;
/// Relative coplanarity tolerance for face loops.
pub const PLANARITY_TOL: f64 = 1e-9;

const ORIENTATION_SEED: u64 = 0x5eed_0f_face;

/// A convex planar face with an inward unit normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Face {
    pub vertex_loop: Vec<usize>,
    pub inward_normal: Vec3,
    /// First loop vertex.
    pub plane_point: Point3,
    /// 0 for the outer shell, `k` for hole `k`.
    pub shell: usize,
    /// Faces on the same oriented plane share a group; the lowest face index
    /// names it.
    pub plane_group: usize,
    /// Per loop edge: in-plane unit normal pointing into the polygon, and the
    /// offset such that `u·h >= offset` holds inside.
    edge_planes: Vec<(Vec3, f64)>,
}

impl Face {
    /// Signed distance of `c` from the face plane along the inward normal.
    pub fn signed_distance(&self, c: Point3) -> f64 {
        self.inward_normal.dot(c - self.plane_point)
    }

    /// Boundary-inclusive test for a point already on the face plane.
    pub fn polygon_contains(&self, h: Point3) -> bool {
        self.edge_planes
            .iter()
            .all(|(u, off)| u.dot(h) - off >= -FOOTPOINT_TOL)
    }

    /// Orthogonal foot of `c` on the face plane.
    pub fn foot(&self, c: Point3) -> Point3 {
        c - self.inward_normal * self.signed_distance(c)
    }
}

/// Active faces and active footpoints of one point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    pub active_faces: Vec<usize>,
    /// `(face index, footpoint)`.
    pub footpoints: Vec<(usize, Point3)>,
}

/// A validated polyhedral container `C = (V, E, F)`.
#[derive(Debug, Clone)]
pub struct PolyhedralContainer {
    name: Option<String>,
    vertices: Vec<Point3>,
    edges: Vec<Segment3>,
    faces: Vec<Face>,
    holes: usize,
    bbox_min: Point3,
    bbox_max: Point3,
    volume: f64,
    triangles: Vec<Triangle>,
    rays: usize,
    source: ContainerFile,
}

impl PolyhedralContainer {
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Number of rays voting in [`contains`](Self::contains). Must be odd.
    pub fn with_rays(mut self, rays: usize) -> Result<Self> {
        if rays == 0 || rays % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "ray count must be odd and positive, got {rays}"
            )));
        }
        self.rays = rays;
        Ok(self)
    }

    pub fn rays(&self) -> usize {
        self.rays
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    /// Feature edges. Loop edges shared by two coplanar faces are not
    /// geometric edges of the solid and are left out.
    pub fn edges(&self) -> &[Segment3] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn holes(&self) -> usize {
        self.holes
    }

    pub fn bounding_box(&self) -> (Point3, Point3) {
        (self.bbox_min, self.bbox_max)
    }

    pub fn diagonal(&self) -> f64 {
        (self.bbox_max - self.bbox_min).norm()
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    /// The shell data this container was built from.
    pub fn source(&self) -> &ContainerFile {
        &self.source
    }

    /// Majority-voted ray-casting interiority test. Boundary points count as
    /// inside.
    pub fn contains<R: Rng + ?Sized>(&self, p: Point3, rng: &mut R) -> bool {
        raycast::contains(self, p, rng)
    }

    /// Faces active with respect to `c`, given its interiority.
    pub fn active_faces(&self, c: Point3, inside: bool) -> Vec<usize> {
        self.faces
            .iter()
            .enumerate()
            .filter(|(_, f)| is_active(f.signed_distance(c), inside))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn active_footpoints(&self, c: Point3, inside: bool) -> ActiveSet {
        let mut set = ActiveSet::default();
        for (i, face) in self.faces.iter().enumerate() {
            let s = face.signed_distance(c);
            if !is_active(s, inside) {
                continue;
            }
            set.active_faces.push(i);
            let h = c - face.inward_normal * s;
            if face.polygon_contains(h) {
                set.footpoints.push((i, h));
            }
        }
        set
    }

    /// Calls `f(face index, footpoint, signed distance)` for every active
    /// footpoint without allocating.
    pub fn for_each_footpoint(&self, c: Point3, inside: bool, mut f: impl FnMut(usize, Point3, f64)) {
        for (i, face) in self.faces.iter().enumerate() {
            let s = face.signed_distance(c);
            if !is_active(s, inside) {
                continue;
            }
            let h = c - face.inward_normal * s;
            if face.polygon_contains(h) {
                f(i, h, s);
            }
        }
    }

    /// Uniform sample from the interior by rejection in the bounding box.
    /// Returns `None` after `max_attempts` rejections.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: usize) -> Option<Point3> {
        for _ in 0..max_attempts {
            let p = Vec3::new(
                rng.random_range(self.bbox_min.x..=self.bbox_max.x),
                rng.random_range(self.bbox_min.y..=self.bbox_max.y),
                rng.random_range(self.bbox_min.z..=self.bbox_max.z),
            );
            if self.contains(p, rng) {
                return Some(p);
            }
        }
        None
    }

    /// `n` uniform interior samples drawn with at most `max_attempts`
    /// bounding-box proposals in total.
    pub fn sample_interior_batch<R: Rng + ?Sized>(
        &self,
        n: usize,
        max_attempts: usize,
        rng: &mut R,
    ) -> Result<Vec<Point3>> {
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0;
        while out.len() < n {
            if attempts >= max_attempts {
                return Err(Error::SamplingExhausted {
                    attempts,
                    accepted: out.len(),
                });
            }
            attempts += 1;
            let p = Vec3::new(
                rng.random_range(self.bbox_min.x..=self.bbox_max.x),
                rng.random_range(self.bbox_min.y..=self.bbox_max.y),
                rng.random_range(self.bbox_min.z..=self.bbox_max.z),
            );
            if self.contains(p, rng) {
                out.push(p);
            }
        }
        Ok(out)
    }
}

fn is_active(signed_distance: f64, inside: bool) -> bool {
    if inside {
        signed_distance >= 0.0
    } else {
        signed_distance < 0.0
    }
}

/// One closed shell of vertices and face loops.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Shell {
    pub vertices: Vec<Point3>,
    pub faces: Vec<Vec<usize>>,
}

/// Builds and validates a container from an outer shell and hole shells.
pub fn build_container(
    vertices: Vec<Point3>,
    face_loops: Vec<Vec<usize>>,
    hole_shells: Vec<Shell>,
) -> Result<PolyhedralContainer> {
    let source = ContainerFile::from_shells(&vertices, &face_loops, &hole_shells);
    let mut shells = vec![Shell {
        vertices,
        faces: face_loops,
    }];
    shells.extend(hole_shells);

    let mut all_vertices = Vec::new();
    let mut loops = Vec::new();
    for (k, shell) in shells.iter().enumerate() {
        if shell.vertices.len() < 4 {
            return Err(Error::TooFewElements {
                shell: k,
                what: "vertices",
                min: 4,
                got: shell.vertices.len(),
            });
        }
        if shell.faces.len() < 4 {
            return Err(Error::TooFewElements {
                shell: k,
                what: "faces",
                min: 4,
                got: shell.faces.len(),
            });
        }
        if shell.vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("container vertices"));
        }
        let offset = all_vertices.len();
        for face in &shell.faces {
            if let Some(&bad) = face.iter().find(|&&i| i >= shell.vertices.len()) {
                return Err(Error::Malformed(format!(
                    "face index {bad} out of range for shell {k} with {} vertices",
                    shell.vertices.len()
                )));
            }
            loops.push((k, face.iter().map(|&i| i + offset).collect::<Vec<_>>()));
        }
        all_vertices.extend_from_slice(&shell.vertices);
    }

    let bbox_min = shells[0].vertices.iter().fold(Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY), |m, &v| m.min(v));
    let bbox_max = shells[0].vertices.iter().fold(Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY), |m, &v| m.max(v));
    let scale = (bbox_max - bbox_min).norm().max(1.0);

    // Per-face geometry with a provisional normal from the loop orientation.
    let mut faces = Vec::with_capacity(loops.len());
    for (fi, (shell, lp)) in loops.iter().enumerate() {
        faces.push(validate_face(fi, *shell, lp, &all_vertices, scale)?);
    }

    let mut edge_faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (fi, (_, lp)) in loops.iter().enumerate() {
        for k in 0..lp.len() {
            let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
            edge_faces.entry((a.min(b), a.max(b))).or_default().push(fi);
        }
    }
    for (&(a, b), fs) in &edge_faces {
        if fs.len() != 2 {
            return Err(Error::NonManifold(a, b, fs.len()));
        }
    }

    let triangles: Vec<Triangle> = faces
        .iter()
        .enumerate()
        .flat_map(|(fi, f)| {
            let lp = &f.vertex_loop;
            (1..lp.len() - 1).map(move |k| (fi, lp[0], lp[k], lp[k + 1]))
        })
        .map(|(fi, a, b, c)| Triangle::new(all_vertices[a], all_vertices[b], all_vertices[c], fi))
        .collect();

    let mut container = PolyhedralContainer {
        name: None,
        vertices: all_vertices,
        edges: Vec::new(),
        faces,
        holes: shells.len() - 1,
        bbox_min,
        bbox_max,
        volume: 0.0,
        triangles,
        rays: DEFAULT_RAYS,
        source,
    };

    orient_faces(&mut container, scale)?;

    // Volume by the divergence theorem; inward normals flip the usual sign.
    let mut volume = 0.0;
    for t in &container.triangles {
        let (a, b, c) = t.vertices();
        let sign = if (b - a).cross(c - a).dot(container.faces[t.face].inward_normal) > 0.0 {
            1.0
        } else {
            -1.0
        };
        volume -= sign * a.dot(b.cross(c)) / 6.0;
    }
    if !(volume > 0.0) {
        return Err(Error::EmptyInterior(0));
    }
    container.volume = volume;

    container.edges = edge_faces
        .iter()
        .filter(|(_, fs)| {
            let (f, g) = (&container.faces[fs[0]], &container.faces[fs[1]]);
            f.inward_normal.dot(g.inward_normal) < 1.0 - 1e-12
        })
        .map(|(&(a, b), _)| Segment3::new(container.vertices[a], container.vertices[b]))
        .collect();

    for face in &mut container.faces {
        face.edge_planes = edge_planes(&face.vertex_loop, &container.vertices, face.inward_normal);
    }
    for fi in 0..container.faces.len() {
        let f = &container.faces[fi];
        let group = (0..fi).find(|&gi| {
            let g = &container.faces[gi];
            g.inward_normal.dot(f.inward_normal) > 1.0 - 1e-12
                && g.signed_distance(f.plane_point).abs() <= PLANARITY_TOL * scale
        });
        if let Some(gi) = group {
            container.faces[fi].plane_group = container.faces[gi].plane_group;
        }
    }

    Ok(container)
}

fn validate_face(fi: usize, shell: usize, lp: &[usize], verts: &[Point3], scale: f64) -> Result<Face> {
    if lp.len() < 3 {
        return Err(Error::DegenerateFace {
            face: fi,
            reason: format!("{} vertices", lp.len()),
        });
    }
    for (k, &i) in lp.iter().enumerate() {
        if lp[k + 1..].contains(&i) {
            return Err(Error::DegenerateFace {
                face: fi,
                reason: format!("vertex {i} repeated"),
            });
        }
    }
    let pts: Vec<Point3> = lp.iter().map(|&i| verts[i]).collect();
    // Newell normal.
    let mut newell = Vec3::ZERO;
    for k in 0..pts.len() {
        newell += pts[k].cross(pts[(k + 1) % pts.len()]);
    }
    let normal = match newell.normalized() {
        Some(n) if newell.norm() > 1e-12 * scale * scale => n,
        _ => {
            return Err(Error::DegenerateFace {
                face: fi,
                reason: "zero area".into(),
            })
        }
    };
    let deviation = pts
        .iter()
        .map(|&p| normal.dot(p - pts[0]).abs())
        .fold(0.0, f64::max);
    if deviation > PLANARITY_TOL * scale {
        return Err(Error::NonPlanarFace { face: fi, deviation });
    }
    for k in 0..pts.len() {
        let e0 = pts[(k + 1) % pts.len()] - pts[k];
        let e1 = pts[(k + 2) % pts.len()] - pts[(k + 1) % pts.len()];
        if e0.norm() < 1e-12 * scale {
            return Err(Error::DegenerateFace {
                face: fi,
                reason: "zero-length edge".into(),
            });
        }
        if e0.cross(e1).dot(normal) < -1e-9 * e0.norm() * e1.norm() {
            return Err(Error::NonConvexFace(fi));
        }
    }
    Ok(Face {
        vertex_loop: lp.to_vec(),
        inward_normal: normal,
        plane_point: pts[0],
        shell,
        plane_group: fi,
        edge_planes: Vec::new(),
    })
}

/// Flips each provisional normal so that a point just off the face centroid
/// along the normal tests inside the solid.
fn orient_faces(container: &mut PolyhedralContainer, scale: f64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(ORIENTATION_SEED);
    let delta = 1e-6 * scale;
    for fi in 0..container.faces.len() {
        let face = &container.faces[fi];
        let n = face.vertex_loop.len() as f64;
        let centroid = face
            .vertex_loop
            .iter()
            .fold(Vec3::ZERO, |acc, &i| acc + container.vertices[i])
            / n;
        let normal = face.inward_normal;
        let forward = container.contains(centroid + normal * delta, &mut rng);
        let backward = container.contains(centroid - normal * delta, &mut rng);
        let inward = match (forward, backward) {
            (true, false) => normal,
            (false, true) => -normal,
            _ => return Err(Error::EmptyInterior(fi)),
        };
        container.faces[fi].inward_normal = inward;
    }
    Ok(())
}

fn edge_planes(lp: &[usize], verts: &[Point3], inward_normal: Vec3) -> Vec<(Vec3, f64)> {
    let pts: Vec<Point3> = lp.iter().map(|&i| verts[i]).collect();
    let mut newell = Vec3::ZERO;
    for k in 0..pts.len() {
        newell += pts[k].cross(pts[(k + 1) % pts.len()]);
    }
    let orientation = if newell.dot(inward_normal) >= 0.0 { 1.0 } else { -1.0 };
    (0..pts.len())
        .map(|k| {
            let e = pts[(k + 1) % pts.len()] - pts[k];
            let u = (inward_normal.cross(e) * orientation)
                .normalized()
                .expect("edge length validated");
            (u, u.dot(pts[k]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(3)
    }

    #[test]
    fn unit_cube_counts() {
        let c = builtin_container("unit_cube").unwrap();
        assert_eq!(c.vertices().len(), 8);
        assert_eq!(c.edges().len(), 12);
        assert_eq!(c.faces().len(), 6);
        assert_abs_diff_eq!(c.volume(), 1.0, epsilon = 1e-12);
        for f in c.faces() {
            assert_abs_diff_eq!(f.inward_normal.norm(), 1.0, epsilon = 1e-12);
            assert!(f.signed_distance(Vec3::new(0.5, 0.5, 0.5)) > 0.0);
        }
    }

    #[test]
    fn tetrahedron_volume() {
        let c = builtin_container("unit_tetrahedron").unwrap();
        assert_abs_diff_eq!(c.volume(), 1.0 / (6.0 * 2f64.sqrt()), epsilon = 1e-12);
        assert_eq!(c.edges().len(), 6);
    }

    #[test]
    fn repeated_vertex_is_degenerate() {
        let cube = builtin_container("unit_cube").unwrap();
        let mut faces = cube.source().faces.clone();
        faces[0] = vec![faces[0][0], faces[0][1], faces[0][1], faces[0][2]];
        let err = build_container(cube.vertices().to_vec(), faces, vec![]).unwrap_err();
        assert!(matches!(err, Error::DegenerateFace { .. }), "{err}");
    }

    #[test]
    fn missing_face_is_non_manifold() {
        let cube = builtin_container("unit_cube").unwrap();
        let mut faces = cube.source().faces.clone();
        faces.pop();
        let err = build_container(cube.vertices().to_vec(), faces, vec![]).unwrap_err();
        assert!(matches!(err, Error::NonManifold(..)), "{err}");
    }

    #[test]
    fn warped_face_is_non_planar() {
        let cube = builtin_container("unit_cube").unwrap();
        let mut verts = cube.vertices().to_vec();
        verts[0].z -= 0.01;
        let err = build_container(verts, cube.source().faces.clone(), vec![]).unwrap_err();
        assert!(matches!(err, Error::NonPlanarFace { .. }), "{err}");
    }

    #[test]
    fn cube_with_cubic_hole() {
        let outer = builtin_container("unit_cube").unwrap();
        let hole_verts = outer
            .vertices()
            .iter()
            .map(|&v| Vec3::new(0.25, 0.25, 0.25) + v * 0.5)
            .collect();
        let hole = Shell {
            vertices: hole_verts,
            faces: outer.source().faces.clone(),
        };
        let c = build_container(outer.vertices().to_vec(), outer.source().faces.clone(), vec![hole]).unwrap();
        assert_eq!(c.holes(), 1);
        assert_abs_diff_eq!(c.volume(), 1.0 - 0.125, epsilon = 1e-12);
        let mut rng = rng();
        assert!(!c.contains(Vec3::new(0.5, 0.5, 0.5), &mut rng));
        assert!(c.contains(Vec3::new(0.1, 0.5, 0.5), &mut rng));
        // Hole normals point away from the cavity.
        for f in c.faces().iter().filter(|f| f.shell == 1) {
            assert!(f.signed_distance(Vec3::new(0.5, 0.5, 0.5)) < 0.0);
        }
    }

    #[test]
    fn cube_containment() {
        let c = builtin_container("unit_cube").unwrap();
        let mut rng = rng();
        assert!(c.contains(Vec3::new(0.5, 0.5, 0.5), &mut rng));
        assert!(!c.contains(Vec3::new(2.0, 2.0, 2.0), &mut rng));
        // Boundary ties resolve inside.
        assert!(c.contains(Vec3::new(1.0, 0.5, 0.5), &mut rng));
        assert!(c.contains(Vec3::new(1.0, 1.0, 0.5), &mut rng));
        assert!(c.contains(Vec3::new(0.0, 0.0, 0.0), &mut rng));
    }

    #[test]
    fn h_box_figure_points() {
        let c = builtin_container("h_box").unwrap();
        let mut rng = rng();
        assert!(c.contains(Vec3::new(1.5, 0.5, 1.5), &mut rng));
        assert!(!c.contains(Vec3::new(1.5, 0.5, 2.5), &mut rng));
    }

    #[test]
    fn cube_active_faces() {
        let c = builtin_container("unit_cube").unwrap();
        let center = Vec3::new(0.5, 0.5, 0.5);
        assert_eq!(c.active_faces(center, true).len(), 6);

        let out = Vec3::new(1.5, 0.5, 0.5);
        let active = c.active_faces(out, false);
        assert_eq!(active.len(), 1);
        let f = &c.faces()[active[0]];
        assert_abs_diff_eq!(f.inward_normal.x, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.plane_point.x, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cube_center_footpoints() {
        let c = builtin_container("unit_cube").unwrap();
        let set = c.active_footpoints(Vec3::new(0.5, 0.5, 0.5), true);
        assert_eq!(set.footpoints.len(), 6);
        let mut feet: Vec<[f64; 3]> = set.footpoints.iter().map(|(_, h)| h.to_array()).collect();
        feet.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expected = vec![
            [0.0, 0.5, 0.5],
            [1.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
            [0.5, 1.0, 0.5],
            [0.5, 0.5, 0.0],
            [0.5, 0.5, 1.0],
        ];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (f, e) in feet.iter().zip(&expected) {
            for k in 0..3 {
                assert_abs_diff_eq!(f[k], e[k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn projection_outside_every_active_face() {
        // Beyond a cube corner: the three active faces' feet all miss.
        let c = builtin_container("unit_cube").unwrap();
        let set = c.active_footpoints(Vec3::new(1.5, 1.5, 1.5), false);
        assert_eq!(set.active_faces.len(), 3);
        assert!(set.footpoints.is_empty());
    }

    #[test]
    fn h_box_footpoints_inside_and_outside() {
        let c = builtin_container("h_box").unwrap();
        let inside = Vec3::new(1.5, 0.5, 1.5);
        let set = c.active_footpoints(inside, true);
        // Crossbar floor and ceiling, both crossbar caps, and the two outer walls.
        assert_eq!(set.active_faces.len(), 14);
        assert_eq!(set.footpoints.len(), 6);
        for (fi, h) in &set.footpoints {
            let f = &c.faces()[*fi];
            assert!(f.signed_distance(*h).abs() < 1e-12);
            assert_abs_diff_eq!((inside - *h).norm(), f.signed_distance(inside).abs(), epsilon = 1e-12);
        }

        let outside = Vec3::new(1.5, 0.5, 2.5);
        let set = c.active_footpoints(outside, false);
        assert!(!set.active_faces.is_empty());
        assert!(set.footpoints.len() < set.active_faces.len());
        assert!(!set.footpoints.is_empty());
    }
}
