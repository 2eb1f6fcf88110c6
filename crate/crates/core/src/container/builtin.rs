//! Reference containers used by the benchmarks.

use super::{build_container, PolyhedralContainer};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub const BUILTIN_NAMES: [&str; 4] = ["unit_cube", "unit_tetrahedron", "h_box", "star"];

/// Looks up a built-in container by name. `cube` and `tetrahedron` are
/// accepted as aliases.
pub fn builtin_container(name: &str) -> Result<PolyhedralContainer> {
    let (canonical, c) = match name {
        "unit_cube" | "cube" => ("unit_cube", unit_cube()),
        "unit_tetrahedron" | "tetrahedron" | "tetra" => ("unit_tetrahedron", unit_tetrahedron()),
        "h_box" | "hbox" => ("h_box", h_box()),
        "star" => ("star", star()),
        other => return Err(Error::UnknownContainer(other.to_string())),
    };
    Ok(c?.with_name(canonical))
}

fn cuboid(lo: Vec3, hi: Vec3) -> (Vec<Vec3>, Vec<Vec<usize>>) {
    let v = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            )
        })
        .collect();
    let faces = vec![
        vec![0, 2, 6, 4], // x = lo
        vec![1, 5, 7, 3], // x = hi
        vec![0, 4, 5, 1], // y = lo
        vec![2, 3, 7, 6], // y = hi
        vec![0, 1, 3, 2], // z = lo
        vec![4, 6, 7, 5], // z = hi
    ];
    (v, faces)
}

/// `[0, 1]³`.
fn unit_cube() -> Result<PolyhedralContainer> {
    let (v, f) = cuboid(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0));
    build_container(v, f, vec![])
}

/// Regular tetrahedron with unit edge length.
fn unit_tetrahedron() -> Result<PolyhedralContainer> {
    let h = 3f64.sqrt();
    let v = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.5, h / 2.0, 0.0),
        Vec3::new(0.5, h / 6.0, (2.0f64 / 3.0).sqrt()),
    ];
    let f = vec![vec![0, 2, 1], vec![0, 1, 3], vec![1, 2, 3], vec![2, 0, 3]];
    build_container(v, f, vec![])
}

/// Two unit-square columns `[0,1]×[0,1]×[0,3]` and `[2,3]×[0,1]×[0,3]`
/// joined by the crossbar `[1,2]×[0,1]×[1,2]`: an H outline in the xz plane
/// extruded along y. Each cap is split into three convex pieces.
fn h_box() -> Result<PolyhedralContainer> {
    let outline: [(f64, f64); 12] = [
        (0.0, 0.0),
        (1.0, 0.0),
        (1.0, 1.0),
        (2.0, 1.0),
        (2.0, 0.0),
        (3.0, 0.0),
        (3.0, 3.0),
        (2.0, 3.0),
        (2.0, 2.0),
        (1.0, 2.0),
        (1.0, 3.0),
        (0.0, 3.0),
    ];
    let n = outline.len();
    // Vertex k at y = 0, vertex n + k at y = 1.
    let mut v = Vec::with_capacity(2 * n);
    for y in [0.0, 1.0] {
        v.extend(outline.iter().map(|&(x, z)| Vec3::new(x, y, z)));
    }
    let mut faces: Vec<Vec<usize>> = (0..n).map(|k| vec![k, (k + 1) % n, n + (k + 1) % n, n + k]).collect();
    let pieces: [&[usize]; 3] = [
        &[0, 1, 2, 9, 10, 11],
        &[2, 3, 8, 9],
        &[4, 5, 6, 7, 8, 3],
    ];
    for piece in pieces {
        faces.push(piece.to_vec());
        faces.push(piece.iter().rev().map(|&k| n + k).collect());
    }
    build_container(v, faces, vec![])
}

/// Core cube `[-1,1]³` capped by six square pyramids with apexes at
/// `(±2,0,0)`, `(0,±2,0)`, `(0,0,±2)`: 24 triangular lateral faces.
fn star() -> Result<PolyhedralContainer> {
    let mut v: Vec<Vec3> = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -1.0 } else { 1.0 },
                if i & 2 == 0 { -1.0 } else { 1.0 },
                if i & 4 == 0 { -1.0 } else { 1.0 },
            )
        })
        .collect();
    let (_, cube_faces) = cuboid(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0));
    let apexes = [
        Vec3::new(-2.0, 0.0, 0.0),
        Vec3::new(2.0, 0.0, 0.0),
        Vec3::new(0.0, -2.0, 0.0),
        Vec3::new(0.0, 2.0, 0.0),
        Vec3::new(0.0, 0.0, -2.0),
        Vec3::new(0.0, 0.0, 2.0),
    ];
    let mut faces = Vec::with_capacity(24);
    for (base, apex) in cube_faces.iter().zip(apexes) {
        let a = v.len();
        v.push(apex);
        for k in 0..4 {
            faces.push(vec![base[k], base[(k + 1) % 4], a]);
        }
    }
    build_container(v, faces, vec![])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unknown_name() {
        assert!(matches!(builtin_container("dodecahedron"), Err(Error::UnknownContainer(_))));
    }

    #[test]
    fn h_box_shape() {
        let c = builtin_container("h_box").unwrap();
        assert_eq!(c.vertices().len(), 24);
        assert_eq!(c.faces().len(), 18);
        // 12 outline edges per cap plus 12 along y; the 4 seams between cap
        // pieces are not feature edges.
        assert_eq!(c.edges().len(), 36);
        assert_abs_diff_eq!(c.volume(), 7.0, epsilon = 1e-12);
    }

    #[test]
    fn star_shape() {
        let c = builtin_container("star").unwrap();
        assert_eq!(c.faces().len(), 24);
        assert_eq!(c.vertices().len(), 14);
        // Insphere from the origin.
        let insphere = c
            .faces()
            .iter()
            .map(|f| f.signed_distance(Vec3::ZERO))
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(insphere, 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c.volume(), 8.0 + 6.0 * 4.0 / 3.0, epsilon = 1e-12);
    }
}
