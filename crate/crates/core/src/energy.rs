//! Feasibility-residual energy.
//!
//! `E(X, D) = Σ_{i<j} ℓ²_ij + Σ_i O_i` where `ℓ_ij = max(0, 2D − d(c_i, c_j))`
//! and `O_i` is the boundary penalty of point `c_i`:
//!
//! * inside the container, `Σ (max(0, D − d(c_i, v)))²` over every vertex,
//!   feature edge and active footpoint `v`;
//! * outside, `D + 2·(min d(c_i, v))²` over vertices and active footpoints.
//!
//! `E` is zero exactly on feasible `(X, D)`. Interiority is decided once per
//! point per evaluation, so a value and its gradient always come from the
//! same active set.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::container::PolyhedralContainer;
use crate::error::{Error, Result};
use crate::geometry::{distance_point_segment, segment_distance_gradient, Metric, Point3, Vec3};

/// Ordered dispersion points `c_1..c_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    points: Vec<Point3>,
}

impl Configuration {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("configuration needs p >= 1 points".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("configuration"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }

    /// Flat `[x0, y0, z0, x1, ...]` layout used by the optimizers.
    pub fn to_flat(&self) -> Vec<f64> {
        flatten(&self.points)
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        Self::new(unflatten(flat))
    }
}

pub(crate) fn flatten(points: &[Point3]) -> Vec<f64> {
    points.iter().flat_map(|p| p.to_array()).collect()
}

pub(crate) fn unflatten(flat: &[f64]) -> Vec<Point3> {
    flat.chunks_exact(3)
        .map(|c| Vec3::new(c[0], c[1], c[2]))
        .collect()
}

/// Solution radius `D > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Radius(f64);

impl Radius {
    pub fn new(d: f64) -> Result<Self> {
        if d > 0.0 && d.is_finite() {
            Ok(Self(d))
        } else {
            Err(Error::InvalidParameter(format!("radius must be positive and finite, got {d}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub total: f64,
    /// `Σ_{i<j} ℓ²_ij`.
    pub dispersion_term: f64,
    /// `O_i` per point.
    pub boundary_terms: Vec<f64>,
}

/// Energy, gradient and active-set signature from one evaluation.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub energy: f64,
    pub gradient: Vec<Vec3>,
    /// `∂E/∂D`.
    pub d_radius: f64,
    /// Hash of the switches at which `E` or `∇E` jumps: interiority flags,
    /// footpoints in contact, the nearest feature of outside points and, for
    /// ℓ∞ and ℓ1, the linear piece of every norm in contact. Pair, vertex and
    /// edge contacts enter quadratically and keep `E` continuously
    /// differentiable, so they are not tracked.
    pub signature: u64,
}

/// Contribution of one point to the boundary penalty.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundaryTerm {
    pub value: f64,
    pub gradient: Vec3,
    pub d_radius: f64,
    pub signature: u64,
}

/// `ℓ = max(0, 2D − d(c_i, c_j))`, not squared.
pub fn pair_penalty(metric: Metric, ci: Point3, cj: Point3, radius: f64) -> f64 {
    (2.0 * radius - metric.distance(ci, cj)).max(0.0)
}

/// Energy model bound to a container and a metric.
#[derive(Debug, Clone, Copy)]
pub struct EnergyModel<'a> {
    pub container: &'a PolyhedralContainer,
    pub metric: Metric,
}

#[inline]
fn mix(h: u64, v: u64) -> u64 {
    (h ^ v).wrapping_mul(0x0000_0100_0000_01b3).rotate_left(5)
}

/// Identifies the smooth piece of a non-Euclidean norm at `delta`.
#[inline]
fn piece(metric: Metric, delta: Vec3) -> u64 {
    if metric == Metric::Euclidean {
        return 0;
    }
    let g = metric.norm_gradient(delta);
    (0..3).fold(0, |acc, k| {
        let digit = if g[k] > 0.0 {
            1
        } else if g[k] < 0.0 {
            2
        } else {
            0
        };
        acc * 3 + digit
    })
}

const KIND_VERTEX: u64 = 1 << 40;
const KIND_EDGE: u64 = 2 << 40;
const KIND_FOOT: u64 = 3 << 40;

impl<'a> EnergyModel<'a> {
    pub fn new(container: &'a PolyhedralContainer, metric: Metric) -> Self {
        Self { container, metric }
    }

    /// `O` for a point with known interiority, with its gradient.
    pub fn boundary_term(&self, c: Point3, radius: f64, inside: bool) -> BoundaryTerm {
        let m = self.metric;
        let cont = self.container;
        let mut t = BoundaryTerm {
            signature: if inside { 0x1 } else { 0x2 },
            ..Default::default()
        };
        if inside {
            let tracked = m != Metric::Euclidean;
            let add = |t: &mut BoundaryTerm, d: f64, grad: Vec3, id: u64, structural: bool| {
                if d < radius {
                    let w = radius - d;
                    t.value += w * w;
                    t.gradient -= grad * (2.0 * w);
                    t.d_radius += 2.0 * w;
                    if structural {
                        t.signature = mix(t.signature, id);
                    }
                }
            };
            for (k, &v) in cont.vertices().iter().enumerate() {
                let d = m.distance(c, v);
                if d < radius {
                    add(&mut t, d, m.gradient(c, v), KIND_VERTEX | piece(m, c - v) << 32 | k as u64, tracked);
                }
            }
            let lower = m.euclidean_lower_factor();
            for (k, e) in cont.edges().iter().enumerate() {
                if m != Metric::Euclidean {
                    let (d2, _) = distance_point_segment(Metric::Euclidean, c, e);
                    if d2 * lower >= radius {
                        continue;
                    }
                }
                let (d, q) = distance_point_segment(m, c, e);
                if d < radius {
                    add(&mut t, d, segment_distance_gradient(m, c, e, q), KIND_EDGE | piece(m, c - q) << 32 | k as u64, tracked);
                }
            }
            // A face plane within reach whose foot misses every polygon on
            // that plane is tracked: the foot term switches discontinuously
            // when the foot crosses the border. Crossing between coplanar
            // faces is smooth.
            let mut missed = Vec::new();
            let mut hit = Vec::new();
            for face in cont.faces() {
                let s = face.signed_distance(c);
                if s < 0.0 {
                    continue;
                }
                let n = face.inward_normal;
                let nm = m.norm(n);
                let d = s * nm;
                if d >= radius {
                    continue;
                }
                if face.polygon_contains(c - n * s) {
                    add(&mut t, d, n * nm, 0, false);
                    hit.push(face.plane_group);
                } else {
                    missed.push(face.plane_group);
                }
            }
            missed.sort_unstable();
            missed.dedup();
            for g in missed.into_iter().filter(|g| !hit.contains(g)) {
                t.signature = mix(t.signature, KIND_FOOT | g as u64);
            }
        } else {
            // Nearest vertex or footpoint; lowest index wins ties.
            let mut best = f64::INFINITY;
            let mut best_grad = Vec3::ZERO;
            let mut best_id = 0;
            for (k, &v) in cont.vertices().iter().enumerate() {
                let d = m.distance(c, v);
                if d < best {
                    best = d;
                    best_grad = m.gradient(c, v);
                    best_id = KIND_VERTEX | piece(m, c - v) << 32 | k as u64;
                }
            }
            cont.for_each_footpoint(c, false, |fi, _h, s| {
                let n = cont.faces()[fi].inward_normal;
                let nm = m.norm(n);
                let d = s.abs() * nm;
                if d < best {
                    best = d;
                    best_grad = n * (s.signum() * nm);
                    best_id = KIND_FOOT | cont.faces()[fi].plane_group as u64;
                }
            });
            t.value = radius + 2.0 * best * best;
            t.gradient = best_grad * (4.0 * best);
            t.d_radius = 1.0;
            t.signature = mix(t.signature, best_id);
        }
        t
    }

    /// `O_i` for a single point, deciding interiority by ray casting.
    pub fn boundary_penalty<R: Rng + ?Sized>(&self, c: Point3, radius: f64, rng: &mut R) -> f64 {
        let inside = self.container.contains(c, rng);
        self.boundary_term(c, radius, inside).value
    }

    pub fn breakdown<R: Rng + ?Sized>(&self, points: &[Point3], radius: f64, rng: &mut R) -> EnergyBreakdown {
        let mut dispersion_term = 0.0;
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let l = pair_penalty(self.metric, points[i], points[j], radius);
                dispersion_term += l * l;
            }
        }
        let boundary_terms: Vec<f64> = points
            .iter()
            .map(|&c| self.boundary_penalty(c, radius, rng))
            .collect();
        EnergyBreakdown {
            total: dispersion_term + boundary_terms.iter().sum::<f64>(),
            dispersion_term,
            boundary_terms,
        }
    }

    pub fn total_energy<R: Rng + ?Sized>(&self, points: &[Point3], radius: f64, rng: &mut R) -> f64 {
        self.breakdown(points, radius, rng).total
    }

    /// `E_D(c_i) = Σ_{j≠i} ℓ²_ij + O_i`.
    pub fn point_energy<R: Rng + ?Sized>(&self, points: &[Point3], i: usize, radius: f64, rng: &mut R) -> Result<f64> {
        let ci = *points.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: points.len(),
        })?;
        let pairs: f64 = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &cj)| pair_penalty(self.metric, ci, cj, radius).powi(2))
            .sum();
        Ok(pairs + self.boundary_penalty(ci, radius, rng))
    }

    /// Energy of a candidate site `c` against every configuration point.
    pub fn vacancy_energy<R: Rng + ?Sized>(&self, points: &[Point3], c: Point3, radius: f64, rng: &mut R) -> f64 {
        let pairs: f64 = points
            .iter()
            .map(|&cj| pair_penalty(self.metric, c, cj, radius).powi(2))
            .sum();
        pairs + self.boundary_penalty(c, radius, rng)
    }

    /// `Φ_μ(X, D) = −D² + μ·E(X, D)`.
    pub fn sumt_objective<R: Rng + ?Sized>(&self, points: &[Point3], radius: f64, mu: f64, rng: &mut R) -> f64 {
        -radius * radius + mu * self.total_energy(points, radius, rng)
    }

    /// Energy and its (sub)gradient with respect to every point and to `D`.
    pub fn evaluate<R: Rng + ?Sized>(&self, points: &[Point3], radius: f64, rng: &mut R) -> Evaluation {
        let p = points.len();
        let mut gradient = vec![Vec3::ZERO; p];
        let mut energy = 0.0;
        let mut d_radius = 0.0;
        let mut signature = 0xcbf2_9ce4_8422_2325u64;
        for i in 0..p {
            for j in (i + 1)..p {
                let delta = points[i] - points[j];
                let d = self.metric.norm(delta);
                let l = 2.0 * radius - d;
                if l > 0.0 {
                    energy += l * l;
                    d_radius += 4.0 * l;
                    let g = self.metric.norm_gradient(delta) * (2.0 * l);
                    gradient[i] -= g;
                    gradient[j] += g;
                    if self.metric != Metric::Euclidean {
                        signature = mix(signature, piece(self.metric, delta) << 40 | (i as u64) << 20 | j as u64);
                    }
                }
            }
        }
        for (i, &c) in points.iter().enumerate() {
            let inside = self.container.contains(c, rng);
            let t = self.boundary_term(c, radius, inside);
            energy += t.value;
            d_radius += t.d_radius;
            gradient[i] += t.gradient;
            signature = mix(mix(signature, i as u64), t.signature);
        }
        Evaluation {
            energy,
            gradient,
            d_radius,
            signature,
        }
    }
}

pub fn boundary_penalty<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    c: Point3,
    radius: f64,
    rng: &mut R,
) -> f64 {
    EnergyModel::new(container, metric).boundary_penalty(c, radius, rng)
}

pub fn total_energy<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    config: &Configuration,
    radius: f64,
    rng: &mut R,
) -> EnergyBreakdown {
    EnergyModel::new(container, metric).breakdown(config.points(), radius, rng)
}

pub fn point_energy<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    config: &Configuration,
    i: usize,
    radius: f64,
    rng: &mut R,
) -> Result<f64> {
    EnergyModel::new(container, metric).point_energy(config.points(), i, radius, rng)
}

pub fn vacancy_energy<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    config: &Configuration,
    c: Point3,
    radius: f64,
    rng: &mut R,
) -> f64 {
    EnergyModel::new(container, metric).vacancy_energy(config.points(), c, radius, rng)
}

pub fn sumt_objective<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    config: &Configuration,
    radius: f64,
    mu: f64,
    rng: &mut R,
) -> f64 {
    EnergyModel::new(container, metric).sumt_objective(config.points(), radius, mu, rng)
}

pub fn energy_gradient<R: Rng + ?Sized>(
    container: &PolyhedralContainer,
    metric: Metric,
    config: &Configuration,
    radius: f64,
    rng: &mut R,
) -> Evaluation {
    EnergyModel::new(container, metric).evaluate(config.points(), radius, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::builtin_container;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    fn v(x: f64, y: f64, z: f64) -> Point3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn pair_penalty_examples() {
        let e = Metric::Euclidean;
        assert_eq!(pair_penalty(e, v(0.0, 0.0, 0.0), v(0.5, 0.0, 0.0), 0.25), 0.0);
        assert_abs_diff_eq!(pair_penalty(e, v(0.0, 0.0, 0.0), v(0.3, 0.0, 0.0), 0.25), 0.2, epsilon = 1e-15);
        assert_eq!(pair_penalty(e, v(0.0, 0.0, 0.0), v(0.9, 0.0, 0.0), 0.25), 0.0);
    }

    #[test]
    fn boundary_penalty_examples() {
        let cube = builtin_container("unit_cube").unwrap();
        let e = Metric::Euclidean;
        let mut rng = rng();
        let center = v(0.5, 0.5, 0.5);
        assert_eq!(boundary_penalty(&cube, e, center, 0.4, &mut rng), 0.0);
        assert_abs_diff_eq!(boundary_penalty(&cube, e, center, 0.6, &mut rng), 0.06, epsilon = 1e-12);
        assert_abs_diff_eq!(
            boundary_penalty(&cube, e, v(1.5, 0.5, 0.5), 0.2, &mut rng),
            0.7,
            epsilon = 1e-12
        );
    }

    #[test]
    fn total_energy_examples() {
        let cube = builtin_container("unit_cube").unwrap();
        let e = Metric::Euclidean;
        let mut rng = rng();
        let pair = Configuration::new(vec![v(0.25, 0.5, 0.5), v(0.75, 0.5, 0.5)]).unwrap();
        assert_eq!(total_energy(&cube, e, &pair, 0.25, &mut rng).total, 0.0);

        let single = Configuration::new(vec![v(0.5, 0.5, 0.5)]).unwrap();
        assert_eq!(total_energy(&cube, e, &single, 0.5, &mut rng).total, 0.0);

        let twin = Configuration::new(vec![v(0.5, 0.5, 0.5); 2]).unwrap();
        let b = total_energy(&cube, e, &twin, 0.25, &mut rng);
        assert_abs_diff_eq!(b.dispersion_term, 0.25, epsilon = 1e-15);
        assert_eq!(b.boundary_terms, vec![0.0, 0.0]);
        assert_abs_diff_eq!(b.total, 0.25, epsilon = 1e-15);
        for i in 0..2 {
            assert_abs_diff_eq!(point_energy(&cube, e, &twin, i, 0.25, &mut rng).unwrap(), 0.25, epsilon = 1e-15);
        }
        assert!(matches!(
            point_energy(&cube, e, &twin, 2, 0.25, &mut rng),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn point_energies_double_count_pairs() {
        let cube = builtin_container("unit_cube").unwrap();
        let model = EnergyModel::new(&cube, Metric::Euclidean);
        let mut rng = rng();
        let pts = vec![v(0.1, 0.2, 0.3), v(0.3, 0.2, 0.1), v(0.9, 0.8, 1.2), v(0.5, 0.5, 0.5)];
        let b = model.breakdown(&pts, 0.2, &mut rng);
        let sum: f64 = (0..4).map(|i| model.point_energy(&pts, i, 0.2, &mut rng).unwrap()).sum();
        assert_abs_diff_eq!(sum, 2.0 * b.dispersion_term + b.boundary_terms.iter().sum::<f64>(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.total, b.dispersion_term + b.boundary_terms.iter().sum::<f64>(), epsilon = 1e-12);
    }

    #[test]
    fn vacancy_energy_examples() {
        let cube = builtin_container("unit_cube").unwrap();
        let model = EnergyModel::new(&cube, Metric::Euclidean);
        let mut rng = rng();
        let pts = vec![v(0.2, 0.2, 0.2)];
        assert_eq!(model.vacancy_energy(&pts, v(0.7, 0.7, 0.7), 0.15, &mut rng), 0.0);
        assert!(model.vacancy_energy(&pts, v(0.2, 0.2, 0.2), 0.25, &mut rng) >= 0.25);
        assert!(model.vacancy_energy(&pts, v(2.0, 0.5, 0.5), 0.1, &mut rng) >= 0.1);
    }

    #[test]
    fn sumt_examples() {
        let cube = builtin_container("unit_cube").unwrap();
        let e = Metric::Euclidean;
        let mut rng = rng();
        let single = Configuration::new(vec![v(0.5, 0.5, 0.5)]).unwrap();
        assert_eq!(sumt_objective(&cube, e, &single, 0.3, 10.0, &mut rng), -0.09);
        assert_abs_diff_eq!(sumt_objective(&cube, e, &single, 0.6, 10.0, &mut rng), 0.24, epsilon = 1e-12);
        let a = sumt_objective(&cube, e, &single, 0.6, 10.0, &mut rng) + 0.36;
        let b = sumt_objective(&cube, e, &single, 0.6, 20.0, &mut rng) + 0.36;
        assert_abs_diff_eq!(b, 2.0 * a, epsilon = 1e-12);
    }

    #[test]
    fn feasible_configuration_has_zero_gradient() {
        let cube = builtin_container("unit_cube").unwrap();
        let pts = vec![v(0.25, 0.5, 0.5), v(0.75, 0.5, 0.5)];
        let eval = EnergyModel::new(&cube, Metric::Euclidean).evaluate(&pts, 0.25, &mut rng());
        assert_eq!(eval.energy, 0.0);
        assert_eq!(eval.d_radius, 0.0);
        assert!(eval.gradient.iter().all(|g| *g == Vec3::ZERO));
    }

    #[test]
    fn coincident_points_have_zero_pair_direction() {
        let cube = builtin_container("unit_cube").unwrap();
        let pts = vec![v(0.5, 0.5, 0.5); 2];
        let eval = EnergyModel::new(&cube, Metric::Euclidean).evaluate(&pts, 0.25, &mut rng());
        assert_abs_diff_eq!(eval.energy, 0.25, epsilon = 1e-15);
        assert!(eval.gradient.iter().all(|g| *g == Vec3::ZERO));
        assert_abs_diff_eq!(eval.d_radius, 4.0 * 0.5, epsilon = 1e-15);
    }

    #[test]
    fn h_box_seven_ball_construction_is_feasible() {
        let hbox = builtin_container("h_box").unwrap();
        let mut pts = vec![v(1.5, 0.5, 1.5)];
        for x in [0.5, 2.5] {
            for z in [0.5, 1.5, 2.5] {
                pts.push(v(x, 0.5, z));
            }
        }
        let model = EnergyModel::new(&hbox, Metric::Euclidean);
        assert_eq!(model.total_energy(&pts, 0.5, &mut rng()), 0.0);
        assert!(model.total_energy(&pts, 0.5001, &mut rng()) > 0.0);
    }

    #[test]
    fn evaluate_matches_breakdown() {
        let tetra = builtin_container("unit_tetrahedron").unwrap();
        let pts = vec![v(0.3, 0.2, 0.1), v(0.5, 0.3, 0.2), v(0.9, 0.9, 0.9)];
        for m in Metric::ALL {
            let model = EnergyModel::new(&tetra, m);
            let a = model.breakdown(&pts, 0.15, &mut rng()).total;
            let b = model.evaluate(&pts, 0.15, &mut rng()).energy;
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn coplanar_seam_is_smooth() {
        let hbox = builtin_container("h_box").unwrap();
        let groups: std::collections::BTreeSet<usize> = hbox.faces().iter().map(|f| f.plane_group).collect();
        // Two caps of three pieces, and paired side pieces on z = 0, z = 3, x = 1, x = 2.
        assert_eq!(groups.len(), 18 - 4 - 4);
        let model = EnergyModel::new(&hbox, Metric::Euclidean);
        // Only the y = 0 cap is within reach; the foot crosses the seam x = 1.
        let left = model.boundary_term(v(0.99, 0.003, 1.5), 0.005, true);
        let right = model.boundary_term(v(1.01, 0.003, 1.5), 0.005, true);
        assert_eq!(left.signature, right.signature);
        assert_abs_diff_eq!(left.value, 4e-6, epsilon = 1e-15);
        assert_abs_diff_eq!(right.value, 4e-6, epsilon = 1e-15);
    }
}
