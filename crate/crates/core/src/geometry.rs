//! Metric-aware primitive geometry.
//!
//! Points and directions share the [`Vec3`] type. Distances between points
//! are measured under a pluggable [`Metric`]; footpoints on planes are always
//! Euclidean orthogonal projections, and only the resulting distance is
//! measured under the metric.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bracket width (in the segment parameter) at which golden-section search stops.
pub const GOLDEN_SECTION_TOL: f64 = 1e-10;

/// A 3D vector, used for both positions and directions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Positions in container length units.
pub type Point3 = Vec3;

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Unit vector along axis `k` (0 = x, 1 = y, 2 = z).
    pub fn axis(k: usize) -> Self {
        let mut v = [0.0; 3];
        v[k] = 1.0;
        v.into()
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    /// Returns `None` for (near) zero-length input.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > f64::MIN_POSITIVE && n.is_finite()).then(|| self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        match k {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {k} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// The distance used for dispersion and boundary clearance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    /// Sup-norm, ℓ∞.
    Chebyshev,
    /// ℓ1.
    Manhattan,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Euclidean, Metric::Chebyshev, Metric::Manhattan];

    /// Norm of a displacement under this metric.
    pub fn norm(self, v: Vec3) -> f64 {
        match self {
            Metric::Euclidean => v.norm(),
            Metric::Chebyshev => v.x.abs().max(v.y.abs()).max(v.z.abs()),
            Metric::Manhattan => v.x.abs() + v.y.abs() + v.z.abs(),
        }
    }

    pub fn distance(self, a: Point3, b: Point3) -> f64 {
        self.norm(a - b)
    }

    /// A (sub)gradient of `v ↦ norm(v)`.
    ///
    /// Ties and zero components resolve deterministically: the lowest-index
    /// maximal component for Chebyshev, a zero entry for Manhattan, and the
    /// zero vector at the origin for every metric.
    pub fn norm_gradient(self, v: Vec3) -> Vec3 {
        match self {
            Metric::Euclidean => {
                let n = v.norm();
                if n > 0.0 {
                    v / n
                } else {
                    Vec3::ZERO
                }
            }
            Metric::Chebyshev => {
                let a = [v.x.abs(), v.y.abs(), v.z.abs()];
                let mut k = 0;
                for i in 1..3 {
                    if a[i] > a[k] {
                        k = i;
                    }
                }
                if a[k] == 0.0 {
                    Vec3::ZERO
                } else {
                    Vec3::axis(k) * signum0(v[k])
                }
            }
            Metric::Manhattan => Vec3::new(signum0(v.x), signum0(v.y), signum0(v.z)),
        }
    }

    /// Gradient of `a ↦ d(a, b)`.
    pub fn gradient(self, a: Point3, b: Point3) -> Vec3 {
        self.norm_gradient(a - b)
    }

    /// Constant `k` such that `norm(v) >= k * |v|₂` for every `v`.
    pub fn euclidean_lower_factor(self) -> f64 {
        match self {
            Metric::Euclidean | Metric::Manhattan => 1.0,
            Metric::Chebyshev => 1.0 / 3f64.sqrt(),
        }
    }

    /// Volume of the closed unit ball.
    pub fn unit_ball_volume(self) -> f64 {
        match self {
            Metric::Euclidean => 4.0 / 3.0 * std::f64::consts::PI,
            Metric::Chebyshev => 8.0,
            Metric::Manhattan => 4.0 / 3.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Chebyshev => "chebyshev",
            Metric::Manhattan => "manhattan",
        }
    }
}

fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "chebyshev" | "sup" | "linf" => Ok(Metric::Chebyshev),
            "manhattan" | "l1" => Ok(Metric::Manhattan),
            other => Err(Error::UnknownMetric(other.to_string())),
        }
    }
}

/// A closed line segment between two distinct points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment3 {
    pub a: Point3,
    pub b: Point3,
}

impl Segment3 {
    pub fn new(a: Point3, b: Point3) -> Self {
        Self { a, b }
    }

    pub fn at(&self, t: f64) -> Point3 {
        self.a + (self.b - self.a) * t
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

/// Metric distance between two points.
pub fn distance(metric: Metric, a: Point3, b: Point3) -> f64 {
    metric.distance(a, b)
}

/// Distance from `p` to the segment `s` and the nearest point on it.
///
/// Euclidean uses the clamped orthogonal projection. Other metrics use a
/// golden-section search over the segment parameter, which is valid because
/// any norm is convex along a line. For the piecewise-linear ℓ∞ and ℓ1 norms
/// the bracketed minimizer is then snapped to the exact breakpoint.
pub fn distance_point_segment(metric: Metric, p: Point3, s: &Segment3) -> (f64, Point3) {
    match metric {
        Metric::Euclidean => {
            let t = euclidean_segment_parameter(p, s);
            let q = s.at(t);
            ((p - q).norm(), q)
        }
        _ => {
            let (lo, hi) = golden_section_bracket(metric, p, s);
            let mut best_t = 0.5 * (lo + hi);
            let mut best = metric.distance(p, s.at(best_t));
            for t in breakpoints(metric, p, s) {
                if t >= lo - GOLDEN_SECTION_TOL && t <= hi + GOLDEN_SECTION_TOL {
                    let t = t.clamp(0.0, 1.0);
                    let d = metric.distance(p, s.at(t));
                    if d < best {
                        best = d;
                        best_t = t;
                    }
                }
            }
            (best, s.at(best_t))
        }
    }
}

/// Gradient of `p ↦ min_t d(p, s.at(t))` at `p`, given the nearest point `q`.
///
/// Under ℓ∞ and ℓ1 the nearest point on the segment interior usually sits on
/// a kink of the norm. The gradient there is the subgradient at `p − q` that
/// is orthogonal to the segment.
pub fn segment_distance_gradient(metric: Metric, p: Point3, s: &Segment3, q: Point3) -> Vec3 {
    let v = p - q;
    let fallback = metric.norm_gradient(v);
    let u = s.b - s.a;
    let len2 = u.norm_squared();
    if metric == Metric::Euclidean || len2 == 0.0 {
        return fallback;
    }
    let t = (q - s.a).dot(u) / len2;
    let m = metric.norm(v);
    if m == 0.0 || t <= 1e-12 || t >= 1.0 - 1e-12 {
        return fallback;
    }
    let tol = 1e-9 * m;
    match metric {
        Metric::Chebyshev => {
            let cand: Vec<Vec3> = (0..3)
                .filter(|&k| v[k].abs() >= m - tol)
                .map(|k| Vec3::axis(k) * signum0(v[k]))
                .collect();
            if let Some(&g) = cand.iter().find(|g| g.dot(u).abs() <= 1e-12 * len2.sqrt()) {
                return g;
            }
            for i in 0..cand.len() {
                for j in (i + 1)..cand.len() {
                    let (a, b) = (cand[i].dot(u), cand[j].dot(u));
                    if a * b < 0.0 {
                        let lambda = b / (b - a);
                        return cand[i] * lambda + cand[j] * (1.0 - lambda);
                    }
                }
            }
            fallback
        }
        Metric::Manhattan => {
            let mut g = Vec3::ZERO;
            let mut free = Vec::new();
            let mut r = 0.0;
            for k in 0..3 {
                if v[k].abs() <= tol {
                    free.push(k);
                } else {
                    let sk = signum0(v[k]);
                    r += sk * u[k];
                    match k {
                        0 => g.x = sk,
                        1 => g.y = sk,
                        _ => g.z = sk,
                    }
                }
            }
            for k in free {
                if u[k] == 0.0 {
                    continue;
                }
                let gk = (-r / u[k]).clamp(-1.0, 1.0);
                r += gk * u[k];
                match k {
                    0 => g.x = gk,
                    1 => g.y = gk,
                    _ => g.z = gk,
                }
            }
            g
        }
        Metric::Euclidean => fallback,
    }
}

/// Golden-section search for the segment distance under any metric, without
/// breakpoint refinement. Exposed for cross-checking the closed forms.
pub fn golden_section_segment_distance(metric: Metric, p: Point3, s: &Segment3) -> (f64, Point3) {
    let (lo, hi) = golden_section_bracket(metric, p, s);
    let q = s.at(0.5 * (lo + hi));
    (metric.distance(p, q), q)
}

fn euclidean_segment_parameter(p: Point3, s: &Segment3) -> f64 {
    let u = s.b - s.a;
    let len2 = u.norm_squared();
    if len2 == 0.0 {
        return 0.0;
    }
    ((p - s.a).dot(u) / len2).clamp(0.0, 1.0)
}

fn golden_section_bracket(metric: Metric, p: Point3, s: &Segment3) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let f = |t: f64| metric.distance(p, s.at(t));
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > GOLDEN_SECTION_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    // Endpoints are never probed by the interior points.
    let (f0, fe) = (f(0.0), f(1.0));
    let fm = f(0.5 * (lo + hi));
    if f0 <= fm && f0 <= fe {
        (0.0, 0.0)
    } else if fe < fm {
        (1.0, 1.0)
    } else {
        (lo, hi)
    }
}

/// Parameters where `t ↦ norm(p - s.at(t))` can change slope.
fn breakpoints(metric: Metric, p: Point3, s: &Segment3) -> Vec<f64> {
    let w = p - s.a;
    let u = s.b - s.a;
    let mut ts = vec![0.0, 1.0];
    // Component zero crossings: w_k - t u_k = 0.
    for k in 0..3 {
        if u[k] != 0.0 {
            ts.push(w[k] / u[k]);
        }
    }
    if metric == Metric::Chebyshev {
        // |w_k - t u_k| = |w_l - t u_l|.
        for k in 0..3 {
            for l in (k + 1)..3 {
                for sign in [1.0, -1.0] {
                    let den = u[k] - sign * u[l];
                    if den != 0.0 {
                        ts.push((w[k] - sign * w[l]) / den);
                    }
                }
            }
        }
    }
    ts.retain(|t| t.is_finite() && (0.0..=1.0).contains(t));
    ts
}

/// Orthogonal projection of `p` onto the plane through `plane_point` with
/// normal `unit_normal`.
pub fn project_onto_plane(p: Point3, plane_point: Point3, unit_normal: Vec3) -> Result<Point3> {
    let n = unit_normal.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroNormal);
    }
    let n = unit_normal / n;
    Ok(p - n * (p - plane_point).dot(n))
}

/// A Euclidean unit vector drawn uniformly from the sphere.
pub fn random_unit_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(u) = v.normalized() {
            if v.norm() > 1e-12 {
                return u;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn x_axis() -> Segment3 {
        Segment3::new(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0))
    }

    #[test]
    fn metric_examples() {
        let o = Vec3::ZERO;
        let one = Vec3::new(1.0, 1.0, 1.0);
        assert_abs_diff_eq!(distance(Metric::Euclidean, o, one), 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(distance(Metric::Chebyshev, o, Vec3::new(1.0, 0.5, 0.2)), 1.0);
        assert_eq!(distance(Metric::Manhattan, o, one), 3.0);
    }

    #[test]
    fn segment_gradient_on_kinks() {
        // min_t ‖p − (t, 1 + t, 0)‖∞ = |p_x − p_y + 1| / 2 near the origin.
        let s = Segment3::new(Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 2.0, 0.0));
        let p = Vec3::new(0.1, -0.05, 0.02);
        for m in [Metric::Chebyshev, Metric::Manhattan] {
            let (d, q) = distance_point_segment(m, p, &s);
            let g = segment_distance_gradient(m, p, &s, q);
            let h = 1e-6;
            for k in 0..3 {
                let e = Vec3::axis(k) * h;
                let fd = (distance_point_segment(m, p + e, &s).0 - distance_point_segment(m, p - e, &s).0) / (2.0 * h);
                assert_abs_diff_eq!(fd, g[k], epsilon = 1e-6);
            }
            assert!(d > 0.0);
        }
    }

    #[test]
    fn segment_perpendicular_and_clamped() {
        let (d, q) = distance_point_segment(Metric::Euclidean, Vec3::new(0.5, 1.0, 0.0), &x_axis());
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-15);
        assert_eq!(q, Vec3::new(0.5, 0.0, 0.0));

        let (d, q) = distance_point_segment(Metric::Euclidean, Vec3::new(2.0, 0.0, 0.0), &x_axis());
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-15);
        assert_eq!(q, Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn chebyshev_segment_matches_dense_scan() {
        let p = Vec3::new(0.5, 0.3, 0.3);
        let s = x_axis();
        let n = 1_000_000;
        let scan = (0..=n)
            .map(|i| Metric::Chebyshev.distance(p, s.at(i as f64 / n as f64)))
            .fold(f64::INFINITY, f64::min);
        let (d, q) = distance_point_segment(Metric::Chebyshev, p, &s);
        assert_abs_diff_eq!(scan, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(d, scan, epsilon = 1e-10);
        assert_abs_diff_eq!(Metric::Chebyshev.distance(p, q), 0.3, epsilon = 1e-10);
    }

    #[test]
    fn projection_examples() {
        let n = Vec3::new(0.0, 0.0, 1.0);
        let h = project_onto_plane(Vec3::new(0.5, 0.5, 0.5), Vec3::ZERO, n).unwrap();
        assert_eq!(h, Vec3::new(0.5, 0.5, 0.0));
        assert_eq!(project_onto_plane(h, Vec3::ZERO, n).unwrap(), h);
        let h = project_onto_plane(Vec3::new(1.5, 0.5, 2.5), Vec3::new(1.0, 0.0, 2.0), n).unwrap();
        assert_eq!(h, Vec3::new(1.5, 0.5, 2.0));
        assert!(matches!(
            project_onto_plane(h, Vec3::ZERO, Vec3::ZERO),
            Err(Error::ZeroNormal)
        ));
    }

    #[test]
    fn random_directions_are_unit_and_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(random_unit_direction(&mut a), random_unit_direction(&mut b));

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut mean = Vec3::ZERO;
        for _ in 0..n {
            let v = random_unit_direction(&mut rng);
            assert!((v.norm() - 1.0).abs() <= 1e-12);
            mean += v;
        }
        assert!((mean / n as f64).norm() < 0.02);
    }

    #[test]
    fn metric_parse_roundtrip() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("hamming".parse::<Metric>().is_err());
    }

    fn point() -> impl Strategy<Value = Vec3> {
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    fn metric() -> impl Strategy<Value = Metric> {
        prop_oneof![
            Just(Metric::Euclidean),
            Just(Metric::Chebyshev),
            Just(Metric::Manhattan)
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn metric_axioms(m in metric(), a in point(), b in point(), c in point()) {
            let ab = m.distance(a, b);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, m.distance(b, a));
            prop_assert_eq!(m.distance(a, a), 0.0);
            if a != b {
                prop_assert!(ab > 0.0);
            }
            prop_assert!(m.distance(a, c) <= ab + m.distance(b, c) + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2_000))]

        #[test]
        fn segment_distance_bounded_by_endpoints(m in metric(), p in point(), a in point(), b in point()) {
            prop_assume!((a - b).norm() > 1e-6);
            let s = Segment3::new(a, b);
            let (d, q) = distance_point_segment(m, p, &s);
            prop_assert!(d <= m.distance(p, a).min(m.distance(p, b)) + 1e-12);
            prop_assert!((m.distance(p, q) - d).abs() < 1e-12);
        }

        #[test]
        fn golden_section_agrees_with_closed_form(p in point(), a in point(), b in point()) {
            prop_assume!((a - b).norm() > 1e-6);
            let s = Segment3::new(a, b);
            let (closed, _) = distance_point_segment(Metric::Euclidean, p, &s);
            let (golden, _) = golden_section_segment_distance(Metric::Euclidean, p, &s);
            prop_assert!((closed - golden).abs() <= 1e-9);
        }

        #[test]
        fn projection_idempotent_and_minimizing(
            p in point(),
            q in point(),
            n in point(),
            seed in any::<u64>(),
        ) {
            prop_assume!(n.norm() > 1e-3);
            let n = n.normalized().unwrap();
            let h = project_onto_plane(p, q, n).unwrap();
            prop_assert!((h - q).dot(n).abs() < 1e-12);
            let h2 = project_onto_plane(h, q, n).unwrap();
            prop_assert!((h2 - h).norm() < 1e-12);
            // Scan a patch of the plane around the foot.
            let u = if n.x.abs() < 0.9 { Vec3::axis(0) } else { Vec3::axis(1) };
            let e1 = n.cross(u).normalized().unwrap();
            let e2 = n.cross(e1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dh = (p - h).norm();
            for _ in 0..100 {
                let a: f64 = rng.random_range(-1.0..1.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                let x = h + e1 * a + e2 * b;
                prop_assert!((p - x).norm() >= dh - 1e-12);
            }
        }
    }
}
