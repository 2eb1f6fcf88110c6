//! Benchmark harness: reference values, run reports, solution files and
//! exports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::container::{builtin_container, ContainerFile, PolyhedralContainer};
use crate::energy::{Configuration, EnergyBreakdown, EnergyModel};
use crate::error::{Error, Result};
use crate::geometry::{Metric, Point3, Vec3};
use crate::oracle::{FeasibilityReport, Oracle, ORACLE_TOL};
use crate::params::{default_params_for, SolverParams};
use crate::solver::{solve, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceSource {
    Analytical,
    Packomania,
    Kazakov,
    PaperSelf,
    /// Differential evolution baseline. Listed for comparison only; never
    /// joined into a report.
    DeBaseline,
}

impl ReferenceSource {
    pub fn name(self) -> &'static str {
        match self {
            Self::Analytical => "analytical",
            Self::Packomania => "packomania",
            Self::Kazakov => "kazakov",
            Self::PaperSelf => "paper-self",
            Self::DeBaseline => "de-baseline",
        }
    }

    /// Join preference; lower wins.
    fn rank(self) -> Option<u8> {
        match self {
            Self::Analytical => Some(0),
            Self::Packomania => Some(1),
            Self::Kazakov => Some(2),
            Self::PaperSelf => Some(3),
            Self::DeBaseline => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRecord {
    pub container: &'static str,
    pub metric: Metric,
    pub p: usize,
    pub d_best: f64,
    pub source: ReferenceSource,
}

const fn rec(container: &'static str, metric: Metric, p: usize, d_best: f64, source: ReferenceSource) -> ReferenceRecord {
    ReferenceRecord {
        container,
        metric,
        p,
        d_best,
        source,
    }
}

use Metric::{Chebyshev, Euclidean};
use ReferenceSource::{Analytical, DeBaseline, Kazakov, Packomania, PaperSelf};

const CUBE: &str = "unit_cube";
const TETRA: &str = "unit_tetrahedron";
const HBOX: &str = "h_box";
const STAR: &str = "star";

static REFERENCES: &[ReferenceRecord] = &[
    rec(CUBE, Euclidean, 1, 0.5, Analytical),
    rec(CUBE, Euclidean, 1, 0.50000000, Packomania),
    rec(CUBE, Euclidean, 2, 0.31698730, Packomania),
    rec(CUBE, Euclidean, 3, 0.29289322, Packomania),
    rec(CUBE, Euclidean, 4, 0.29289322, Packomania),
    rec(CUBE, Euclidean, 5, 0.26393202, Packomania),
    rec(CUBE, Euclidean, 6, 0.25735931, Packomania),
    rec(CUBE, Euclidean, 7, 0.25013615, Packomania),
    rec(CUBE, Euclidean, 8, 0.25000000, Packomania),
    rec(CUBE, Euclidean, 9, 0.23205081, Packomania),
    rec(CUBE, Euclidean, 10, 0.21428571, Packomania),
    rec(CUBE, Euclidean, 20, 0.17840720, Packomania),
    rec(CUBE, Euclidean, 21, 0.17721904, Packomania),
    rec(CUBE, Euclidean, 27, 0.16666667, Packomania),
    rec(CUBE, Euclidean, 30, 0.16018862, Packomania),
    rec(CUBE, Euclidean, 40, 0.14705882, Packomania),
    rec(CUBE, Euclidean, 50, 0.13595451, Packomania),
    rec(CUBE, Euclidean, 60, 0.13060194, Packomania),
    rec(CUBE, Chebyshev, 10, 1.0 / 6.0, Analytical),
    // 1/(2√6), the inradius.
    rec(TETRA, Euclidean, 1, 0.204_124_145_231_931_5, Analytical),
    rec(TETRA, Euclidean, 1, 0.20045, Kazakov),
    rec(TETRA, Euclidean, 2, 0.14204, Kazakov),
    rec(TETRA, Euclidean, 3, 0.14204, Kazakov),
    rec(TETRA, Euclidean, 4, 0.14204, Kazakov),
    rec(TETRA, Euclidean, 5, 0.12147, Kazakov),
    rec(TETRA, Euclidean, 6, 0.11243, Kazakov),
    rec(TETRA, Euclidean, 7, 0.11062, Kazakov),
    rec(TETRA, Euclidean, 8, 0.10600, Kazakov),
    rec(TETRA, Euclidean, 9, 0.10250, Kazakov),
    rec(TETRA, Euclidean, 10, 0.10200, Kazakov),
    rec(TETRA, Euclidean, 20, 0.09175157, PaperSelf),
    rec(TETRA, Euclidean, 35, 0.07752526, PaperSelf),
    rec(TETRA, Euclidean, 56, 0.06190401, PaperSelf),
    rec(HBOX, Euclidean, 1, 0.50000001, PaperSelf),
    rec(HBOX, Euclidean, 2, 0.50000000, PaperSelf),
    rec(HBOX, Euclidean, 3, 0.50000000, PaperSelf),
    rec(HBOX, Euclidean, 4, 0.50000000, PaperSelf),
    rec(HBOX, Euclidean, 5, 0.50000000, PaperSelf),
    rec(HBOX, Euclidean, 6, 0.50000000, PaperSelf),
    rec(HBOX, Euclidean, 7, 0.50000000, PaperSelf),
    rec(HBOX, Euclidean, 8, 0.41093592, PaperSelf),
    rec(HBOX, Euclidean, 9, 0.39725847, PaperSelf),
    rec(HBOX, Euclidean, 10, 0.39360889, PaperSelf),
    rec(HBOX, Euclidean, 20, 0.30427141, PaperSelf),
    rec(HBOX, Euclidean, 30, 0.28046438, PaperSelf),
    rec(HBOX, Euclidean, 40, 0.26696214, PaperSelf),
    rec(HBOX, Euclidean, 50, 0.24122813, PaperSelf),
    rec(HBOX, Euclidean, 56, 0.24999983, PaperSelf),
    rec(HBOX, Euclidean, 60, 0.19986383, PaperSelf),
    rec(HBOX, Euclidean, 1, 0.49999742, DeBaseline),
    rec(HBOX, Euclidean, 2, 0.49999183, DeBaseline),
    rec(HBOX, Euclidean, 3, 0.49997360, DeBaseline),
    rec(HBOX, Euclidean, 4, 0.49997731, DeBaseline),
    rec(HBOX, Euclidean, 5, 0.49996936, DeBaseline),
    rec(HBOX, Euclidean, 6, 0.49938900, DeBaseline),
    rec(HBOX, Euclidean, 7, 0.47443668, DeBaseline),
    rec(HBOX, Euclidean, 8, 0.27026219, DeBaseline),
    rec(HBOX, Euclidean, 9, 0.36077084, DeBaseline),
    rec(HBOX, Euclidean, 10, 0.22369906, DeBaseline),
    rec(STAR, Euclidean, 1, std::f64::consts::SQRT_2, Analytical),
    rec(STAR, Euclidean, 1, 1.41421356, PaperSelf),
    rec(STAR, Euclidean, 2, 0.97597051, PaperSelf),
    rec(STAR, Euclidean, 3, 0.90296401, PaperSelf),
    rec(STAR, Euclidean, 4, 0.90296402, PaperSelf),
    rec(STAR, Euclidean, 5, 0.90296400, PaperSelf),
    rec(STAR, Euclidean, 6, 0.90296396, PaperSelf),
    rec(STAR, Euclidean, 7, 0.81657905, PaperSelf),
    rec(STAR, Euclidean, 8, 0.76614274, PaperSelf),
    rec(STAR, Euclidean, 9, 0.72337216, PaperSelf),
    rec(STAR, Euclidean, 10, 0.69809740, PaperSelf),
    rec(STAR, Euclidean, 20, 0.57376175, PaperSelf),
    rec(STAR, Euclidean, 30, 0.49246630, PaperSelf),
    rec(STAR, Euclidean, 40, 0.45625711, PaperSelf),
    rec(STAR, Euclidean, 50, 0.39072828, PaperSelf),
    rec(STAR, Euclidean, 60, 0.36665003, PaperSelf),
    rec(STAR, Euclidean, 100, 0.33677304, PaperSelf),
];

/// SHA-256 of the canonical rendering of [`references`].
pub const REFERENCE_SHA256: &str = "9c9ece7a309e2fa7fd31e25731badbc235312693a0765024dd9c6d430174d858";

/// Every embedded reference row.
pub fn references() -> impl Iterator<Item = &'static ReferenceRecord> {
    REFERENCES.iter()
}

/// Checksum of the embedded reference rows, one `container,metric,p,d_best,source`
/// line each with `d_best` in shortest round-trip form.
pub fn reference_checksum() -> String {
    let mut h = Sha256::new();
    for r in references() {
        h.update(format!("{},{},{},{:?},{}\n", r.container, r.metric, r.p, r.d_best, r.source.name()).as_bytes());
    }
    hex::encode(h.finalize())
}

/// The preferred reference for an instance, if any.
pub fn lookup_reference(container: &str, metric: Metric, p: usize) -> Option<&'static ReferenceRecord> {
    references()
        .filter(|r| r.container == container && r.metric == metric && r.p == p)
        .filter_map(|r| r.source.rank().map(|k| (k, r)))
        .min_by_key(|(k, _)| *k)
        .map(|(_, r)| r)
}

/// Truncates to eight decimals, as reported values are. Values within
/// rounding noise of an eight-decimal grid point snap to it.
pub fn truncate8(x: f64) -> f64 {
    let y = x * 1e8;
    let r = y.round();
    if (y - r).abs() < 1e-6 {
        r / 1e8
    } else {
        y.trunc() / 1e8
    }
}

/// A benchmark suite: a built-in container or a container file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Suite {
    Builtin(&'static str),
    Custom(PathBuf),
}

impl Suite {
    /// Built-in names and aliases, otherwise any path ending in `.json`.
    pub fn parse(name: &str) -> Result<Self> {
        if let Ok(c) = builtin_container(name) {
            let canonical = crate::container::BUILTIN_NAMES
                .iter()
                .copied()
                .find(|n| Some(*n) == c.name())
                .expect("built-in containers carry their canonical name");
            return Ok(Suite::Builtin(canonical));
        }
        if name.ends_with(".json") {
            return Ok(Suite::Custom(PathBuf::from(name)));
        }
        Err(Error::UnknownSuite(name.to_string()))
    }

    pub fn load(&self) -> Result<PolyhedralContainer> {
        match self {
            Suite::Builtin(n) => builtin_container(n),
            Suite::Custom(path) => PolyhedralContainer::from_json_file(path),
        }
    }
}

/// Optional replacements for [`default_params_for`] values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamOverrides {
    pub beta: Option<usize>,
    pub q: Option<usize>,
    pub iterations: Option<usize>,
    pub sumt_rounds: Option<usize>,
    pub d_init: Option<f64>,
    /// Recomputes `D_init` from this packing density for every `p`, unless
    /// `d_init` is also given.
    pub rho_init: Option<f64>,
    pub rays: Option<usize>,
}

impl ParamOverrides {
    pub fn params(&self, p: usize, container: &PolyhedralContainer, metric: Metric, seed: u64) -> Result<SolverParams> {
        let mut params = default_params_for(p, container, metric)?;
        params.seed = seed;
        if let Some(v) = self.beta {
            params.beta = v;
        }
        if let Some(v) = self.q {
            params.q = v;
        }
        if let Some(v) = self.iterations {
            params.iterations = v;
        }
        if let Some(v) = self.sumt_rounds {
            params.sumt_rounds = v;
        }
        if let Some(rho) = self.rho_init {
            params.rho_init = rho;
            let euclidean = crate::params::packing_radius(container.volume(), p, rho);
            let own = (container.volume() * rho / (metric.unit_ball_volume() * p as f64)).cbrt();
            params.d_init = euclidean.min(own);
        }
        if let Some(v) = self.d_init {
            params.d_init = v;
        }
        if let Some(v) = self.rays {
            params.rays = v;
        }
        params.validate()?;
        Ok(params)
    }
}

/// Everything needed to re-check or re-render a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub container: String,
    pub geometry: ContainerFile,
    pub metric: Metric,
    pub p: usize,
    pub radius: f64,
    pub points: Configuration,
    pub energy: EnergyBreakdown,
    pub radius_history: Vec<f64>,
    pub seed: u64,
    pub params: SolverParams,
}

impl SolutionFile {
    pub fn new(container: &PolyhedralContainer, metric: Metric, solution: &Solution, params: &SolverParams) -> Self {
        Self {
            container: container.name().unwrap_or("custom").to_string(),
            geometry: container.source().clone(),
            metric,
            p: solution.configuration.len(),
            radius: solution.radius,
            points: solution.configuration.clone(),
            energy: solution.energy.clone(),
            radius_history: solution.radius_history.clone(),
            seed: solution.seed,
            params: params.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(s)?;
        if f.points.len() != f.p {
            return Err(Error::Malformed(format!("p = {} but {} points", f.p, f.points.len())));
        }
        if !(f.radius.is_finite() && f.radius >= 0.0) {
            return Err(Error::Malformed("radius must be finite and non-negative".into()));
        }
        Ok(f)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn build_container(&self) -> Result<PolyhedralContainer> {
        Ok(self.geometry.build()?.with_name(self.container.clone()))
    }

    /// File stem used by the CLI: `<container>_<metric>_p<p>_s<seed>`.
    pub fn stem(&self) -> String {
        format!("{}_{}_p{}_s{}", self.container, self.metric, self.p, self.seed)
    }
}

/// Re-checks a solution file with the brute-force oracle at [`ORACLE_TOL`].
pub fn verify(file: &SolutionFile) -> Result<FeasibilityReport> {
    let container = file.build_container()?;
    Ok(Oracle::new(&container, file.metric).check(file.points.points(), file.radius, ORACLE_TOL))
}

/// Human-readable verdict with per-constraint margins.
pub fn format_verdict(report: &FeasibilityReport) -> String {
    let mut s = String::new();
    let verdict = if report.feasible { "FEASIBLE" } else { "INFEASIBLE" };
    let _ = writeln!(s, "{verdict} at D = {:.10} (tolerance {:e})", report.radius, report.tolerance);
    let _ = writeln!(
        s,
        "containment: {} of {} points outside",
        report.outside.len(),
        report.boundary_distances.len()
    );
    if report.pair_margin.is_finite() {
        let _ = writeln!(s, "pair margin (min d_ij - 2D): {:+.3e}", report.pair_margin);
    } else {
        let _ = writeln!(s, "pair margin (min d_ij - 2D): none (single point)");
    }
    let _ = writeln!(s, "boundary margin (min d(c_i, dC) - D): {:+.3e}", report.boundary_margin);
    for i in &report.outside {
        let _ = writeln!(s, "  point {i} outside the container");
    }
    for v in &report.violated_pairs {
        let _ = writeln!(
            s,
            "  pair ({}, {}) distance {:.10} < {:.10}",
            v.i,
            v.j,
            v.distance,
            2.0 * report.radius
        );
    }
    for &i in &report.violated_boundary {
        let _ = writeln!(
            s,
            "  point {i} boundary distance {:.10} < {:.10}",
            report.boundary_distances[i], report.radius
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub container: String,
    pub metric: Metric,
    pub p: usize,
    pub solution: Solution,
    /// Achieved radius truncated to eight decimals.
    pub d_ours: f64,
    pub d_best: Option<f64>,
    pub source: Option<ReferenceSource>,
    pub a_err: Option<f64>,
    pub r_err_percent: Option<f64>,
    pub params: SolverParams,
}

impl RunReport {
    pub fn new(container: &str, metric: Metric, solution: Solution, params: SolverParams) -> Self {
        let p = solution.configuration.len();
        let d_ours = truncate8(solution.radius);
        let reference = lookup_reference(container, metric, p);
        let d_best = reference.map(|r| r.d_best);
        let a_err = d_best.map(|b| d_ours - b);
        Self {
            container: container.to_string(),
            metric,
            p,
            d_ours,
            d_best,
            source: reference.map(|r| r.source),
            a_err,
            r_err_percent: a_err.zip(d_best).map(|(a, b)| a / b * 100.0),
            solution,
            params,
        }
    }
}

/// A run that produced no reportable solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub p: usize,
    pub error: String,
}

/// One solve per `p`, joined with the preferred reference value. A solution
/// that fails the oracle is reported as a failure, never as a result.
pub fn run_benchmark(
    suite: &Suite,
    p_list: &[usize],
    metric: Metric,
    overrides: &ParamOverrides,
    seed: u64,
) -> Result<Vec<std::result::Result<RunReport, RunFailure>>> {
    let container = suite.load()?;
    let name = container.name().unwrap_or("custom").to_string();
    let mut out = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let params = overrides.params(p, &container, metric, seed)?;
        let run = solve(&container, metric, p, &params).and_then(|s| {
            let report = Oracle::new(&container, metric).check(s.configuration.points(), s.radius, ORACLE_TOL);
            if report.feasible {
                Ok(s)
            } else {
                Err(Error::InfeasibleResult {
                    radius: s.radius,
                    energy: s.energy.total,
                })
            }
        });
        out.push(match run {
            Ok(s) => Ok(RunReport::new(&name, metric, s, params)),
            Err(e) => Err(RunFailure { p, error: e.to_string() }),
        });
    }
    Ok(out)
}

fn fmt_opt(x: Option<f64>, prec: usize) -> String {
    x.map_or_else(|| "--".to_string(), |v| format!("{v:.prec$}"))
}

/// Plain-text comparison table.
pub fn render_table(reports: &[std::result::Result<RunReport, RunFailure>]) -> String {
    let mut s = format!(
        "{:>5}  {:>12}  {:>12}  {:>12}  {:>10}  {:>9}\n",
        "p", "D_ours", "D_best", "A_err", "R_err(%)", "time(s)"
    );
    for r in reports {
        match r {
            Ok(r) => {
                let _ = writeln!(
                    s,
                    "{:>5}  {:>12.8}  {:>12}  {:>12}  {:>10}  {:>9.2}",
                    r.p,
                    r.d_ours,
                    fmt_opt(r.d_best, 8),
                    fmt_opt(r.a_err, 8),
                    fmt_opt(r.r_err_percent, 4),
                    r.solution.runtime_seconds
                );
            }
            Err(f) => {
                let _ = writeln!(s, "{:>5}  failed: {}", f.p, f.error);
            }
        }
    }
    s
}

/// Runtime log, one row per successful run.
pub fn runtime_csv(reports: &[std::result::Result<RunReport, RunFailure>]) -> String {
    let mut s = String::from("container,metric,p,seed,d_ours,d_best,a_err,r_err_percent,runtime_seconds\n");
    for r in reports.iter().flatten() {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.8}"));
        let _ = writeln!(
            s,
            "{},{},{},{},{:.8},{},{},{},{:.6}",
            r.container,
            r.metric,
            r.p,
            r.solution.seed,
            r.d_ours,
            opt(r.d_best),
            opt(r.a_err),
            opt(r.r_err_percent),
            r.solution.runtime_seconds
        );
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
    ObjSpheres,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "obj-spheres" | "obj" => Ok(Self::ObjSpheres),
            other => Err(Error::InvalidParameter(format!("unknown export format `{other}`"))),
        }
    }
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Csv => "csv",
            Self::ObjSpheres => "obj",
        }
    }
}

pub fn export(file: &SolutionFile, format: ExportFormat) -> Result<String> {
    match format {
        ExportFormat::Json => file.to_json(),
        ExportFormat::Csv => Ok(export_csv(file)),
        ExportFormat::ObjSpheres => Ok(export_obj(file)),
    }
}

fn export_csv(file: &SolutionFile) -> String {
    let mut s = String::from("index,x,y,z\n");
    for (i, c) in file.points.points().iter().enumerate() {
        let _ = writeln!(s, "{i},{:?},{:?},{:?}", c.x, c.y, c.z);
    }
    s
}

/// Icosphere with one subdivision: 42 vertices, 80 triangles.
fn icosphere() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|a| Vec3::from(*a).normalized().expect("nonzero"))
    .collect();
    let base: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut mid = std::collections::HashMap::new();
    let mut midpoint = |a: usize, b: usize, v: &mut Vec<Vec3>| {
        *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
            v.push(((v[a] + v[b]) * 0.5).normalized().expect("nonzero"));
            v.len() - 1
        })
    };
    let mut faces = Vec::with_capacity(80);
    for [a, b, c] in base {
        let ab = midpoint(a, b, &mut v);
        let bc = midpoint(b, c, &mut v);
        let ca = midpoint(c, a, &mut v);
        faces.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    (v, faces)
}

/// One ball mesh of radius `D` per point (the unit sphere rescaled to the
/// metric's unit ball) and the container faces, as separate OBJ objects.
fn export_obj(file: &SolutionFile) -> String {
    let (sphere, tris) = icosphere();
    let mut s = format!(
        "# {} {} p={} D={:.10}\n",
        file.container, file.metric, file.p, file.radius
    );
    let mut base = 1;
    for (i, c) in file.points.points().iter().enumerate() {
        let _ = writeln!(s, "o sphere_{i}");
        for u in &sphere {
            let w = *c + *u * (file.radius / file.metric.norm(*u));
            let _ = writeln!(s, "v {:.9} {:.9} {:.9}", w.x, w.y, w.z);
        }
        for [a, b, t] in &tris {
            let _ = writeln!(s, "f {} {} {}", a + base, b + base, t + base);
        }
        base += sphere.len();
    }
    let mut shell = |name: &str, vertices: &[Point3], faces: &[Vec<usize>], s: &mut String| {
        let _ = writeln!(s, "o {name}");
        for v in vertices {
            let _ = writeln!(s, "v {:.9} {:.9} {:.9}", v.x, v.y, v.z);
        }
        for f in faces {
            let idx: Vec<String> = f.iter().map(|k| (k + base).to_string()).collect();
            let _ = writeln!(s, "f {}", idx.join(" "));
        }
        base += vertices.len();
    };
    shell("container", &file.geometry.vertices, &file.geometry.faces, &mut s);
    for (h, hole) in file.geometry.holes.iter().enumerate() {
        shell(&format!("hole_{h}"), &hole.vertices, &hole.faces, &mut s);
    }
    s
}

/// Total energy of a solution file at its own radius.
pub fn file_energy(file: &SolutionFile) -> Result<EnergyBreakdown> {
    let container = file.build_container()?;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(file.seed);
    Ok(EnergyModel::new(&container, file.metric).breakdown(file.points.points(), file.radius, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_data_is_frozen() {
        assert_eq!(reference_checksum(), REFERENCE_SHA256);
        assert!(references().all(|r| r.d_best > 0.0));
    }

    #[test]
    fn lookup_prefers_analytical() {
        let r = lookup_reference("unit_cube", Metric::Euclidean, 1).unwrap();
        assert_eq!(r.source, ReferenceSource::Analytical);
        let r = lookup_reference("h_box", Metric::Euclidean, 8).unwrap();
        assert_eq!(r.source, ReferenceSource::PaperSelf);
        assert!(lookup_reference("unit_cube", Metric::Euclidean, 11).is_none());
        assert_eq!(lookup_reference("unit_cube", Metric::Chebyshev, 10).unwrap().d_best, 1.0 / 6.0);
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate8(0.316987298), 0.31698729);
        assert_eq!(truncate8(0.5), 0.5);
        assert_eq!(truncate8(0.29289322), 0.29289322);
    }

    #[test]
    fn suites() {
        assert_eq!(Suite::parse("cube").unwrap(), Suite::Builtin("unit_cube"));
        assert_eq!(Suite::parse("tetrahedron").unwrap(), Suite::Builtin("unit_tetrahedron"));
        assert!(matches!(Suite::parse("x.json").unwrap(), Suite::Custom(_)));
        assert!(matches!(Suite::parse("dodecahedron"), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn icosphere_counts() {
        let (v, f) = icosphere();
        assert_eq!((v.len(), f.len()), (42, 80));
        assert!(v.iter().all(|u| (u.norm() - 1.0).abs() < 1e-12));
    }
}
