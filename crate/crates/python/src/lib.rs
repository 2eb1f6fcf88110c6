//! Python bindings.
//!
//! ```python
//! import pdisp
//! cube = pdisp.Container.builtin("cube")
//! sol = pdisp.solve(cube, 8, seed=1)
//! assert pdisp.verify(cube, sol.points, sol.radius).feasible
//! ```

use pdisp_core::bench::SolutionFile;
use pdisp_core::oracle::{Oracle, ORACLE_TOL};
use pdisp_core::params::default_params_for;
use pdisp_core::{builtin_container, EnergyModel, Metric, PolyhedralContainer, Vec3};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

create_exception!(pdisp, PdispError, PyException);

fn err(e: pdisp_core::Error) -> PyErr {
    PdispError::new_err(e.to_string())
}

fn metric(name: &str) -> PyResult<Metric> {
    name.parse().map_err(err)
}

fn points(raw: Vec<[f64; 3]>) -> Vec<Vec3> {
    raw.into_iter().map(Vec3::from).collect()
}

#[pyclass(frozen, module = "pdisp")]
struct Container {
    inner: PolyhedralContainer,
}

#[pymethods]
impl Container {
    /// Built-in container by name: cube, tetrahedron, h_box, star.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        builtin_container(name).map(|inner| Self { inner }).map_err(err)
    }

    /// Container from the JSON vertex/face format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        PolyhedralContainer::from_json_str(text).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name().map(str::to_string)
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    #[getter]
    fn n_faces(&self) -> usize {
        self.inner.faces().len()
    }

    fn contains(&self, point: [f64; 3]) -> bool {
        Oracle::new(&self.inner, Metric::Euclidean).contains(Vec3::from(point))
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json_string().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Container(name={:?}, faces={}, volume={})",
            self.inner.name().unwrap_or("custom"),
            self.inner.faces().len(),
            self.inner.volume()
        )
    }
}

#[pyclass(frozen, get_all, module = "pdisp")]
struct Solution {
    radius: f64,
    points: Vec<[f64; 3]>,
    energy: f64,
    seed: u64,
    radius_history: Vec<f64>,
    runtime_seconds: f64,
    json: String,
}

#[pymethods]
impl Solution {
    fn __repr__(&self) -> String {
        format!("Solution(p={}, radius={:.8})", self.points.len(), self.radius)
    }
}

#[pyclass(frozen, get_all, module = "pdisp")]
struct Verdict {
    feasible: bool,
    pair_margin: f64,
    boundary_margin: f64,
    outside: Vec<usize>,
    violated_pairs: Vec<(usize, usize)>,
    violated_boundary: Vec<usize>,
    certified_radius: Option<f64>,
}

/// Runs the multi-start solver with the default schedule for `p`.
#[pyfunction]
#[pyo3(signature = (container, p, metric="euclidean", seed=0, iterations=None, beta=None))]
fn solve(
    py: Python<'_>,
    container: &Container,
    p: usize,
    metric: &str,
    seed: u64,
    iterations: Option<usize>,
    beta: Option<usize>,
) -> PyResult<Solution> {
    let m = self::metric(metric)?;
    let c = &container.inner;
    let mut params = default_params_for(p, c, m).map_err(err)?;
    params.seed = seed;
    if let Some(n) = iterations {
        params.iterations = n;
    }
    if let Some(b) = beta {
        params.beta = b;
    }
    let sol = py.detach(|| pdisp_core::solver::solve(c, m, p, &params)).map_err(err)?;
    let json = SolutionFile::new(c, m, &sol, &params).to_json().map_err(err)?;
    Ok(Solution {
        radius: sol.radius,
        points: sol.configuration.points().iter().map(|v| v.to_array()).collect(),
        energy: sol.energy.total,
        seed: sol.seed,
        radius_history: sol.radius_history,
        runtime_seconds: sol.runtime_seconds,
        json,
    })
}

/// Brute-force check of a configuration at radius `radius`.
#[pyfunction]
#[pyo3(signature = (container, points, radius, metric="euclidean", tolerance=ORACLE_TOL))]
fn verify(container: &Container, points: Vec<[f64; 3]>, radius: f64, metric: &str, tolerance: f64) -> PyResult<Verdict> {
    let r = Oracle::new(&container.inner, self::metric(metric)?).check(&self::points(points), radius, tolerance);
    Ok(Verdict {
        feasible: r.feasible,
        pair_margin: r.pair_margin,
        boundary_margin: r.boundary_margin,
        outside: r.outside.clone(),
        violated_pairs: r.violated_pairs.iter().map(|v| (v.i, v.j)).collect(),
        violated_boundary: r.violated_boundary.clone(),
        certified_radius: r.certified_radius(),
    })
}

/// Feasibility residual at `radius`; zero exactly when feasible.
#[pyfunction]
#[pyo3(signature = (container, points, radius, metric="euclidean"))]
fn total_energy(container: &Container, points: Vec<[f64; 3]>, radius: f64, metric: &str) -> PyResult<f64> {
    let model = EnergyModel::new(&container.inner, self::metric(metric)?);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    Ok(model.total_energy(&self::points(points), radius, &mut rng))
}

#[pymodule]
fn pdisp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PdispError", m.py().get_type::<PdispError>())?;
    m.add_class::<Container>()?;
    m.add_class::<Solution>()?;
    m.add_class::<Verdict>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(total_energy, m)?)?;
    Ok(())
}
