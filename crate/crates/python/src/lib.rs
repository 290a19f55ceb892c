//! Python bindings: domains, meshes, convergence studies, and solutions,
//! driven in-process through the core solver crate.
//!
//! Build the extension (`cargo build -p nitsche-fem-py --release`), rename
//! `libnitsche_fem_py.so` to `nitsche_fem_py.so` somewhere on `sys.path`,
//! and `import nitsche_fem_py`; `python/smoke_test.py` automates that.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nitsche_fem::analysis::{self, cases, ConvergenceTable, DiscreteSolution};
use nitsche_fem::geometry::{Point2, PolygonDomain};
use nitsche_fem::mesh::{ElementKind, Mesh as CoreMesh};
use nitsche_fem::{assembly, boundary, solver, FemError};

fn fem_err(e: FemError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_element(element: &str) -> PyResult<ElementKind> {
    ElementKind::parse(element).map_err(fem_err)
}

/// A convex polygonal domain with marked boundary points.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Domain {
    inner: PolygonDomain,
}

#[pymethods]
impl Domain {
    /// Build from counter-clockwise corner vertices and the full ordered
    /// marker list (every vertex plus any mid-edge jump locations).
    #[new]
    fn new(vertices: Vec<(f64, f64)>, discontinuity_points: Vec<(f64, f64)>) -> PyResult<Self> {
        let to_points = |v: Vec<(f64, f64)>| {
            v.into_iter().map(|(x, y)| Point2::new(x, y)).collect::<Vec<_>>()
        };
        PolygonDomain::new(to_points(vertices), to_points(discontinuity_points))
            .map(|inner| Self { inner })
            .map_err(fem_err)
    }

    /// Axis-aligned rectangle with optional extra boundary markers.
    #[staticmethod]
    #[pyo3(signature = (x0, x1, y0, y1, markers=Vec::new()))]
    fn rectangle(
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        markers: Vec<(f64, f64)>,
    ) -> PyResult<Self> {
        let extra: Vec<Point2> = markers.into_iter().map(|(x, y)| Point2::new(x, y)).collect();
        PolygonDomain::rectangle(x0, x1, y0, y1, &extra)
            .map(|inner| Self { inner })
            .map_err(fem_err)
    }

    fn area(&self) -> f64 {
        self.inner.area()
    }

    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    fn num_segments(&self) -> usize {
        self.inner.num_segments()
    }

    fn discontinuity_points(&self) -> Vec<(f64, f64)> {
        self.inner.discontinuity_points().iter().map(|p| (p.x, p.y)).collect()
    }

    /// Interior angle at marker `i` (exactly pi for mid-edge markers).
    fn interior_angle(&self, i: usize) -> PyResult<f64> {
        self.inner.interior_angle(i).map_err(fem_err)
    }

    /// Boundary segment index and affine parameter of a boundary point.
    #[pyo3(signature = (x, y, tol=None))]
    fn locate_on_boundary(&self, x: f64, y: f64, tol: Option<f64>) -> PyResult<(usize, f64)> {
        self.inner.locate_on_boundary(Point2::new(x, y), tol).map_err(fem_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Domain({} vertices, {} boundary segments)",
            self.inner.vertices().len(),
            self.inner.num_segments()
        )
    }
}

/// A conforming structured mesh.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Mesh {
    inner: CoreMesh,
}

#[pymethods]
impl Mesh {
    /// Structured mesh of a rectangular domain with `subdivisions` cells per
    /// unit length; `element` is "p1" or "q1".
    #[staticmethod]
    #[pyo3(signature = (domain, element="p1", subdivisions=1))]
    fn generate(domain: &Domain, element: &str, subdivisions: u32) -> PyResult<Self> {
        let kind = parse_element(element)?;
        CoreMesh::generate_initial(&domain.inner, kind, subdivisions)
            .map(|inner| Self { inner })
            .map_err(fem_err)
    }

    /// Uniform refinement: every element splits into four children.
    fn refine(&self) -> Self {
        Self { inner: self.inner.refine_uniform() }
    }

    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    fn num_elements(&self) -> usize {
        self.inner.num_elements()
    }

    fn h(&self) -> f64 {
        self.inner.mesh_size()
    }

    fn nodes(&self) -> Vec<(f64, f64)> {
        self.inner.nodes().iter().map(|p| (p.x, p.y)).collect()
    }

    fn elements(&self) -> Vec<Vec<usize>> {
        (0..self.inner.num_elements())
            .map(|e| self.inner.element(e).to_vec())
            .collect()
    }

    /// Plain-text dump (nodes, elements, boundary sections).
    fn dump(&self) -> String {
        self.inner.dump()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh({:?}, {} elements, {} nodes, h={:.6})",
            self.inner.kind(),
            self.inner.num_elements(),
            self.inner.num_nodes(),
            self.inner.mesh_size()
        )
    }
}

/// Completed convergence study.
#[pyclass]
struct StudyTable {
    inner: ConvergenceTable,
}

#[pymethods]
impl StudyTable {
    /// Rows as dictionaries with keys level, h, elements, dofs, l2_error, eoc.
    fn rows<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let mut rows = Vec::with_capacity(self.inner.records.len());
        for r in &self.inner.records {
            let d = PyDict::new(py);
            d.set_item("level", r.level)?;
            d.set_item("h", r.h)?;
            d.set_item("elements", r.elements)?;
            d.set_item("dofs", r.dofs)?;
            d.set_item("l2_error", r.l2_error)?;
            d.set_item("eoc", r.eoc)?;
            rows.push(d);
        }
        Ok(rows)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn final_eoc(&self) -> Option<f64> {
        self.inner.final_eoc()
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "StudyTable(case={:?}, levels={}, final_eoc={:?})",
            self.inner.case,
            self.inner.records.len(),
            self.inner.final_eoc()
        )
    }
}

/// A solved problem: evaluable solution plus its error against the case's
/// exact solution.
#[pyclass]
struct Solution {
    inner: DiscreteSolution,
    case: cases::ManufacturedCase,
    iterations: usize,
    residual: f64,
}

#[pymethods]
impl Solution {
    /// Full solution (finite element part plus singular functions) at (x, y).
    fn eval(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.eval_full(Point2::new(x, y)).map_err(fem_err)
    }

    /// Finite element part alone at (x, y).
    fn eval_fe(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.eval_fe(Point2::new(x, y)).map_err(fem_err)
    }

    /// L2 error against the registered exact solution.
    fn l2_error(&self) -> f64 {
        let exact = self.case.exact.clone();
        self.inner.l2_error(&move |p| exact(p))
    }

    fn h(&self) -> f64 {
        self.inner.mesh().mesh_size()
    }

    fn dofs(&self) -> usize {
        self.inner.coefficients().len()
    }

    fn num_elements(&self) -> usize {
        self.inner.mesh().num_elements()
    }

    fn num_singular_parts(&self) -> usize {
        self.inner.singular_parts().len()
    }

    fn solver_iterations(&self) -> usize {
        self.iterations
    }

    fn solver_residual(&self) -> f64 {
        self.residual
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(case={:?}, dofs={}, h={:.6})",
            self.case.name,
            self.dofs(),
            self.h()
        )
    }
}

/// Radial-log profile `r (ln r sin theta + theta cos theta)`; zero at r = 0.
#[pyfunction]
fn sigma(r: f64, theta: f64) -> f64 {
    boundary::sigma(r, theta)
}

/// Names of the registered manufactured cases.
#[pyfunction]
fn list_cases() -> Vec<&'static str> {
    cases::case_names()
}

/// Run a convergence study for a registered case.
#[pyfunction]
#[pyo3(signature = (case, element="p1", levels=4, gamma=10.0, tol=1e-10))]
fn convergence_study(
    case: &str,
    element: &str,
    levels: usize,
    gamma: f64,
    tol: f64,
) -> PyResult<StudyTable> {
    let case = cases::case_by_name(case).map_err(fem_err)?;
    let kind = parse_element(element)?;
    let outcome = analysis::run_convergence_study(&case, kind, levels, gamma, tol);
    let (table, _) = outcome.into_result().map_err(fem_err)?;
    Ok(StudyTable { inner: table })
}

/// Solve a registered case once, after `refinements` uniform refinements of
/// its coarse mesh.
#[pyfunction]
#[pyo3(signature = (case, element="p1", refinements=3, gamma=10.0, tol=1e-10))]
fn solve_case(
    case: &str,
    element: &str,
    refinements: usize,
    gamma: f64,
    tol: f64,
) -> PyResult<Solution> {
    let case = cases::case_by_name(case).map_err(fem_err)?;
    let kind = parse_element(element)?;
    let problem = case.regularize().map_err(fem_err)?;
    let mut mesh = CoreMesh::generate_initial(&case.domain, kind, case.initial_subdivisions)
        .map_err(fem_err)?;
    for _ in 0..refinements {
        mesh = mesh.refine_uniform();
    }
    let system = assembly::assemble(&mesh, &problem, gamma).map_err(fem_err)?;
    let max_iter = 10 * system.matrix.nrows().max(10);
    let report = solver::solve_spd(&system, tol, max_iter).map_err(fem_err)?;
    let inner =
        DiscreteSolution::new(mesh, report.solution, problem.singular_parts().to_vec());
    Ok(Solution {
        inner,
        case,
        iterations: report.iterations,
        residual: report.relative_residual,
    })
}

#[pymodule]
fn nitsche_fem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Domain>()?;
    m.add_class::<Mesh>()?;
    m.add_class::<StudyTable>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(list_cases, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    m.add_function(wrap_pyfunction!(solve_case, m)?)?;
    Ok(())
}
