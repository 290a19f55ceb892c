//! Reconstruction of the full discrete solution, L2 error evaluation, and
//! convergence studies with experimental orders of convergence.

pub mod cases;

pub use cases::ManufacturedCase;

use crate::assembly::{self, error_rule};
use crate::boundary::SingularFunction;
use crate::geometry::Point2;
use crate::mesh::{ElementKind, Mesh, ReferenceCell};
use crate::parallel::par_map;
use crate::solver::solve_spd;
use crate::{FemError, Result};

/// Reference-coordinate tolerance for deciding point membership.
const INSIDE_TOL: f64 = 1.0e-12;

/// The computed solution: finite element coefficients for the regular part
/// plus the singular functions that were split off. Evaluation adds them.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    mesh: Mesh,
    coefficients: Vec<f64>,
    singular_parts: Vec<SingularFunction>,
    locator: PointLocator,
}

impl DiscreteSolution {
    pub fn new(
        mesh: Mesh,
        coefficients: Vec<f64>,
        singular_parts: Vec<SingularFunction>,
    ) -> Self {
        assert_eq!(
            coefficients.len(),
            mesh.num_nodes(),
            "one coefficient per mesh node"
        );
        let locator = PointLocator::build(&mesh);
        Self { mesh, coefficients, singular_parts, locator }
    }

    /// Nodal interpolant of a callable (no solve), with the given singular
    /// parts attached.
    pub fn interpolate(
        mesh: Mesh,
        f: impl Fn(Point2) -> f64,
        singular_parts: Vec<SingularFunction>,
    ) -> Self {
        let coefficients = mesh.nodes().iter().map(|&p| f(p)).collect();
        Self::new(mesh, coefficients, singular_parts)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn singular_parts(&self) -> &[SingularFunction] {
        &self.singular_parts
    }

    /// Finite element part at `p` (barycentric/bilinear interpolation of
    /// nodal coefficients).
    pub fn eval_fe(&self, p: Point2) -> Result<f64> {
        let (element, xhat, yhat) = self
            .locator
            .locate(&self.mesh, p)
            .ok_or(FemError::OutsideDomain { x: p.x, y: p.y })?;
        let cell = ReferenceCell::new(self.mesh.kind());
        let values = cell.shape_values(xhat, yhat);
        let conn = self.mesh.element(element);
        let mut acc = 0.0;
        for (a, &node) in conn.iter().enumerate() {
            acc += values[a] * self.coefficients[node];
        }
        Ok(acc)
    }

    /// Full solution at `p`: finite element part plus all singular parts.
    /// Undefined exactly at a singular marker.
    pub fn eval_full(&self, p: Point2) -> Result<f64> {
        if self.singular_parts.iter().any(|s| s.origin() == p) {
            return Err(FemError::AtSingularPoint { x: p.x, y: p.y });
        }
        let fe = self.eval_fe(p)?;
        let singular: f64 = self.singular_parts.iter().map(|s| s.eval(p)).sum();
        Ok(fe + singular)
    }

    /// L2 distance between the full discrete solution and `exact`, by
    /// high-degree quadrature per element.
    pub fn l2_error(&self, exact: &(dyn Fn(Point2) -> f64 + Sync)) -> f64 {
        self.l2_error_impl(exact, true)
    }

    /// L2 distance between the finite element part alone and `exact`
    /// (used to compare the regular parts of two splittings).
    pub fn l2_error_regular(&self, exact: &(dyn Fn(Point2) -> f64 + Sync)) -> f64 {
        self.l2_error_impl(exact, false)
    }

    fn l2_error_impl(&self, exact: &(dyn Fn(Point2) -> f64 + Sync), full: bool) -> f64 {
        let kind = self.mesh.kind();
        let rule = error_rule(kind);
        let cell = ReferenceCell::new(kind);
        // Per-element contributions in element order, summed sequentially,
        // so the result does not depend on the thread count.
        let contributions = par_map(self.mesh.num_elements(), |e| {
            let coords = self.mesh.element_coords(e);
            let conn = self.mesh.element(e);
            let mut acc = 0.0;
            for (pt, w) in rule.points.iter().zip(&rule.weights) {
                let values = cell.shape_values(pt[0], pt[1]);
                let m = assembly::map_point(cell, &coords, pt[0], pt[1]);
                let mut uh = 0.0;
                for (a, &node) in conn.iter().enumerate() {
                    uh += values[a] * self.coefficients[node];
                }
                if full {
                    uh += self
                        .singular_parts
                        .iter()
                        .map(|s| s.eval(m.point))
                        .sum::<f64>();
                }
                let diff = exact(m.point) - uh;
                acc += w * m.det_j * diff * diff;
            }
            acc
        });
        let total: f64 = contributions.iter().sum();
        total.max(0.0).sqrt()
    }
}

/// Element lookup: coarse bin grid over the bounding box with a linear-scan
/// fallback; membership decided on reference coordinates.
#[derive(Debug, Clone)]
struct PointLocator {
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
    bins: Vec<Vec<usize>>,
}

impl PointLocator {
    fn build(mesh: &Mesh) -> Self {
        let mut lo = Point2::new(f64::MAX, f64::MAX);
        let mut hi = Point2::new(f64::MIN, f64::MIN);
        for p in mesh.nodes() {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let n = (mesh.num_elements() as f64).sqrt().ceil() as usize;
        let (nx, ny) = (n.max(1), n.max(1));
        let dx = (hi.x - lo.x) / nx as f64;
        let dy = (hi.y - lo.y) / ny as f64;
        let mut bins = vec![Vec::new(); nx * ny];
        for e in 0..mesh.num_elements() {
            let coords = mesh.element_coords(e);
            let (exl, exh) = coords.iter().fold((f64::MAX, f64::MIN), |(l, h), p| {
                (l.min(p.x), h.max(p.x))
            });
            let (eyl, eyh) = coords.iter().fold((f64::MAX, f64::MIN), |(l, h), p| {
                (l.min(p.y), h.max(p.y))
            });
            let il = (((exl - lo.x) / dx).floor() as isize).clamp(0, nx as isize - 1) as usize;
            let ih = (((exh - lo.x) / dx).floor() as isize).clamp(0, nx as isize - 1) as usize;
            let jl = (((eyl - lo.y) / dy).floor() as isize).clamp(0, ny as isize - 1) as usize;
            let jh = (((eyh - lo.y) / dy).floor() as isize).clamp(0, ny as isize - 1) as usize;
            for j in jl..=jh {
                for i in il..=ih {
                    bins[j * nx + i].push(e);
                }
            }
        }
        Self { x0: lo.x, y0: lo.y, dx, dy, nx, ny, bins }
    }

    /// Returns `(element, xhat, yhat)` for the first element containing `p`.
    fn locate(&self, mesh: &Mesh, p: Point2) -> Option<(usize, f64, f64)> {
        let i = (((p.x - self.x0) / self.dx).floor() as isize).clamp(0, self.nx as isize - 1)
            as usize;
        let j = (((p.y - self.y0) / self.dy).floor() as isize).clamp(0, self.ny as isize - 1)
            as usize;
        let cell = ReferenceCell::new(mesh.kind());
        for &e in &self.bins[j * self.nx + i] {
            if let Some(hit) = try_element(cell, mesh, e, p) {
                return Some(hit);
            }
        }
        // Robust fallback for points on bin boundaries.
        for e in 0..mesh.num_elements() {
            if let Some(hit) = try_element(cell, mesh, e, p) {
                return Some(hit);
            }
        }
        None
    }
}

fn try_element(cell: ReferenceCell, mesh: &Mesh, e: usize, p: Point2) -> Option<(usize, f64, f64)> {
    let coords = mesh.element_coords(e);
    let [xhat, yhat] = assembly::reference_coords(cell, &coords, p);
    let inside = match cell.kind {
        ElementKind::P1Triangle => {
            xhat >= -1.0 - INSIDE_TOL && yhat >= -1.0 - INSIDE_TOL && xhat + yhat <= INSIDE_TOL
        }
        ElementKind::Q1Quad => {
            xhat.abs() <= 1.0 + INSIDE_TOL && yhat.abs() <= 1.0 + INSIDE_TOL
        }
    };
    inside.then_some((e, xhat, yhat))
}

/// One row of a convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub h: f64,
    pub elements: usize,
    pub dofs: usize,
    pub l2_error: f64,
    /// Experimental order of convergence against the previous level; absent
    /// on the first level and wherever an error vanishes exactly.
    pub eoc: Option<f64>,
}

/// Completed (or partially completed) study.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub case: String,
    pub element: ElementKind,
    pub gamma: f64,
    pub records: Vec<ConvergenceRecord>,
}

impl ConvergenceTable {
    /// CSV serialization; floating point carries 16 significant digits so
    /// identical runs produce byte-identical files.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,h,elements,dofs,l2_error,eoc\n");
        for r in &self.records {
            let eoc = r.eoc.map(format_sig16).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.level,
                format_sig16(r.h),
                r.elements,
                r.dofs,
                format_sig16(r.l2_error),
                eoc
            ));
        }
        out
    }

    pub fn final_eoc(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.eoc)
    }
}

fn format_sig16(x: f64) -> String {
    format!("{x:.15e}")
}

/// Per-level convergence rates from `(h, error)` pairs:
/// `log(e_prev / e) / log(h_prev / h)`. The first level has no rate, and a
/// vanishing error on either side leaves the rate undefined.
pub fn eoc_rates(levels: &[(f64, f64)]) -> Vec<Option<f64>> {
    let mut rates = vec![None; levels.len()];
    for k in 1..levels.len() {
        let (h_prev, e_prev) = levels[k - 1];
        let (h, e) = levels[k];
        debug_assert!(h < h_prev, "mesh sizes must decrease strictly");
        if e_prev > 0.0 && e > 0.0 {
            rates[k] = Some((e_prev / e).ln() / (h_prev / h).ln());
        }
    }
    rates
}

/// Result of a study: the table (possibly partial), the finest computed
/// solution, and the error that aborted the study if one did.
pub struct StudyOutcome {
    pub table: ConvergenceTable,
    pub finest: Option<DiscreteSolution>,
    pub failure: Option<FemError>,
}

impl StudyOutcome {
    pub fn into_result(self) -> Result<(ConvergenceTable, Option<DiscreteSolution>)> {
        match self.failure {
            None => Ok((self.table, self.finest)),
            Some(e) => Err(e),
        }
    }
}

/// Runs `levels` uniform refinements of the case's coarse mesh: for each
/// level, regularize, assemble, solve, and measure the L2 error against the
/// exact solution. Deterministic level by level; a failing level aborts and
/// leaves the table partial.
pub fn run_convergence_study(
    case: &ManufacturedCase,
    kind: ElementKind,
    levels: usize,
    gamma: f64,
    tol: f64,
) -> StudyOutcome {
    let mut table = ConvergenceTable {
        case: case.name.to_string(),
        element: kind,
        gamma,
        records: Vec::new(),
    };
    let mut finest = None;

    let problem = match case.regularize() {
        Ok(p) => p,
        Err(e) => return StudyOutcome { table, finest, failure: Some(e) },
    };
    let mut mesh = match Mesh::generate_initial(&case.domain, kind, case.initial_subdivisions) {
        Ok(m) => m,
        Err(e) => return StudyOutcome { table, finest, failure: Some(e) },
    };

    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for level in 1..=levels {
        let step = || -> Result<DiscreteSolution> {
            let system = assembly::assemble(&mesh, &problem, gamma)?;
            let max_iter = 10 * system.matrix.nrows().max(10);
            let report = solve_spd(&system, tol, max_iter)?;
            Ok(DiscreteSolution::new(
                mesh.clone(),
                report.solution,
                problem.singular_parts().to_vec(),
            ))
        };
        match step() {
            Ok(solution) => {
                let exact = case.exact.clone();
                let err = solution.l2_error(&move |p| exact(p));
                pairs.push((mesh.mesh_size(), err));
                table.records.push(ConvergenceRecord {
                    level,
                    h: mesh.mesh_size(),
                    elements: mesh.num_elements(),
                    dofs: solution.coefficients().len(),
                    l2_error: err,
                    eoc: None,
                });
                finest = Some(solution);
            }
            Err(e) => {
                fill_rates(&mut table, &pairs);
                return StudyOutcome { table, finest, failure: Some(e) };
            }
        }
        if level < levels {
            mesh = mesh.refine_uniform();
        }
    }
    fill_rates(&mut table, &pairs);
    StudyOutcome { table, finest, failure: None }
}

fn fill_rates(table: &mut ConvergenceTable, pairs: &[(f64, f64)]) {
    for (record, rate) in table.records.iter_mut().zip(eoc_rates(pairs)) {
        record.eoc = rate;
    }
}
