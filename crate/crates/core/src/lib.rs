//! Finite element solver for 2D linear diffusion-reaction problems whose
//! Dirichlet boundary data may jump at isolated boundary points.
//!
//! The solution is split into explicitly known singular functions (one per
//! jump point) plus a regular remainder. The remainder solves an auxiliary
//! problem with continuous boundary data and is discretized with Nitsche's
//! method on conforming P1/Q1 meshes; the discrete solution is the sum of
//! the finite element part and the singular functions. This recovers
//! second-order L2 convergence even though the original solution is not
//! in H1.
//!
//! Module map:
//! - [`geometry`]: convex polygonal domains, boundary segments, polar frames
//! - [`boundary`]: edge traces, jumps, singular functions, regularized data
//! - [`mesh`]: structured triangular/quadrilateral meshes with uniform refinement
//! - [`assembly`]: quadrature, local matrices, global sparse Nitsche system
//! - [`solver`]: preconditioned conjugate gradients plus dense test oracles
//! - [`analysis`]: solution evaluation, L2 errors, convergence studies, cases
//! - [`cli`]: run configuration, CSV/SVG/dump outputs

pub mod analysis;
pub mod assembly;
pub mod boundary;
pub mod cli;
pub mod geometry;
pub mod mesh;
pub mod solver;

mod parallel;

pub use analysis::{ConvergenceRecord, ConvergenceTable, DiscreteSolution, ManufacturedCase};
pub use assembly::{assemble, SparseSystem};
pub use boundary::{BoundaryData, EdgeTrace, JumpRecord, RegularizedProblem, SingularFunction};
pub use geometry::{Point2, PolygonDomain};
pub use mesh::{ElementKind, Mesh};
pub use solver::{solve_spd, SolveReport};

/// Errors produced by any stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum FemError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("index {index} out of range ({len} entries)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("point ({x}, {y}) is not on the boundary within tolerance {tol:e}")]
    NotOnBoundary { x: f64, y: f64, tol: f64 },
    #[error("invalid boundary data: {0}")]
    InvalidBoundaryData(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("assembly failed: {0}")]
    Assembly(String),
    #[error("zero diagonal entry at row {row}; the system is singular or badly scaled")]
    ZeroDiagonal { row: usize },
    #[error(
        "solver did not converge within {max_iter} iterations (relative residual {residual:.3e}); \
         the system may be indefinite -- try a larger penalty parameter"
    )]
    NoConvergence { max_iter: usize, residual: f64 },
    #[error("matrix is not positive definite (detected at pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("point ({x}, {y}) lies outside the mesh")]
    OutsideDomain { x: f64, y: f64 },
    #[error("evaluation at the singular point ({x}, {y}) is undefined")]
    AtSingularPoint { x: f64, y: f64 },
    #[error("unknown case '{name}'; registered cases: {known}")]
    UnknownCase { name: String, known: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FemError>;
