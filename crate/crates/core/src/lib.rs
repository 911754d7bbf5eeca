//! Numerical function theory on the unit disk: Q_p norms, p-Carleson
//! measures, solvers for the d-bar equation, and a constructive solver for
//! the ideal problem `sum f_j g_j = g^3` under the size condition
//! `|g| <= (sum |f_j|^2)^(1/2)`.
//!
//! Conventions used throughout:
//!
//! * `dA` is Lebesgue area measure (the disk has area `pi`); `dsigma` is
//!   normalized arc length (the circle has mass 1).
//! * Arc lengths are normalized, `|I| in (0, 1]`.
//! * `|grad F|^2 = 2|F_z|^2 + 2|F_zbar|^2`.
//! * Suprema over arcs and Moebius centres are replaced by maxima over
//!   finite families, so every reported norm is a lower bound for the
//!   corresponding supremum.

mod error;

pub mod carleson;
pub mod dbar;
pub mod disk;
pub mod funcspace;
pub mod par;
pub mod qp;
pub mod wolff;

pub use error::{Error, Result};

pub use disk::{
    build_grids, dyadic_arcs, integrate, moebius_eval, Arc, BoundaryGrid, CarlesonBox, DiskGrid,
    MoebiusMap, Quadrature,
};
pub use funcspace::{wirtinger_fd, AnalyticFn, Poly, SmoothField, Wirtinger};
pub use carleson::{box_norm, invariant_norm, CarlesonEstimate, EstimateKind, MeasureDensity};
pub use dbar::{cauchy_solve, nx_solve, CauchyScheme, CauchySolver, DbarProblem, NxOptions};
pub use qp::{multiplier_test, qp_norm, MultiplierReport, QpNormReport, TrigInterpolant};
pub use wolff::{
    solve_ideal, validate, verify_solution, CertificationReport, IdealSolution, Mode, SolutionEvaluator,
    SolutionReport, SolveOptions, SolverKind, Tolerances, WolffProblem,
};

pub use num_complex::Complex64;
