//! Discontinuous Galerkin SBP solver for the Poisson equation with a local,
//! element-wise reconstruction of the gradient from the potential.

#[cfg(test)]
#[macro_use]
mod test_macros;

pub mod convergence;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod gradient;
pub mod mesh;
pub mod relax;
pub mod report;
pub mod sbp;
pub mod setups;
pub mod solvers;

pub use convergence::{eoc, run_convergence, solve_level, ConvergenceReport, LevelResult, MeshKind, RunOptions};
pub use elliptic::{relaxation_time, relaxation_time_for, DirichletPenalty, EllipticOperator, LinearOperator};
pub use error::{Error, Result};
pub use field::{interpolate, l2_error, BoundaryData, GradientField, NodalField};
pub use gradient::{implicit_gradient_oracle, local_gradient, RelaxationTime};
pub use mesh::{BoundaryCondition, Mesh, Mesh1D, Mesh2D};
pub use report::{emit_report, ReportFormat};
pub use sbp::{gll_operator, SbpOperator};
pub use setups::{builtin_setup, ProblemSetup};
pub use solvers::{solve_cg, solve_direct, SolveMethod, SolveReport};
