//! Mixed local discontinuous Galerkin solvers for singularly perturbed
//! reaction-diffusion problems on Shishkin meshes, with energy and balanced
//! norm error evaluation and a convergence harness.

pub mod basis;
pub mod dg;
pub mod error;
pub mod harness;
pub mod ldg1d;
pub mod ldg2d;
pub mod linalg;
pub mod mesh;
pub mod norms;
pub mod problem;
pub mod projection;

pub use dg::{DgFunction1D, DgFunction2D};
pub use error::{Error, Result};
pub use harness::{
    emit_table, render_table, run_projection_study, run_sweep, ConvergenceTable, NormSelection, SigmaRule, StudyKind,
    SweepConfig, TableFormat, TableRow,
};
pub use ldg1d::{apply_b_1d, assemble_1d, solve_ldg_1d, AssembledSystem, MixedSolution1D, SolveStats, SolverKind, SolverOptions};
pub use ldg2d::{apply_b_2d, assemble_2d, solve_ldg_2d, MixedSolution2D};
pub use mesh::{build_shishkin_1d, build_shishkin_2d, Mesh1D, Mesh2D, MeshConfig};
pub use norms::{
    balanced_norm_1d, balanced_norm_2d, energy_norm_1d, energy_norm_2d, error_norms_1d, error_norms_2d, rate_shishkin,
    NormBreakdown, RateRow,
};
pub use problem::{AnyProblem, Problem1D, Problem2D};
