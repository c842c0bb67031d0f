//! Shared fixtures for the solver benchmarks.

use std::sync::Arc;

use ldgshishkin_core::mesh::{build_shishkin_1d, build_shishkin_2d, Mesh1D, Mesh2D, MeshConfig};
use ldgshishkin_core::problem::{manufactured_2d_problem, paper_1d_problem, Problem1D, Problem2D};

/// The 1D layer problem on its Shishkin mesh with `σ = k + 1`.
pub fn setup_1d(n: usize, eps: f64, k: usize) -> (Problem1D, Arc<Mesh1D>) {
    let p = paper_1d_problem(eps).expect("valid eps");
    let m = build_shishkin_1d(&MeshConfig::new(n, eps, (k + 1) as f64, p.beta)).expect("valid mesh");
    (p, Arc::new(m))
}

/// The 2D manufactured problem on its Shishkin mesh with `σ = k + 1`.
pub fn setup_2d(n: usize, eps: f64, k: usize) -> (Problem2D, Arc<Mesh2D>) {
    let p = manufactured_2d_problem(eps).expect("valid eps");
    let m = build_shishkin_2d(&MeshConfig::new(n, eps, (k + 1) as f64, p.beta)).expect("valid mesh");
    (p, Arc::new(m))
}
