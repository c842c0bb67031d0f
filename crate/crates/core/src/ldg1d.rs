//! The 1D mixed LDG scheme for `-ε u'' + b u = f` with `q = ε u'`.
//!
//! Fluxes: `Q̂` takes the right neighbour's trace `Q⁺` at interior nodes and
//! carries the penalties `λ_0 U⁺_0`, `-λ_N U⁻_N` at the boundary; `Û` takes
//! the left trace `U⁻`, vanishes at the boundary, and at the interface node
//! `3N/4` subtracts `λ_q [[Q]]`. The interface penalty couples `Q` across
//! that node, so `Q` cannot be eliminated cellwise there.

use std::sync::Arc;

use crate::basis::{eval_modal, eval_modal_deriv, gauss_rule, left_trace, QuadratureRule, ReferenceBasis};
use crate::dg::{modal_dot, DgFunction1D};
use crate::error::{Error, Result};
use crate::linalg::sparse::{relative_residual, sparse_solve, SparseMatrix, TripletBuilder};
use crate::mesh::Mesh1D;
use crate::problem::Problem1D;

/// Penalty parameters of the numerical fluxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxParams {
    pub lambda_0: f64,
    pub lambda_n: f64,
    pub lambda_q: f64,
    /// Node index `3N/4` carrying the `[[Q]]` penalty.
    pub interface_node: usize,
}

impl FluxParams {
    /// `λ_0 = λ_N = √ε`, `λ_q = 1/√ε`.
    pub fn new(eps: f64, n_cells: usize) -> Self {
        let s = eps.sqrt();
        FluxParams { lambda_0: s, lambda_n: s, lambda_q: 1.0 / s, interface_node: 3 * n_cells / 4 }
    }
}

/// How the assembled system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Monolithic banded LU on the full system.
    #[default]
    Banded,
    /// Eliminate the flux unknowns wherever their mass block is cell-local, then solve.
    Condensed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub kind: SolverKind,
    /// Gauss points per cell for `⟨bU, v⟩` and `⟨f, v⟩`; `None` means `k + 3`.
    pub quad_points: Option<usize>,
    /// Largest accepted relative residual of the scaled system.
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { kind: SolverKind::Banded, quad_points: None, residual_tol: 1e-10 }
    }
}

impl SolverOptions {
    /// Defaults for the 2D scheme: condensation and a `1e-9` residual bound.
    pub fn default_2d() -> Self {
        SolverOptions { kind: SolverKind::Condensed, quad_points: None, residual_tol: 1e-9 }
    }

    pub fn quad_points(&self, k: usize) -> usize {
        self.quad_points.unwrap_or(k + 3)
    }
}

/// `W = (Q, U)`.
#[derive(Debug, Clone)]
pub struct MixedSolution1D {
    pub u: DgFunction1D,
    pub q: DgFunction1D,
}

impl MixedSolution1D {
    pub fn zeros(mesh: Arc<Mesh1D>, k: usize) -> Self {
        MixedSolution1D { u: DgFunction1D::zeros(mesh.clone(), k), q: DgFunction1D::zeros(mesh, k) }
    }

    pub fn degree(&self) -> usize {
        self.u.degree()
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        self.u.mesh()
    }

    /// Unpacks a cell-major `(Q modes, U modes)` vector.
    pub fn from_vector(mesh: Arc<Mesh1D>, k: usize, x: &[f64]) -> Self {
        let nb = k + 1;
        let mut w = MixedSolution1D::zeros(mesh.clone(), k);
        for c in 0..mesh.n_cells() {
            let base = c * 2 * nb;
            w.q.cell_mut(c).copy_from_slice(&x[base..base + nb]);
            w.u.cell_mut(c).copy_from_slice(&x[base + nb..base + 2 * nb]);
        }
        w
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let nb = self.degree() + 1;
        let n = self.mesh().n_cells();
        let mut x = vec![0.0; 2 * nb * n];
        for c in 0..n {
            let base = c * 2 * nb;
            x[base..base + nb].copy_from_slice(self.q.cell(c));
            x[base + nb..base + 2 * nb].copy_from_slice(self.u.cell(c));
        }
        x
    }

    pub fn scale(&mut self, a: f64) {
        self.u.scale(a);
        self.q.scale(a);
    }
}

/// The discrete linear system `A x = b`, unknowns ordered cell by cell with
/// the `Q` modes before the `U` modes.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Unknowns per cell.
    pub block_size: usize,
    pub lower_bandwidth: usize,
    pub upper_bandwidth: usize,
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub(crate) fn new(matrix: SparseMatrix, rhs: Vec<f64>, block_size: usize) -> Self {
        let (lower_bandwidth, upper_bandwidth) = matrix.bandwidths(None);
        AssembledSystem { matrix, rhs, block_size, lower_bandwidth, upper_bandwidth }
    }
}

struct Layout {
    nb: usize,
    n: usize,
}

impl Layout {
    #[inline]
    fn q(&self, c: usize, m: usize) -> usize {
        c * 2 * self.nb + m
    }
    #[inline]
    fn u(&self, c: usize, m: usize) -> usize {
        c * 2 * self.nb + self.nb + m
    }
}

/// `coef · Û_i` into row `row`.
fn add_u_hat(b: &mut TripletBuilder, lay: &Layout, flux: &FluxParams, node: usize, row: usize, coef: f64) {
    if node == 0 || node == lay.n {
        return;
    }
    for n in 0..lay.nb {
        b.add(row, lay.u(node - 1, n), coef);
    }
    if node == flux.interface_node {
        for n in 0..lay.nb {
            b.add(row, lay.q(node - 1, n), -coef * flux.lambda_q);
            b.add(row, lay.q(node, n), coef * flux.lambda_q * left_trace(n));
        }
    }
}

/// `coef · Q̂_i` into row `row`.
fn add_q_hat(b: &mut TripletBuilder, lay: &Layout, flux: &FluxParams, node: usize, row: usize, coef: f64) {
    if node == lay.n {
        for n in 0..lay.nb {
            b.add(row, lay.q(node - 1, n), coef);
            b.add(row, lay.u(node - 1, n), -coef * flux.lambda_n);
        }
        return;
    }
    for n in 0..lay.nb {
        b.add(row, lay.q(node, n), coef * left_trace(n));
    }
    if node == 0 {
        for n in 0..lay.nb {
            b.add(row, lay.u(0, n), coef * flux.lambda_0 * left_trace(n));
        }
    }
}

/// Assembles the LDG equations cell by cell.
pub fn assemble_1d(problem: &Problem1D, mesh: &Mesh1D, k: usize, opts: &SolverOptions) -> Result<AssembledSystem> {
    if k == 0 {
        return Err(Error::Config("LDG needs k >= 1".into()));
    }
    let n = mesh.n_cells();
    if n < 4 || !n.is_multiple_of(4) {
        return Err(Error::Config(format!("N must be a positive multiple of 4, got {n}")));
    }
    let nb = k + 1;
    let rb = ReferenceBasis::new(k, opts.quad_points(k))?;
    let flux = FluxParams::new(problem.eps, n);
    let lay = Layout { nb, n };
    let dim = 2 * nb * n;
    let mut b = TripletBuilder::new(dim);
    let mut rhs = vec![0.0; dim];
    let inv_eps = 1.0 / problem.eps;
    for c in 0..n {
        let cell = mesh.cell(c);
        let jac = cell.jacobian();
        let h = cell.width();
        let bq: Vec<f64> = rb.quad.points.iter().map(|&t| (problem.b)(cell.to_physical(t))).collect();
        let fq: Vec<f64> = rb.quad.points.iter().map(|&t| (problem.f)(cell.to_physical(t))).collect();
        for m in 0..nb {
            let sign_m = left_trace(m);
            // ε⁻¹⟨Q, r⟩ + ⟨U, r'⟩ - Û_{c+1} r⁻ + Û_c r⁺ = 0
            let row = lay.q(c, m);
            b.add(row, lay.q(c, m), inv_eps * h / (2 * m + 1) as f64);
            for nn in 0..nb {
                b.add(row, lay.u(c, nn), rb.stiffness(m, nn));
            }
            add_u_hat(&mut b, &lay, &flux, c + 1, row, -1.0);
            add_u_hat(&mut b, &lay, &flux, c, row, sign_m);

            // ⟨Q, v'⟩ + ⟨bU, v⟩ - Q̂_{c+1} v⁻ + Q̂_c v⁺ = ⟨f, v⟩
            let row = lay.u(c, m);
            for nn in 0..nb {
                b.add(row, lay.q(c, nn), rb.stiffness(m, nn));
                let mass: f64 = (0..rb.quad.len())
                    .map(|q| rb.quad.weights[q] * bq[q] * rb.value(q, m) * rb.value(q, nn))
                    .sum();
                b.add(row, lay.u(c, nn), jac * mass);
            }
            add_q_hat(&mut b, &lay, &flux, c + 1, row, -1.0);
            add_q_hat(&mut b, &lay, &flux, c, row, sign_m);
            rhs[row] = jac * (0..rb.quad.len()).map(|q| rb.quad.weights[q] * fq[q] * rb.value(q, m)).sum::<f64>();
        }
    }
    Ok(AssembledSystem::new(b.build(), rhs, 2 * nb))
}

/// Solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    /// Relative residual of the `√ε`-scaled full system.
    pub residual: f64,
    pub unknowns: usize,
    /// Unknowns left after condensation.
    pub reduced_unknowns: usize,
}

/// Rescales `Q = √ε Q̃` and multiplies the flux equations by `√ε`, so the
/// scaled system has entries of moderate size for small `ε`.
pub(crate) fn eps_scaling(dim: usize, eps: f64, is_flux: impl Fn(usize) -> bool) -> (Vec<f64>, Vec<f64>) {
    let s = eps.sqrt();
    let v: Vec<f64> = (0..dim).map(|i| if is_flux(i) { s } else { 1.0 }).collect();
    (v.clone(), v)
}

/// Solves a scaled system either monolithically or after eliminating `elim`.
pub(crate) fn solve_scaled(matrix: &SparseMatrix, rhs: &[f64], elim: Option<&[bool]>) -> Result<(Vec<f64>, usize)> {
    match elim {
        None => {
            let rep = sparse_solve(matrix, rhs)?;
            Ok((rep.x, matrix.dim()))
        }
        Some(e) => {
            let cond = matrix.condense_diagonal(rhs, e)?;
            let rep = sparse_solve(&cond.matrix, &cond.rhs)?;
            Ok((cond.expand(matrix, rhs, &rep.x), cond.retained.len()))
        }
    }
}

/// Assembles and solves the 1D scheme.
pub fn solve_ldg_1d(
    problem: &Problem1D,
    mesh: &Arc<Mesh1D>,
    k: usize,
    opts: &SolverOptions,
) -> Result<(MixedSolution1D, SolveStats)> {
    let sys = assemble_1d(problem, mesh, k, opts)?;
    let nb = k + 1;
    let dim = sys.dim();
    let is_flux = |i: usize| i % (2 * nb) < nb;
    let (rows, cols) = eps_scaling(dim, problem.eps, is_flux);
    let mut scaled = sys.matrix.clone();
    scaled.scale(&rows, &cols);
    let srhs: Vec<f64> = sys.rhs.iter().zip(&rows).map(|(b, r)| b * r).collect();

    let elim: Option<Vec<bool>> = match opts.kind {
        SolverKind::Banded => None,
        SolverKind::Condensed => {
            let iface = 3 * mesh.n_cells() / 4;
            // Q is local except on the two cells sharing the interface node.
            Some((0..dim).map(|i| is_flux(i) && !(i / (2 * nb) + 1 == iface || i / (2 * nb) == iface)).collect())
        }
    };
    let (y, reduced) = solve_scaled(&scaled, &srhs, elim.as_deref())?;
    let residual = relative_residual(&scaled, &y, &srhs);
    if !(residual <= opts.residual_tol) {
        return Err(Error::Numerical { residual });
    }
    let x: Vec<f64> = y.iter().zip(&cols).map(|(v, c)| v * c).collect();
    let sol = MixedSolution1D::from_vector(mesh.clone(), k, &x);
    Ok((sol, SolveStats { residual, unknowns: dim, reduced_unknowns: reduced }))
}

/// Evaluates the compact bilinear form `B(W; X)` term by term from traces
/// and cell integrals, independently of the assembled matrix.
pub fn apply_b_1d(w: &MixedSolution1D, x: &MixedSolution1D, problem: &Problem1D, quad_points: usize) -> Result<f64> {
    let mesh = w.mesh();
    if !Arc::ptr_eq(mesh, x.mesh()) && mesh.nodes() != x.mesh().nodes() {
        return Err(Error::Config("bilinear form needs both arguments on the same mesh".into()));
    }
    if w.degree() != x.degree() {
        return Err(Error::Config("bilinear form needs matching degrees".into()));
    }
    let n = mesh.n_cells();
    let k = w.degree();
    let quad = gauss_rule(quad_points)?;
    let exact = gauss_rule(k + 1)?;
    let flux = FluxParams::new(problem.eps, n);
    let (uw, qw) = (&w.u, &w.q);
    let (v, r) = (&x.u, &x.q);

    let mut total = 0.0;
    for c in 0..n {
        let cell = mesh.cell(c);
        let jac = cell.jacobian();
        total += jac * modal_dot(qw.cell(c), r.cell(c)) / problem.eps;
        total += jac * weighted_product(&quad, cell.a, cell.b, problem.b.as_ref(), uw.cell(c), v.cell(c));
        // ⟨U, r'⟩ + ⟨Q, v'⟩; Jacobians cancel.
        total += derivative_pairing(&exact, uw.cell(c), r.cell(c));
        total += derivative_pairing(&exact, qw.cell(c), v.cell(c));
    }
    for i in 1..n {
        total -= uw.right_trace(i - 1) * r.jump(i);
    }
    for i in 0..n {
        total -= qw.left_trace(i) * v.jump(i);
    }
    total -= qw.right_trace(n - 1) * v.right_trace(n - 1);
    total += flux.lambda_0 * uw.jump(0) * v.jump(0);
    total += flux.lambda_n * uw.jump(n) * v.jump(n);
    let iface = flux.interface_node;
    total += flux.lambda_q * qw.jump(iface) * r.jump(iface);
    Ok(total)
}

/// `∫_{-1}^{1} b(x(t)) a(t) c(t) dt`.
pub(crate) fn weighted_product<B: Fn(f64) -> f64 + ?Sized>(quad: &QuadratureRule, lo: f64, hi: f64, b: &B, a: &[f64], c: &[f64]) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    quad.iter()
        .map(|(t, wq)| wq * b(mid + half * t) * eval_modal(a, t) * eval_modal(c, t))
        .sum()
}

/// `∫_{-1}^{1} a(t) c'(t) dt`.
fn derivative_pairing(quad: &QuadratureRule, a: &[f64], c: &[f64]) -> f64 {
    quad.iter().map(|(t, wq)| wq * eval_modal(a, t) * eval_modal_deriv(c, t)).sum()
}

/// `⟨f, v⟩` with an `n_quad`-point rule per cell.
pub fn load_functional_1d(problem: &Problem1D, v: &DgFunction1D, quad_points: usize) -> Result<f64> {
    let quad = gauss_rule(quad_points)?;
    let mesh = v.mesh();
    Ok((0..mesh.n_cells())
        .map(|c| {
            let cell = mesh.cell(c);
            cell.jacobian()
                * quad
                    .iter()
                    .map(|(t, wq)| wq * (problem.f)(cell.to_physical(t)) * eval_modal(v.cell(c), t))
                    .sum::<f64>()
        })
        .sum())
}
