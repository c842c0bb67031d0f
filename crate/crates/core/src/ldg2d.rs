//! The 2D mixed LDG scheme for `-ε Δu + b u = f` on the unit square with
//! `p = ε u_x`, `q = ε u_y`.
//!
//! The fluxes are the 1D ones applied along each grid line: `P̂` and `Û`
//! across vertical edges with the `[[P]]` penalty on `x = x_{3N/4}`, and the
//! mirrored `Q̂`, `Û` across horizontal edges with the `[[Q]]` penalty on
//! `y = y_{3N/4}`. Cells on both lines carry both penalties.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{gauss_rule, left_trace, legendre_all, ReferenceBasis};
use crate::dg::{modal_dot, DgFunction2D};
use crate::error::{Error, Result};
use crate::ldg1d::{eps_scaling, solve_scaled, AssembledSystem, SolveStats, SolverKind, SolverOptions};
use crate::linalg::sparse::{relative_residual, TripletBuilder};
use crate::mesh::Mesh2D;
use crate::problem::Problem2D;

/// Largest `N` accepted by the monolithic banded path.
pub const MAX_BANDED_N: usize = 32;

/// Penalty parameters of the 2D fluxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxParams2D {
    /// Penalty on `[[U]]` across the edges `x = 0` and `x = 1`.
    pub lambda_x_boundary: f64,
    /// Penalty on `[[U]]` across the edges `y = 0` and `y = 1`.
    pub lambda_y_boundary: f64,
    pub lambda_p: f64,
    pub lambda_q: f64,
    /// Grid line index `3N/4` in each direction.
    pub interface_line: usize,
}

impl FluxParams2D {
    pub fn new(eps: f64, n: usize) -> Self {
        let s = eps.sqrt();
        FluxParams2D {
            lambda_x_boundary: s,
            lambda_y_boundary: s,
            lambda_p: 1.0 / s,
            lambda_q: 1.0 / s,
            interface_line: 3 * n / 4,
        }
    }
}

/// `T = (U, P, Q)`.
#[derive(Debug, Clone)]
pub struct MixedSolution2D {
    pub u: DgFunction2D,
    pub p: DgFunction2D,
    pub q: DgFunction2D,
}

impl MixedSolution2D {
    pub fn zeros(mesh: Arc<Mesh2D>, k: usize) -> Self {
        MixedSolution2D {
            u: DgFunction2D::zeros(mesh.clone(), k),
            p: DgFunction2D::zeros(mesh.clone(), k),
            q: DgFunction2D::zeros(mesh, k),
        }
    }

    pub fn degree(&self) -> usize {
        self.u.degree()
    }

    pub fn mesh(&self) -> &Arc<Mesh2D> {
        self.u.mesh()
    }

    /// Unpacks a cell-major `(P, Q, U)` vector.
    pub fn from_vector(mesh: Arc<Mesh2D>, k: usize, x: &[f64]) -> Self {
        let l = (k + 1) * (k + 1);
        let n = mesh.n();
        let mut w = MixedSolution2D::zeros(mesh, k);
        for cj in 0..n {
            for ci in 0..n {
                let base = (cj * n + ci) * 3 * l;
                w.p.cell_mut(ci, cj).copy_from_slice(&x[base..base + l]);
                w.q.cell_mut(ci, cj).copy_from_slice(&x[base + l..base + 2 * l]);
                w.u.cell_mut(ci, cj).copy_from_slice(&x[base + 2 * l..base + 3 * l]);
            }
        }
        w
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let l = (self.degree() + 1).pow(2);
        let n = self.mesh().n();
        let mut x = vec![0.0; 3 * l * n * n];
        for cj in 0..n {
            for ci in 0..n {
                let base = (cj * n + ci) * 3 * l;
                x[base..base + l].copy_from_slice(self.p.cell(ci, cj));
                x[base + l..base + 2 * l].copy_from_slice(self.q.cell(ci, cj));
                x[base + 2 * l..base + 3 * l].copy_from_slice(self.u.cell(ci, cj));
            }
        }
        x
    }

    pub fn scale(&mut self, a: f64) {
        self.u.scale(a);
        self.p.scale(a);
        self.q.scale(a);
    }
}

const P: usize = 0;
const Q: usize = 1;
const U: usize = 2;

#[derive(Clone, Copy)]
struct Layout {
    nb: usize,
    n: usize,
}

impl Layout {
    #[inline]
    fn idx(&self, field: usize, ci: usize, cj: usize, m: usize, n: usize) -> usize {
        let l = self.nb * self.nb;
        (cj * self.n + ci) * 3 * l + field * l + m * self.nb + n
    }
}

/// `2 / (2m + 1)`.
#[inline]
fn mass1(m: usize) -> f64 {
    2.0 / (2 * m + 1) as f64
}

type Entries = Vec<(usize, usize, f64)>;

/// Direction-generic edge terms. Along x the edge carries the `t`-mode `b`;
/// along y the roles of the two indices swap.
#[derive(Clone, Copy)]
struct Axis {
    along_x: bool,
}

impl Axis {
    /// Global index of `field` in the cell at position `line` along this axis
    /// and `other` across it, normal mode `m`, tangential mode `b`.
    #[inline]
    fn at(&self, lay: &Layout, field: usize, line: usize, other: usize, m: usize, b: usize) -> usize {
        if self.along_x {
            lay.idx(field, line, other, m, b)
        } else {
            lay.idx(field, other, line, b, m)
        }
    }

    /// The flux field of this axis: `P` along x, `Q` along y.
    fn flux_field(&self) -> usize {
        if self.along_x {
            P
        } else {
            Q
        }
    }

    /// `coef · (mode b of Û at grid line `node`)`.
    #[allow(clippy::too_many_arguments)]
    fn u_hat(&self, e: &mut Entries, lay: &Layout, lambda_iface: f64, iface: usize, node: usize, other: usize, b: usize, row: usize, coef: f64) {
        if node == 0 || node == lay.n {
            return;
        }
        let ff = self.flux_field();
        for m in 0..lay.nb {
            e.push((row, self.at(lay, U, node - 1, other, m, b), coef));
        }
        if node == iface {
            for m in 0..lay.nb {
                e.push((row, self.at(lay, ff, node - 1, other, m, b), -coef * lambda_iface));
                e.push((row, self.at(lay, ff, node, other, m, b), coef * lambda_iface * left_trace(m)));
            }
        }
    }

    /// `coef · (mode b of the flux trace at grid line `node`)`.
    #[allow(clippy::too_many_arguments)]
    fn flux_hat(&self, e: &mut Entries, lay: &Layout, lambda_bnd: f64, node: usize, other: usize, b: usize, row: usize, coef: f64) {
        let ff = self.flux_field();
        if node == lay.n {
            for m in 0..lay.nb {
                e.push((row, self.at(lay, ff, node - 1, other, m, b), coef));
                e.push((row, self.at(lay, U, node - 1, other, m, b), -coef * lambda_bnd));
            }
            return;
        }
        for m in 0..lay.nb {
            e.push((row, self.at(lay, ff, node, other, m, b), coef * left_trace(m)));
        }
        if node == 0 {
            for m in 0..lay.nb {
                e.push((row, self.at(lay, U, 0, other, m, b), coef * lambda_bnd * left_trace(m)));
            }
        }
    }
}

fn cell_entries(
    problem: &Problem2D,
    mesh: &Mesh2D,
    rb: &ReferenceBasis,
    lay: Layout,
    flux: &FluxParams2D,
    ci: usize,
    cj: usize,
) -> (Entries, Vec<(usize, f64)>) {
    let nb = lay.nb;
    let cx = mesh.mx.cell(ci);
    let cy = mesh.my.cell(cj);
    let (jx, jy) = (cx.jacobian(), cy.jacobian());
    let inv_eps = 1.0 / problem.eps;
    let nq = rb.quad.len();
    let mut bq = vec![0.0; nq * nq];
    let mut fq = vec![0.0; nq * nq];
    for qa in 0..nq {
        let x = cx.to_physical(rb.quad.points[qa]);
        for qb in 0..nq {
            let y = cy.to_physical(rb.quad.points[qb]);
            let w = rb.quad.weights[qa] * rb.quad.weights[qb];
            bq[qa * nq + qb] = w * (problem.b)(x, y);
            fq[qa * nq + qb] = w * (problem.f)(x, y);
        }
    }
    let xa = Axis { along_x: true };
    let ya = Axis { along_x: false };
    let mut e: Entries = Vec::with_capacity(3 * nb * nb * 12 * nb);
    let mut rhs = Vec::with_capacity(nb * nb);
    for a in 0..nb {
        for b in 0..nb {
            let sign_a = left_trace(a);
            let sign_b = left_trace(b);
            let mass = jx * jy * mass1(a) * mass1(b);
            let fx = jy * mass1(b);
            let fy = jx * mass1(a);

            // ε⁻¹(P, s) + (U, s_x) - ⟨Û_{i}, s⁻⟩ + ⟨Û_{i-1}, s⁺⟩ = 0
            let row = lay.idx(P, ci, cj, a, b);
            e.push((row, row, inv_eps * mass));
            for m in 0..nb {
                e.push((row, lay.idx(U, ci, cj, m, b), fx * rb.stiffness(a, m)));
            }
            xa.u_hat(&mut e, &lay, flux.lambda_p, flux.interface_line, ci + 1, cj, b, row, -fx);
            xa.u_hat(&mut e, &lay, flux.lambda_p, flux.interface_line, ci, cj, b, row, fx * sign_a);

            // ε⁻¹(Q, r) + (U, r_y) - ⟨Û_{j}, r⁻⟩ + ⟨Û_{j-1}, r⁺⟩ = 0
            let row = lay.idx(Q, ci, cj, a, b);
            e.push((row, row, inv_eps * mass));
            for n in 0..nb {
                e.push((row, lay.idx(U, ci, cj, a, n), fy * rb.stiffness(b, n)));
            }
            ya.u_hat(&mut e, &lay, flux.lambda_q, flux.interface_line, cj + 1, ci, a, row, -fy);
            ya.u_hat(&mut e, &lay, flux.lambda_q, flux.interface_line, cj, ci, a, row, fy * sign_b);

            // (P, v_x) + (Q, v_y) + edge fluxes + (bU, v) = (f, v)
            let row = lay.idx(U, ci, cj, a, b);
            for m in 0..nb {
                e.push((row, lay.idx(P, ci, cj, m, b), fx * rb.stiffness(a, m)));
                e.push((row, lay.idx(Q, ci, cj, a, m), fy * rb.stiffness(b, m)));
            }
            xa.flux_hat(&mut e, &lay, flux.lambda_x_boundary, ci + 1, cj, b, row, -fx);
            xa.flux_hat(&mut e, &lay, flux.lambda_x_boundary, ci, cj, b, row, fx * sign_a);
            ya.flux_hat(&mut e, &lay, flux.lambda_y_boundary, cj + 1, ci, a, row, -fy);
            ya.flux_hat(&mut e, &lay, flux.lambda_y_boundary, cj, ci, a, row, fy * sign_b);
            let mut load = 0.0;
            for qa in 0..nq {
                let va = rb.value(qa, a);
                for qb in 0..nq {
                    load += fq[qa * nq + qb] * va * rb.value(qb, b);
                }
            }
            rhs.push((row, jx * jy * load));
            for m in 0..nb {
                for n in 0..nb {
                    let mut acc = 0.0;
                    for qa in 0..nq {
                        let va = rb.value(qa, a) * rb.value(qa, m);
                        for qb in 0..nq {
                            acc += bq[qa * nq + qb] * va * rb.value(qb, b) * rb.value(qb, n);
                        }
                    }
                    e.push((row, lay.idx(U, ci, cj, m, n), jx * jy * acc));
                }
            }
        }
    }
    (e, rhs)
}

/// Assembles the 2D LDG equations; cells are processed in parallel.
pub fn assemble_2d(problem: &Problem2D, mesh: &Mesh2D, k: usize, opts: &SolverOptions) -> Result<AssembledSystem> {
    if k == 0 {
        return Err(Error::Config("LDG needs k >= 1".into()));
    }
    let n = mesh.n();
    if n < 4 || !n.is_multiple_of(4) {
        return Err(Error::Config(format!("N must be a positive multiple of 4, got {n}")));
    }
    let nb = k + 1;
    let rb = ReferenceBasis::new(k, opts.quad_points(k))?;
    let lay = Layout { nb, n };
    let flux = FluxParams2D::new(problem.eps, n);
    let dim = 3 * nb * nb * n * n;
    let parts: Vec<(Entries, Vec<(usize, f64)>)> = (0..n * n)
        .into_par_iter()
        .map(|c| cell_entries(problem, mesh, &rb, lay, &flux, c % n, c / n))
        .collect();
    let mut builder = TripletBuilder::new(dim);
    let mut rhs = vec![0.0; dim];
    for (entries, loads) in parts {
        for (i, j, v) in entries {
            builder.add(i, j, v);
        }
        for (i, v) in loads {
            rhs[i] = v;
        }
    }
    Ok(AssembledSystem::new(builder.build(), rhs, 3 * nb * nb))
}

/// Flux unknowns that the condensed solver eliminates: `P` away from the
/// two cell columns at `x = x_{3N/4}` and `Q` away from the two cell rows at
/// `y = y_{3N/4}`. Their rows hold only the cell mass.
pub fn eliminable_2d(n: usize, k: usize) -> Vec<bool> {
    let nb = k + 1;
    let l = nb * nb;
    let iface = 3 * n / 4;
    let near = |c: usize| c + 1 == iface || c == iface;
    let mut elim = vec![false; 3 * l * n * n];
    for cj in 0..n {
        for ci in 0..n {
            let base = (cj * n + ci) * 3 * l;
            if !near(ci) {
                elim[base..base + l].iter_mut().for_each(|e| *e = true);
            }
            if !near(cj) {
                elim[base + l..base + 2 * l].iter_mut().for_each(|e| *e = true);
            }
        }
    }
    elim
}

/// Assembles and solves the 2D scheme.
pub fn solve_ldg_2d(
    problem: &Problem2D,
    mesh: &Arc<Mesh2D>,
    k: usize,
    opts: &SolverOptions,
) -> Result<(MixedSolution2D, SolveStats)> {
    let n = mesh.n();
    if opts.kind == SolverKind::Banded && n > MAX_BANDED_N {
        return Err(Error::Config(format!(
            "the monolithic banded solver is limited to N <= {MAX_BANDED_N}; use the condensed solver for N = {n}"
        )));
    }
    let sys = assemble_2d(problem, mesh, k, opts)?;
    let l = (k + 1) * (k + 1);
    let dim = sys.dim();
    let (rows, cols) = eps_scaling(dim, problem.eps, |i| i % (3 * l) < 2 * l);
    let mut scaled = sys.matrix;
    scaled.scale(&rows, &cols);
    let srhs: Vec<f64> = sys.rhs.iter().zip(&rows).map(|(b, r)| b * r).collect();
    let elim = match opts.kind {
        SolverKind::Banded => None,
        SolverKind::Condensed => Some(eliminable_2d(n, k)),
    };
    let (y, reduced) = solve_scaled(&scaled, &srhs, elim.as_deref())?;
    let residual = relative_residual(&scaled, &y, &srhs);
    if !(residual <= opts.residual_tol) {
        return Err(Error::Numerical { residual });
    }
    let x: Vec<f64> = y.iter().zip(&cols).map(|(v, c)| v * c).collect();
    let sol = MixedSolution2D::from_vector(mesh.clone(), k, &x);
    Ok((sol, SolveStats { residual, unknowns: dim, reduced_unknowns: reduced }))
}

/// Jump of `v` across vertical grid line `i` in cell row `cj`, as
/// coefficients in `t`.
pub fn jump_x(v: &DgFunction2D, i: usize, cj: usize) -> Vec<f64> {
    let n = v.mesh().n();
    if i == 0 {
        v.trace_x(0, cj, false).into_iter().map(|c| -c).collect()
    } else if i == n {
        v.trace_x(n - 1, cj, true)
    } else {
        let l = v.trace_x(i - 1, cj, true);
        let r = v.trace_x(i, cj, false);
        l.iter().zip(&r).map(|(a, b)| a - b).collect()
    }
}

/// Jump of `v` across horizontal grid line `j` in cell column `ci`.
pub fn jump_y(v: &DgFunction2D, ci: usize, j: usize) -> Vec<f64> {
    let n = v.mesh().n();
    if j == 0 {
        v.trace_y(ci, 0, false).into_iter().map(|c| -c).collect()
    } else if j == n {
        v.trace_y(ci, n - 1, true)
    } else {
        let l = v.trace_y(ci, j - 1, true);
        let r = v.trace_y(ci, j, false);
        l.iter().zip(&r).map(|(a, b)| a - b).collect()
    }
}

/// Values and derivatives of a cell polynomial on a tensor Gauss grid.
pub(crate) struct CellSampler {
    pub nq: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    vals: Vec<f64>,
    ders: Vec<f64>,
    nb: usize,
}

impl CellSampler {
    pub fn new(k: usize, nq: usize) -> Result<Self> {
        let quad = gauss_rule(nq)?;
        let nb = k + 1;
        let mut vals = vec![0.0; nq * nb];
        let mut ders = vec![0.0; nq * nb];
        for (q, &t) in quad.points.iter().enumerate() {
            legendre_all(k, t, &mut vals[q * nb..(q + 1) * nb], &mut ders[q * nb..(q + 1) * nb]);
        }
        Ok(CellSampler { nq, points: quad.points, weights: quad.weights, vals, ders, nb })
    }

    /// `(v, ∂_s v, ∂_t v)` at grid point `(qa, qb)`.
    pub fn sample(&self, c: &[f64], qa: usize, qb: usize) -> (f64, f64, f64) {
        let nb = self.nb;
        let (va, da) = (&self.vals[qa * nb..(qa + 1) * nb], &self.ders[qa * nb..(qa + 1) * nb]);
        let (vb, db) = (&self.vals[qb * nb..(qb + 1) * nb], &self.ders[qb * nb..(qb + 1) * nb]);
        let (mut v, mut ds, mut dt) = (0.0, 0.0, 0.0);
        for m in 0..nb {
            for n in 0..nb {
                let cmn = c[m * nb + n];
                v += cmn * va[m] * vb[n];
                ds += cmn * da[m] * vb[n];
                dt += cmn * va[m] * db[n];
            }
        }
        (v, ds, dt)
    }
}

/// Evaluates the compact bilinear form `B(T; Z)` term by term from traces
/// and sampled cell integrals, independently of the assembled matrix.
pub fn apply_b_2d(t: &MixedSolution2D, z: &MixedSolution2D, problem: &Problem2D, quad_points: usize) -> Result<f64> {
    let mesh = t.mesh();
    if mesh.n() != z.mesh().n() || t.degree() != z.degree() {
        return Err(Error::Config("bilinear form needs matching meshes and degrees".into()));
    }
    let n = mesh.n();
    let k = t.degree();
    let flux = FluxParams2D::new(problem.eps, n);
    let sampler = CellSampler::new(k, quad_points.max(k + 2))?;
    let (u, p, q) = (&t.u, &t.p, &t.q);
    let (v, s, r) = (&z.u, &z.p, &z.q);
    let inv_eps = 1.0 / problem.eps;
    let mut total = 0.0;
    for cj in 0..n {
        for ci in 0..n {
            let cx = mesh.mx.cell(ci);
            let cy = mesh.my.cell(cj);
            let (jx, jy) = (cx.jacobian(), cy.jacobian());
            total += jx * jy * inv_eps * (modal_dot2(p.cell(ci, cj), s.cell(ci, cj), k) + modal_dot2(q.cell(ci, cj), r.cell(ci, cj), k));
            let mut vol = 0.0;
            for qa in 0..sampler.nq {
                let x = cx.to_physical(sampler.points[qa]);
                for qb in 0..sampler.nq {
                    let y = cy.to_physical(sampler.points[qb]);
                    let w = sampler.weights[qa] * sampler.weights[qb];
                    let (uu, _, _) = sampler.sample(u.cell(ci, cj), qa, qb);
                    let (pp, _, _) = sampler.sample(p.cell(ci, cj), qa, qb);
                    let (qq, _, _) = sampler.sample(q.cell(ci, cj), qa, qb);
                    let (vv, vs, vt) = sampler.sample(v.cell(ci, cj), qa, qb);
                    let (_, ss, _) = sampler.sample(s.cell(ci, cj), qa, qb);
                    let (_, _, rt) = sampler.sample(r.cell(ci, cj), qa, qb);
                    // (bU, v) + (U, s_x) + (U, r_y) + (P, v_x) + (Q, v_y)
                    vol += w
                        * (jx * jy * (problem.b)(x, y) * uu * vv
                            + jy * uu * ss
                            + jx * uu * rt
                            + jy * pp * vs
                            + jx * qq * vt);
                }
            }
            total += vol;
        }
    }
    let iface = flux.interface_line;
    for line in 0..n {
        let jy = mesh.my.cell(line).jacobian();
        let jx = mesh.mx.cell(line).jacobian();
        // vertical grid lines x_i in cell row `line`
        for i in 1..n {
            total -= jy * modal_dot(&u.trace_x(i - 1, line, true), &jump_x(s, i, line));
        }
        for i in 0..n {
            total -= jy * modal_dot(&p.trace_x(i, line, false), &jump_x(v, i, line));
        }
        total -= jy * modal_dot(&p.trace_x(n - 1, line, true), &jump_x(v, n, line));
        for i in [0, n] {
            total += jy * flux.lambda_x_boundary * modal_dot(&jump_x(u, i, line), &jump_x(v, i, line));
        }
        total += jy * flux.lambda_p * modal_dot(&jump_x(p, iface, line), &jump_x(s, iface, line));
        // horizontal grid lines y_j in cell column `line`
        for j in 1..n {
            total -= jx * modal_dot(&u.trace_y(line, j - 1, true), &jump_y(r, line, j));
        }
        for j in 0..n {
            total -= jx * modal_dot(&q.trace_y(line, j, false), &jump_y(v, line, j));
        }
        total -= jx * modal_dot(&q.trace_y(line, n - 1, true), &jump_y(v, line, n));
        for j in [0, n] {
            total += jx * flux.lambda_y_boundary * modal_dot(&jump_y(u, line, j), &jump_y(v, line, j));
        }
        total += jx * flux.lambda_q * modal_dot(&jump_y(q, line, iface), &jump_y(r, line, iface));
    }
    Ok(total)
}

/// `∫∫ a b` over the reference square for tensor modal coefficients.
pub(crate) fn modal_dot2(a: &[f64], b: &[f64], k: usize) -> f64 {
    let nb = k + 1;
    let mut acc = 0.0;
    for m in 0..nb {
        for n in 0..nb {
            acc += a[m * nb + n] * b[m * nb + n] * mass1(m) * mass1(n);
        }
    }
    acc
}

/// `(f, v)` with an `n_quad²`-point tensor rule per cell.
pub fn load_functional_2d(problem: &Problem2D, v: &DgFunction2D, quad_points: usize) -> Result<f64> {
    let mesh = v.mesh();
    let sampler = CellSampler::new(v.degree(), quad_points)?;
    let n = mesh.n();
    let mut total = 0.0;
    for cj in 0..n {
        for ci in 0..n {
            let (cx, cy) = (mesh.mx.cell(ci), mesh.my.cell(cj));
            let mut acc = 0.0;
            for qa in 0..sampler.nq {
                for qb in 0..sampler.nq {
                    let (x, y) = (cx.to_physical(sampler.points[qa]), cy.to_physical(sampler.points[qb]));
                    acc += sampler.weights[qa] * sampler.weights[qb] * (problem.f)(x, y) * sampler.sample(v.cell(ci, cj), qa, qb).0;
                }
            }
            total += cx.jacobian() * cy.jacobian() * acc;
        }
    }
    Ok(total)
}
