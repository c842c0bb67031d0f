//! Energy and balanced norms of discrete functions and of discretization
//! errors, plus the Shishkin convergence rate.

use crate::basis::{eval_modal, gauss_rule};
use crate::dg::modal_dot;
use crate::error::Result;
use crate::ldg1d::{weighted_product, FluxParams, MixedSolution1D};
use crate::ldg2d::{jump_x, jump_y, modal_dot2, CellSampler, FluxParams2D, MixedSolution2D};
use crate::problem::{Problem1D, Problem2D};

/// Squared contributions of a norm, grouped by kind.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormBreakdown {
    pub q_term: f64,
    pub u_term: f64,
    pub boundary_jump_term: f64,
    pub interface_jump_term: f64,
    /// Square root of the sum of the four terms.
    pub total: f64,
}

impl NormBreakdown {
    pub fn from_terms(q_term: f64, u_term: f64, boundary_jump_term: f64, interface_jump_term: f64) -> Self {
        let total = pairwise_sum(&[q_term, u_term, boundary_jump_term, interface_jump_term]).sqrt();
        NormBreakdown { q_term, u_term, boundary_jump_term, interface_jump_term, total }
    }

    pub fn total_sq(&self) -> f64 {
        pairwise_sum(&[self.q_term, self.u_term, self.boundary_jump_term, self.interface_jump_term])
    }
}

/// Pairwise summation; result is independent of thread scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Raw squared pieces shared by both 1D norms.
struct Pieces1D {
    q_sq: f64,
    bu_sq: f64,
    /// `[[u]]_0²` and `[[u]]_N²`.
    bnd: [f64; 2],
    iface_sq: f64,
}

fn discrete_pieces(v: &MixedSolution1D, problem: &Problem1D, quad_points: usize) -> Result<Pieces1D> {
    let mesh = v.mesh();
    let n = mesh.n_cells();
    let quad = gauss_rule(quad_points)?;
    let mut q_cells = Vec::with_capacity(n);
    let mut u_cells = Vec::with_capacity(n);
    for c in 0..n {
        let cell = mesh.cell(c);
        q_cells.push(cell.jacobian() * modal_dot(v.q.cell(c), v.q.cell(c)));
        u_cells.push(cell.jacobian() * weighted_product(&quad, cell.a, cell.b, problem.b.as_ref(), v.u.cell(c), v.u.cell(c)));
    }
    let iface = 3 * n / 4;
    Ok(Pieces1D {
        q_sq: pairwise_sum(&q_cells),
        bu_sq: pairwise_sum(&u_cells),
        bnd: [v.u.jump(0).powi(2), v.u.jump(n).powi(2)],
        iface_sq: v.q.jump(iface).powi(2),
    })
}

fn energy_from(p: &Pieces1D, eps: f64, n: usize) -> NormBreakdown {
    let f = FluxParams::new(eps, n);
    NormBreakdown::from_terms(
        p.q_sq / eps,
        p.bu_sq,
        f.lambda_0 * p.bnd[0] + f.lambda_n * p.bnd[1],
        f.lambda_q * p.iface_sq,
    )
}

fn balanced_from(p: &Pieces1D, eps: f64) -> NormBreakdown {
    NormBreakdown::from_terms(p.q_sq / (eps * eps.sqrt()), p.bu_sq, p.bnd[0] + p.bnd[1], p.iface_sq / eps)
}

/// `|||V|||_E² = ε⁻¹‖Q‖² + ‖b^½U‖² + λ_0[[U]]_0² + λ_N[[U]]_N² + λ_q[[Q]]²` at the interface node.
pub fn energy_norm_1d(v: &MixedSolution1D, problem: &Problem1D, quad_points: usize) -> Result<NormBreakdown> {
    let p = discrete_pieces(v, problem, quad_points)?;
    Ok(energy_from(&p, problem.eps, v.mesh().n_cells()))
}

/// `|||V|||_B² = ε^{-3/2}‖Q‖² + ‖b^½U‖² + [[U]]_0² + [[U]]_N² + ε⁻¹[[Q]]²` at the interface node.
pub fn balanced_norm_1d(v: &MixedSolution1D, problem: &Problem1D, quad_points: usize) -> Result<NormBreakdown> {
    let p = discrete_pieces(v, problem, quad_points)?;
    Ok(balanced_from(&p, problem.eps))
}

/// Default error quadrature: `2(k + 2)` points per cell.
pub fn default_error_quad(k: usize) -> usize {
    2 * (k + 2)
}

/// Energy and balanced norms of `(q - Q, u - U)`.
///
/// The exact solution is continuous with zero boundary values, so its jumps
/// drop out and only the discrete traces enter the jump terms.
pub fn error_norms_1d(
    w: &MixedSolution1D,
    problem: &Problem1D,
    quad_points: usize,
) -> Result<(NormBreakdown, NormBreakdown)> {
    let u = problem.exact_u()?;
    let du = problem.exact_du()?;
    let mesh = w.mesh();
    let n = mesh.n_cells();
    let quad = gauss_rule(quad_points)?;
    let eps = problem.eps;
    let mut q_cells = Vec::with_capacity(n);
    let mut u_cells = Vec::with_capacity(n);
    for c in 0..n {
        let cell = mesh.cell(c);
        let (qc, uc) = (w.q.cell(c), w.u.cell(c));
        let (mut sq, mut su) = (0.0, 0.0);
        for (t, wq) in quad.iter() {
            let x = cell.to_physical(t);
            let eq = eps * du(x) - eval_modal(qc, t);
            let eu = u(x) - eval_modal(uc, t);
            sq += wq * eq * eq;
            su += wq * (problem.b)(x) * eu * eu;
        }
        q_cells.push(cell.jacobian() * sq);
        u_cells.push(cell.jacobian() * su);
    }
    let iface = 3 * n / 4;
    let p = Pieces1D {
        q_sq: pairwise_sum(&q_cells),
        bu_sq: pairwise_sum(&u_cells),
        bnd: [w.u.left_trace(0).powi(2), w.u.right_trace(n - 1).powi(2)],
        iface_sq: w.q.jump(iface).powi(2),
    };
    Ok((energy_from(&p, eps, n), balanced_from(&p, eps)))
}

/// Raw squared pieces shared by both 2D norms.
struct Pieces2D {
    flux_sq: f64,
    bu_sq: f64,
    bnd_sq: f64,
    iface_sq: f64,
}

/// Boundary `∫[[U]]²` over the four sides and the two interface integrals
/// `∫[[P]]²` on `x = x_{3N/4}`, `∫[[Q]]²` on `y = y_{3N/4}`.
fn jump_pieces(v: &MixedSolution2D) -> (f64, f64) {
    let mesh = v.mesh();
    let n = mesh.n();
    let iface = 3 * n / 4;
    let mut bnd = Vec::with_capacity(4 * n);
    let mut ifc = Vec::with_capacity(2 * n);
    for line in 0..n {
        let jy = mesh.my.cell(line).jacobian();
        let jx = mesh.mx.cell(line).jacobian();
        for i in [0, n] {
            let j = jump_x(&v.u, i, line);
            bnd.push(jy * modal_dot(&j, &j));
            let j = jump_y(&v.u, line, i);
            bnd.push(jx * modal_dot(&j, &j));
        }
        let j = jump_x(&v.p, iface, line);
        ifc.push(jy * modal_dot(&j, &j));
        let j = jump_y(&v.q, line, iface);
        ifc.push(jx * modal_dot(&j, &j));
    }
    (pairwise_sum(&bnd), pairwise_sum(&ifc))
}

fn discrete_pieces_2d(v: &MixedSolution2D, problem: &Problem2D, quad_points: usize) -> Result<Pieces2D> {
    let mesh = v.mesh();
    let n = mesh.n();
    let k = v.degree();
    let sampler = CellSampler::new(k, quad_points)?;
    let mut flux = Vec::with_capacity(n * n);
    let mut bu = Vec::with_capacity(n * n);
    for cj in 0..n {
        for ci in 0..n {
            let (cx, cy) = (mesh.mx.cell(ci), mesh.my.cell(cj));
            let area = cx.jacobian() * cy.jacobian();
            let (p, q) = (v.p.cell(ci, cj), v.q.cell(ci, cj));
            flux.push(area * (modal_dot2(p, p, k) + modal_dot2(q, q, k)));
            let mut acc = 0.0;
            for qa in 0..sampler.nq {
                for qb in 0..sampler.nq {
                    let (x, y) = (cx.to_physical(sampler.points[qa]), cy.to_physical(sampler.points[qb]));
                    let uu = sampler.sample(v.u.cell(ci, cj), qa, qb).0;
                    acc += sampler.weights[qa] * sampler.weights[qb] * (problem.b)(x, y) * uu * uu;
                }
            }
            bu.push(area * acc);
        }
    }
    let (bnd_sq, iface_sq) = jump_pieces(v);
    Ok(Pieces2D { flux_sq: pairwise_sum(&flux), bu_sq: pairwise_sum(&bu), bnd_sq, iface_sq })
}

fn energy_from_2d(p: &Pieces2D, eps: f64, n: usize) -> NormBreakdown {
    let f = FluxParams2D::new(eps, n);
    // both boundary penalties and both interface penalties coincide
    NormBreakdown::from_terms(p.flux_sq / eps, p.bu_sq, f.lambda_x_boundary * p.bnd_sq, f.lambda_p * p.iface_sq)
}

fn balanced_from_2d(p: &Pieces2D, eps: f64) -> NormBreakdown {
    NormBreakdown::from_terms(p.flux_sq / (eps * eps.sqrt()), p.bu_sq, p.bnd_sq, p.iface_sq / eps)
}

/// 2D energy norm; `q_term` holds `ε⁻¹(‖P‖² + ‖Q‖²)`.
pub fn energy_norm_2d(v: &MixedSolution2D, problem: &Problem2D, quad_points: usize) -> Result<NormBreakdown> {
    let p = discrete_pieces_2d(v, problem, quad_points)?;
    Ok(energy_from_2d(&p, problem.eps, v.mesh().n()))
}

/// 2D balanced norm; `q_term` holds `ε^{-3/2}(‖P‖² + ‖Q‖²)`.
pub fn balanced_norm_2d(v: &MixedSolution2D, problem: &Problem2D, quad_points: usize) -> Result<NormBreakdown> {
    let p = discrete_pieces_2d(v, problem, quad_points)?;
    Ok(balanced_from_2d(&p, problem.eps))
}

/// Energy and balanced norms of `(u - U, p - P, q - Q)` with an
/// `n_quad × n_quad` rule per cell.
pub fn error_norms_2d(
    t: &MixedSolution2D,
    problem: &Problem2D,
    quad_points: usize,
) -> Result<(NormBreakdown, NormBreakdown)> {
    let (u, ux, uy) = problem.exact_handles()?;
    let mesh = t.mesh();
    let n = mesh.n();
    let sampler = CellSampler::new(t.degree(), quad_points)?;
    let eps = problem.eps;
    let cells: Vec<(f64, f64)> = (0..n * n)
        .map(|c| {
            let (ci, cj) = (c % n, c / n);
            let (cx, cy) = (mesh.mx.cell(ci), mesh.my.cell(cj));
            let (mut sf, mut su) = (0.0, 0.0);
            for qa in 0..sampler.nq {
                let x = cx.to_physical(sampler.points[qa]);
                for qb in 0..sampler.nq {
                    let y = cy.to_physical(sampler.points[qb]);
                    let w = sampler.weights[qa] * sampler.weights[qb];
                    let ep = eps * ux(x, y) - sampler.sample(t.p.cell(ci, cj), qa, qb).0;
                    let eq = eps * uy(x, y) - sampler.sample(t.q.cell(ci, cj), qa, qb).0;
                    let eu = u(x, y) - sampler.sample(t.u.cell(ci, cj), qa, qb).0;
                    sf += w * (ep * ep + eq * eq);
                    su += w * (problem.b)(x, y) * eu * eu;
                }
            }
            let area = cx.jacobian() * cy.jacobian();
            (area * sf, area * su)
        })
        .collect();
    let flux: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let bu: Vec<f64> = cells.iter().map(|c| c.1).collect();
    // exact jumps vanish, so the error jumps are the discrete ones up to sign
    let (bnd_sq, iface_sq) = jump_pieces(t);
    let p = Pieces2D { flux_sq: pairwise_sum(&flux), bu_sq: pairwise_sum(&bu), bnd_sq, iface_sq };
    Ok((energy_from_2d(&p, eps, n), balanced_from_2d(&p, eps)))
}

/// Shishkin rate `(ln e_N - ln e_2N) / ln(2 ln N / ln 2N)`; `None` for
/// nonpositive errors or `N < 2`.
pub fn rate_shishkin(e_n: f64, e_2n: f64, n: usize) -> Option<f64> {
    if !(e_n > 0.0 && e_2n > 0.0) || n < 2 || !e_n.is_finite() || !e_2n.is_finite() {
        return None;
    }
    let nf = n as f64;
    Some((e_n.ln() - e_2n.ln()) / (2.0 * nf.ln() / (2.0 * nf).ln()).ln())
}

/// Errors of one run with rates towards the next `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub k: usize,
    pub n: usize,
    pub eps: f64,
    pub error_e: f64,
    pub error_b: f64,
    pub rate_e: Option<f64>,
    pub rate_b: Option<f64>,
}
