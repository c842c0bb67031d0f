//! Local projections onto `ℙ_k` / `ℚ_k` and the region-wise composites used
//! on Shishkin meshes.
//!
//! All one-dimensional projections are determined by `k + 1` linear
//! functionals: moments against `P_0..P_{k-1}` plus either the `k`-th moment
//! (`π`), the right endpoint value (`π⁻`) or the left endpoint value (`π⁺`).
//! The tensor versions apply one such functional set per axis.

use std::sync::Arc;

use crate::basis::{gauss_rule, legendre_all, CellMap, QuadratureRule};
use crate::dg::{DgFunction1D, DgFunction2D};
use crate::error::{Error, Result};
use crate::linalg::dense::DenseLu;
use crate::mesh::{Mesh1D, Mesh2D};

/// One-dimensional projection operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisKind {
    /// Local `L²` projection `π`.
    L2,
    /// Gauß-Radau `π⁻`: matches the value at the right endpoint.
    GrMinus,
    /// Gauß-Radau `π⁺`: matches the value at the left endpoint.
    GrPlus,
}

/// Tabulated functionals of one axis on a reference interval.
struct AxisFunctionals {
    kind: AxisKind,
    degree: usize,
    /// Reference sample points.
    samples: Vec<f64>,
    /// `weights[a * n_samples + p]`: contribution of sample `p` to functional `a`.
    weights: Vec<f64>,
}

impl AxisFunctionals {
    fn new(kind: AxisKind, degree: usize, quad: &QuadratureRule) -> Self {
        let nb = degree + 1;
        let mut samples = quad.points.clone();
        let endpoint = match kind {
            AxisKind::L2 => None,
            AxisKind::GrMinus => Some(1.0),
            AxisKind::GrPlus => Some(-1.0),
        };
        if let Some(e) = endpoint {
            samples.push(e);
        }
        let ns = samples.len();
        let mut weights = vec![0.0; nb * ns];
        let mut vals = vec![0.0; nb];
        let mut ders = vec![0.0; nb];
        for (p, (t, w)) in quad.iter().enumerate() {
            legendre_all(degree, t, &mut vals, &mut ders);
            let moments = if endpoint.is_some() { degree } else { nb };
            for a in 0..moments {
                weights[a * ns + p] = w * vals[a];
            }
        }
        if endpoint.is_some() {
            weights[degree * ns + ns - 1] = 1.0;
        }
        AxisFunctionals { kind, degree, samples, weights }
    }

    fn n_samples(&self) -> usize {
        self.samples.len()
    }

    /// Turns functional values into modal coefficients, in place.
    fn solve(&self, ell: &mut [f64]) {
        let k = self.degree;
        match self.kind {
            AxisKind::L2 => {
                for (n, v) in ell.iter_mut().enumerate() {
                    *v *= (2 * n + 1) as f64 / 2.0;
                }
            }
            AxisKind::GrMinus => {
                let mut sum = 0.0;
                for n in 0..k {
                    ell[n] *= (2 * n + 1) as f64 / 2.0;
                    sum += ell[n];
                }
                ell[k] -= sum;
            }
            AxisKind::GrPlus => {
                let mut sum = 0.0;
                for n in 0..k {
                    ell[n] *= (2 * n + 1) as f64 / 2.0;
                    sum += if n % 2 == 0 { ell[n] } else { -ell[n] };
                }
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                ell[k] = sign * (ell[k] - sum);
            }
        }
    }
}

fn check_degree(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("projections need k >= 1".into()));
    }
    Ok(())
}

/// Projects `w` on one cell with the chosen axis operator, using an
/// `n_quad`-point Gauss rule for the moments.
pub fn project_axis<F: Fn(f64) -> f64 + ?Sized>(
    kind: AxisKind,
    w: &F,
    cell: CellMap,
    k: usize,
    quad: &QuadratureRule,
) -> Result<Vec<f64>> {
    check_degree(k)?;
    let f = AxisFunctionals::new(kind, k, quad);
    let ns = f.n_samples();
    let z: Vec<f64> = f.samples.iter().map(|&t| w(cell.to_physical(t))).collect();
    let mut ell: Vec<f64> = (0..=k)
        .map(|a| (0..ns).map(|p| f.weights[a * ns + p] * z[p]).sum())
        .collect();
    f.solve(&mut ell);
    Ok(ell)
}

/// Local `L²` projection `π`.
pub fn project_l2<F: Fn(f64) -> f64 + ?Sized>(w: &F, cell: CellMap, k: usize, quad: &QuadratureRule) -> Result<Vec<f64>> {
    project_axis(AxisKind::L2, w, cell, k, quad)
}

/// Gauß-Radau projection `π⁻`.
pub fn project_gr_minus<F: Fn(f64) -> f64 + ?Sized>(w: &F, cell: CellMap, k: usize, quad: &QuadratureRule) -> Result<Vec<f64>> {
    project_axis(AxisKind::GrMinus, w, cell, k, quad)
}

/// Gauß-Radau projection `π⁺`.
pub fn project_gr_plus<F: Fn(f64) -> f64 + ?Sized>(w: &F, cell: CellMap, k: usize, quad: &QuadratureRule) -> Result<Vec<f64>> {
    project_axis(AxisKind::GrPlus, w, cell, k, quad)
}

/// Weighted local `L²` projection `π_b`: `⟨b(π_b w - w), v⟩ = 0` on `ℙ_k`.
pub fn project_weighted<F, B>(w: &F, b: &B, cell: CellMap, k: usize, quad: &QuadratureRule) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64 + ?Sized,
    B: Fn(f64) -> f64 + ?Sized,
{
    check_degree(k)?;
    let nb = k + 1;
    let mut gram = vec![0.0; nb * nb];
    let mut rhs = vec![0.0; nb];
    let mut vals = vec![0.0; nb];
    let mut ders = vec![0.0; nb];
    for (t, wq) in quad.iter() {
        let x = cell.to_physical(t);
        let bx = b(x);
        if !(bx > 0.0) {
            return Err(Error::Projection(format!("weight must be positive, b({x}) = {bx}")));
        }
        let wx = w(x);
        legendre_all(k, t, &mut vals, &mut ders);
        for m in 0..nb {
            rhs[m] += wq * bx * wx * vals[m];
            for n in 0..nb {
                gram[m * nb + n] += wq * bx * vals[m] * vals[n];
            }
        }
    }
    let lu = DenseLu::factor(gram, nb).map_err(|_| Error::Projection("weighted Gram matrix is singular".into()))?;
    lu.solve_in_place(&mut rhs);
    Ok(rhs)
}

/// Two-dimensional projection operators on a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind2D {
    /// Tensor operator, one axis kind per direction.
    Tensor(AxisKind, AxisKind),
    /// Weighted local `L²` projection `Π_b`.
    Weighted,
}

impl Kind2D {
    /// `Π`
    pub const L2: Kind2D = Kind2D::Tensor(AxisKind::L2, AxisKind::L2);
    /// `Π_x⁻`: moments against `ℚ_{k-1,k}` plus the right-edge trace.
    pub const X_MINUS: Kind2D = Kind2D::Tensor(AxisKind::GrMinus, AxisKind::L2);
    /// `Π_y⁻`
    pub const Y_MINUS: Kind2D = Kind2D::Tensor(AxisKind::L2, AxisKind::GrMinus);
    /// `Π_x⁺`
    pub const X_PLUS: Kind2D = Kind2D::Tensor(AxisKind::GrPlus, AxisKind::L2);
    /// `Π_y⁺`
    pub const Y_PLUS: Kind2D = Kind2D::Tensor(AxisKind::L2, AxisKind::GrPlus);
}

/// Tensor projection of `z` on the cell `cx × cy` with per-axis kinds.
pub fn tensor_project_2d<Z: Fn(f64, f64) -> f64 + ?Sized>(
    kind_x: AxisKind,
    kind_y: AxisKind,
    z: &Z,
    cx: CellMap,
    cy: CellMap,
    k: usize,
    quad: &QuadratureRule,
) -> Result<Vec<f64>> {
    check_degree(k)?;
    let nb = k + 1;
    let fx = AxisFunctionals::new(kind_x, k, quad);
    let fy = AxisFunctionals::new(kind_y, k, quad);
    let (nsx, nsy) = (fx.n_samples(), fy.n_samples());
    // Z_{pq} at the sample grid.
    let mut zs = vec![0.0; nsx * nsy];
    for (p, &s) in fx.samples.iter().enumerate() {
        let x = cx.to_physical(s);
        for (q, &t) in fy.samples.iter().enumerate() {
            zs[p * nsy + q] = z(x, cy.to_physical(t));
        }
    }
    // Apply y-functionals: T_{p b} = Σ_q Fy_{bq} Z_{pq}, then solve along y.
    let mut tmp = vec![0.0; nsx * nb];
    for p in 0..nsx {
        let row = &mut tmp[p * nb..(p + 1) * nb];
        for (bidx, r) in row.iter_mut().enumerate() {
            *r = (0..nsy).map(|q| fy.weights[bidx * nsy + q] * zs[p * nsy + q]).sum();
        }
        fy.solve(row);
    }
    // Apply x-functionals and solve along x, column by column.
    let mut coeffs = vec![0.0; nb * nb];
    let mut col = vec![0.0; nb];
    for n in 0..nb {
        for (a, c) in col.iter_mut().enumerate() {
            *c = (0..nsx).map(|p| fx.weights[a * nsx + p] * tmp[p * nb + n]).sum();
        }
        fx.solve(&mut col);
        for m in 0..nb {
            coeffs[m * nb + n] = col[m];
        }
    }
    Ok(coeffs)
}

/// Weighted projection `Π_b` on `cx × cy`.
pub fn weighted_project_2d<Z, B>(z: &Z, b: &B, cx: CellMap, cy: CellMap, k: usize, quad: &QuadratureRule) -> Result<Vec<f64>>
where
    Z: Fn(f64, f64) -> f64 + ?Sized,
    B: Fn(f64, f64) -> f64 + ?Sized,
{
    check_degree(k)?;
    let nb = k + 1;
    let nl = nb * nb;
    let nq = quad.len();
    let mut tab = vec![0.0; nq * nb];
    let mut ders = vec![0.0; nb];
    for (q, &t) in quad.points.iter().enumerate() {
        legendre_all(k, t, &mut tab[q * nb..(q + 1) * nb], &mut ders);
    }
    let mut gram = vec![0.0; nl * nl];
    let mut rhs = vec![0.0; nl];
    let mut phi = vec![0.0; nl];
    for p in 0..nq {
        let x = cx.to_physical(quad.points[p]);
        for q in 0..nq {
            let y = cy.to_physical(quad.points[q]);
            let w = quad.weights[p] * quad.weights[q];
            let bxy = b(x, y);
            if !(bxy > 0.0) {
                return Err(Error::Projection(format!("weight must be positive, b({x}, {y}) = {bxy}")));
            }
            let zxy = z(x, y);
            for m in 0..nb {
                for n in 0..nb {
                    phi[m * nb + n] = tab[p * nb + m] * tab[q * nb + n];
                }
            }
            for a in 0..nl {
                rhs[a] += w * bxy * zxy * phi[a];
                for c in 0..nl {
                    gram[a * nl + c] += w * bxy * phi[a] * phi[c];
                }
            }
        }
    }
    let lu = DenseLu::factor(gram, nl).map_err(|_| Error::Projection("weighted Gram matrix is singular".into()))?;
    lu.solve_in_place(&mut rhs);
    Ok(rhs)
}

/// Projection of `z` on one cell with a [`Kind2D`].
pub fn project_2d<Z, B>(kind: Kind2D, z: &Z, b: &B, cx: CellMap, cy: CellMap, k: usize, quad: &QuadratureRule) -> Result<Vec<f64>>
where
    Z: Fn(f64, f64) -> f64 + ?Sized,
    B: Fn(f64, f64) -> f64 + ?Sized,
{
    match kind {
        Kind2D::Tensor(kx, ky) => tensor_project_2d(kx, ky, z, cx, cy, k, quad),
        Kind2D::Weighted => weighted_project_2d(z, b, cx, cy, k, quad),
    }
}

/// Operator used by `P_N⁻` on the 1-based cell `i`: `π⁻` in the layer
/// regions, `π_b` on `N/4 < i ≤ 3N/4`.
pub fn p_minus_kind_1d(i: usize, n: usize) -> ProjectionKind1D {
    if i > n / 4 && i <= 3 * n / 4 {
        ProjectionKind1D::Weighted
    } else {
        ProjectionKind1D::Axis(AxisKind::GrMinus)
    }
}

/// Operator used by `P_N⁺` on the 1-based cell `i`: `π` on the first cell, `π⁺` elsewhere.
pub fn p_plus_kind_1d(i: usize) -> ProjectionKind1D {
    if i == 1 {
        ProjectionKind1D::Axis(AxisKind::L2)
    } else {
        ProjectionKind1D::Axis(AxisKind::GrPlus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind1D {
    Axis(AxisKind),
    Weighted,
}

/// Default number of Gauss points for projections of degree `k`.
pub fn default_quad_points(k: usize) -> usize {
    k + 3
}

fn composite_1d<F, B, K>(w: &F, b: &B, mesh: &Arc<Mesh1D>, k: usize, n_quad: usize, kind_of: K) -> Result<DgFunction1D>
where
    F: Fn(f64) -> f64 + ?Sized,
    B: Fn(f64) -> f64 + ?Sized,
    K: Fn(usize) -> ProjectionKind1D,
{
    check_degree(k)?;
    let quad = gauss_rule(n_quad)?;
    let mut out = DgFunction1D::zeros(mesh.clone(), k);
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell(c);
        let coeffs = match kind_of(c + 1) {
            ProjectionKind1D::Axis(kind) => project_axis(kind, w, cell, k, &quad)?,
            ProjectionKind1D::Weighted => project_weighted(w, b, cell, k, &quad)?,
        };
        out.cell_mut(c).copy_from_slice(&coeffs);
    }
    Ok(out)
}

/// `P_N⁻ u`: `π⁻` on the fine cells, `π_b` on the coarse cells.
pub fn composite_p_minus_1d<F, B>(u: &F, b: &B, mesh: &Arc<Mesh1D>, k: usize, n_quad: usize) -> Result<DgFunction1D>
where
    F: Fn(f64) -> f64 + ?Sized,
    B: Fn(f64) -> f64 + ?Sized,
{
    let n = mesh.n_cells();
    composite_1d(u, b, mesh, k, n_quad, |i| p_minus_kind_1d(i, n))
}

/// `P_N⁺ q`: `π` on the first cell, `π⁺` on the rest.
pub fn composite_p_plus_1d<F>(q: &F, mesh: &Arc<Mesh1D>, k: usize, n_quad: usize) -> Result<DgFunction1D>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    composite_1d(q, &|_| 1.0, mesh, k, n_quad, p_plus_kind_1d)
}

/// Projects `w` cellwise with a single 1D operator.
pub fn project_all_1d<F, B>(kind: ProjectionKind1D, w: &F, b: &B, mesh: &Arc<Mesh1D>, k: usize, n_quad: usize) -> Result<DgFunction1D>
where
    F: Fn(f64) -> f64 + ?Sized,
    B: Fn(f64) -> f64 + ?Sized,
{
    composite_1d(w, b, mesh, k, n_quad, |_| kind)
}

fn in_layer(i: usize, n: usize) -> bool {
    // 1..=N/4 or 3N/4+1..=N-1, as in the region tables of P⁻.
    i <= n / 4 || (i > 3 * n / 4 && i < n)
}

fn in_middle(i: usize, n: usize) -> bool {
    i > n / 4 && i <= 3 * n / 4
}

/// Operator of `P⁻` on the 1-based cell `(i, j)`.
pub fn p_minus_kind_2d(i: usize, j: usize, n: usize) -> Kind2D {
    if in_layer(i, n) && in_middle(j, n) {
        Kind2D::X_MINUS
    } else if in_middle(i, n) && in_layer(j, n) {
        Kind2D::Y_MINUS
    } else {
        Kind2D::Weighted
    }
}

/// Operator of `P_x⁺` on the 1-based cell `(i, j)`.
pub fn px_plus_kind_2d(i: usize, _j: usize) -> Kind2D {
    if i == 1 {
        Kind2D::L2
    } else {
        Kind2D::X_PLUS
    }
}

/// Operator of `P_y⁺` on the 1-based cell `(i, j)`.
pub fn py_plus_kind_2d(_i: usize, j: usize) -> Kind2D {
    if j == 1 {
        Kind2D::L2
    } else {
        Kind2D::Y_PLUS
    }
}

fn composite_2d<Z, B, K>(z: &Z, b: &B, mesh: &Arc<Mesh2D>, k: usize, n_quad: usize, kind_of: K) -> Result<DgFunction2D>
where
    Z: Fn(f64, f64) -> f64 + ?Sized,
    B: Fn(f64, f64) -> f64 + ?Sized,
    K: Fn(usize, usize) -> Kind2D,
{
    check_degree(k)?;
    let quad = gauss_rule(n_quad)?;
    let n = mesh.n();
    let mut out = DgFunction2D::zeros(mesh.clone(), k);
    for cj in 0..n {
        for ci in 0..n {
            let coeffs = project_2d(kind_of(ci + 1, cj + 1), z, b, mesh.mx.cell(ci), mesh.my.cell(cj), k, &quad)?;
            out.cell_mut(ci, cj).copy_from_slice(&coeffs);
        }
    }
    Ok(out)
}

/// `P⁻ u` on the tensor Shishkin mesh.
pub fn composite_p_minus_2d<Z, B>(u: &Z, b: &B, mesh: &Arc<Mesh2D>, k: usize, n_quad: usize) -> Result<DgFunction2D>
where
    Z: Fn(f64, f64) -> f64 + ?Sized,
    B: Fn(f64, f64) -> f64 + ?Sized,
{
    let n = mesh.n();
    composite_2d(u, b, mesh, k, n_quad, |i, j| p_minus_kind_2d(i, j, n))
}

/// `P_x⁺ p`.
pub fn composite_px_plus_2d<Z>(p: &Z, mesh: &Arc<Mesh2D>, k: usize, n_quad: usize) -> Result<DgFunction2D>
where
    Z: Fn(f64, f64) -> f64 + ?Sized,
{
    composite_2d(p, &|_, _| 1.0, mesh, k, n_quad, px_plus_kind_2d)
}

/// `P_y⁺ q`.
pub fn composite_py_plus_2d<Z>(q: &Z, mesh: &Arc<Mesh2D>, k: usize, n_quad: usize) -> Result<DgFunction2D>
where
    Z: Fn(f64, f64) -> f64 + ?Sized,
{
    composite_2d(q, &|_, _| 1.0, mesh, k, n_quad, py_plus_kind_2d)
}

/// Projects `z` cellwise with a single 2D operator.
pub fn project_all_2d<Z, B>(kind: Kind2D, z: &Z, b: &B, mesh: &Arc<Mesh2D>, k: usize, n_quad: usize) -> Result<DgFunction2D>
where
    Z: Fn(f64, f64) -> f64 + ?Sized,
    B: Fn(f64, f64) -> f64 + ?Sized,
{
    composite_2d(z, b, mesh, k, n_quad, |_, _| kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eval_modal;

    fn unit() -> CellMap {
        CellMap::new(0.0, 1.0).unwrap()
    }

    fn to_monomial_k1(c: &[f64]) -> (f64, f64) {
        // c0 + c1 (2x - 1)
        (c[0] - c[1], 2.0 * c[1])
    }

    #[test]
    fn l2_of_square_on_unit_interval() {
        let q = gauss_rule(4).unwrap();
        let c = project_l2(&|x: f64| x * x, unit(), 1, &q).unwrap();
        let (a0, a1) = to_monomial_k1(&c);
        assert!((a0 + 1.0 / 6.0).abs() < 1e-15);
        assert!((a1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_projects_to_zero() {
        let q = gauss_rule(4).unwrap();
        for kind in [AxisKind::L2, AxisKind::GrMinus, AxisKind::GrPlus] {
            let c = project_axis(kind, &|_| 0.0, unit(), 3, &q).unwrap();
            assert!(c.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn gr_minus_of_square() {
        let q = gauss_rule(4).unwrap();
        let c = project_gr_minus(&|x: f64| x * x, unit(), 1, &q).unwrap();
        let (a0, a1) = to_monomial_k1(&c);
        assert!((a0 + 1.0 / 3.0).abs() < 1e-15);
        assert!((a1 - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gr_plus_of_square() {
        let q = gauss_rule(4).unwrap();
        let c = project_gr_plus(&|x: f64| x * x, unit(), 1, &q).unwrap();
        assert!(eval_modal(&c, -1.0).abs() < 1e-15);
        // mean of x² is 1/3
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_with_unit_weight_is_l2() {
        let q = gauss_rule(6).unwrap();
        let cell = CellMap::new(0.2, 0.7).unwrap();
        let w = |x: f64| (3.0 * x).sin() + x.powi(5);
        let a = project_l2(&w, cell, 3, &q).unwrap();
        let b = project_weighted(&w, &|_| 1.0, cell, 3, &q).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn weighted_rejects_bad_weight() {
        let q = gauss_rule(4).unwrap();
        let r = project_weighted(&|x: f64| x, &|x: f64| x - 0.5, unit(), 1, &q);
        assert!(matches!(r, Err(Error::Projection(_))));
    }

    #[test]
    fn p_minus_dispatch() {
        let n = 32;
        assert_eq!(p_minus_kind_1d(8, n), ProjectionKind1D::Axis(AxisKind::GrMinus));
        assert_eq!(p_minus_kind_1d(9, n), ProjectionKind1D::Weighted);
        assert_eq!(p_minus_kind_1d(24, n), ProjectionKind1D::Weighted);
        assert_eq!(p_minus_kind_1d(25, n), ProjectionKind1D::Axis(AxisKind::GrMinus));
        assert_eq!(p_plus_kind_1d(1), ProjectionKind1D::Axis(AxisKind::L2));
        assert_eq!(p_plus_kind_1d(2), ProjectionKind1D::Axis(AxisKind::GrPlus));
    }

    #[test]
    fn p_minus_dispatch_2d() {
        let n = 16;
        assert_eq!(p_minus_kind_2d(1, n / 2, n), Kind2D::X_MINUS);
        assert_eq!(p_minus_kind_2d(n / 2, 1, n), Kind2D::Y_MINUS);
        assert_eq!(p_minus_kind_2d(1, 1, n), Kind2D::Weighted);
        assert_eq!(p_minus_kind_2d(n / 2, n / 2, n), Kind2D::Weighted);
        // the last column is left to Π_b by the printed index ranges
        assert_eq!(p_minus_kind_2d(n, n / 2, n), Kind2D::Weighted);
        assert_eq!(p_minus_kind_2d(n - 1, n / 2, n), Kind2D::X_MINUS);
        assert_eq!(px_plus_kind_2d(1, 5), Kind2D::L2);
        assert_eq!(px_plus_kind_2d(2, 1), Kind2D::X_PLUS);
        assert_eq!(py_plus_kind_2d(5, 1), Kind2D::L2);
        assert_eq!(py_plus_kind_2d(1, 2), Kind2D::Y_PLUS);
    }

    #[test]
    fn degree_zero_rejected() {
        let q = gauss_rule(2).unwrap();
        assert!(project_l2(&|x: f64| x, unit(), 0, &q).is_err());
    }
}
