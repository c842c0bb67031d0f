//! Piecewise polynomials stored as modal Legendre coefficients per cell.

use std::sync::Arc;

use crate::basis::{eval_modal, eval_modal_deriv, left_value, right_value};
use crate::mesh::{Mesh1D, Mesh2D};

/// A possibly discontinuous piecewise polynomial of degree `k` on a 1D mesh.
#[derive(Debug, Clone)]
pub struct DgFunction1D {
    mesh: Arc<Mesh1D>,
    degree: usize,
    /// `coeffs[c * (k+1) + n]`: cell `c`, Legendre mode `n`.
    coeffs: Vec<f64>,
}

impl DgFunction1D {
    pub fn zeros(mesh: Arc<Mesh1D>, degree: usize) -> Self {
        let len = mesh.n_cells() * (degree + 1);
        DgFunction1D { mesh, degree, coeffs: vec![0.0; len] }
    }

    /// # Panics
    /// If `coeffs` does not hold `N (k+1)` entries.
    pub fn from_coeffs(mesh: Arc<Mesh1D>, degree: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), mesh.n_cells() * (degree + 1), "coefficient length mismatch");
        DgFunction1D { mesh, degree, coeffs }
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_basis(&self) -> usize {
        self.degree + 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        let nb = self.degree + 1;
        &self.coeffs[c * nb..(c + 1) * nb]
    }

    pub fn cell_mut(&mut self, c: usize) -> &mut [f64] {
        let nb = self.degree + 1;
        &mut self.coeffs[c * nb..(c + 1) * nb]
    }

    /// Value in cell `c` at reference coordinate `t`.
    pub fn eval_ref(&self, c: usize, t: f64) -> f64 {
        eval_modal(self.cell(c), t)
    }

    /// Physical derivative in cell `c` at reference coordinate `t`.
    pub fn deriv_ref(&self, c: usize, t: f64) -> f64 {
        eval_modal_deriv(self.cell(c), t) / self.mesh.cell(c).jacobian()
    }

    /// Value at `x`; nodes take the value from the cell on their left.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let c = self.mesh.locate(x)?;
        Some(self.eval_ref(c, self.mesh.cell(c).to_reference(x)))
    }

    /// `v_c^-`: trace at the right end of cell `c` (0-based), i.e. at node `c + 1`.
    pub fn right_trace(&self, c: usize) -> f64 {
        right_value(self.cell(c))
    }

    /// `v_c^+`: trace at the left end of cell `c`, i.e. at node `c`.
    pub fn left_trace(&self, c: usize) -> f64 {
        left_value(self.cell(c))
    }

    /// Jump `[[v]]_i = v_i^- - v_i^+` at node `i`, with `[[v]]_0 = -v_0^+` and `[[v]]_N = v_N^-`.
    pub fn jump(&self, node: usize) -> f64 {
        let n = self.mesh.n_cells();
        let minus = if node > 0 { self.right_trace(node - 1) } else { 0.0 };
        let plus = if node < n { self.left_trace(node) } else { 0.0 };
        minus - plus
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    /// `‖v‖²` over the given cells, exact for the modal basis.
    pub fn l2_norm_sq_cells<I: IntoIterator<Item = usize>>(&self, cells: I) -> f64 {
        let nb = self.degree + 1;
        cells
            .into_iter()
            .map(|c| {
                let h = self.mesh.width(c);
                (0..nb)
                    .map(|n| self.coeffs[c * nb + n].powi(2) * h / (2 * n + 1) as f64)
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_norm_sq_cells(0..self.mesh.n_cells())
    }
}

/// A piecewise `ℚ_k` function on a tensor mesh.
#[derive(Debug, Clone)]
pub struct DgFunction2D {
    mesh: Arc<Mesh2D>,
    degree: usize,
    /// `coeffs[cell * (k+1)² + m * (k+1) + n]`: mode `P_m(s) P_n(t)`.
    coeffs: Vec<f64>,
}

impl DgFunction2D {
    pub fn zeros(mesh: Arc<Mesh2D>, degree: usize) -> Self {
        let nb = degree + 1;
        let len = mesh.n_cells() * nb * nb;
        DgFunction2D { mesh, degree, coeffs: vec![0.0; len] }
    }

    /// # Panics
    /// If `coeffs` does not hold `N² (k+1)²` entries.
    pub fn from_coeffs(mesh: Arc<Mesh2D>, degree: usize, coeffs: Vec<f64>) -> Self {
        let nb = degree + 1;
        assert_eq!(coeffs.len(), mesh.n_cells() * nb * nb, "coefficient length mismatch");
        DgFunction2D { mesh, degree, coeffs }
    }

    pub fn mesh(&self) -> &Arc<Mesh2D> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Modes per cell, `(k+1)²`.
    pub fn n_local(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn cell(&self, ci: usize, cj: usize) -> &[f64] {
        let nl = self.n_local();
        let idx = self.mesh.cell_index(ci, cj);
        &self.coeffs[idx * nl..(idx + 1) * nl]
    }

    pub fn cell_mut(&mut self, ci: usize, cj: usize) -> &mut [f64] {
        let nl = self.n_local();
        let idx = self.mesh.cell_index(ci, cj);
        &mut self.coeffs[idx * nl..(idx + 1) * nl]
    }

    /// Value in cell `(ci, cj)` at reference point `(s, t)`.
    pub fn eval_ref(&self, ci: usize, cj: usize, s: f64, t: f64) -> f64 {
        let nb = self.degree + 1;
        let c = self.cell(ci, cj);
        let mut row = vec![0.0; nb];
        for (m, r) in row.iter_mut().enumerate() {
            *r = eval_modal(&c[m * nb..(m + 1) * nb], t);
        }
        eval_modal(&row, s)
    }

    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        let ci = self.mesh.mx.locate(x)?;
        let cj = self.mesh.my.locate(y)?;
        let s = self.mesh.mx.cell(ci).to_reference(x);
        let t = self.mesh.my.cell(cj).to_reference(y);
        Some(self.eval_ref(ci, cj, s, t))
    }

    /// 1D coefficients (in `t`) of the trace on the vertical edge `s = ±1` of a cell.
    pub fn trace_x(&self, ci: usize, cj: usize, right: bool) -> Vec<f64> {
        let nb = self.degree + 1;
        let c = self.cell(ci, cj);
        (0..nb)
            .map(|n| {
                (0..nb)
                    .map(|m| {
                        let sign = if right || m % 2 == 0 { 1.0 } else { -1.0 };
                        sign * c[m * nb + n]
                    })
                    .sum()
            })
            .collect()
    }

    /// 1D coefficients (in `s`) of the trace on the horizontal edge `t = ±1`.
    pub fn trace_y(&self, ci: usize, cj: usize, top: bool) -> Vec<f64> {
        let nb = self.degree + 1;
        let c = self.cell(ci, cj);
        (0..nb)
            .map(|m| {
                (0..nb)
                    .map(|n| {
                        let sign = if top || n % 2 == 0 { 1.0 } else { -1.0 };
                        sign * c[m * nb + n]
                    })
                    .sum()
            })
            .collect()
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    /// `‖v‖²` over the listed cells.
    pub fn l2_norm_sq_cells<I: IntoIterator<Item = (usize, usize)>>(&self, cells: I) -> f64 {
        let nb = self.degree + 1;
        cells
            .into_iter()
            .map(|(ci, cj)| {
                let area = self.mesh.mx.width(ci) * self.mesh.my.width(cj);
                let c = self.cell(ci, cj);
                let mut acc = 0.0;
                for m in 0..nb {
                    for n in 0..nb {
                        acc += c[m * nb + n].powi(2) / ((2 * m + 1) * (2 * n + 1)) as f64;
                    }
                }
                acc * area
            })
            .sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let n = self.mesh.n();
        self.l2_norm_sq_cells((0..n).flat_map(|cj| (0..n).map(move |ci| (ci, cj))))
    }
}

/// `∫_{-1}^{1} a(t) b(t) dt` for two modal coefficient vectors.
pub fn modal_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(n, (x, y))| x * y * 2.0 / (2 * n + 1) as f64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_shishkin_1d, build_shishkin_2d, MeshConfig};

    #[test]
    fn traces_and_jumps() {
        let mesh = Arc::new(build_shishkin_1d(&MeshConfig::new(4, 0.5, 2.0, 1.0)).unwrap());
        // cell 0: 1 + 2t ; cell 1: -1 + t
        let mut coeffs = vec![0.0; 8];
        coeffs[0] = 1.0;
        coeffs[1] = 2.0;
        coeffs[2] = -1.0;
        coeffs[3] = 1.0;
        let v = DgFunction1D::from_coeffs(mesh, 1, coeffs);
        assert_eq!(v.left_trace(0), -1.0);
        assert_eq!(v.right_trace(0), 3.0);
        assert_eq!(v.jump(0), 1.0);
        assert_eq!(v.jump(1), 3.0 - (-2.0));
        assert_eq!(v.jump(4), 0.0);
        assert_eq!(v.eval(0.125), Some(1.0));
    }

    #[test]
    fn l2_norm_of_constant() {
        let mesh = Arc::new(build_shishkin_1d(&MeshConfig::new(8, 1e-4, 2.0, 1.0)).unwrap());
        let mut v = DgFunction1D::zeros(mesh.clone(), 2);
        for c in 0..8 {
            v.cell_mut(c)[0] = 1.0;
        }
        assert!((v.l2_norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_d_traces() {
        let mesh = Arc::new(build_shishkin_2d(&MeshConfig::new(4, 0.5, 2.0, 1.0)).unwrap());
        let mut v = DgFunction2D::zeros(mesh, 1);
        // s + 2 t + 3 s t on cell (1, 2)
        {
            let c = v.cell_mut(1, 2);
            c[2] = 1.0;
            c[1] = 2.0;
            c[3] = 3.0;
        }
        let right = v.trace_x(1, 2, true); // s = 1: 1 + 5t
        assert_eq!(right, vec![1.0, 5.0]);
        let left = v.trace_x(1, 2, false); // s = -1: -1 - t
        assert_eq!(left, vec![-1.0, -1.0]);
        let top = v.trace_y(1, 2, true); // t = 1: 2 + 4s
        assert_eq!(top, vec![2.0, 4.0]);
        assert!((v.eval_ref(1, 2, 0.5, -0.5) - (0.5 - 1.0 - 0.75)).abs() < 1e-15);
    }
}
