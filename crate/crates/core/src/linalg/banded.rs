//! Banded LU with row partial pivoting.
//!
//! Row `i` of the factor is stored in a window of width `2 kl + ku + 1`
//! starting at column `i - kl`; pivoting can push fill up to `kl + ku`
//! columns right of the diagonal, which the window accommodates.

use crate::error::{Error, Result};

/// A square band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// `data[i * width + (j + kl - i)]`, `width = 2 kl + ku + 1`.
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandedMatrix { n, kl, ku, data: vec![0.0; n * width] }
    }

    #[inline]
    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if !self.in_band(i, j) {
            return 0.0;
        }
        self.data[i * self.width() + (j + self.kl - i)]
    }

    /// # Panics
    /// If `(i, j)` is outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n && self.in_band(i, j), "({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + (j + self.kl - i)] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n && self.in_band(i, j), "({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + (j + self.kl - i)] += v;
    }

    pub fn from_dense(a: &[f64], n: usize) -> Self {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..n {
            for j in 0..n {
                if a[i * n + j] != 0.0 {
                    if i > j {
                        kl = kl.max(i - j);
                    } else {
                        ku = ku.max(j - i);
                    }
                }
            }
        }
        let mut m = BandedMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in 0..n {
                if a[i * n + j] != 0.0 {
                    m.set(i, j, a[i * n + j]);
                }
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Infinity norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Factorizes in place. Pivots below `1e-14` times the largest row norm are rejected.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let w = self.width();
        let tol = 1e-14 * self.norm_inf();
        let reach = kl + ku;
        let mut piv = vec![0usize; n];
        let mut mult = vec![0.0; n * kl.max(1)];
        let idx = |i: usize, j: usize| i * w + (j + kl - i);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut big = self.data[idx(k, k)].abs();
            for r in k + 1..=last_row {
                let v = self.data[idx(r, k)].abs();
                if v > big {
                    big = v;
                    p = r;
                }
            }
            if !(big > tol) {
                return Err(Error::Singular { pivot: k });
            }
            piv[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    self.data.swap(idx(k, j), idx(p, j));
                }
            }
            let d = self.data[idx(k, k)];
            for r in k + 1..=last_row {
                let m = self.data[idx(r, k)] / d;
                mult[k * kl.max(1) + (r - k - 1)] = m;
                self.data[idx(r, k)] = 0.0;
                if m != 0.0 {
                    let (src, dst) = (idx(k, k + 1), idx(r, k + 1));
                    let len = last_col - k;
                    // rows k and r are disjoint slices of `data`
                    let (a, b) = self.data.split_at_mut(dst);
                    let pivot_row = &a[src..src + len];
                    for (t, s) in b[..len].iter_mut().zip(pivot_row) {
                        *t -= m * s;
                    }
                }
            }
        }
        Ok(BandedLu { m: self, piv, mult })
    }
}

/// LU factors of a [`BandedMatrix`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
    piv: Vec<usize>,
    mult: Vec<f64>,
}

impl BandedLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.m.n;
        let (kl, ku) = (self.m.kl, self.m.ku);
        let w = self.m.width();
        let stride = kl.max(1);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            if bk != 0.0 {
                let last_row = (k + kl).min(n - 1);
                for r in k + 1..=last_row {
                    b[r] -= self.mult[k * stride + (r - k - 1)] * bk;
                }
            }
        }
        let reach = kl + ku;
        for k in (0..n).rev() {
            let row = k * w + kl;
            let last_col = (k + reach).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=last_col {
                s -= self.m.data[row + (j - k)] * b[j];
            }
            b[k] = s / self.m.data[row];
        }
    }
}

/// Solves `A x = b` for a band matrix.
pub fn lu_banded_solve(matrix: BandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != matrix.dim() {
        return Err(Error::Config("right-hand side length does not match matrix".into()));
    }
    let lu = matrix.factor()?;
    let mut x = rhs.to_vec();
    lu.solve_in_place(&mut x);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let mut m = BandedMatrix::zeros(5, 1, 1);
        for i in 0..5 {
            m.set(i, i, 1.0);
        }
        let b = [1.0, -2.0, 3.0, 0.5, 7.0];
        assert_eq!(lu_banded_solve(m, &b).unwrap(), b.to_vec());
    }

    #[test]
    fn needs_pivoting() {
        // [[0, 1], [1, 1]] x = [1, 3] -> x = [2, 1]
        let m = BandedMatrix::from_dense(&[0.0, 1.0, 1.0, 1.0], 2);
        let x = lu_banded_solve(m, &[1.0, 3.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn duplicate_rows_are_singular() {
        let m = BandedMatrix::from_dense(&[1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 0.0, 1.0, 1.0], 3);
        assert!(matches!(lu_banded_solve(m, &[1.0, 1.0, 1.0]), Err(Error::Singular { .. })));
    }
}
