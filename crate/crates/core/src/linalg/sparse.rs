//! Compressed-row matrices, equilibration, bandwidth-reducing ordering and
//! the sparse direct solve built on the banded factorization.

use std::collections::{BTreeMap, VecDeque};

use super::banded::BandedMatrix;
use crate::error::{Error, Result};

/// Square matrix in compressed row storage with sorted, unique column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    n: usize,
    rows: Vec<BTreeMap<usize, f64>>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        TripletBuilder { n, rows: vec![BTreeMap::new(); n] }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        if v != 0.0 {
            *self.rows[i].entry(j).or_insert(0.0) += v;
        }
    }

    pub fn build(self) -> SparseMatrix {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in self.rows {
            for (j, v) in row {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix { n: self.n, row_ptr, col_idx, values }
    }
}

impl SparseMatrix {
    pub fn identity(n: usize) -> Self {
        SparseMatrix { n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn from_dense(a: &[f64], n: usize) -> Self {
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            for j in 0..n {
                b.add(i, j, a[i * n + j]);
            }
        }
        b.build()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(pos) => self.values[r.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[i * self.n + j] = v;
            }
        }
        a
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `(lower, upper)` bandwidths under the given symmetric permutation
    /// (`perm[new] = old`), or the natural ordering when `None`.
    pub fn bandwidths(&self, perm: Option<&[usize]>) -> (usize, usize) {
        let inv = perm.map(invert);
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                let (pi, pj) = match &inv {
                    Some(inv) => (inv[i], inv[j]),
                    None => (i, j),
                };
                if pi > pj {
                    kl = kl.max(pi - pj);
                } else {
                    ku = ku.max(pj - pi);
                }
            }
        }
        (kl, ku)
    }

    /// Scales rows and columns in place: `a_ij <- r_i a_ij c_j`.
    pub fn scale(&mut self, rows: &[f64], cols: &[f64]) {
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                self.values[p] *= rows[i] * cols[self.col_idx[p]];
            }
        }
    }

    /// Copies into band storage under the permutation `perm[new] = old`.
    pub fn to_banded(&self, perm: Option<&[usize]>) -> BandedMatrix {
        let (kl, ku) = self.bandwidths(perm);
        let mut b = BandedMatrix::zeros(self.n, kl, ku);
        match perm {
            None => {
                for i in 0..self.n {
                    for (j, v) in self.row(i) {
                        b.set(i, j, v);
                    }
                }
            }
            Some(p) => {
                let inv = invert(p);
                for i in 0..self.n {
                    for (j, v) in self.row(i) {
                        b.set(inv[i], inv[j], v);
                    }
                }
            }
        }
        b
    }

    /// Submatrix on the given rows and columns (index lists into `self`).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in cols.iter().enumerate() {
            map[old] = new;
        }
        let mut b = TripletBuilder::new(rows.len().max(cols.len()));
        for (ni, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if map[j] != usize::MAX {
                    b.add(ni, map[j], v);
                }
            }
        }
        b.build()
    }

    /// Schur complement over the unknowns `elim`, whose diagonal block must be diagonal:
    /// `S = A_RR - A_RE D⁻¹ A_ER` and `g = b_R - A_RE D⁻¹ b_E`.
    ///
    /// Returns the reduced matrix and rhs, with retained unknowns in increasing order.
    pub fn condense_diagonal(&self, rhs: &[f64], elim: &[bool]) -> Result<Condensed> {
        let n = self.n;
        let mut reduced_index = vec![usize::MAX; n];
        let mut retained = Vec::new();
        for i in 0..n {
            if !elim[i] {
                reduced_index[i] = retained.len();
                retained.push(i);
            }
        }
        let mut diag = vec![0.0; n];
        for e in (0..n).filter(|&e| elim[e]) {
            for (j, v) in self.row(e) {
                if j == e {
                    diag[e] = v;
                } else if elim[j] {
                    return Err(Error::Config(format!(
                        "eliminated block is not diagonal: ({e}, {j}) = {v}"
                    )));
                }
            }
            if diag[e] == 0.0 {
                return Err(Error::Singular { pivot: e });
            }
        }
        let m = retained.len();
        let mut b = TripletBuilder::new(m);
        let mut g = vec![0.0; m];
        for (ri, &i) in retained.iter().enumerate() {
            g[ri] = rhs[i];
            for (j, v) in self.row(i) {
                if elim[j] {
                    let f = v / diag[j];
                    g[ri] -= f * rhs[j];
                    for (l, w) in self.row(j) {
                        if !elim[l] {
                            b.add(ri, reduced_index[l], -f * w);
                        }
                    }
                } else {
                    b.add(ri, reduced_index[j], v);
                }
            }
        }
        Ok(Condensed { matrix: b.build(), rhs: g, retained, diag })
    }
}

/// Output of [`SparseMatrix::condense_diagonal`].
#[derive(Debug, Clone)]
pub struct Condensed {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Original indices of the reduced unknowns.
    pub retained: Vec<usize>,
    diag: Vec<f64>,
}

impl Condensed {
    /// Rebuilds the full solution from the reduced one: `x_E = D⁻¹ (b_E - A_ER x_R)`.
    pub fn expand(&self, full: &SparseMatrix, rhs: &[f64], reduced_x: &[f64]) -> Vec<f64> {
        let n = full.dim();
        let mut x = vec![0.0; n];
        let mut is_retained = vec![false; n];
        for (ri, &i) in self.retained.iter().enumerate() {
            x[i] = reduced_x[ri];
            is_retained[i] = true;
        }
        for e in 0..n {
            if is_retained[e] {
                continue;
            }
            let mut s = rhs[e];
            for (j, v) in full.row(e) {
                if j != e {
                    s -= v * x[j];
                }
            }
            x[e] = s / self.diag[e];
        }
        x
    }
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// Power-of-two row and column scales.
#[derive(Debug, Clone)]
pub struct Equilibration {
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
}

fn pow2_near(v: f64) -> f64 {
    2f64.powi(v.log2().round() as i32)
}

/// Scales `A` by powers of two until every row and column maximum lies in `[0.5, 2]`.
///
/// Alternates square-root row/column updates; power-of-two factors keep the
/// scaled entries exact.
pub fn equilibrate(matrix: &SparseMatrix) -> Result<(SparseMatrix, Equilibration)> {
    let n = matrix.dim();
    let mut a = matrix.clone();
    let mut rows = vec![1.0; n];
    let mut cols = vec![1.0; n];
    for _ in 0..64 {
        let mut rmax = vec![0.0f64; n];
        let mut cmax = vec![0.0f64; n];
        for i in 0..n {
            for (j, v) in a.row(i) {
                rmax[i] = rmax[i].max(v.abs());
                cmax[j] = cmax[j].max(v.abs());
            }
        }
        if let Some(i) = rmax.iter().position(|&m| m == 0.0) {
            return Err(Error::Singular { pivot: i });
        }
        if let Some(j) = cmax.iter().position(|&m| m == 0.0) {
            return Err(Error::Singular { pivot: j });
        }
        let ok = |m: &f64| (0.5..=2.0).contains(m);
        if rmax.iter().all(ok) && cmax.iter().all(ok) {
            break;
        }
        let dr: Vec<f64> = rmax.iter().map(|&m| pow2_near(1.0 / m.sqrt())).collect();
        let dc: Vec<f64> = cmax.iter().map(|&m| pow2_near(1.0 / m.sqrt())).collect();
        a.scale(&dr, &dc);
        for i in 0..n {
            rows[i] *= dr[i];
            cols[i] *= dc[i];
        }
    }
    Ok((a, Equilibration { rows, cols }))
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern, `perm[new] = old`.
pub fn reverse_cuthill_mckee(matrix: &SparseMatrix) -> Vec<usize> {
    let n = matrix.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in matrix.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]).unwrap();
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// `‖A x - b‖∞ / (‖A‖∞ ‖x‖∞ + ‖b‖∞)`.
pub fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r = ax.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let denom = a.norm_inf() * xn + bn;
    if denom == 0.0 {
        0.0
    } else {
        r / denom
    }
}

/// Solution of a sparse solve together with its relative residual.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub residual: f64,
    pub lower_bandwidth: usize,
    pub upper_bandwidth: usize,
}

/// Direct solve: equilibrate, pick the natural or RCM ordering (whichever has
/// the narrower band), then banded LU with partial pivoting.
pub fn sparse_solve(matrix: &SparseMatrix, rhs: &[f64]) -> Result<SolveReport> {
    let n = matrix.dim();
    if rhs.len() != n {
        return Err(Error::Config("right-hand side length does not match matrix".into()));
    }
    let (scaled, eq) = equilibrate(matrix)?;
    let natural = scaled.bandwidths(None);
    let rcm = reverse_cuthill_mckee(&scaled);
    let reordered = scaled.bandwidths(Some(&rcm));
    let cost = |(kl, ku): (usize, usize)| kl * (kl + ku);
    let perm = if cost(reordered) < cost(natural) { Some(rcm) } else { None };
    let (kl, ku) = if perm.is_some() { reordered } else { natural };
    let band = scaled.to_banded(perm.as_deref());
    let lu = band.factor()?;
    let mut y: Vec<f64> = match &perm {
        Some(p) => p.iter().map(|&old| rhs[old] * eq.rows[old]).collect(),
        None => rhs.iter().zip(&eq.rows).map(|(b, r)| b * r).collect(),
    };
    lu.solve_in_place(&mut y);
    let mut x = vec![0.0; n];
    match &perm {
        Some(p) => {
            for (new, &old) in p.iter().enumerate() {
                x[old] = y[new] * eq.cols[old];
            }
        }
        None => {
            for i in 0..n {
                x[i] = y[i] * eq.cols[i];
            }
        }
    }
    let residual = relative_residual(matrix, &x, rhs);
    Ok(SolveReport { x, residual, lower_bandwidth: kl, upper_bandwidth: ku })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve() {
        let a = SparseMatrix::identity(6);
        let b = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let r = sparse_solve(&a, &b).unwrap();
        assert_eq!(r.x, b);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn equilibrate_identity_is_noop() {
        let (s, eq) = equilibrate(&SparseMatrix::identity(4)).unwrap();
        assert_eq!(s, SparseMatrix::identity(4));
        assert!(eq.rows.iter().chain(&eq.cols).all(|&v| v == 1.0));
    }

    #[test]
    fn equilibrate_extreme_diagonal() {
        let a = SparseMatrix::from_dense(&[1e12, 0.0, 0.0, 1e-12], 2);
        let (s, _) = equilibrate(&a).unwrap();
        for i in 0..2 {
            assert!((0.5..=2.0).contains(&s.get(i, i)));
        }
    }

    #[test]
    fn equilibrate_rejects_zero_row() {
        let a = SparseMatrix::from_dense(&[1.0, 2.0, 0.0, 0.0], 2);
        assert!(matches!(equilibrate(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn rcm_is_a_permutation() {
        let n = 10;
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 4.0);
            b.add(i, (i * 7 + 3) % n, -1.0);
            b.add((i * 7 + 3) % n, i, -1.0);
        }
        let a = b.build();
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn condensation_matches_full_solve() {
        // [[2, 0, 1], [0, 4, 1], [1, 1, 3]] with x0, x1 eliminated
        let a = SparseMatrix::from_dense(&[2.0, 0.0, 1.0, 0.0, 4.0, 1.0, 1.0, 1.0, 3.0], 3);
        let rhs = [3.0, 5.0, 5.0];
        let c = a.condense_diagonal(&rhs, &[true, true, false]).unwrap();
        assert_eq!(c.retained, vec![2]);
        let xr = c.rhs[0] / c.matrix.get(0, 0);
        let x = c.expand(&a, &rhs, &[xr]);
        for (v, e) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn condensation_rejects_coupled_block() {
        let a = SparseMatrix::from_dense(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!(a.condense_diagonal(&[1.0, 1.0], &[true, true]).is_err());
    }
}
