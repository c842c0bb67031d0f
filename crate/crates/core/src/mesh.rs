//! Piecewise-uniform Shishkin meshes on `[0, 1]` and their tensor products.
//!
//! The mesh has `N/4` fine cells on `[0, τ]`, `N/2` coarse cells on
//! `[τ, 1 - τ]` and `N/4` fine cells on `[1 - τ, 1]`, with the transition
//! point `τ = min(1/4, σ √ε ln N / β)`.

use std::io::Write;
use std::path::Path;

use crate::basis::CellMap;
use crate::error::{Error, Result};

/// Parameters of a Shishkin mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshConfig {
    /// Number of cells, a positive multiple of 4.
    pub n: usize,
    /// Perturbation parameter.
    pub eps: f64,
    /// Mesh constant, taken `≥ k + 1` by the harness.
    pub sigma: f64,
    /// Lower-bound constant with `b ≥ β²`.
    pub beta: f64,
}

impl MeshConfig {
    pub fn new(n: usize, eps: f64, sigma: f64, beta: f64) -> Self {
        MeshConfig { n, eps, sigma, beta }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !self.n.is_multiple_of(4) {
            return Err(Error::Config(format!("N must be a positive multiple of 4, got {}", self.n)));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::Config(format!("eps must lie in (0, 1], got {}", self.eps)));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    /// The uncapped transition point `σ √ε ln N / β`.
    pub fn raw_transition(&self) -> f64 {
        self.sigma * self.eps.sqrt() * (self.n as f64).ln() / self.beta
    }
}

/// Which part of the Shishkin mesh a cell lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    FineLeft,
    Coarse,
    FineRight,
}

/// A 1D Shishkin mesh with nodes `x_0 = 0 < ... < x_N = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    tau: f64,
    clamped: bool,
}

/// Builds the piecewise-uniform Shishkin mesh.
///
/// Nodes are evaluated branch by branch from integer ratios, which keeps
/// `x_i + x_{N-i} = 1` to roundoff.
pub fn build_shishkin_1d(cfg: &MeshConfig) -> Result<Mesh1D> {
    cfg.validate()?;
    let n = cfg.n;
    let raw = cfg.raw_transition();
    let (tau, clamped) = if raw >= 0.25 { (0.25, true) } else { (raw, false) };
    let nf = n as f64;
    let q = n / 4;
    let mut nodes = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = if i <= q {
            4.0 * tau * (i as f64 / nf)
        } else if i <= 3 * q {
            // t_i - 1/4 = (4i - N) / (4N)
            tau + 2.0 * (1.0 - 2.0 * tau) * ((4 * i - n) as f64 / (4.0 * nf))
        } else {
            1.0 - 4.0 * tau * ((n - i) as f64 / nf)
        };
        nodes.push(x);
    }
    nodes[0] = 0.0;
    nodes[n] = 1.0;
    Ok(Mesh1D { nodes, tau, clamped })
}

/// A uniform mesh with `n` cells, used for oracles and debugging.
pub fn uniform_1d(n: usize) -> Result<Mesh1D> {
    if n == 0 {
        return Err(Error::Config("uniform mesh needs at least one cell".into()));
    }
    let nodes = (0..=n).map(|i| i as f64 / n as f64).collect();
    Ok(Mesh1D { nodes, tau: 0.25, clamped: true })
}

impl Mesh1D {
    /// Mesh from explicit nodes. The layer index conventions still assume `N % 4 == 0`.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Mesh("need at least two nodes".into()));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Mesh("nodes must be strictly increasing".into()));
        }
        let n = nodes.len() - 1;
        let tau = if n.is_multiple_of(4) { nodes[n / 4] } else { 0.25 };
        Ok(Mesh1D { nodes, tau, clamped: false })
    }

    /// Number of cells `N`.
    #[inline]
    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// True when the transition point hit the `1/4` cap.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    /// Cell `c` (0-based), i.e. `I_{c+1} = [x_c, x_{c+1}]`.
    #[inline]
    pub fn cell(&self, c: usize) -> CellMap {
        CellMap { a: self.nodes[c], b: self.nodes[c + 1] }
    }

    #[inline]
    pub fn width(&self, c: usize) -> f64 {
        self.nodes[c + 1] - self.nodes[c]
    }

    /// Node index of the penalized interface `x_{3N/4}`.
    #[inline]
    pub fn interface_node(&self) -> usize {
        3 * self.n_cells() / 4
    }

    /// Region of the 1-based cell index `i ∈ [1, N]`.
    pub fn region_of(&self, i: usize) -> Result<Region> {
        let n = self.n_cells();
        if i == 0 || i > n {
            return Err(Error::Mesh(format!("cell index {i} outside 1..={n}")));
        }
        Ok(if i <= n / 4 {
            Region::FineLeft
        } else if i <= 3 * n / 4 {
            Region::Coarse
        } else {
            Region::FineRight
        })
    }

    /// Locates the 0-based cell containing `x`; nodes belong to the cell on their left.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let n = self.n_cells();
        if !(x >= self.nodes[0] && x <= self.nodes[n]) {
            return None;
        }
        let pos = self.nodes.partition_point(|&node| node < x);
        Some(pos.saturating_sub(1).min(n - 1))
    }

    /// Writes one node per line with 17 significant digits.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        for x in &self.nodes {
            writeln!(out, "{x:.16e}")?;
        }
        Ok(())
    }

    pub fn dump_to_path(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_dump(std::io::BufWriter::new(file))
    }
}

/// Tensor-product mesh `κ_ij = I_i × J_j` on the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    pub mx: Mesh1D,
    pub my: Mesh1D,
}

pub fn build_shishkin_2d(cfg: &MeshConfig) -> Result<Mesh2D> {
    let m = build_shishkin_1d(cfg)?;
    Ok(Mesh2D { mx: m.clone(), my: m })
}

impl Mesh2D {
    pub fn from_axes(mx: Mesh1D, my: Mesh1D) -> Result<Self> {
        if mx.n_cells() != my.n_cells() {
            return Err(Error::Mesh("both axes must carry the same number of cells".into()));
        }
        Ok(Mesh2D { mx, my })
    }

    /// Cells per axis.
    #[inline]
    pub fn n(&self) -> usize {
        self.mx.n_cells()
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.n() * self.n()
    }

    /// Linear index of the 0-based cell `(ci, cj)`; `ci` runs fastest.
    #[inline]
    pub fn cell_index(&self, ci: usize, cj: usize) -> usize {
        cj * self.n() + ci
    }

    pub fn clamped(&self) -> bool {
        self.mx.clamped() || self.my.clamped()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, eps: f64) -> MeshConfig {
        MeshConfig::new(n, eps, 2.0, 1.0)
    }

    #[test]
    fn transition_point_example() {
        let m = build_shishkin_1d(&cfg(32, 1e-4)).unwrap();
        // 2 * 0.01 * ln 32 = 0.0693147180559945...
        assert!((m.tau() - 0.069_314_718_055_994_53).abs() < 1e-15);
        assert!((m.width(0) - 0.008_664_339_756_999_316).abs() < 1e-14);
        assert!(!m.clamped());
    }

    #[test]
    fn clamped_mesh_is_uniform() {
        let m = build_shishkin_1d(&cfg(4, 0.5)).unwrap();
        assert!(m.clamped());
        assert_eq!(m.tau(), 0.25);
        for c in 0..4 {
            assert!((m.width(c) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn transition_nodes() {
        for &(n, eps) in &[(8, 1e-2), (32, 1e-6), (128, 1e-12)] {
            let m = build_shishkin_1d(&cfg(n, eps)).unwrap();
            assert_eq!(m.node(n / 4), m.tau());
            assert!((m.node(3 * n / 4) - (1.0 - m.tau())).abs() < 1e-15);
        }
    }

    #[test]
    fn config_errors() {
        assert!(matches!(build_shishkin_1d(&cfg(6, 1e-4)), Err(Error::Config(_))));
        assert!(matches!(build_shishkin_1d(&cfg(0, 1e-4)), Err(Error::Config(_))));
        assert!(matches!(build_shishkin_1d(&cfg(8, 0.0)), Err(Error::Config(_))));
        assert!(matches!(build_shishkin_1d(&MeshConfig::new(8, 1e-4, -1.0, 1.0)), Err(Error::Config(_))));
        assert!(matches!(build_shishkin_1d(&MeshConfig::new(8, 1e-4, 2.0, 0.0)), Err(Error::Config(_))));
    }

    #[test]
    fn two_d_cells() {
        let m = build_shishkin_2d(&cfg(8, 1e-6)).unwrap();
        assert_eq!(m.n_cells(), 64);
        let tau = m.mx.tau();
        assert!((m.mx.width(0) - 4.0 * tau / 8.0).abs() < 1e-15);
        assert!((m.my.width(0) - 4.0 * tau / 8.0).abs() < 1e-15);
        assert!((m.mx.width(4) - 2.0 * (1.0 - 2.0 * tau) / 8.0).abs() < 1e-15);
    }

    #[test]
    fn regions() {
        let m = build_shishkin_1d(&cfg(32, 1e-4)).unwrap();
        assert_eq!(m.region_of(8).unwrap(), Region::FineLeft);
        assert_eq!(m.region_of(9).unwrap(), Region::Coarse);
        assert_eq!(m.region_of(24).unwrap(), Region::Coarse);
        assert_eq!(m.region_of(25).unwrap(), Region::FineRight);
        assert!(m.region_of(0).is_err());
        assert!(m.region_of(33).is_err());
    }

    #[test]
    fn dump_has_one_line_per_node() {
        let m = build_shishkin_1d(&cfg(8, 1e-4)).unwrap();
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(parsed, m.nodes());
    }

    #[test]
    fn locate_cells() {
        let m = build_shishkin_1d(&cfg(8, 1e-4)).unwrap();
        assert_eq!(m.locate(0.0), Some(0));
        assert_eq!(m.locate(1.0), Some(7));
        assert_eq!(m.locate(0.5), Some(3));
        assert_eq!(m.locate(m.node(2)), Some(1));
        assert_eq!(m.locate(1.5), None);
    }
}
