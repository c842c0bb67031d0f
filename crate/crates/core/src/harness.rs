//! Convergence sweeps over `(k, N, ε)`, the projection study, and table
//! output in CSV and Markdown.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{eval_modal, gauss_rule};
use crate::error::{Error, Result};
use crate::ldg1d::{solve_ldg_1d, SolverKind, SolverOptions};
use crate::ldg2d::solve_ldg_2d;
use crate::mesh::{build_shishkin_1d, build_shishkin_2d, MeshConfig};
use crate::norms::{default_error_quad, error_norms_1d, error_norms_2d, pairwise_sum, rate_shishkin};
use crate::problem::{problem_by_key, problem_dimension, AnyProblem, Problem1D, PROBLEM_KEYS};
use crate::projection::{composite_p_minus_1d, composite_p_plus_1d, default_quad_points};

/// Largest `N` accepted for 2D sweeps.
pub const MAX_2D_N: usize = 64;
/// Largest degree accepted for 2D sweeps.
pub const MAX_2D_K: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormSelection {
    Energy,
    Balanced,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Solve,
    Projection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

/// Transition parameter `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaRule {
    /// `σ = k + 1`.
    DegreePlusOne,
    Fixed(f64),
}

impl SigmaRule {
    pub fn sigma(&self, k: usize) -> f64 {
        match *self {
            SigmaRule::DegreePlusOne => (k + 1) as f64,
            SigmaRule::Fixed(s) => s,
        }
    }
}

/// A sweep over `(k, N, ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dimension: usize,
    pub problem: String,
    pub k: Vec<usize>,
    pub n: Vec<usize>,
    pub eps: Vec<f64>,
    pub sigma: SigmaRule,
    pub norm: NormSelection,
    /// Gauss points per cell (per direction in 2D) for error integrals;
    /// `None` means `2(k + 2)`.
    pub quad_order: Option<usize>,
    /// `None` means banded in 1D and condensed in 2D.
    pub solver: Option<SolverKind>,
    pub study: StudyKind,
    pub format: TableFormat,
    pub out: Option<PathBuf>,
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig::defaults_for(1)
    }
}

impl SweepConfig {
    /// Default grid of the given dimension: in 1D `k ∈ {1,2,3}`,
    /// `N = 32..1024`, `ε = 1e-4..1e-12`; in 2D `k ∈ {1,2}`, `N = 8..64`,
    /// `ε ∈ {1e-4, 1e-8}`.
    pub fn defaults_for(dimension: usize) -> Self {
        let (problem, k, n, eps) = if dimension == 2 {
            ("manufactured2d", vec![1, 2], vec![8, 16, 32, 64], vec![1e-4, 1e-8])
        } else {
            ("paper1d", vec![1, 2, 3], vec![32, 64, 128, 256, 512, 1024], vec![1e-4, 1e-6, 1e-8, 1e-10, 1e-12])
        };
        SweepConfig {
            dimension,
            problem: problem.into(),
            k,
            n,
            eps,
            sigma: SigmaRule::DegreePlusOne,
            norm: NormSelection::Both,
            quad_order: None,
            solver: None,
            study: StudyKind::Solve,
            format: TableFormat::Csv,
            out: None,
            workers: 1,
        }
    }

    /// Builds a configuration from `key = value` settings applied in order.
    /// The dimension is taken from `dim`, or from the problem key, before
    /// the remaining settings are applied over the matching defaults.
    pub fn from_settings(settings: &[(String, String)]) -> Result<Self> {
        let last = |key: &str| settings.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let dimension = match (last("dim"), last("problem")) {
            (Some(d), _) => parse_usize("dim", d)?,
            (None, Some(p)) => problem_dimension(p).unwrap_or(1),
            (None, None) => 1,
        };
        let mut cfg = SweepConfig::defaults_for(dimension);
        for (key, value) in settings {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "dim" => self.dimension = parse_usize(key, value)?,
            "problem" => self.problem = value.to_string(),
            "k" => self.k = parse_list(key, value, |s| parse_usize("k", s))?,
            "n" | "N" => self.n = parse_list(key, value, |s| parse_usize("n", s))?,
            "eps" => self.eps = parse_list(key, value, |s| parse_f64("eps", s))?,
            "sigma" => {
                self.sigma = if value == "auto" { SigmaRule::DegreePlusOne } else { SigmaRule::Fixed(parse_f64(key, value)?) }
            }
            "quad-order" | "quad_order" => self.quad_order = Some(parse_usize(key, value)?),
            "norm" => {
                self.norm = match value {
                    "energy" => NormSelection::Energy,
                    "balanced" => NormSelection::Balanced,
                    "both" => NormSelection::Both,
                    _ => return Err(bad(key, value)),
                }
            }
            "solver" => {
                self.solver = Some(match value {
                    "banded" => SolverKind::Banded,
                    "condensed" => SolverKind::Condensed,
                    _ => return Err(bad(key, value)),
                })
            }
            "study" => {
                self.study = match value {
                    "solve" => StudyKind::Solve,
                    "projection" => StudyKind::Projection,
                    _ => return Err(bad(key, value)),
                }
            }
            "format" => {
                self.format = match value {
                    "csv" => TableFormat::Csv,
                    "markdown" | "md" => TableFormat::Markdown,
                    _ => return Err(bad(key, value)),
                }
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "workers" => self.workers = parse_usize(key, value)?,
            other => return Err(Error::Config(format!("unknown setting '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dimension == 1 || self.dimension == 2) {
            return Err(Error::Config(format!("dimension must be 1 or 2, got {}", self.dimension)));
        }
        match problem_dimension(&self.problem) {
            None => {
                return Err(Error::Config(format!(
                    "unknown problem '{}', expected one of {}",
                    self.problem,
                    PROBLEM_KEYS.join(", ")
                )))
            }
            Some(d) if d != self.dimension => {
                return Err(Error::Config(format!("problem '{}' is {d}D but the sweep is {}D", self.problem, self.dimension)))
            }
            _ => {}
        }
        if self.k.is_empty() || self.n.is_empty() || self.eps.is_empty() {
            return Err(Error::Config("k, N and eps lists must be nonempty".into()));
        }
        if let Some(&k) = self.k.iter().find(|&&k| k == 0) {
            return Err(Error::Config(format!("degree must be at least 1, got {k}")));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 4 || n % 4 != 0) {
            return Err(Error::Config(format!("N must be a positive multiple of 4, got {n}")));
        }
        if self.n.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(Error::Config(format!("N list must double at each step, got {:?}", self.n)));
        }
        if let Some(&e) = self.eps.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::Config(format!("eps must lie in (0, 1], got {e}")));
        }
        if let SigmaRule::Fixed(s) = self.sigma {
            if !(s > 0.0) {
                return Err(Error::Config(format!("sigma must be positive, got {s}")));
            }
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if let Some(q) = self.quad_order {
            if q == 0 || q > crate::basis::MAX_GAUSS_POINTS {
                return Err(Error::Config(format!("quadrature order must lie in 1..={}", crate::basis::MAX_GAUSS_POINTS)));
            }
        }
        if self.dimension == 2 {
            if self.n.iter().any(|&n| n > MAX_2D_N) || self.k.iter().any(|&k| k > MAX_2D_K) {
                return Err(Error::Config(format!("2D sweeps are limited to N <= {MAX_2D_N} and k <= {MAX_2D_K}")));
            }
            if self.study == StudyKind::Projection {
                return Err(Error::Config("the projection study is one-dimensional".into()));
            }
        }
        Ok(())
    }

    fn error_quad(&self, k: usize) -> usize {
        self.quad_order.unwrap_or_else(|| default_error_quad(k))
    }

    fn solver_options(&self) -> SolverOptions {
        let mut opts = if self.dimension == 2 { SolverOptions::default_2d() } else { SolverOptions::default() };
        if let Some(kind) = self.solver {
            opts.kind = kind;
        }
        opts
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("invalid value '{value}' for '{key}'"))
}

fn parse_usize(key: &str, s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| bad(key, s))
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| bad(key, s))
}

fn parse_list<T>(key: &str, s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let parts: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return Err(bad(key, s));
    }
    parts.into_iter().map(item).collect()
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_str(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", no + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    parse_config_str(&std::fs::read_to_string(path)?)
}

/// One `(k, N, ε)` run. `values[m]` and `rates[m]` belong to metric `m` of
/// the table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub k: usize,
    pub n: usize,
    pub eps: f64,
    pub sigma: f64,
    pub values: Vec<Option<f64>>,
    pub rates: Vec<Option<f64>>,
    pub clamped: bool,
    pub residual: Option<f64>,
    /// Failure message; the values of a failed row are absent.
    pub failure: Option<String>,
}

/// Rows sorted by `k`, then decreasing `ε`, then `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub study: StudyKind,
    /// Metric names; CSV columns are `err_<name>` and `rate_<name>`.
    pub metrics: Vec<&'static str>,
    pub rows: Vec<TableRow>,
}

/// Metric names of the solve study.
pub const SOLVE_METRICS: [&str; 2] = ["energy", "balanced"];
/// Metric names of the projection study: `ε^{-1/4}‖u - P⁻u‖` on the fine
/// cells, `ε^{-3/4}‖q - P⁺q‖`, and `‖u - P⁻u‖_∞` on the coarse cells.
pub const PROJECTION_METRICS: [&str; 3] = ["layer", "flux", "linf_coarse"];

impl ConvergenceTable {
    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metrics.iter().position(|m| *m == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter(|r| r.failure.is_some())
    }

    /// Rows of one `(k, ε)` group in increasing `N`.
    pub fn group(&self, k: usize, eps: f64) -> Vec<&TableRow> {
        self.rows.iter().filter(|r| r.k == k && r.eps == eps).collect()
    }

    /// Distinct `(k, ε)` pairs in table order.
    pub fn groups(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for r in &self.rows {
            if !out.iter().any(|&(k, e)| k == r.k && e == r.eps) {
                out.push((r.k, r.eps));
            }
        }
        out
    }

    fn sort_and_rate(&mut self) {
        self.rows.sort_by(|a, b| {
            a.k.cmp(&b.k).then(b.eps.total_cmp(&a.eps)).then(a.n.cmp(&b.n))
        });
        let n_metrics = self.metrics.len();
        for idx in 0..self.rows.len() {
            let mut rates = vec![None; n_metrics];
            let row = &self.rows[idx];
            if let Some(next) = self.rows.get(idx + 1) {
                let same = next.k == row.k && next.eps == row.eps && next.n == 2 * row.n;
                if same && !row.clamped && !next.clamped {
                    for (m, rate) in rates.iter_mut().enumerate() {
                        if let (Some(a), Some(b)) = (row.values[m], next.values[m]) {
                            *rate = rate_shishkin(a, b, row.n);
                        }
                    }
                }
            }
            self.rows[idx].rates = rates;
        }
    }
}

fn new_row(k: usize, n: usize, eps: f64, sigma: f64, metrics: usize) -> TableRow {
    TableRow {
        k,
        n,
        eps,
        sigma,
        values: vec![None; metrics],
        rates: vec![None; metrics],
        clamped: false,
        residual: None,
        failure: None,
    }
}

fn jobs(cfg: &SweepConfig) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for &k in &cfg.k {
        for &eps in &cfg.eps {
            for &n in &cfg.n {
                out.push((k, n, eps));
            }
        }
    }
    out
}

fn run_jobs<F>(cfg: &SweepConfig, f: F) -> Result<Vec<TableRow>>
where
    F: Fn(usize, usize, f64) -> TableRow + Send + Sync,
{
    let list = jobs(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| list.par_iter().map(|&(k, n, eps)| f(k, n, eps)).collect()))
}

/// Solves every `(k, N, ε)` of the sweep and tabulates errors and rates.
/// Failed runs are recorded in their row and the sweep continues.
pub fn run_sweep(cfg: &SweepConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    if cfg.study == StudyKind::Projection {
        return run_projection_study(cfg);
    }
    let opts = cfg.solver_options();
    let rows = run_jobs(cfg, |k, n, eps| {
        let sigma = cfg.sigma.sigma(k);
        let mut row = new_row(k, n, eps, sigma, SOLVE_METRICS.len());
        if let Err(e) = solve_row(cfg, &opts, &mut row) {
            row.values = vec![None; SOLVE_METRICS.len()];
            row.failure = Some(e.to_string());
        }
        row
    })?;
    let mut table = ConvergenceTable { study: StudyKind::Solve, metrics: SOLVE_METRICS.to_vec(), rows };
    table.sort_and_rate();
    Ok(table)
}

fn solve_row(cfg: &SweepConfig, opts: &SolverOptions, row: &mut TableRow) -> Result<()> {
    let (k, n, eps) = (row.k, row.n, row.eps);
    let quad = cfg.error_quad(k);
    let (e, b) = match problem_by_key(&cfg.problem, eps, k)? {
        AnyProblem::OneD(p) => {
            let mesh = Arc::new(build_shishkin_1d(&MeshConfig::new(n, eps, row.sigma, p.beta))?);
            row.clamped = mesh.clamped();
            let (w, stats) = solve_ldg_1d(&p, &mesh, k, opts)?;
            row.residual = Some(stats.residual);
            error_norms_1d(&w, &p, quad)?
        }
        AnyProblem::TwoD(p) => {
            let mesh = Arc::new(build_shishkin_2d(&MeshConfig::new(n, eps, row.sigma, p.beta))?);
            row.clamped = mesh.clamped();
            let (t, stats) = solve_ldg_2d(&p, &mesh, k, opts)?;
            row.residual = Some(stats.residual);
            error_norms_2d(&t, &p, quad)?
        }
    };
    if cfg.norm != NormSelection::Balanced {
        row.values[0] = Some(e.total);
    }
    if cfg.norm != NormSelection::Energy {
        row.values[1] = Some(b.total);
    }
    Ok(())
}

/// Projection errors of one 1D run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionErrors {
    /// `ε^{-1/4}‖u - P⁻u‖` over the fine cells.
    pub layer: f64,
    /// `ε^{-3/4}‖q - P⁺q‖` over all cells.
    pub flux: f64,
    /// `‖u - P⁻u‖_∞` over the coarse cells, sampled.
    pub linf_coarse: f64,
}

/// Projection errors of the exact solution of a 1D problem.
pub fn projection_errors_1d(problem: &Problem1D, n: usize, k: usize, sigma: f64, quad_points: usize) -> Result<(ProjectionErrors, bool)> {
    let u = problem.exact_u()?.clone();
    let du = problem.exact_du()?.clone();
    let eps = problem.eps;
    let q = move |x: f64| eps * du(x);
    let mesh = Arc::new(build_shishkin_1d(&MeshConfig::new(n, eps, sigma, problem.beta))?);
    let pq = default_quad_points(k).max(quad_points);
    let pu = composite_p_minus_1d(u.as_ref(), problem.b.as_ref(), &mesh, k, pq)?;
    let pf = composite_p_plus_1d(&q, &mesh, k, pq)?;
    let quad = gauss_rule(quad_points)?;
    let mut layer = Vec::new();
    let mut flux = Vec::with_capacity(n);
    let mut linf: f64 = 0.0;
    for c in 0..n {
        let cell = mesh.cell(c);
        let i = c + 1;
        let coarse = i > n / 4 && i <= 3 * n / 4;
        let (mut su, mut sq) = (0.0, 0.0);
        for (t, w) in quad.iter() {
            let x = cell.to_physical(t);
            let eu = u(x) - eval_modal(pu.cell(c), t);
            let eq = q(x) - eval_modal(pf.cell(c), t);
            su += w * eu * eu;
            sq += w * eq * eq;
            if coarse {
                linf = linf.max(eu.abs());
            }
        }
        if coarse {
            for t in [-1.0, 1.0] {
                linf = linf.max((u(cell.to_physical(t)) - eval_modal(pu.cell(c), t)).abs());
            }
        } else {
            layer.push(cell.jacobian() * su);
        }
        flux.push(cell.jacobian() * sq);
    }
    let errs = ProjectionErrors {
        layer: pairwise_sum(&layer).sqrt() / eps.powf(0.25),
        flux: pairwise_sum(&flux).sqrt() / eps.powf(0.75),
        linf_coarse: linf,
    };
    Ok((errs, mesh.clamped()))
}

/// Projection errors of the exact solution over the sweep grid.
pub fn run_projection_study(cfg: &SweepConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    if cfg.dimension != 1 {
        return Err(Error::Config("the projection study is one-dimensional".into()));
    }
    let rows = run_jobs(cfg, |k, n, eps| {
        let sigma = cfg.sigma.sigma(k);
        let mut row = new_row(k, n, eps, sigma, PROJECTION_METRICS.len());
        let result = problem_by_key(&cfg.problem, eps, k).and_then(|p| match p {
            AnyProblem::OneD(p) => projection_errors_1d(&p, n, k, sigma, cfg.error_quad(k)),
            AnyProblem::TwoD(_) => Err(Error::Config("the projection study is one-dimensional".into())),
        });
        match result {
            Ok((e, clamped)) => {
                row.values = vec![Some(e.layer), Some(e.flux), Some(e.linf_coarse)];
                row.clamped = clamped;
            }
            Err(e) => row.failure = Some(e.to_string()),
        }
        row
    })?;
    let mut table = ConvergenceTable { study: StudyKind::Projection, metrics: PROJECTION_METRICS.to_vec(), rows };
    table.sort_and_rate();
    Ok(table)
}

/// Six significant digits.
pub fn fmt_sig6(v: f64) -> String {
    format!("{v:.5e}")
}

fn fmt_opt(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn fmt_rate(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders the table as CSV or Markdown.
pub fn render_table(table: &ConvergenceTable, format: TableFormat) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::Config("cannot emit an empty table".into()));
    }
    Ok(match format {
        TableFormat::Csv => render_csv(table),
        TableFormat::Markdown => render_markdown(table),
    })
}

fn render_csv(table: &ConvergenceTable) -> String {
    let mut s = String::from("k,N,eps,sigma");
    for m in &table.metrics {
        let _ = write!(s, ",err_{m},rate_{m}");
    }
    s.push_str(",clamped,residual\n");
    for r in &table.rows {
        let _ = write!(s, "{},{},{},{}", r.k, r.n, fmt_sig6(r.eps), fmt_sig6(r.sigma));
        for m in 0..table.metrics.len() {
            let _ = write!(s, ",{},{}", fmt_opt(r.values[m], fmt_sig6), fmt_opt(r.rates[m], fmt_rate));
        }
        let _ = writeln!(s, ",{},{}", r.clamped, fmt_opt(r.residual, fmt_sig6));
    }
    s
}

fn render_markdown(table: &ConvergenceTable) -> String {
    let mut s = String::new();
    for (gi, (k, eps)) in table.groups().into_iter().enumerate() {
        if gi > 0 {
            s.push('\n');
        }
        let _ = writeln!(s, "### k = {k}, eps = {}\n", fmt_sig6(eps));
        s.push_str("| N |");
        for m in &table.metrics {
            let _ = write!(s, " err_{m} | rate_{m} |");
        }
        s.push_str(" clamped |\n|---|");
        for _ in &table.metrics {
            s.push_str("---|---|");
        }
        s.push_str("---|\n");
        for r in table.group(k, eps) {
            let _ = write!(s, "| {} |", r.n);
            for m in 0..table.metrics.len() {
                let v = match (&r.failure, r.values[m]) {
                    (Some(_), _) => "failed".to_string(),
                    (None, v) => fmt_opt(v, fmt_sig6),
                };
                let _ = write!(s, " {v} | {} |", fmt_opt(r.rates[m], fmt_rate));
            }
            let _ = writeln!(s, " {} |", r.clamped);
        }
    }
    s
}

/// Writes the rendered table to `path`.
pub fn emit_table(table: &ConvergenceTable, format: TableFormat, path: &Path) -> Result<()> {
    let text = render_table(table, format)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Groups setting pairs by key, keeping the last value; used to merge a
/// config file with command-line overrides.
pub fn merge_settings(base: Vec<(String, String)>, overrides: Vec<(String, String)>) -> Vec<(String, String)> {
    let mut order: Vec<String> = Vec::new();
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (k, v) in base.into_iter().chain(overrides) {
        if !map.contains_key(&k) {
            order.push(k.clone());
        }
        map.insert(k, v);
    }
    order.into_iter().map(|k| {
        let v = map[&k].clone();
        (k, v)
    }).collect()
}
