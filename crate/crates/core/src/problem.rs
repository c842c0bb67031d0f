//! Test problems `-ε u'' + b u = f` on `(0, 1)` and `-ε Δu + b u = f` on
//! the unit square, with homogeneous Dirichlet data.
//!
//! Exact solutions are carried as closed-form handles together with their
//! first derivatives; right-hand sides are derived analytically.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A 1D reaction-diffusion problem.
#[derive(Clone)]
pub struct Problem1D {
    pub name: String,
    pub eps: f64,
    /// Lower-bound constant: `b(x) ≥ β²`.
    pub beta: f64,
    pub b: Fn1,
    pub f: Fn1,
    pub u_exact: Option<Fn1>,
    pub du_exact: Option<Fn1>,
}

impl std::fmt::Debug for Problem1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem1D")
            .field("name", &self.name)
            .field("eps", &self.eps)
            .field("beta", &self.beta)
            .field("has_exact", &self.u_exact.is_some())
            .finish()
    }
}

impl Problem1D {
    pub fn has_exact(&self) -> bool {
        self.u_exact.is_some() && self.du_exact.is_some()
    }

    /// `q = ε u'`.
    pub fn q_exact(&self, x: f64) -> Option<f64> {
        self.du_exact.as_ref().map(|du| self.eps * du(x))
    }

    pub fn exact_u(&self) -> Result<&Fn1> {
        self.u_exact
            .as_ref()
            .ok_or_else(|| Error::Config(format!("problem '{}' has no exact solution", self.name)))
    }

    pub fn exact_du(&self) -> Result<&Fn1> {
        self.du_exact
            .as_ref()
            .ok_or_else(|| Error::Config(format!("problem '{}' has no exact derivative", self.name)))
    }
}

/// A 2D reaction-diffusion problem on `(0,1)²`.
#[derive(Clone)]
pub struct Problem2D {
    pub name: String,
    pub eps: f64,
    /// Lower-bound constant: `b(x, y) ≥ 2β²`.
    pub beta: f64,
    pub b: Fn2,
    pub f: Fn2,
    pub u_exact: Option<Fn2>,
    pub ux_exact: Option<Fn2>,
    pub uy_exact: Option<Fn2>,
}

impl std::fmt::Debug for Problem2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem2D")
            .field("name", &self.name)
            .field("eps", &self.eps)
            .field("beta", &self.beta)
            .field("has_exact", &self.u_exact.is_some())
            .finish()
    }
}

impl Problem2D {
    pub fn has_exact(&self) -> bool {
        self.u_exact.is_some() && self.ux_exact.is_some() && self.uy_exact.is_some()
    }

    /// `p = ε ∂u/∂x`.
    pub fn p_exact(&self, x: f64, y: f64) -> Option<f64> {
        self.ux_exact.as_ref().map(|g| self.eps * g(x, y))
    }

    /// `q = ε ∂u/∂y`.
    pub fn q_exact(&self, x: f64, y: f64) -> Option<f64> {
        self.uy_exact.as_ref().map(|g| self.eps * g(x, y))
    }

    pub fn exact_handles(&self) -> Result<(&Fn2, &Fn2, &Fn2)> {
        match (&self.u_exact, &self.ux_exact, &self.uy_exact) {
            (Some(u), Some(ux), Some(uy)) => Ok((u, ux, uy)),
            _ => Err(Error::Config(format!("problem '{}' has no exact solution", self.name))),
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Config(format!("eps must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// Two-layer profile `g(s) = (e^{-s/√ε} - e^{-(1-s)/√ε}) / (1 - e^{-1/√ε}) - cos(πs)`
/// with its first and second derivatives. It solves `-ε g'' + g = -(1 + επ²) cos(πs)`
/// with `g(0) = g(1) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct LayerProfile {
    sqrt_eps: f64,
    denom: f64,
}

impl LayerProfile {
    pub fn new(eps: f64) -> Self {
        let sqrt_eps = eps.sqrt();
        LayerProfile { sqrt_eps, denom: 1.0 - (-1.0 / sqrt_eps).exp() }
    }

    #[inline]
    fn exps(&self, s: f64) -> (f64, f64) {
        ((-s / self.sqrt_eps).exp(), (-(1.0 - s) / self.sqrt_eps).exp())
    }

    /// Layer part only: solves `-ε v'' + v = 0`.
    pub fn layer(&self, s: f64) -> f64 {
        let (a, b) = self.exps(s);
        (a - b) / self.denom
    }

    pub fn value(&self, s: f64) -> f64 {
        self.layer(s) - (PI * s).cos()
    }

    pub fn deriv(&self, s: f64) -> f64 {
        let (a, b) = self.exps(s);
        -(a + b) / (self.sqrt_eps * self.denom) + PI * (PI * s).sin()
    }

    pub fn second(&self, s: f64) -> f64 {
        let (a, b) = self.exps(s);
        (a - b) / (self.sqrt_eps * self.sqrt_eps * self.denom) + PI * PI * (PI * s).cos()
    }
}

/// The 1D benchmark: `b ≡ 1` with a boundary layer at each end.
///
/// `f = -(1 + επ²) cos(πx)` since the exponential part is annihilated by
/// `-ε v'' + v`.
pub fn paper_1d_problem(eps: f64) -> Result<Problem1D> {
    check_eps(eps)?;
    let g = LayerProfile::new(eps);
    Ok(Problem1D {
        name: "paper1d".into(),
        eps,
        beta: 1.0,
        b: Arc::new(|_| 1.0),
        f: Arc::new(move |x| -(1.0 + eps * PI * PI) * (PI * x).cos()),
        u_exact: Some(Arc::new(move |x| g.value(x))),
        du_exact: Some(Arc::new(move |x| g.deriv(x))),
    })
}

/// `u = x(1 - x)` with `b ≡ 1`; lies in the discrete space for `k ≥ 2`.
pub fn polynomial_problem_1d(eps: f64, k: usize) -> Result<Problem1D> {
    check_eps(eps)?;
    if k < 2 {
        return Err(Error::Config(format!(
            "polynomial problem needs k >= 2 to be resolvable, got {k}"
        )));
    }
    Ok(Problem1D {
        name: "poly1d".into(),
        eps,
        beta: 1.0,
        b: Arc::new(|_| 1.0),
        f: Arc::new(move |x| 2.0 * eps + x * (1.0 - x)),
        u_exact: Some(Arc::new(|x| x * (1.0 - x))),
        du_exact: Some(Arc::new(|x| 1.0 - 2.0 * x)),
    })
}

/// `u = g(x) g(y)` with the two-layer profile `g`, `b ≡ 2`.
///
/// The product carries a smooth part, edge layers and corner layers.
pub fn manufactured_2d_problem(eps: f64) -> Result<Problem2D> {
    check_eps(eps)?;
    let g = LayerProfile::new(eps);
    Ok(Problem2D {
        name: "manufactured2d".into(),
        eps,
        beta: 1.0,
        b: Arc::new(|_, _| 2.0),
        f: Arc::new(move |x, y| {
            let (gx, gy) = (g.value(x), g.value(y));
            -eps * (g.second(x) * gy + gx * g.second(y)) + 2.0 * gx * gy
        }),
        u_exact: Some(Arc::new(move |x, y| g.value(x) * g.value(y))),
        ux_exact: Some(Arc::new(move |x, y| g.deriv(x) * g.value(y))),
        uy_exact: Some(Arc::new(move |x, y| g.value(x) * g.deriv(y))),
    })
}

/// `u = x(1-x) y(1-y)` with `b ≡ 2`; lies in `ℚ_k` for `k ≥ 2`.
pub fn polynomial_problem_2d(eps: f64) -> Result<Problem2D> {
    check_eps(eps)?;
    Ok(Problem2D {
        name: "poly2d".into(),
        eps,
        beta: 1.0,
        b: Arc::new(|_, _| 2.0),
        f: Arc::new(move |x, y| {
            let (gx, gy) = (x * (1.0 - x), y * (1.0 - y));
            2.0 * eps * (gx + gy) + 2.0 * gx * gy
        }),
        u_exact: Some(Arc::new(|x, y| x * (1.0 - x) * y * (1.0 - y))),
        ux_exact: Some(Arc::new(|x, y| (1.0 - 2.0 * x) * y * (1.0 - y))),
        uy_exact: Some(Arc::new(|x, y| x * (1.0 - x) * (1.0 - 2.0 * y))),
    })
}

/// A problem of either dimension, as selected on the command line.
#[derive(Debug, Clone)]
pub enum AnyProblem {
    OneD(Problem1D),
    TwoD(Problem2D),
}

/// Problem keys understood by [`problem_by_key`].
pub const PROBLEM_KEYS: &[&str] = &["paper1d", "poly1d", "manufactured2d", "poly2d"];

/// Looks up a problem by its command-line key.
pub fn problem_by_key(key: &str, eps: f64, k: usize) -> Result<AnyProblem> {
    match key {
        "paper1d" => paper_1d_problem(eps).map(AnyProblem::OneD),
        "poly1d" => polynomial_problem_1d(eps, k).map(AnyProblem::OneD),
        "manufactured2d" => manufactured_2d_problem(eps).map(AnyProblem::TwoD),
        "poly2d" => polynomial_problem_2d(eps).map(AnyProblem::TwoD),
        other => Err(Error::Config(format!(
            "unknown problem '{other}', expected one of {}",
            PROBLEM_KEYS.join(", ")
        ))),
    }
}

/// Dimension of the problem behind a key.
pub fn problem_dimension(key: &str) -> Option<usize> {
    match key {
        "paper1d" | "poly1d" => Some(1),
        "manufactured2d" | "poly2d" => Some(2),
        _ => None,
    }
}
