//! Legendre polynomials, Gauss-Legendre rules and the affine reference map.
//!
//! Every cell carries a modal basis `P_0..P_k` in the reference coordinate
//! `t ∈ [-1, 1]`. Integrals over physical cells are evaluated with a Gauss
//! rule on the reference interval scaled by the Jacobian `h / 2`.

use crate::error::{Error, Result};

/// Largest supported number of Gauss points.
pub const MAX_GAUSS_POINTS: usize = 64;

/// Returns `(P_n(x), P_n'(x))` via the three-term recurrence.
pub fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut d_prev = 0.0;
    if n == 0 {
        return (p_prev, d_prev);
    }
    let mut p = x;
    let mut d = 1.0;
    for m in 2..=n {
        let mf = m as f64;
        let p_next = ((2.0 * mf - 1.0) * x * p - (mf - 1.0) * p_prev) / mf;
        // P'_m = P'_{m-2} + (2m - 1) P_{m-1}, valid on the closed interval.
        let d_next = d_prev + (2.0 * mf - 1.0) * p;
        p_prev = p;
        d_prev = d;
        p = p_next;
        d = d_next;
    }
    (p, d)
}

/// Values and derivatives of `P_0..=P_degree` at `x`.
pub fn legendre_all(degree: usize, x: f64, values: &mut [f64], derivs: &mut [f64]) {
    values[0] = 1.0;
    derivs[0] = 0.0;
    if degree == 0 {
        return;
    }
    values[1] = x;
    derivs[1] = 1.0;
    for m in 2..=degree {
        let mf = m as f64;
        values[m] = ((2.0 * mf - 1.0) * x * values[m - 1] - (mf - 1.0) * values[m - 2]) / mf;
        derivs[m] = derivs[m - 2] + (2.0 * mf - 1.0) * values[m - 1];
    }
}

/// `∫_{-1}^{1} P_n^2 dt`.
#[inline]
pub fn legendre_norm_sq(n: usize) -> f64 {
    2.0 / (2 * n + 1) as f64
}

/// `P_n(-1)`.
#[inline]
pub fn left_trace(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// A Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `g` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, g: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (t, w) in self.points.iter().zip(&self.weights) {
            acc += w * g(mid + half * t);
        }
        acc * half
    }

    /// Iterates `(t, w)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// The `n`-point Gauss-Legendre rule, exact for polynomials of degree `2n - 1`.
///
/// Nodes come from Newton's method on `P_n` started at Chebyshev-type guesses.
pub fn gauss_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_GAUSS_POINTS {
        return Err(Error::Config(format!(
            "gauss rule needs 1..={MAX_GAUSS_POINTS} points, got {n}"
        )));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    let half = n.div_ceil(2);
    for i in 0..half {
        // i-th largest root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_eval(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        points[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        points[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Ok(QuadratureRule { points, weights })
}

/// Affine map from the reference interval onto `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMap {
    pub a: f64,
    pub b: f64,
}

impl CellMap {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Mesh(format!("degenerate cell [{a}, {b}]")));
        }
        Ok(CellMap { a, b })
    }

    #[inline]
    pub fn to_physical(&self, t: f64) -> f64 {
        self.a + (self.b - self.a) * (t + 1.0) * 0.5
    }

    #[inline]
    pub fn to_reference(&self, x: f64) -> f64 {
        2.0 * (x - self.a) / (self.b - self.a) - 1.0
    }

    #[inline]
    pub fn jacobian(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// `a + (b - a)(t + 1)/2` together with the Jacobian `(b - a)/2`.
pub fn cell_map(a: f64, b: f64, t: f64) -> Result<(f64, f64)> {
    let map = CellMap::new(a, b)?;
    Ok((map.to_physical(t), map.jacobian()))
}

/// Reference-element data for degree `k`: basis values at quadrature points
/// and the exact derivative-coupling matrix.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    pub degree: usize,
    pub quad: QuadratureRule,
    /// `values[q * (k+1) + n] = P_n(t_q)`
    pub values: Vec<f64>,
    /// `derivs[q * (k+1) + n] = P_n'(t_q)`
    pub derivs: Vec<f64>,
    /// `stiff[m * (k+1) + n] = ∫ P_m' P_n dt`
    pub stiff: Vec<f64>,
}

impl ReferenceBasis {
    /// Basis tabulated on an `n_quad`-point Gauss rule.
    pub fn new(degree: usize, n_quad: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Config("polynomial degree must be at least 1".into()));
        }
        let quad = gauss_rule(n_quad)?;
        let nb = degree + 1;
        let mut values = vec![0.0; quad.len() * nb];
        let mut derivs = vec![0.0; quad.len() * nb];
        for (q, &t) in quad.points.iter().enumerate() {
            legendre_all(
                degree,
                t,
                &mut values[q * nb..(q + 1) * nb],
                &mut derivs[q * nb..(q + 1) * nb],
            );
        }
        // P_m' P_n has degree 2k - 1, so k + 1 points integrate it exactly.
        let exact = gauss_rule(nb)?;
        let mut stiff = vec![0.0; nb * nb];
        let mut v = vec![0.0; nb];
        let mut d = vec![0.0; nb];
        for (t, w) in exact.iter() {
            legendre_all(degree, t, &mut v, &mut d);
            for m in 0..nb {
                for n in 0..nb {
                    stiff[m * nb + n] += w * d[m] * v[n];
                }
            }
        }
        Ok(ReferenceBasis { degree, quad, values, derivs, stiff })
    }

    #[inline]
    pub fn n_basis(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn value(&self, q: usize, n: usize) -> f64 {
        self.values[q * (self.degree + 1) + n]
    }

    #[inline]
    pub fn stiffness(&self, m: usize, n: usize) -> f64 {
        self.stiff[m * (self.degree + 1) + n]
    }
}

/// Evaluates `Σ c_n P_n(t)`.
pub fn eval_modal(coeffs: &[f64], t: f64) -> f64 {
    // Clenshaw on the Legendre recurrence.
    let n = coeffs.len();
    if n == 0 {
        return 0.0;
    }
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for j in (1..n).rev() {
        let jf = j as f64;
        let alpha = (2.0 * jf + 1.0) / (jf + 1.0) * t;
        let beta = -(jf + 1.0) / (jf + 2.0);
        let b0 = coeffs[j] + alpha * b1 + beta * b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + t * b1 - 0.5 * b2
}

/// Evaluates `Σ c_n P_n'(t)`.
pub fn eval_modal_deriv(coeffs: &[f64], t: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c * legendre_eval(n, t).1)
        .sum()
}

/// `Σ c_n P_n(1)`.
#[inline]
pub fn right_value(coeffs: &[f64]) -> f64 {
    coeffs.iter().sum()
}

/// `Σ c_n P_n(-1)`.
#[inline]
pub fn left_value(coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| if n % 2 == 0 { *c } else { -*c })
        .sum()
}
