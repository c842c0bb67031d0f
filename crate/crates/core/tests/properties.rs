//! Property-based invariants of the basis, mesh, problems and projections.

use ldgshishkin_core::basis::{eval_modal, gauss_rule, legendre_eval, CellMap};
use ldgshishkin_core::mesh::{build_shishkin_1d, MeshConfig};
use ldgshishkin_core::problem::{manufactured_2d_problem, paper_1d_problem};
use ldgshishkin_core::projection::{project_gr_minus, project_gr_plus, project_l2, project_weighted};
use proptest::prelude::*;

#[test]
fn legendre_orthogonality() {
    for m in 0..=8usize {
        for n in 0..=8usize {
            let rule = gauss_rule((m + n).div_ceil(2) + 1).unwrap();
            let ip: f64 = rule.iter().map(|(t, w)| w * legendre_eval(m, t).0 * legendre_eval(n, t).0).sum();
            let expect = if m == n { 2.0 / (2 * n + 1) as f64 } else { 0.0 };
            assert!((ip - expect).abs() < 1e-13, "m={m} n={n} ip={ip}");
        }
    }
}

#[test]
fn quadrature_exactness() {
    for n in 1..=10usize {
        let rule = gauss_rule(n).unwrap();
        for d in 0..2 * n {
            let got: f64 = rule.iter().map(|(t, w)| w * t.powi(d as i32)).sum();
            let expect = if d % 2 == 1 { 0.0 } else { 2.0 / (d + 1) as f64 };
            assert!((got - expect).abs() < 1e-13, "n={n} d={d}");
        }
    }
}

proptest! {
    #[test]
    fn legendre_derivative_matches_differences(n in 0usize..12, x in -0.999f64..0.999) {
        let h = 1e-6;
        let fd = (legendre_eval(n, x + h).0 - legendre_eval(n, x - h).0) / (2.0 * h);
        prop_assert!((fd - legendre_eval(n, x).1).abs() < 1e-6);
    }

    #[test]
    fn mesh_symmetry_and_widths(quarter in 1usize..64, log_eps in -12.0f64..0.0, sigma in 1.0f64..4.0) {
        let n = 4 * quarter;
        let eps = 10f64.powf(log_eps);
        let m = build_shishkin_1d(&MeshConfig::new(n, eps, sigma, 1.0)).unwrap();
        let nodes = m.nodes();
        for i in 0..=n {
            prop_assert!((nodes[i] + nodes[n - i] - 1.0).abs() < 1e-14);
        }
        let nf = n as f64;
        for c in 0..n {
            let h = m.width(c);
            prop_assert!(h > 0.0);
            prop_assert!(h <= 2.0 / nf + 1e-15);
            if !m.clamped() {
                prop_assert!(h >= eps.sqrt() * nf.ln() / nf * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn transition_nonincreasing_as_eps_shrinks(quarter in 1usize..64, a in -12.0f64..0.0, b in -12.0f64..0.0) {
        let n = 4 * quarter;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let t = |le: f64| build_shishkin_1d(&MeshConfig::new(n, 10f64.powf(le), 2.0, 1.0)).unwrap().tau();
        prop_assert!(t(lo) <= t(hi));
    }

    #[test]
    fn projections_reproduce_polynomials(
        k in 1usize..5,
        coeffs in prop::collection::vec(-2.0f64..2.0, 5),
        a in -1.0f64..0.5,
        width in 1e-3f64..1.0,
    ) {
        let cell = CellMap::new(a, a + width).unwrap();
        let c: Vec<f64> = coeffs[..=k].to_vec();
        let w = |x: f64| eval_modal(&c, cell.to_reference(x));
        let quad = gauss_rule(k + 3).unwrap();
        let scale = 1.0 + c.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for got in [
            project_l2(&w, cell, k, &quad).unwrap(),
            project_gr_minus(&w, cell, k, &quad).unwrap(),
            project_gr_plus(&w, cell, k, &quad).unwrap(),
            project_weighted(&w, &|x: f64| 2.0 + x.sin(), cell, k, &quad).unwrap(),
        ] {
            for (g, e) in got.iter().zip(&c) {
                prop_assert!((g - e).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn gauss_radau_endpoint_interpolation(
        k in 1usize..5,
        freq in 0.1f64..6.0,
        phase in -3.0f64..3.0,
        a in -1.0f64..0.5,
        width in 1e-3f64..1.0,
    ) {
        let cell = CellMap::new(a, a + width).unwrap();
        let w = |x: f64| (freq * x + phase).sin() + x * x;
        let quad = gauss_rule(k + 3).unwrap();
        let m = project_gr_minus(&w, cell, k, &quad).unwrap();
        let p = project_gr_plus(&w, cell, k, &quad).unwrap();
        prop_assert!((eval_modal(&m, 1.0) - w(cell.b)).abs() < 1e-12);
        prop_assert!((eval_modal(&p, -1.0) - w(cell.a)).abs() < 1e-12);
    }

    #[test]
    fn weighted_with_unit_weight_is_l2(k in 1usize..5, freq in 0.1f64..6.0, a in -1.0f64..0.5, width in 1e-3f64..1.0) {
        let cell = CellMap::new(a, a + width).unwrap();
        let w = |x: f64| (freq * x).cos() * x;
        let quad = gauss_rule(k + 3).unwrap();
        let l2 = project_l2(&w, cell, k, &quad).unwrap();
        let wb = project_weighted(&w, &|_| 1.0, cell, k, &quad).unwrap();
        for (x, y) in l2.iter().zip(&wb) {
            prop_assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn projection_stability(k in 1usize..4, freq in 0.1f64..20.0, phase in -3.0f64..3.0, a in -1.0f64..0.5, width in 1e-3f64..1.0) {
        let cell = CellMap::new(a, a + width).unwrap();
        let w = |x: f64| (freq * x + phase).sin() + 0.3;
        let quad = gauss_rule(k + 3).unwrap();
        let fine = gauss_rule(30).unwrap();
        let norm = |f: &dyn Fn(f64) -> f64| (cell.jacobian() * fine.iter().map(|(t, wq)| wq * f(cell.to_physical(t)).powi(2)).sum::<f64>()).sqrt();
        let proj_norm = |c: &[f64]| (cell.jacobian() * fine.iter().map(|(t, wq)| wq * eval_modal(c, t).powi(2)).sum::<f64>()).sqrt();
        let nw = norm(&w);
        let endpoint = width.sqrt() * w(cell.a).abs().max(w(cell.b).abs());
        prop_assert!(proj_norm(&project_l2(&w, cell, k, &quad).unwrap()) <= 5.0 * nw);
        prop_assert!(proj_norm(&project_weighted(&w, &|x: f64| 1.5 + x.sin(), cell, k, &quad).unwrap()) <= 5.0 * nw);
        prop_assert!(proj_norm(&project_gr_minus(&w, cell, k, &quad).unwrap()) <= 5.0 * (nw + endpoint));
        prop_assert!(proj_norm(&project_gr_plus(&w, cell, k, &quad).unwrap()) <= 5.0 * (nw + endpoint));
    }
}

/// `-ε u'' + b u = f` at 1001 random interior points, with `u''` taken from
/// central differences of the flux handle.
#[test]
fn problem_residuals_and_flux_handles() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for eps in [1.0, 1e-2, 1e-4] {
        let p = paper_1d_problem(eps).unwrap();
        let (u, du) = (p.exact_u().unwrap(), p.exact_du().unwrap());
        let fmax = (0..=1000).map(|i| (p.f)(i as f64 / 1000.0).abs()).fold(0.0, f64::max);
        let h = 1e-6;
        for _ in 0..1001 {
            let x: f64 = rng.gen_range(0.01..0.99);
            let upp = (du(x + h) - du(x - h)) / (2.0 * h);
            let r = -eps * upp + (p.b)(x) * u(x) - (p.f)(x);
            assert!(r.abs() <= 1e-5 * fmax.max(1.0), "eps={eps} x={x} r={r}");
            // flux handle against differences of u, away from layers
            if x > 0.2 && x < 0.8 {
                let fd = (u(x + h) - u(x - h)) / (2.0 * h);
                assert!((fd - du(x)).abs() <= 1e-5 * (1.0 + du(x).abs()));
            }
        }
    }
    for eps in [1.0, 1e-2] {
        let p = manufactured_2d_problem(eps).unwrap();
        let (u, ux, uy) = p.exact_handles().unwrap();
        let h = 1e-6;
        for _ in 0..1001 {
            let (x, y): (f64, f64) = (rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8));
            let fx = (u(x + h, y) - u(x - h, y)) / (2.0 * h);
            let fy = (u(x, y + h) - u(x, y - h)) / (2.0 * h);
            assert!((fx - ux(x, y)).abs() <= 1e-5 * (1.0 + ux(x, y).abs()));
            assert!((fy - uy(x, y)).abs() <= 1e-5 * (1.0 + uy(x, y).abs()));
            let lap = (ux(x + h, y) - ux(x - h, y) + uy(x, y + h) - uy(x, y - h)) / (2.0 * h);
            let r = -eps * lap + (p.b)(x, y) * u(x, y) - (p.f)(x, y);
            assert!(r.abs() <= 1e-5 * (1.0 + (p.f)(x, y).abs()), "eps={eps} r={r}");
        }
    }
}
