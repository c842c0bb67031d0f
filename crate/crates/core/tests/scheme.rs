//! Consistency of the assembled schemes with the bilinear forms and norms.

use std::sync::Arc;

use ldgshishkin_core::harness::projection_errors_1d;
use ldgshishkin_core::ldg1d::{apply_b_1d, assemble_1d, load_functional_1d, solve_ldg_1d, MixedSolution1D, SolverKind, SolverOptions};
use ldgshishkin_core::ldg2d::{apply_b_2d, assemble_2d, solve_ldg_2d, MixedSolution2D};
use ldgshishkin_core::mesh::{build_shishkin_1d, build_shishkin_2d, Mesh1D, Mesh2D, MeshConfig};
use ldgshishkin_core::norms::{
    balanced_norm_1d, balanced_norm_2d, default_error_quad, energy_norm_1d, energy_norm_2d, error_norms_1d, error_norms_2d,
};
use ldgshishkin_core::problem::{manufactured_2d_problem, paper_1d_problem, polynomial_problem_1d, polynomial_problem_2d};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS_GRID: [f64; 3] = [1.0, 1e-4, 1e-8];

fn mesh1(n: usize, eps: f64, sigma: f64) -> Arc<Mesh1D> {
    Arc::new(build_shishkin_1d(&MeshConfig::new(n, eps, sigma, 1.0)).unwrap())
}

fn mesh2(n: usize, eps: f64, sigma: f64) -> Arc<Mesh2D> {
    Arc::new(build_shishkin_2d(&MeshConfig::new(n, eps, sigma, 1.0)).unwrap())
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn energy_identity_1d() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for eps in EPS_GRID {
        let p = paper_1d_problem(eps).unwrap();
        for k in [1, 2, 3] {
            let m = mesh1(16, eps, 2.0);
            for _ in 0..20 {
                let v = MixedSolution1D::from_vector(m.clone(), k, &random_vec(&mut rng, 2 * (k + 1) * 16));
                let b = apply_b_1d(&v, &v, &p, k + 3).unwrap();
                let e = energy_norm_1d(&v, &p, k + 3).unwrap().total_sq();
                assert!((b - e).abs() <= 1e-12 * (1.0 + e), "eps={eps} k={k}: {b} vs {e}");
                let bal = balanced_norm_1d(&v, &p, k + 3).unwrap().total;
                assert!(bal <= eps.powf(-0.25) * e.sqrt() * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn energy_identity_2d() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for eps in EPS_GRID {
        let p = manufactured_2d_problem(eps).unwrap();
        for n in [4, 8] {
            for k in [1, 2] {
                let m = mesh2(n, eps, 2.0);
                for _ in 0..20 {
                    let t = MixedSolution2D::from_vector(m.clone(), k, &random_vec(&mut rng, 3 * (k + 1) * (k + 1) * n * n));
                    let b = apply_b_2d(&t, &t, &p, k + 3).unwrap();
                    let e = energy_norm_2d(&t, &p, k + 3).unwrap().total_sq();
                    assert!((b - e).abs() <= 1e-12 * (1.0 + e), "eps={eps} n={n} k={k}: {b} vs {e}");
                    let bal = balanced_norm_2d(&t, &p, k + 3).unwrap().total;
                    assert!(bal <= eps.powf(-0.25) * e.sqrt() * (1.0 + 1e-12));
                }
            }
        }
    }
}

/// The assembled matrix applied to `W` and tested with `X` equals `B(W; X)`.
#[test]
fn assembled_matrix_realizes_bilinear_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for eps in EPS_GRID {
        let p = paper_1d_problem(eps).unwrap();
        let m = mesh1(16, eps, 2.0);
        let k = 2;
        let sys = assemble_1d(&p, &m, k, &SolverOptions::default()).unwrap();
        for _ in 0..5 {
            let w = random_vec(&mut rng, sys.dim());
            let x = random_vec(&mut rng, sys.dim());
            let aw = sys.matrix.matvec(&w);
            let lhs: f64 = aw.iter().zip(&x).map(|(a, b)| a * b).sum();
            let rhs = apply_b_1d(
                &MixedSolution1D::from_vector(m.clone(), k, &w),
                &MixedSolution1D::from_vector(m.clone(), k, &x),
                &p,
                k + 3,
            )
            .unwrap();
            assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + rhs.abs()), "1d eps={eps}");
        }

        let p2 = manufactured_2d_problem(eps).unwrap();
        let m2 = mesh2(8, eps, 2.0);
        let sys = assemble_2d(&p2, &m2, 1, &SolverOptions::default_2d()).unwrap();
        for _ in 0..5 {
            let w = random_vec(&mut rng, sys.dim());
            let x = random_vec(&mut rng, sys.dim());
            let aw = sys.matrix.matvec(&w);
            let lhs: f64 = aw.iter().zip(&x).map(|(a, b)| a * b).sum();
            let rhs = apply_b_2d(
                &MixedSolution2D::from_vector(m2.clone(), 1, &w),
                &MixedSolution2D::from_vector(m2.clone(), 1, &x),
                &p2,
                4,
            )
            .unwrap();
            assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + rhs.abs()), "2d eps={eps}");
        }
    }
}

#[test]
fn bilinearity() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = paper_1d_problem(1e-4).unwrap();
    let m = mesh1(8, 1e-4, 2.0);
    let w = MixedSolution1D::from_vector(m.clone(), 1, &random_vec(&mut rng, 32));
    let x = MixedSolution1D::from_vector(m.clone(), 1, &random_vec(&mut rng, 32));
    let mut w3 = w.clone();
    w3.scale(3.0);
    let b1 = apply_b_1d(&w, &x, &p, 4).unwrap();
    let b3 = apply_b_1d(&w3, &x, &p, 4).unwrap();
    assert!((b3 - 3.0 * b1).abs() <= 1e-12 * (1.0 + b3.abs()));

    let p2 = manufactured_2d_problem(1e-4).unwrap();
    let m2 = mesh2(4, 1e-4, 2.0);
    let t = MixedSolution2D::from_vector(m2.clone(), 1, &random_vec(&mut rng, 192));
    let z = MixedSolution2D::from_vector(m2.clone(), 1, &random_vec(&mut rng, 192));
    let mut t3 = t.clone();
    t3.scale(-2.5);
    let b1 = apply_b_2d(&t, &z, &p2, 4).unwrap();
    let b3 = apply_b_2d(&t3, &z, &p2, 4).unwrap();
    assert!((b3 + 2.5 * b1).abs() <= 1e-12 * (1.0 + b3.abs()));
}

#[test]
fn galerkin_residual_1d() {
    for eps in EPS_GRID {
        let p = paper_1d_problem(eps).unwrap();
        let m = mesh1(16, eps, 2.0);
        let k = 2;
        let (w, stats) = solve_ldg_1d(&p, &m, k, &SolverOptions::default()).unwrap();
        assert!(stats.residual <= 1e-10);
        let dim = 2 * (k + 1) * 16;
        let scale = 1.0 + energy_norm_1d(&w, &p, k + 3).unwrap().total_sq();
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            let x = MixedSolution1D::from_vector(m.clone(), k, &e);
            let r = apply_b_1d(&w, &x, &p, k + 3).unwrap() - load_functional_1d(&p, &x.u, k + 3).unwrap();
            assert!(r.abs() <= 1e-9 * scale, "eps={eps} dof={i} r={r}");
        }
    }
}

#[test]
fn scheme_exactness_on_polynomials() {
    for eps in EPS_GRID {
        for n in [4, 16] {
            let p = polynomial_problem_1d(eps, 2).unwrap();
            let m = mesh1(n, eps, 3.0);
            let (w, _) = solve_ldg_1d(&p, &m, 2, &SolverOptions::default()).unwrap();
            let (e, b) = error_norms_1d(&w, &p, 8).unwrap();
            assert!(e.total <= 1e-9 && b.total <= 1e-9, "1d eps={eps} n={n}: {} {}", e.total, b.total);
        }
        let p = polynomial_problem_2d(eps).unwrap();
        let m = mesh2(8, eps, 3.0);
        let (t, _) = solve_ldg_2d(&p, &m, 2, &SolverOptions::default_2d()).unwrap();
        let (e, _) = error_norms_2d(&t, &p, 8).unwrap();
        assert!(e.total <= 1e-8, "2d eps={eps}: {}", e.total);
    }
}

/// A continuous interpolant vanishing at both ends has no jumps, so both
/// penalty contributions to the energy norm vanish.
#[test]
fn continuous_functions_have_no_penalty() {
    let eps = 1e-6;
    let p = paper_1d_problem(eps).unwrap();
    let m = mesh1(16, eps, 2.0);
    let mut w = MixedSolution1D::zeros(m.clone(), 1);
    let g = |x: f64| x * (1.0 - x);
    for c in 0..16 {
        let (a, b) = (m.node(c), m.node(c + 1));
        let cell = w.u.cell_mut(c);
        cell[0] = 0.5 * (g(a) + g(b));
        cell[1] = 0.5 * (g(b) - g(a));
    }
    let e = energy_norm_1d(&w, &p, 4).unwrap();
    assert!(e.u_term > 0.0);
    assert!(e.boundary_jump_term.abs() < 1e-14 && e.interface_jump_term.abs() < 1e-14);
    let b = balanced_norm_1d(&w, &p, 4).unwrap();
    assert!(b.boundary_jump_term.abs() < 1e-14 && b.interface_jump_term.abs() < 1e-14);
}

#[test]
fn symmetric_data_gives_symmetric_solution() {
    let eps = 1e-4;
    let p = manufactured_2d_problem(eps).unwrap();
    let m = mesh2(8, eps, 2.0);
    let k = 1;
    let (t, _) = solve_ldg_2d(&p, &m, k, &SolverOptions::default_2d()).unwrap();
    let nb = k + 1;
    for cj in 0..8 {
        for ci in 0..8 {
            let a = t.u.cell(ci, cj);
            let b = t.u.cell(cj, ci);
            let pa = t.p.cell(ci, cj);
            let qb = t.q.cell(cj, ci);
            for m_ in 0..nb {
                for n_ in 0..nb {
                    assert!((a[m_ * nb + n_] - b[n_ * nb + m_]).abs() < 1e-10);
                    assert!((pa[m_ * nb + n_] - qb[n_ * nb + m_]).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn condensed_and_banded_solutions_agree() {
    let eps = 1e-6;
    let p = manufactured_2d_problem(eps).unwrap();
    let m = mesh2(8, eps, 2.0);
    let (a, sa) = solve_ldg_2d(&p, &m, 2, &SolverOptions::default_2d()).unwrap();
    let banded = SolverOptions { kind: SolverKind::Banded, ..SolverOptions::default_2d() };
    let (b, sb) = solve_ldg_2d(&p, &m, 2, &banded).unwrap();
    assert!(sa.reduced_unknowns < sb.reduced_unknowns);
    let (xa, xb) = (a.to_vector(), b.to_vector());
    let scale = xb.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for (u, v) in xa.iter().zip(&xb) {
        assert!((u - v).abs() <= 1e-10 * scale);
    }

    let p1 = paper_1d_problem(eps).unwrap();
    let m1 = mesh1(64, eps, 2.0);
    let (a, _) = solve_ldg_1d(&p1, &m1, 1, &SolverOptions::default()).unwrap();
    let cond = SolverOptions { kind: SolverKind::Condensed, ..SolverOptions::default() };
    let (b, sb) = solve_ldg_1d(&p1, &m1, 1, &cond).unwrap();
    assert_eq!(sb.reduced_unknowns, 64 * 2 + 2 * 2);
    for (u, v) in a.to_vector().iter().zip(&b.to_vector()) {
        assert!((u - v).abs() <= 1e-10 * (1.0 + v.abs()));
    }
}

#[test]
fn error_quadrature_is_converged() {
    for eps in [1e-4, 1e-12] {
        for k in [1, 2] {
            let p = paper_1d_problem(eps).unwrap();
            let m = mesh1(64, eps, (k + 1) as f64);
            let (w, _) = solve_ldg_1d(&p, &m, k, &SolverOptions::default()).unwrap();
            let q = default_error_quad(k);
            let (e1, b1) = error_norms_1d(&w, &p, q).unwrap();
            let (e2, b2) = error_norms_1d(&w, &p, 2 * q).unwrap();
            assert!((e1.total / e2.total - 1.0).abs() < 1e-3);
            assert!((b1.total / b2.total - 1.0).abs() < 1e-3);
        }
    }
}

#[test]
fn balanced_errors_decrease_with_n() {
    for eps in [1e-4, 1e-8] {
        let p = paper_1d_problem(eps).unwrap();
        let mut prev = f64::INFINITY;
        for n in [16, 32, 64, 128] {
            let (w, _) = solve_ldg_1d(&p, &mesh1(n, eps, 2.0), 1, &SolverOptions::default()).unwrap();
            let b = error_norms_1d(&w, &p, 6).unwrap().1.total;
            assert!(b < prev);
            prev = b;
        }
    }
}

/// Reference magnitudes at `k = 1`, `N = 32`, `ε = 1e-4`: energy error
/// `0.26E-1` and balanced error `0.25E+0`, each to within a factor of two.
#[test]
fn reference_error_magnitudes() {
    let eps = 1e-4;
    let p = paper_1d_problem(eps).unwrap();
    let (w, _) = solve_ldg_1d(&p, &mesh1(32, eps, 2.0), 1, &SolverOptions::default()).unwrap();
    let (e, b) = error_norms_1d(&w, &p, 6).unwrap();
    let within = |got: f64, want: f64| got >= want / 2.0 && got <= want * 2.0;
    assert!(within(e.total, 0.26e-1), "energy error {:.3e} vs 2.6e-2", e.total);
    assert!(within(b.total, 0.25), "balanced error {:.3e} vs 2.5e-1", b.total);
}

/// `‖u - P⁻u‖_∞` on the coarse cells at `k = 1`, `N = 256` stays below `2 N⁻²`.
#[test]
fn coarse_projection_sup_error_bound() {
    for eps in [1e-4, 1e-8] {
        let p = paper_1d_problem(eps).unwrap();
        let (errs, _) = projection_errors_1d(&p, 256, 1, 2.0, 6).unwrap();
        let bound = 2.0 / 256f64.powi(2);
        assert!(errs.linf_coarse <= bound, "eps={eps}: {:.3e} > {bound:.3e}", errs.linf_coarse);
    }
}
