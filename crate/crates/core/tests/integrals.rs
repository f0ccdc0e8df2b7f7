//! Gaussian kernels checked against brute-force quadrature written here.

use approx::assert_relative_eq;
use capacity_lab::gaussian::special::normal_pdf;
use capacity_lab::gaussian::{
    gauss_tail, gauss_tail_deriv_ratio, inner_moments_h, inner_moments_xi, inner_moments_xi_quad, make_grid, tilde_h,
    AdaptiveRule, QuadratureGrid,
};
use capacity_lab::subcritical::collapsed_q1_integral;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn fine() -> AdaptiveRule {
    AdaptiveRule { abs_tol: 1e-17, rel_tol: 1e-14, max_intervals: 4000, ..Default::default() }
}

#[test]
fn tail_at_one_matches_density_integral() {
    // ∫_1^13 φ by adaptive Gauss–Kronrod, then frozen
    let oracle = fine().expect(|t| if t > 1.0 { 1.0 } else { 0.0 }, &[1.0]);
    assert!(rel(oracle, 0.158_655_253_931_457_05) < 1e-13);
    assert!(rel(gauss_tail(1.0), 0.158_655_253_931_457_05) < 1e-13);
    assert_eq!(gauss_tail(0.0), 0.5);
}

#[test]
fn deriv_ratio_asymptotes() {
    assert!((gauss_tail_deriv_ratio(10.0) / -10.0 - 1.0).abs() < 0.01);
    assert!(gauss_tail_deriv_ratio(-10.0).abs() < 1e-6);
    assert_relative_eq!(gauss_tail_deriv_ratio(0.0), -2.0 * normal_pdf(0.0), max_relative = 1e-14);
}

#[test]
fn h_moments_match_adaptive_oracle() {
    let (z, q0, rho, chi) = (0.7, 0.2, 0.5, 0.3);
    let m = inner_moments_h(z, q0, rho, chi).unwrap();
    let (a, c) = ((rho - q0).sqrt(), q0.sqrt() * z);
    let kink = [-c / a];
    let rule = fine();
    let moment = |k: i32| {
        rule.expect(
            |y| {
                let v = a * y + c;
                if v > 0.0 {
                    (-v * v / (2.0 * chi)).exp() * v.powi(k)
                } else if k == 0 {
                    1.0
                } else {
                    0.0
                }
            },
            &kink,
        )
    };
    let (i0, i1, i2) = (moment(0), moment(1), moment(2));
    assert!(rel(m.i0, i0) < 1e-8);
    assert!(rel(m.i1, i1) < 1e-8);
    assert!(rel(m.i2, i2) < 1e-8);
    assert!(rel(m.variance, i2 / i0 - (i1 / i0).powi(2)) < 1e-8);
}

#[test]
fn h_moments_flat_limit() {
    let m = inner_moments_h(0.3, 0.0, 1.0, 1e8).unwrap();
    assert!((m.i0 - 1.0).abs() < 1e-6);
    assert!(inner_moments_h(0.3, 0.5, 0.5, 1.0).is_err());
}

#[test]
fn xi_fixture_matches_hermite_400() {
    let grid = make_grid(400).unwrap();
    let c = inner_moments_xi(0.5, 2.0, 1.0, 4.0).unwrap();
    let q = inner_moments_xi_quad(0.5, 2.0, 1.0, 4.0, &grid).unwrap();
    for (x, y) in [(c.j0, q.j0), (c.j1, q.j1), (c.j2, q.j2)] {
        assert!(rel(x, y) < 1e-8, "{x} vs {y}");
    }
}

/// 100 admissible points with `(F1-F0)/E ≤ 0.7`, where a 400-node Hermite rule
/// still resolves the tilted integrand.
#[test]
fn xi_closed_form_matches_hermite_400_at_random_points() {
    let grid = make_grid(400).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f0: f64 = rng.random_range(0.0..3.0);
        let a2: f64 = rng.random_range(0.0..3.0);
        let e = a2 / rng.random_range(0.05..0.7) + 1e-3;
        let z = rng.random_range(-3.0..3.0);
        let c = inner_moments_xi(z, f0 + a2, f0, e).unwrap();
        let q = inner_moments_xi_quad(z, f0 + a2, f0, e, &grid).unwrap();
        worst = worst.max(rel(c.j0, q.j0)).max(rel(c.j2, q.j2));
        // J1 passes through zero at z = 0; compare on the J0 scale there
        worst = worst.max((c.j1 - q.j1).abs() / q.j1.abs().max(q.j0));
    }
    assert!(worst < 1e-8, "worst relative error {worst:e}");
}

/// `∫Dz∫Dy g(u)²` with `u` Gaussian of variance `γ²` equals the single `∫Dt g(γt)²`.
#[test]
fn collapsed_q1_integral_matches_double_integral() {
    let rule = AdaptiveRule::default();
    let outer = fine();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let rho: f64 = rng.random_range(0.1..1.0);
        let q1 = rho * rng.random_range(0.02..0.95);
        let q0 = q1 * rng.random_range(0.0..1.0);
        let s = (rho - q1).sqrt();
        let (a, b) = ((q1 - q0).sqrt() / s, q0.sqrt() / s);
        let double = outer.expect(
            |z| {
                outer.expect(
                    |y| {
                        let g = gauss_tail_deriv_ratio(a * y + b * z);
                        g * g
                    },
                    &[],
                )
            },
            &[],
        );
        let single = collapsed_q1_integral((q1 / (rho - q1)).sqrt(), &rule);
        assert!(rel(single, double) < 1e-8, "rho {rho} q1 {q1} q0 {q0}: {single} vs {double}");
    }
}

#[test]
fn default_grid_reproduces_low_moments() {
    let grid = QuadratureGrid::default();
    assert_relative_eq!(grid.expect(|_| 1.0), 1.0, max_relative = 1e-14);
    assert!(grid.expect(|z| z).abs() < 1e-14);
    assert_relative_eq!(grid.expect(|z| z.powi(6)), 15.0, max_relative = 1e-10);
}

fn double_factorial_odd(k: u32) -> f64 {
    (1..k).step_by(2).map(f64::from).product()
}

proptest! {
    #[test]
    fn tail_symmetry_and_monotonicity(x in -8.0f64..8.0, dx in 1e-3f64..1.0) {
        prop_assert!((gauss_tail(x) + gauss_tail(-x) - 1.0).abs() < 1e-12);
        prop_assert!(gauss_tail(x + dx) < gauss_tail(x));
    }

    #[test]
    fn hermite_rules_are_exact_on_polynomials(order in 2usize..40, k in 0u32..80) {
        prop_assume!(k < 2 * order as u32);
        let grid = make_grid(order).unwrap();
        let got = grid.expect(|z| z.powi(k as i32));
        let want = if k % 2 == 1 { 0.0 } else { double_factorial_odd(k) };
        // odd moments cancel terms of the size of the next even moment
        let scale = double_factorial_odd(k + k % 2);
        prop_assert!((got - want).abs() <= 1e-12 * scale, "order {} k {}: {} vs {}", order, k, got, want);
    }

    #[test]
    fn tilde_h_is_a_probability(v in -20.0f64..20.0, chi in 1e-6f64..1e6) {
        let h = tilde_h(v, chi).unwrap();
        prop_assert!(h > 0.0 || v > 0.0);
        prop_assert!(h <= 1.0);
        if v <= 0.0 {
            prop_assert_eq!(h, 1.0);
        }
    }

    #[test]
    fn h_moments_cauchy_schwarz(z in -6.0f64..6.0, rho in 0.05f64..1.0, frac in 0.0f64..0.99, chi in 1e-4f64..1e4) {
        let m = inner_moments_h(z, frac * rho, rho, chi).unwrap();
        prop_assert!(m.i0 > 0.0 && m.i0 <= 1.0);
        prop_assert!(m.i1 * m.i1 <= m.i0 * m.i2 * (1.0 + 1e-12) + 1e-300);
        prop_assert!(m.variance >= 0.0);
        prop_assert!((0.0..=1.0).contains(&m.pos_fraction));
    }

    #[test]
    fn xi_moments_cauchy_schwarz(z in -6.0f64..6.0, f0 in 0.0f64..50.0, a2 in 0.0f64..50.0, slack in 1e-6f64..50.0) {
        let m = inner_moments_xi(z, f0 + a2, f0, a2 + slack).unwrap();
        prop_assert!(m.j0 >= 1.0);
        prop_assert!(m.j2 >= 0.0);
        prop_assert!(m.j1 * m.j1 <= m.j0 * m.j2 * (1.0 + 1e-12));
    }
}
