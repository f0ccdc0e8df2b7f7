//! Saddle point below the Cover–Gardner load, `α < 2ρ`.
//!
//! Here the conjugates stay finite and `H^m, Ξ^m → 1`, so the six equations
//! decouple:
//!
//! ```text
//! q̂1 = α/(ρ-q1) ∫Dt (H'/H)(γt)²          γ = √(q1/(ρ-q1))
//! q̂0 = α/(ρ-q1) ∫Dz (∫Dy (H'/H)(u))²     u = (√(q1-q0) y + √q0 z)/√(ρ-q1)
//! Q̂ + q̂1 = ρ/(ρ-q1)
//! q1 = ρ q̂1/(Q̂+q̂1)²,  q0 = ρ² q̂0/(Q̂+q̂1)²
//! ρ = e^{-K}/(1+e^{-K})
//! ```
//!
//! Substituting the third line into the fourth closes an equation in `q1`
//! alone, which is iterated first; `q0` follows from a second damped loop.

use crate::error::{Error, Result};
use crate::gaussian::special::{gauss_tail_deriv_ratio, softplus};
use crate::gaussian::{AdaptiveRule, QuadratureGrid};
use crate::model::{binary_entropy, ModelPoint, SolverOptions};

/// `α_CG = 2ρ`.
pub fn cover_gardner_capacity(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1], got {rho}")));
    }
    Ok(2.0 * rho)
}

/// Cluster entropy below `α_CG`: the binary entropy of `ρ` in nats.
pub fn entropy_subcritical(rho: f64) -> f64 {
    binary_entropy(rho)
}

/// Subcritical order parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RSOrderParams {
    pub q1: f64,
    pub q0: f64,
    pub q1_hat: f64,
    pub q0_hat: f64,
    /// `Q̂`
    pub big_q_hat: f64,
    /// Selection potential; `-∞` at `ρ = 1`.
    pub k: f64,
    pub gamma: f64,
    /// Entropy from the `m → 0` free energy, `ln(1+e^{-K}) + Kρ`.
    pub sigma: f64,
    /// Largest scaled residual over the six equations.
    pub residual: f64,
    pub iterations: usize,
}

/// `∫Dt (H'/H)(γt)²`.
pub fn collapsed_q1_integral(gamma: f64, rule: &AdaptiveRule) -> f64 {
    rule.expect(
        |t| {
            let g = gauss_tail_deriv_ratio(gamma * t);
            g * g
        },
        &[0.0],
    )
}

/// `∫Dz (∫Dy (H'/H)(u))²` with `u = (√(q1-q0) y + √q0 z)/√(ρ-q1)`.
pub fn q0_double_integral(q1: f64, q0: f64, rho: f64, grid: &QuadratureGrid, rule: &AdaptiveRule) -> f64 {
    let s = (rho - q1).sqrt();
    let a = (q1 - q0).max(0.0).sqrt() / s;
    let b = q0.sqrt() / s;
    grid.expect(|z| {
        let c = b * z;
        let inner = if a > 0.0 {
            rule.expect(|y| gauss_tail_deriv_ratio(a * y + c), &[-c / a])
        } else {
            gauss_tail_deriv_ratio(c)
        };
        inner * inner
    })
}

fn selection_potential(rho: f64) -> f64 {
    if rho >= 1.0 {
        f64::NEG_INFINITY
    } else {
        ((1.0 - rho) / rho).ln()
    }
}

fn sigma_from_k(k: f64, rho: f64) -> f64 {
    if k == f64::NEG_INFINITY {
        0.0
    } else {
        softplus(-k) + k * rho
    }
}

/// Solve the subcritical saddle point by damped fixed-point iteration.
pub fn solve_subcritical(point: ModelPoint, grid: &QuadratureGrid, opts: &SolverOptions) -> Result<RSOrderParams> {
    let ModelPoint { rho, alpha } = point;
    if alpha >= 2.0 * rho {
        return Err(Error::Regime(format!(
            "alpha = {alpha} is not below alpha_CG = {}; use the supercritical solver",
            2.0 * rho
        )));
    }
    let rule = AdaptiveRule::default();
    let eta = opts.damping;
    let stop = 0.01 * opts.tolerance;
    let mut iterations = 0;

    // q1 alone: q1 = α(ρ-q1)/ρ · I(γ)
    let q1_map = |q1: f64| alpha * (rho - q1) / rho * collapsed_q1_integral((q1 / (rho - q1)).sqrt(), &rule);
    let mut q1 = 0.5 * rho;
    let mut res = f64::INFINITY;
    for _ in 0..opts.max_iter {
        iterations += 1;
        let next = q1_map(q1);
        res = (next - q1).abs();
        if res <= stop {
            break;
        }
        q1 = ((1.0 - eta) * q1 + eta * next).clamp(0.0, rho * (1.0 - 1e-15));
    }
    if res > stop {
        return Err(Error::NonConvergence { iterations, residual: res });
    }

    // q0 given q1: q0 = α(ρ-q1) · ∫Dz (∫Dy g)²
    let q0_map = |q0: f64| alpha * (rho - q1) * q0_double_integral(q1, q0, rho, grid, &rule);
    let mut q0 = (0.25 * rho).min(q1);
    res = f64::INFINITY;
    for _ in 0..opts.max_iter {
        iterations += 1;
        let next = q0_map(q0);
        res = (next - q0).abs();
        if res <= stop {
            break;
        }
        q0 = ((1.0 - eta) * q0 + eta * next).clamp(0.0, q1);
    }
    if res > stop {
        return Err(Error::NonConvergence { iterations, residual: res });
    }

    let gamma = (q1 / (rho - q1)).sqrt();
    let q1_hat = alpha / (rho - q1) * collapsed_q1_integral(gamma, &rule);
    let q0_hat = alpha / (rho - q1) * q0_double_integral(q1, q0, rho, grid, &rule);
    let big_q_hat = rho / (rho - q1) - q1_hat;
    let k = selection_potential(rho);
    let mut params = RSOrderParams {
        q1,
        q0,
        q1_hat,
        q0_hat,
        big_q_hat,
        k,
        gamma,
        sigma: sigma_from_k(k, rho),
        residual: 0.0,
        iterations,
    };
    params.residual = residuals(&params, point, grid).into_iter().fold(0.0, f64::max);
    if !(params.residual < opts.tolerance) {
        return Err(Error::NonConvergence { iterations, residual: params.residual });
    }
    Ok(params)
}

/// Scaled residuals `|lhs - rhs| / max(1, |lhs|)` of the six equations.
pub fn residuals(p: &RSOrderParams, point: ModelPoint, grid: &QuadratureGrid) -> [f64; 6] {
    let ModelPoint { rho, alpha } = point;
    let rule = AdaptiveRule::default();
    let scaled = |lhs: f64, rhs: f64| (lhs - rhs).abs() / lhs.abs().max(1.0);
    let gamma = (p.q1 / (rho - p.q1)).sqrt();
    let stiff = p.big_q_hat + p.q1_hat;
    let selected = if p.k == f64::NEG_INFINITY { 1.0 } else { crate::gaussian::special::logistic(-p.k) };
    [
        scaled(p.q1_hat, alpha / (rho - p.q1) * collapsed_q1_integral(gamma, &rule)),
        scaled(p.q0_hat, alpha / (rho - p.q1) * q0_double_integral(p.q1, p.q0, rho, grid, &rule)),
        scaled(rho, rho / stiff + p.q1),
        scaled(p.q1, rho * p.q1_hat / (stiff * stiff)),
        scaled(p.q0, rho * rho * p.q0_hat / (stiff * stiff)),
        scaled(rho, selected),
    ]
}

/// `ρ - q1` from the collapsed `q1` equation alone, by bisection.
///
/// Slow but independent of the damped iteration; handy as a cross-check.
pub fn q1_by_bisection(point: ModelPoint) -> Result<f64> {
    let ModelPoint { rho, alpha } = point;
    let rule = AdaptiveRule::default();
    let f = |q1: f64| Ok(q1 - alpha * (rho - q1) / rho * collapsed_q1_integral((q1 / (rho - q1)).sqrt(), &rule));
    crate::roots::brent(f, 1e-14 * rho, rho * (1.0 - 1e-14), 1e-15, 500)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn capacity_and_entropy_values() {
        assert_eq!(cover_gardner_capacity(0.5).unwrap(), 1.0);
        assert_eq!(cover_gardner_capacity(1.0).unwrap(), 2.0);
        assert_eq!(cover_gardner_capacity(0.25).unwrap(), 0.5);
        assert!(cover_gardner_capacity(0.0).is_err());
        assert!(cover_gardner_capacity(1.5).is_err());
        assert_relative_eq!(entropy_subcritical(0.5), 2f64.ln(), max_relative = 1e-15);
        assert_eq!(entropy_subcritical(1.0), 0.0);
        // -0.75 ln 0.75 - 0.25 ln 0.25
        assert_relative_eq!(entropy_subcritical(0.25), 0.562_335_144_618_808_7, max_relative = 1e-14);
    }

    #[test]
    fn collapsed_integral_limits() {
        let rule = AdaptiveRule::default();
        // γ = 0: (H'/H)(0)² = 2/π
        assert_relative_eq!(collapsed_q1_integral(0.0, &rule), 2.0 / std::f64::consts::PI, max_relative = 1e-13);
        // γ ≫ 1: ≈ γ²/2
        let g = 40.0;
        assert!((collapsed_q1_integral(g, &rule) / (g * g / 2.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_supercritical_load() {
        let grid = QuadratureGrid::default();
        let p = ModelPoint::new(0.5, 1.0).unwrap();
        assert!(matches!(solve_subcritical(p, &grid, &SolverOptions::default()), Err(Error::Regime(_))));
    }

    #[test]
    fn small_load_and_invariants() {
        let grid = QuadratureGrid::default();
        let opts = SolverOptions::default();
        let p = ModelPoint::new(0.5, 1e-3).unwrap();
        let s = solve_subcritical(p, &grid, &opts).unwrap();
        assert!(s.q1 < 1e-3 && s.q0 < 1e-3 && s.q1_hat < 1e-2);

        let p = ModelPoint::new(0.5, 0.6).unwrap();
        let s = solve_subcritical(p, &grid, &opts).unwrap();
        assert!(s.residual < 1e-10);
        assert!(0.0 <= s.q0 && s.q0 <= s.q1 && s.q1 < 0.5);
        assert!(s.q1_hat >= s.q0_hat && s.q0_hat >= 0.0);
        assert_relative_eq!(s.big_q_hat + s.q1_hat, 0.5 / (0.5 - s.q1), max_relative = 1e-14);
        assert_eq!(s.k, 0.0);
    }

    #[test]
    fn full_selection_is_plain_gardner() {
        let grid = QuadratureGrid::default();
        let s = solve_subcritical(ModelPoint::new(1.0, 1.0).unwrap(), &grid, &SolverOptions::default()).unwrap();
        assert_eq!(s.k, f64::NEG_INFINITY);
        assert_eq!(s.sigma, 0.0);
        assert!(s.q1 > 0.0 && s.q1 < 1.0);
    }
}
