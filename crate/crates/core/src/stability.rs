//! de Almeida–Thouless margin `λλ̂ - 1` of the replica-symmetric solution.
//!
//! Above `α_CG`, `∂²_v ln H̃ = -Θ(v)/χ` away from `v = 0` and
//! `∂²_h ln Ξ̃ = 1/E`, so
//!
//! ```text
//! λ = α/χ² ⟨∫Dy H̃ Θ(v) / ∫Dy H̃⟩_z,     λ̂ = E⁻² ⟨σ⟩_z = ρ/E².
//! ```
//!
//! Below `α_CG` the same linearization with finite conjugates gives
//! `λ = α/(ρ-q1)² ∫Dt [(ln H)''(γt)]²` and `λ̂ = ρ/(Q̂+q̂1)²`.

use crate::error::Result;
use crate::gaussian::special::ln_gauss_tail_curvature;
use crate::gaussian::{AdaptiveRule, QuadratureGrid};
use crate::model::ModelPoint;
use crate::subcritical::RSOrderParams;
use crate::supercritical::{at_factors, RescaledOrderParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ATReport {
    pub lambda: f64,
    pub lambda_hat: f64,
    /// `λλ̂ - 1`
    pub margin: f64,
    /// `margin < 0`
    pub stable: bool,
}

impl ATReport {
    fn new(lambda: f64, lambda_hat: f64) -> Self {
        let margin = lambda * lambda_hat - 1.0;
        Self { lambda, lambda_hat, margin, stable: margin < 0.0 }
    }
}

/// AT margin of a converged supercritical solution.
pub fn at_check(params: &RescaledOrderParams, point: ModelPoint, grid: &QuadratureGrid) -> Result<ATReport> {
    let (lambda, lambda_hat) = at_factors(params, point, grid)?;
    Ok(ATReport::new(lambda, lambda_hat))
}

/// AT margin of a converged subcritical solution.
pub fn at_margin_subcritical(params: &RSOrderParams, point: ModelPoint) -> Result<ATReport> {
    let ModelPoint { rho, alpha } = point;
    let gap = rho - params.q1;
    let curv = AdaptiveRule::default().expect(
        |t| {
            let c = ln_gauss_tail_curvature(params.gamma * t);
            c * c
        },
        &[0.0],
    );
    let stiff = params.big_q_hat + params.q1_hat;
    Ok(ATReport::new(alpha / (gap * gap) * curv, rho / (stiff * stiff)))
}
