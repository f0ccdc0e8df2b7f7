//! Phase-diagram coordinates and solver settings shared by both regimes.

use serde::Deserialize;

use crate::error::{Error, Result};

/// One `(ρ, α)` point: selection ratio and pattern load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint {
    pub rho: f64,
    pub alpha: f64,
}

impl ModelPoint {
    pub fn new(rho: f64, alpha: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::Domain(format!("rho must lie in (0, 1], got {rho}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { rho, alpha })
    }

    /// `α_CG = 2ρ`.
    pub fn alpha_cg(&self) -> f64 {
        2.0 * self.rho
    }
}

/// Convergence controls for the saddle-point solvers and the capacity search.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iter: usize,
    /// Relaxation weight of the damped subcritical iteration.
    pub damping: f64,
    /// Final bracket width for `α_VS`.
    pub alpha_tolerance: f64,
    /// Upper end of the `α` scan in units of `α_CG`.
    pub alpha_scan_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iter: 5000, damping: 0.5, alpha_tolerance: 1e-4, alpha_scan_max: 6.0 }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("tolerance must be positive and max_iter nonzero".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.alpha_tolerance > 0.0) || !(self.alpha_scan_max > 1.0) {
            return Err(Error::Config("alpha_tolerance must be positive and alpha_scan_max above 1".into()));
        }
        Ok(())
    }
}

/// Binary entropy in nats, `-(1-ρ)ln(1-ρ) - ρ ln ρ`.
pub fn binary_entropy(rho: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    term(rho) + term(1.0 - rho)
}
