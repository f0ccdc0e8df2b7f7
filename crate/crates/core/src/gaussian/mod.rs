//! Gaussian special functions, quadrature and the inner moment integrals.

pub mod adaptive;
pub mod moments;
pub mod quadrature;
pub mod special;

pub use adaptive::AdaptiveRule;
pub use moments::{
    inner_moments_h, inner_moments_h_quad, inner_moments_xi, inner_moments_xi_quad, tilde_h,
    InnerMomentsH, InnerMomentsXi,
};
pub use quadrature::{make_grid, QuadratureGrid};
pub use special::{gauss_tail, gauss_tail_deriv_ratio, ln_gauss_tail, ln_gauss_tail_curvature};
