//! Inner `y`-moments of the two effective single-replica weights.
//!
//! For `v ~ N(μ, σ²)` the weight `H̃(v, χ) = Θ(-v) + Θ(v) e^{-v²/(2χ)}` splits
//! into a Gaussian tail plus a product of two Gaussians, so every moment has a
//! closed form. The same holds for `Ξ̃(h, E) = e^{h²/(2E)}` with
//! `h = a y + c`, which is a Gaussian tilt of `y` as long as `E > a²`.
//!
//! Both closed forms are evaluated in log space. The `*_quad` twins integrate
//! the raw weights on a grid and exist as independent cross-checks.

use super::quadrature::QuadratureGrid;
use super::special::{inverse_mills_lower, ln_gauss_tail, log_add_exp};
use crate::error::{Error, Result};

/// `H̃(v, χ)`, with `Θ(0) = 1`.
pub fn tilde_h(v: f64, chi: f64) -> Result<f64> {
    if !(chi > 0.0) {
        return Err(Error::Domain(format!("tilde_h needs chi > 0, got {chi}")));
    }
    Ok(tilde_h_unchecked(v, chi))
}

#[inline]
fn tilde_h_unchecked(v: f64, chi: f64) -> f64 {
    if v <= 0.0 {
        1.0
    } else {
        (-0.5 * v * v / chi).exp()
    }
}

/// `I0 = ∫Dy H̃`, `I1 = ∫Dy H̃ Θ(v) v`, `I2 = ∫Dy H̃ Θ(v) v²` at one outer node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerMomentsH {
    pub i0: f64,
    pub i1: f64,
    pub i2: f64,
    pub ln_i0: f64,
    /// `I1 / I0`
    pub ratio1: f64,
    /// `I2 / I0`
    pub ratio2: f64,
    /// `∫Dy H̃ Θ(v) / I0`, the share of the weight on `v > 0`.
    pub pos_fraction: f64,
    /// `ratio2 - ratio1²`, computed without the subtraction.
    pub variance: f64,
}

fn check_h_domain(q0: f64, rho: f64, chi: f64) -> Result<()> {
    if !(q0 >= 0.0 && q0 < rho) {
        return Err(Error::Domain(format!("need 0 <= q0 < rho, got q0 = {q0}, rho = {rho}")));
    }
    if !(chi > 0.0) {
        return Err(Error::Domain(format!("need chi > 0, got {chi}")));
    }
    Ok(())
}

/// Closed-form moments with `v = √(ρ-q0) y + √q0 z`.
pub fn inner_moments_h(z: f64, q0: f64, rho: f64, chi: f64) -> Result<InnerMomentsH> {
    check_h_domain(q0, rho, chi)?;
    let sig2 = rho - q0;
    let mu = q0.sqrt() * z;
    let ln_a = ln_gauss_tail(mu / sig2.sqrt());

    let denom = chi + sig2;
    let ln_c = 0.5 * (chi / denom).ln() - 0.5 * mu * mu / denom;
    let m = mu * chi / denom;
    let s = (sig2 * chi / denom).sqrt();
    let a0 = m / s;
    let ln_b = ln_c + ln_gauss_tail(-a0);
    let ln_i0 = log_add_exp(ln_a, ln_b);
    let pos = (ln_b - ln_i0).exp();
    let r = inverse_mills_lower(a0);
    let ratio1 = pos * (m + s * r);
    let ratio2 = pos * (m * m + s * s + m * s * r);
    // law of total variance over the two pieces of H̃
    let neg = (ln_a - ln_i0).exp();
    let cond_var = s * s * (1.0 - r * (r + a0)).max(0.0);
    let variance = pos * cond_var + pos * neg * (m + s * r).powi(2);
    let i0 = ln_i0.exp();
    Ok(InnerMomentsH {
        i0,
        i1: ratio1 * i0,
        i2: ratio2 * i0,
        ln_i0,
        ratio1,
        ratio2,
        pos_fraction: pos,
        variance,
    })
}

/// Same moments by direct quadrature of `H̃` over `y`.
pub fn inner_moments_h_quad(
    z: f64,
    q0: f64,
    rho: f64,
    chi: f64,
    grid: &QuadratureGrid,
) -> Result<InnerMomentsH> {
    check_h_domain(q0, rho, chi)?;
    let (a, c) = ((rho - q0).sqrt(), q0.sqrt() * z);
    let [i0, i1, i2, ip] = grid.expect_vec(|y| {
        let v = a * y + c;
        let w = tilde_h_unchecked(v, chi);
        if v >= 0.0 {
            [w, w * v, w * v * v, w]
        } else {
            [w, 0.0, 0.0, 0.0]
        }
    });
    Ok(InnerMomentsH {
        i0,
        i1,
        i2,
        ln_i0: i0.ln(),
        ratio1: i1 / i0,
        ratio2: i2 / i0,
        pos_fraction: ip / i0,
        variance: i2 / i0 - (i1 / i0).powi(2),
    })
}

/// `J0 = ∫Dy Ξ̃`, `J1 = ∫Dy Ξ̃ h`, `J2 = ∫Dy Ξ̃ h²` at one outer node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerMomentsXi {
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
    pub ln_j0: f64,
    /// `J1 / J0`
    pub mean: f64,
    /// `J2 / J0`
    pub second: f64,
}

fn check_xi_domain(f1: f64, f0: f64, e: f64) -> Result<()> {
    if !(f0 >= 0.0 && f1 >= f0) {
        return Err(Error::Domain(format!("need 0 <= F0 <= F1, got F1 = {f1}, F0 = {f0}")));
    }
    if !(e > f1 - f0) {
        return Err(Error::Divergence { e, gap: f1 - f0 });
    }
    Ok(())
}

/// Closed-form Gaussian-tilt moments with `h = √(F1-F0) y + √F0 z`.
pub fn inner_moments_xi(z: f64, f1: f64, f0: f64, e: f64) -> Result<InnerMomentsXi> {
    check_xi_domain(f1, f0, e)?;
    let a2 = f1 - f0;
    let d = e - a2;
    let c = f0.sqrt() * z;
    let ln_j0 = 0.5 * (e / d).ln() + 0.5 * c * c / d;
    let mean = c * e / d;
    let second = a2 * e / d + mean * mean;
    let j0 = ln_j0.exp();
    Ok(InnerMomentsXi { j0, j1: mean * j0, j2: second * j0, ln_j0, mean, second })
}

/// Same moments by direct quadrature. Unreliable as `E → F1-F0`.
pub fn inner_moments_xi_quad(
    z: f64,
    f1: f64,
    f0: f64,
    e: f64,
    grid: &QuadratureGrid,
) -> Result<InnerMomentsXi> {
    check_xi_domain(f1, f0, e)?;
    let (a, c) = ((f1 - f0).sqrt(), f0.sqrt() * z);
    let [j0, j1, j2] = grid.expect_vec(|y| {
        let h = a * y + c;
        let w = (0.5 * h * h / e).exp();
        [w, w * h, w * h * h]
    });
    Ok(InnerMomentsXi { j0, j1, j2, ln_j0: j0.ln(), mean: j1 / j0, second: j2 / j0 })
}
