//! Standard-normal tail functions.
//!
//! `H(x)` is the upper tail of the standard Gaussian. For `x > 6` everything is
//! evaluated through the continued fraction of the Mills ratio, which keeps the
//! tail, its logarithm and `H'/H` accurate long after `erfc` has underflowed.

use std::f64::consts::FRAC_1_SQRT_2;

/// `1 / sqrt(2π)`
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// `ln sqrt(2π)`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Above this argument the continued-fraction branch is used.
const TAIL_SWITCH: f64 = 6.0;

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `1/M(x) - x` where `M(x) = H(x)/φ(x)` is the Mills ratio.
///
/// Evaluates `1/(x + 2/(x + 3/(x + ...)))` with the modified Lentz method.
/// Only meaningful for `x > 0`; converges in a few dozen terms for `x ≥ 6`.
fn mills_cf_tail(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    // f = 0 + 1/(x + 2/(x + 3/(x + ...)))
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..2000 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}

/// Upper Gaussian tail `H(x) = ∫_x^∞ Dz`.
pub fn gauss_tail(x: f64) -> f64 {
    if x > TAIL_SWITCH {
        normal_pdf(x) / (x + mills_cf_tail(x))
    } else if x < -TAIL_SWITCH {
        1.0 - gauss_tail(-x)
    } else {
        0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// Standard normal CDF, `Φ(x) = H(-x)`.
#[inline]
pub fn gauss_cdf(x: f64) -> f64 {
    gauss_tail(-x)
}

/// `ln H(x)`, finite for every finite `x`.
pub fn ln_gauss_tail(x: f64) -> f64 {
    if x > TAIL_SWITCH {
        -0.5 * x * x - LN_SQRT_2PI - (x + mills_cf_tail(x)).ln()
    } else if x < -TAIL_SWITCH {
        (-gauss_tail(-x)).ln_1p()
    } else {
        gauss_tail(x).ln()
    }
}

/// `H'(x)/H(x) = -φ(x)/H(x)`.
///
/// Behaves like `-x` for large positive `x` and vanishes for large negative `x`.
pub fn gauss_tail_deriv_ratio(x: f64) -> f64 {
    if x > TAIL_SWITCH {
        -(x + mills_cf_tail(x))
    } else {
        -normal_pdf(x) / gauss_tail(x)
    }
}

/// `d²/dx² ln H(x) = -x·g - g²` with `g = H'/H`; always in `(-1, 0)`.
pub fn ln_gauss_tail_curvature(x: f64) -> f64 {
    if x > TAIL_SWITCH {
        // g = -(x + t), so -x g - g² = -(x + t) t
        let t = mills_cf_tail(x);
        -(x + t) * t
    } else {
        let g = gauss_tail_deriv_ratio(x);
        -g * (x + g)
    }
}

/// `φ(x)/Φ(x)`, the inverse Mills ratio of the lower tail.
#[inline]
pub fn inverse_mills_lower(x: f64) -> f64 {
    -gauss_tail_deriv_ratio(-x)
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Logistic function `1/(1+e^{-x})`.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    // Reference values from 50-digit evaluation of erfc.
    const TAIL_TABLE: &[(f64, f64)] = &[
        (0.5, 0.308_537_538_725_986_9),
        (1.0, 0.158_655_253_931_457_05),
        (2.0, 0.022_750_131_948_179_207),
        (3.0, 0.001_349_898_031_630_094_6),
        (5.0, 2.866_515_718_791_939e-7),
        (6.0, 9.865_876_450_376_98e-10),
        (6.5, 4.016_000_583_859_119e-11),
        (8.0, 6.220_960_574_271_785e-16),
        (10.0, 7.619_853_024_160_527e-24),
    ];

    #[test]
    fn tail_matches_reference_table() {
        for &(x, h) in TAIL_TABLE {
            assert_relative_eq!(gauss_tail(x), h, max_relative = 1e-12);
            assert_relative_eq!(ln_gauss_tail(x), h.ln(), max_relative = 1e-13);
        }
    }

    #[test]
    fn tail_at_zero_and_symmetry() {
        assert_eq!(gauss_tail(0.0), 0.5);
        for i in -80..=80 {
            let x = i as f64 * 0.1;
            assert!((gauss_tail(x) + gauss_tail(-x) - 1.0).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn deriv_ratio_limits() {
        assert_relative_eq!(
            gauss_tail_deriv_ratio(0.0),
            -2.0 / (2.0 * PI).sqrt(),
            max_relative = 1e-14
        );
        assert!((gauss_tail_deriv_ratio(10.0) + 10.0).abs() < 0.1);
        assert!(gauss_tail_deriv_ratio(-10.0).abs() < 1e-6);
        // far tail stays finite where erfc has long underflowed
        assert_relative_eq!(gauss_tail_deriv_ratio(60.0), -60.016_657_420_2, max_relative = 1e-8);
    }

    #[test]
    fn branches_agree_at_switch() {
        let below = 0.5 * libm::erfc(TAIL_SWITCH * FRAC_1_SQRT_2);
        let above = normal_pdf(TAIL_SWITCH) / (TAIL_SWITCH + mills_cf_tail(TAIL_SWITCH));
        assert_relative_eq!(below, above, max_relative = 1e-13);
    }

    #[test]
    fn curvature_bounds_and_finite_difference() {
        for i in -200..=400 {
            let x = i as f64 * 0.05;
            let c = ln_gauss_tail_curvature(x);
            assert!(c < 0.0 && c > -1.0, "x = {x}, c = {c}");
        }
        for &x in &[-3.0, -0.4, 0.0, 1.3, 4.0, 5.9, 6.1, 9.0] {
            let h = 1e-4;
            let fd = (ln_gauss_tail(x + h) - 2.0 * ln_gauss_tail(x) + ln_gauss_tail(x - h)) / (h * h);
            assert!((fd - ln_gauss_tail_curvature(x)).abs() < 1e-5, "x = {x}");
        }
    }

    #[test]
    fn log_helpers() {
        assert_relative_eq!(log_add_exp(0.0, 0.0), 2f64.ln());
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
        assert_relative_eq!(log_add_exp(1000.0, 999.0), 1000.0 + (-1f64).exp().ln_1p());
        assert_relative_eq!(logistic(0.0), 0.5);
        assert!(logistic(-800.0) >= 0.0 && logistic(800.0) == 1.0);
        assert_relative_eq!(softplus(0.0), 2f64.ln());
        assert_relative_eq!(softplus(50.0), 50.0, max_relative = 1e-15);
    }
}
