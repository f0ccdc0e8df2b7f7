//! Scalar root finding on a bracket.

use crate::error::{Error, Result};

/// Brent's method for `f(x) = 0` on `[a, b]` with `f(a)·f(b) ≤ 0`.
pub fn brent<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket(format!("f({a}) = {fa}, f({b}) = {fb}")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NonConvergence { iterations: max_iter, residual: fb.abs() })
}

/// Newton's method kept inside a shrinking bracket, for decreasing `f`.
///
/// `f` returns the value and derivative. `lo` must have `f > 0`, `hi` `f < 0`.
pub fn newton_bracketed<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut x = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
    for _ in 0..max_iter {
        let (v, d) = f(x);
        if v.abs() <= ftol {
            return Ok(x);
        }
        if v > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = if d != 0.0 { x - v / d } else { f64::NAN };
        x = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, residual: f(x).0.abs() })
}
