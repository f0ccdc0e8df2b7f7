//! Rescaled saddle point above the Cover–Gardner load and the selection
//! capacity `α_VS`.
//!
//! With `F1 = m²q̂1`, `F0 = m²q̂0`, `E = m(Q̂+q̂1)` and `χ = (ρ-q1)/m` the
//! `m → 0` equations read
//!
//! ```text
//! F1 = α/χ² ⟨I2/I0⟩_z               F0 = α/χ² ⟨(I1/I0)²⟩_z
//! ρ  = E⁻² ⟨σ J2/J0⟩_z              χ  = ρ/E
//! q0 = E⁻² ⟨(σ J1/J0)²⟩_z           ρ  = ⟨σ⟩_z
//! ```
//!
//! where `σ = e^{-K}J0/(1+e^{-K}J0)` and the `I`, `J` are the inner moments of
//! `H̃` and `Ξ̃` (see [`crate::gaussian::moments`]).
//!
//! The solver treats `(ln χ, q0)` as the only outer unknowns. For a given pair,
//! `F1` and `F0` are explicit, `E` is the root of the `ρ = E⁻²⟨…⟩` equation
//! with `K` re-solved from the selection constraint at every trial `E`, and
//! the remaining two equations produce updated `(χ, q0)`. Newton's method in
//! `(ln χ, ln(ρ - q0))` with a finite-difference Jacobian drives the update to
//! a fixed point; a damped step is the fallback when a Newton step cannot be
//! made to reduce the mismatch.
//!
//! Near the end of the branch the solution becomes nearly degenerate in `χ`,
//! and [`capacity_vs`] switches to [`solve_at_fixed_chi`], which trades `α`
//! for `χ` as the unknown.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::gaussian::special::{logistic, softplus};
use crate::gaussian::{inner_moments_h, QuadratureGrid};
use crate::model::{binary_entropy, ModelPoint, SolverOptions};
use crate::roots::{brent, newton_bracketed};
use crate::subcritical::solve_subcritical;

/// Supercritical order parameters and the cluster entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledOrderParams {
    pub f1: f64,
    pub f0: f64,
    pub e: f64,
    pub chi: f64,
    pub q0: f64,
    pub k: f64,
    pub sigma: f64,
    /// Largest scaled residual over the six equations.
    pub residual: f64,
    pub iterations: usize,
}

/// Outcome of the `α_VS` search at one `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub rho: f64,
    pub alpha_cg: f64,
    pub alpha_vs: f64,
    /// Final `(α_low, α_high)` with `Σ(α_low) > 0 > Σ(α_high)`.
    pub bracket: (f64, f64),
    pub sigma_residual: f64,
    /// Solution at `α_vs`.
    pub params: RescaledOrderParams,
}

/// Nodes with `z ≥ 0` and mirrored weights, for integrands even in `z`.
struct Folded {
    z2: Vec<f64>,
    w: Vec<f64>,
}

impl Folded {
    fn new(grid: &QuadratureGrid) -> Self {
        let n = grid.order;
        let symmetric = (0..n).all(|i| {
            let j = n - 1 - i;
            (grid.nodes[i] + grid.nodes[j]).abs() <= 1e-14 * grid.nodes[j].abs().max(1.0)
                && (grid.weights[i] - grid.weights[j]).abs() <= 1e-14 * grid.weights[i].max(1e-300)
        });
        let (mut z2, mut w) = (Vec::with_capacity(n), Vec::with_capacity(n));
        if symmetric {
            for i in n / 2..n {
                let z = grid.nodes[i];
                z2.push(z * z);
                w.push(if n % 2 == 1 && i == n / 2 { grid.weights[i] } else { 2.0 * grid.weights[i] });
            }
        } else {
            for (z, wt) in grid.nodes.iter().zip(&grid.weights) {
                z2.push(z * z);
                w.push(*wt);
            }
        }
        Self { z2, w }
    }
}

/// `ln J0 = c0 + c2 z²` together with the moment coefficients at fixed `(F1, F0, E)`.
#[derive(Debug, Clone, Copy)]
struct XiCoeffs {
    c0: f64,
    c2: f64,
    /// `J2/J0 = s0 + s2 z²` and `(J1/J0)² = s2 z²`
    s0: f64,
    s2: f64,
}

impl XiCoeffs {
    /// `a2 = F1 - F0` is passed separately because it is accumulated directly
    /// rather than formed as a difference.
    fn new(a2: f64, f0: f64, e: f64) -> Result<Self> {
        let d = e - a2;
        if !(d > 0.0) || !(f0 >= 0.0) || !(a2 >= 0.0) {
            return Err(Error::Divergence { e, gap: a2 });
        }
        let r = e / d;
        Ok(Self { c0: 0.5 * r.ln(), c2: 0.5 * f0 / d, s0: a2 * r, s2: f0 * r * r })
    }
}

/// Explicit `H̃`-side quantities at given `(χ, q0)`.
#[derive(Debug, Clone, Copy)]
struct HSide {
    f1: f64,
    f0: f64,
    /// `F1 - F0` from the conditional variances, free of cancellation when
    /// both are large.
    a2: f64,
    ln_i0: f64,
    pos: f64,
}

fn h_side(chi: f64, q0: f64, point: ModelPoint, grid: &QuadratureGrid) -> Result<HSide> {
    let mut acc = [0.0; 5];
    for (&z, &w) in grid.nodes.iter().zip(&grid.weights) {
        let m = inner_moments_h(z, q0, point.rho, chi)?;
        acc[0] += w * m.ratio2;
        acc[1] += w * m.ratio1 * m.ratio1;
        acc[2] += w * m.ln_i0;
        acc[3] += w * m.pos_fraction;
        acc[4] += w * m.variance;
    }
    let s = point.alpha / (chi * chi);
    Ok(HSide { f1: s * acc[0], f0: s * acc[1], a2: s * acc[4], ln_i0: acc[2], pos: acc[3] })
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `K` such that `⟨σ(ln J0 - K)⟩ = ρ`.
fn solve_k(x: &XiCoeffs, fold: &Folded, rho: f64, start: f64) -> Result<f64> {
    let zmax2 = fold.z2.iter().copied().fold(0.0, f64::max);
    let lo = x.c0 - logit(rho) - 1.0;
    let hi = x.c0 + x.c2 * zmax2 - logit(rho) + 1.0;
    let f = |k: f64| {
        let (mut v, mut d) = (0.0, 0.0);
        for (&z2, &w) in fold.z2.iter().zip(&fold.w) {
            let s = logistic(x.c0 + x.c2 * z2 - k);
            v += w * s;
            d -= w * s * (1.0 - s);
        }
        (v - rho, d)
    };
    newton_bracketed(f, lo, hi, start, 1e-15 * rho, 200)
}

/// Right-hand side of the `ρ = E⁻²⟨σ J2/J0⟩` equation, minus `ρ`, with `K` re-solved.
fn e_equation(a2: f64, f0: f64, e: f64, fold: &Folded, rho: f64, k_start: f64) -> Result<(f64, f64)> {
    let x = XiCoeffs::new(a2, f0, e)?;
    let k = solve_k(&x, fold, rho, k_start)?;
    let mut acc = 0.0;
    for (&z2, &w) in fold.z2.iter().zip(&fold.w) {
        acc += w * logistic(x.c0 + x.c2 * z2 - k) * (x.s0 + x.s2 * z2);
    }
    Ok((acc / (e * e) - rho, k))
}

/// Solve for `E` (and `K`) at fixed `(F1, F0)`. The search runs in `ln(E - (F1-F0))`.
fn solve_e(a2: f64, f0: f64, fold: &Folded, rho: f64, guess: Option<(f64, f64)>) -> Result<(f64, f64)> {
    let fallback = (-logit(rho), a2.max(1e-3).ln());
    let (mut k_hint, t0) = match guess {
        Some((e, k)) if e.is_finite() && k.is_finite() && (e - a2) > 1e-12 * e => (k, (e - a2).ln()),
        _ => fallback,
    };
    let mut g = |t: f64| -> Result<f64> {
        let (v, k) = e_equation(a2, f0, a2 + t.exp(), fold, rho, k_hint)?;
        k_hint = k;
        Ok(v)
    };
    // g decreases from +∞ (D → 0) to -ρ (D → ∞)
    let mut lo = t0 - 0.5;
    let mut hi = t0 + 0.5;
    let mut expand = 0;
    while g(lo)? <= 0.0 {
        lo -= 2f64.powi(expand);
        expand += 1;
        if expand > 60 || !((a2 + lo.exp()) - a2 > 0.0) {
            return Err(Error::NoBracket(format!("E equation stays negative near F1 - F0 = {a2}")));
        }
    }
    expand = 0;
    while g(hi)? >= 0.0 {
        hi += 2f64.powi(expand);
        expand += 1;
        if expand > 60 {
            return Err(Error::NoBracket("E equation stays positive for large E".into()));
        }
    }
    let t = brent(&mut g, lo, hi, 1e-14, 200)?;
    let e = a2 + t.exp();
    let (_, k) = e_equation(a2, f0, e, fold, rho, k_hint)?;
    Ok((e, k))
}

/// One application of the outer map.
#[derive(Debug, Clone, Copy)]
struct MapValue {
    chi_new: f64,
    q0_new: f64,
    h: HSide,
    e: f64,
    k: f64,
}

fn outer_map(
    chi: f64,
    q0: f64,
    point: ModelPoint,
    grid: &QuadratureGrid,
    fold: &Folded,
    guess: Option<(f64, f64)>,
) -> Result<MapValue> {
    let h = h_side(chi, q0, point, grid)?;
    let (e, k) = solve_e(h.a2, h.f0, fold, point.rho, guess)?;
    let x = XiCoeffs::new(h.a2, h.f0, e)?;
    let mut acc = 0.0;
    for (&z2, &w) in fold.z2.iter().zip(&fold.w) {
        let s = logistic(x.c0 + x.c2 * z2 - k);
        acc += w * s * s * x.s2 * z2;
    }
    Ok(MapValue { chi_new: point.rho / e, q0_new: acc / (e * e), h, e, k })
}

// The outer unknowns are u = (ln χ, ln(ρ - q0)). Near the top of the
// supercritical branch both χ and ρ - q0 vanish along power laws, which are
// straight lines in these coordinates.

fn q0_of(u: [f64; 2], rho: f64) -> f64 {
    rho - u[1].exp()
}

fn mismatch(u: [f64; 2], v: &MapValue, rho: f64) -> [f64; 2] {
    let gap = rho - v.q0_new;
    let g1 = if gap > 0.0 { gap.ln() - u[1] } else { f64::INFINITY };
    [v.chi_new.ln() - u[0], g1]
}

fn norm(g: [f64; 2]) -> f64 {
    g[0].abs().max(g[1].abs())
}

/// Convergence measure in the natural units `(ln χ, q0)`.
fn natural_norm(u: [f64; 2], g: [f64; 2]) -> f64 {
    g[0].abs().max(u[1].exp() * g[1].exp_m1().abs())
}

fn default_seed(point: ModelPoint) -> (f64, f64) {
    let excess = (point.alpha / point.alpha_cg() - 1.0).max(1e-6);
    ((0.1 * point.rho / excess).clamp(1e-3, 1e5), 0.2 * point.rho)
}

/// Damped Newton iteration on a two-dimensional mismatch `g(x) = 0`.
struct Newton2<'a, F: FnMut([f64; 2]) -> Option<[f64; 2]>> {
    eval: F,
    admissible: &'a dyn Fn([f64; 2]) -> bool,
    /// Convergence measure; the iteration stops once it drops below `stop`.
    natural: &'a dyn Fn([f64; 2], [f64; 2]) -> f64,
    stop: f64,
    max_iter: usize,
    /// Weight of the fallback step `x + η g`, meaningful only when `g` is the
    /// displacement of a fixed-point map.
    fallback: Option<f64>,
}

impl<F: FnMut([f64; 2]) -> Option<[f64; 2]>> Newton2<'_, F> {
    fn run(&mut self, mut x: [f64; 2]) -> Result<([f64; 2], usize)> {
        let mut g = (self.eval)(x).ok_or_else(|| Error::Domain("starting point is not admissible".into()))?;
        let mut iterations = 0;
        while (self.natural)(x, g) > self.stop {
            iterations += 1;
            if iterations > self.max_iter {
                return Err(Error::NonConvergence { iterations, residual: (self.natural)(x, g) });
            }
            let mut next = None;
            if let Some(d) = self.direction(x, g) {
                let mut t = 1.0;
                for _ in 0..30 {
                    let cand = [x[0] + t * d[0], x[1] + t * d[1]];
                    if (self.admissible)(cand) {
                        if let Some(gc) = (self.eval)(cand) {
                            if norm(gc) < norm(g) {
                                next = Some((cand, gc));
                                break;
                            }
                        }
                    }
                    t *= 0.5;
                }
            }
            if next.is_none() {
                if let Some(eta) = self.fallback {
                    let cand = [x[0] + eta * g[0], x[1] + eta * g[1]];
                    if (self.admissible)(cand) {
                        next = (self.eval)(cand).map(|gc| (cand, gc));
                    }
                }
            }
            let Some((xn, gn)) = next else {
                return Err(Error::NonConvergence { iterations, residual: (self.natural)(x, g) });
            };
            x = xn;
            g = gn;
        }
        Ok((x, iterations))
    }

    // Central differences; the one-sided kind is too coarse where the
    // problem is nearly degenerate (small χ).
    fn direction(&mut self, x: [f64; 2], g: [f64; 2]) -> Option<[f64; 2]> {
        let h = 1e-5;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let (mut up, mut dn) = (x, x);
            up[j] += h;
            dn[j] -= h;
            let (gp, gm, dh) = match ((self.admissible)(up), (self.admissible)(dn)) {
                (true, true) => ((self.eval)(up)?, (self.eval)(dn)?, 2.0 * h),
                (true, false) => ((self.eval)(up)?, g, h),
                (false, true) => (g, (self.eval)(dn)?, h),
                (false, false) => return None,
            };
            jac[0][j] = (gp[0] - gm[0]) / dh;
            jac[1][j] = (gp[1] - gm[1]) / dh;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !det.is_finite() || det == 0.0 {
            return None;
        }
        let d0 = -(jac[1][1] * g[0] - jac[0][1] * g[1]) / det;
        let d1 = -(-jac[1][0] * g[0] + jac[0][0] * g[1]) / det;
        (d0.is_finite() && d1.is_finite()).then_some([d0, d1])
    }
}

fn check_regime(point: ModelPoint) -> Result<()> {
    if point.alpha <= point.alpha_cg() {
        return Err(Error::Regime(format!(
            "alpha = {} is not above alpha_CG = {}; use the subcritical solver",
            point.alpha,
            point.alpha_cg()
        )));
    }
    if point.rho >= 1.0 {
        return Err(Error::Regime("no selection above alpha_CG at rho = 1".into()));
    }
    Ok(())
}

fn start_from(point: ModelPoint, warm_start: Option<&RescaledOrderParams>) -> ([f64; 2], Option<(f64, f64)>) {
    let rho = point.rho;
    match warm_start {
        Some(w) => ([w.chi.ln(), (rho - w.q0.clamp(0.0, rho * (1.0 - 1e-9))).ln()], Some((w.e, w.k))),
        None => {
            let (c, q) = default_seed(point);
            ([c.ln(), (rho - q).ln()], None)
        }
    }
}

/// Params, entropy and residual check at a converged `u = (ln χ, ln(ρ - q0))`.
fn finish(
    u: [f64; 2],
    point: ModelPoint,
    grid: &QuadratureGrid,
    fold: &Folded,
    guess: Option<(f64, f64)>,
    iterations: usize,
    opts: &SolverOptions,
) -> Result<RescaledOrderParams> {
    let rho = point.rho;
    let val = outer_map(u[0].exp(), q0_of(u, rho), point, grid, fold, guess)?;
    let mut params = RescaledOrderParams {
        f1: val.h.f1,
        f0: val.h.f0,
        e: val.e,
        chi: rho / val.e,
        q0: q0_of(u, rho),
        k: val.k,
        sigma: 0.0,
        residual: 0.0,
        iterations,
    };
    params.sigma = entropy_supercritical(&params, point, grid)?;
    params.residual = residuals(&params, point, grid)?.into_iter().fold(0.0, f64::max);
    if !(params.residual < opts.tolerance) {
        return Err(Error::NonConvergence { iterations, residual: params.residual });
    }
    Ok(params)
}

/// Solve the rescaled equations at `point`, optionally warm-started.
pub fn solve_supercritical(
    point: ModelPoint,
    grid: &QuadratureGrid,
    warm_start: Option<&RescaledOrderParams>,
    opts: &SolverOptions,
) -> Result<RescaledOrderParams> {
    check_regime(point)?;
    let rho = point.rho;
    let fold = Folded::new(grid);
    let (u0, guess) = start_from(point, warm_start);
    let guess = Cell::new(guess);
    let admissible = |u: [f64; 2]| u[1] <= rho.ln() && u[0].is_finite();
    let natural = |u: [f64; 2], g: [f64; 2]| natural_norm(u, g);
    let mut newton = Newton2 {
        eval: |u: [f64; 2]| {
            let v = outer_map(u[0].exp(), q0_of(u, rho), point, grid, &fold, guess.get()).ok()?;
            guess.set(Some((v.e, v.k)));
            Some(mismatch(u, &v, rho))
        },
        admissible: &admissible,
        natural: &natural,
        stop: 0.05 * opts.tolerance,
        max_iter: opts.max_iter.min(500),
        fallback: Some(opts.damping),
    };
    refine(&mut newton, u0, |u, it| finish(u, point, grid, &fold, guess.get(), it, opts))
}

/// Solve the rescaled equations with `χ` held fixed and `α` free.
///
/// Close to the end of the supercritical branch `χ` and `ρ - q0` vanish while
/// `α` barely moves, so the branch is far better conditioned as a function
/// of `χ`. Returns `(α, params)`.
pub fn solve_at_fixed_chi(
    rho: f64,
    chi: f64,
    grid: &QuadratureGrid,
    warm_start: (f64, &RescaledOrderParams),
    opts: &SolverOptions,
) -> Result<(f64, RescaledOrderParams)> {
    if !(chi > 0.0 && chi.is_finite()) {
        return Err(Error::Domain(format!("chi must be positive, got {chi}")));
    }
    let (alpha0, w) = warm_start;
    let acg = 2.0 * rho;
    let fold = Folded::new(grid);
    let guess = Cell::new(Some((w.e, w.k)));
    let lnchi = chi.ln();
    let admissible = |x: [f64; 2]| x[0] > acg && x[1] <= rho.ln();
    let natural = |x: [f64; 2], g: [f64; 2]| natural_norm([lnchi, x[1]], g);
    let mut newton = Newton2 {
        eval: |x: [f64; 2]| {
            let point = ModelPoint::new(rho, x[0]).ok()?;
            let u = [lnchi, x[1]];
            let v = outer_map(chi, q0_of(u, rho), point, grid, &fold, guess.get()).ok()?;
            guess.set(Some((v.e, v.k)));
            Some(mismatch(u, &v, rho))
        },
        admissible: &admissible,
        natural: &natural,
        stop: 0.05 * opts.tolerance,
        max_iter: opts.max_iter.min(500),
        fallback: None,
    };
    let x0 = [alpha0, (rho - w.q0.clamp(0.0, rho * (1.0 - 1e-9))).ln()];
    refine(&mut newton, x0, |x, it| {
        let point = ModelPoint::new(rho, x[0])?;
        Ok((x[0], finish([lnchi, x[1]], point, grid, &fold, guess.get(), it, opts)?))
    })
}

/// Run `newton` and hand the root to `accept`; if the full residual check
/// rejects it, tighten the stopping rule and continue from there.
fn refine<F, T>(newton: &mut Newton2<'_, F>, x0: [f64; 2], mut accept: impl FnMut([f64; 2], usize) -> Result<T>) -> Result<T>
where
    F: FnMut([f64; 2]) -> Option<[f64; 2]>,
{
    let mut x = x0;
    let mut total = 0;
    for _ in 0..3 {
        let (xn, it) = newton.run(x)?;
        total += it;
        match accept(xn, total) {
            Err(Error::NonConvergence { .. }) => {
                x = xn;
                newton.stop *= 1e-2;
            }
            other => return other,
        }
    }
    let (xn, it) = newton.run(x)?;
    accept(xn, total + it)
}

/// Cluster entropy `Σ` at a converged supercritical solution.
pub fn entropy_supercritical(p: &RescaledOrderParams, point: ModelPoint, grid: &QuadratureGrid) -> Result<f64> {
    let ModelPoint { rho, alpha } = point;
    let h = h_side(p.chi, p.q0, point, grid)?;
    let x = XiCoeffs::new(h.a2, p.f0, p.e)?;
    let fold = Folded::new(grid);
    let mut xi = 0.0;
    for (&z2, &w) in fold.z2.iter().zip(&fold.w) {
        xi += w * softplus(x.c0 + x.c2 * z2 - p.k);
    }
    // ½(E-F1)ρ + ½F0 q0 regrouped so the large F's never meet in a difference
    let quadratic = 0.5 * (p.e - h.a2) * rho - 0.5 * p.f0 * (rho - p.q0) - 0.5 * p.f1 * p.chi;
    Ok(alpha * h.ln_i0 + xi + p.k * rho + quadratic)
}

/// Scaled residuals `|lhs - rhs| / max(1, |lhs|)` of the six equations, in the
/// order `F1, F0, ρ (E), χ, q0, ρ (K)`.
pub fn residuals(p: &RescaledOrderParams, point: ModelPoint, grid: &QuadratureGrid) -> Result<[f64; 6]> {
    let rho = point.rho;
    let h = h_side(p.chi, p.q0, point, grid)?;
    let x = XiCoeffs::new(h.a2, p.f0, p.e)?;
    let fold = Folded::new(grid);
    let [mut r25, mut r27, mut r28] = [0.0; 3];
    for (&z2, &w) in fold.z2.iter().zip(&fold.w) {
        let s = logistic(x.c0 + x.c2 * z2 - p.k);
        r25 += w * s * (x.s0 + x.s2 * z2);
        r27 += w * s * s * x.s2 * z2;
        r28 += w * s;
    }
    let e2 = p.e * p.e;
    let scaled = |lhs: f64, rhs: f64| (lhs - rhs).abs() / lhs.abs().max(1.0);
    Ok([
        scaled(p.f1, h.f1),
        scaled(p.f0, h.f0),
        scaled(rho, r25 / e2),
        scaled(p.chi, rho / p.e),
        scaled(p.q0, r27 / e2),
        scaled(rho, r28),
    ])
}

/// `(α/χ²)⟨∫Dy H̃Θ / ∫Dy H̃⟩` and `E⁻²⟨σ⟩`, the two AT factors.
pub(crate) fn at_factors(p: &RescaledOrderParams, point: ModelPoint, grid: &QuadratureGrid) -> Result<(f64, f64)> {
    let h = h_side(p.chi, p.q0, point, grid)?;
    let x = XiCoeffs::new(h.a2, p.f0, p.e)?;
    let fold = Folded::new(grid);
    let mut sel = 0.0;
    for (&z2, &w) in fold.z2.iter().zip(&fold.w) {
        sel += w * logistic(x.c0 + x.c2 * z2 - p.k);
    }
    Ok((point.alpha / (p.chi * p.chi) * h.pos, sel / (p.e * p.e)))
}

/// Relative offset above `α_CG` where continuation starts.
pub const CONTINUATION_OFFSET: f64 = 1e-3;

/// Solution at `α_CG(1 + ε)`, seeded from the subcritical side.
///
/// As `α → α_CG⁺` the susceptibility diverges like `1/(α/α_CG - 1)` while
/// `F1, F0, E → 0`; `q0` is continuous and is taken from a subcritical solve
/// just below the threshold.
pub fn solve_near_threshold(rho: f64, eps: f64, grid: &QuadratureGrid, opts: &SolverOptions) -> Result<RescaledOrderParams> {
    let acg = 2.0 * rho;
    let below = solve_subcritical(ModelPoint::new(rho, acg * (1.0 - 1e-2))?, grid, opts)?;
    let seed = RescaledOrderParams {
        f1: 0.0,
        f0: 0.0,
        e: f64::NAN,
        chi: 0.1 * rho / eps,
        q0: below.q0,
        k: ((1.0 - rho) / rho).ln(),
        sigma: binary_entropy(rho),
        residual: f64::NAN,
        iterations: 0,
    };
    solve_supercritical(ModelPoint::new(rho, acg * (1.0 + eps))?, grid, Some(&seed), opts)
}

/// Smallest `χ` the branch continuation will visit.
const MIN_CHI: f64 = 1e-12;

/// Locate `α_VS(ρ)`, the root of `Σ(α)` above `α_CG`.
///
/// Steps upward from `α_CG(1 + 10⁻³)` with warm starts, shrinking the step
/// when a solve fails, until `Σ` turns negative; then bisects. Bisection
/// continues past `alpha_tolerance` until `|Σ| < 10⁻⁸`. If the scan stalls
/// before `Σ` changes sign, the search moves to the branch parametrized by `χ`.
pub fn capacity_vs(rho: f64, grid: &QuadratureGrid, opts: &SolverOptions) -> Result<CapacityResult> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("capacity_vs needs 0 < rho < 1, got {rho}")));
    }
    let acg = 2.0 * rho;
    let a_max = acg * opts.alpha_scan_max;
    let mut trace = Vec::new();

    let mut lo_alpha = acg * (1.0 + CONTINUATION_OFFSET);
    let mut lo = solve_near_threshold(rho, CONTINUATION_OFFSET, grid, opts)?;
    trace.push(format!("{lo_alpha:.6}:{:.6e}", lo.sigma));
    let step = 0.05 * acg;
    let (mut hi_alpha, mut hi) = loop {
        let a = (lo_alpha + step).min(a_max);
        match solve_supercritical(ModelPoint::new(rho, a)?, grid, Some(&lo), opts) {
            Ok(s) => {
                trace.push(format!("{a:.6}:{:.6e}", s.sigma));
                if s.sigma < 0.0 {
                    break (a, s);
                }
                lo_alpha = a;
                lo = s;
                if a >= a_max {
                    return Err(Error::NoSignChange { trace: trace.join(" ") });
                }
            }
            Err(e) => {
                trace.push(format!("{a:.6}:failed({e})"));
                return chi_branch(rho, (lo_alpha, lo), grid, opts, trace);
            }
        }
    };

    let target = 1e-8;
    let mut best = if lo.sigma.abs() < hi.sigma.abs() { (lo_alpha, lo.clone()) } else { (hi_alpha, hi.clone()) };
    for _ in 0..200 {
        if best.1.sigma.abs() < target && hi_alpha - lo_alpha < opts.alpha_tolerance {
            break;
        }
        if hi_alpha - lo_alpha <= 4.0 * f64::EPSILON * hi_alpha {
            break;
        }
        let mid = 0.5 * (lo_alpha + hi_alpha);
        let s = solve_supercritical(ModelPoint::new(rho, mid)?, grid, Some(&lo), opts)
            .or_else(|_| solve_supercritical(ModelPoint::new(rho, mid)?, grid, Some(&hi), opts))?;
        if s.sigma.abs() < best.1.sigma.abs() {
            best = (mid, s.clone());
        }
        if s.sigma > 0.0 {
            lo_alpha = mid;
            lo = s;
        } else {
            hi_alpha = mid;
            hi = s;
        }
    }
    let (alpha_vs, params) = best;
    Ok(CapacityResult {
        rho,
        alpha_cg: acg,
        alpha_vs,
        bracket: (lo_alpha, hi_alpha),
        sigma_residual: params.sigma,
        params,
    })
}

/// Continue the search for `Σ = 0` along the branch parametrized by `χ`.
///
/// Used once the scan in `α` stalls: towards the end of the branch `χ → 0`
/// while `α` saturates, and fixed-`α` solves lose conditioning.
fn chi_branch(
    rho: f64,
    start: (f64, RescaledOrderParams),
    grid: &QuadratureGrid,
    opts: &SolverOptions,
    mut trace: Vec<String>,
) -> Result<CapacityResult> {
    let acg = 2.0 * rho;
    let mut lo = start;
    let mut lo_x = lo.1.chi.ln();
    let mut dx = 0.5;
    let hi = loop {
        let x = lo_x - dx;
        if x < MIN_CHI.ln() {
            trace.push("chi exhausted".into());
            return Err(Error::NoSignChange { trace: trace.join(" ") });
        }
        match solve_at_fixed_chi(rho, x.exp(), grid, (lo.0, &lo.1), opts) {
            Ok(s) => {
                trace.push(format!("chi={:.3e}:{:.6}:{:.6e}", x.exp(), s.0, s.1.sigma));
                if s.1.sigma < 0.0 {
                    break (x, s);
                }
                lo = s;
                lo_x = x;
            }
            Err(e) => {
                trace.push(format!("chi={:.3e}:failed({e})", x.exp()));
                dx *= 0.25;
                if dx < 1e-4 {
                    return Err(Error::NoSignChange { trace: trace.join(" ") });
                }
            }
        }
    };
    let (mut hi_x, mut hi) = hi;

    // Illinois regula falsi in ln χ.
    let target = 1e-8;
    let (mut f_lo, mut f_hi) = (lo.1.sigma, hi.1.sigma);
    let mut side = 0;
    let mut best = if f_lo.abs() < f_hi.abs() { lo.clone() } else { hi.clone() };
    for _ in 0..200 {
        if best.1.sigma.abs() < target && (lo.0 - hi.0).abs() < opts.alpha_tolerance {
            break;
        }
        if (lo_x - hi_x).abs() <= 1e-6 {
            break;
        }
        let mut x = lo_x - f_lo * (hi_x - lo_x) / (f_hi - f_lo);
        if !(x < lo_x.max(hi_x) && x > lo_x.min(hi_x)) {
            x = 0.5 * (lo_x + hi_x);
        }
        let warm = if (x - lo_x).abs() < (x - hi_x).abs() { &lo } else { &hi };
        // Near the branch end Σ varies steeply with the unknowns and its
        // resolution is set by the solve tolerance; settle for the best point.
        let Ok(s) = solve_at_fixed_chi(rho, x.exp(), grid, (warm.0, &warm.1), opts) else { break };
        if s.1.sigma.abs() < best.1.sigma.abs() {
            best = s.clone();
        }
        if s.1.sigma > 0.0 {
            lo_x = x;
            f_lo = s.1.sigma;
            lo = s;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi_x = x;
            f_hi = s.1.sigma;
            hi = s;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    let (alpha_vs, params) = best;
    Ok(CapacityResult {
        rho,
        alpha_cg: acg,
        alpha_vs,
        bracket: (lo.0.min(hi.0), lo.0.max(hi.0)),
        sigma_residual: params.sigma,
        params,
    })
}
