//! Quadrature rules for expectations under the standard Gaussian measure.
//!
//! Two families live behind the same [`QuadratureGrid`] type:
//!
//! * Gauss–Hermite rules in the probabilists' normalization, built from the
//!   Jacobi matrix and polished with Newton steps on the orthonormal
//!   recurrence. Weights are evaluated through a rescaled Christoffel sum so
//!   orders of several hundred do not overflow.
//! * Composite Gauss–Legendre panels on a symmetric interval with the Gaussian
//!   density folded into the weights. These resolve steep features (sigmoid
//!   switches, kinks at the origin) far better than a global Hermite rule of
//!   the same size. The graded variant adds panels that halve in width toward
//!   the origin; it is the default for the saddle-point solvers, whose outer
//!   integrands become sharp at `z = 0` as the solution approaches `q0 → ρ`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::special::normal_pdf;
use crate::error::{Error, Result};

/// Nodes and weights approximating `∫ Dz f(z) ≈ Σ wᵢ f(zᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Number of nodes.
    pub order: usize,
}

impl QuadratureGrid {
    fn from_parts(nodes: Vec<f64>, mut weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let order = nodes.len();
        Self { nodes, weights, order }
    }

    /// Gauss–Hermite rule with `order` nodes. Same as [`make_grid`].
    pub fn hermite(order: usize) -> Result<Self> {
        make_grid(order)
    }

    /// Composite Gauss–Legendre rule on `[-half_width, half_width]`, split into
    /// `panels` equal panels with `points` nodes each, weighted by `φ(z)`.
    ///
    /// The weights are renormalized to sum to one, which removes the
    /// `2H(half_width)` of mass lost to truncation.
    pub fn composite(half_width: f64, panels: usize, points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || panels == 0 || points == 0 {
            return Err(Error::Config(format!(
                "composite grid needs half_width > 0 and at least one panel and point, got ({half_width}, {panels}, {points})"
            )));
        }
        let h = 2.0 * half_width / panels as f64;
        let edges: Vec<f64> = (0..=panels).map(|p| -half_width + p as f64 * h).collect();
        Ok(Self::on_edges(&edges, points))
    }

    /// Composite rule whose panels have width `panel_width` away from the
    /// origin, with the two innermost panels split geometrically `levels` times
    /// (widths `panel_width/2, panel_width/4, …` toward `z = 0`).
    pub fn graded(half_width: f64, panel_width: f64, levels: usize, points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || !(panel_width > 0.0 && panel_width <= half_width) || points == 0 {
            return Err(Error::Config(format!(
                "graded grid needs 0 < panel_width <= half_width and at least one point, got ({half_width}, {panel_width}, {points})"
            )));
        }
        let outer = (half_width / panel_width).round().max(1.0) as usize;
        let mut right: Vec<f64> = (1..=levels).rev().map(|k| panel_width * 0.5f64.powi(k as i32)).collect();
        right.extend((1..=outer).map(|p| p as f64 * panel_width));
        let mut edges: Vec<f64> = right.iter().rev().map(|x| -x).collect();
        edges.push(0.0);
        edges.extend(right);
        Ok(Self::on_edges(&edges, points))
    }

    fn on_edges(edges: &[f64], points: usize) -> Self {
        let (gl_x, gl_w) = gauss_legendre(points);
        let mut nodes = Vec::with_capacity((edges.len() - 1) * points);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for e in edges.windows(2) {
            let (mid, half) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
            for (x, w) in gl_x.iter().zip(&gl_w) {
                let z = mid + half * x;
                nodes.push(z);
                weights.push(half * w * normal_pdf(z));
            }
        }
        Self::from_parts(nodes, weights)
    }

    /// `Σ wᵢ f(zᵢ)`.
    #[inline]
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }

    /// Componentwise expectation of a vector-valued integrand.
    pub fn expect_vec<const K: usize, F: FnMut(f64) -> [f64; K]>(&self, mut f: F) -> [f64; K] {
        let mut acc = [0.0; K];
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(z);
            for k in 0..K {
                acc[k] += w * v[k];
            }
        }
        acc
    }
}

impl Default for QuadratureGrid {
    /// 16-node panels of width 0.5 on `[-12, 12]`, graded 16 times toward the origin.
    fn default() -> Self {
        Self::graded(12.0, 0.5, 16, 16).expect("static parameters are valid")
    }
}

/// Gauss–Hermite nodes and weights for the measure `Dz`.
pub fn make_grid(order: usize) -> Result<QuadratureGrid> {
    if order < 1 {
        return Err(Error::Config("quadrature order must be at least 1".into()));
    }
    if order == 1 {
        return Ok(QuadratureGrid { nodes: vec![0.0], weights: vec![1.0], order: 1 });
    }
    // Golub–Welsch: the symmetric Jacobi matrix of He_k has off-diagonal √k.
    let mut jac = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let b = (k as f64).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let mut roots: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let n = order;
    let mut weights = Vec::with_capacity(n);
    for x in roots.iter_mut() {
        for _ in 0..4 {
            let r = orthonormal_hermite(*x, n);
            let step = r.p_n / ((n as f64).sqrt() * r.p_nm1);
            *x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        let r = orthonormal_hermite(*x, n);
        // Christoffel weight 1/Σ_{k<n} p_k², with the sum carried in log scale.
        weights.push((-r.ln_sum_sq).exp());
    }

    // Enforce exact symmetry: average mirrored pairs.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (roots[j] - roots[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        roots[i] = -x;
        roots[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        roots[n / 2] = 0.0;
    }
    Ok(QuadratureGrid::from_parts(roots, weights))
}

struct HermiteEval {
    p_n: f64,
    p_nm1: f64,
    ln_sum_sq: f64,
}

/// Orthonormal probabilists' Hermite values `p_n`, `p_{n-1}` (sharing one
/// unknown scale) and `ln Σ_{k<n} p_k²` (exact).
fn orthonormal_hermite(x: f64, n: usize) -> HermiteEval {
    const BIG: f64 = 1e100;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum_sq = 0.0;
    let mut ln_scale = 0.0;
    for k in 0..n {
        sum_sq += cur * cur;
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            sum_sq /= BIG * BIG;
            ln_scale += BIG.ln();
        }
    }
    HermiteEval { p_n: cur, p_nm1: prev, ln_sum_sq: sum_sq.ln() + 2.0 * ln_scale }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moment(g: &QuadratureGrid, k: i32) -> f64 {
        g.expect(|z| z.powi(k))
    }

    #[test]
    fn order_one_and_rejects_zero() {
        let g = make_grid(1).unwrap();
        assert_eq!(g.nodes, vec![0.0]);
        assert_eq!(g.weights, vec![1.0]);
        assert!(make_grid(0).is_err());
    }

    #[test]
    fn hermite_moments() {
        for &n in &[2usize, 3, 7, 20, 60, 200, 400] {
            let g = make_grid(n).unwrap();
            assert_eq!(g.order, n);
            assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(moment(&g, 1).abs() < 1e-12);
            assert!((moment(&g, 2) - 1.0).abs() < 1e-10, "n = {n}");
            if n >= 3 {
                assert!((moment(&g, 4) - 3.0).abs() < 1e-8, "n = {n}");
            }
            assert!(g.nodes.windows(2).all(|p| p[0] < p[1]));
            assert!(g.weights.iter().all(|&w| w >= 0.0));
        }
        let g = make_grid(60).unwrap();
        assert!((moment(&g, 6) - 15.0).abs() < 1e-8);
    }

    #[test]
    fn hermite_small_order_exact_nodes() {
        // He_3 = z³ - 3z
        let g = make_grid(3).unwrap();
        assert!((g.nodes[2] - 3f64.sqrt()).abs() < 1e-14);
        assert!((g.weights[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n = {n}, deg = {deg}");
            }
        }
    }

    #[test]
    fn graded_grid_resolves_origin_cusp() {
        // E|z|^(1/2) = 2^(1/4) Γ(3/4) / √π
        let exact = 2f64.powf(0.25) * libm::tgamma(0.75) / std::f64::consts::PI.sqrt();
        let graded = QuadratureGrid::graded(12.0, 0.5, 16, 16).unwrap();
        let plain = QuadratureGrid::composite(12.0, 48, 16).unwrap();
        let err = |g: &QuadratureGrid| (g.expect(|z| z.abs().sqrt()) - exact).abs();
        assert!(err(&graded) < 1e-10, "{}", err(&graded));
        assert!(err(&graded) < 1e-3 * err(&plain));
        assert!(QuadratureGrid::graded(1.0, 2.0, 4, 8).is_err());
        assert_eq!(graded.order, 2 * (24 + 16) * 16);
    }

    #[test]
    fn default_grid_moments() {
        let g = QuadratureGrid::default();
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((moment(&g, 2) - 1.0).abs() < 1e-12);
        assert!((moment(&g, 4) - 3.0).abs() < 1e-12);
        assert!((moment(&g, 6) - 15.0).abs() < 1e-11);
        assert!(g.nodes.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn composite_rejects_bad_shape() {
        assert!(QuadratureGrid::composite(0.0, 4, 4).is_err());
        assert!(QuadratureGrid::composite(5.0, 0, 4).is_err());
    }
}
