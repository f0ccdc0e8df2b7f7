//! Adaptive Gauss–Kronrod (7/15) integration against the Gaussian density.
//!
//! Used where the integrand has a moving sharp feature, e.g. `(H'/H)(γt)²`
//! with `γ ≫ 1` switching from `0` to `γ²t²` across a window of width `1/γ`.

use std::collections::BinaryHeap;

use super::special::normal_pdf;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Settings for [`AdaptiveRule::expect`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRule {
    /// Integration is truncated to `[-half_width, half_width]`.
    pub half_width: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveRule {
    fn default() -> Self {
        Self { half_width: 13.0, abs_tol: 1e-15, rel_tol: 1e-13, max_intervals: 400 }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Piece { a, b, value: k * h, err: ((k - g) * h).abs() }
}

impl AdaptiveRule {
    /// `∫ Dt f(t)`, splitting first at every breakpoint inside the window.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F, breakpoints: &[f64]) -> f64 {
        let mut g = |t: f64| f(t) * normal_pdf(t);
        let mut cuts = vec![-self.half_width, self.half_width];
        cuts.extend(
            breakpoints
                .iter()
                .copied()
                .filter(|b| b.is_finite() && b.abs() < self.half_width),
        );
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut heap = BinaryHeap::new();
        for w in cuts.windows(2) {
            heap.push(kronrod(&mut g, w[0], w[1]));
        }
        loop {
            let total: f64 = heap.iter().map(|p| p.value).sum();
            let err: f64 = heap.iter().map(|p| p.err).sum();
            if err <= self.abs_tol.max(self.rel_tol * total.abs()) || heap.len() >= self.max_intervals {
                return total;
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval exhausted at machine resolution
                heap.push(Piece { err: 0.0, ..worst });
                continue;
            }
            heap.push(kronrod(&mut g, worst.a, mid));
            heap.push(kronrod(&mut g, mid, worst.b));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::special::gauss_tail;

    #[test]
    fn gaussian_moments() {
        let r = AdaptiveRule::default();
        assert!((r.expect(|_| 1.0, &[]) - 1.0).abs() < 1e-13);
        assert!((r.expect(|t| t * t, &[]) - 1.0).abs() < 1e-13);
        assert!((r.expect(|t| t.powi(4), &[]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn step_function_with_breakpoint() {
        let r = AdaptiveRule::default();
        let v = r.expect(|t| if t > 0.7 { 1.0 } else { 0.0 }, &[0.7]);
        assert!((v - gauss_tail(0.7)).abs() < 1e-13);
    }
}
