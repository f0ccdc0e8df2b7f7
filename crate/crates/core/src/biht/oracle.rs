//! Exact separability on a fixed support, and exhaustive enumeration of
//! supports for small `N`.

use std::collections::HashSet;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;

use super::dataset::{generate_dataset_with, trial_rng, Dataset, Ensemble};
use crate::error::{Error, Result};

/// Largest number of supports [`exhaustive_capacity`] will enumerate.
pub const MAX_SUPPORTS: u64 = 1_000_000;

const CERTIFICATE_TOL: f64 = 1e-9;

fn restricted<'a>(data: &'a Dataset, mu: usize, support: &'a [usize]) -> impl Iterator<Item = f64> + 'a {
    let row = data.row(mu);
    let y = data.y[mu];
    support.iter().map(move |&j| y * row[j])
}

/// Feasibility of `y_μ Σ_{j∈S} x_μj w_j ≥ 1` for all `μ`, by linear programming.
///
/// A reported solution is re-checked against the constraints; a failed check
/// is an error rather than a silent answer.
pub fn lp_separable(data: &Dataset, support: &[usize]) -> Result<bool> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = support.iter().map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    for mu in 0..data.p {
        let terms: Vec<_> = vars.iter().copied().zip(restricted(data, mu, support)).collect();
        lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, 1.0);
    }
    match lp.solve() {
        Ok(outcome) => {
            let sol = outcome.solution().ok_or_else(|| Error::Lp("solve interrupted".into()))?;
            let w: Vec<f64> = vars.iter().map(|&v| sol.var_value(v)).collect();
            for mu in 0..data.p {
                let m: f64 = restricted(data, mu, support).zip(&w).map(|(a, b)| a * b).sum();
                if m < 1.0 - CERTIFICATE_TOL {
                    return Err(Error::Lp(format!("certificate violates pattern {mu}: margin {m}")));
                }
            }
            Ok(true)
        }
        Err(microlp::Error::Infeasible) => Ok(false),
        Err(e) => Err(Error::Lp(e.to_string())),
    }
}

/// Rosenblatt's perceptron on the support; `Some(w)` once every
/// `y_μ x_μ·w > 0`, `None` if `max_epochs` passes do not get there.
pub fn perceptron_separates(data: &Dataset, support: &[usize], max_epochs: usize) -> Option<Vec<f64>> {
    let mut w = vec![0.0; support.len()];
    for _ in 0..max_epochs {
        let mut clean = true;
        for mu in 0..data.p {
            let u: Vec<f64> = restricted(data, mu, support).collect();
            let m: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
            if m <= 0.0 {
                clean = false;
                w.iter_mut().zip(&u).for_each(|(wi, ui)| *wi += ui);
            }
        }
        if clean {
            return Some(w);
        }
    }
    None
}

/// For `±1` inputs: two patterns whose signed restrictions are exact negatives
/// of each other can never both be on the positive side.
fn binary_contradiction(data: &Dataset, support: &[usize]) -> bool {
    if data.ensemble != Ensemble::Binary || support.len() > 63 {
        return false;
    }
    let mut seen = HashSet::with_capacity(data.p);
    let full = (1u64 << support.len()) - 1;
    for mu in 0..data.p {
        let code = restricted(data, mu, support)
            .enumerate()
            .fold(0u64, |acc, (i, v)| if v > 0.0 { acc | (1 << i) } else { acc });
        if seen.contains(&(code ^ full)) {
            return true;
        }
        seen.insert(code);
    }
    false
}

/// Whether some weight vector on `support` strictly separates all patterns.
///
/// Cheap certificates are tried first (a perceptron run for "yes", a pair of
/// opposite binary patterns for "no"); the LP decides everything else.
pub fn separability_oracle(data: &Dataset, support: &[usize]) -> Result<bool> {
    if support.is_empty() {
        return Err(Error::Domain("support must be nonempty".into()));
    }
    if support.iter().any(|&j| j >= data.n) {
        return Err(Error::Domain("support index out of range".into()));
    }
    if binary_contradiction(data, support) {
        return Ok(false);
    }
    if perceptron_separates(data, support, 20).is_some() {
        return Ok(true);
    }
    lp_separable(data, support)
}

/// `C(n, k)` as `u64`, saturating.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// All size-`m` subsets of `0..n` in lexicographic order.
pub fn supports(n: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = (m <= n).then(|| (0..m).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = m;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < n - m + i {
                c[i] += 1;
                for j in i + 1..m {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

fn check_guard(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::Domain(format!("need 1 <= M <= N, got N = {n}, M = {m}")));
    }
    let count = binomial(n as u64, m as u64);
    if count > MAX_SUPPORTS {
        return Err(Error::Guard(format!("C({n}, {m}) = {count} supports exceeds {MAX_SUPPORTS}")));
    }
    Ok(())
}

/// Largest `p' ≤ hi` with the first `p'` patterns separable on `support`,
/// given that the first `lo` are (separability only shrinks as patterns are added).
fn max_prefix(data: &Dataset, support: &[usize], mut lo: usize, mut hi: usize) -> Result<usize> {
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if separability_oracle(&data.prefix(mid), support)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// Longest separable prefix: `(best over all size-m supports, on {0..m-1})`.
fn trial_prefixes(data: &Dataset, m: usize) -> Result<(usize, usize)> {
    let fixed: Vec<usize> = (0..m).collect();
    let p_fixed = max_prefix(data, &fixed, 0, data.p)?;
    let mut best = p_fixed;
    for s in supports(data.n, m) {
        if best == data.p {
            break;
        }
        if separability_oracle(&data.prefix(best + 1), &s)? {
            best = max_prefix(data, &s, best + 1, data.p)?;
        }
    }
    Ok((best, p_fixed))
}

/// Selection advantage at one pattern count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub p: usize,
    /// Fraction of datasets separable on at least one size-`M` support.
    pub prob_any_subset: f64,
    /// Fraction separable on the fixed support `{0, …, M-1}`.
    pub prob_fixed_subset: f64,
}

/// [`OracleRow`]s for every `P` in `p_grid` from `trials` random datasets.
///
/// Trial `t` draws `max(p_grid)` patterns from stream `(seed, t)`; the dataset
/// at a smaller `P` is its prefix, which is exactly what an independent draw
/// of size `P` from the same stream would give.
pub fn exhaustive_capacity_curve(
    n: usize,
    m: usize,
    p_grid: &[usize],
    trials: usize,
    ensemble: Ensemble,
    seed: u64,
) -> Result<Vec<OracleRow>> {
    check_guard(n, m)?;
    let p_max = *p_grid.iter().max().ok_or_else(|| Error::Config("empty P grid".into()))?;
    if p_grid.contains(&0) {
        return Err(Error::Domain("P must be positive".into()));
    }
    let per_trial: Vec<(usize, usize)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let data = generate_dataset_with(n, p_max, ensemble, &mut trial_rng(seed, t))?;
            trial_prefixes(&data, m)
        })
        .collect::<Result<_>>()?;
    let frac = |f: &dyn Fn(&(usize, usize)) -> bool| per_trial.iter().filter(|r| f(r)).count() as f64 / trials as f64;
    Ok(p_grid
        .iter()
        .map(|&p| OracleRow {
            p,
            prob_any_subset: frac(&|r| r.0 >= p),
            prob_fixed_subset: frac(&|r| r.1 >= p),
        })
        .collect())
}

/// Fraction of `trials` random `P × N` datasets separable on some size-`M` support.
pub fn exhaustive_capacity(n: usize, m: usize, p: usize, trials: usize, seed: u64) -> Result<f64> {
    Ok(exhaustive_capacity_curve(n, m, &[p], trials, Ensemble::Binary, seed)?[0].prob_any_subset)
}

/// Linearly interpolated `P` at which a decreasing probability column first
/// drops through `level`.
pub fn crossing_point(rows: &[(usize, f64)], level: f64) -> Option<f64> {
    rows.windows(2).find_map(|w| {
        let ((p0, f0), (p1, f1)) = (w[0], w[1]);
        (f0 >= level && f1 < level).then(|| p0 as f64 + (f0 - level) / (f0 - f1) * (p1 - p0) as f64)
    })
}
