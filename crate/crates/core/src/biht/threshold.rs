use crate::error::{Error, Result};

/// Indices sorted by decreasing magnitude; ties go to the lower index.
fn by_magnitude(v: &[f64], candidates: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = candidates.collect();
    idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    idx
}

/// `η_K`: keep the `k` largest-magnitude entries of `v`.
pub fn hard_threshold(v: &[f64], k: usize) -> Result<Vec<f64>> {
    hard_threshold_with_support(v, k, &[]).map(|(w, _)| w)
}

/// `η_K(v | I_f)`: keep every index in `fixed`, then fill the remaining
/// `k - |fixed|` slots by magnitude from the complement.
///
/// Returns the thresholded vector and the kept index set in increasing order.
pub fn hard_threshold_with_support(v: &[f64], k: usize, fixed: &[usize]) -> Result<(Vec<f64>, Vec<usize>)> {
    let n = v.len();
    if k < 1 || k > n {
        return Err(Error::Domain(format!("need 1 <= K <= {n}, got K = {k}")));
    }
    if fixed.len() > k {
        return Err(Error::Domain(format!("{} fixed indices exceed K = {k}", fixed.len())));
    }
    let mut keep = vec![false; n];
    for &i in fixed {
        if i >= n {
            return Err(Error::Domain(format!("fixed index {i} out of range")));
        }
        keep[i] = true;
    }
    let free = by_magnitude(v, (0..n).filter(|&i| !keep[i]));
    for &i in free.iter().take(k - fixed.len()) {
        keep[i] = true;
    }
    let out = v.iter().zip(&keep).map(|(&x, &k)| if k { x } else { 0.0 }).collect();
    let support = (0..n).filter(|&i| keep[i]).collect();
    Ok((out, support))
}
