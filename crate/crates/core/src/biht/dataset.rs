use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Input distribution of the patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    /// Entries uniform on `{+1, -1}`.
    #[default]
    Binary,
    /// Rows uniform on the sphere of radius `√N`.
    Spherical,
}

impl Ensemble {
    pub fn as_str(&self) -> &'static str {
        match self {
            Ensemble::Binary => "binary",
            Ensemble::Spherical => "spherical",
        }
    }
}

/// `P` labelled patterns in `N` dimensions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub n: usize,
    pub p: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub ensemble: Ensemble,
}

impl Dataset {
    #[inline]
    pub fn row(&self, mu: usize) -> &[f64] {
        &self.x[mu * self.n..(mu + 1) * self.n]
    }

    /// The first `p` patterns.
    pub fn prefix(&self, p: usize) -> Dataset {
        let p = p.min(self.p);
        Dataset { n: self.n, p, x: self.x[..p * self.n].to_vec(), y: self.y[..p].to_vec(), ensemble: self.ensemble }
    }

    /// `y_μ (x_μ · w)` for every pattern.
    pub fn margins(&self, w: &[f64]) -> Vec<f64> {
        (0..self.p).map(|mu| self.y[mu] * dot(self.row(mu), w)).collect()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Random stream of trial `index` under `base_seed`.
///
/// Every trial owns a separate ChaCha stream, so results do not depend on the
/// order in which trials are scheduled.
pub fn trial_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng
}

/// Draw a dataset from `rng`.
pub fn generate_dataset_with<R: Rng>(n: usize, p: usize, ensemble: Ensemble, rng: &mut R) -> Result<Dataset> {
    if n == 0 || p == 0 {
        return Err(Error::Domain(format!("dataset needs N >= 1 and P >= 1, got N = {n}, P = {p}")));
    }
    // rows and labels are drawn pattern by pattern, so the first P' patterns
    // of a draw coincide with a draw of size P' from the same stream
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(p);
    for _ in 0..p {
        match ensemble {
            Ensemble::Binary => x.extend((0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })),
            Ensemble::Spherical => {
                let mut row: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let scale = (n as f64).sqrt() / dot(&row, &row).sqrt();
                row.iter_mut().for_each(|v| *v *= scale);
                x.extend(row);
            }
        }
        y.push(if rng.random::<bool>() { 1.0 } else { -1.0 });
    }
    Ok(Dataset { n, p, x, y, ensemble })
}

/// Reproducible dataset for a given seed.
pub fn generate_dataset(n: usize, p: usize, ensemble: Ensemble, seed: u64) -> Result<Dataset> {
    generate_dataset_with(n, p, ensemble, &mut trial_rng(seed, 0))
}
