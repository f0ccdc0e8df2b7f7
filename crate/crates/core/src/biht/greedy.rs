use rand::Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use super::dataset::{dot, generate_dataset_with, trial_rng, Dataset, Ensemble};
use super::threshold::hard_threshold_with_support;
use crate::error::{Error, Result};

/// How the iteration limit `L` is spent across greedy stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageBudget {
    /// Every stage may run up to `L` iterations.
    #[default]
    PerStage,
    /// `L` iterations in total; the search stops once they are used up.
    Shared,
}

/// Scale of the Gaussian starting vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitScale {
    /// Standard normal entries divided by `√N`.
    #[default]
    DivideSqrtN,
    /// Standard normal entries multiplied by `√N`.
    MultiplySqrtN,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BIHTConfig {
    /// Gradient step; `None` means `0.002 / P`.
    pub tau: Option<f64>,
    /// Stop a stage once `‖w_l - w_{l-1}‖ / N ≤ eps`.
    pub eps: f64,
    /// Iteration limit `L`.
    pub max_iter: usize,
    pub budget: StageBudget,
    pub init: InitScale,
}

impl Default for BIHTConfig {
    fn default() -> Self {
        Self { tau: None, eps: 1e-8, max_iter: 1000, budget: StageBudget::PerStage, init: InitScale::DivideSqrtN }
    }
}

impl BIHTConfig {
    pub fn step_size(&self, p: usize) -> f64 {
        self.tau.unwrap_or(0.002 / p as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau.is_some_and(|t| !(t > 0.0)) || !(self.eps > 0.0) || self.max_iter < 1 {
            return Err(Error::Config("BIHT needs tau > 0, eps > 0 and max_iter >= 1".into()));
        }
        Ok(())
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Patterns whose label disagrees with `sign(x·w)` (with `sign(0) = +1`).
pub fn mismatches(data: &Dataset, w: &[f64]) -> usize {
    (0..data.p).filter(|&mu| sign(dot(data.row(mu), w)) != data.y[mu]).count()
}

/// `𝒥(w) = Σ_μ max(0, -y_μ x_μ·w)`.
pub fn objective(data: &Dataset, w: &[f64]) -> f64 {
    data.margins(w).into_iter().map(|m| (-m).max(0.0)).sum()
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let norm = dot(w, w).sqrt();
    if norm > 0.0 {
        w.iter().map(|v| v / norm).collect()
    } else {
        w.to_vec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BihtRun {
    /// Final iterate scaled to the unit sphere.
    pub w: Vec<f64>,
    /// Final iterate before normalization; greedy stages continue from it.
    pub w_raw: Vec<f64>,
    pub support: Vec<usize>,
    /// `‖w_l - w_{l-1}‖ / N` per iteration.
    pub err_trace: Vec<f64>,
    pub iterations: usize,
}

fn biht_iterate(
    data: &Dataset,
    k: usize,
    w_init: &[f64],
    fixed: &[usize],
    tau: f64,
    eps: f64,
    limit: usize,
) -> Result<BihtRun> {
    let n = data.n;
    if w_init.len() != n || w_init.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("w_init must be finite with length N".into()));
    }
    let mut w = w_init.to_vec();
    let mut support = Vec::new();
    let mut err_trace = Vec::new();
    let mut a = vec![0.0; n];
    for _ in 0..limit {
        a.copy_from_slice(&w);
        for mu in 0..data.p {
            let row = data.row(mu);
            let r = data.y[mu] - sign(dot(row, &w));
            if r != 0.0 {
                let c = 0.5 * tau * r;
                a.iter_mut().zip(row).for_each(|(ai, xi)| *ai += c * xi);
            }
        }
        let (next, s) = hard_threshold_with_support(&a, k, fixed)?;
        let diff: f64 = next.iter().zip(&w).map(|(x, y)| (x - y) * (x - y)).sum();
        let err = diff.sqrt() / n as f64;
        w = next;
        support = s;
        err_trace.push(err);
        if err <= eps {
            break;
        }
    }
    let iterations = err_trace.len();
    Ok(BihtRun { w: normalized(&w), w_raw: w, support, err_trace, iterations })
}

/// BIHT with sparsity `k` and frozen indices `fixed`, from `w_init`.
pub fn biht_run(data: &Dataset, k: usize, w_init: &[f64], fixed: &[usize], cfg: &BIHTConfig) -> Result<BihtRun> {
    biht_iterate(data, k, w_init, fixed, cfg.step_size(data.p), cfg.eps, cfg.max_iter)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// No pattern is misclassified.
    pub success: bool,
    pub k_final: usize,
    /// `k_final / N`
    pub rho_used: f64,
    pub iterations_total: usize,
    pub objective_final: f64,
    pub support: Vec<usize>,
    /// Final unit-norm weights.
    pub w: Vec<f64>,
}

/// Greedy BIHT: grow `K` one index at a time, freezing the previous support,
/// until every pattern is classified correctly or `K = N`.
pub fn greedy_biht<R: Rng>(data: &Dataset, cfg: &BIHTConfig, rng: &mut R) -> Result<TrialResult> {
    let n = data.n;
    let scale = match cfg.init {
        InitScale::DivideSqrtN => 1.0 / (n as f64).sqrt(),
        InitScale::MultiplySqrtN => (n as f64).sqrt(),
    };
    let mut w: Vec<f64> = (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    let tau = cfg.step_size(data.p);
    let mut remaining = cfg.max_iter;
    let mut k = 1;
    let mut fixed: Vec<usize> = Vec::new();
    let mut total = 0;
    loop {
        let limit = match cfg.budget {
            StageBudget::PerStage => cfg.max_iter,
            StageBudget::Shared => remaining,
        };
        let run = biht_iterate(data, k, &w, &fixed, tau, cfg.eps, limit)?;
        total += run.iterations;
        remaining = remaining.saturating_sub(run.iterations);
        w = run.w_raw;
        if !run.support.is_empty() {
            fixed = run.support;
        }
        let bad = mismatches(data, &w);
        if bad == 0 || k == n || (cfg.budget == StageBudget::Shared && remaining == 0) {
            let unit = normalized(&w);
            return Ok(TrialResult {
                success: bad == 0,
                k_final: k,
                rho_used: k as f64 / n as f64,
                iterations_total: total,
                objective_final: objective(data, &unit),
                support: fixed,
                w: unit,
            });
        }
        k += 1;
    }
}

/// One Monte Carlo trial: dataset and initialization from stream `index`.
pub fn run_trial(
    n: usize,
    p: usize,
    ensemble: Ensemble,
    cfg: &BIHTConfig,
    base_seed: u64,
    index: u64,
) -> Result<(Dataset, TrialResult)> {
    let mut rng = trial_rng(base_seed, index);
    let data = generate_dataset_with(n, p, ensemble, &mut rng)?;
    let result = greedy_biht(&data, cfg, &mut rng)?;
    Ok((data, result))
}
