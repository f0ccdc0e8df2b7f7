//! The five sweeps behind the command-line tool. Each writes one CSV (two for
//! `simulate`), records failures per row and keeps going.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{Command, RunConfig};
use super::format::{fmt_g, fmt_opt};
use crate::biht::{exhaustive_capacity_curve, run_trial};
use crate::error::{Error, Result};
use crate::gaussian::QuadratureGrid;
use crate::model::{binary_entropy, ModelPoint, SolverOptions};
use crate::stability::{at_check, at_margin_subcritical};
use crate::subcritical::solve_subcritical;
use crate::supercritical::{
    capacity_vs, solve_near_threshold, solve_supercritical, RescaledOrderParams, CONTINUATION_OFFSET,
};

/// Where a run writes and how it draws randomness. Command-line flags take
/// precedence over the `[run]` section.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: usize,
}

impl RunContext {
    pub fn resolve(cmd: Command, cfg: &RunConfig, out: Option<PathBuf>, seed: Option<u64>, jobs: Option<usize>) -> Self {
        Self {
            out: out.or_else(|| cfg.run.out.clone()).unwrap_or_else(|| PathBuf::from(format!("{}.csv", cmd.name()))),
            seed: seed.or(cfg.run.seed).unwrap_or(0),
            jobs: jobs.or(cfg.run.jobs).unwrap_or(1).max(1),
        }
    }
}

/// Rows written and how many of them carry a failure status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunSummary {
    pub rows: usize,
    pub failed: usize,
}

impl RunSummary {
    pub fn is_partial(&self) -> bool {
        self.failed > 0
    }
}

/// Validate `cfg` for `cmd`, then run it on a pool of `ctx.jobs` threads.
pub fn run_command(cmd: Command, cfg: &RunConfig, ctx: &RunContext) -> Result<RunSummary> {
    cfg.validate(cmd)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cmd {
        Command::RsProfile => cmd_rs_profile(cfg, ctx),
        Command::CapacityCurve => cmd_capacity_curve(cfg, ctx),
        Command::AtCheck => cmd_at_check(cfg, ctx),
        Command::Simulate => cmd_simulate(cfg, ctx),
        Command::Oracle => cmd_oracle(cfg, ctx),
    })
}

fn status<T>(r: &Result<T>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => e.to_string().replace(['\n', '\r'], " "),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Supercritical solutions along an increasing `alpha` list, each warm-started
/// from the last success. A failed point is retried through intermediate loads
/// and otherwise reported without disturbing its neighbours.
pub fn solve_by_continuation(
    rho: f64,
    alphas: &[f64],
    grid: &QuadratureGrid,
    opts: &SolverOptions,
) -> Vec<Result<RescaledOrderParams>> {
    let acg = 2.0 * rho;
    let mut warm: Option<(f64, RescaledOrderParams)> = None;
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let near = |eps: f64| solve_near_threshold(rho, eps, grid, opts);
        let attempt = (|| {
            let excess = alpha / acg - 1.0;
            if excess <= CONTINUATION_OFFSET {
                return near(excess);
            }
            let (a0, start) = match &warm {
                Some(w) => w.clone(),
                None => (acg * (1.0 + CONTINUATION_OFFSET), near(CONTINUATION_OFFSET)?),
            };
            let point = ModelPoint::new(rho, alpha)?;
            match solve_supercritical(point, grid, Some(&start), opts) {
                Ok(s) => Ok(s),
                Err(_) => {
                    let mut cur = start;
                    for i in 1..=8 {
                        let a = a0 + (alpha - a0) * i as f64 / 8.0;
                        cur = solve_supercritical(ModelPoint::new(rho, a)?, grid, Some(&cur), opts)?;
                    }
                    Ok(cur)
                }
            }
        })();
        if let Ok(s) = &attempt {
            warm = Some((alpha, s.clone()));
        }
        out.push(attempt);
    }
    out
}

/// One row of an RS profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub alpha: f64,
    pub regime: &'static str,
    pub q1: Option<f64>,
    pub q0: Option<f64>,
    pub chi: Option<f64>,
    pub sigma: Option<f64>,
    pub at_margin: Option<f64>,
    pub status: String,
}

impl ProfileRow {
    fn failed(alpha: f64, regime: &'static str, err: String) -> Self {
        Self { alpha, regime, q1: None, q0: None, chi: None, sigma: None, at_margin: None, status: err }
    }
}

/// Profile of the RS solution along `alphas` at fixed `rho`.
pub fn rs_profile(rho: f64, alphas: &[f64], grid: &QuadratureGrid, opts: &SolverOptions) -> Vec<ProfileRow> {
    let acg = 2.0 * rho;
    let mut rows: Vec<ProfileRow> = alphas
        .par_iter()
        .map(|&alpha| {
            if alpha > acg {
                return ProfileRow::failed(alpha, "supercritical", String::new());
            }
            if alpha == acg {
                return ProfileRow {
                    alpha,
                    regime: "critical",
                    q1: Some(rho),
                    q0: None,
                    chi: None,
                    sigma: Some(binary_entropy(rho)),
                    at_margin: Some(0.0),
                    status: "ok".into(),
                };
            }
            let solved = ModelPoint::new(rho, alpha).and_then(|p| {
                let s = solve_subcritical(p, grid, opts)?;
                let at = at_margin_subcritical(&s, p)?;
                Ok((s, at))
            });
            match solved {
                Ok((s, at)) => ProfileRow {
                    alpha,
                    regime: "subcritical",
                    q1: Some(s.q1),
                    q0: Some(s.q0),
                    chi: None,
                    sigma: Some(s.sigma),
                    at_margin: Some(at.margin),
                    status: "ok".into(),
                },
                Err(e) => ProfileRow::failed(alpha, "subcritical", status::<()>(&Err(e))),
            }
        })
        .collect();

    let above: Vec<usize> = (0..alphas.len()).filter(|&i| alphas[i] > acg).collect();
    let super_alphas: Vec<f64> = above.iter().map(|&i| alphas[i]).collect();
    let solved = solve_by_continuation(rho, &super_alphas, grid, opts);
    for (&i, r) in above.iter().zip(solved) {
        let alpha = alphas[i];
        let with_at = r.and_then(|s| {
            let at = at_check(&s, ModelPoint::new(rho, alpha)?, grid)?;
            Ok((s, at))
        });
        rows[i] = match with_at {
            Ok((s, at)) => ProfileRow {
                alpha,
                regime: "supercritical",
                q1: Some(rho),
                q0: Some(s.q0),
                chi: Some(s.chi),
                sigma: Some(s.sigma),
                at_margin: Some(at.margin),
                status: "ok".into(),
            },
            Err(e) => ProfileRow::failed(alpha, "supercritical", status::<()>(&Err(e))),
        };
    }
    rows
}

fn grid_and_opts(cfg: &RunConfig) -> Result<(QuadratureGrid, &SolverOptions)> {
    Ok((cfg.quadrature.build()?, &cfg.solver))
}

/// `alpha,regime,q1,q0,chi,Sigma,at_margin,status`; `chi` is empty below `α_CG`.
pub fn cmd_rs_profile(cfg: &RunConfig, ctx: &RunContext) -> Result<RunSummary> {
    let sec = cfg.rs_profile.as_ref().ok_or_else(|| Error::Config("missing [rs-profile]".into()))?;
    let (grid, opts) = grid_and_opts(cfg)?;
    let rho = match sec.rho.values()?[..] {
        [rho] => rho,
        _ => return Err(Error::Config("[rs-profile] takes a single rho; use at-check for several".into())),
    };
    let rows = rs_profile(rho, &sec.alpha.values()?, &grid, opts);
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_g(r.alpha),
                r.regime.into(),
                fmt_opt(r.q1),
                fmt_opt(r.q0),
                fmt_opt(r.chi),
                fmt_opt(r.sigma),
                fmt_opt(r.at_margin),
                r.status.clone(),
            ]
        })
        .collect();
    write_csv(&ctx.out, &["alpha", "regime", "q1", "q0", "chi", "Sigma", "at_margin", "status"], &cells)?;
    Ok(RunSummary { rows: cells.len(), failed })
}

/// `rho,alpha_cg,alpha_vs,sigma_residual,status`.
pub fn cmd_capacity_curve(cfg: &RunConfig, ctx: &RunContext) -> Result<RunSummary> {
    let sec = cfg.capacity_curve.as_ref().ok_or_else(|| Error::Config("missing [capacity-curve]".into()))?;
    let (grid, opts) = grid_and_opts(cfg)?;
    let rhos = sec.rho.values()?;
    let results: Vec<_> = rhos.par_iter().map(|&rho| capacity_vs(rho, &grid, opts)).collect();
    let failed = results.iter().filter(|r| r.is_err()).count();
    let cells: Vec<Vec<String>> = rhos
        .iter()
        .zip(&results)
        .map(|(&rho, r)| {
            let ok = r.as_ref().ok();
            vec![
                fmt_g(rho),
                fmt_g(2.0 * rho),
                fmt_opt(ok.map(|c| c.alpha_vs)),
                fmt_opt(ok.map(|c| c.sigma_residual)),
                status(r),
            ]
        })
        .collect();
    write_csv(&ctx.out, &["rho", "alpha_cg", "alpha_vs", "sigma_residual", "status"], &cells)?;
    Ok(RunSummary { rows: cells.len(), failed })
}

/// `rho,alpha,regime,lambda,lambda_hat,at_margin,stable,status` over the ρ × α grid.
pub fn cmd_at_check(cfg: &RunConfig, ctx: &RunContext) -> Result<RunSummary> {
    let sec = cfg.at_check.as_ref().ok_or_else(|| Error::Config("missing [at-check]".into()))?;
    let (grid, opts) = grid_and_opts(cfg)?;
    let alphas = sec.alpha.values()?;
    let per_rho: Vec<Vec<Vec<String>>> = sec
        .rho
        .values()?
        .par_iter()
        .map(|&rho| {
            let acg = 2.0 * rho;
            let above: Vec<f64> = alphas.iter().copied().filter(|&a| a > acg).collect();
            let mut supers = solve_by_continuation(rho, &above, &grid, opts).into_iter();
            alphas
                .iter()
                .map(|&alpha| {
                    let (regime, report) = if alpha > acg {
                        let r = supers.next().expect("one result per supercritical alpha");
                        ("supercritical", r.and_then(|s| at_check(&s, ModelPoint::new(rho, alpha)?, &grid)))
                    } else if alpha == acg {
                        ("critical", Err(Error::Regime("AT margin is not defined exactly at alpha_CG".into())))
                    } else {
                        let r = ModelPoint::new(rho, alpha).and_then(|p| at_margin_subcritical(&solve_subcritical(p, &grid, opts)?, p));
                        ("subcritical", r)
                    };
                    let ok = report.as_ref().ok();
                    vec![
                        fmt_g(rho),
                        fmt_g(alpha),
                        regime.into(),
                        fmt_opt(ok.map(|a| a.lambda)),
                        fmt_opt(ok.map(|a| a.lambda_hat)),
                        fmt_opt(ok.map(|a| a.margin)),
                        ok.map(|a| a.stable.to_string()).unwrap_or_default(),
                        status(&report),
                    ]
                })
                .collect()
        })
        .collect();
    let cells: Vec<Vec<String>> = per_rho.into_iter().flatten().collect();
    let failed = cells.iter().filter(|r| r[7] != "ok").count();
    write_csv(
        &ctx.out,
        &["rho", "alpha", "regime", "lambda", "lambda_hat", "at_margin", "stable", "status"],
        &cells,
    )?;
    Ok(RunSummary { rows: cells.len(), failed })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of trial `trial` in sweep cell `cell`; the recorded seed alone
/// reproduces the trial.
pub fn trial_seed(base: u64, cell: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ cell) ^ trial)
}

/// Pattern count for a load: `round(αN)`, at least 1.
pub fn pattern_count(n: usize, alpha: f64) -> usize {
    ((alpha * n as f64).round() as usize).max(1)
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Aggregate table path next to the trial table: `runs.csv → runs_aggregate.csv`.
pub fn aggregate_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "simulate".into());
    out.with_file_name(format!("{stem}_aggregate.csv"))
}

/// One CSV row per trial plus a per-`(N, α)` aggregate.
pub fn cmd_simulate(cfg: &RunConfig, ctx: &RunContext) -> Result<RunSummary> {
    let sec = cfg.simulate.as_ref().ok_or_else(|| Error::Config("missing [simulate]".into()))?;
    let alphas = sec.alpha.values()?;
    let cells: Vec<(usize, f64)> = sec.n.iter().flat_map(|&n| alphas.iter().map(move |&a| (n, a))).collect();
    let jobs: Vec<(usize, usize, u64)> = cells
        .iter()
        .enumerate()
        .flat_map(|(c, &(n, a))| (0..sec.trials as u64).map(move |t| (c, pattern_count(n, a), t)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(c, p, t)| {
            let seed = trial_seed(ctx.seed, c as u64, t);
            (seed, run_trial(cells[c].0, p, sec.ensemble, &sec.biht, seed, 0).map(|(_, r)| r))
        })
        .collect();

    let mut trial_rows = Vec::with_capacity(results.len());
    let mut aggregate_rows = Vec::with_capacity(cells.len());
    let mut failed = 0;
    for (c, chunk) in results.chunks(sec.trials).enumerate() {
        let (n, alpha) = cells[c];
        let p = pattern_count(n, alpha);
        let (mut used, mut excess) = (Vec::new(), Vec::new());
        let mut errors = 0;
        for (seed, r) in chunk {
            let row = match r {
                Ok(t) => {
                    if t.success {
                        used.push(t.rho_used);
                        excess.push(alpha - 2.0 * t.rho_used);
                    }
                    vec![
                        t.success.to_string(),
                        t.k_final.to_string(),
                        fmt_g(t.rho_used),
                        t.iterations_total.to_string(),
                        "ok".into(),
                    ]
                }
                Err(e) => {
                    errors += 1;
                    vec![String::new(), String::new(), String::new(), String::new(), e.to_string().replace(['\n', '\r'], " ")]
                }
            };
            let mut full = vec![n.to_string(), p.to_string(), fmt_g(alpha), sec.ensemble.as_str().into(), seed.to_string()];
            full.extend(row);
            trial_rows.push(full);
        }
        failed += errors;
        let done = chunk.len() - errors;
        let mean = (!used.is_empty()).then(|| used.iter().sum::<f64>() / used.len() as f64);
        aggregate_rows.push(vec![
            n.to_string(),
            p.to_string(),
            fmt_g(alpha),
            done.to_string(),
            used.len().to_string(),
            if done > 0 { fmt_g(used.len() as f64 / done as f64) } else { String::new() },
            fmt_opt(mean),
            fmt_opt(median(&mut used)),
            fmt_opt(median(&mut excess)),
            errors.to_string(),
        ]);
    }
    write_csv(
        &ctx.out,
        &["N", "P", "alpha", "ensemble", "seed", "success", "K_final", "rho_used", "iterations_total", "status"],
        &trial_rows,
    )?;
    let agg = sec.aggregate_out.clone().unwrap_or_else(|| aggregate_path(&ctx.out));
    write_csv(
        &agg,
        &[
            "N",
            "P",
            "alpha",
            "trials",
            "successes",
            "success_rate",
            "mean_rho_used",
            "median_rho_used",
            "median_excess_load",
            "failed_trials",
        ],
        &aggregate_rows,
    )?;
    Ok(RunSummary { rows: trial_rows.len(), failed })
}

/// `rho,N,M,P,prob_any_subset,prob_fixed_subset` over the configured P list.
pub fn cmd_oracle(cfg: &RunConfig, ctx: &RunContext) -> Result<RunSummary> {
    let sec = cfg.oracle.as_ref().ok_or_else(|| Error::Config("missing [oracle]".into()))?;
    let rows = exhaustive_capacity_curve(sec.n, sec.m, &sec.p, sec.trials, sec.ensemble, ctx.seed)?;
    let rho = sec.m as f64 / sec.n as f64;
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_g(rho),
                sec.n.to_string(),
                sec.m.to_string(),
                r.p.to_string(),
                fmt_g(r.prob_any_subset),
                fmt_g(r.prob_fixed_subset),
            ]
        })
        .collect();
    write_csv(&ctx.out, &["rho", "N", "M", "P", "prob_any_subset", "prob_fixed_subset"], &cells)?;
    Ok(RunSummary { rows: cells.len(), failed: 0 })
}
