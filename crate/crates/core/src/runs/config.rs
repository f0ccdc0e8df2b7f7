//! Run configuration: a TOML file with one section per command plus shared
//! `[run]`, `[solver]` and `[quadrature]` sections.
//!
//! ```toml
//! [run]
//! out = "profile.csv"
//! seed = 7
//! jobs = 1
//!
//! [solver]
//! tolerance = 1e-10
//!
//! [rs-profile]
//! rho = 0.5
//! alpha = { start = 0.1, stop = 1.8, step = 0.1 }
//! ```
//!
//! Grids are either explicit lists or `{ start, stop, step }` ranges.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::biht::oracle::{binomial, MAX_SUPPORTS};
use crate::biht::{BIHTConfig, Ensemble};
use crate::error::{Error, Result};
use crate::gaussian::QuadratureGrid;
use crate::model::SolverOptions;

/// Subcommand names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    RsProfile,
    CapacityCurve,
    AtCheck,
    Simulate,
    Oracle,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::RsProfile, Command::CapacityCurve, Command::AtCheck, Command::Simulate, Command::Oracle];

    pub fn name(&self) -> &'static str {
        match self {
            Command::RsProfile => "rs-profile",
            Command::CapacityCurve => "capacity-curve",
            Command::AtCheck => "at-check",
            Command::Simulate => "simulate",
            Command::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// A list of values or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Single(f64),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            Grid::List(v) => v.clone(),
            Grid::Single(x) => vec![*x],
            Grid::Range { start, stop, step } => {
                if !(*step > 0.0) {
                    return Err(Error::Config("range step must be positive".into()));
                }
                let n = ((stop - start) / step + 1e-9).floor();
                if n < 0.0 {
                    return Err(Error::Config("range stop lies below start".into()));
                }
                (0..=n as usize).map(|i| start + i as f64 * step).collect()
            }
        };
        if v.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("grid must be finite and strictly increasing".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureKind {
    /// Composite panels refined geometrically toward `z = 0`.
    #[default]
    Graded,
    /// Composite Gauss–Legendre panels weighted by the Gaussian density.
    Composite,
    /// Gauss–Hermite rule.
    Hermite,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub kind: QuadratureKind,
    /// Hermite order.
    pub order: usize,
    pub half_width: f64,
    /// Composite panel count.
    pub panels: usize,
    /// Graded panel width and number of halvings toward the origin.
    pub panel_width: f64,
    pub levels: usize,
    pub points: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            kind: QuadratureKind::Graded,
            order: 200,
            half_width: 12.0,
            panels: 48,
            panel_width: 0.5,
            levels: 16,
            points: 16,
        }
    }
}

impl QuadratureSection {
    pub fn build(&self) -> Result<QuadratureGrid> {
        match self.kind {
            QuadratureKind::Hermite => QuadratureGrid::hermite(self.order),
            QuadratureKind::Composite => QuadratureGrid::composite(self.half_width, self.panels, self.points),
            QuadratureKind::Graded => {
                QuadratureGrid::graded(self.half_width, self.panel_width, self.levels, self.points)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub rho: Grid,
    pub alpha: Grid,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub rho: Grid,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub n: Vec<usize>,
    pub alpha: Grid,
    pub trials: usize,
    #[serde(default)]
    pub ensemble: Ensemble,
    #[serde(default)]
    pub biht: BIHTConfig,
    /// Aggregate table path; defaults to `<out>_aggregate.csv`.
    #[serde(default)]
    pub aggregate_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub n: usize,
    pub m: usize,
    pub p: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub ensemble: Ensemble,
}

/// Parsed configuration file. Sections for commands that are not run may be absent.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub solver: SolverOptions,
    pub quadrature: QuadratureSection,
    #[serde(rename = "rs-profile")]
    pub rs_profile: Option<ProfileSection>,
    #[serde(rename = "capacity-curve")]
    pub capacity_curve: Option<CurveSection>,
    #[serde(rename = "at-check")]
    pub at_check: Option<ProfileSection>,
    pub simulate: Option<SimulateSection>,
    pub oracle: Option<OracleSection>,
}

fn missing(cmd: Command) -> Error {
    Error::Config(format!("config has no [{}] section", cmd.name()))
}

fn check_rho(values: &[f64], open_top: bool) -> Result<()> {
    for &r in values {
        let ok = r > 0.0 && if open_top { r < 1.0 } else { r <= 1.0 };
        if !ok {
            return Err(Error::Config(format!("rho = {r} is outside the admissible range")));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Everything `cmd` needs, checked before any work starts.
    pub fn validate(&self, cmd: Command) -> Result<()> {
        self.solver.validate()?;
        self.quadrature.build()?;
        if self.run.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        match cmd {
            Command::RsProfile | Command::AtCheck => {
                let sec = if cmd == Command::RsProfile { &self.rs_profile } else { &self.at_check };
                let sec = sec.as_ref().ok_or_else(|| missing(cmd))?;
                let rhos = sec.rho.values()?;
                check_rho(&rhos, false)?;
                if cmd == Command::RsProfile && rhos.len() != 1 {
                    return Err(Error::Config("rs-profile takes a single rho".into()));
                }
                if sec.alpha.values()?[0] <= 0.0 {
                    return Err(Error::Config("alpha values must be positive".into()));
                }
            }
            Command::CapacityCurve => {
                let sec = self.capacity_curve.as_ref().ok_or_else(|| missing(cmd))?;
                check_rho(&sec.rho.values()?, true)?;
            }
            Command::Simulate => {
                let sec = self.simulate.as_ref().ok_or_else(|| missing(cmd))?;
                if sec.n.is_empty() || sec.n.contains(&0) || sec.trials == 0 {
                    return Err(Error::Config("simulate needs positive N values and trials".into()));
                }
                if sec.alpha.values()?[0] <= 0.0 {
                    return Err(Error::Config("alpha values must be positive".into()));
                }
                sec.biht.validate()?;
            }
            Command::Oracle => {
                let sec = self.oracle.as_ref().ok_or_else(|| missing(cmd))?;
                if sec.n == 0 || sec.n > 20 || sec.m == 0 || sec.m > sec.n {
                    return Err(Error::Config(format!("oracle needs 1 <= M <= N <= 20, got N = {}, M = {}", sec.n, sec.m)));
                }
                let count = binomial(sec.n as u64, sec.m as u64);
                if count > MAX_SUPPORTS {
                    return Err(Error::Config(format!("C(N, M) = {count} exceeds {MAX_SUPPORTS}")));
                }
                if sec.p.is_empty() || sec.p.contains(&0) || sec.p.windows(2).any(|w| w[0] >= w[1]) || sec.trials == 0 {
                    return Err(Error::Config("oracle needs a strictly increasing positive P list and trials".into()));
                }
            }
        }
        Ok(())
    }
}
