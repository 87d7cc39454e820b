//! Case sweeps: analytic Tk error variances, the quaternion counterpart,
//! their differences and Monte Carlo estimates.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cases::Case;
use super::monte_carlo::{error_variances, replicates};
use super::presets::{example1_with_c, Preset};
use crate::error::{Error, Result};
use crate::filter::{error_variance, real_error_covariance, TkFilter};
use crate::model::config::SystemConfig;
use crate::model::SystemSpec;
use crate::oracles::{constrained_error_covariances, LinearClass, QuaternionMode};

pub const DEFAULT_MC_RUNS: usize = 2000;
pub const DEFAULT_SEED: u64 = 20210525;

/// Where the system comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Preset(Preset),
    System(Box<SystemConfig>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(flatten)]
    pub source: Source,
    /// Order for a custom system; preset cases carry their own.
    #[serde(default)]
    pub k: Option<usize>,
    /// Case ids; empty means every case of the preset.
    #[serde(default)]
    pub cases: Vec<u32>,
    /// Sensor counts to sweep (the first `R` sensors are used); empty means all.
    #[serde(default)]
    pub sensors: Vec<usize>,
    #[serde(default = "default_runs")]
    pub mc_runs: usize,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Replaces the cross term `c` of the first example's state noise.
    #[serde(default)]
    pub c: Option<f64>,
}

fn default_runs() -> usize {
    DEFAULT_MC_RUNS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        ExperimentConfig {
            name: preset.name().to_string(),
            source: Source::Preset(preset),
            k: None,
            cases: Vec::new(),
            sensors: Vec::new(),
            mc_runs: DEFAULT_MC_RUNS,
            horizon: None,
            seed: DEFAULT_SEED,
            c: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn horizon(&self) -> usize {
        match (&self.horizon, &self.source) {
            (Some(h), _) => *h,
            (None, Source::Preset(p)) => p.default_horizon(),
            (None, Source::System(s)) => s.horizon,
        }
    }

    fn max_sensors(&self) -> usize {
        match &self.source {
            Source::Preset(p) => p.max_sensors(),
            Source::System(s) => s.sensors.len(),
        }
    }

    pub fn sensor_counts(&self) -> Vec<usize> {
        if self.sensors.is_empty() {
            vec![self.max_sensors()]
        } else {
            self.sensors.clone()
        }
    }

    /// Cases to run; a custom system is a single case `0` with its own probabilities.
    pub fn case_list(&self) -> Result<Vec<Option<Case>>> {
        match &self.source {
            Source::System(_) => {
                if !self.cases.is_empty() {
                    return Err(Error::Config("packaged cases only apply to presets".into()));
                }
                Ok(vec![None])
            }
            Source::Preset(p) => {
                if self.cases.is_empty() {
                    return Ok(Case::for_preset(*p).into_iter().map(Some).collect());
                }
                let mut ids = self.cases.clone();
                ids.sort_unstable();
                ids.dedup();
                ids.into_iter()
                    .map(|id| {
                        let c = Case::new(id)?;
                        if c.preset != *p {
                            return Err(Error::Config(format!("case {id} belongs to {}, not {p}", c.preset)));
                        }
                        Ok(Some(c))
                    })
                    .collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_runs == 0 {
            return Err(Error::Config("Monte Carlo run count must be at least 1".into()));
        }
        if self.horizon() < 2 {
            return Err(Error::Config("horizon must be at least 2".into()));
        }
        let max = self.max_sensors();
        if let Some(r) = self.sensor_counts().iter().find(|&&r| r == 0 || r > max) {
            return Err(Error::Config(format!("sensor count {r} outside 1..={max}")));
        }
        match &self.source {
            Source::System(_) => {
                if self.k.is_none() {
                    return Err(Error::Config("a custom system needs `k`".into()));
                }
                if self.c.is_some() {
                    return Err(Error::Config("`c` only applies to the first example".into()));
                }
            }
            Source::Preset(p) => {
                if self.c.is_some() && *p == Preset::Example2 {
                    return Err(Error::Config("`c` only applies to the first example".into()));
                }
                if let Some(k) = self.k {
                    if let Some(c) = self.case_list()?.into_iter().flatten().find(|c| c.k != k) {
                        return Err(Error::Config(format!("case {} is a T{} case, not T{k}", c.id, c.k)));
                    }
                }
            }
        }
        self.case_list().map(|_| ())
    }

    /// The system, order and case id of one sweep unit.
    pub fn unit_spec(&self, case: Option<&Case>, sensors: usize) -> Result<(SystemSpec, usize, u32)> {
        let horizon = self.horizon();
        let (spec, k, id) = match (&self.source, case) {
            (Source::System(s), _) => (s.build()?, self.k.unwrap_or(1), 0),
            (Source::Preset(p), Some(c)) => {
                let base = match (p, self.c) {
                    (Preset::Example2, _) | (_, None) => p.spec()?,
                    (_, Some(cv)) => example1_with_c(c.k, cv)?,
                };
                if c.preset != *p {
                    return Err(Error::Config(format!("case {} belongs to {}, not {p}", c.id, c.preset)));
                }
                let d = c.dropout(base.n, base.sensors)?;
                (base.with_dropout(d), c.k, c.id)
            }
            (Source::Preset(_), None) => return Err(Error::Config("preset run without a case".into())),
        };
        let keep: Vec<usize> = (0..sensors).collect();
        Ok((spec.with_sensors(&keep)?.with_horizon(horizon), k, id))
    }
}

/// Quaternion processing compared against order `k`.
pub fn counterpart_mode(k: usize) -> QuaternionMode {
    if k == 1 {
        QuaternionMode::Qsl
    } else {
        QuaternionMode::Qswl
    }
}

/// Per-`t` values of one `(case, R)` unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSeries {
    pub case: u32,
    pub sensors: usize,
    pub k: usize,
    pub analytic: Vec<f64>,
    /// `[t][j]`.
    pub analytic_components: Vec<Vec<f64>>,
    pub quaternion: Vec<f64>,
    pub quaternion_components: Vec<Vec<f64>>,
    pub mc_var: Vec<f64>,
    pub mc_stderr: Vec<f64>,
    pub mc_components: Vec<Vec<(f64, f64)>>,
}

impl CaseSeries {
    /// `D_k(t|t)`.
    pub fn diff(&self) -> Vec<f64> {
        self.quaternion.iter().zip(&self.analytic).map(|(q, a)| q - a).collect()
    }

    /// `MD_k`: mean of `D_k(t|t)` over `t`.
    pub fn mean_diff(&self) -> f64 {
        let d = self.diff();
        d.iter().sum::<f64>() / d.len() as f64
    }

    pub fn component_diff(&self, j: usize) -> Vec<f64> {
        self.quaternion_components
            .iter()
            .zip(&self.analytic_components)
            .map(|(q, a)| q[j] - a[j])
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub horizon: usize,
    pub n: usize,
    pub mc_runs: usize,
    pub seed: u64,
    pub series: Vec<CaseSeries>,
}

fn component_traces(c: &nalgebra::DMatrix<f64>, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| (0..4).map(|nu| c[(nu * n + j, nu * n + j)]).sum())
        .collect()
}

/// Totals and per-component variances of the filter and of its quaternion counterpart.
pub type AnalyticSeries = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>);

/// Analytic Tk and quaternion error variances of one unit.
pub fn analytic_unit(spec: &SystemSpec, k: usize) -> Result<AnalyticSeries> {
    let filter = TkFilter::new(spec, k)?;
    let schedule = filter.gain_schedule(spec.horizon)?;
    let n = spec.n;
    let mut analytic = Vec::with_capacity(spec.horizon);
    let mut comps = Vec::with_capacity(spec.horizon);
    for (_, c) in &schedule {
        analytic.push(error_variance(&c.p_filt.block(0, 0, n, n)));
        comps.push(component_traces(&real_error_covariance(&c.p_filt, n, filter.order), n));
    }
    let class: LinearClass = counterpart_mode(k).into();
    let qc = constrained_error_covariances(spec, class, spec.horizon)?;
    let quaternion = qc.iter().map(|p| p.trace()).collect();
    let qcomps = qc.iter().map(|p| component_traces(p, n)).collect();
    Ok((analytic, comps, quaternion, qcomps))
}

fn run_unit(cfg: &ExperimentConfig, case: Option<&Case>, sensors: usize, stream: u64) -> Result<CaseSeries> {
    let (spec, k, id) = cfg.unit_spec(case, sensors)?;
    let (analytic, analytic_components, quaternion, quaternion_components) = analytic_unit(&spec, k)?;
    let filter = TkFilter::new(&spec, k)?;
    let schedule = filter.gain_schedule(spec.horizon)?;
    // distinct units draw from disjoint seeds
    let seed = cfg.seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let reps = replicates(&spec, &filter, &schedule, cfg.mc_runs, seed)?;
    let est = error_variances(&reps, spec.n);
    Ok(CaseSeries {
        case: id,
        sensors,
        k,
        analytic,
        analytic_components,
        quaternion,
        quaternion_components,
        mc_var: est.total.iter().map(|v| v.0).collect(),
        mc_stderr: est.total.iter().map(|v| v.1).collect(),
        mc_components: est.components,
    })
}

/// Runs every `(case, R)` unit of the configuration.
pub fn run_case_sweep(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let cases = cfg.case_list()?;
    let mut units = Vec::new();
    for c in &cases {
        for &r in &cfg.sensor_counts() {
            units.push((c.clone(), r));
        }
    }
    let series = units
        .par_iter()
        .enumerate()
        .map(|(i, (c, r))| run_unit(cfg, c.as_ref(), *r, i as u64))
        .collect::<Result<Vec<_>>>()?;
    let n = match &cfg.source {
        Source::Preset(p) => p.spec()?.n,
        Source::System(s) => s.n,
    };
    Ok(ExperimentResult {
        name: cfg.name.clone(),
        horizon: cfg.horizon(),
        n,
        mc_runs: cfg.mc_runs,
        seed: cfg.seed,
        series,
    })
}

/// `MD_1` of the first example for each state-noise cross term `c`.
pub fn mean_difference_by_c(cs: &[f64], case: u32, sensors: usize, horizon: usize) -> Result<Vec<(f64, f64)>> {
    let case = Case::new(case)?;
    if case.preset != Preset::Example1T1 {
        return Err(Error::Config(format!(
            "case {} is not a first-example T1 case",
            case.id
        )));
    }
    cs.par_iter()
        .map(|&c| {
            let spec = example1_with_c(1, c)?;
            let d = case.dropout(spec.n, spec.sensors)?;
            let keep: Vec<usize> = (0..sensors).collect();
            let spec = spec.with_dropout(d).with_sensors(&keep)?.with_horizon(horizon);
            let (a, _, q, _) = analytic_unit(&spec, 1)?;
            let md = q.iter().zip(&a).map(|(q, a)| q - a).sum::<f64>() / a.len() as f64;
            Ok((c, md))
        })
        .collect()
}
