//! Wall-clock comparison of the Tk filter and the real-coordinate recursion.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::cases::Case;
use super::presets::Preset;
use crate::error::{Error, Result};
use crate::filter::TkFilter;
use crate::model::simulate_trajectory;
use crate::oracles::{real_observations, RealFilter};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub preset: Preset,
    pub case: u32,
    pub sensors: Vec<usize>,
    pub horizon: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            preset: Preset::Example1T1,
            case: 3,
            sensors: vec![2, 3, 4, 5],
            horizon: 200,
            repetitions: 5,
            seed: super::sweep::DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub sensors: usize,
    pub horizon: usize,
    /// Median seconds over the repetitions.
    pub tk_s: f64,
    pub real_s: f64,
    /// Largest difference between the two filtered estimates.
    pub max_estimate_diff: f64,
}

impl TimingRow {
    /// `real_s / tk_s`.
    pub fn ratio(&self) -> f64 {
        self.real_s / self.tk_s
    }
}

fn median(mut v: Vec<Duration>) -> f64 {
    v.sort();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m].as_secs_f64()
    } else {
        (v[m - 1].as_secs_f64() + v[m].as_secs_f64()) / 2.0
    }
}

/// Median wall clock of both filters on one simulated trajectory per
/// sensor count; one warm-up run of each is discarded.
pub fn run_timing_benchmark(cfg: &TimingConfig) -> Result<Vec<TimingRow>> {
    if cfg.repetitions == 0 || cfg.horizon < 2 {
        return Err(Error::Config(
            "timing needs at least one repetition and horizon >= 2".into(),
        ));
    }
    let case = Case::new(cfg.case)?;
    if case.preset != cfg.preset {
        return Err(Error::Config(format!("case {} belongs to {}", case.id, case.preset)));
    }
    let base = cfg.preset.spec()?;
    let base = base.clone().with_dropout(case.dropout(base.n, base.sensors)?);
    let mut rows = Vec::with_capacity(cfg.sensors.len());
    for &r in &cfg.sensors {
        let keep: Vec<usize> = (0..r).collect();
        let spec = base.with_sensors(&keep)?.with_horizon(cfg.horizon);
        let traj = simulate_trajectory(&spec, cfg.seed)?;
        let tk = TkFilter::new(&spec, case.k)?;
        let real = RealFilter::new(&spec)?;
        let reduced: Vec<_> = (1..=cfg.horizon).map(|t| traj.y_reduced(t, tk.order)).collect();
        let realobs = real_observations(&traj, cfg.horizon);

        let run_tk = || -> Result<Vec<_>> {
            let mut st = tk.init_filter()?;
            let mut out = Vec::with_capacity(reduced.len());
            for y in &reduced {
                let (next, step) = tk.filter_step(&st, y)?;
                out.push(step.estimate);
                st = next;
            }
            Ok(out)
        };
        let mut tk_times = Vec::with_capacity(cfg.repetitions);
        let mut real_times = Vec::with_capacity(cfg.repetitions);
        let mut tk_est = run_tk()?;
        let mut real_est = real.run(&realobs)?.estimates;
        for _ in 0..cfg.repetitions {
            let s = Instant::now();
            tk_est = run_tk()?;
            tk_times.push(s.elapsed());
            let s = Instant::now();
            real_est = real.run(&realobs)?.estimates;
            real_times.push(s.elapsed());
        }
        let max_estimate_diff = tk_est
            .iter()
            .zip(&real_est)
            .map(|(a, b)| (a.real_vector() - &b.xhat).amax())
            .fold(0.0, f64::max);
        rows.push(TimingRow {
            sensors: r,
            horizon: cfg.horizon,
            tk_s: median(tk_times),
            real_s: median(real_times),
            max_estimate_diff,
        });
    }
    Ok(rows)
}
