//! Fixtures shared by the filter benchmarks.

use nalgebra::DVector;
use tessfusion::experiments::{Case, Preset};
use tessfusion::filter::TkFilter;
use tessfusion::model::{simulate_trajectory, SystemSpec};
use tessfusion::oracles::real_observations;
use tessfusion::{Result, TessarineVector};

pub struct Fixture {
    pub spec: SystemSpec,
    pub k: usize,
    pub reduced: Vec<TessarineVector>,
    pub real: Vec<DVector<f64>>,
}

/// One simulated trajectory of `case` with the first `sensors` sensors.
pub fn fixture(preset: Preset, case: u32, sensors: usize, horizon: usize, seed: u64) -> Result<Fixture> {
    let case = Case::new(case)?;
    let base = preset.spec()?;
    let base = base.clone().with_dropout(case.dropout(base.n, base.sensors)?);
    let keep: Vec<usize> = (0..sensors).collect();
    let spec = base.with_sensors(&keep)?.with_horizon(horizon);
    let traj = simulate_trajectory(&spec, seed)?;
    let order = TkFilter::new(&spec, case.k)?.order;
    Ok(Fixture {
        reduced: (1..=horizon).map(|t| traj.y_reduced(t, order)).collect(),
        real: real_observations(&traj, horizon),
        k: case.k,
        spec,
    })
}
