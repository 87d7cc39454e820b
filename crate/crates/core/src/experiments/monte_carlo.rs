//! Monte Carlo replicates of the Tk filter on simulated trajectories.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::Result;
use crate::filter::{real_error_covariance, CovarianceState, Gains, TkFilter};
use crate::model::{simulate_with_rng, trajectory_rng, SystemSpec};

/// Real filtering errors `x̃^r(t|t)` and innovations `ε_k^r(t)` of one run.
#[derive(Clone, Debug)]
pub struct Replicate {
    pub errors: Vec<DVector<f64>>,
    pub innovations: Vec<DVector<f64>>,
}

/// Runs `runs` replicates; replicate `i` draws from stream `i` of `seed`.
pub fn replicates(
    spec: &SystemSpec,
    filter: &TkFilter,
    schedule: &[(Gains, CovarianceState)],
    runs: usize,
    seed: u64,
) -> Result<Vec<Replicate>> {
    let horizon = schedule.len();
    let spec = spec.clone().with_horizon(horizon);
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(seed, i as u64);
            let traj = simulate_with_rng(&spec, &mut rng)?;
            let obs: Vec<_> = (1..=horizon).map(|t| traj.y_reduced(t, filter.order)).collect();
            let out = filter.run_schedule(schedule, &obs);
            let mut errors = Vec::with_capacity(horizon);
            let mut innovations = Vec::with_capacity(horizon);
            for (idx, (xhat, eps)) in out.into_iter().enumerate() {
                let x = traj.state(idx + 1);
                errors.push(x.real_vector() - xhat.real_vector());
                innovations.push(eps.real_vector());
            }
            Ok(Replicate { errors, innovations })
        })
        .collect()
}

/// Sample mean of `f` over replicates and its standard error.
pub fn mean_and_stderr(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Empirical error variance per `t`: total, and per state component.
#[derive(Clone, Debug)]
pub struct VarianceEstimate {
    pub total: Vec<(f64, f64)>,
    /// `[t][j]`: squared error summed over the four parts of component `j`.
    pub components: Vec<Vec<(f64, f64)>>,
}

pub fn error_variances(reps: &[Replicate], n: usize) -> VarianceEstimate {
    let horizon = reps.first().map_or(0, |r| r.errors.len());
    let mut total = Vec::with_capacity(horizon);
    let mut components = Vec::with_capacity(horizon);
    for t in 0..horizon {
        total.push(mean_and_stderr(reps.iter().map(|r| r.errors[t].norm_squared())));
        components.push(
            (0..n)
                .map(|j| {
                    mean_and_stderr(
                        reps.iter()
                            .map(|r| (0..4).map(|nu| r.errors[t][nu * n + j].powi(2)).sum::<f64>()),
                    )
                })
                .collect(),
        );
    }
    VarianceEstimate { total, components }
}

/// Entrywise `E[a bᵀ]` and standard errors over replicates.
pub fn outer_moments(
    reps: &[Replicate],
    a: impl Fn(&Replicate) -> &DVector<f64>,
    b: impl Fn(&Replicate) -> &DVector<f64>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let (ra, rb) = (a(&reps[0]).len(), b(&reps[0]).len());
    let mut mean = DMatrix::zeros(ra, rb);
    let mut se = DMatrix::zeros(ra, rb);
    for i in 0..ra {
        for j in 0..rb {
            let (m, s) = mean_and_stderr(reps.iter().map(|r| a(r)[i] * b(r)[j]));
            mean[(i, j)] = m;
            se[(i, j)] = s;
        }
    }
    (mean, se)
}

/// Comparison of one empirical moment with its expected value.
#[derive(Clone, Debug)]
pub struct MomentCheck {
    pub t: usize,
    pub lag: usize,
    pub expected: DMatrix<f64>,
    pub empirical: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    /// Scalar summary: trace for lag 0, `E[ε(t)ᵀ ε(t-lag)]` otherwise.
    pub trace: (f64, f64, f64),
}

impl MomentCheck {
    /// Largest `|empirical - expected| / stderr` over entries.
    pub fn max_z(&self) -> f64 {
        let mut z: f64 = 0.0;
        for ((e, x), s) in self.empirical.iter().zip(self.expected.iter()).zip(self.stderr.iter()) {
            if *s > 0.0 {
                z = z.max((e - x).abs() / s);
            } else if (e - x).abs() > 1e-12 {
                z = f64::INFINITY;
            }
        }
        z
    }

    /// Entries farther than `k` standard errors from the expectation.
    pub fn exceedances(&self, k: f64, tol: f64) -> usize {
        self.empirical
            .iter()
            .zip(self.expected.iter())
            .zip(self.stderr.iter())
            .filter(|((e, x), s)| (*e - *x).abs() > k * **s + tol)
            .count()
    }

    pub fn len(&self) -> usize {
        self.empirical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.empirical.is_empty()
    }

    /// `|trace_empirical - trace_expected| / trace_stderr`.
    pub fn trace_z(&self) -> f64 {
        let (e, x, s) = self.trace;
        (e - x).abs() / s
    }
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub runs: usize,
    pub covariance: Vec<MomentCheck>,
    pub whiteness: Vec<MomentCheck>,
}

/// Empirical error covariances against the analytic ones, and lagged
/// innovation cross moments against zero, for `t ≤ horizon`.
pub fn consistency_study(
    spec: &SystemSpec,
    k: usize,
    runs: usize,
    seed: u64,
    horizon: usize,
    lags: usize,
) -> Result<ConsistencyReport> {
    let spec = spec.clone().with_horizon(horizon);
    let filter = TkFilter::new(&spec, k)?;
    let schedule = filter.gain_schedule(horizon)?;
    let reps = replicates(&spec, &filter, &schedule, runs, seed)?;
    let mut covariance = Vec::with_capacity(horizon);
    let mut whiteness = Vec::new();
    for t in 1..=horizon {
        let idx = t - 1;
        let expected = real_error_covariance(&schedule[idx].1.p_filt, spec.n, filter.order);
        let (empirical, stderr) = outer_moments(&reps, |r| &r.errors[idx], |r| &r.errors[idx]);
        let (m, s) = mean_and_stderr(reps.iter().map(|r| r.errors[idx].norm_squared()));
        covariance.push(MomentCheck {
            t,
            lag: 0,
            trace: (m, expected.trace(), s),
            expected,
            empirical,
            stderr,
        });
        for lag in 1..=lags.min(t - 1) {
            let (empirical, stderr) = outer_moments(&reps, |r| &r.innovations[idx], |r| &r.innovations[idx - lag]);
            let (m, s) = mean_and_stderr(reps.iter().map(|r| r.innovations[idx].dot(&r.innovations[idx - lag])));
            whiteness.push(MomentCheck {
                t,
                lag,
                expected: DMatrix::zeros(empirical.nrows(), empirical.ncols()),
                empirical,
                stderr,
                trace: (m, 0.0, s),
            });
        }
    }
    Ok(ConsistencyReport {
        runs,
        covariance,
        whiteness,
    })
}
