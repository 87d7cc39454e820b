//! Monte Carlo realisations of the state, the sensors and the lossy channels.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::reduced::{reduced_from_sensors, stacked_augmented};
use super::spec::SystemSpec;
use crate::error::Result;
use crate::linalg;
use crate::matrix::TessarineVector;
use crate::structural::ProperOrder;
use crate::tessarine::PARTS;

/// Eigenvalues down to `-CLIP * scale` are clipped to zero when factoring.
pub const FACTOR_CLIP: f64 = 1e-10;

/// Independent ChaCha8 stream `stream` of the master `seed`.
pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-time-step data at observation time `t ≥ 1`.
#[derive(Clone, Debug)]
pub struct ObservationStep {
    pub z: Vec<TessarineVector>,
    pub v: Vec<TessarineVector>,
    /// Arrival indicators; every part is 0 or 1.
    pub gamma: Vec<TessarineVector>,
    pub y: Vec<TessarineVector>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// `x(0), …, x(T)`.
    pub x: Vec<TessarineVector>,
    /// `u(0), …, u(T-1)`.
    pub u: Vec<TessarineVector>,
    /// Observation data for `t = 1, …, T` at index `t - 1`.
    pub steps: Vec<ObservationStep>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn state(&self, t: usize) -> &TessarineVector {
        &self.x[t]
    }

    pub fn step(&self, t: usize) -> &ObservationStep {
        &self.steps[t - 1]
    }

    pub fn y(&self, t: usize) -> &[TessarineVector] {
        &self.steps[t - 1].y
    }

    /// Stacked augmented observation `y⃗(t)`.
    pub fn y_stacked(&self, t: usize) -> TessarineVector {
        stacked_augmented(self.y(t))
    }

    /// Reduced observation `y_k(t)`.
    pub fn y_reduced(&self, t: usize, order: ProperOrder) -> TessarineVector {
        reduced_from_sensors(self.y(t), order)
    }

    /// Sensor-major stack of the real vectors `y^{(i)r}(t)`.
    pub fn y_real(&self, t: usize) -> DVector<f64> {
        stack_real(self.y(t))
    }
}

pub fn stack_real(per_sensor: &[TessarineVector]) -> DVector<f64> {
    let parts: Vec<f64> = per_sensor
        .iter()
        .flat_map(|y| y.real_vector().iter().copied().collect::<Vec<_>>())
        .collect();
    DVector::from_vec(parts)
}

fn gaussian(rng: &mut ChaCha8Rng, factor: &DMatrix<f64>) -> DVector<f64> {
    let w = DVector::from_fn(factor.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
    factor * w
}

struct NoiseFactors {
    constant: Option<DMatrix<f64>>,
}

impl NoiseFactors {
    fn new(spec: &SystemSpec) -> Result<Self> {
        let constant =
            spec.q.is_constant() && spec.r.iter().all(|m| m.is_constant()) && spec.s.iter().all(|m| m.is_constant());
        Ok(NoiseFactors {
            constant: if constant { Some(joint_factor(spec, 1)?) } else { None },
        })
    }

    fn at(&self, spec: &SystemSpec, t: usize) -> Result<DMatrix<f64>> {
        match &self.constant {
            Some(f) => Ok(f.clone()),
            None => joint_factor(spec, t),
        }
    }
}

fn joint_factor(spec: &SystemSpec, t: usize) -> Result<DMatrix<f64>> {
    let joint = spec.joint_noise_cov(t)?;
    linalg::psd_factor(&joint, FACTOR_CLIP, &format!("joint noise covariance at t={t}"))
}

/// Simulates one trajectory from `seed` (stream 0).
pub fn simulate_trajectory(spec: &SystemSpec, seed: u64) -> Result<Trajectory> {
    spec.validate()?;
    simulate_with_rng(spec, &mut trajectory_rng(seed, 0))
}

/// Simulates one trajectory drawing from `rng`; `spec` is assumed valid.
pub fn simulate_with_rng(spec: &SystemSpec, rng: &mut ChaCha8Rng) -> Result<Trajectory> {
    let n = spec.n;
    let d = PARTS * n;
    let m = spec.sensors;
    let horizon = spec.horizon;
    let p0f = linalg::psd_factor(&spec.p0, FACTOR_CLIP, "P0")?;
    let factors = NoiseFactors::new(spec)?;

    let mut x = Vec::with_capacity(horizon + 1);
    let mut u = Vec::with_capacity(horizon);
    let mut steps: Vec<ObservationStep> = Vec::with_capacity(horizon);
    let mut xr = gaussian(rng, &p0f);
    x.push(TessarineVector::from_real_vector(&xr)?);

    for t in 0..=horizon {
        let noise = gaussian(rng, &factors.at(spec, t)?);
        if t >= 1 {
            let p = spec.dropout.at(t);
            let mut step = ObservationStep {
                z: Vec::with_capacity(m),
                v: Vec::with_capacity(m),
                gamma: Vec::with_capacity(m),
                y: Vec::with_capacity(m),
            };
            for i in 0..m {
                let vr = noise.rows(d * (i + 1), d).into_owned();
                let zr = &xr + &vr;
                let (gr, yr) = if t == 1 {
                    (DVector::from_element(d, 1.0), zr.clone())
                } else {
                    let prev = steps[t - 2].y[i].real_vector();
                    let mut g = DVector::zeros(d);
                    let mut y = prev;
                    for a in 0..d {
                        if rng.random::<f64>() < p[i * d + a] {
                            g[a] = 1.0;
                            y[a] = zr[a];
                        }
                    }
                    (g, y)
                };
                step.z.push(TessarineVector::from_real_vector(&zr)?);
                step.v.push(TessarineVector::from_real_vector(&vr)?);
                step.gamma.push(TessarineVector::from_real_vector(&gr)?);
                step.y.push(TessarineVector::from_real_vector(&yr)?);
            }
            steps.push(step);
        }
        if t < horizon {
            let ur = noise.rows(0, d).into_owned();
            xr = spec.real_transition(t) * &xr + &ur;
            u.push(TessarineVector::from_real_vector(&ur)?);
            x.push(TessarineVector::from_real_vector(&xr)?);
        }
    }
    Ok(Trajectory { x, u, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets_for_tests::tiny_spec;
    use crate::model::DropoutProbs;

    #[test]
    fn full_arrival_observes_everything() {
        let spec = tiny_spec().with_dropout(DropoutProbs::uniform(1, 1, 1.0));
        let tr = simulate_trajectory(&spec, 3).unwrap();
        for t in 1..=spec.horizon {
            assert_eq!(tr.step(t).y, tr.step(t).z);
        }
    }

    #[test]
    fn no_arrival_freezes_first_packet() {
        let spec = tiny_spec().with_dropout(DropoutProbs::uniform(1, 1, 0.0));
        let tr = simulate_trajectory(&spec, 4).unwrap();
        for t in 1..=spec.horizon {
            assert_eq!(tr.step(t).y, tr.step(1).z);
        }
    }

    #[test]
    fn dropout_recursion_holds_partwise() {
        let spec = tiny_spec().with_dropout(DropoutProbs::per_part(1, 1, [0.3, 0.3, 0.8, 0.8]));
        let tr = simulate_trajectory(&spec, 5).unwrap();
        assert_eq!(tr.step(1).y, tr.step(1).z);
        for t in 2..=spec.horizon {
            let s = tr.step(t);
            let prev = &tr.step(t - 1).y[0];
            for nu in 0..4 {
                let want = if s.gamma[0][0].part(nu) == 1.0 {
                    s.z[0][0].part(nu)
                } else {
                    prev[0].part(nu)
                };
                assert_eq!(s.y[0][0].part(nu), want);
            }
        }
    }

    #[test]
    fn same_seed_same_trajectory() {
        let spec = tiny_spec();
        let a = simulate_trajectory(&spec, 11).unwrap();
        let b = simulate_trajectory(&spec, 11).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.y_real(3), b.y_real(3));
        let c = simulate_trajectory(&spec, 12).unwrap();
        assert_ne!(a.x, c.x);
    }
}
