use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::TessarineMatrix;
use crate::tessarine::{Conjugation, PARTS};

/// A model quantity that is either constant or given per time step.
#[derive(Clone)]
pub enum TimeVarying<T> {
    Constant(T),
    Schedule(Arc<dyn Fn(usize) -> T + Send + Sync>),
}

impl<T: Clone> TimeVarying<T> {
    pub fn schedule(f: impl Fn(usize) -> T + Send + Sync + 'static) -> Self {
        TimeVarying::Schedule(Arc::new(f))
    }

    pub fn at(&self, t: usize) -> T {
        match self {
            TimeVarying::Constant(v) => v.clone(),
            TimeVarying::Schedule(f) => f(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TimeVarying::Constant(_))
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U + Send + Sync + 'static) -> TimeVarying<U>
    where
        T: Send + Sync + 'static,
    {
        match self {
            TimeVarying::Constant(v) => TimeVarying::Constant(f(v.clone())),
            TimeVarying::Schedule(g) => {
                let g = g.clone();
                TimeVarying::Schedule(Arc::new(move |t| f(g(t))))
            }
        }
    }
}

impl<T> From<T> for TimeVarying<T> {
    fn from(v: T) -> Self {
        TimeVarying::Constant(v)
    }
}

impl<T: fmt::Debug> fmt::Debug for TimeVarying<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeVarying::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            TimeVarying::Schedule(_) => f.write_str("Schedule(..)"),
        }
    }
}

/// Bernoulli arrival probabilities `p_{j,ν}^{(i)}(t)`.
///
/// The vector at each `t` has length `4nR` and follows the stacked layout
/// of `γ⃗^r`: sensor-major, then part, then component.
#[derive(Clone, Debug)]
pub struct DropoutProbs {
    n: usize,
    sensors: usize,
    probs: TimeVarying<Vec<f64>>,
}

impl DropoutProbs {
    pub fn new(n: usize, sensors: usize, probs: TimeVarying<Vec<f64>>) -> Self {
        DropoutProbs { n, sensors, probs }
    }

    /// Same probability for every sensor, component and part.
    pub fn uniform(n: usize, sensors: usize, p: f64) -> Self {
        Self::new(n, sensors, TimeVarying::Constant(vec![p; PARTS * n * sensors]))
    }

    /// `f(i, j, ν)` for sensor `i`, component `j`, part `ν`; constant in time.
    pub fn from_fn(n: usize, sensors: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut v = vec![0.0; PARTS * n * sensors];
        for i in 0..sensors {
            for nu in 0..PARTS {
                for j in 0..n {
                    v[Self::index_for(n, i, j, nu)] = f(i, j, nu);
                }
            }
        }
        Self::new(n, sensors, TimeVarying::Constant(v))
    }

    /// Per-sensor, per-part probabilities shared by every component.
    pub fn per_part(n: usize, sensors: usize, parts: [f64; 4]) -> Self {
        Self::from_fn(n, sensors, |_, _, nu| parts[nu])
    }

    fn index_for(n: usize, sensor: usize, component: usize, part: usize) -> usize {
        sensor * PARTS * n + part * n + component
    }

    pub fn index(&self, sensor: usize, component: usize, part: usize) -> usize {
        Self::index_for(self.n, sensor, component, part)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    /// Nominal probabilities at `t`.
    pub fn at(&self, t: usize) -> Vec<f64> {
        self.probs.at(t)
    }

    /// Probabilities that govern `y(t)`: at `t = 1` every part is received.
    pub fn effective(&self, t: usize) -> Vec<f64> {
        if t <= 1 {
            vec![1.0; PARTS * self.n * self.sensors]
        } else {
            self.at(t)
        }
    }

    pub fn get(&self, t: usize, sensor: usize, component: usize, part: usize) -> f64 {
        self.at(t)[self.index(sensor, component, part)]
    }

    pub fn is_constant(&self) -> bool {
        self.probs.is_constant()
    }

    /// Keeps only the listed sensors, in order.
    pub fn select_sensors(&self, keep: &[usize]) -> Self {
        let n = self.n;
        let keep = keep.to_vec();
        let block = PARTS * n;
        let pick = move |v: Vec<f64>| -> Vec<f64> {
            keep.iter()
                .flat_map(|&i| v[i * block..(i + 1) * block].to_vec())
                .collect()
        };
        DropoutProbs {
            n,
            sensors: keep_len(&pick, self),
            probs: self.probs.map(pick),
        }
    }
}

fn keep_len(pick: &impl Fn(Vec<f64>) -> Vec<f64>, d: &DropoutProbs) -> usize {
    pick(d.at(1)).len() / (PARTS * d.n)
}

/// Multi-sensor tessarine state-space model with packet dropouts.
///
/// All covariances are real, in the part-major coordinates of `x^r`:
/// `q` is `Cov(u^r(t))`, `r[i]` is `Cov(v^{(i)r}(t))`,
/// `s[i]` is `E[u^r(t) v^{(i)r}(t)ᵀ]` and `p0` is `Cov(x^r(0))`.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    pub n: usize,
    pub sensors: usize,
    pub horizon: usize,
    /// `F_1..F_4`, applied to `x, x*, x^η, x^η''` in `x(t+1)`.
    pub f: [TimeVarying<TessarineMatrix>; 4],
    pub q: TimeVarying<DMatrix<f64>>,
    pub r: Vec<TimeVarying<DMatrix<f64>>>,
    pub s: Vec<TimeVarying<DMatrix<f64>>>,
    pub p0: DMatrix<f64>,
    pub dropout: DropoutProbs,
}

/// Tolerance used when checking covariances for positive semidefiniteness.
pub const PSD_TOLERANCE: f64 = 1e-10;

impl SystemSpec {
    /// A time-invariant system with `F_2 = F_3 = F_4 = 0`.
    pub fn linear(
        f1: TessarineMatrix,
        q: DMatrix<f64>,
        sensors: Vec<SensorNoise>,
        p0: DMatrix<f64>,
        dropout: DropoutProbs,
        horizon: usize,
    ) -> Self {
        let n = f1.nrows();
        let zero = TessarineMatrix::zeros(n, n);
        SystemSpec {
            n,
            sensors: sensors.len(),
            horizon,
            f: [f1.into(), zero.clone().into(), zero.clone().into(), zero.into()],
            q: q.into(),
            r: sensors.iter().map(|s| s.r.clone().into()).collect(),
            s: sensors.iter().map(|s| s.s.clone().into()).collect(),
            p0,
            dropout,
        }
    }

    pub fn dim(&self) -> usize {
        PARTS * self.n
    }

    /// Structural checks: dimensions, PSD covariances, joint noise PSD and
    /// probabilities in `[0, 1]` for every `t` up to the horizon.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.n == 0 || self.sensors == 0 {
            return Err(Error::Config("need n >= 1 and at least one sensor".into()));
        }
        if self.r.len() != self.sensors || self.s.len() != self.sensors {
            return Err(Error::dimension(
                "per-sensor noise list",
                (self.sensors, 1),
                (self.r.len().min(self.s.len()), 1),
            ));
        }
        if self.dropout.n() != self.n || self.dropout.sensors() != self.sensors {
            return Err(Error::dimension(
                "dropout probabilities",
                (self.n, self.sensors),
                (self.dropout.n(), self.dropout.sensors()),
            ));
        }
        check_cov(&self.p0, d, "P0")?;
        for t in self.check_times() {
            for (j, f) in self.f.iter().enumerate() {
                let m = f.at(t);
                if m.shape() != (self.n, self.n) {
                    return Err(Error::dimension(&format!("F{}", j + 1), (self.n, self.n), m.shape()));
                }
            }
            check_cov(&self.q.at(t), d, "Q")?;
            for i in 0..self.sensors {
                check_cov(&self.r[i].at(t), d, &format!("R[{}]", i + 1))?;
                let s = self.s[i].at(t);
                if s.shape() != (d, d) {
                    return Err(Error::dimension(&format!("S[{}]", i + 1), (d, d), s.shape()));
                }
            }
            let p = self.dropout.at(t);
            if p.len() != d * self.sensors {
                return Err(Error::dimension("dropout vector", (d * self.sensors, 1), (p.len(), 1)));
            }
            for (idx, v) in p.iter().enumerate() {
                if !(0.0..=1.0).contains(v) || !v.is_finite() {
                    let sensor = idx / d;
                    let part = (idx % d) / self.n;
                    let comp = idx % self.n;
                    return Err(Error::Probability {
                        what: format!(
                            "p[sensor {}, component {}, part {}] at t={t}",
                            sensor + 1,
                            comp + 1,
                            part
                        ),
                        value: *v,
                    });
                }
            }
            self.joint_noise_cov(t)?;
        }
        Ok(())
    }

    fn check_times(&self) -> Vec<usize> {
        let constant = self.f.iter().all(|f| f.is_constant())
            && self.q.is_constant()
            && self.r.iter().all(|m| m.is_constant())
            && self.s.iter().all(|m| m.is_constant())
            && self.dropout.is_constant();
        if constant {
            vec![1]
        } else {
            (0..=self.horizon).collect()
        }
    }

    /// Real covariance of `(u^r(t), v^{(1)r}(t), …, v^{(R)r}(t))`, checked PSD.
    pub fn joint_noise_cov(&self, t: usize) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let q = self.q.at(t);
        let m = self.sensors;
        let mut joint = DMatrix::zeros(d * (m + 1), d * (m + 1));
        joint.view_mut((0, 0), (d, d)).copy_from(&q);
        for i in 0..m {
            let s = self.s[i].at(t);
            let r = self.r[i].at(t);
            let o = d * (i + 1);
            joint.view_mut((0, o), (d, d)).copy_from(&s);
            joint.view_mut((o, 0), (d, d)).copy_from(&s.transpose());
            joint.view_mut((o, o), (d, d)).copy_from(&r);
            let mut pair = DMatrix::zeros(2 * d, 2 * d);
            pair.view_mut((0, 0), (d, d)).copy_from(&q);
            pair.view_mut((0, d), (d, d)).copy_from(&s);
            pair.view_mut((d, 0), (d, d)).copy_from(&s.transpose());
            pair.view_mut((d, d), (d, d)).copy_from(&r);
            if !linalg::is_psd(&pair, PSD_TOLERANCE) {
                return Err(Error::NotPsd {
                    what: format!("joint covariance [[Q, S],[Sᵀ, R]] of sensor {} at t={t}", i + 1),
                    min_eigenvalue: linalg::min_eigenvalue(&pair),
                });
            }
        }
        if !linalg::is_psd(&joint, PSD_TOLERANCE) {
            return Err(Error::NotPsd {
                what: format!("joint covariance of (u, v^(1..R)) at t={t}"),
                min_eigenvalue: linalg::min_eigenvalue(&joint),
            });
        }
        Ok(joint)
    }

    /// Transition matrix of the real state: `x^r(t+1) = Φ^r(t) x^r(t) + u^r(t)`.
    pub fn real_transition(&self, t: usize) -> DMatrix<f64> {
        let n = self.n;
        let mut phi = self.f[0].at(t).real_representation();
        for (idx, kind) in [Conjugation::Star, Conjugation::Eta, Conjugation::EtaPP]
            .iter()
            .enumerate()
        {
            let fj = self.f[idx + 1].at(t);
            if fj.max_abs() == 0.0 {
                continue;
            }
            let signs = kind.signs();
            let mut k = fj.real_representation();
            for col in 0..PARTS * n {
                let s = signs[col / n];
                if s < 0.0 {
                    k.column_mut(col).neg_mut();
                }
            }
            phi += k;
        }
        phi
    }

    /// The same system observed only by the listed sensors (0-based).
    pub fn with_sensors(&self, keep: &[usize]) -> Result<SystemSpec> {
        if keep.is_empty() {
            return Err(Error::Config("sensor selection is empty".into()));
        }
        if let Some(bad) = keep.iter().find(|&&i| i >= self.sensors) {
            return Err(Error::Config(format!(
                "sensor {} does not exist (system has {})",
                bad + 1,
                self.sensors
            )));
        }
        let mut out = self.clone();
        out.sensors = keep.len();
        out.r = keep.iter().map(|&i| self.r[i].clone()).collect();
        out.s = keep.iter().map(|&i| self.s[i].clone()).collect();
        out.dropout = self.dropout.select_sensors(keep);
        Ok(out)
    }

    pub fn with_dropout(mut self, dropout: DropoutProbs) -> Self {
        self.dropout = dropout;
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }
}

fn check_cov(m: &DMatrix<f64>, d: usize, what: &str) -> Result<()> {
    if m.shape() != (d, d) {
        return Err(Error::dimension(what, (d, d), m.shape()));
    }
    if !linalg::is_psd(m, PSD_TOLERANCE) {
        return Err(Error::NotPsd {
            what: what.to_string(),
            min_eigenvalue: linalg::min_eigenvalue(m),
        });
    }
    Ok(())
}

/// Per-sensor noise moments.
#[derive(Clone, Debug)]
pub struct SensorNoise {
    pub r: DMatrix<f64>,
    pub s: DMatrix<f64>,
}

impl SensorNoise {
    /// Moments implied by `v = α u + w` with `Cov(w^r) = β I` and `w ⟂ u`.
    pub fn scaled_state_noise(q: &DMatrix<f64>, alpha: f64, beta: f64) -> Self {
        let d = q.nrows();
        SensorNoise {
            r: q * (alpha * alpha) + DMatrix::identity(d, d) * beta,
            s: q * alpha,
        }
    }
}
