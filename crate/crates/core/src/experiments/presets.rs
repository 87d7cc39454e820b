//! Packaged systems: a scalar five-sensor system with correlated noises and
//! a two-dimensional motion model observed by one sensor.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TessarineMatrix;
use crate::model::{structured_covariance, DropoutProbs, SensorNoise, SystemSpec};
use crate::structural::ProperOrder;
use crate::tessarine::{Tessarine, PARTS};

pub const EXAMPLE1_ALPHA: [f64; 5] = [0.5, 0.3, 0.9, 0.6, 0.2];
pub const EXAMPLE1_BETA: [f64; 5] = [95.0, 125.0, 87.0, 83.0, 73.0];
pub const EXAMPLE1_HORIZON: usize = 50;
pub const EXAMPLE2_HORIZON: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    #[serde(alias = "example1_t1")]
    Example1T1,
    #[serde(alias = "example1_t2")]
    Example1T2,
    Example2,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Example1T1, Preset::Example1T2, Preset::Example2];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Example1T1 => "example1-t1",
            Preset::Example1T2 => "example1-t2",
            Preset::Example2 => "example2",
        }
    }

    pub fn max_sensors(self) -> usize {
        match self {
            Preset::Example2 => 1,
            _ => EXAMPLE1_ALPHA.len(),
        }
    }

    pub fn default_horizon(self) -> usize {
        match self {
            Preset::Example2 => EXAMPLE2_HORIZON,
            _ => EXAMPLE1_HORIZON,
        }
    }

    /// The system with all its sensors and every part received with probability `0.5`.
    pub fn spec(self) -> Result<SystemSpec> {
        match self {
            Preset::Example1T1 => example1(1),
            Preset::Example1T2 => example1(2),
            Preset::Example2 => example2(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Preset::ALL.into_iter().find(|p| p.name() == norm).ok_or_else(|| {
            Error::Config(format!(
                "unknown preset `{s}` (expected example1-t1, example1-t2 or example2)"
            ))
        })
    }
}

/// `(a, b, c)` of the state noise and `(d, e, f)` of `P0` for order `k`.
pub fn example1_parameters(k: usize) -> Result<([f64; 3], [f64; 3])> {
    match ProperOrder::from_k(k)? {
        ProperOrder::T1 => Ok(([1.0, 1.0, -0.5], [4.0, 4.0, 1.5])),
        ProperOrder::T2 => Ok(([1.0, 2.0, -0.5], [4.0, 3.0, 1.5])),
    }
}

/// Scalar system `x(t+1) = F1 x(t) + u(t)` with five sensors `z = x + v`.
pub fn example1(k: usize) -> Result<SystemSpec> {
    let ([_, _, c], _) = example1_parameters(k)?;
    example1_with_c(k, c)
}

/// [`example1`] with the state-noise cross term `c` replaced.
pub fn example1_with_c(k: usize, c: f64) -> Result<SystemSpec> {
    let ([a, b, _], [d, e, f]) = example1_parameters(k)?;
    let q = structured_covariance(a, b, c);
    let sensors = EXAMPLE1_ALPHA
        .iter()
        .zip(EXAMPLE1_BETA)
        .map(|(&al, be)| SensorNoise::scaled_state_noise(&q, al, be))
        .collect();
    let spec = SystemSpec::linear(
        TessarineMatrix::scalar(Tessarine::new(0.3, 0.3, 0.1, 0.2)),
        q,
        sensors,
        structured_covariance(d, e, f),
        DropoutProbs::uniform(1, EXAMPLE1_ALPHA.len(), 0.5),
        EXAMPLE1_HORIZON,
    );
    spec.validate()?;
    Ok(spec)
}

/// Position/velocity model driven by a scalar tessarine input `ϖ` through `G`.
pub fn example2() -> Result<SystemSpec> {
    let n = 2;
    let d = PARTS * n;
    let g = [0.0008, 0.04];
    let w = structured_covariance(3.0, 3.0, 2.0);
    let v = structured_covariance(6.5, 6.5, 0.1);
    // u^r_{ν,j} = G_j ϖ^r_ν
    let q = DMatrix::from_fn(d, d, |a, b| g[a % n] * g[b % n] * w[(a / n, b / n)]);
    let r = DMatrix::from_fn(d, d, |a, b| if a % n == b % n { v[(a / n, b / n)] } else { 0.0 });
    let f1 = TessarineMatrix::from_real(&DMatrix::from_row_slice(2, 2, &[1.0, 0.04, 0.0, 1.0]));
    let spec = SystemSpec::linear(
        f1,
        q,
        vec![SensorNoise {
            r,
            s: DMatrix::zeros(d, d),
        }],
        DMatrix::zeros(d, d),
        DropoutProbs::uniform(n, 1, 0.5),
        EXAMPLE2_HORIZON,
    );
    spec.validate()?;
    Ok(spec)
}
