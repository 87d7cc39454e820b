//! TOML description of a [`SystemSpec`].
//!
//! ```toml
//! n = 1
//! horizon = 50
//! # one [r, η, η', η''] entry per matrix element, row-major
//! f1 = [[[0.3, 0.3, 0.1, 0.2]]]
//! q = [[1.0, 0.0, -0.5, 0.0], [0.0, 1.0, 0.0, -0.5], [-0.5, 0.0, 1.0, 0.0], [0.0, -0.5, 0.0, 1.0]]
//! p0 = [[4.0, 0.0, 1.5, 0.0], [0.0, 4.0, 0.0, 1.5], [1.5, 0.0, 4.0, 0.0], [0.0, 1.5, 0.0, 4.0]]
//! # arrival probability of each part, one row per state component
//! p = [[0.5, 0.5, 0.5, 0.5]]
//!
//! [[sensor]]
//! r = [[96.0, 0.0, 0.0, 0.0], [0.0, 96.0, 0.0, 0.0], [0.0, 0.0, 96.0, 0.0], [0.0, 0.0, 0.0, 96.0]]
//! # s defaults to zero; p defaults to the system-wide rows
//! ```
//!
//! Real matrices are `4n × 4n` in part-major order (`r` parts of every
//! component first, then `η`, …).

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::spec::{DropoutProbs, SystemSpec, TimeVarying};
use crate::error::{Error, Result};
use crate::matrix::TessarineMatrix;
use crate::tessarine::{Tessarine, PARTS};

type Rows = Vec<Vec<f64>>;
type TessRows = Vec<Vec<[f64; 4]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub r: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<[f64; 4]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n: usize,
    pub horizon: usize,
    pub f1: TessRows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<TessRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f3: Option<TessRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f4: Option<TessRows>,
    pub q: Rows,
    pub p0: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<[f64; 4]>>,
    #[serde(rename = "sensor")]
    pub sensors: Vec<SensorConfig>,
}

fn real_matrix(rows: &Rows, dim: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        let cols = rows.first().map_or(0, |r| r.len());
        return Err(Error::dimension(what, (dim, dim), (rows.len(), cols)));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

fn tess_matrix(rows: &TessRows, n: usize, what: &str) -> Result<TessarineMatrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        let cols = rows.first().map_or(0, |r| r.len());
        return Err(Error::dimension(what, (n, n), (rows.len(), cols)));
    }
    Ok(TessarineMatrix::from_fn(n, n, |i, j| {
        let [a, b, c, d] = rows[i][j];
        Tessarine::new(a, b, c, d)
    }))
}

fn real_rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn tess_rows(m: &TessarineMatrix) -> TessRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].parts()).collect())
        .collect()
}

impl SystemConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Builds and validates the system.
    pub fn build(&self) -> Result<SystemSpec> {
        let n = self.n;
        let d = PARTS * n;
        if n == 0 || self.sensors.is_empty() {
            return Err(Error::Config("need n >= 1 and at least one [[sensor]]".into()));
        }
        let f1 = tess_matrix(&self.f1, n, "f1")?;
        let opt = |m: &Option<TessRows>, what: &str| match m {
            Some(rows) => tess_matrix(rows, n, what),
            None => Ok(TessarineMatrix::zeros(n, n)),
        };
        let f = [
            TimeVarying::Constant(f1),
            opt(&self.f2, "f2")?.into(),
            opt(&self.f3, "f3")?.into(),
            opt(&self.f4, "f4")?.into(),
        ];
        let mut r = Vec::new();
        let mut s = Vec::new();
        let mut probs = Vec::with_capacity(d * self.sensors.len());
        for (i, sc) in self.sensors.iter().enumerate() {
            r.push(real_matrix(&sc.r, d, &format!("sensor {} r", i + 1))?.into());
            s.push(
                match &sc.s {
                    Some(rows) => real_matrix(rows, d, &format!("sensor {} s", i + 1))?,
                    None => DMatrix::zeros(d, d),
                }
                .into(),
            );
            let p =
                sc.p.as_ref()
                    .or(self.p.as_ref())
                    .ok_or_else(|| Error::Config(format!("no arrival probabilities for sensor {}", i + 1)))?;
            if p.len() != n {
                return Err(Error::dimension(&format!("sensor {} p", i + 1), (n, 4), (p.len(), 4)));
            }
            for nu in 0..PARTS {
                for row in p {
                    probs.push(row[nu]);
                }
            }
        }
        let spec = SystemSpec {
            n,
            sensors: self.sensors.len(),
            horizon: self.horizon,
            f,
            q: real_matrix(&self.q, d, "q")?.into(),
            r,
            s,
            p0: real_matrix(&self.p0, d, "p0")?,
            dropout: DropoutProbs::new(n, self.sensors.len(), TimeVarying::Constant(probs)),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The configuration of a time-invariant system.
    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        let constant = spec.f.iter().all(|f| f.is_constant())
            && spec.q.is_constant()
            && spec.r.iter().chain(&spec.s).all(|m| m.is_constant())
            && spec.dropout.is_constant();
        if !constant {
            return Err(Error::Config(
                "only time-invariant systems can be written as a config".into(),
            ));
        }
        let n = spec.n;
        let p = spec.dropout.at(1);
        let sensors = (0..spec.sensors)
            .map(|i| SensorConfig {
                r: real_rows(&spec.r[i].at(1)),
                s: Some(real_rows(&spec.s[i].at(1))),
                p: Some(
                    (0..n)
                        .map(|j| std::array::from_fn(|nu| p[spec.dropout.index(i, j, nu)]))
                        .collect(),
                ),
            })
            .collect();
        let fj = |j: usize| {
            let m = spec.f[j].at(1);
            (m.max_abs() != 0.0).then(|| tess_rows(&m))
        };
        Ok(SystemConfig {
            n,
            horizon: spec.horizon,
            f1: tess_rows(&spec.f[0].at(1)),
            f2: fj(1),
            f3: fj(2),
            f4: fj(3),
            q: real_rows(&spec.q.at(1)),
            p0: real_rows(&spec.p0),
            p: None,
            sensors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets_for_tests::tiny_spec;

    const DOC: &str = r#"
n = 1
horizon = 10
f1 = [[[0.3, 0.3, 0.1, 0.2]]]
q = [[1.0, 0.0, -0.5, 0.0], [0.0, 1.0, 0.0, -0.5], [-0.5, 0.0, 1.0, 0.0], [0.0, -0.5, 0.0, 1.0]]
p0 = [[4.0, 0.0, 1.5, 0.0], [0.0, 4.0, 0.0, 1.5], [1.5, 0.0, 4.0, 0.0], [0.0, 1.5, 0.0, 4.0]]
p = [[0.5, 0.5, 0.5, 0.5]]

[[sensor]]
r = [[96.0, 0.0, 0.0, 0.0], [0.0, 96.0, 0.0, 0.0], [0.0, 0.0, 96.0, 0.0], [0.0, 0.0, 0.0, 96.0]]

[[sensor]]
r = [[96.0, 0.0, 0.0, 0.0], [0.0, 96.0, 0.0, 0.0], [0.0, 0.0, 96.0, 0.0], [0.0, 0.0, 0.0, 96.0]]
p = [[0.9, 0.9, 0.9, 0.9]]
"#;

    #[test]
    fn parses_documented_layout() {
        let spec = SystemConfig::from_toml(DOC).unwrap().build().unwrap();
        assert_eq!((spec.n, spec.sensors, spec.horizon), (1, 2, 10));
        assert_eq!(spec.dropout.get(1, 1, 0, 3), 0.9);
        assert_eq!(spec.dropout.get(1, 0, 0, 2), 0.5);
        assert_eq!(spec.s[0].at(1).max(), 0.0);
    }

    #[test]
    fn round_trips_a_spec() {
        let spec = tiny_spec();
        let cfg = SystemConfig::from_spec(&spec).unwrap();
        let back = SystemConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
        let rebuilt = back.build().unwrap();
        assert_eq!(rebuilt.real_transition(1), spec.real_transition(1));
        assert_eq!(rebuilt.r[0].at(1), spec.r[0].at(1));
        assert_eq!(rebuilt.dropout.at(1), spec.dropout.at(1));
    }

    #[test]
    fn rejects_bad_shapes_and_fields() {
        let bad = DOC.replace("p0 = [[4.0, 0.0, 1.5, 0.0], ", "p0 = [");
        assert!(matches!(
            SystemConfig::from_toml(&bad).unwrap().build(),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(SystemConfig::from_toml(&format!("{DOC}\nextra = 1")).is_err());
        let no_p = DOC.replace("p = [[0.5, 0.5, 0.5, 0.5]]\n", "");
        assert!(SystemConfig::from_toml(&no_p).unwrap().build().is_err());
    }
}
