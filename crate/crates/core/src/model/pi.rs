//! Moments of the Bernoulli arrival indicators and the reduced Π matrices.

use nalgebra::DMatrix;

use super::properness::validate_properness;
use super::spec::SystemSpec;
use crate::error::{Error, Result};
use crate::linalg;
use crate::structural::ProperOrder;
use crate::tessarine::PARTS;

/// Second-order moments of the stacked indicator vector `γ⃗^r(t)` with
/// independent entries of mean `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliMoments {
    pub p: Vec<f64>,
    /// `Cov(γ)`: `diag(p(1-p))`.
    pub cov: DMatrix<f64>,
    /// `E[γ γᵀ]`.
    pub second: DMatrix<f64>,
    /// `E[γ (1-γ)ᵀ]`.
    pub cross_one_minus: DMatrix<f64>,
    /// `E[(1-γ)(1-γ)ᵀ]`.
    pub one_minus_second: DMatrix<f64>,
}

impl BernoulliMoments {
    pub fn new(p: &[f64]) -> Result<Self> {
        for (i, v) in p.iter().enumerate() {
            if !(0.0..=1.0).contains(v) || !v.is_finite() {
                return Err(Error::Probability {
                    what: format!("indicator {i}"),
                    value: *v,
                });
            }
        }
        let m = p.len();
        let second = DMatrix::from_fn(m, m, |a, b| if a == b { p[a] } else { p[a] * p[b] });
        let cross = DMatrix::from_fn(m, m, |a, b| if a == b { 0.0 } else { p[a] * (1.0 - p[b]) });
        let om = DMatrix::from_fn(m, m, |a, b| {
            if a == b {
                1.0 - p[a]
            } else {
                (1.0 - p[a]) * (1.0 - p[b])
            }
        });
        let cov = DMatrix::from_fn(m, m, |a, b| if a == b { p[a] * (1.0 - p[a]) } else { 0.0 });
        Ok(BernoulliMoments {
            p: p.to_vec(),
            cov,
            second,
            cross_one_minus: cross,
            one_minus_second: om,
        })
    }
}

/// Reduced probability matrices for order `k` at one time step.
#[derive(Clone, Debug)]
pub struct PiMatrices {
    pub order: ProperOrder,
    /// `Π_k^{(i)}(t)`, each `kn × kn`.
    pub pi_k: Vec<DMatrix<f64>>,
    /// Block-diagonal `Π_k(t)`, `knR × knR`.
    pub pi: DMatrix<f64>,
    /// `diag([Π_k^{(i)}, 0])`, `knR × 4nR`.
    pub pi_bar_gamma: DMatrix<f64>,
    /// `diag([I - Π_k^{(i)}, 0])`, `knR × 4nR`.
    pub pi_bar_one_minus: DMatrix<f64>,
    pub moments: BernoulliMoments,
}

/// `Π_k^{(i)}` for one sensor from its `4n` part-major probabilities.
pub fn pi_block(p: &[f64], n: usize, order: ProperOrder) -> DMatrix<f64> {
    match order {
        ProperOrder::T1 => linalg::diag(&p[..n]),
        ProperOrder::T2 => {
            // pairs (r, η') and (η, η'') share a probability under T2
            let r = &p[..n];
            let e = &p[n..2 * n];
            let a: Vec<f64> = (0..n).map(|j| r[j] + e[j]).collect();
            let b: Vec<f64> = (0..n).map(|j| r[j] - e[j]).collect();
            let (da, db) = (linalg::diag(&a), linalg::diag(&b));
            let mut out = DMatrix::zeros(2 * n, 2 * n);
            out.view_mut((0, 0), (n, n)).copy_from(&da);
            out.view_mut((0, n), (n, n)).copy_from(&db);
            out.view_mut((n, 0), (n, n)).copy_from(&db);
            out.view_mut((n, n), (n, n)).copy_from(&da);
            out * 0.5
        }
    }
}

/// Builds Π matrices from an explicit stacked probability vector.
pub fn pi_from_probs(p: &[f64], n: usize, sensors: usize, order: ProperOrder) -> Result<PiMatrices> {
    let d = PARTS * n;
    if p.len() != d * sensors {
        return Err(Error::dimension("probability vector", (d * sensors, 1), (p.len(), 1)));
    }
    let moments = BernoulliMoments::new(p)?;
    let kn = order.k() * n;
    let pi_k: Vec<DMatrix<f64>> = (0..sensors)
        .map(|i| pi_block(&p[i * d..(i + 1) * d], n, order))
        .collect();
    let pi = linalg::block_diag(&pi_k);
    let mut pbg = DMatrix::zeros(kn * sensors, d * sensors);
    let mut pbo = DMatrix::zeros(kn * sensors, d * sensors);
    let eye = DMatrix::<f64>::identity(kn, kn);
    for (i, b) in pi_k.iter().enumerate() {
        pbg.view_mut((i * kn, i * d), (kn, kn)).copy_from(b);
        pbo.view_mut((i * kn, i * d), (kn, kn)).copy_from(&(&eye - b));
    }
    Ok(PiMatrices {
        order,
        pi_k,
        pi,
        pi_bar_gamma: pbg,
        pi_bar_one_minus: pbo,
        moments,
    })
}

/// Π matrices of `spec` at time `t` (nominal probabilities).
///
/// Requires the probability part of the Tk-properness conditions.
pub fn pi_matrices(spec: &SystemSpec, t: usize, k: usize) -> Result<PiMatrices> {
    let order = ProperOrder::from_k(k)?;
    let report = validate_properness(spec, k)?;
    if let Some(c) = report
        .checks
        .iter()
        .find(|c| c.name == "dropout probabilities" && !c.passed)
    {
        return Err(Error::NotProper {
            order: k,
            reasons: vec![c.detail.clone()],
        });
    }
    pi_from_probs(&spec.dropout.at(t), spec.n, spec.sensors, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{presets_for_tests::tiny_spec, DropoutProbs};

    #[test]
    fn all_ones_is_deterministic() {
        let m = BernoulliMoments::new(&[1.0; 8]).unwrap();
        assert_eq!(linalg::max_abs(&m.cov), 0.0);
        assert_eq!(linalg::max_abs(&m.one_minus_second), 0.0);
        let pi = pi_from_probs(&[1.0; 8], 1, 2, ProperOrder::T2).unwrap();
        assert_eq!(pi.pi, DMatrix::identity(4, 4));
    }

    #[test]
    fn pi2_from_mixed_parts() {
        let p = pi_block(&[0.3, 0.5, 0.3, 0.5], 1, ProperOrder::T2);
        let want = DMatrix::from_row_slice(2, 2, &[0.4, -0.1, -0.1, 0.4]);
        assert!(linalg::max_abs_diff(&p, &want) < 1e-15);
    }

    #[test]
    fn remark_moments_structure() {
        let m = BernoulliMoments::new(&[0.2, 0.7]).unwrap();
        assert_eq!(m.second[(0, 0)], 0.2);
        assert!((m.second[(0, 1)] - 0.14).abs() < 1e-15);
        assert_eq!(m.cross_one_minus[(1, 1)], 0.0);
        assert!((m.cross_one_minus[(0, 1)] - 0.06).abs() < 1e-15);
        assert!((m.one_minus_second[(0, 0)] - 0.8).abs() < 1e-15);
        assert!((m.cov[(1, 1)] - 0.21).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(matches!(BernoulliMoments::new(&[1.2]), Err(Error::Probability { .. })));
    }

    #[test]
    fn pi_requires_probability_condition() {
        let spec = tiny_spec().with_dropout(DropoutProbs::per_part(1, 1, [0.5, 0.6, 0.5, 0.6]));
        assert!(pi_matrices(&spec, 2, 2).is_ok());
        assert!(matches!(pi_matrices(&spec, 2, 1), Err(Error::NotProper { .. })));
    }
}
