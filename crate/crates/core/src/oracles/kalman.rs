//! Textbook Kalman filter on the real representation, for systems with
//! no packet loss and uncorrelated state and observation noises.

use nalgebra::{DMatrix, DVector};

use super::batch::Estimate;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::SystemSpec;
use crate::tessarine::PARTS;

/// Filtered estimates for `y^r(1..)` with every packet received.
pub fn kalman_filter(spec: &SystemSpec, observations: &[DVector<f64>]) -> Result<Vec<Estimate>> {
    spec.validate()?;
    let d = PARTS * spec.n;
    let m = spec.sensors;
    let h = DMatrix::from_fn(d * m, d, |r, c| if r % d == c { 1.0 } else { 0.0 });
    let mut x = DVector::zeros(d);
    let phi0 = spec.real_transition(0);
    let mut p = &phi0 * &spec.p0 * phi0.transpose() + spec.q.at(0);
    let mut out = Vec::with_capacity(observations.len());
    for (idx, y) in observations.iter().enumerate() {
        let t = idx + 1;
        if spec.s.iter().any(|s| linalg::max_abs(&s.at(t)) != 0.0) {
            return Err(Error::Config("the textbook Kalman filter needs S = 0".into()));
        }
        let r = linalg::block_diag(&spec.r.iter().map(|r| r.at(t)).collect::<Vec<_>>());
        let s = &h * &p * h.transpose() + r;
        let chol = s.clone().cholesky().ok_or_else(|| Error::NotPsd {
            what: format!("innovation covariance at t={t}"),
            min_eigenvalue: linalg::min_eigenvalue(&s),
        })?;
        // K = P Hᵀ S⁻¹
        let k = chol.solve(&(&h * &p)).transpose();
        x = &x + &k * (y - &h * &x);
        let ikh = DMatrix::identity(d, d) - &k * &h;
        // Joseph form
        let r = linalg::block_diag(&spec.r.iter().map(|r| r.at(t)).collect::<Vec<_>>());
        let pf = linalg::symmetrize(&(&ikh * &p * ikh.transpose() + &k * r * k.transpose()));
        out.push(Estimate {
            t,
            xhat: x.clone(),
            p: pf.clone(),
        });
        let phi = spec.real_transition(t);
        x = &phi * &x;
        p = &phi * pf * phi.transpose() + spec.q.at(t);
    }
    Ok(out)
}
