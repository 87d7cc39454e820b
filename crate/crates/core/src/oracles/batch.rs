//! Batch LLMS projection onto all observations up to `t`.
//!
//! Observations are orthogonalised block by block (Gram-Schmidt on
//! `y(1), y(2), …`), which is the normal-equations solution
//! `Cov(x, Y) Cov(Y)⁺ Y` computed without forming `Cov(Y)⁺` at once.

use nalgebra::{DMatrix, DVector};

use super::moment_table::MomentTable;
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::TessarineVector;
use crate::model::{SystemSpec, Trajectory};

/// Eigenvalues of an innovation block below this fraction of the largest
/// eigenvalue of the corresponding observation covariance are dropped.
pub const BATCH_RELATIVE_CUTOFF: f64 = 1e-10;

/// Real-coordinate estimate `x̂^r(t|t)` with its error covariance.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub t: usize,
    pub xhat: DVector<f64>,
    pub p: DMatrix<f64>,
}

impl Estimate {
    pub fn tessarine(&self) -> TessarineVector {
        TessarineVector::from_real_vector(&self.xhat).expect("length is a multiple of 4")
    }

    /// `tr Cov(x̃^r)`.
    pub fn error_variance(&self) -> f64 {
        self.p.trace()
    }

    /// Per-component error variances (sum over the four parts).
    pub fn component_variances(&self) -> Vec<f64> {
        let n = self.p.nrows() / 4;
        (0..n)
            .map(|j| (0..4).map(|nu| self.p[(nu * n + j, nu * n + j)]).sum())
            .collect()
    }
}

/// Moment source for the innovations projector (time indices start at 1).
pub trait Moments {
    fn cov_x(&self, t: usize) -> DMatrix<f64>;
    fn cov_y(&self, s: usize, r: usize) -> DMatrix<f64>;
    fn cov_xy(&self, t: usize, s: usize) -> DMatrix<f64>;
}

impl Moments for MomentTable {
    fn cov_x(&self, t: usize) -> DMatrix<f64> {
        MomentTable::cov_x(self, t).clone()
    }
    fn cov_y(&self, s: usize, r: usize) -> DMatrix<f64> {
        MomentTable::cov_y(self, s, r)
    }
    fn cov_xy(&self, t: usize, s: usize) -> DMatrix<f64> {
        MomentTable::cov_xy(self, t, s).clone()
    }
}

/// LLMS estimates at `t = 1..=observations.len()` from the given moments.
pub fn project_innovations(moments: &impl Moments, observations: &[DVector<f64>]) -> Result<Vec<Estimate>> {
    let horizon = observations.len();
    // b[s][r] = Cov(y(s), e(r)) D_r⁺ for r < s; dinv[r] = D_r⁺; e[r]
    let mut b: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(horizon);
    let mut dinv: Vec<DMatrix<f64>> = Vec::with_capacity(horizon);
    let mut e: Vec<DVector<f64>> = Vec::with_capacity(horizon);
    let mut out = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let s = t - 1;
        let mut row: Vec<DMatrix<f64>> = Vec::with_capacity(s);
        for r in 0..s {
            let mut m = moments.cov_y(t, r + 1);
            for q in 0..r {
                m -= &row[q] * b[r][q].transpose();
            }
            row.push(m);
        }
        let cyy = moments.cov_y(t, t);
        if cyy.nrows() != observations[s].len() {
            return Err(Error::dimension(
                "observation",
                (cyy.nrows(), 1),
                (observations[s].len(), 1),
            ));
        }
        let mut d = cyy.clone();
        for (q, bq) in row.iter().enumerate() {
            d -= bq * &dinv[q] * bq.transpose();
        }
        let scale = linalg::hermitian_eigen(&linalg::symmetrize(&cyy))
            .0
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let di = linalg::sym_pinv_abs(&d, BATCH_RELATIVE_CUTOFF * scale).inverse;
        let row: Vec<DMatrix<f64>> = row.iter().zip(&dinv).map(|(bq, dq)| bq * dq).collect();
        let mut et = observations[s].clone();
        for (q, bq) in row.iter().enumerate() {
            et -= bq * &e[q];
        }
        b.push(row);
        dinv.push(di);
        e.push(et);

        // Cov(x(t), e(r)) for r ≤ t
        let mut x: Vec<DMatrix<f64>> = Vec::with_capacity(t);
        for r in 0..t {
            let mut m = moments.cov_xy(t, r + 1);
            for q in 0..r {
                m -= &x[q] * b[r][q].transpose();
            }
            x.push(m);
        }
        let mut xhat = DVector::zeros(x[0].nrows());
        let mut p = moments.cov_x(t);
        for r in 0..t {
            let xd = &x[r] * &dinv[r];
            xhat += &xd * &e[r];
            p -= &xd * x[r].transpose();
        }
        out.push(Estimate {
            t,
            xhat,
            p: linalg::symmetrize(&p),
        });
    }
    Ok(out)
}

/// Batch LLMS over the real-linear span of `y^r(1..t)`.
///
/// Under Tk-properness this is also the Tk-proper estimate.
pub fn batch_llms(spec: &SystemSpec, observations: &[DVector<f64>]) -> Result<Vec<Estimate>> {
    let table = MomentTable::new(spec, observations.len())?;
    project_innovations(&table, observations)
}

/// Real observations `y^r(1..=horizon)` of a trajectory.
pub fn real_observations(traj: &Trajectory, horizon: usize) -> Vec<DVector<f64>> {
    (1..=horizon).map(|t| traj.y_real(t)).collect()
}
