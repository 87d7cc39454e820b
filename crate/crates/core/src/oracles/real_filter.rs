//! The widely linear recursion in `4nR`-dimensional real coordinates: the
//! conventional real-valued processing used as the timing baseline.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use super::batch::Estimate;
use crate::error::{Error, Result};
use crate::filter::moments::{self, ModelTables, Moments};
use crate::filter::InversePolicy;
use crate::linalg;
use crate::model::SystemSpec;

#[derive(Clone, Debug)]
pub struct RealFilterRun {
    pub estimates: Vec<Estimate>,
    /// Ranks of the innovation covariances.
    pub ranks: Vec<usize>,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct RealFilter {
    pub tables: ModelTables,
    pub policy: InversePolicy,
}

fn scale_cols(a: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut out = a.clone();
    for (j, s) in w.iter().enumerate() {
        out.column_mut(j).scale_mut(*s);
    }
    out
}

fn scale_rows(a: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut out = a.clone();
    for (i, s) in w.iter().enumerate() {
        out.row_mut(i).scale_mut(*s);
    }
    out
}

impl RealFilter {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        Ok(RealFilter {
            tables: ModelTables::new(spec)?,
            policy: InversePolicy::default(),
        })
    }

    /// Filters `y^r(1..)`; the elapsed time covers the whole recursion.
    pub fn run(&self, observations: &[DVector<f64>]) -> Result<RealFilterRun> {
        let start = Instant::now();
        let tb = &self.tables;
        let d = tb.dim();
        let m = tb.sensors;
        let o = tb.obs_dim();
        if let Some(y) = observations.iter().find(|y| y.len() != o) {
            return Err(Error::dimension("real observation", (o, 1), (y.len(), 1)));
        }
        let mut estimates = Vec::with_capacity(observations.len());
        let mut ranks = Vec::with_capacity(observations.len());
        let mut cx = moments::propagate_state(tb, &tb.p0, 0)?;
        let mut p_pred = cx.clone();
        let mut x_pred = DVector::zeros(d);
        let mut y_prev = DVector::zeros(o);
        let mut mom: Option<Moments> = None;
        for (idx, y) in observations.iter().enumerate() {
            let t = idx + 1;
            let (eps, theta, omega, p, next) = match &mom {
                None => {
                    let first = moments::first_moments(tb, &cx)?;
                    let theta = moments::tile_cols(&p_pred, m);
                    (y.clone(), theta, first.cy.clone(), vec![1.0; o], first)
                }
                Some(prev) => {
                    let p = tb.effective_p(t)?;
                    let mut eps = y.clone();
                    for a in 0..o {
                        eps[a] -= p[a] * x_pred[a % d] + (1.0 - p[a]) * y_prev[a];
                    }
                    // Θ = P 𝒞ᵀ diag(p)
                    let theta = scale_cols(&moments::tile_cols(&p_pred, m), &p);
                    let terms = moments::innovation_terms(tb, prev, &cx)?;
                    // diag(p) 𝒞 P 𝒞ᵀ diag(p) = diag(p) 𝒞 Θ
                    let omega = &terms.m + scale_rows(&moments::tile_rows(&theta, m), &p);
                    let next = moments::advance_moments(tb, &terms, &cx, t)?;
                    (eps, theta, omega, p, next)
                }
            };
            let omega = linalg::symmetrize(&omega);
            let (inv, report) = crate::filter::invert_real(&omega, self.policy, t)?;
            ranks.push(report.rank);
            let gain = &theta * &inv;
            let h = scale_cols(tb.s.get(t)?, &p) * &inv;
            let phi = tb.phi.get(t)?;
            let x_filt = &x_pred + &gain * &eps;
            let p_filt = linalg::symmetrize(&(&p_pred - &gain * theta.transpose()));
            let pth = phi * &theta * h.transpose();
            let pp =
                phi * &p_filt * phi.transpose() - &pth - pth.transpose() - &h * &omega * h.transpose() + tb.q.get(t)?;
            x_pred = phi * &x_filt + &h * &eps;
            p_pred = linalg::symmetrize(&pp);
            estimates.push(Estimate {
                t,
                xhat: x_filt,
                p: p_filt,
            });
            y_prev = y.clone();
            cx = moments::propagate_state(tb, &next.cx, t)?;
            mom = Some(next);
        }
        Ok(RealFilterRun {
            estimates,
            ranks,
            elapsed: start.elapsed(),
        })
    }
}

/// Runs the real-valued filter and reports its wall-clock time.
pub fn real_valued_filter(spec: &SystemSpec, observations: &[DVector<f64>]) -> Result<RealFilterRun> {
    RealFilter::new(spec)?.run(observations)
}
