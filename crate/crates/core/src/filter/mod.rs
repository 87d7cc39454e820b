//! Recursive LLMS fusion filters: the reduced Tk-proper recursion and the
//! full widely linear reference.

pub mod moments;
mod tk;
mod wl;

use nalgebra::DMatrix;

pub use moments::{ModelTables, Moments, Series};
pub use tk::{
    error_variance, extract, extract_estimate, real_error_covariance, reduce_blocks, CovarianceState, FilterState,
    Gains, StepOutput, TkFilter,
};
pub use wl::{WlFilter, WlOutput, WlState};

use crate::error::{Error, Result};
use crate::linalg::{self, PINV_RELATIVE_CUTOFF};
use crate::matrix::TessarineMatrix;

/// How rank-deficient innovation covariances are handled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InversePolicy {
    /// Moore-Penrose pseudo-inverse; dropped rank is reported.
    #[default]
    Pseudo,
    /// Fail with [`Error::SingularInnovation`] if any eigenvalue falls below the cutoff.
    Strict,
}

/// Rank diagnostics of one innovation covariance inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PinvReport {
    pub rank: usize,
    pub dim: usize,
    pub condition: f64,
}

impl PinvReport {
    pub fn full_rank(&self) -> bool {
        self.rank == self.dim
    }
}

fn check(report: PinvReport, policy: InversePolicy, t: usize) -> Result<PinvReport> {
    if policy == InversePolicy::Strict && !report.full_rank() {
        return Err(Error::SingularInnovation {
            t,
            rank: report.rank,
            dim: report.dim,
            condition: report.condition,
        });
    }
    Ok(report)
}

pub(crate) fn invert(m: &TessarineMatrix, policy: InversePolicy, t: usize) -> Result<(TessarineMatrix, PinvReport)> {
    let p = m.pinv_hermitian(PINV_RELATIVE_CUTOFF);
    let report = PinvReport {
        rank: p.rank(),
        dim: p.dim(),
        condition: p.condition(),
    };
    Ok((p.inverse, check(report, policy, t)?))
}

pub(crate) fn invert_real(m: &DMatrix<f64>, policy: InversePolicy, t: usize) -> Result<(DMatrix<f64>, PinvReport)> {
    let p = linalg::sym_pinv(m, PINV_RELATIVE_CUTOFF);
    let report = PinvReport {
        rank: p.rank,
        dim: m.nrows(),
        condition: p.condition(),
    };
    Ok((p.inverse, check(report, policy, t)?))
}
