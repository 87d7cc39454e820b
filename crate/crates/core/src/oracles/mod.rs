//! Independent verification paths: closed-form batch projections, the
//! textbook Kalman filter, the real-coordinate recursion and the
//! quaternion counterparts.

mod batch;
mod kalman;
mod moment_table;
mod quaternion;
mod real_filter;

pub use batch::{batch_llms, project_innovations, real_observations, Estimate, Moments, BATCH_RELATIVE_CUTOFF};
pub use kalman::kalman_filter;
pub use moment_table::MomentTable;
pub use quaternion::{
    constrained_error_covariances, constrained_llms, constrained_llms_with, project_blocks, quaternion_counterpart,
    quaternion_left_matrix, quaternion_mul, quaternion_right_matrix, LinearClass, QuaternionMode,
};
pub use real_filter::{real_valued_filter, RealFilter, RealFilterRun};
