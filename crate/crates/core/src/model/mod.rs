//! System specification, properness conditions, dropout moments and
//! simulation.

pub mod config;
mod pi;
mod properness;
mod reduced;
mod simulate;
mod spec;

pub use pi::{pi_block, pi_from_probs, pi_matrices, BernoulliMoments, PiMatrices};
pub use properness::{
    augmented_covariance, properness_defect, validate_properness, PropernessCheck, PropernessReport, PART_NAMES,
    PROPERNESS_TOLERANCE,
};
pub(crate) use reduced::reduced_phi_unchecked;
pub use reduced::{
    augmented_p0, build_stacked_phi, reduce_covariance, reduce_observation, reduced_from_sensors, reduced_p0,
    reduced_phi, stacked_augmented, ReducedStats,
};
pub use simulate::{
    simulate_trajectory, simulate_with_rng, stack_real, trajectory_rng, ObservationStep, Trajectory, FACTOR_CLIP,
};
pub use spec::{DropoutProbs, SensorNoise, SystemSpec, TimeVarying, PSD_TOLERANCE};

/// Real 4×4 covariance `[[a,0,c,0],[0,b,0,c],[c,0,a,0],[0,c,0,b]]`.
pub fn structured_covariance(a: f64, b: f64, c: f64) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(4, 4, &[a, 0.0, c, 0.0, 0.0, b, 0.0, c, c, 0.0, a, 0.0, 0.0, c, 0.0, b])
}

#[cfg(test)]
pub(crate) mod presets_for_tests {
    use super::*;
    use crate::matrix::TessarineMatrix;
    use crate::tessarine::Tessarine;

    /// Scalar T1-proper system with a single sensor and small noise.
    pub fn tiny_spec() -> SystemSpec {
        let q = structured_covariance(1.0, 1.0, -0.5);
        SystemSpec::linear(
            TessarineMatrix::scalar(Tessarine::new(0.3, 0.3, 0.1, 0.2)),
            q.clone(),
            vec![SensorNoise::scaled_state_noise(&q, 0.5, 2.0)],
            structured_covariance(4.0, 4.0, 1.5),
            DropoutProbs::uniform(1, 1, 0.5),
            6,
        )
    }
}
