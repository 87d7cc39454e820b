//! Packaged experiments: presets, cases, sweeps, Monte Carlo studies,
//! timing and CSV output.

mod cases;
pub mod monte_carlo;
mod output;
mod presets;
mod sweep;
mod timing;

pub use cases::Case;
pub use output::{
    emit_components_csv, emit_csv, emit_timing_csv, summary, write_components_csv, write_csv, write_timing_csv,
    COLUMNS, COMPONENT_COLUMNS, TIMING_COLUMNS,
};
pub use presets::{
    example1, example1_parameters, example1_with_c, example2, Preset, EXAMPLE1_ALPHA, EXAMPLE1_BETA, EXAMPLE1_HORIZON,
    EXAMPLE2_HORIZON,
};
pub use sweep::{
    analytic_unit, counterpart_mode, mean_difference_by_c, run_case_sweep, AnalyticSeries, CaseSeries,
    ExperimentConfig, ExperimentResult, Source, DEFAULT_MC_RUNS, DEFAULT_SEED,
};
pub use timing::{run_timing_benchmark, TimingConfig, TimingRow};
