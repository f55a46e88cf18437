//! Field-response channel model, scenario sampling and SINR metrics.

mod config;
mod geometry;
mod metrics;
mod realization;

pub use config::{db_to_linear, dbm_to_watts, linear_to_db, ScenarioConfig};
pub use geometry::{
    channel_vector, effective_target_matrix, field_response_vector, phase_difference, wavenumber,
    AngleDomain, PathSet, Position2D, Region,
};
pub use metrics::{comm_sinr, sensing_sinr, sensing_sinr_parts, SinrParts};
pub use realization::{
    complex_normal, draw_path_set, path_variances, sample_realization, AntennaLayout, Channels,
    Reflector, ScenarioRealization, SensingScene,
};
