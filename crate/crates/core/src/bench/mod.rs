//! Experiment plumbing: parameter sweeps, transmit beampatterns, receive-side
//! channel-gain maps and a quick self-check used by the CLI.

mod pattern;
mod selftest;
mod sweep;

pub use pattern::{beampattern, channel_gain_map, elevation_grid, BeampatternRequest, GainMap, PatternPoint};
pub use selftest::{selftest, Check};
pub use sweep::{run_sweep, SweepParam, SweepRow, SweepSpec, SweepSummary, SweepTable};
