//! Joint transmit/receive beamforming and movable-antenna placement for a
//! bistatic integrated sensing and communication (ISAC) base station.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel_model`]: field-response channels, random scenarios, SINR metrics.
//! * [`convex_kernel`]: small dense solvers (Hermitian SDP, convex QCQP, eigen).
//! * [`beamforming`]: MVDR receive filter and SDR transmit beamforming.
//! * [`position_sca`]: per-antenna successive convex approximation of positions.
//! * [`ao_pipeline`]: the alternating-optimization driver and baseline schemes.
//! * [`bench`]: sweeps, beampatterns, channel-gain maps and the CLI runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ao_pipeline;
pub mod beamforming;
pub mod bench;
pub mod channel_model;
pub mod convex_kernel;
mod error;
pub mod position_sca;

pub use error::{Error, Result};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex column vector.
pub type CVector = DVector<Complex64>;
/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;
