//! MVDR receive filtering and SDR transmit beamforming.

mod mvdr;
mod sdr;

pub use mvdr::{interference_covariance, mvdr_receive, target_steering};
pub use sdr::{
    build_transmit_sdp, power_min_crosscheck, transmit_sdr, transmit_violations, verify_rank1, LinkBudget,
    PowerMinResult, SdrOutcome, TightnessReport, FEASIBILITY_TOL, RANK_ONE_THRESHOLD,
};

use crate::CVector;

/// Transmit beams `w_1..w_N` (communication beams first) and the radar
/// receive filter `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    pub tx: Vec<CVector>,
    pub rx: CVector,
}

impl BeamformerSet {
    pub fn total_power(&self) -> f64 {
        self.tx.iter().map(|w| w.norm_squared()).sum()
    }
}
