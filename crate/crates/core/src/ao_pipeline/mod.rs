//! Alternating optimization of receive filter, transmit beams and antenna
//! positions, plus the fixed-position baselines.

mod evaluate;
mod run;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use evaluate::{evaluate_solution, Evaluation, Violation};
pub use run::{compare_schemes, fpa_layout, run_algorithm1, run_algorithm1_from};

use crate::beamforming::BeamformerSet;
use crate::channel_model::AntennaLayout;
use crate::convex_kernel::DEFAULT_SDP_TOL;
use crate::position_sca::ScaConfig;
use crate::{Error, Result};

/// Which antenna arrays may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Both arrays movable.
    Proposed,
    /// Receive array movable, transmit array fixed.
    ReceiveMA,
    /// Transmit array movable, receive array fixed.
    TransmitMA,
    /// Both arrays fixed on the half-wavelength grid.
    FPA,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::ReceiveMA, Scheme::TransmitMA, Scheme::FPA];

    pub fn moves_rx(self) -> bool {
        matches!(self, Scheme::Proposed | Scheme::ReceiveMA)
    }

    pub fn moves_tx(self) -> bool {
        matches!(self, Scheme::Proposed | Scheme::TransmitMA)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::ReceiveMA => "receive-ma",
            Scheme::TransmitMA => "transmit-ma",
            Scheme::FPA => "fpa",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "proposed" | "ma" => Ok(Scheme::Proposed),
            "receive-ma" | "rx-ma" | "rma" => Ok(Scheme::ReceiveMA),
            "transmit-ma" | "tx-ma" | "tma" => Ok(Scheme::TransmitMA),
            "fpa" => Ok(Scheme::FPA),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme '{other}' (expected proposed, receive-ma, transmit-ma or fpa)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoConfig {
    /// Stop once the relative objective gain of an outer iteration is below this.
    pub sigma: f64,
    pub iter_max: usize,
    pub sca: ScaConfig,
    pub sdp_tol: f64,
    pub scheme: Scheme,
}

impl Default for AoConfig {
    fn default() -> Self {
        Self { sigma: 1e-3, iter_max: 30, sca: ScaConfig::default(), sdp_tol: DEFAULT_SDP_TOL, scheme: Scheme::Proposed }
    }
}

impl AoConfig {
    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || self.iter_max == 0 || self.sca.max_iterations == 0 {
            return Err(Error::InvalidConfig("sigma must be positive and iteration caps at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Init,
    ReceiveFilter,
    TransmitBeams,
    ReceivePositions,
    TransmitPositions,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Init => "init",
            Stage::ReceiveFilter => "receive-filter",
            Stage::TransmitBeams => "transmit-beams",
            Stage::ReceivePositions => "receive-positions",
            Stage::TransmitPositions => "transmit-positions",
        }
    }
}

/// Outcome of one stage of one outer iteration. A stage whose result would
/// lower the objective (or whose solver failed) is not applied.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub iteration: usize,
    pub stage: Stage,
    /// Sensing SINR after the stage.
    pub objective: f64,
    pub accepted: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub scheme: Scheme,
    pub beams: BeamformerSet,
    pub layout: AntennaLayout,
    pub sensing_sinr: f64,
    pub comm_sinrs: Vec<f64>,
    /// Sensing SINR after initialization and after every outer iteration.
    pub objective_trace: Vec<f64>,
    pub stages: Vec<StageReport>,
    pub iterations: usize,
    pub converged: bool,
}

impl Solution {
    /// Delimited per-stage trace: `iteration,stage,objective,accepted,detail`.
    pub fn trace_to_text(&self) -> String {
        let mut out = String::from("iteration,stage,objective,accepted,detail\n");
        for s in &self.stages {
            out.push_str(&format!(
                "{},{},{:.12e},{},{}\n",
                s.iteration,
                s.stage.name(),
                s.objective,
                s.accepted,
                s.detail.replace(',', ";")
            ));
        }
        out
    }
}
