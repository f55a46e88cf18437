//! Per-antenna position updates by successive convex approximation.
//!
//! Each update fixes every other antenna, the beams and the receive filter,
//! and moves one antenna inside its region. The exact objective is a ratio
//! `f / g` of squared-magnitude sums of plane waves; quadratic Taylor bounds
//! with global curvature constants give a concave minorant of `f` and a convex
//! majorant of `g`, and the spacing constraints are linearized around the
//! current point.

mod context;
mod phase;
mod region;
mod sca;

pub use context::{
    comm_surrogates_tx, surrogate_bounds, CommTerms, QuadraticBound, RatioTerms, RxObjectiveContext,
    TxObjectiveContext,
};
pub use phase::{PhaseSum, PhaseTerm, PowerSum};
pub use region::{distance_linearization, feasible_set, region_half_planes, FeasibleSet, HalfPlane};
pub use sca::{optimize_rx_position, optimize_tx_position, trace_to_text, ScaConfig, ScaOutcome, ScaState, ScaStop};
