use super::Solution;
use crate::channel_model::{
    comm_sinr, sensing_sinr, AntennaLayout, Channels, Position2D, Region, ScenarioConfig, ScenarioRealization,
    SensingScene,
};
use crate::{Error, Result};

/// Relative slack allowed on every constraint.
pub const CONSTRAINT_TOL: f64 = 1e-6;
const STORED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: String,
    /// Relative amount by which the constraint is exceeded.
    pub amount: f64,
}

/// Independent re-evaluation of a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub sensing_sinr: f64,
    pub comm_sinrs: Vec<f64>,
    pub total_power: f64,
    pub min_spacing_tx: f64,
    pub min_spacing_rx: f64,
    pub violations: Vec<Violation>,
}

impl Evaluation {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn outside(p: &Position2D, r: &Region) -> f64 {
    let dx = (r.x_min - p.x).max(p.x - r.x_max).max(0.0);
    let dy = (r.y_min - p.y).max(p.y - r.y_max).max(0.0);
    dx.max(dy)
}

/// Recomputes every SINR from the realization and checks all constraints of
/// the joint design: user thresholds, power budget, regions, spacing, and
/// agreement of the stored values with the recomputed ones.
pub fn evaluate_solution(
    solution: &Solution,
    realization: &ScenarioRealization,
    cfg: &ScenarioConfig,
) -> Result<Evaluation> {
    let layout = &solution.layout;
    let beams = &solution.beams;
    if layout.tx.len() != cfg.n_tx
        || layout.rx.len() != cfg.n_rx
        || beams.rx.len() != cfg.n_rx
        || beams.tx.iter().any(|w| w.len() != cfg.n_tx)
    {
        return Err(Error::InvalidConfig("solution dimensions do not match the configuration".into()));
    }
    let ch = Channels::build(realization, layout, cfg.wavelength);
    let scene = SensingScene::new(&ch, realization, cfg.noise_radar());
    let sensing = sensing_sinr(beams, &scene);
    let gamma = cfg.gamma_th();
    let comm: Vec<f64> = ch.users.iter().enumerate().map(|(k, h)| comm_sinr(k, h, &beams.tx, cfg.noise_user())).collect();
    let power = beams.total_power();

    let mut v = Vec::new();
    let flag = |v: &mut Vec<Violation>, name: String, amount: f64| {
        if amount > CONSTRAINT_TOL {
            v.push(Violation { constraint: name, amount });
        }
    };
    for (k, (&s, &g)) in comm.iter().zip(&gamma).enumerate() {
        flag(&mut v, format!("sinr_user{k}"), (g - s) / g.max(f64::MIN_POSITIVE));
    }
    flag(&mut v, "power".into(), (power - cfg.max_power()) / cfg.max_power());
    let d = cfg.min_spacing();
    let (stx, srx) = (AntennaLayout::min_spacing(&layout.tx), AntennaLayout::min_spacing(&layout.rx));
    flag(&mut v, "spacing_tx".into(), (d - stx) / d);
    flag(&mut v, "spacing_rx".into(), (d - srx) / d);
    let lambda = cfg.wavelength;
    for (side, pts, region) in [("tx", &layout.tx, cfg.tx_region()), ("rx", &layout.rx, cfg.rx_region())] {
        for (i, p) in pts.iter().enumerate() {
            flag(&mut v, format!("region_{side}{i}"), outside(p, &region) / lambda);
        }
    }
    // Stored values must reproduce to rounding level.
    let stored = std::iter::once(("stored_sensing_sinr".to_string(), solution.sensing_sinr, sensing)).chain(
        solution.comm_sinrs.iter().zip(&comm).enumerate().map(|(k, (a, b))| (format!("stored_sinr_user{k}"), *a, *b)),
    );
    for (name, a, b) in stored {
        let rel = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        if rel > STORED_TOL {
            v.push(Violation { constraint: name, amount: rel });
        }
    }
    Ok(Evaluation {
        sensing_sinr: sensing,
        comm_sinrs: comm,
        total_power: power,
        min_spacing_tx: stx,
        min_spacing_rx: srx,
        violations: v,
    })
}
