use num_complex::Complex64;

use super::{AoConfig, Scheme, Solution, Stage, StageReport};
use crate::beamforming::{mvdr_receive, transmit_sdr, BeamformerSet, LinkBudget};
use crate::channel_model::{
    comm_sinr, sensing_sinr, AntennaLayout, Channels, Position2D, Region, ScenarioConfig, ScenarioRealization,
    SensingScene,
};
use crate::position_sca::{optimize_rx_position, optimize_tx_position, RxObjectiveContext, TxObjectiveContext};
use crate::{CVector, Error, Result};

/// Row-major half-wavelength grid of `count` antennas anchored at the
/// lower-left corner of `region`, `ceil(sqrt(count))` per row.
pub fn fpa_layout(count: usize, wavelength: f64, region: &Region) -> Result<Vec<Position2D>> {
    if count == 0 {
        return Err(Error::InvalidConfig("antenna count must be positive".into()));
    }
    let cols = (count as f64).sqrt().ceil() as usize;
    let rows = count.div_ceil(cols);
    let pitch = 0.5 * wavelength;
    let slack = 1e-12 * wavelength;
    if (cols - 1) as f64 * pitch > region.width() + slack || (rows - 1) as f64 * pitch > region.height() + slack {
        return Err(Error::RegionTooSmall(format!(
            "{rows} x {cols} grid at pitch {pitch} does not fit a {} x {} region",
            region.width(),
            region.height()
        )));
    }
    Ok((0..count)
        .map(|i| Position2D::new(region.x_min + (i % cols) as f64 * pitch, region.y_min + (i / cols) as f64 * pitch))
        .collect())
}

fn scene_of(real: &ScenarioRealization, cfg: &ScenarioConfig, layout: &AntennaLayout) -> (Channels, SensingScene) {
    let ch = Channels::build(real, layout, cfg.wavelength);
    let scene = SensingScene::new(&ch, real, cfg.noise_radar());
    (ch, scene)
}

/// Mutable state of one run.
struct Run<'a> {
    real: &'a ScenarioRealization,
    cfg: &'a ScenarioConfig,
    ao: &'a AoConfig,
    budget: LinkBudget,
    layout: AntennaLayout,
    beams: BeamformerSet,
    objective: f64,
    stages: Vec<StageReport>,
}

impl Run<'_> {
    fn sensing(&self, layout: &AntennaLayout, beams: &BeamformerSet) -> f64 {
        sensing_sinr(beams, &scene_of(self.real, self.cfg, layout).1)
    }

    fn report(&mut self, iteration: usize, stage: Stage, accepted: bool, detail: String) {
        self.stages.push(StageReport { iteration, stage, objective: self.objective, accepted, detail });
    }

    fn receive_filter(&mut self, it: usize) -> Result<()> {
        let (_, scene) = scene_of(self.real, self.cfg, &self.layout);
        match mvdr_receive(&self.beams.tx, &scene) {
            Ok(u) => {
                let cand = BeamformerSet { tx: self.beams.tx.clone(), rx: u };
                let value = sensing_sinr(&cand, &scene);
                let ok = value >= self.objective;
                if ok {
                    self.beams = cand;
                    self.objective = value;
                }
                self.report(it, Stage::ReceiveFilter, ok, format!("mvdr {value:.6e}"));
            }
            Err(e @ (Error::NumericalFailure(_) | Error::DegenerateSteering)) => {
                self.report(it, Stage::ReceiveFilter, false, e.to_string());
            }
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn transmit_beams(&mut self, it: usize) -> Result<()> {
        let (ch, scene) = scene_of(self.real, self.cfg, &self.layout);
        match transmit_sdr(&ch.users, &scene, &self.beams.rx, &self.budget, self.ao.sdp_tol) {
            Ok(out) => {
                let ok = out.achieved >= self.objective;
                let detail = format!(
                    "sdr relaxed {:.6e} achieved {:.6e} rank-ratio {:.2e}{}",
                    out.objective,
                    out.achieved,
                    out.report.max_ratio(),
                    if out.report.repaired { " repaired" } else { "" }
                );
                if ok {
                    self.beams.tx = out.tx;
                    self.objective = out.achieved;
                }
                self.report(it, Stage::TransmitBeams, ok, detail);
            }
            Err(e @ (Error::Infeasible(_) | Error::NumericalFailure(_) | Error::TightnessViolation { .. })) => {
                self.report(it, Stage::TransmitBeams, false, e.to_string());
            }
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn receive_positions(&mut self, it: usize) -> Result<()> {
        let region = self.cfg.rx_region();
        let mut moved = 0;
        for m in 0..self.layout.rx.len() {
            let ctx = RxObjectiveContext::new(m, self.real, &self.layout, &self.beams, self.cfg.wavelength, self.cfg.noise_radar())?;
            let out = optimize_rx_position(m, &self.layout, &ctx, &region, self.cfg.min_spacing(), &self.ao.sca)?;
            if out.accepted > 0 {
                moved += 1;
                self.layout.rx[m] = out.position;
            }
        }
        self.objective = self.sensing(&self.layout, &self.beams);
        self.report(it, Stage::ReceivePositions, true, format!("{moved} antennas moved"));
        Ok(())
    }

    fn transmit_positions(&mut self, it: usize) -> Result<()> {
        let region = self.cfg.tx_region();
        let mut moved = 0;
        for n in 0..self.layout.tx.len() {
            let ctx = TxObjectiveContext::new(
                n,
                self.real,
                &self.layout,
                &self.beams,
                self.cfg.wavelength,
                self.cfg.noise_radar(),
                self.budget.noise_user,
                &self.budget.gamma,
            )?;
            let out = optimize_tx_position(n, &self.layout, &ctx, &region, self.cfg.min_spacing(), &self.ao.sca)?;
            if out.accepted > 0 {
                moved += 1;
                self.layout.tx[n] = out.position;
            }
        }
        self.objective = self.sensing(&self.layout, &self.beams);
        self.report(it, Stage::TransmitPositions, true, format!("{moved} antennas moved"));
        Ok(())
    }

    fn iterate(mut self) -> Result<Solution> {
        let scheme = self.ao.scheme;
        let mut trace = vec![self.objective];
        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=self.ao.iter_max {
            let before = self.objective;
            self.receive_filter(it)?;
            self.transmit_beams(it)?;
            if scheme.moves_rx() {
                self.receive_positions(it)?;
            }
            if scheme.moves_tx() {
                self.transmit_positions(it)?;
            }
            trace.push(self.objective);
            iterations = it;
            if (self.objective - before) / before < self.ao.sigma {
                converged = true;
                break;
            }
        }
        let (ch, _) = scene_of(self.real, self.cfg, &self.layout);
        let comm_sinrs =
            ch.users.iter().enumerate().map(|(k, h)| comm_sinr(k, h, &self.beams.tx, self.budget.noise_user)).collect();
        Ok(Solution {
            scheme,
            beams: self.beams,
            layout: self.layout,
            sensing_sinr: self.objective,
            comm_sinrs,
            objective_trace: trace,
            stages: self.stages,
            iterations,
            converged,
        })
    }
}

/// Receive filter matched to the target's receive channel.
fn matched_filter(target_rx: &CVector) -> CVector {
    let norm = target_rx.norm();
    if norm > 0.0 {
        target_rx / Complex64::new(norm, 0.0)
    } else {
        CVector::from_element(target_rx.len(), Complex64::new(1.0, 0.0))
    }
}

/// Alternating optimization from the half-wavelength grid: a matched receive
/// filter and the transmit design for it initialize the beams, then every
/// outer iteration updates the receive filter, the transmit beams and (as the
/// scheme allows) each receive and transmit antenna position in turn.
///
/// Returns [`Error::Infeasible`] when the communication thresholds cannot be
/// met on the initial grid.
pub fn run_algorithm1(real: &ScenarioRealization, cfg: &ScenarioConfig, ao: &AoConfig) -> Result<Solution> {
    cfg.validate()?;
    ao.validate()?;
    let layout = AntennaLayout::new(
        fpa_layout(cfg.n_tx, cfg.wavelength, &cfg.tx_region())?,
        fpa_layout(cfg.n_rx, cfg.wavelength, &cfg.rx_region())?,
    );
    let budget = LinkBudget::from_config(cfg);
    let (ch, scene) = scene_of(real, cfg, &layout);
    let rx = matched_filter(&ch.target_rx);
    let out = transmit_sdr(&ch.users, &scene, &rx, &budget, ao.sdp_tol)?;
    let beams = BeamformerSet { tx: out.tx, rx };
    let objective = sensing_sinr(&beams, &scene);
    let mut run = Run { real, cfg, ao, budget, layout, beams, objective, stages: vec![] };
    run.report(0, Stage::Init, true, format!("grid start, rank-ratio {:.2e}", out.report.max_ratio()));
    run.iterate()
}

/// Alternating optimization continued from an earlier solution of the same
/// realization, with movable arrays chosen by `ao.scheme`.
pub fn run_algorithm1_from(
    real: &ScenarioRealization,
    cfg: &ScenarioConfig,
    ao: &AoConfig,
    start: &Solution,
) -> Result<Solution> {
    cfg.validate()?;
    ao.validate()?;
    if start.layout.tx.len() != cfg.n_tx || start.layout.rx.len() != cfg.n_rx {
        return Err(Error::InvalidConfig("warm start does not match the configured array sizes".into()));
    }
    let budget = LinkBudget::from_config(cfg);
    let mut run = Run {
        real,
        cfg,
        ao,
        budget,
        layout: start.layout.clone(),
        beams: start.beams.clone(),
        objective: 0.0,
        stages: vec![],
    };
    run.objective = run.sensing(&run.layout, &run.beams);
    run.report(0, Stage::Init, true, format!("warm start from {}", start.scheme));
    run.iterate()
}

/// Better of a grid start and a warm start from `seed`.
fn best_of(real: &ScenarioRealization, cfg: &ScenarioConfig, ao: &AoConfig, seed: &Solution) -> Result<Solution> {
    let warm = run_algorithm1_from(real, cfg, ao, seed)?;
    let cold = run_algorithm1(real, cfg, ao)?;
    Ok(if cold.sensing_sinr > warm.sensing_sinr { cold } else { warm })
}

/// Runs the requested schemes on one realization. Each movable scheme keeps
/// the better of a grid start and a warm start: single-sided schemes from the
/// fixed-position solution, the two-sided scheme from the better single-sided
/// solution. Hence, per realization, two-sided >= single-sided >= fixed.
/// Results follow the order of `schemes`.
pub fn compare_schemes(
    real: &ScenarioRealization,
    cfg: &ScenarioConfig,
    ao: &AoConfig,
    schemes: &[Scheme],
) -> Result<Vec<Solution>> {
    let want = |s: Scheme| schemes.contains(&s);
    let need_rma = want(Scheme::ReceiveMA) || want(Scheme::Proposed);
    let need_tma = want(Scheme::TransmitMA) || want(Scheme::Proposed);
    let fpa = run_algorithm1(real, cfg, &ao.with_scheme(Scheme::FPA))?;
    let rma = need_rma.then(|| best_of(real, cfg, &ao.with_scheme(Scheme::ReceiveMA), &fpa)).transpose()?;
    let tma = need_tma.then(|| best_of(real, cfg, &ao.with_scheme(Scheme::TransmitMA), &fpa)).transpose()?;
    let proposed = if want(Scheme::Proposed) {
        let seed = match (&rma, &tma) {
            (Some(r), Some(t)) if t.sensing_sinr > r.sensing_sinr => t,
            (Some(r), _) => r,
            _ => unreachable!("single-sided runs precede the two-sided one"),
        };
        Some(best_of(real, cfg, &ao.with_scheme(Scheme::Proposed), seed)?)
    } else {
        None
    };
    Ok(schemes
        .iter()
        .map(|s| match s {
            Scheme::FPA => fpa.clone(),
            Scheme::ReceiveMA => rma.clone().expect("computed"),
            Scheme::TransmitMA => tma.clone().expect("computed"),
            Scheme::Proposed => proposed.clone().expect("computed"),
        })
        .collect())
}
