use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ao_pipeline::{evaluate_solution, fpa_layout, run_algorithm1, AoConfig, Scheme};
use crate::beamforming::{mvdr_receive, transmit_sdr, BeamformerSet, LinkBudget};
use crate::channel_model::{sample_realization, sensing_sinr, AntennaLayout, Channels, ScenarioConfig, SensingScene};
use crate::convex_kernel::DEFAULT_SDP_TOL;
use crate::{CVector, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn random_unit(rng: &mut impl Rng, n: usize) -> CVector {
    let v = CVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// A few seconds of end-to-end invariant checks on the given configuration.
pub fn selftest(cfg: &ScenarioConfig) -> Result<Vec<Check>> {
    cfg.validate()?;
    let real = sample_realization(cfg, 7)?;
    let layout = AntennaLayout::new(
        fpa_layout(cfg.n_tx, cfg.wavelength, &cfg.tx_region())?,
        fpa_layout(cfg.n_rx, cfg.wavelength, &cfg.rx_region())?,
    );
    let ch = Channels::build(&real, &layout, cfg.wavelength);
    let scene = SensingScene::new(&ch, &real, cfg.noise_radar());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tx: Vec<CVector> = (0..cfg.n_tx).map(|_| random_unit(&mut rng, cfg.n_tx)).collect();
    let mut out = Vec::new();

    // Receive filter against random directions.
    let u = mvdr_receive(&tx, &scene)?;
    let best = sensing_sinr(&BeamformerSet { tx: tx.clone(), rx: u }, &scene);
    let beaten = (0..1000)
        .filter(|_| sensing_sinr(&BeamformerSet { tx: tx.clone(), rx: random_unit(&mut rng, cfg.n_rx) }, &scene) > best * (1.0 + 1e-9))
        .count();
    out.push(check("mvdr-dominance", beaten == 0, format!("{beaten} of 1000 random filters beat the closed form")));

    // Transmit SDR at the matched filter.
    let rx = &ch.target_rx / Complex64::new(ch.target_rx.norm(), 0.0);
    let budget = LinkBudget::from_config(cfg);
    match transmit_sdr(&ch.users, &scene, &rx, &budget, DEFAULT_SDP_TOL) {
        Ok(sdr) => {
            let gap = (sdr.objective - sdr.achieved).abs() / sdr.objective;
            out.push(check(
                "sdr-tightness",
                sdr.report.is_tight() && gap < 1e-5,
                format!("rank ratio {:.2e}, relaxation gap {gap:.2e}", sdr.report.max_ratio()),
            ));
        }
        Err(e) => out.push(check("sdr-tightness", false, e.to_string())),
    }

    // Short alternating run: monotone and within every constraint.
    let ao = AoConfig { iter_max: 5, ..AoConfig::default().with_scheme(Scheme::Proposed) };
    let sol = run_algorithm1(&real, cfg, &ao)?;
    let drops = sol.objective_trace.windows(2).filter(|w| w[1] < w[0] * (1.0 - 1e-9)).count();
    out.push(check("ao-monotone", drops == 0, format!("{} iterations, {drops} decreases", sol.iterations)));
    let ev = evaluate_solution(&sol, &real, cfg)?;
    out.push(check("constraints", ev.is_clean(), format!("{} violations", ev.violations.len())));
    Ok(out)
}
