//! Brute-force oracles and instance generators shared by the integration suites.

#![allow(dead_code)]

use std::f64::consts::PI;

use maisac::beamforming::{BeamformerSet, LinkBudget};
use maisac::channel_model::{
    sample_realization, AntennaLayout, Channels, PathSet, Position2D, ScenarioConfig, ScenarioRealization, SensingScene,
};
use maisac::{CMatrix, CVector};
use nalgebra::Complex;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_vec(rng: &mut impl Rng, n: usize) -> CVector {
    CVector::from_iterator(n, (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
}

pub fn unit(rng: &mut impl Rng, n: usize) -> CVector {
    let v = rand_vec(rng, n);
    &v / c(v.norm(), 0.0)
}

pub fn rand_pos(rng: &mut impl Rng, side: f64) -> Position2D {
    Position2D::new(rng.random_range(0.0..side), rng.random_range(0.0..side))
}

/// Channel entry of one antenna written out from the plane-wave model:
/// `sum_p g_p exp(-j 2 pi / lambda (x sin(el) cos(az) + y cos(el)))`.
pub fn brute_entry(p: &Position2D, paths: &PathSet, wavelength: f64) -> Complex64 {
    let mut acc = c(0.0, 0.0);
    for i in 0..paths.elevations.len() {
        let (el, az) = (paths.elevations[i], paths.azimuths[i]);
        let rho = p.x * el.sin() * az.cos() + p.y * el.cos();
        let phase = -2.0 * PI * rho / wavelength;
        acc += paths.coefficients[i] * c(phase.cos(), phase.sin());
    }
    acc
}

pub fn brute_channel(ps: &[Position2D], paths: &PathSet, wavelength: f64) -> Vec<Complex64> {
    ps.iter().map(|p| brute_entry(p, paths, wavelength)).collect()
}

/// `sum_i conj(a_i) b_i` by explicit loop.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(c(0.0, 0.0), |s, (x, y)| s + x.conj() * y)
}

pub fn as_vec(v: &CVector) -> Vec<Complex64> {
    v.iter().copied().collect()
}

/// Signal and interference-plus-noise of the radar output, from scratch.
pub fn brute_sensing(
    real: &ScenarioRealization,
    layout: &AntennaLayout,
    beams: &BeamformerSet,
    wavelength: f64,
    noise: f64,
) -> (f64, f64) {
    let u = as_vec(&beams.rx);
    let echo = |tx: &PathSet, rx: &PathSet, rcs: Complex64| -> f64 {
        let ht = brute_channel(&layout.tx, tx, wavelength);
        let hr = brute_channel(&layout.rx, rx, wavelength);
        let ur = inner(&u, &hr).norm_sqr();
        beams.tx.iter().map(|w| rcs.norm_sqr() * ur * inner(&ht, &as_vec(w)).norm_sqr()).sum()
    };
    let t = &real.target;
    let signal = echo(&t.tx_paths, &t.rx_paths, t.rcs);
    let clutter: f64 = real.clutters.iter().map(|r| echo(&r.tx_paths, &r.rx_paths, r.rcs)).sum();
    let unorm: f64 = u.iter().map(|x| x.norm_sqr()).sum();
    (signal, clutter + noise * unorm)
}

/// Useful power and interference-plus-noise of user `k`, from scratch.
pub fn brute_comm(real: &ScenarioRealization, layout: &AntennaLayout, tx: &[CVector], k: usize, wavelength: f64, noise: f64) -> (f64, f64) {
    let h = brute_channel(&layout.tx, &real.users[k], wavelength);
    let mut s = 0.0;
    let mut i = noise;
    for (n, w) in tx.iter().enumerate() {
        let p = inner(&h, &as_vec(w)).norm_sqr();
        if n == k {
            s = p;
        } else {
            i += p;
        }
    }
    (s, i)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Largest generalized eigenvalue of `(A, B)` with `B` positive definite,
/// via `L^{-1} A L^{-H}` for the Cholesky factor `B = L L^H`.
pub fn max_generalized_eigenvalue(a: &CMatrix, b: &CMatrix) -> f64 {
    let l = b.clone().cholesky().expect("positive definite").l();
    let li = l.try_inverse().expect("invertible");
    let m = &li * a * li.adjoint();
    let m = (&m + m.adjoint()) * Complex::new(0.5, 0.0);
    m.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Half-wavelength grid anchored at the region corner, independent of the library.
pub fn grid(count: usize, wavelength: f64) -> Vec<Position2D> {
    let cols = (count as f64).sqrt().ceil() as usize;
    (0..count).map(|i| Position2D::new((i % cols) as f64 * 0.5 * wavelength, (i / cols) as f64 * 0.5 * wavelength)).collect()
}

/// Scenario with the given sizes; users, clutters and thresholds trimmed or
/// repeated from the default geometry.
pub fn desk_config(n: usize, m: usize, k: usize, l: usize) -> ScenarioConfig {
    let base = ScenarioConfig::default();
    let mut cfg = base.clone();
    cfg.n_tx = n;
    cfg.n_rx = m;
    cfg.user_positions = (0..k).map(|i| base.user_positions[i % 2]).collect();
    cfg.clutter_positions = (0..l).map(|i| base.clutter_positions[i % 2]).collect();
    cfg.gamma_th_db = vec![0.0; k];
    cfg
}

pub struct DeskInstance {
    pub cfg: ScenarioConfig,
    pub real: ScenarioRealization,
    pub layout: AntennaLayout,
    pub channels: Channels,
    pub scene: SensingScene,
    pub rx: CVector,
    pub budget: LinkBudget,
}

/// Realization on the fixed grid with the matched receive filter.
pub fn desk_instance(cfg: ScenarioConfig, seed: u64) -> DeskInstance {
    let real = sample_realization(&cfg, seed).unwrap();
    let layout = AntennaLayout::new(grid(cfg.n_tx, cfg.wavelength), grid(cfg.n_rx, cfg.wavelength));
    let channels = Channels::build(&real, &layout, cfg.wavelength);
    let scene = SensingScene::new(&channels, &real, cfg.noise_radar());
    let rx = &channels.target_rx / c(channels.target_rx.norm(), 0.0);
    let budget = LinkBudget::from_config(&cfg);
    DeskInstance { cfg, real, layout, channels, scene, rx, budget }
}

/// Best sensing SINR over rank-one beam pairs for two antennas and one user,
/// by exhaustive grid over both beam directions followed by pattern refinement.
/// For fixed directions the ratio is linear-fractional in the power split, so
/// only the two ends of the split allowed by the user constraint are tried,
/// always at full power.
pub fn rank_one_grid(users: &[CVector], scene: &SensingScene, rx: &CVector, budget: &LinkBudget) -> f64 {
    use maisac::channel_model::sensing_sinr;
    let p = budget.max_power;
    let h = &users[0];
    let g = budget.gamma[0];
    let dir = |a: f64, b: f64| CVector::from_vec(vec![c(a.cos(), 0.0), Complex64::from_polar(a.sin(), b)]);
    let eval = |x: &[f64; 4]| -> f64 {
        let (d1, d2) = (dir(x[0], x[1]), dir(x[2], x[3]));
        let s = h.dotc(&d1).norm_sqr();
        let i = h.dotc(&d2).norm_sqr();
        let noise = budget.noise_user / p;
        let q_min = g * (i + noise) / (s + g * i);
        if !(q_min <= 1.0) || s == 0.0 {
            return f64::NEG_INFINITY;
        }
        [q_min, 1.0]
            .iter()
            .map(|q| {
                let tx = vec![&d1 * c((q * p).sqrt(), 0.0), &d2 * c(((1.0 - q) * p).sqrt(), 0.0)];
                sensing_sinr(&BeamformerSet { tx, rx: rx.clone() }, scene)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (na, nb) = (24, 48);
    let mut best = (f64::NEG_INFINITY, [0.0; 4]);
    for i1 in 0..=na {
        for j1 in 0..nb {
            for i2 in 0..=na {
                for j2 in 0..nb {
                    let x = [
                        PI / 2.0 * i1 as f64 / na as f64,
                        2.0 * PI * j1 as f64 / nb as f64,
                        PI / 2.0 * i2 as f64 / na as f64,
                        2.0 * PI * j2 as f64 / nb as f64,
                    ];
                    let v = eval(&x);
                    if v > best.0 {
                        best = (v, x);
                    }
                }
            }
        }
    }
    let mut step = [PI / 2.0 / na as f64, 2.0 * PI / nb as f64, PI / 2.0 / na as f64, 2.0 * PI / nb as f64];
    for _ in 0..60 {
        let center = best.1;
        for idx in 0..625 {
            let mut rem = idx;
            let mut x = center;
            for (d, s) in x.iter_mut().zip(&step) {
                *d += s * ((rem % 5) as f64 - 2.0) / 2.0;
                rem /= 5;
            }
            let v = eval(&x);
            if v > best.0 {
                best = (v, x);
            }
        }
        step.iter_mut().for_each(|s| *s *= 0.75);
    }
    best.0
}
