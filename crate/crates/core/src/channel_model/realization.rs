use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::geometry::{channel_vector, effective_target_matrix, AngleDomain, PathSet, Position2D};
use crate::{CMatrix, CVector, Error, Result};

/// Ordered transmit and receive antenna positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaLayout {
    pub tx: Vec<Position2D>,
    pub rx: Vec<Position2D>,
}

impl AntennaLayout {
    pub fn new(tx: Vec<Position2D>, rx: Vec<Position2D>) -> Self {
        Self { tx, rx }
    }

    /// Smallest pairwise distance within one side; `inf` for a single antenna.
    pub fn min_spacing(positions: &[Position2D]) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in positions.iter().enumerate() {
            for b in &positions[i + 1..] {
                best = best.min(a.distance(b));
            }
        }
        best
    }
}

/// A point scatterer seen through separate transmit-side and receive-side
/// multipath channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reflector {
    pub tx_paths: PathSet,
    pub rx_paths: PathSet,
    pub rcs: Complex64,
}

/// One random draw of all small-scale channel parameters of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRealization {
    pub seed: u64,
    pub users: Vec<PathSet>,
    pub target: Reflector,
    pub clutters: Vec<Reflector>,
}

fn distance3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `CN(0, variance)` sample.
pub fn complex_normal(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Per-path coefficient variances for a link with total power `large_scale`:
/// path 0 is LoS with share `kappa / (kappa + 1)`, the rest split the NLoS share.
pub fn path_variances(count: usize, large_scale: f64, kappa: f64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidConfig("path count must be positive".into()));
    }
    if kappa.is_infinite() {
        let mut v = vec![0.0; count];
        v[0] = large_scale;
        return Ok(v);
    }
    if count < 2 {
        return Err(Error::InvalidConfig(
            "at least two paths are required for a finite Rician factor".into(),
        ));
    }
    let los = large_scale * kappa / (kappa + 1.0);
    let nlos = large_scale / ((kappa + 1.0) * (count as f64 - 1.0));
    Ok((0..count).map(|p| if p == 0 { los } else { nlos }).collect())
}

/// Draws angles uniformly over `domain` and coefficients per [`path_variances`].
pub fn draw_path_set(
    rng: &mut impl Rng,
    count: usize,
    large_scale: f64,
    kappa: f64,
    domain: AngleDomain,
) -> Result<PathSet> {
    let variances = path_variances(count, large_scale, kappa)?;
    let (lo, hi) = domain.bounds();
    let mut elevations = Vec::with_capacity(count);
    let mut azimuths = Vec::with_capacity(count);
    let mut coefficients = Vec::with_capacity(count);
    for v in variances {
        elevations.push(rng.random_range(lo..=hi));
        azimuths.push(rng.random_range(lo..=hi));
        coefficients.push(complex_normal(rng, v));
    }
    PathSet::new(elevations, azimuths, coefficients)
}

/// Samples a realization; identical `(config, seed)` pairs give identical output.
pub fn sample_realization(config: &ScenarioConfig, seed: u64) -> Result<ScenarioRealization> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta0 = config.beta0();
    let kappa = config.rician_k;
    let loss = |d: f64, exp: f64| beta0 * d.powf(-exp);

    let users = config
        .user_positions
        .iter()
        .map(|u| {
            let d = distance3(&config.tx_position, u);
            draw_path_set(&mut rng, config.user_paths, loss(d, config.pathloss_exp_user), kappa, AngleDomain::Departure)
        })
        .collect::<Result<Vec<_>>>()?;

    let reflector = |pos: &[f64; 3], exp: f64, rng: &mut ChaCha8Rng| -> Result<(PathSet, PathSet)> {
        let d_tx = distance3(&config.tx_position, pos);
        let d_rx = distance3(pos, &config.rx_position);
        let tx = draw_path_set(rng, config.tx_reflector_paths, loss(d_tx, exp), kappa, AngleDomain::Departure)?;
        let rx = draw_path_set(rng, config.rx_reflector_paths, loss(d_rx, exp), kappa, AngleDomain::Arrival)?;
        Ok((tx, rx))
    };

    let (t_tx, t_rx) = reflector(&config.target_position, config.pathloss_exp_target, &mut rng)?;
    let mut clutter_paths = Vec::with_capacity(config.num_clutters());
    for pos in &config.clutter_positions {
        clutter_paths.push(reflector(pos, config.pathloss_exp_clutter, &mut rng)?);
    }
    let target = Reflector { tx_paths: t_tx, rx_paths: t_rx, rcs: complex_normal(&mut rng, config.rcs_variance) };
    let clutters = clutter_paths
        .into_iter()
        .map(|(tx_paths, rx_paths)| Reflector { tx_paths, rx_paths, rcs: complex_normal(&mut rng, config.rcs_variance) })
        .collect();

    Ok(ScenarioRealization { seed, users, target, clutters })
}

impl ScenarioRealization {
    /// Flat line-oriented dump, one path or coefficient per line.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# maisac realization v1").unwrap();
        writeln!(out, "seed {}", self.seed).unwrap();
        let paths = |out: &mut String, tag: &str, ps: &PathSet| {
            for p in 0..ps.count() {
                let g = ps.coefficients[p];
                writeln!(out, "path {tag} {p} {} {} {} {}", ps.elevations[p], ps.azimuths[p], g.re, g.im).unwrap();
            }
        };
        for (k, u) in self.users.iter().enumerate() {
            paths(&mut out, &format!("user{k}"), u);
        }
        let mut reflectors = vec![("target".to_string(), &self.target)];
        for (l, c) in self.clutters.iter().enumerate() {
            reflectors.push((format!("clutter{l}"), c));
        }
        for (name, r) in reflectors {
            paths(&mut out, &format!("{name}_tx"), &r.tx_paths);
            paths(&mut out, &format!("{name}_rx"), &r.rx_paths);
            writeln!(out, "rcs {name} {} {}", r.rcs.re, r.rcs.im).unwrap();
        }
        out
    }
}

/// All channel vectors of a realization evaluated at one antenna layout.
#[derive(Debug, Clone)]
pub struct Channels {
    /// `h_k(t)`, length N each.
    pub users: Vec<CVector>,
    pub target_tx: CVector,
    pub target_rx: CVector,
    pub clutter_tx: Vec<CVector>,
    pub clutter_rx: Vec<CVector>,
}

impl Channels {
    pub fn build(realization: &ScenarioRealization, layout: &AntennaLayout, wavelength: f64) -> Self {
        let tx = |ps: &PathSet| channel_vector(&layout.tx, ps, wavelength);
        let rx = |ps: &PathSet| channel_vector(&layout.rx, ps, wavelength);
        Self {
            users: realization.users.iter().map(tx).collect(),
            target_tx: tx(&realization.target.tx_paths),
            target_rx: rx(&realization.target.rx_paths),
            clutter_tx: realization.clutters.iter().map(|c| tx(&c.tx_paths)).collect(),
            clutter_rx: realization.clutters.iter().map(|c| rx(&c.rx_paths)).collect(),
        }
    }
}

/// Effective echo model: rank-one target/clutter matrices, RCS values and
/// receiver noise power.
#[derive(Debug, Clone)]
pub struct SensingScene {
    pub target: CMatrix,
    pub clutters: Vec<CMatrix>,
    pub target_rcs: Complex64,
    pub clutter_rcs: Vec<Complex64>,
    pub noise: f64,
}

impl SensingScene {
    pub fn new(channels: &Channels, realization: &ScenarioRealization, noise: f64) -> Self {
        Self {
            target: effective_target_matrix(&channels.target_rx, &channels.target_tx),
            clutters: channels
                .clutter_rx
                .iter()
                .zip(&channels.clutter_tx)
                .map(|(r, t)| effective_target_matrix(r, t))
                .collect(),
            target_rcs: realization.target.rcs,
            clutter_rcs: realization.clutters.iter().map(|c| c.rcs).collect(),
            noise,
        }
    }

    pub fn n_tx(&self) -> usize {
        self.target.ncols()
    }

    pub fn n_rx(&self) -> usize {
        self.target.nrows()
    }
}
