use num_complex::Complex64;

use crate::channel_model::{phase_difference, wavenumber, PathSet, Position2D, Region};
use crate::{CVector, Error, Result};

/// Elevation cut of a transmit array pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct BeampatternRequest {
    /// Elevation angles in radians, ascending.
    pub elevations: Vec<f64>,
    pub azimuth: f64,
    pub positions: Vec<Position2D>,
    pub beams: Vec<CVector>,
    pub wavelength: f64,
    /// Divide by the peak value.
    pub normalize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternPoint {
    pub elevation: f64,
    pub gain: f64,
}

/// `count` evenly spaced elevations covering `[-pi/2, pi/2]`.
pub fn elevation_grid(count: usize) -> Vec<f64> {
    let h = std::f64::consts::FRAC_PI_2;
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| -h + 2.0 * h * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Radiated power `sum_n |a^H w_n|^2` per elevation, where `a` is the channel
/// of a single unit-gain path leaving the array in that direction.
pub fn beampattern(req: &BeampatternRequest) -> Result<Vec<PatternPoint>> {
    if req.elevations.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidConfig("elevation grid must be sorted".into()));
    }
    if req.beams.iter().any(|w| w.len() != req.positions.len()) {
        return Err(Error::InvalidConfig("beam length does not match the antenna count".into()));
    }
    let k = wavenumber(req.wavelength);
    let mut out: Vec<PatternPoint> = req
        .elevations
        .iter()
        .map(|&el| {
            // a^H w with a_n = exp(-j k rho_n)
            let phase: Vec<Complex64> =
                req.positions.iter().map(|p| Complex64::from_polar(1.0, k * phase_difference(p, el, req.azimuth))).collect();
            let gain = req
                .beams
                .iter()
                .map(|w| w.iter().zip(&phase).map(|(wn, a)| wn * a).sum::<Complex64>().norm_sqr())
                .sum();
            PatternPoint { elevation: el, gain }
        })
        .collect();
    if req.normalize {
        let peak = out.iter().map(|p| p.gain).fold(0.0, f64::max);
        if peak > 0.0 {
            out.iter_mut().for_each(|p| p.gain /= peak);
        }
    }
    Ok(out)
}

/// Single-antenna channel power `|h(r)|^2` sampled on a regular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major over `ys`, then `xs`.
    pub gain: Vec<f64>,
}

impl GainMap {
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.gain[iy * self.xs.len() + ix]
    }

    /// Gain of the grid cell nearest to `p`.
    pub fn nearest(&self, p: &Position2D) -> f64 {
        let pick = |axis: &[f64], v: f64| {
            let mut best = 0;
            for (i, a) in axis.iter().enumerate() {
                if (a - v).abs() < (axis[best] - v).abs() {
                    best = i;
                }
            }
            best
        };
        self.at(pick(&self.xs, p.x), pick(&self.ys, p.y))
    }

    /// Median of all cells.
    pub fn median(&self) -> f64 {
        let mut v = self.gain.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

fn point_gain(paths: &PathSet, k: f64, p: &Position2D) -> f64 {
    (0..paths.count())
        .map(|i| paths.coefficients[i] * Complex64::from_polar(1.0, -k * phase_difference(p, paths.elevations[i], paths.azimuths[i])))
        .sum::<Complex64>()
        .norm_sqr()
}

pub fn channel_gain_map(resolution: usize, paths: &PathSet, wavelength: f64, region: &Region) -> Result<GainMap> {
    if resolution < 2 {
        return Err(Error::InvalidConfig("gain map needs at least 2 points per axis".into()));
    }
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        (0..resolution).map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64).collect()
    };
    let xs = axis(region.x_min, region.x_max);
    let ys = axis(region.y_min, region.y_max);
    let k = wavenumber(wavelength);
    let gain = ys.iter().flat_map(|&y| xs.iter().map(move |&x| point_gain(paths, k, &Position2D::new(x, y)))).collect();
    Ok(GainMap { xs, ys, gain })
}
