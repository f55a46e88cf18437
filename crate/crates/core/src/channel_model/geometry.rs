use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, CVector, Error, Result};

/// Antenna position inside a planar movable region, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned rectangle an antenna may move in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::InvalidConfig(format!(
                "degenerate region [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    /// Square `[0, side] x [0, side]`.
    pub fn square(side: f64) -> Result<Self> {
        Self::new(0.0, side, 0.0, side)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: &Position2D, tol: f64) -> bool {
        p.x >= self.x_min - tol
            && p.x <= self.x_max + tol
            && p.y >= self.y_min - tol
            && p.y <= self.y_max + tol
    }

    pub fn clamp(&self, p: Position2D) -> Position2D {
        Position2D::new(p.x.clamp(self.x_min, self.x_max), p.y.clamp(self.y_min, self.y_max))
    }
}

/// Angular domain a path set was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleDomain {
    /// Departure angles, elevation and azimuth in `[-pi/2, pi/2]`.
    Departure,
    /// Arrival angles, elevation and azimuth in `[0, pi]`.
    Arrival,
}

impl AngleDomain {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            AngleDomain::Departure => (-PI / 2.0, PI / 2.0),
            AngleDomain::Arrival => (0.0, PI),
        }
    }
}

/// Far-field multipath description of one link: per-path elevation, azimuth
/// and complex response coefficient referenced to the region origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub elevations: Vec<f64>,
    pub azimuths: Vec<f64>,
    pub coefficients: Vec<Complex64>,
}

impl PathSet {
    pub fn new(elevations: Vec<f64>, azimuths: Vec<f64>, coefficients: Vec<Complex64>) -> Result<Self> {
        if elevations.is_empty()
            || elevations.len() != azimuths.len()
            || elevations.len() != coefficients.len()
        {
            return Err(Error::InvalidConfig(format!(
                "path set lists must be nonempty and equally long (got {}, {}, {})",
                elevations.len(),
                azimuths.len(),
                coefficients.len()
            )));
        }
        Ok(Self { elevations, azimuths, coefficients })
    }

    pub fn count(&self) -> usize {
        self.coefficients.len()
    }

    /// Gradient of the propagation phase difference of path `p` with respect
    /// to the antenna position: `(sin(el) cos(az), cos(el))`.
    pub fn direction(&self, p: usize) -> [f64; 2] {
        let (el, az) = (self.elevations[p], self.azimuths[p]);
        [el.sin() * az.cos(), el.cos()]
    }

    pub fn directions(&self) -> Vec<[f64; 2]> {
        (0..self.count()).map(|p| self.direction(p)).collect()
    }

    pub fn total_power(&self) -> f64 {
        self.coefficients.iter().map(|g| g.norm_sqr()).sum()
    }

    pub fn within_domain(&self, domain: AngleDomain) -> bool {
        let (lo, hi) = domain.bounds();
        self.elevations
            .iter()
            .chain(self.azimuths.iter())
            .all(|a| *a >= lo && *a <= hi)
    }
}

/// Propagation phase difference (in meters) between a path observed at `pos`
/// and at the region origin.
pub fn phase_difference(pos: &Position2D, elevation: f64, azimuth: f64) -> f64 {
    pos.x * elevation.sin() * azimuth.cos() + pos.y * elevation.cos()
}

pub fn wavenumber(wavelength: f64) -> f64 {
    2.0 * PI / wavelength
}

/// Field response vector of one antenna: `exp(j k rho_p(pos))` per path.
pub fn field_response_vector(pos: &Position2D, paths: &PathSet, wavelength: f64) -> CVector {
    let k = wavenumber(wavelength);
    CVector::from_iterator(
        paths.count(),
        (0..paths.count()).map(|p| {
            let rho = phase_difference(pos, paths.elevations[p], paths.azimuths[p]);
            Complex64::from_polar(1.0, k * rho)
        }),
    )
}

/// Channel of an array: `F(positions)^H g`, one entry per antenna.
pub fn channel_vector(positions: &[Position2D], paths: &PathSet, wavelength: f64) -> CVector {
    let g = CVector::from_column_slice(&paths.coefficients);
    CVector::from_iterator(
        positions.len(),
        positions
            .iter()
            .map(|pos| field_response_vector(pos, paths, wavelength).dotc(&g)),
    )
}

/// Rank-one bistatic response `h_r h_t^H` of a reflector.
pub fn effective_target_matrix(rx_channel: &CVector, tx_channel: &CVector) -> CMatrix {
    rx_channel * tx_channel.adjoint()
}
