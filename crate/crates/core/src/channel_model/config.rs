use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geometry::Region;
use crate::{Error, Result};

/// Converts a decibel value to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Every tunable knob of a scenario.
///
/// Stored on disk as TOML, one key per field. Power-like quantities are kept
/// in dB / dBm in the file and exposed in linear units through accessors.
/// Node coordinates are 3D points in meters; movable regions are squares
/// `[0, A] x [0, A]` in each array's local plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Number of transmit antennas (and transmit beams) N.
    pub n_tx: usize,
    /// Number of receive antennas M.
    pub n_rx: usize,
    pub tx_position: [f64; 3],
    pub rx_position: [f64; 3],
    pub target_position: [f64; 3],
    pub clutter_positions: Vec<[f64; 3]>,
    pub user_positions: Vec<[f64; 3]>,
    /// Paths between the transmitter and each user.
    pub user_paths: usize,
    /// Paths between the transmitter and the target / each clutter.
    pub tx_reflector_paths: usize,
    /// Paths between the target / each clutter and the receiver.
    pub rx_reflector_paths: usize,
    pub pathloss_exp_user: f64,
    pub pathloss_exp_target: f64,
    pub pathloss_exp_clutter: f64,
    /// Path gain at unit distance, dB.
    pub beta0_db: f64,
    /// Rician factor: LoS power over total NLoS power. `inf` gives LoS only.
    pub rician_k: f64,
    /// Variance of the radar cross-section coefficients.
    pub rcs_variance: f64,
    pub noise_user_dbm: f64,
    pub noise_radar_dbm: f64,
    /// Per-user communication SINR thresholds, dB.
    pub gamma_th_db: Vec<f64>,
    pub max_power_dbm: f64,
    /// Minimum inter-antenna spacing D, in wavelengths.
    pub min_spacing_wavelengths: f64,
    /// Side A of the square movable regions, in wavelengths.
    pub region_side_wavelengths: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            wavelength: 0.1,
            n_tx: 6,
            n_rx: 4,
            tx_position: [0.0, 0.0, 5.0],
            rx_position: [0.0, 20.0, 5.0],
            target_position: [0.0, 10.0, 5.0],
            clutter_positions: vec![[10.0, 10.0, 5.0], [-10.0, 10.0, 5.0]],
            user_positions: vec![[15.0, 10.0, 0.0], [-15.0, 10.0, 0.0]],
            user_paths: 4,
            tx_reflector_paths: 4,
            rx_reflector_paths: 4,
            pathloss_exp_user: 2.5,
            pathloss_exp_target: 2.2,
            pathloss_exp_clutter: 2.3,
            beta0_db: -30.0,
            rician_k: 1.0,
            rcs_variance: 1.0,
            noise_user_dbm: -80.0,
            noise_radar_dbm: -80.0,
            gamma_th_db: vec![0.0, 0.0],
            max_power_dbm: 24.0,
            min_spacing_wavelengths: 0.5,
            region_side_wavelengths: 3.0,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always serializable")
    }

    pub fn num_users(&self) -> usize {
        self.user_positions.len()
    }

    pub fn num_clutters(&self) -> usize {
        self.clutter_positions.len()
    }

    pub fn max_power(&self) -> f64 {
        dbm_to_watts(self.max_power_dbm)
    }

    pub fn noise_user(&self) -> f64 {
        dbm_to_watts(self.noise_user_dbm)
    }

    pub fn noise_radar(&self) -> f64 {
        dbm_to_watts(self.noise_radar_dbm)
    }

    pub fn beta0(&self) -> f64 {
        db_to_linear(self.beta0_db)
    }

    pub fn gamma_th(&self) -> Vec<f64> {
        self.gamma_th_db.iter().map(|g| db_to_linear(*g)).collect()
    }

    /// Minimum spacing D in meters.
    pub fn min_spacing(&self) -> f64 {
        self.min_spacing_wavelengths * self.wavelength
    }

    /// Region side A in meters.
    pub fn region_side(&self) -> f64 {
        self.region_side_wavelengths * self.wavelength
    }

    pub fn tx_region(&self) -> Region {
        Region::square(self.region_side()).expect("validated region side")
    }

    pub fn rx_region(&self) -> Region {
        Region::square(self.region_side()).expect("validated region side")
    }

    /// Sets every user threshold to the same value.
    pub fn set_uniform_gamma_db(&mut self, db: f64) {
        self.gamma_th_db = vec![db; self.num_users()];
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return bad(format!("wavelength must be positive, got {}", self.wavelength));
        }
        if self.n_tx == 0 || self.n_rx == 0 {
            return bad("antenna counts must be positive".into());
        }
        let k = self.num_users();
        if k == 0 {
            return bad("at least one user is required".into());
        }
        if self.n_tx < k {
            return bad(format!("n_tx = {} beams cannot serve {} users", self.n_tx, k));
        }
        if self.gamma_th_db.len() != k {
            return bad(format!("gamma_th_db has {} entries for {} users", self.gamma_th_db.len(), k));
        }
        if self.gamma_th_db.iter().any(|g| !g.is_finite()) {
            return bad("thresholds must be finite".into());
        }
        for (name, v) in [
            ("max_power_dbm", self.max_power_dbm),
            ("noise_user_dbm", self.noise_user_dbm),
            ("noise_radar_dbm", self.noise_radar_dbm),
            ("beta0_db", self.beta0_db),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if !(self.rcs_variance > 0.0 && self.rcs_variance.is_finite()) {
            return bad("rcs_variance must be positive".into());
        }
        if !(self.rician_k > 0.0) {
            return bad("rician_k must be positive (use inf for LoS only)".into());
        }
        for (name, count) in [
            ("user_paths", self.user_paths),
            ("tx_reflector_paths", self.tx_reflector_paths),
            ("rx_reflector_paths", self.rx_reflector_paths),
        ] {
            if count == 0 {
                return bad(format!("{name} must be positive"));
            }
            if count < 2 && self.rician_k.is_finite() {
                return bad(format!("{name} = 1 leaves the NLoS variance undefined for finite rician_k"));
            }
        }
        if !(self.min_spacing_wavelengths > 0.0 && self.region_side_wavelengths > 0.0) {
            return bad("spacing and region side must be positive".into());
        }
        for n in [self.n_tx, self.n_rx] {
            let side = (n as f64).sqrt().ceil() - 1.0;
            if self.region_side_wavelengths + 1e-12 < self.min_spacing_wavelengths * side {
                return bad(format!(
                    "region side {}λ cannot hold a {}-antenna grid at spacing {}λ",
                    self.region_side_wavelengths, n, self.min_spacing_wavelengths
                ));
            }
        }
        Ok(())
    }
}
