use num_complex::Complex64;

use super::phase::{PhaseSum, PhaseTerm, PowerSum};
use crate::beamforming::BeamformerSet;
use crate::channel_model::{channel_vector, wavenumber, AntennaLayout, PathSet, Position2D, ScenarioRealization};
use crate::{CVector, Error, Result};

fn xy(p: &Position2D) -> [f64; 2] {
    [p.x, p.y]
}

/// Ratio `f(r) / g(r)` of two squared-magnitude sums as a function of one
/// antenna position.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTerms {
    pub wavelength: f64,
    pub numerator: PowerSum,
    pub denominator: PowerSum,
}

impl RatioTerms {
    fn k(&self) -> f64 {
        wavenumber(self.wavelength)
    }

    pub fn eval_fg(&self, r: &Position2D) -> (f64, f64) {
        (self.numerator.value(xy(r), self.k()), self.denominator.value(xy(r), self.k()))
    }

    pub fn ratio(&self, r: &Position2D) -> f64 {
        let (f, g) = self.eval_fg(r);
        f / g
    }

    pub fn grad_fg(&self, r: &Position2D) -> ([f64; 2], [f64; 2]) {
        (self.numerator.gradient(xy(r), self.k()), self.denominator.gradient(xy(r), self.k()))
    }

    /// `(delta_f, delta_g)` with `delta I` dominating the Hessians everywhere.
    pub fn hessian_bounds(&self) -> (f64, f64) {
        (self.numerator.curvature_bound(self.k()), self.denominator.curvature_bound(self.k()))
    }

    /// Same sums evaluated through the cosine expansion of every product.
    pub fn eval_fg_cosine(&self, r: &Position2D) -> (f64, f64) {
        (self.numerator.cosine_form(xy(r), self.k()), self.denominator.cosine_form(xy(r), self.k()))
    }
}

/// Communication SINR of one user as a function of one transmit position.
#[derive(Debug, Clone, PartialEq)]
pub struct CommTerms {
    pub user: usize,
    pub gamma: f64,
    pub sinr: RatioTerms,
}

/// Sensing SINR as a function of the position of receive antenna `antenna`,
/// with beams, transmit layout and other receive positions held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct RxObjectiveContext {
    pub antenna: usize,
    pub objective: RatioTerms,
}

/// Sensing SINR and per-user communication SINRs as functions of the
/// position of transmit antenna `antenna`.
#[derive(Debug, Clone, PartialEq)]
pub struct TxObjectiveContext {
    pub antenna: usize,
    pub objective: RatioTerms,
    pub users: Vec<CommTerms>,
}

fn check_dims(layout: &AntennaLayout, beams: &BeamformerSet) -> Result<()> {
    if beams.rx.len() != layout.rx.len() || beams.tx.iter().any(|w| w.len() != layout.tx.len()) {
        return Err(Error::InvalidConfig("beamformer dimensions do not match the antenna layout".into()));
    }
    Ok(())
}

/// `e(r) = a * sum_p g_p exp(-j k d_p^T r) + rest` for a receive-side entry.
fn rx_entry(paths: &PathSet, scale: Complex64, rest: Complex64) -> PhaseSum {
    PhaseSum {
        constant: rest,
        terms: (0..paths.count())
            .map(|p| PhaseTerm { coef: scale * paths.coefficients[p], dir: paths.direction(p) })
            .collect(),
    }
}

/// Conjugated transmit-side entry: `a * sum_p conj(g_p) exp(+j k d_p^T t) + rest`.
fn tx_entry(paths: &PathSet, scale: Complex64, rest: Complex64) -> PhaseSum {
    PhaseSum {
        constant: rest,
        terms: (0..paths.count())
            .map(|p| {
                let d = paths.direction(p);
                PhaseTerm { coef: scale * paths.coefficients[p].conj(), dir: [-d[0], -d[1]] }
            })
            .collect(),
    }
}

/// `sum_{i != skip} conj(a_i) b_i`.
fn dotc_without(a: &CVector, b: &CVector, skip: usize) -> Complex64 {
    a.iter().zip(b.iter()).enumerate().filter(|(i, _)| *i != skip).map(|(_, (x, y))| x.conj() * y).sum()
}

impl RxObjectiveContext {
    pub fn new(
        antenna: usize,
        realization: &ScenarioRealization,
        layout: &AntennaLayout,
        beams: &BeamformerSet,
        wavelength: f64,
        noise: f64,
    ) -> Result<Self> {
        check_dims(layout, beams)?;
        if antenna >= layout.rx.len() {
            return Err(Error::InvalidConfig(format!("receive antenna {antenna} out of range")));
        }
        let u = &beams.rx;
        let um = u[antenna].conj();
        let echoes = |paths_tx: &PathSet, paths_rx: &PathSet, rcs: f64| -> Vec<(f64, PhaseSum)> {
            let ht = channel_vector(&layout.tx, paths_tx, wavelength);
            let hr = channel_vector(&layout.rx, paths_rx, wavelength);
            let rest = dotc_without(u, &hr, antenna);
            beams
                .tx
                .iter()
                .map(|w| {
                    let s = ht.dotc(w);
                    (rcs, rx_entry(paths_rx, um * s, rest * s))
                })
                .collect()
        };

        let t = &realization.target;
        let numerator = PowerSum { parts: echoes(&t.tx_paths, &t.rx_paths, t.rcs.norm_sqr()), offset: 0.0 };
        let denominator = PowerSum {
            parts: realization
                .clutters
                .iter()
                .flat_map(|c| echoes(&c.tx_paths, &c.rx_paths, c.rcs.norm_sqr()))
                .collect(),
            offset: noise * u.norm_squared(),
        };
        Ok(Self { antenna, objective: RatioTerms { wavelength, numerator, denominator } })
    }
}

impl TxObjectiveContext {
    /// `gamma[k]` and `noise_user` describe the communication constraints.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        antenna: usize,
        realization: &ScenarioRealization,
        layout: &AntennaLayout,
        beams: &BeamformerSet,
        wavelength: f64,
        noise_radar: f64,
        noise_user: f64,
        gamma: &[f64],
    ) -> Result<Self> {
        check_dims(layout, beams)?;
        if antenna >= layout.tx.len() {
            return Err(Error::InvalidConfig(format!("transmit antenna {antenna} out of range")));
        }
        if gamma.len() != realization.users.len() || beams.tx.len() < realization.users.len() {
            return Err(Error::InvalidConfig("one threshold and one beam per user are required".into()));
        }
        let u = &beams.rx;
        // Entry `h^H w` with `h` the channel over `paths`, times `scale`.
        let entry = |paths: &PathSet, w: &CVector, scale: Complex64| -> PhaseSum {
            let h = channel_vector(&layout.tx, paths, wavelength);
            tx_entry(paths, scale * w[antenna], scale * dotc_without(&h, w, antenna))
        };
        let echoes = |paths_tx: &PathSet, paths_rx: &PathSet, rcs: f64| -> Vec<(f64, PhaseSum)> {
            let b = u.dotc(&channel_vector(&layout.rx, paths_rx, wavelength));
            beams.tx.iter().map(|w| (rcs, entry(paths_tx, w, b))).collect()
        };

        let t = &realization.target;
        let numerator = PowerSum { parts: echoes(&t.tx_paths, &t.rx_paths, t.rcs.norm_sqr()), offset: 0.0 };
        let denominator = PowerSum {
            parts: realization
                .clutters
                .iter()
                .flat_map(|c| echoes(&c.tx_paths, &c.rx_paths, c.rcs.norm_sqr()))
                .collect(),
            offset: noise_radar * u.norm_squared(),
        };
        let one = Complex64::new(1.0, 0.0);
        let users = realization
            .users
            .iter()
            .enumerate()
            .map(|(k, paths)| {
                let numerator = PowerSum { parts: vec![(1.0, entry(paths, &beams.tx[k], one))], offset: 0.0 };
                let denominator = PowerSum {
                    parts: beams
                        .tx
                        .iter()
                        .enumerate()
                        .filter(|(n, _)| *n != k)
                        .map(|(_, w)| (1.0, entry(paths, w, one)))
                        .collect(),
                    offset: noise_user,
                };
                CommTerms { user: k, gamma: gamma[k], sinr: RatioTerms { wavelength, numerator, denominator } }
            })
            .collect();
        Ok(Self { antenna, objective: RatioTerms { wavelength, numerator, denominator }, users })
    }
}

/// `value + grad^T (r - anchor) + curvature / 2 ||r - anchor||^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticBound {
    pub anchor: Position2D,
    pub value: f64,
    pub grad: [f64; 2],
    pub curvature: f64,
}

impl QuadraticBound {
    pub fn eval(&self, r: &Position2D) -> f64 {
        let d = [r.x - self.anchor.x, r.y - self.anchor.y];
        self.value + self.grad[0] * d[0] + self.grad[1] * d[1] + 0.5 * self.curvature * (d[0] * d[0] + d[1] * d[1])
    }
}

/// Concave minorant of `f` and convex majorant of `g`, both exact at `anchor`.
pub fn surrogate_bounds(
    anchor: Position2D,
    f: f64,
    grad_f: [f64; 2],
    delta_f: f64,
    g: f64,
    grad_g: [f64; 2],
    delta_g: f64,
) -> (QuadraticBound, QuadraticBound) {
    (
        QuadraticBound { anchor, value: f, grad: grad_f, curvature: -delta_f.max(0.0) },
        QuadraticBound { anchor, value: g, grad: grad_g, curvature: delta_g.max(0.0) },
    )
}

impl RatioTerms {
    /// Surrogate pair of numerator and denominator expanded at `anchor`.
    pub fn surrogates(&self, anchor: Position2D) -> (QuadraticBound, QuadraticBound) {
        let (f, g) = self.eval_fg(&anchor);
        let (gf, gg) = self.grad_fg(&anchor);
        let (df, dg) = self.hessian_bounds();
        surrogate_bounds(anchor, f, gf, df, g, gg, dg)
    }
}

/// Lower bound on the useful power and upper bound on interference plus
/// noise of user `k`, expanded at `anchor`. `lower >= gamma * upper` implies
/// the exact SINR constraint.
pub fn comm_surrogates_tx(anchor: Position2D, k: usize, ctx: &TxObjectiveContext) -> (QuadraticBound, QuadraticBound) {
    ctx.users[k].sinr.surrogates(anchor)
}
