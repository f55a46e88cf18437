use num_complex::Complex64;

use crate::channel_model::SensingScene;
use crate::{CMatrix, CVector, Error, Result};

/// Clutter-plus-noise covariance `sum_l |a_l|^2 sum_n H_l w_n w_n^H H_l^H + noise I`.
pub fn interference_covariance(tx: &[CVector], scene: &SensingScene) -> CMatrix {
    let m = scene.n_rx();
    let mut c = CMatrix::identity(m, m) * Complex64::new(scene.noise, 0.0);
    for (h, a) in scene.clutters.iter().zip(&scene.clutter_rcs) {
        let p = a.norm_sqr();
        for w in tx {
            let e = h * w;
            c += &e * e.adjoint() * Complex64::new(p, 0.0);
        }
    }
    (&c + c.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Target steering direction `sum_n H_d w_n`.
///
/// `H_d` has rank one, so every `H_d w_n` points along the same receive
/// channel. When the coherent sum cancels, the strongest single term is used.
pub fn target_steering(tx: &[CVector], scene: &SensingScene) -> Result<CVector> {
    let terms: Vec<CVector> = tx.iter().map(|w| &scene.target * w).collect();
    let sum = terms.iter().fold(CVector::zeros(scene.n_rx()), |acc, t| acc + t);
    let scale: f64 = terms.iter().map(|t| t.norm()).sum();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::DegenerateSteering);
    }
    if sum.norm() > 1e-12 * scale {
        return Ok(sum);
    }
    let best = terms.into_iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("nonempty");
    Ok(best)
}

/// Closed-form receive filter `C^-1 d / (d^H C^-1 d)` maximizing the sensing
/// SINR for fixed transmit beams.
pub fn mvdr_receive(tx: &[CVector], scene: &SensingScene) -> Result<CVector> {
    if !(scene.noise > 0.0) {
        return Err(Error::InvalidConfig("radar noise power must be positive".into()));
    }
    let d = target_steering(tx, scene)?;
    let c = interference_covariance(tx, scene);
    let chol = c
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("interference covariance is not positive definite".into()))?;
    let cd = chol.solve(&d);
    let denom = d.dotc(&cd);
    if !(denom.norm() > 0.0) || !denom.re.is_finite() {
        return Err(Error::NumericalFailure("MVDR normalization vanished".into()));
    }
    Ok(cd / denom)
}
