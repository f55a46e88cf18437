use super::realization::SensingScene;
use crate::beamforming::BeamformerSet;
use crate::CVector;

/// Communication SINR of user `k` given its channel `h` and all transmit beams.
pub fn comm_sinr(k: usize, h: &CVector, tx: &[CVector], noise: f64) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (n, w) in tx.iter().enumerate() {
        let p = h.dotc(w).norm_sqr();
        if n == k {
            signal = p;
        } else {
            interference += p;
        }
    }
    signal / (interference + noise)
}

/// Output SINR of the radar receiver for the target echo.
pub fn sensing_sinr(beams: &BeamformerSet, scene: &SensingScene) -> f64 {
    sensing_sinr_parts(&beams.tx, &beams.rx, scene).ratio()
}

/// Numerator and denominator of the sensing SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrParts {
    pub signal: f64,
    pub interference_plus_noise: f64,
}

impl SinrParts {
    pub fn ratio(&self) -> f64 {
        self.signal / self.interference_plus_noise
    }
}

pub fn sensing_sinr_parts(tx: &[CVector], rx: &CVector, scene: &SensingScene) -> SinrParts {
    // u^H H w = (u^H H) w; form the row once per reflector.
    let echo = |h: &crate::CMatrix| -> f64 {
        let row = h.adjoint() * rx;
        tx.iter().map(|w| row.dotc(w).norm_sqr()).sum()
    };
    let signal = scene.target_rcs.norm_sqr() * echo(&scene.target);
    let clutter: f64 = scene
        .clutters
        .iter()
        .zip(&scene.clutter_rcs)
        .map(|(h, a)| a.norm_sqr() * echo(h))
        .sum();
    SinrParts { signal, interference_plus_noise: clutter + scene.noise * rx.norm_squared() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_model::effective_target_matrix;
    use crate::CMatrix;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> CVector {
        CVector::from_iterator(n, (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
    }

    #[test]
    fn single_user_snr() {
        let p: f64 = 3.0;
        let h = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let w1 = CVector::from_vec(vec![c(p.sqrt(), 0.0), c(0.0, 0.0)]);
        assert!((comm_sinr(0, &h, std::slice::from_ref(&w1), 1.0) - p).abs() < 1e-12);
        let w2 = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((comm_sinr(0, &h, &[w1, w2], 1.0) - p).abs() < 1e-12);
    }

    #[test]
    fn comm_sinr_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = 4;
            let h = rand_vec(&mut rng, n);
            let tx: Vec<_> = (0..n).map(|_| rand_vec(&mut rng, n)).collect();
            let k = rng.random_range(0..n);
            let noise = rng.random_range(0.1..2.0);
            let inner = |w: &CVector| -> Complex64 { (0..n).map(|i| h[i].conj() * w[i]).sum() };
            let num = inner(&tx[k]).norm_sqr();
            let den: f64 = (0..n).filter(|&j| j != k).map(|j| inner(&tx[j]).norm_sqr()).sum::<f64>() + noise;
            let got = comm_sinr(k, &h, &tx, noise);
            assert!((got - num / den).abs() <= 1e-12 * (num / den));
        }
    }

    fn random_scene(rng: &mut ChaCha8Rng, n: usize, m: usize, l: usize) -> SensingScene {
        SensingScene {
            target: effective_target_matrix(&rand_vec(rng, m), &rand_vec(rng, n)),
            clutters: (0..l).map(|_| effective_target_matrix(&rand_vec(rng, m), &rand_vec(rng, n))).collect(),
            target_rcs: c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            clutter_rcs: (0..l).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect(),
            noise: rng.random_range(0.1..1.0),
        }
    }

    #[test]
    fn no_clutter_single_beam() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let scene = random_scene(&mut rng, 3, 2, 0);
        let mut u = rand_vec(&mut rng, 2);
        u /= Complex64::from(u.norm());
        let w = rand_vec(&mut rng, 3);
        let expected = scene.target_rcs.norm_sqr() * (u.adjoint() * &scene.target * &w)[0].norm_sqr() / scene.noise;
        let beams = BeamformerSet { tx: vec![w], rx: u };
        assert!((sensing_sinr(&beams, &scene) - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn sensing_sinr_matches_term_by_term_oracle_and_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let (n, m, l) = (4, 3, 2);
            let scene = random_scene(&mut rng, n, m, l);
            let tx: Vec<_> = (0..n).map(|_| rand_vec(&mut rng, n)).collect();
            let u = rand_vec(&mut rng, m);
            let quad = |h: &CMatrix, w: &CVector| -> f64 {
                let mut acc = c(0.0, 0.0);
                for i in 0..m {
                    for j in 0..n {
                        acc += u[i].conj() * h[(i, j)] * w[j];
                    }
                }
                acc.norm_sqr()
            };
            let num: f64 = tx.iter().map(|w| scene.target_rcs.norm_sqr() * quad(&scene.target, w)).sum();
            let mut den = scene.noise * u.iter().map(|z| z.norm_sqr()).sum::<f64>();
            for (h, a) in scene.clutters.iter().zip(&scene.clutter_rcs) {
                den += tx.iter().map(|w| a.norm_sqr() * quad(h, w)).sum::<f64>();
            }
            let beams = BeamformerSet { tx: tx.clone(), rx: u.clone() };
            let got = sensing_sinr(&beams, &scene);
            assert!(got >= 0.0);
            assert!((got - num / den).abs() < 1e-10 * got);

            let scale = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let scaled = BeamformerSet { tx, rx: u * scale };
            assert!((sensing_sinr(&scaled, &scene) - got).abs() < 1e-10 * got);
        }
    }
}
