//! Primal-dual interior-point method for real standard-form conic programs
//!
//! ```text
//! min <C, X>  s.t.  <A_i, X> = b_i,  X in S+^{n_1} x ... x S+^{n_k} x R+^{p}
//! ```
//!
//! using the HKM search direction with a Mehrotra predictor-corrector step.

use nalgebra::{DMatrix, DVector};

/// Element of a product of PSD cones and a nonnegative orthant.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ConeVec {
    pub mats: Vec<DMatrix<f64>>,
    pub lin: DVector<f64>,
}

impl ConeVec {
    pub fn zeros(dims: &[usize], n_lin: usize) -> Self {
        Self { mats: dims.iter().map(|&n| DMatrix::zeros(n, n)).collect(), lin: DVector::zeros(n_lin) }
    }

    pub fn identity(dims: &[usize], n_lin: usize) -> Self {
        Self {
            mats: dims.iter().map(|&n| DMatrix::identity(n, n)).collect(),
            lin: DVector::from_element(n_lin, 1.0),
        }
    }

    pub fn dot(&self, other: &ConeVec) -> f64 {
        self.mats.iter().zip(&other.mats).map(|(a, b)| a.dot(b)).sum::<f64>() + self.lin.dot(&other.lin)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn axpy(&mut self, a: f64, other: &ConeVec) {
        for (m, o) in self.mats.iter_mut().zip(&other.mats) {
            *m += o * a;
        }
        self.lin.axpy(a, &other.lin, 1.0);
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { mats: self.mats.iter().map(|m| m * a).collect(), lin: &self.lin * a }
    }

    fn symmetrize(&mut self) {
        for m in &mut self.mats {
            let t = m.transpose();
            *m += t;
            *m *= 0.5;
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct StandardSdp {
    pub dims: Vec<usize>,
    pub n_lin: usize,
    pub c: ConeVec,
    pub a: Vec<ConeVec>,
    pub b: DVector<f64>,
}

impl StandardSdp {
    fn apply_a(&self, x: &ConeVec) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|ai| ai.dot(x)))
    }

    fn apply_at(&self, y: &DVector<f64>) -> ConeVec {
        let mut out = ConeVec::zeros(&self.dims, self.n_lin);
        for (ai, yi) in self.a.iter().zip(y.iter()) {
            if *yi != 0.0 {
                out.axpy(*yi, ai);
            }
        }
        out
    }

    fn nu(&self) -> f64 {
        (self.dims.iter().sum::<usize>() + self.n_lin) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Converged,
    PrimalInfeasible,
    DualInfeasible,
    Stalled,
}

#[derive(Debug, Clone)]
pub(crate) struct IpmResult {
    pub outcome: Outcome,
    pub x: ConeVec,
    pub iterations: usize,
    pub pobj: f64,
    pub dobj: f64,
    pub pinf: f64,
    pub dinf: f64,
    pub gap: f64,
}

const MAX_ITER: usize = 150;
const STEP_FRACTION: f64 = 0.95;
const CERT_TOL: f64 = 1e-8;

fn cholesky(m: &DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    m.clone().cholesky()
}

/// Largest step `a` with `x + a dx` in the cone, or `inf`.
fn max_step(x: &ConeVec, dx: &ConeVec) -> Option<f64> {
    let mut best = f64::INFINITY;
    for (m, d) in x.mats.iter().zip(&dx.mats) {
        if m.nrows() == 0 {
            continue;
        }
        let l = cholesky(m)?.l();
        let li = l.clone().try_inverse()?;
        let mut s = &li * d * li.transpose();
        s = (&s + s.transpose()) * 0.5;
        let lmin = s.symmetric_eigenvalues().min();
        if lmin < 0.0 {
            best = best.min(-1.0 / lmin);
        }
    }
    for (v, d) in x.lin.iter().zip(dx.lin.iter()) {
        if *d < 0.0 {
            best = best.min(-v / d);
        }
    }
    Some(best)
}

struct Workspace {
    zinv: Vec<DMatrix<f64>>,
    zinv_lin: DVector<f64>,
    schur: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl StandardSdp {
    fn workspace(&self, x: &ConeVec, z: &ConeVec) -> Option<Workspace> {
        let mut zinv = Vec::with_capacity(self.dims.len());
        for m in &z.mats {
            let inv = cholesky(m)?.inverse();
            zinv.push((&inv + inv.transpose()) * 0.5);
        }
        let zinv_lin = z.lin.map(|v| 1.0 / v);
        let m = self.a.len();
        let mut schur = DMatrix::zeros(m, m);
        for (blk, (xb, zi)) in x.mats.iter().zip(&zinv).enumerate() {
            let active: Vec<usize> = (0..m).filter(|&i| self.a[i].mats[blk].iter().any(|v| *v != 0.0)).collect();
            for &j in &active {
                let g = xb * &self.a[j].mats[blk] * zi;
                for &i in &active {
                    schur[(i, j)] += self.a[i].mats[blk].dot(&g);
                }
            }
        }
        let d = x.lin.component_mul(&zinv_lin);
        for i in 0..m {
            for j in 0..m {
                schur[(i, j)] += self.a[i].lin.dot(&self.a[j].lin.component_mul(&d));
            }
        }
        schur = (&schur + schur.transpose()) * 0.5;
        let scale = schur.diagonal().amax().max(1e-300);
        let mut chol = schur.clone().cholesky();
        let mut ridge = 1e-14 * scale;
        while chol.is_none() && ridge < 1e-6 * scale {
            chol = (&schur + DMatrix::identity(m, m) * ridge).cholesky();
            ridge *= 100.0;
        }
        Some(Workspace { zinv, zinv_lin, schur: chol? })
    }

    /// Solves the linearized KKT system for a given centering target and
    /// second-order correction `corr = dXa dZa Z^-1`.
    fn direction(
        &self,
        ws: &Workspace,
        x: &ConeVec,
        rd: &ConeVec,
        sigma_mu: f64,
        corr: Option<&ConeVec>,
    ) -> (ConeVec, DVector<f64>, ConeVec) {
        // Q = sigma_mu Z^-1 - X Rd Z^-1 - corr
        let mut q = ConeVec::zeros(&self.dims, self.n_lin);
        for (blk, qm) in q.mats.iter_mut().enumerate() {
            *qm = &ws.zinv[blk] * sigma_mu - &x.mats[blk] * &rd.mats[blk] * &ws.zinv[blk];
        }
        q.lin = &ws.zinv_lin * sigma_mu - x.lin.component_mul(&rd.lin).component_mul(&ws.zinv_lin);
        if let Some(c) = corr {
            q.axpy(-1.0, c);
        }
        let rhs = &self.b - self.apply_a(&q);
        let dy = ws.schur.solve(&rhs);
        let mut dz = rd.clone();
        dz.axpy(-1.0, &self.apply_at(&dy));
        let mut dx = ConeVec::zeros(&self.dims, self.n_lin);
        for (blk, dm) in dx.mats.iter_mut().enumerate() {
            *dm = &ws.zinv[blk] * sigma_mu - &x.mats[blk] - &x.mats[blk] * &dz.mats[blk] * &ws.zinv[blk];
        }
        dx.lin = &ws.zinv_lin * sigma_mu - &x.lin - x.lin.component_mul(&dz.lin).component_mul(&ws.zinv_lin);
        if let Some(c) = corr {
            dx.axpy(-1.0, c);
        }
        dx.symmetrize();
        (dx, dy, dz)
    }

    fn correction(&self, ws: &Workspace, dx: &ConeVec, dz: &ConeVec) -> ConeVec {
        let mut c = ConeVec::zeros(&self.dims, self.n_lin);
        for (blk, cm) in c.mats.iter_mut().enumerate() {
            *cm = &dx.mats[blk] * &dz.mats[blk] * &ws.zinv[blk];
        }
        c.lin = dx.lin.component_mul(&dz.lin).component_mul(&ws.zinv_lin);
        c
    }

    pub fn solve(&self, tol: f64) -> IpmResult {
        let nu = self.nu();
        let b_norm = self.b.norm();
        let c_norm = self.c.norm();
        let a_max = self.a.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let ratio = self
            .a
            .iter()
            .zip(self.b.iter())
            .map(|(a, b)| (1.0 + b.abs()) / (1.0 + a.norm()))
            .fold(0.0, f64::max);
        let xi = 10f64.max(nu.sqrt()).max(nu * ratio);
        let eta = 10f64.max(nu.sqrt()).max(c_norm).max(a_max);
        let mut x = ConeVec::identity(&self.dims, self.n_lin).scaled(xi);
        let mut z = ConeVec::identity(&self.dims, self.n_lin).scaled(eta);
        let mut y = DVector::zeros(self.a.len());
        let mut small_steps = 0;

        #[allow(clippy::too_many_arguments)]
        let result = |outcome: Outcome,
                      x: &ConeVec,
                      _y: &DVector<f64>,
                      it: usize,
                      pobj: f64,
                      dobj: f64,
                      pinf: f64,
                      dinf: f64,
                      gap: f64| IpmResult {
            outcome,
            x: x.clone(),
            iterations: it,
            pobj,
            dobj,
            pinf,
            dinf,
            gap,
        };

        let mut last = (0.0, 0.0, f64::INFINITY, f64::INFINITY, f64::INFINITY);
        for iter in 0..MAX_ITER {
            let rp = &self.b - self.apply_a(&x);
            let mut rd = self.c.clone();
            rd.axpy(-1.0, &z);
            rd.axpy(-1.0, &self.apply_at(&y));
            let pobj = self.c.dot(&x);
            let dobj = self.b.dot(&y);
            let xz = x.dot(&z);
            let mu = xz / nu;
            let pinf = rp.norm() / (1.0 + b_norm);
            let dinf = rd.norm() / (1.0 + c_norm);
            let denom = 1.0 + pobj.abs() + dobj.abs();
            let gap = (pobj - dobj).abs().max(xz.max(0.0)) / denom;
            last = (pobj, dobj, pinf, dinf, gap);
            if !(mu.is_finite() && pobj.is_finite() && dobj.is_finite()) {
                return result(Outcome::Stalled, &x, &y, iter, pobj, dobj, pinf, dinf, gap);
            }
            if pinf <= tol && dinf <= tol && gap <= tol {
                return result(Outcome::Converged, &x, &y, iter, pobj, dobj, pinf, dinf, gap);
            }
            // Farkas-type certificates from the current iterate.
            if dobj > 0.0 {
                let mut aty = self.apply_at(&y);
                aty.axpy(1.0, &z);
                if aty.norm() / dobj < CERT_TOL {
                    return result(Outcome::PrimalInfeasible, &x, &y, iter, pobj, dobj, pinf, dinf, gap);
                }
            }
            if pobj < 0.0 && (self.b.clone() - &rp).norm() / (-pobj) < CERT_TOL {
                return result(Outcome::DualInfeasible, &x, &y, iter, pobj, dobj, pinf, dinf, gap);
            }

            let Some(ws) = self.workspace(&x, &z) else {
                return result(Outcome::Stalled, &x, &y, iter, pobj, dobj, pinf, dinf, gap);
            };

            let (dxa, _, dza) = self.direction(&ws, &x, &rd, 0.0, None);
            let (Some(sp), Some(sd)) = (max_step(&x, &dxa), max_step(&z, &dza)) else {
                return result(Outcome::Stalled, &x, &y, iter, pobj, dobj, pinf, dinf, gap);
            };
            let (ap, ad) = (sp.min(1.0), sd.min(1.0));
            let mut xa = x.clone();
            xa.axpy(ap, &dxa);
            let mut za = z.clone();
            za.axpy(ad, &dza);
            let mu_aff = xa.dot(&za) / nu;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            let corr = self.correction(&ws, &dxa, &dza);
            let (dx, dy, dz) = self.direction(&ws, &x, &rd, sigma * mu, Some(&corr));
            let (Some(sp), Some(sd)) = (max_step(&x, &dx), max_step(&z, &dz)) else {
                return result(Outcome::Stalled, &x, &y, iter, pobj, dobj, pinf, dinf, gap);
            };
            let ap = (STEP_FRACTION * sp).min(1.0);
            let ad = (STEP_FRACTION * sd).min(1.0);
            x.axpy(ap, &dx);
            y.axpy(ad, &dy, 1.0);
            z.axpy(ad, &dz);
            x.symmetrize();
            z.symmetrize();

            if ap < 1e-9 && ad < 1e-9 {
                small_steps += 1;
                if small_steps >= 3 {
                    return result(Outcome::Stalled, &x, &y, iter + 1, pobj, dobj, pinf, dinf, gap);
                }
            } else {
                small_steps = 0;
            }
        }
        let (pobj, dobj, pinf, dinf, gap) = last;
        result(Outcome::Stalled, &x, &y, MAX_ITER, pobj, dobj, pinf, dinf, gap)
    }

    /// Optimal value of `min s  s.t.  A(X) + s (b - A(I)) = b`, which is
    /// positive exactly when the original constraints have no solution.
    pub fn phase_one_value(&self, tol: f64) -> f64 {
        let e = ConeVec::identity(&self.dims, self.n_lin);
        let r = &self.b - self.apply_a(&e);
        let a = self
            .a
            .iter()
            .zip(r.iter())
            .map(|(ai, ri)| {
                let mut lin = ai.lin.clone().insert_row(self.n_lin, 0.0);
                lin[self.n_lin] = *ri;
                ConeVec { mats: ai.mats.clone(), lin }
            })
            .collect();
        let mut c = ConeVec::zeros(&self.dims, self.n_lin + 1);
        c.lin[self.n_lin] = 1.0;
        let aux = StandardSdp { dims: self.dims.clone(), n_lin: self.n_lin + 1, c, a, b: self.b.clone() };
        let res = aux.solve(tol);
        match res.outcome {
            Outcome::Converged | Outcome::Stalled => res.pobj.max(res.dobj),
            Outcome::PrimalInfeasible => f64::INFINITY,
            Outcome::DualInfeasible => f64::NEG_INFINITY,
        }
    }
}
