use nalgebra::{DMatrix, DVector};

use super::{SolveStatus, StatusKind};
use crate::{Error, Result};

/// `1/2 z^T P z + a^T z + b <= 0` with `P` positive semidefinite (or absent).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadConstraint {
    pub label: String,
    pub p: Option<DMatrix<f64>>,
    pub a: DVector<f64>,
    pub b: f64,
}

impl QuadConstraint {
    pub fn linear(label: impl Into<String>, a: DVector<f64>, b: f64) -> Self {
        Self { label: label.into(), p: None, a, b }
    }

    pub fn quadratic(label: impl Into<String>, p: DMatrix<f64>, a: DVector<f64>, b: f64) -> Self {
        Self { label: label.into(), p: Some(p), a, b }
    }

    pub fn value(&self, z: &DVector<f64>) -> f64 {
        let quad = self.p.as_ref().map_or(0.0, |p| 0.5 * z.dot(&(p * z)));
        quad + self.a.dot(z) + self.b
    }

    pub fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        match &self.p {
            Some(p) => p * z + &self.a,
            None => self.a.clone(),
        }
    }

    /// Same constraint in a space with `extra` trailing variables, minus
    /// `shift` times the first of them.
    fn lifted(&self, extra: usize, shift: f64) -> Self {
        let n = self.a.len();
        let mut a = self.a.clone().resize_vertically(n + extra, 0.0);
        if extra > 0 {
            a[n] = -shift;
        }
        let p = self.p.as_ref().map(|p| p.clone().resize(n + extra, n + extra, 0.0));
        Self { label: self.label.clone(), p, a, b: self.b }
    }
}

/// Maximize `c^T z` subject to convex quadratic constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct QcqpProblem {
    pub objective: DVector<f64>,
    pub constraints: Vec<QuadConstraint>,
    /// Starting point; need not be strictly feasible. Zeros if absent.
    pub initial: Option<DVector<f64>>,
}

#[derive(Debug, Clone)]
pub struct QcqpSolution {
    pub z: DVector<f64>,
    pub status: SolveStatus,
}

impl QcqpProblem {
    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    pub fn max_violation(&self, z: &DVector<f64>) -> f64 {
        self.constraints.iter().map(|c| c.value(z)).fold(f64::NEG_INFINITY, f64::max)
    }
}

const BARRIER_GROWTH: f64 = 20.0;
const MAX_NEWTON: usize = 400;

struct Barrier<'a> {
    /// Minimized linear objective.
    c: &'a DVector<f64>,
    cons: &'a [QuadConstraint],
}

struct BarrierResult {
    z: DVector<f64>,
    t: f64,
    newton_steps: usize,
    converged: bool,
}

impl Barrier<'_> {
    fn phi(&self, z: &DVector<f64>, t: f64) -> f64 {
        let mut v = t * self.c.dot(z);
        for c in self.cons {
            let q = c.value(z);
            if q >= 0.0 {
                return f64::INFINITY;
            }
            v -= (-q).ln();
        }
        v
    }

    fn newton_step(&self, z: &DVector<f64>, t: f64) -> Option<(DVector<f64>, DVector<f64>)> {
        let n = z.len();
        let mut g = self.c * t;
        let mut h = DMatrix::zeros(n, n);
        for c in self.cons {
            let q = c.value(z);
            let grad = c.gradient(z);
            g += &grad / (-q);
            h += &grad * grad.transpose() / (q * q);
            if let Some(p) = &c.p {
                h += p / (-q);
            }
        }
        let scale = h.diagonal().amax().max(1e-300);
        let mut ridge = 0.0;
        loop {
            let hr = &h + DMatrix::identity(n, n) * ridge;
            if let Some(ch) = hr.cholesky() {
                return Some((-ch.solve(&g), g));
            }
            ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 100.0 };
            if ridge > 1e-2 * scale {
                return None;
            }
        }
    }

    /// Sequential barrier minimization of `c^T z` from a strictly feasible
    /// `z`, stopping early once `stop(z)` holds.
    fn run(&self, mut z: DVector<f64>, tol: f64, stop: impl Fn(&DVector<f64>) -> bool) -> Result<BarrierResult> {
        let m = self.cons.len().max(1) as f64;
        let mut t = 1.0;
        let mut steps = 0;
        loop {
            loop {
                if stop(&z) {
                    return Ok(BarrierResult { z, t, newton_steps: steps, converged: true });
                }
                let Some((dz, g)) = self.newton_step(&z, t) else {
                    return Err(Error::NumericalFailure("barrier Hessian is singular".into()));
                };
                let decrement = -g.dot(&dz);
                if decrement / 2.0 <= 1e-10 || !decrement.is_finite() {
                    break;
                }
                steps += 1;
                if steps > MAX_NEWTON {
                    return Ok(BarrierResult { z, t, newton_steps: steps, converged: false });
                }
                let phi0 = self.phi(&z, t);
                let mut s = 1.0;
                let mut moved = false;
                for _ in 0..40 {
                    let cand = &z + &dz * s;
                    let phi = self.phi(&cand, t);
                    if phi < phi0 && phi <= phi0 - 0.01 * s * decrement {
                        z = cand;
                        moved = true;
                        break;
                    }
                    s *= 0.5;
                }
                if !moved {
                    break;
                }
            }
            if m / t < tol {
                return Ok(BarrierResult { z, t, newton_steps: steps, converged: true });
            }
            t *= BARRIER_GROWTH;
        }
    }
}

/// Log-barrier interior-point solve of a small convex QCQP.
///
/// The supplied start may sit on the boundary; a phase-one problem then
/// finds a strictly feasible point. The returned objective is never worse
/// than that of a feasible start.
pub fn solve_qcqp(problem: &QcqpProblem, tol: f64) -> Result<QcqpSolution> {
    let n = problem.dim();
    let start = problem.initial.clone().unwrap_or_else(|| DVector::zeros(n));
    if start.len() != n || problem.constraints.iter().any(|c| c.a.len() != n) {
        return Err(Error::InvalidConfig("QCQP dimensions are inconsistent".into()));
    }
    if problem.constraints.iter().any(|c| c.p.as_ref().is_some_and(|p| p.shape() != (n, n))) {
        return Err(Error::InvalidConfig("QCQP quadratic form has the wrong shape".into()));
    }

    let mut phase_one_steps = 0;
    let start_violation = problem.max_violation(&start);
    let interior = if start_violation < 0.0 {
        start.clone()
    } else {
        // min s  s.t.  q_i(z) <= s,  s >= s_floor.
        let s0 = start_violation + 1.0 + start_violation.abs();
        let floor = -1.0 - start_violation.abs();
        let mut cons: Vec<QuadConstraint> = problem.constraints.iter().map(|c| c.lifted(1, 1.0)).collect();
        let mut bound = DVector::zeros(n + 1);
        bound[n] = -1.0;
        cons.push(QuadConstraint::linear("floor", bound, floor));
        let mut c = DVector::zeros(n + 1);
        c[n] = 1.0;
        let z0 = start.clone().insert_row(n, s0);
        let stop = |z: &DVector<f64>| z[n] < 0.0 && problem.max_violation(&z.rows(0, n).into_owned()) < 0.0;
        let res = Barrier { c: &c, cons: &cons }.run(z0, tol, stop)?;
        phase_one_steps = res.newton_steps;
        let z = res.z.rows(0, n).into_owned();
        if problem.max_violation(&z) >= 0.0 {
            return Err(Error::Infeasible(format!(
                "no strictly feasible point (phase-one value {:.3e})",
                res.z[n]
            )));
        }
        z
    };

    let c = -&problem.objective;
    let res = Barrier { c: &c, cons: &problem.constraints }.run(interior, tol, |_| false)?;
    if !res.converged {
        return Err(Error::NumericalFailure(format!("barrier method did not converge in {MAX_NEWTON} Newton steps")));
    }
    let t = res.t;
    let mut z = res.z;

    // KKT residual with multipliers lambda_i = 1 / (-t q_i).
    let mut stationarity = c.clone();
    for con in &problem.constraints {
        let q = con.value(&z);
        stationarity += con.gradient(&z) / (-t * q);
    }
    let m = problem.constraints.len() as f64;
    let mut objective = problem.objective.dot(&z);
    let start_feasible = start_violation <= tol;
    if start_feasible && problem.objective.dot(&start) > objective {
        z = start.clone();
        objective = problem.objective.dot(&z);
    }
    let status = SolveStatus {
        kind: StatusKind::Optimal,
        iterations: phase_one_steps + res.newton_steps,
        primal_residual: problem.max_violation(&z).max(0.0),
        dual_residual: stationarity.norm(),
        gap: m / t,
        objective,
        dual_objective: objective + m / t,
    };
    Ok(QcqpSolution { z, status })
}
