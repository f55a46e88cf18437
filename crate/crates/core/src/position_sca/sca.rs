use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::context::{CommTerms, QuadraticBound, RatioTerms, RxObjectiveContext, TxObjectiveContext};
use super::region::{distance_linearization, feasible_set, region_half_planes, FeasibleSet, HalfPlane};
use crate::channel_model::{AntennaLayout, Position2D, Region};
use crate::convex_kernel::{solve_qcqp, QcqpProblem, QuadConstraint, DEFAULT_QCQP_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaConfig {
    /// Cap on surrogate re-expansions per antenna.
    pub max_iterations: usize,
    /// Stop once the relative gain of one iteration falls below this.
    pub rel_tol: f64,
    pub solver_tol: f64,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self { max_iterations: 15, rel_tol: 1e-4, solver_tol: DEFAULT_QCQP_TOL }
    }
}

/// One accepted iterate. `alpha`, `beta`, `chi` are the slack values of the
/// surrogate problem (numerator bound, denominator bound, ratio) and
/// `varsigma` the arithmetic-geometric weight used to build it. Iteration 0
/// is the incumbent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaState {
    pub antenna: usize,
    pub iteration: usize,
    pub position: Position2D,
    pub alpha: f64,
    pub beta: f64,
    pub chi: f64,
    pub varsigma: f64,
    /// Exact ratio at `position`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaStop {
    Converged,
    IterationCap,
    /// The linearized feasible set is a single point.
    Pinned,
    /// The surrogate problem had no strictly feasible point or the solver broke down.
    SolverFailure,
    /// The surrogate step did not improve the exact objective.
    Rejected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome {
    pub position: Position2D,
    pub ratio_before: f64,
    pub ratio_after: f64,
    pub accepted: usize,
    pub stop: ScaStop,
    pub trace: Vec<ScaState>,
}

/// Delimited trace: `antenna,iteration,x,y,alpha,beta,chi,varsigma,ratio`.
pub fn trace_to_text(trace: &[ScaState]) -> String {
    let mut out = String::from("antenna,iteration,x,y,alpha,beta,chi,varsigma,ratio\n");
    for s in trace {
        writeln!(
            out,
            "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            s.antenna, s.iteration, s.position.x, s.position.y, s.alpha, s.beta, s.chi, s.varsigma, s.ratio
        )
        .unwrap();
    }
    out
}

/// Local coordinates `r(s) = origin + lambda E s` of the surrogate problem.
struct Chart {
    origin: Position2D,
    basis: Vec<[f64; 2]>,
    lambda: f64,
    /// `a^T s + b <= 0` rows.
    rows: Vec<(Vec<f64>, f64)>,
}

impl Chart {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn point(&self, s: &[f64]) -> Position2D {
        let mut p = self.origin;
        for (e, v) in self.basis.iter().zip(s) {
            p.x += self.lambda * v * e[0];
            p.y += self.lambda * v * e[1];
        }
        p
    }

    fn coords(&self, p: &Position2D) -> Vec<f64> {
        let d = [(p.x - self.origin.x) / self.lambda, (p.y - self.origin.y) / self.lambda];
        self.basis.iter().map(|e| e[0] * d[0] + e[1] * d[1]).collect()
    }

    /// `scale * q(r(s))` as `(curvature, linear, constant)` in `s`.
    fn pull_back(&self, q: &QuadraticBound, scale: f64) -> (f64, Vec<f64>, f64) {
        let l = self.lambda;
        let c = [(self.origin.x - q.anchor.x) / l, (self.origin.y - q.anchor.y) / l];
        let kappa = q.curvature * l * l;
        let lin = self
            .basis
            .iter()
            .map(|e| scale * (l * (q.grad[0] * e[0] + q.grad[1] * e[1]) + kappa * (c[0] * e[0] + c[1] * e[1])))
            .collect();
        let cst = scale * (q.value + l * (q.grad[0] * c[0] + q.grad[1] * c[1]) + 0.5 * kappa * (c[0] * c[0] + c[1] * c[1]));
        (scale * kappa, lin, cst)
    }

    fn half_plane_row(&self, h: &HalfPlane) -> (Vec<f64>, f64) {
        // -(n^T r(s) - offset) <= 0
        let a = self.basis.iter().map(|e| -(h.normal[0] * e[0] + h.normal[1] * e[1])).collect();
        (a, (h.offset - h.normal[0] * self.origin.x - h.normal[1] * self.origin.y) / self.lambda)
    }
}

fn chart_for(set: &FeasibleSet, anchor: Position2D, cuts: &[HalfPlane], region: &Region, lambda: f64) -> Option<Chart> {
    match set {
        FeasibleSet::Empty | FeasibleSet::Point(_) => None,
        FeasibleSet::Segment(a, b) => {
            let len = a.distance(b);
            let e = [(b.x - a.x) / len, (b.y - a.y) / len];
            Some(Chart { origin: *a, basis: vec![e], lambda, rows: vec![(vec![-1.0], 0.0), (vec![1.0], -len / lambda)] })
        }
        FeasibleSet::Polygon(_) => {
            let mut chart = Chart { origin: anchor, basis: vec![[1.0, 0.0], [0.0, 1.0]], lambda, rows: vec![] };
            chart.rows = cuts.iter().chain(region_half_planes(region).iter()).map(|h| chart.half_plane_row(h)).collect();
            Some(chart)
        }
    }
}

/// Assembles `max chi` over `z = (s, chi, beta)` with the surrogate
/// constraints normalized at the anchor.
fn surrogate_problem(chart: &Chart, objective: &RatioTerms, comm: &[&CommTerms], anchor: Position2D) -> QcqpProblem {
    let d = chart.dim();
    let n = d + 2;
    let (ic, ib) = (d, d + 1);
    let (f_lo, g_hi) = objective.surrogates(anchor);
    let (f0, g0) = (f_lo.value, g_hi.value);
    let quad = |curv: f64, extra: &[(usize, f64)]| {
        let mut p = DMatrix::zeros(n, n);
        for i in 0..d {
            p[(i, i)] = curv;
        }
        for &(i, v) in extra {
            p[(i, i)] = v;
        }
        p
    };
    let vec_of = |lin: &[f64], extra: &[(usize, f64)]| {
        let mut a = DVector::zeros(n);
        a.rows_mut(0, d).copy_from_slice(lin);
        for &(i, v) in extra {
            a[i] = v;
        }
        a
    };

    let mut cons = Vec::new();
    // (chi^2 + beta^2) / 2 - f_lower / f0 <= 0, the arithmetic-geometric
    // majorant of chi * beta with unit weight at the anchor.
    let (kf, lf, cf) = chart.pull_back(&f_lo, -1.0 / f0);
    cons.push(QuadConstraint::quadratic("ratio", quad(kf, &[(ic, 1.0), (ib, 1.0)]), vec_of(&lf, &[]), cf));
    let (kg, lg, cg) = chart.pull_back(&g_hi, 1.0 / g0);
    cons.push(QuadConstraint::quadratic("denominator", quad(kg, &[]), vec_of(&lg, &[(ib, -1.0)]), cg));
    for u in comm {
        let (lo, hi) = u.sinr.surrogates(anchor);
        let scale = 1.0 / hi.value;
        let (k1, l1, c1) = chart.pull_back(&hi, u.gamma * scale);
        let (k2, l2, c2) = chart.pull_back(&lo, -scale);
        let lin: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| a + b).collect();
        cons.push(QuadConstraint::quadratic(format!("comm{}", u.user), quad(k1 + k2, &[]), vec_of(&lin, &[]), c1 + c2));
    }
    for (i, (a, b)) in chart.rows.iter().enumerate() {
        cons.push(QuadConstraint::linear(format!("geom{i}"), vec_of(a, &[]), *b));
    }
    cons.push(QuadConstraint::linear("chi", vec_of(&vec![0.0; d], &[(ic, -1.0)]), 0.0));

    let mut objective_vec = DVector::zeros(n);
    objective_vec[ic] = 1.0;
    let mut z0 = DVector::zeros(n);
    z0.rows_mut(0, d).copy_from_slice(&chart.coords(&anchor));
    z0[ic] = 1.0;
    z0[ib] = 1.0;
    QcqpProblem { objective: objective_vec, constraints: cons, initial: Some(z0) }
}

fn comm_ok(comm: &[&CommTerms], before: &Position2D, after: &Position2D) -> bool {
    comm.iter().all(|u| {
        let new = u.sinr.ratio(after);
        new >= u.gamma * (1.0 - 1e-9) || new >= u.sinr.ratio(before)
    })
}

/// Longest doubling of the accepted step `from -> to` that stays feasible and
/// keeps raising the exact ratio. The surrogate curvature is a global bound,
/// so its steps are short wherever the true curvature is mild.
#[allow(clippy::too_many_arguments)]
fn extrapolate(
    objective: &RatioTerms,
    comm: &[&CommTerms],
    region: &Region,
    others: &[Position2D],
    spacing: f64,
    from: Position2D,
    to: Position2D,
    ratio: f64,
) -> (Position2D, f64) {
    let step = [to.x - from.x, to.y - from.y];
    let (mut best, mut best_ratio) = (to, ratio);
    let mut t = 2.0;
    while t <= EXTRAPOLATION_MAX {
        let p = Position2D::new(from.x + t * step[0], from.y + t * step[1]);
        if !region.contains(&p, 0.0)
            || others.iter().any(|b| p.distance(b) < spacing)
            || !comm_ok(comm, &best, &p)
        {
            break;
        }
        let v = objective.ratio(&p);
        if !(v > best_ratio) {
            break;
        }
        (best, best_ratio) = (p, v);
        t *= 2.0;
    }
    (best, best_ratio)
}

const EXTRAPOLATION_MAX: f64 = 1024.0;

#[allow(clippy::too_many_arguments)]
fn optimize_position(
    index: usize,
    positions: &[Position2D],
    objective: &RatioTerms,
    comm: &[CommTerms],
    region: &Region,
    spacing: f64,
    cfg: &ScaConfig,
) -> Result<ScaOutcome> {
    if index >= positions.len() {
        return Err(Error::InvalidConfig(format!("antenna {index} out of range")));
    }
    let lambda = objective.wavelength;
    let tol = 1e-9 * lambda;
    // A zero threshold is met by every position.
    let comm: Vec<&CommTerms> = comm.iter().filter(|u| u.gamma > 0.0).collect();
    let others: Vec<Position2D> =
        positions.iter().enumerate().filter(|(i, _)| *i != index).map(|(_, p)| *p).collect();

    let mut r = positions[index];
    let (f0, g0) = objective.eval_fg(&r);
    let ratio_before = f0 / g0;
    let state = |iteration, position, alpha, beta, chi, varsigma, ratio| ScaState {
        antenna: index,
        iteration,
        position,
        alpha,
        beta,
        chi,
        varsigma,
        ratio,
    };
    let mut trace = vec![state(0, r, f0, g0, ratio_before, g0 / ratio_before, ratio_before)];
    let mut ratio = ratio_before;
    let mut accepted = 0;
    let mut stop = ScaStop::IterationCap;
    if !(f0 > 0.0 && g0 > 0.0) {
        stop = ScaStop::SolverFailure;
    }

    for it in 1..=cfg.max_iterations {
        if stop != ScaStop::IterationCap {
            break;
        }
        let cuts = others.iter().map(|b| distance_linearization(&r, b, spacing)).collect::<Result<Vec<_>>>()?;
        let set = feasible_set(region, &cuts, tol);
        let Some(chart) = chart_for(&set, r, &cuts, region, lambda) else {
            stop = ScaStop::Pinned;
            break;
        };
        let problem = surrogate_problem(&chart, objective, &comm, r);
        let sol = match solve_qcqp(&problem, cfg.solver_tol) {
            Ok(s) => s,
            Err(Error::Infeasible(_) | Error::NumericalFailure(_)) => {
                stop = ScaStop::SolverFailure;
                break;
            }
            Err(e) => return Err(e),
        };
        let d = chart.dim();
        let cand = region.clamp(chart.point(&sol.z.as_slice()[..d]));
        let spaced = others.iter().all(|b| cand.distance(b) >= spacing - 2.0 * tol);
        let (f, g) = objective.eval_fg(&cand);
        let new_ratio = f / g;
        if !(spaced && new_ratio >= ratio && comm_ok(&comm, &r, &cand)) {
            stop = ScaStop::Rejected;
            break;
        }
        let (cand, new_ratio) = extrapolate(objective, &comm, region, &others, spacing, r, cand, new_ratio);
        let (fa, ga) = objective.eval_fg(&r);
        let (chi, beta) = (sol.z[d], sol.z[d + 1]);
        trace.push(state(
            it,
            cand,
            0.5 * (chi * chi + beta * beta) * fa,
            beta * ga,
            chi * fa / ga,
            ga * ga / fa,
            new_ratio,
        ));
        let gain = (new_ratio - ratio) / ratio;
        r = cand;
        ratio = new_ratio;
        accepted += 1;
        if gain < cfg.rel_tol {
            stop = ScaStop::Converged;
        }
    }
    Ok(ScaOutcome { position: r, ratio_before, ratio_after: ratio, accepted, stop, trace })
}

/// Moves receive antenna `m` by SCA on the sensing SINR; other antennas,
/// beams and the transmit layout stay fixed.
pub fn optimize_rx_position(
    m: usize,
    layout: &AntennaLayout,
    ctx: &RxObjectiveContext,
    region: &Region,
    spacing: f64,
    cfg: &ScaConfig,
) -> Result<ScaOutcome> {
    optimize_position(m, &layout.rx, &ctx.objective, &[], region, spacing, cfg)
}

/// Moves transmit antenna `n` by SCA on the sensing SINR while keeping every
/// user's SINR above its threshold.
pub fn optimize_tx_position(
    n: usize,
    layout: &AntennaLayout,
    ctx: &TxObjectiveContext,
    region: &Region,
    spacing: f64,
    cfg: &ScaConfig,
) -> Result<ScaOutcome> {
    optimize_position(n, &layout.tx, &ctx.objective, &ctx.users, region, spacing, cfg)
}
