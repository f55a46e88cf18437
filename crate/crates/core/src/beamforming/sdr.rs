use num_complex::Complex64;

use crate::channel_model::{comm_sinr, sensing_sinr_parts, ScenarioConfig, SensingScene};
use crate::convex_kernel::{
    normalize_phase, principal_eigvec, reduce_rank, solve_sdp, HermitianMatrix, LinearForm, Relation, SdpConstraint, SdpProblem, SolveStatus,
};
use crate::{CVector, Error, Result};

/// Largest acceptable `lambda_2 / lambda_1` of a solved beam covariance.
pub const RANK_ONE_THRESHOLD: f64 = 1e-3;

/// Accepted range of the Charnes-Cooper variable before re-solving with a
/// better denominator scale.
const ELL_RANGE: (f64, f64) = (0.1, 10.0);
const RESCALE_PASSES: usize = 4;

/// Relative tolerance for the transmit constraints after recovery.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Per-user thresholds, noise and the total power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub max_power: f64,
    pub noise_user: f64,
    /// Linear SINR thresholds, one per user.
    pub gamma: Vec<f64>,
}

impl LinkBudget {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self { max_power: cfg.max_power(), noise_user: cfg.noise_user(), gamma: cfg.gamma_th() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightnessReport {
    /// `lambda_2 / lambda_1` per communication beam, then, when radar beams
    /// exist, `lambda_{N-K+1} / lambda_1` of the aggregated radar covariance
    /// (the part the `N - K` radar beams cannot represent).
    pub ratios: Vec<f64>,
    /// Charnes-Cooper scale of the solved problem.
    pub ell: Option<f64>,
    pub repaired: bool,
}

impl TightnessReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_tight(&self) -> bool {
        self.max_ratio() <= RANK_ONE_THRESHOLD
    }
}

/// Descending, clipped spectrum of a Hermitian block.
fn spectrum(b: &HermitianMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = b.eigh().0.iter().map(|x| x.max(0.0)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `lambda_{r+1} / lambda_1`, or zero for blocks negligible next to `top`.
fn residual_ratio(spec: &[f64], rank: usize, top: f64) -> f64 {
    match (spec.first(), spec.get(rank)) {
        (Some(&l1), Some(&lr)) if l1 > 1e-12 * top && l1 > 0.0 => (lr / l1).clamp(0.0, 1.0),
        _ => 0.0,
    }
}

/// Eigenvalue ratio `lambda_2 / lambda_1` of each block. Blocks that are
/// negligible next to the largest one count as rank one.
pub fn verify_rank1(blocks: &[HermitianMatrix]) -> TightnessReport {
    let spectra: Vec<Vec<f64>> = blocks.iter().map(spectrum).collect();
    let top = spectra.iter().filter_map(|s| s.first().copied()).fold(0.0, f64::max);
    let ratios = spectra.iter().map(|s| residual_ratio(s, 1, top)).collect();
    TightnessReport { ratios, ell: None, repaired: false }
}

#[derive(Debug, Clone)]
pub struct SdrOutcome {
    /// `N` transmit beams: communication beams first.
    pub tx: Vec<CVector>,
    /// Optimal value of the relaxed problem.
    pub objective: f64,
    /// Sensing SINR of the recovered beams.
    pub achieved: f64,
    pub report: TightnessReport,
    pub status: SolveStatus,
}

/// Power-normalized data of the transmit design problem.
struct Normalized {
    n: usize,
    k: usize,
    /// `|a_d|^2 P / s_r^2 * H_d^H u u^H H_d`.
    target: HermitianMatrix,
    /// Same for the sum over clutters.
    clutter: Option<HermitianMatrix>,
    /// `P / s_k^2 * h_k h_k^H`.
    users: Vec<HermitianMatrix>,
    /// `||u||^2`.
    noise: f64,
}

impl Normalized {
    fn new(users: &[CVector], scene: &SensingScene, rx: &CVector, budget: &LinkBudget) -> Result<Self> {
        let n = scene.n_tx();
        let k = users.len();
        if budget.gamma.len() != k {
            return Err(Error::InvalidConfig(format!("{} thresholds for {k} users", budget.gamma.len())));
        }
        if k > n {
            return Err(Error::InvalidConfig(format!("{k} users need at least as many beams, have {n}")));
        }
        if users.iter().any(|h| h.len() != n) || rx.len() != scene.n_rx() {
            return Err(Error::InvalidConfig("channel dimensions are inconsistent".into()));
        }
        if !(budget.max_power > 0.0 && budget.noise_user > 0.0 && scene.noise > 0.0) {
            return Err(Error::InvalidConfig("powers must be positive".into()));
        }
        if budget.gamma.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidConfig("thresholds must be finite and nonnegative".into()));
        }
        let p = budget.max_power;
        let project = |h: &crate::CMatrix, w: f64| HermitianMatrix::outer(&(h.adjoint() * rx)).scaled(w * p / scene.noise);
        let target = project(&scene.target, scene.target_rcs.norm_sqr());
        let clutter = scene
            .clutters
            .iter()
            .zip(&scene.clutter_rcs)
            .map(|(h, a)| project(h, a.norm_sqr()))
            .reduce(|a, b| a.add(&b));
        let users = users.iter().map(|h| HermitianMatrix::outer(h).scaled(p / budget.noise_user)).collect();
        Ok(Self { n, k, target, clutter, users, noise: rx.norm_squared() })
    }

    /// Communication blocks `0..K`, then one aggregated radar block.
    fn num_blocks(&self) -> usize {
        if self.n > self.k {
            self.k + 1
        } else {
            self.k
        }
    }

    fn sum_form(&self, m: &HermitianMatrix) -> LinearForm {
        (0..self.num_blocks()).fold(LinearForm::new(), |f, b| f.term(b, m.clone()))
    }

    fn comm_constraint(&self, k: usize, gamma: f64, with_ell: bool) -> SdpConstraint {
        let mut form = LinearForm::new();
        for b in 0..self.num_blocks() {
            let coef = if b == k { 1.0 } else { -gamma };
            form = form.term(b, self.users[k].scaled(coef));
        }
        let rhs = if with_ell {
            form = form.scalar(0, -gamma);
            0.0
        } else {
            gamma
        };
        SdpConstraint::new(format!("sinr_user{k}"), form, Relation::Ge, rhs)
    }
}

/// Relaxed transmit design: maximize the sensing SINR for a fixed receive
/// filter subject to per-user SINR thresholds and the power budget, via the
/// Charnes-Cooper linearization of the fractional objective.
pub fn build_transmit_sdp(users: &[CVector], scene: &SensingScene, rx: &CVector, budget: &LinkBudget) -> Result<SdpProblem> {
    let nz = Normalized::new(users, scene, rx, budget)?;
    Ok(transmit_problem(&nz, budget, nz.isotropic_denominator()))
}

impl Normalized {
    /// Denominator of the normalized SINR for isotropic full-power beams.
    fn isotropic_denominator(&self) -> f64 {
        self.noise + self.clutter.as_ref().map_or(0.0, |c| c.trace() / self.n as f64)
    }
}

/// `scale` is the expected denominator at the optimum. The Charnes-Cooper
/// variable then equals `scale / denominator`, so a good guess keeps it near
/// one and the problem well conditioned.
fn transmit_problem(nz: &Normalized, budget: &LinkBudget, scale: f64) -> SdpProblem {
    let blocks = nz.num_blocks();
    let inv = 1.0 / scale;
    let mut norm = LinearForm::new().scalar(0, nz.noise * inv);
    if let Some(c) = &nz.clutter {
        norm.terms = nz.sum_form(&c.scaled(inv)).terms;
    }
    let mut constraints = vec![SdpConstraint::new("normalization", norm, Relation::Eq, 1.0)];
    for k in 0..nz.k {
        constraints.push(nz.comm_constraint(k, budget.gamma[k], true));
    }
    let power = nz.sum_form(&HermitianMatrix::identity(nz.n)).scalar(0, -1.0);
    constraints.push(SdpConstraint::new("power", power, Relation::Le, 0.0));
    SdpProblem { block_dims: vec![nz.n; blocks], num_scalars: 1, objective: nz.sum_form(&nz.target.scaled(inv)), constraints }
}

/// Violations of the per-user SINR and power constraints, relative to their
/// right-hand sides. Empty when all hold to `rel_tol`.
pub fn transmit_violations(tx: &[CVector], users: &[CVector], budget: &LinkBudget, rel_tol: f64) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for (k, h) in users.iter().enumerate() {
        let s = comm_sinr(k, h, tx, budget.noise_user);
        let g = budget.gamma[k];
        if s < g * (1.0 - rel_tol) {
            out.push((format!("sinr_user{k}"), (g - s) / g.max(f64::MIN_POSITIVE)));
        }
    }
    let p: f64 = tx.iter().map(|w| w.norm_squared()).sum();
    if p > budget.max_power * (1.0 + rel_tol) {
        out.push(("power".into(), (p - budget.max_power) / budget.max_power));
    }
    out
}

/// Rescales beams until every user threshold holds and the power budget is
/// met. Each weak user beam gets the exact factor that lifts its SINR to the
/// threshold; excess power is taken from the radar beams first.
fn restore_feasibility(tx: &mut [CVector], users: &[CVector], budget: &LinkBudget) -> bool {
    let k = users.len();
    for _ in 0..200 {
        let mut changed = false;
        for (i, h) in users.iter().enumerate() {
            let g = budget.gamma[i];
            let s = comm_sinr(i, h, tx, budget.noise_user);
            if s < g {
                let signal = h.dotc(&tx[i]).norm_sqr();
                if signal <= 0.0 {
                    return false;
                }
                let rest = signal / s;
                let factor = (g * rest / signal * (1.0 + 1e-10)).sqrt();
                tx[i] *= Complex64::new(factor, 0.0);
                changed = true;
            }
        }
        let total: f64 = tx.iter().map(|w| w.norm_squared()).sum();
        if total > budget.max_power {
            let excess = total - budget.max_power;
            let radar: f64 = tx[k..].iter().map(|w| w.norm_squared()).sum();
            if radar > excess {
                let f = ((radar - excess) / radar).sqrt();
                tx[k..].iter_mut().for_each(|w| *w *= Complex64::new(f, 0.0));
            } else {
                let f = (budget.max_power / total).sqrt();
                tx.iter_mut().for_each(|w| *w *= Complex64::new(f, 0.0));
            }
            changed = true;
        }
        if !changed {
            return true;
        }
    }
    transmit_violations(tx, users, budget, 1e-9).is_empty()
}

/// Solves the relaxed transmit problem, recovers `W_n = X_n / l`, extracts
/// rank-one beams and checks tightness.
pub fn transmit_sdr(
    users: &[CVector],
    scene: &SensingScene,
    rx: &CVector,
    budget: &LinkBudget,
    tol: f64,
) -> Result<SdrOutcome> {
    let nz = Normalized::new(users, scene, rx, budget)?;
    let mut scale = nz.isotropic_denominator();
    let mut attempt = 0;
    let (problem, raw) = loop {
        let problem = transmit_problem(&nz, budget, scale);
        let raw = solve_sdp(&problem, tol)?;
        let ell = raw.scalars[0];
        if !(ell > 0.0) {
            return Err(Error::NumericalFailure(format!("Charnes-Cooper scale is not positive ({ell:.3e})")));
        }
        attempt += 1;
        if (ELL_RANGE.0..=ELL_RANGE.1).contains(&ell) || attempt == RESCALE_PASSES {
            break (problem, raw);
        }
        scale /= ell;
    };
    let sol = reduce_rank(&problem, &raw);
    let ell = sol.scalars[0];
    let covariances: Vec<HermitianMatrix> = sol.blocks.iter().map(|x| x.scaled(1.0 / ell)).collect();
    let spectra: Vec<Vec<f64>> = covariances.iter().map(spectrum).collect();
    let top = spectra.iter().filter_map(|s| s.first().copied()).fold(0.0, f64::max);
    let n_radar = nz.n - nz.k;
    let mut ratios: Vec<f64> = spectra[..nz.k].iter().map(|s| residual_ratio(s, 1, top)).collect();
    if n_radar > 0 {
        ratios.push(residual_ratio(&spectra[nz.k], n_radar, top));
    }
    let mut report = TightnessReport { ratios, ell: Some(ell), repaired: false };

    let p = budget.max_power;
    let mut tx: Vec<CVector> = covariances[..nz.k]
        .iter()
        .map(|w| {
            let (l, v) = principal_eigvec(w);
            v * Complex64::new((l.max(0.0) * p).sqrt(), 0.0)
        })
        .collect();
    if n_radar > 0 {
        // Radar beams carry the leading eigenpairs of the radar covariance.
        let (values, vectors) = covariances[nz.k].eigh();
        for i in 0..n_radar {
            let idx = nz.n - 1 - i;
            let mut v = vectors.column(idx).into_owned();
            normalize_phase(&mut v);
            tx.push(v * Complex64::new((values[idx].max(0.0) * p).sqrt(), 0.0));
        }
    }

    let tight = report.is_tight();
    let feasible = restore_feasibility(&mut tx, users, budget);
    if !tight {
        if !feasible {
            return Err(Error::TightnessViolation { ratio: report.max_ratio() });
        }
        report.repaired = true;
    } else if !feasible {
        return Err(Error::NumericalFailure("recovered beams violate the transmit constraints".into()));
    }
    let achieved = sensing_sinr_parts(&tx, rx, scene).ratio();
    Ok(SdrOutcome { tx, objective: sol.status.objective, achieved, report, status: sol.status })
}

#[derive(Debug, Clone)]
pub struct PowerMinResult {
    /// Minimum total transmit power reaching the requested sensing SINR.
    pub power: f64,
    /// Sensing SINR attained by the relaxed minimizer.
    pub achieved: f64,
    pub status: SolveStatus,
}

/// Minimizes total power subject to sensing SINR `>= gamma_star` and the user
/// thresholds. At the optimal `gamma_star` of [`transmit_sdr`] the minimum
/// power equals the budget.
pub fn power_min_crosscheck(
    gamma_star: f64,
    users: &[CVector],
    scene: &SensingScene,
    rx: &CVector,
    budget: &LinkBudget,
    tol: f64,
) -> Result<PowerMinResult> {
    if !(gamma_star >= 0.0 && gamma_star.is_finite()) {
        return Err(Error::InvalidConfig(format!("target sensing SINR {gamma_star} is invalid")));
    }
    let nz = Normalized::new(users, scene, rx, budget)?;
    let sense_matrix = match &nz.clutter {
        Some(c) => nz.target.add(&c.scaled(-gamma_star)),
        None => nz.target.clone(),
    };
    let mut constraints = vec![SdpConstraint::new("sensing", nz.sum_form(&sense_matrix), Relation::Ge, gamma_star * nz.noise)];
    for k in 0..nz.k {
        constraints.push(nz.comm_constraint(k, budget.gamma[k], false));
    }
    let identity = HermitianMatrix::identity(nz.n);
    let problem = SdpProblem {
        block_dims: vec![nz.n; nz.num_blocks()],
        num_scalars: 0,
        objective: nz.sum_form(&identity.scaled(-1.0)),
        constraints,
    };
    let sol = solve_sdp(&problem, tol)?;
    let trace: f64 = sol.blocks.iter().map(|b| b.trace()).sum();
    let signal: f64 = sol.blocks.iter().map(|b| nz.target.trace_inner(b)).sum();
    let clutter: f64 = nz.clutter.as_ref().map_or(0.0, |c| sol.blocks.iter().map(|b| c.trace_inner(b)).sum());
    Ok(PowerMinResult { power: trace * budget.max_power, achieved: signal / (clutter + nz.noise), status: sol.status })
}
