use std::fmt::Write as _;

use nalgebra::DVector;

use super::hermitian::HermitianMatrix;
use super::ipm::{ConeVec, Outcome, StandardSdp};
use super::{SolveStatus, StatusKind};
use crate::{Error, Result};

/// `sum_j Re tr(M_j X_{block_j}) + sum_s c_s l_s` over Hermitian blocks and
/// nonnegative scalars.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearForm {
    pub terms: Vec<(usize, HermitianMatrix)>,
    pub scalars: Vec<(usize, f64)>,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, block: usize, m: HermitianMatrix) -> Self {
        self.terms.push((block, m));
        self
    }

    pub fn scalar(mut self, index: usize, coef: f64) -> Self {
        self.scalars.push((index, coef));
        self
    }

    pub fn evaluate(&self, blocks: &[HermitianMatrix], scalars: &[f64]) -> f64 {
        self.terms.iter().map(|(b, m)| m.trace_inner(&blocks[*b])).sum::<f64>()
            + self.scalars.iter().map(|(i, c)| c * scalars[*i]).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpConstraint {
    pub label: String,
    pub form: LinearForm,
    pub relation: Relation,
    pub rhs: f64,
}

impl SdpConstraint {
    pub fn new(label: impl Into<String>, form: LinearForm, relation: Relation, rhs: f64) -> Self {
        Self { label: label.into(), form, relation, rhs }
    }

    /// Signed violation: positive when the constraint is broken.
    pub fn violation(&self, blocks: &[HermitianMatrix], scalars: &[f64]) -> f64 {
        let v = self.form.evaluate(blocks, scalars);
        match self.relation {
            Relation::Le => v - self.rhs,
            Relation::Ge => self.rhs - v,
            Relation::Eq => (v - self.rhs).abs(),
        }
    }
}

/// Maximize a trace-linear objective over Hermitian PSD blocks and
/// nonnegative scalars subject to trace-linear constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub num_scalars: usize,
    pub objective: LinearForm,
    pub constraints: Vec<SdpConstraint>,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub blocks: Vec<HermitianMatrix>,
    pub scalars: Vec<f64>,
    pub status: SolveStatus,
}

impl SdpProblem {
    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let forms = std::iter::once(&self.objective).chain(self.constraints.iter().map(|c| &c.form));
        for f in forms {
            for (b, m) in &f.terms {
                if *b >= self.block_dims.len() {
                    return bad(format!("term refers to block {b} of {}", self.block_dims.len()));
                }
                if m.dim() != self.block_dims[*b] {
                    return bad(format!("term for block {b} has dimension {}", m.dim()));
                }
            }
            if f.scalars.iter().any(|(i, _)| *i >= self.num_scalars) {
                return bad("scalar index out of range".into());
            }
        }
        if self.constraints.iter().any(|c| !c.rhs.is_finite()) {
            return bad("constraint right-hand sides must be finite".into());
        }
        Ok(())
    }

    /// Plain-text listing of objective and constraints, one matrix row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# maisac sdp v1").unwrap();
        writeln!(out, "blocks {}", self.block_dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")).unwrap();
        writeln!(out, "scalars {}", self.num_scalars).unwrap();
        let form = |out: &mut String, f: &LinearForm| {
            for (b, m) in &f.terms {
                writeln!(out, "  block {b}").unwrap();
                for row in m.as_matrix().row_iter() {
                    let cells: Vec<String> = row.iter().map(|z| format!("{:+.17e}{:+.17e}j", z.re, z.im)).collect();
                    writeln!(out, "    {}", cells.join(" ")).unwrap();
                }
            }
            for (i, c) in &f.scalars {
                writeln!(out, "  scalar {i} {c:+.17e}").unwrap();
            }
        };
        writeln!(out, "maximize").unwrap();
        form(&mut out, &self.objective);
        for c in &self.constraints {
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "==",
            };
            writeln!(out, "constraint {} {rel} {:+.17e}", c.label, c.rhs).unwrap();
            form(&mut out, &c.form);
        }
        out
    }

    /// Real standard form with unit-norm rows. Returns the problem and the
    /// objective scale.
    fn to_standard(&self) -> (StandardSdp, f64) {
        let dims: Vec<usize> = self.block_dims.iter().map(|d| 2 * d).collect();
        let n_ineq = self.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let n_lin = self.num_scalars + n_ineq;
        let embed = |f: &LinearForm| {
            let mut v = ConeVec::zeros(&dims, n_lin);
            for (b, m) in &f.terms {
                v.mats[*b] += m.real_embedding() * 0.5;
            }
            for (i, c) in &f.scalars {
                v.lin[*i] += c;
            }
            v
        };
        let mut c = embed(&self.objective).scaled(-1.0);
        let c_norm = c.norm();
        let c_scale = if c_norm > 0.0 { 1.0 / c_norm } else { 1.0 };
        c = c.scaled(c_scale);

        let mut a = Vec::with_capacity(self.constraints.len());
        let mut b = DVector::zeros(self.constraints.len());
        let mut slack = self.num_scalars;
        for (i, con) in self.constraints.iter().enumerate() {
            let mut row = embed(&con.form);
            match con.relation {
                Relation::Le => {
                    row.lin[slack] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    row.lin[slack] = -1.0;
                    slack += 1;
                }
                Relation::Eq => {}
            }
            let norm = row.norm().max(f64::MIN_POSITIVE);
            a.push(row.scaled(1.0 / norm));
            b[i] = con.rhs / norm;
        }
        (StandardSdp { dims, n_lin, c, a, b }, c_scale)
    }
}

fn status_from(kind: StatusKind, r: &super::ipm::IpmResult, c_scale: f64) -> SolveStatus {
    SolveStatus {
        kind,
        iterations: r.iterations,
        primal_residual: r.pinf,
        dual_residual: r.dinf,
        gap: r.gap,
        objective: -r.pobj / c_scale,
        dual_objective: -r.dobj / c_scale,
    }
}

/// Solves a Hermitian SDP through its real symmetric embedding.
///
/// Returns [`Error::Infeasible`] when the constraints admit no PSD point and
/// [`Error::NumericalFailure`] when the interior-point iteration breaks down
/// without an infeasibility certificate.
pub fn solve_sdp(problem: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    problem.check()?;
    let (std, c_scale) = problem.to_standard();
    let res = std.solve(tol);
    let kind = match res.outcome {
        Outcome::Converged => StatusKind::Optimal,
        Outcome::PrimalInfeasible => {
            return Err(Error::Infeasible(format!("SDP infeasibility certificate after {} iterations", res.iterations)));
        }
        Outcome::DualInfeasible => {
            return Err(Error::NumericalFailure("SDP objective is unbounded".into()));
        }
        Outcome::Stalled => {
            let loose = tol.sqrt();
            if res.pinf <= loose && res.dinf <= loose && res.gap <= loose {
                StatusKind::MaxIterations
            } else if std.phase_one_value(tol) > 1e-6 {
                return Err(Error::Infeasible("SDP phase-one value is positive".into()));
            } else {
                return Err(Error::NumericalFailure(format!(
                    "SDP stalled after {} iterations (pinf {:.2e}, dinf {:.2e}, gap {:.2e})",
                    res.iterations, res.pinf, res.dinf, res.gap
                )));
            }
        }
    };
    let blocks = res.x.mats.iter().map(HermitianMatrix::from_real_embedding).collect();
    let scalars = res.x.lin.rows(0, problem.num_scalars).iter().copied().collect();
    Ok(SdpSolution { blocks, scalars, status: status_from(kind, &res, c_scale) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{CMatrix, CVector};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
        let m = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        HermitianMatrix::symmetrized(m)
    }

    #[test]
    fn trace_bound() {
        let p = SdpProblem {
            block_dims: vec![2],
            num_scalars: 0,
            objective: LinearForm::new().term(0, HermitianMatrix::identity(2)),
            constraints: vec![SdpConstraint::new("tr", LinearForm::new().term(0, HermitianMatrix::identity(2)), Relation::Le, 1.0)],
        };
        let s = solve_sdp(&p, 1e-7).unwrap();
        assert_eq!(s.status.kind, StatusKind::Optimal);
        assert!((s.status.objective - 1.0).abs() < 1e-6);
        assert!(s.blocks[0].min_eigenvalue() >= -1e-7);
    }

    #[test]
    fn max_eigenvalue_of_complex_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let a = random_hermitian(&mut rng, 4);
            let p = SdpProblem {
                block_dims: vec![4],
                num_scalars: 0,
                objective: LinearForm::new().term(0, a.clone()),
                constraints: vec![SdpConstraint::new("tr", LinearForm::new().term(0, HermitianMatrix::identity(4)), Relation::Eq, 1.0)],
            };
            let s = solve_sdp(&p, 1e-9).unwrap();
            let lmax = a.eigh().0[3];
            assert!((s.status.objective - lmax).abs() < 1e-6, "{} vs {lmax}", s.status.objective);
            assert!(s.status.dual_objective >= s.status.objective - 1e-7);
            for i in 0..4 {
                assert!(s.blocks[0].as_matrix()[(i, i)].im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn scalar_variables_and_ge_rows() {
        // max -l  s.t.  l >= 2, tr X = l  -> -2.
        let p = SdpProblem {
            block_dims: vec![2],
            num_scalars: 1,
            objective: LinearForm::new().scalar(0, -1.0),
            constraints: vec![
                SdpConstraint::new("lo", LinearForm::new().scalar(0, 1.0), Relation::Ge, 2.0),
                SdpConstraint::new(
                    "link",
                    LinearForm::new().term(0, HermitianMatrix::identity(2)).scalar(0, -1.0),
                    Relation::Eq,
                    0.0,
                ),
            ],
        };
        let s = solve_sdp(&p, 1e-8).unwrap();
        assert!((s.status.objective + 2.0).abs() < 1e-6);
        assert!((s.scalars[0] - 2.0).abs() < 1e-5);
        assert!((s.blocks[0].trace() - 2.0).abs() < 1e-5);
    }

    #[test]
    fn detects_infeasible_trace_constraints() {
        // tr X <= 1 and <h h^H, X> >= 1e6 with |h| = 1.
        let h = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let p = SdpProblem {
            block_dims: vec![2],
            num_scalars: 0,
            objective: LinearForm::new().term(0, HermitianMatrix::identity(2)),
            constraints: vec![
                SdpConstraint::new("power", LinearForm::new().term(0, HermitianMatrix::identity(2)), Relation::Le, 1.0),
                SdpConstraint::new("snr", LinearForm::new().term(0, HermitianMatrix::outer(&h)), Relation::Ge, 1e6),
            ],
        };
        assert!(matches!(solve_sdp(&p, 1e-7), Err(Error::Infeasible(_))));
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let p = SdpProblem {
            block_dims: vec![2],
            num_scalars: 0,
            objective: LinearForm::new().term(0, HermitianMatrix::identity(3)),
            constraints: vec![],
        };
        assert!(matches!(solve_sdp(&p, 1e-7), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn text_dump_lists_constraints() {
        let p = SdpProblem {
            block_dims: vec![1],
            num_scalars: 1,
            objective: LinearForm::new().term(0, HermitianMatrix::identity(1)),
            constraints: vec![SdpConstraint::new("cap", LinearForm::new().scalar(0, 1.0), Relation::Le, 1.0)],
        };
        let text = p.to_text();
        assert!(text.contains("constraint cap <="));
        assert!(text.contains("maximize"));
        assert!(text.contains("scalar 0"));
    }
}
