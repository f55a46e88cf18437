use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::hermitian::HermitianMatrix;
use super::sdp::{LinearForm, SdpProblem, SdpSolution};
use crate::CMatrix;

/// Eigenvalues below this fraction of the largest one are treated as zero.
const RANK_TOL: f64 = 1e-7;
const MAX_STEPS: usize = 200;

/// A block restricted to its range: `X = V diag(lambda) V^H`.
struct Face {
    v: CMatrix,
    lambda: Vec<f64>,
}

impl Face {
    fn new(x: &HermitianMatrix, floor: f64) -> Self {
        let (vals, vecs) = x.eigh();
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > floor).collect();
        let v = CMatrix::from_fn(x.dim(), keep.len(), |r, c| vecs[(r, keep[c])]);
        Self { v, lambda: keep.iter().map(|&i| vals[i]).collect() }
    }

    fn rank(&self) -> usize {
        self.lambda.len()
    }

    fn params(&self) -> usize {
        self.rank() * self.rank()
    }

    fn matrix(&self) -> HermitianMatrix {
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            self.rank(),
            self.lambda.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        HermitianMatrix::symmetrized(&self.v * d * self.v.adjoint())
    }

    /// Coefficients of `Re tr(A V S V^H)` in the real basis of Hermitian `S`.
    fn coefficients(&self, a: &HermitianMatrix, out: &mut [f64]) {
        let r = self.rank();
        let t = self.v.adjoint() * a.as_matrix() * &self.v;
        let mut i = 0;
        for j in 0..r {
            out[i] += t[(j, j)].re;
            i += 1;
            for k in j + 1..r {
                out[i] += 2.0 * t[(j, k)].re;
                out[i + 1] += 2.0 * t[(j, k)].im;
                i += 2;
            }
        }
    }

    /// Hermitian `S` from its real basis coordinates.
    fn direction(&self, p: &[f64]) -> CMatrix {
        let r = self.rank();
        let mut s = CMatrix::zeros(r, r);
        let mut i = 0;
        for j in 0..r {
            s[(j, j)] = Complex64::new(p[i], 0.0);
            i += 1;
            for k in j + 1..r {
                let z = Complex64::new(p[i], p[i + 1]);
                s[(j, k)] = z;
                s[(k, j)] = z.conj();
                i += 2;
            }
        }
        s
    }

    /// Eigenvalue range of `Lambda^-1/2 D Lambda^-1/2`.
    fn relative_spread(&self, d: &CMatrix) -> (f64, f64) {
        let r = self.rank();
        let scaled = CMatrix::from_fn(r, r, |j, k| d[(j, k)] / (self.lambda[j] * self.lambda[k]).sqrt());
        let e = HermitianMatrix::symmetrized(scaled).eigh().0;
        (e.min(), e.max())
    }

    /// Moves to `diag(lambda) + t D` and drops eigenvalues that reached zero.
    fn step(&mut self, d: &CMatrix, t: f64, floor: f64) {
        let r = self.rank();
        let mut s = d * Complex64::new(t, 0.0);
        for j in 0..r {
            s[(j, j)] += Complex64::new(self.lambda[j], 0.0);
        }
        let (vals, vecs) = HermitianMatrix::symmetrized(s).eigh();
        let keep: Vec<usize> = (0..r).filter(|&i| vals[i] > floor).collect();
        let u = CMatrix::from_fn(r, keep.len(), |a, b| vecs[(a, keep[b])]);
        self.v = &self.v * u;
        self.lambda = keep.iter().map(|&i| vals[i]).collect();
    }
}

/// Largest `t >= 0` with `1 + t mu >= 0` for every `mu` in `spread`.
fn max_step(spreads: &[(f64, f64)], sign: f64) -> f64 {
    spreads
        .iter()
        .map(|&(lo, hi)| {
            let worst = if sign > 0.0 { lo } else { -hi };
            if worst < -1e-14 { -1.0 / worst } else { f64::INFINITY }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Moves an SDP solution along its optimal face, keeping the objective and
/// every constraint value fixed, until no such direction remains.
///
/// Interior-point methods return the relative interior of the optimal face,
/// which can carry spurious rank. The returned point has
/// `sum_b rank(X_b)^2 + #{l_s > 0}` at most the number of independent forms.
pub fn reduce_rank(problem: &SdpProblem, solution: &SdpSolution) -> SdpSolution {
    let top = solution.blocks.iter().map(|b| b.eigh().0.max()).fold(0.0, f64::max);
    let top = top.max(solution.scalars.iter().fold(0.0, |a, &s| a.max(s)));
    if !(top > 0.0) {
        return solution.clone();
    }
    let floor = RANK_TOL * top;
    let mut faces: Vec<Face> = solution.blocks.iter().map(|b| Face::new(b, floor)).collect();
    let mut scalars = solution.scalars.clone();
    for s in &mut scalars {
        if *s <= floor {
            *s = 0.0;
        }
    }
    let forms: Vec<&LinearForm> =
        std::iter::once(&problem.objective).chain(problem.constraints.iter().map(|c| &c.form)).collect();

    for _ in 0..MAX_STEPS {
        let free: Vec<usize> = (0..scalars.len()).filter(|&i| scalars[i] > 0.0).collect();
        let offsets: Vec<usize> = faces
            .iter()
            .scan(0, |acc, f| {
                let o = *acc;
                *acc += f.params();
                Some(o)
            })
            .collect();
        let n_mat: usize = faces.iter().map(Face::params).sum();
        let p = n_mat + free.len();
        if p == 0 {
            break;
        }

        let mut rows = DMatrix::<f64>::zeros(forms.len(), p);
        for (r, form) in forms.iter().enumerate() {
            let mut row = vec![0.0; p];
            for (b, m) in &form.terms {
                let o = offsets[*b];
                faces[*b].coefficients(m, &mut row[o..o + faces[*b].params()]);
            }
            for (s, c) in &form.scalars {
                if let Some(pos) = free.iter().position(|f| f == s) {
                    // Scale by the current value so all coordinates are relative.
                    row[n_mat + pos] += c * scalars[*s];
                }
            }
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (j, x) in row.iter().enumerate() {
                    rows[(r, j)] = x / norm;
                }
            }
        }

        // Null-space projection of the coordinate axis it preserves best.
        let svd = rows.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let smax = svd.singular_values.max();
        let basis: Vec<usize> =
            (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-10 * smax.max(1e-300)).collect();
        let residual = |j: usize| 1.0 - basis.iter().map(|&i| vt[(i, j)] * vt[(i, j)]).sum::<f64>();
        let (axis, best) = (0..p).map(|j| (j, residual(j))).max_by(|a, b| a.1.total_cmp(&b.1)).expect("p > 0");
        if best < 1e-8 {
            break;
        }
        let mut dir = DVector::<f64>::zeros(p);
        dir[axis] = 1.0;
        for &i in &basis {
            let c = vt[(i, axis)];
            for j in 0..p {
                dir[j] -= c * vt[(i, j)];
            }
        }

        let directions: Vec<CMatrix> =
            faces.iter().zip(&offsets).map(|(f, &o)| f.direction(&dir.as_slice()[o..o + f.params()])).collect();
        let mut spreads: Vec<(f64, f64)> =
            faces.iter().zip(&directions).filter(|(f, _)| f.rank() > 0).map(|(f, d)| f.relative_spread(d)).collect();
        spreads.extend((0..free.len()).map(|i| (dir[n_mat + i], dir[n_mat + i])));

        let (sign, t) = match (max_step(&spreads, 1.0), max_step(&spreads, -1.0)) {
            (a, _) if a.is_finite() => (1.0, a),
            (_, b) if b.is_finite() => (-1.0, b),
            _ => break,
        };
        for (f, d) in faces.iter_mut().zip(&directions) {
            if f.rank() > 0 {
                f.step(d, sign * t, floor);
            }
        }
        for (i, &s) in free.iter().enumerate() {
            let v = scalars[s] * (1.0 + sign * t * dir[n_mat + i]);
            scalars[s] = if v > floor { v } else { 0.0 };
        }
    }

    SdpSolution { blocks: faces.iter().map(Face::matrix).collect(), scalars, status: solution.status }
}
