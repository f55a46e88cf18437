use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{CMatrix, CVector, Error, Result};

/// Square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Accepts `m` if it is Hermitian to `1e-12` relative, then symmetrizes it exactly.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidConfig(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
        }
        let skew = (&m - m.adjoint()).norm();
        if skew > 1e-12 * (1.0 + m.norm()) {
            return Err(Error::InvalidConfig(format!("matrix is not Hermitian (skew norm {skew:.3e})")));
        }
        Ok(Self::symmetrized(m))
    }

    /// `(m + m^H) / 2` without any check.
    pub fn symmetrized(m: CMatrix) -> Self {
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Self(h)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    /// `v v^H`.
    pub fn outer(v: &CVector) -> Self {
        Self::symmetrized(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Re tr(self * other)`, the real inner product on Hermitian matrices.
    pub fn trace_inner(&self, other: &HermitianMatrix) -> f64 {
        self.0.iter().zip(other.0.transpose().iter()).map(|(a, b)| (a * b).re).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(&self.0 * Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &HermitianMatrix) -> Self {
        Self(&self.0 + &other.0)
    }

    /// Eigenvalues in ascending order with matching unit eigenvectors as columns.
    pub fn eigh(&self) -> (DVector<f64>, CMatrix) {
        let eig = self.0.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(self.dim(), order.iter().map(|&i| eig.eigenvalues[i]));
        let vectors = CMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
        (values, vectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().0[0]
    }

    /// Real symmetric embedding `[[Re, -Im], [Im, Re]]` of size `2n`.
    pub fn real_embedding(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut y = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.0[(i, j)];
                y[(i, j)] = z.re;
                y[(i + n, j + n)] = z.re;
                y[(i, j + n)] = -z.im;
                y[(i + n, j)] = z.im;
            }
        }
        y
    }

    /// Projects a real symmetric `2n x 2n` matrix back onto the embedded
    /// Hermitian structure. PSD inputs give PSD outputs.
    pub fn from_real_embedding(y: &DMatrix<f64>) -> Self {
        let n = y.nrows() / 2;
        let m = CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(
                0.5 * (y[(i, j)] + y[(i + n, j + n)]),
                0.5 * (y[(i + n, j)] - y[(i, j + n)]),
            )
        });
        Self::symmetrized(m)
    }
}

/// Rotates `v` so its largest-magnitude entry is real and positive.
pub fn normalize_phase(v: &mut CVector) {
    if let Some((_, z)) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, z)| (i, *z))
    {
        if z.norm() > 0.0 {
            let rot = z.conj() / z.norm();
            v.iter_mut().for_each(|x| *x *= rot);
        }
    }
}

/// Largest eigenvalue of a Hermitian matrix with its unit eigenvector, phase
/// fixed by [`normalize_phase`].
pub fn principal_eigvec(a: &HermitianMatrix) -> (f64, CVector) {
    let (values, vectors) = a.eigh();
    let last = a.dim() - 1;
    let mut v = vectors.column(last).into_owned();
    v /= Complex64::new(v.norm(), 0.0);
    normalize_phase(&mut v);
    (values[last], v)
}
