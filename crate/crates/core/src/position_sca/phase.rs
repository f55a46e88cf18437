//! Plane-wave phase sums `e(r) = c + sum_p a_p exp(-j k d_p^T r)` and
//! weighted sums of their squared magnitudes.

use num_complex::Complex64;

/// One plane-wave term `coef * exp(-j k dir^T r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTerm {
    pub coef: Complex64,
    pub dir: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseSum {
    pub constant: Complex64,
    pub terms: Vec<PhaseTerm>,
}

fn dot(a: [f64; 2], r: [f64; 2]) -> f64 {
    a[0] * r[0] + a[1] * r[1]
}

impl PhaseSum {
    pub fn value(&self, r: [f64; 2], k: f64) -> Complex64 {
        self.terms.iter().fold(self.constant, |acc, t| acc + t.coef * Complex64::from_polar(1.0, -k * dot(t.dir, r)))
    }

    /// `(de/dx, de/dy)`.
    pub fn gradient(&self, r: [f64; 2], k: f64) -> [Complex64; 2] {
        let mut g = [Complex64::new(0.0, 0.0); 2];
        for t in &self.terms {
            let e = t.coef * Complex64::from_polar(1.0, -k * dot(t.dir, r)) * Complex64::new(0.0, -k);
            g[0] += e * t.dir[0];
            g[1] += e * t.dir[1];
        }
        g
    }

    /// `|e(r)|^2`.
    pub fn power(&self, r: [f64; 2], k: f64) -> f64 {
        self.value(r, k).norm_sqr()
    }

    pub fn power_gradient(&self, r: [f64; 2], k: f64) -> [f64; 2] {
        let e = self.value(r, k).conj();
        let g = self.gradient(r, k);
        [2.0 * (e * g[0]).re, 2.0 * (e * g[1]).re]
    }

    /// All (coefficient, direction) pairs with the constant as a zero-direction term.
    fn all_terms(&self) -> impl Iterator<Item = (Complex64, [f64; 2])> + '_ {
        std::iter::once((self.constant, [0.0, 0.0])).chain(self.terms.iter().map(|t| (t.coef, t.dir)))
    }

    /// `|e|^2` expanded as `sum_{p,q} |a_p||a_q| cos(k (d_q - d_p)^T r + arg a_p - arg a_q)`.
    pub fn power_cosine_form(&self, r: [f64; 2], k: f64) -> f64 {
        let all: Vec<_> = self.all_terms().collect();
        let mut s = 0.0;
        for &(ap, dp) in &all {
            for &(aq, dq) in &all {
                let d = [dq[0] - dp[0], dq[1] - dp[1]];
                s += ap.norm() * aq.norm() * (k * dot(d, r) + ap.arg() - aq.arg()).cos();
            }
        }
        s
    }

    /// Upper bound on the spectral norm of the Hessian of `|e|^2` valid for
    /// every `r`: `k^2 sum_{p != q} |a_p||a_q| ||d_p - d_q||^2`.
    pub fn power_curvature_bound(&self, k: f64) -> f64 {
        let all: Vec<_> = self.all_terms().collect();
        let mut s = 0.0;
        for (i, &(ap, dp)) in all.iter().enumerate() {
            for &(aq, dq) in &all[i + 1..] {
                let d2 = (dp[0] - dq[0]).powi(2) + (dp[1] - dq[1]).powi(2);
                s += 2.0 * ap.norm() * aq.norm() * d2;
            }
        }
        k * k * s
    }
}

/// `offset + sum_i weight_i |e_i(r)|^2` with nonnegative weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerSum {
    pub parts: Vec<(f64, PhaseSum)>,
    pub offset: f64,
}

impl PowerSum {
    pub fn value(&self, r: [f64; 2], k: f64) -> f64 {
        self.offset + self.parts.iter().map(|(w, e)| w * e.power(r, k)).sum::<f64>()
    }

    pub fn gradient(&self, r: [f64; 2], k: f64) -> [f64; 2] {
        self.parts.iter().fold([0.0; 2], |acc, (w, e)| {
            let g = e.power_gradient(r, k);
            [acc[0] + w * g[0], acc[1] + w * g[1]]
        })
    }

    pub fn cosine_form(&self, r: [f64; 2], k: f64) -> f64 {
        self.offset + self.parts.iter().map(|(w, e)| w * e.power_cosine_form(r, k)).sum::<f64>()
    }

    pub fn curvature_bound(&self, k: f64) -> f64 {
        self.parts.iter().map(|(w, e)| w * e.power_curvature_bound(k)).sum()
    }
}
