//! Minimal dense complex matrix algebra: multiplication, adjoints, and a
//! cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Every matrix this crate touches is small (two-site gates are `d^2 x d^2`,
//! reduced density matrices are at most `d^(N/2)` dimensional, projector
//! sums at most `d^N` with `d^N <= a few thousand`), so a straightforward
//! row-major `Vec<Complex64>` with `O(n^3)` kernels is all that is needed.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::{numerical_err, Result};
// f64 math comes from num-traits under no_std; with std linked the
// inherent methods win and this import is unused.
#[allow(unused_imports)]
use num_traits::Float;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n_rows: usize,
    n_cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CMat {
            n_rows,
            n_cols,
            data: vec![Complex64::new(0.0, 0.0); n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(n_rows, n_cols);
        for r in 0..n_rows {
            for c in 0..n_cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn from_rows(n_rows: usize, n_cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), n_rows * n_cols, "row-major data length mismatch");
        CMat { n_rows, n_cols, data }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.n_cols, rhs.n_rows, "matmul dimension mismatch");
        let mut out = CMat::zeros(self.n_rows, rhs.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[i * rhs.n_cols..(i + 1) * rhs.n_cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row.iter()) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.n_cols, self.n_rows);
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.n_rows, self.n_cols), (rhs.n_rows, rhs.n_cols));
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *o += b;
        }
        out
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.n_rows, self.n_cols), (rhs.n_rows, rhs.n_cols));
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *o -= b;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o *= s;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.n_rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Squared Frobenius norm, `sum_ij |m_ij|^2`.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entry magnitude of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &CMat) -> f64 {
        assert_eq!((self.n_rows, self.n_cols), (rhs.n_rows, rhs.n_cols));
        self.data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Deviation from Hermiticity, `max_ij |m_ij - conj(m_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for r in 0..self.n_rows {
            for c in r..self.n_cols {
                let diff = (self[(r, c)] - self[(c, r)].conj()).norm();
                worst = worst.max(diff);
            }
        }
        worst
    }

    /// Deviation from unitarity, `max |U^dag U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&CMat::identity(self.n_rows))
    }

    /// Kronecker product `self (x) rhs`, used only by test oracles and by
    /// the dense moment construction.
    pub fn kron(&self, rhs: &CMat) -> CMat {
        let (ar, ac, br, bc) = (self.n_rows, self.n_cols, rhs.n_rows, rhs.n_cols);
        let mut out = CMat::zeros(ar * br, ac * bc);
        for i in 0..ar {
            for j in 0..ac {
                let a = self[(i, j)];
                for k in 0..br {
                    for l in 0..bc {
                        out[(i * br + k, j * bc + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n_cols, v.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_rows];
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, &x) in self.row(r).iter().zip(v.iter()) {
                acc += a * x;
            }
            *o = acc;
        }
        out
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.n_cols + c]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.n_cols + c]
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// the unitary whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector for `eigenvalues[j]`.
    pub eigenvectors: CMat,
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation annihilates one off-diagonal pair with the unitary
/// `[[c, -s], [s e^{-i phi}, c e^{-i phi}]]` where `phi` is the phase of the
/// targeted entry; off-diagonal mass decreases monotonically, so the sweep
/// count is bounded in practice (~8 sweeps at n = 81).
pub fn hermitian_eigen(matrix: &CMat, tol: f64) -> Result<HermitianEigen> {
    assert!(matrix.is_square(), "eigendecomposition needs a square matrix");
    let n = matrix.n_rows();
    let defect = matrix.hermiticity_defect();
    if defect > tol {
        return numerical_err(alloc::format!(
            "hermitian_eigen: input deviates from Hermiticity by {defect:e}"
        ));
    }
    let mut a = matrix.clone();
    // Symmetrize exactly so roundoff in the caller cannot bias the sweep.
    for r in 0..n {
        for c in (r + 1)..n {
            let avg = (a[(r, c)] + a[(c, r)].conj()) * 0.5;
            a[(r, c)] = avg;
            a[(c, r)] = avg.conj();
        }
        a[(r, r)] = Complex64::new(a[(r, r)].re, 0.0);
    }
    let mut vecs = CMat::identity(n);
    let scale = a.max_abs().max(1e-300);
    let off_tol = 1e-15 * scale * (n as f64);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for r in 0..n {
            for c in (r + 1)..n {
                off = off.max(a[(r, c)].norm());
            }
        }
        if off <= off_tol {
            return Ok(sorted_eigen(a, vecs));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let m = apq.norm();
                if m <= off_tol * 1e-2 {
                    continue;
                }
                let phase = apq / m; // e^{i phi}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (app - aqq) / (2.0 * m);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column update: A <- A V with V the plane rotation.
                let (vpp, vpq) = (Complex64::new(c, 0.0), Complex64::new(-s, 0.0));
                let (vqp, vqq) = (phase.conj() * s, phase.conj() * c);
                for r in 0..n {
                    let (arp, arq) = (a[(r, p)], a[(r, q)]);
                    a[(r, p)] = arp * vpp + arq * vqp;
                    a[(r, q)] = arp * vpq + arq * vqq;
                    let (wrp, wrq) = (vecs[(r, p)], vecs[(r, q)]);
                    vecs[(r, p)] = wrp * vpp + wrq * vqp;
                    vecs[(r, q)] = wrp * vpq + wrq * vqq;
                }
                // Row update: A <- V^dag A.
                for r in 0..n {
                    let (apr, aqr) = (a[(p, r)], a[(q, r)]);
                    a[(p, r)] = vpp.conj() * apr + vqp.conj() * aqr;
                    a[(q, r)] = vpq.conj() * apr + vqq.conj() * aqr;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    numerical_err("hermitian_eigen: Jacobi sweeps did not converge")
}

fn sorted_eigen(a: CMat, vecs: CMat) -> HermitianEigen {
    let n = a.n_rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = CMat::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    HermitianEigen { eigenvalues, eigenvectors }
}

/// `f(A) = V diag(f(lambda)) V^dag` for Hermitian `A`.
pub fn hermitian_matrix_function(
    matrix: &CMat,
    tol: f64,
    mut f: impl FnMut(f64) -> Complex64,
) -> Result<CMat> {
    let eig = hermitian_eigen(matrix, tol)?;
    let n = matrix.n_rows();
    let v = &eig.eigenvectors;
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let fk = f(eig.eigenvalues[k]);
        for r in 0..n {
            let vr = v[(r, k)] * fk;
            for c in 0..n {
                out[(r, c)] += vr * v[(c, k)].conj();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded_rng, uniform_f64};

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut rng = seeded_rng(seed);
        let g = CMat::from_fn(n, n, |_, _| {
            Complex64::new(uniform_f64(&mut rng) - 0.5, uniform_f64(&mut rng) - 0.5)
        });
        g.add(&g.adjoint()).scale(Complex64::new(0.5, 0.0))
    }

    #[test]
    fn matmul_identity() {
        let a = random_hermitian(7, 1);
        let i = CMat::identity(7);
        assert!(a.mul(&i).max_abs_diff(&a) == 0.0);
        assert!(i.mul(&a).max_abs_diff(&a) == 0.0);
    }

    #[test]
    fn kron_dimensions_and_values() {
        let a = CMat::from_fn(2, 2, |r, c| Complex64::new((r * 2 + c) as f64, 0.0));
        let b = CMat::identity(3);
        let k = a.kron(&b);
        assert_eq!(k.n_rows(), 6);
        assert_eq!(k[(0, 3)], Complex64::new(1.0, 0.0));
        assert_eq!(k[(1, 4)], Complex64::new(1.0, 0.0));
        assert_eq!(k[(3, 0)], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn jacobi_reconstructs_input() {
        for n in [2usize, 3, 8, 17, 33] {
            let a = random_hermitian(n, 40 + n as u64);
            let eig = hermitian_eigen(&a, 1e-10).unwrap();
            let v = &eig.eigenvectors;
            assert!(v.unitarity_defect() < 1e-12, "eigenvectors not unitary at n={n}");
            let mut rebuilt = CMat::zeros(n, n);
            for k in 0..n {
                for r in 0..n {
                    for c in 0..n {
                        rebuilt[(r, c)] +=
                            v[(r, k)] * v[(c, k)].conj() * eig.eigenvalues[k];
                    }
                }
            }
            assert!(
                rebuilt.max_abs_diff(&a) < 1e-12 * (1.0 + a.max_abs()),
                "reconstruction failed at n={n}"
            );
            for w in eig.eigenvalues.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn jacobi_known_spectrum() {
        // Pauli X has eigenvalues -1, +1.
        let mut x = CMat::zeros(2, 2);
        x[(0, 1)] = Complex64::new(1.0, 0.0);
        x[(1, 0)] = Complex64::new(1.0, 0.0);
        let eig = hermitian_eigen(&x, 1e-12).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = CMat::identity(3);
        a[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(hermitian_eigen(&a, 1e-12).is_err());
    }

    #[test]
    fn matrix_function_exponential_is_unitary() {
        let h = random_hermitian(9, 7);
        let u = hermitian_matrix_function(&h, 1e-10, |lam| {
            Complex64::new(0.0, lam).exp()
        })
        .unwrap();
        assert!(u.unitarity_defect() < 1e-12);
    }
}
