//! N-qudit statevectors and the operations the brickwork drive needs:
//! product-state construction, two-site gate application by stride
//! contraction, even/odd layers, inner products, half-chain partial trace
//! and von Neumann entropy.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::linalg::{hermitian_eigen, CMat};
use crate::{domain_err, Error, Result};
// f64 math comes from num-traits under no_std; with std linked the
// inherent methods win and this import is unused.
#[allow(unused_imports)]
use num_traits::Float;

/// Eigenvalues below this cutoff contribute nothing to an entropy
/// (the `x ln x -> 0` limit), which keeps logs finite.
pub const ENTROPY_EIGENVALUE_FLOOR: f64 = 1e-12;

/// Pure state of `n_sites` qudits with local dimension `local_dim`,
/// stored as `local_dim^n_sites` amplitudes in the big-endian base-d
/// encoding (site 0 most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    local_dim: usize,
    amplitudes: Vec<Complex64>,
}

/// Two-site gate: a `d^2 x d^2` unitary acting on a pair of neighbouring
/// qudits, with the row/column index encoding `(a, b) -> a * d + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalGate {
    local_dim: usize,
    matrix: CMat,
}

/// Dense density matrix (used for half-chain reductions).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    matrix: CMat,
}

pub fn pow_usize(base: usize, exp: usize) -> usize {
    base.checked_pow(exp as u32).expect("Hilbert space dimension overflow")
}

impl StateVector {
    /// Computational basis product state with the given per-site levels.
    pub fn new_basis_state(n_sites: usize, local_dim: usize, digits: &[usize]) -> Result<Self> {
        if local_dim < 2 {
            return domain_err("local dimension must be at least 2");
        }
        if digits.len() != n_sites {
            return domain_err(alloc::format!(
                "expected {n_sites} digits, got {}",
                digits.len()
            ));
        }
        if let Some(&bad) = digits.iter().find(|&&a| a >= local_dim) {
            return domain_err(alloc::format!("digit {bad} out of range for d={local_dim}"));
        }
        let dim = pow_usize(local_dim, n_sites);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[Self::encode(local_dim, digits)] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_sites, local_dim, amplitudes })
    }

    /// `|+>^(x)N` generalized to qudits: the uniform superposition of all
    /// basis states, amplitude `d^(-N/2)` everywhere.
    pub fn uniform_superposition(n_sites: usize, local_dim: usize) -> Result<Self> {
        if local_dim < 2 {
            return domain_err("local dimension must be at least 2");
        }
        let dim = pow_usize(local_dim, n_sites);
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(StateVector {
            n_sites,
            local_dim,
            amplitudes: vec![amp; dim],
        })
    }

    /// Wrap raw amplitudes (must have product-dimension length and unit norm
    /// up to the caller's tolerance).
    pub fn from_amplitudes(
        n_sites: usize,
        local_dim: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        if amplitudes.len() != pow_usize(local_dim, n_sites) {
            return domain_err("amplitude vector length is not d^N");
        }
        Ok(StateVector { n_sites, local_dim, amplitudes })
    }

    /// Big-endian base-d index of a digit string.
    pub fn encode(local_dim: usize, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &a| acc * local_dim + a)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Apply a two-site gate at sites `(left_site, left_site + 1)` in place.
    pub fn apply_two_site_gate(&mut self, gate: &LocalGate, left_site: usize) -> Result<()> {
        if gate.local_dim != self.local_dim {
            return domain_err("gate local dimension does not match state");
        }
        if left_site + 1 >= self.n_sites {
            return domain_err(alloc::format!(
                "gate at left site {left_site} does not fit on {} sites",
                self.n_sites
            ));
        }
        apply_two_site_gate_slice(
            &mut self.amplitudes,
            self.n_sites,
            self.local_dim,
            &gate.matrix,
            left_site,
        );
        Ok(())
    }

    /// Apply one brickwork layer of the same gate at all even or odd bonds.
    pub fn apply_layer(&mut self, gate: &LocalGate, parity: Parity) -> Result<()> {
        for left in layer_bonds(self.n_sites, parity) {
            self.apply_two_site_gate(gate, left)?;
        }
        Ok(())
    }

    /// `<self|other>` (conjugation on `self`).
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return domain_err("inner product dimension mismatch");
        }
        Ok(inner_product_slices(&self.amplitudes, &other.amplitudes))
    }

    /// Reduced density matrix of the last `N/2` sites (first half traced
    /// out). Requires an even number of sites.
    pub fn partial_trace_half(&self) -> Result<DensityMatrix> {
        if self.n_sites % 2 != 0 {
            return domain_err("half-chain partial trace needs an even number of sites");
        }
        let keep_dim = pow_usize(self.local_dim, self.n_sites / 2);
        let mut rho = CMat::zeros(keep_dim, keep_dim);
        for hi in 0..keep_dim {
            let block = &self.amplitudes[hi * keep_dim..(hi + 1) * keep_dim];
            for r in 0..keep_dim {
                let br = block[r];
                if br == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..keep_dim {
                    rho[(r, c)] += br * block[c].conj();
                }
            }
        }
        Ok(DensityMatrix { dim: keep_dim, matrix: rho })
    }
}

/// Even bonds start at sites 0, 2, 4, ...; odd bonds at 1, 3, 5, ...
/// Boundary sites not covered by a bond are left untouched, matching an
/// open chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Left sites of the bonds making up one layer.
pub fn layer_bonds(n_sites: usize, parity: Parity) -> impl Iterator<Item = usize> {
    let start = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    (start..n_sites.saturating_sub(1)).step_by(2)
}

pub fn inner_product_slices(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    // Four independent accumulators break the dependency chain; this loop
    // dominates the O(T^2 D) metric accumulation.
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let base = c * 4;
        for lane in 0..4 {
            let x = a[base + lane];
            let y = b[base + lane];
            re[lane] += x.re * y.re + x.im * y.im;
            im[lane] += x.re * y.im - x.im * y.re;
        }
    }
    for i in chunks * 4..a.len() {
        let (x, y) = (a[i], b[i]);
        re[0] += x.re * y.re + x.im * y.im;
        im[0] += x.re * y.im - x.im * y.re;
    }
    Complex64::new(re[0] + re[1] + re[2] + re[3], im[0] + im[1] + im[2] + im[3])
}

/// Two-site gate application on a raw amplitude slice: contract the gate
/// with the two-site index pair through stride arithmetic, never forming
/// the `D x D` matrix. Cost `O(D * d^2)`.
pub fn apply_two_site_gate_slice(
    amplitudes: &mut [Complex64],
    n_sites: usize,
    local_dim: usize,
    gate: &CMat,
    left_site: usize,
) {
    let d = local_dim;
    let d2 = d * d;
    debug_assert_eq!(gate.n_rows(), d2);
    // Stride of the right site of the pair; the left site has stride d * step.
    let step = pow_usize(d, n_sites - 2 - left_site);
    let block = step * d2; // span of one (prefix, pair) block
    let n_prefix = pow_usize(d, left_site);
    let mut scratch = vec![Complex64::new(0.0, 0.0); d2];
    for prefix in 0..n_prefix {
        let prefix_base = prefix * block;
        for suffix in 0..step {
            let base = prefix_base + suffix;
            for (pair, slot) in scratch.iter_mut().enumerate() {
                *slot = amplitudes[base + pair * step];
            }
            for row in 0..d2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, &amp) in scratch.iter().enumerate() {
                    acc += gate[(row, col)] * amp;
                }
                amplitudes[base + row * step] = acc;
            }
        }
    }
}

impl LocalGate {
    /// Wrap a `d^2 x d^2` matrix as a two-site gate, checking unitarity.
    pub fn new(local_dim: usize, matrix: CMat) -> Result<Self> {
        let d2 = local_dim * local_dim;
        if matrix.n_rows() != d2 || matrix.n_cols() != d2 {
            return domain_err("gate matrix must be d^2 x d^2");
        }
        let defect = matrix.unitarity_defect();
        if defect > 1e-12 {
            return Err(Error::Numerical(alloc::format!(
                "gate is not unitary (defect {defect:e})"
            )));
        }
        Ok(LocalGate { local_dim, matrix })
    }

    pub fn identity(local_dim: usize) -> Self {
        LocalGate {
            local_dim,
            matrix: CMat::identity(local_dim * local_dim),
        }
    }

    /// SWAP of the two sites.
    pub fn swap(local_dim: usize) -> Self {
        let d = local_dim;
        let mut m = CMat::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                m[(a * d + b, b * d + a)] = Complex64::new(1.0, 0.0);
            }
        }
        LocalGate { local_dim, matrix: m }
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        if !matrix.is_square() {
            return domain_err("density matrix must be square");
        }
        Ok(DensityMatrix { dim: matrix.n_rows(), matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `-sum lambda ln lambda` over eigenvalues above
    /// [`ENTROPY_EIGENVALUE_FLOOR`], in natural-log units.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        let eig = hermitian_eigen(&self.matrix, 1e-12)?;
        let mut s = 0.0;
        for &lam in &eig.eigenvalues {
            if lam > ENTROPY_EIGENVALUE_FLOOR {
                s -= lam * lam.ln();
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::sample_haar_unitary;
    use crate::rng::seeded_rng;

    #[test]
    fn basis_encoding_examples() {
        let s = StateVector::new_basis_state(2, 2, &[0, 0]).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert_eq!(s.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);

        let s = StateVector::new_basis_state(4, 3, &[1, 1, 1, 1]).unwrap();
        assert_eq!(s.amplitudes()[40], Complex64::new(1.0, 0.0));

        let plus = StateVector::uniform_superposition(2, 2).unwrap();
        for a in plus.amplitudes() {
            assert!((a - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn basis_state_rejects_bad_input() {
        assert!(StateVector::new_basis_state(2, 2, &[0, 2]).is_err());
        assert!(StateVector::new_basis_state(2, 1, &[0, 0]).is_err());
        assert!(StateVector::new_basis_state(3, 2, &[0, 0]).is_err());
    }

    #[test]
    fn swap_gate_on_01() {
        let mut s = StateVector::new_basis_state(2, 2, &[0, 1]).unwrap();
        s.apply_two_site_gate(&LocalGate::swap(2), 0).unwrap();
        let expect = StateVector::new_basis_state(2, 2, &[1, 0]).unwrap();
        assert_eq!(s, expect);
    }

    #[test]
    fn identity_gate_is_exact() {
        let mut rng = seeded_rng(3);
        let u = sample_haar_unitary(4, &mut rng);
        let mut s = StateVector::new_basis_state(3, 2, &[1, 0, 1]).unwrap();
        let gate = LocalGate::new(2, u).unwrap();
        s.apply_two_site_gate(&gate, 1).unwrap();
        let before = s.clone();
        s.apply_two_site_gate(&LocalGate::identity(2), 0).unwrap();
        assert_eq!(s, before);
    }

    /// Build the full D x D matrix for a two-site gate via Kronecker
    /// products; the independent oracle for the stride contraction.
    fn embed_gate_dense(n: usize, d: usize, gate: &CMat, left: usize) -> CMat {
        let mut full = CMat::identity(pow_usize(d, left));
        full = full.kron(gate);
        full.kron(&CMat::identity(pow_usize(d, n - 2 - left)))
    }

    #[test]
    fn contraction_matches_kronecker_oracle() {
        let mut rng = seeded_rng(17);
        for n in 2..=3usize {
            for d in 2..=3usize {
                for left in 0..(n - 1) {
                    for _ in 0..12 {
                        let u = sample_haar_unitary(d * d, &mut rng);
                        let gate = LocalGate::new(d, u.clone()).unwrap();
                        let amps: Vec<Complex64> = {
                            let raw = crate::haar::sample_haar_state(
                                pow_usize(d, n),
                                &mut rng,
                            );
                            raw
                        };
                        let mut s =
                            StateVector::from_amplitudes(n, d, amps.clone()).unwrap();
                        s.apply_two_site_gate(&gate, left).unwrap();
                        let dense = embed_gate_dense(n, d, &u, left);
                        let expect = dense.mul_vec(&amps);
                        let worst = s
                            .amplitudes()
                            .iter()
                            .zip(expect.iter())
                            .map(|(a, b)| (a - b).norm())
                            .fold(0.0, f64::max);
                        assert!(worst < 1e-12, "n={n} d={d} left={left}: {worst:e}");
                        assert!((s.norm() - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn layer_bond_coverage() {
        let even: Vec<_> = layer_bonds(4, Parity::Even).collect();
        assert_eq!(even, vec![0, 2]);
        let odd: Vec<_> = layer_bonds(4, Parity::Odd).collect();
        assert_eq!(odd, vec![1]);
        let even5: Vec<_> = layer_bonds(5, Parity::Even).collect();
        assert_eq!(even5, vec![0, 2]);
        let odd5: Vec<_> = layer_bonds(5, Parity::Odd).collect();
        assert_eq!(odd5, vec![1, 3]);
    }

    #[test]
    fn layer_acts_only_on_its_bonds() {
        // Odd layer on N=4 must leave sites 0 and 3 untouched: check on a
        // basis state whose boundary digits flag any leakage.
        let mut s = StateVector::new_basis_state(4, 2, &[1, 0, 0, 1]).unwrap();
        let mut rng = seeded_rng(23);
        let gate = LocalGate::new(2, sample_haar_unitary(4, &mut rng)).unwrap();
        s.apply_layer(&gate, Parity::Odd).unwrap();
        for (idx, amp) in s.amplitudes().iter().enumerate() {
            if amp.norm() > 1e-14 {
                // site 0 digit must stay 1, site 3 digit must stay 1
                assert_eq!(idx >> 3, 1, "site 0 changed");
                assert_eq!(idx & 1, 1, "site 3 changed");
            }
        }
    }

    #[test]
    fn inner_product_examples() {
        let z = StateVector::new_basis_state(2, 2, &[0, 0]).unwrap();
        let o = StateVector::new_basis_state(2, 2, &[1, 1]).unwrap();
        let p = StateVector::uniform_superposition(2, 2).unwrap();
        assert!((z.inner_product(&z).unwrap() - 1.0).norm() < 1e-15);
        assert_eq!(z.inner_product(&o).unwrap(), Complex64::new(0.0, 0.0));
        assert!((p.inner_product(&z).unwrap() - 0.5).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_product_state() {
        let s = StateVector::new_basis_state(4, 2, &[0, 0, 0, 0]).unwrap();
        let rho = s.partial_trace_half().unwrap();
        assert_eq!(rho.dim(), 4);
        assert!((rho.matrix()[(0, 0)] - 1.0).norm() < 1e-15);
        assert!((rho.trace() - 1.0).norm() < 1e-15);
        assert!(rho.von_neumann_entropy().unwrap().abs() < 1e-10);
    }

    #[test]
    fn partial_trace_bell_state() {
        let inv = 1.0 / 2.0f64.sqrt();
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[0] = Complex64::new(inv, 0.0);
        amps[3] = Complex64::new(inv, 0.0);
        let s = StateVector::from_amplitudes(2, 2, amps).unwrap();
        let rho = s.partial_trace_half().unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let expect = if r == c { 0.5 } else { 0.0 };
                assert!((rho.matrix()[(r, c)] - expect).norm() < 1e-14);
            }
        }
        let ln2 = core::f64::consts::LN_2;
        assert!((rho.von_neumann_entropy().unwrap() - ln2).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_ghz() {
        let inv = 1.0 / 2.0f64.sqrt();
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[0] = Complex64::new(inv, 0.0);
        amps[15] = Complex64::new(inv, 0.0);
        let s = StateVector::from_amplitudes(4, 2, amps).unwrap();
        let rho = s.partial_trace_half().unwrap();
        assert!((rho.matrix()[(0, 0)] - 0.5).norm() < 1e-14);
        assert!((rho.matrix()[(3, 3)] - 0.5).norm() < 1e-14);
        assert!(rho.matrix()[(0, 3)].norm() < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_odd_n() {
        let s = StateVector::new_basis_state(3, 2, &[0, 0, 0]).unwrap();
        assert!(s.partial_trace_half().is_err());
    }

    #[test]
    fn entropy_of_maximally_mixed() {
        let rho = DensityMatrix::new(
            CMat::identity(4).scale(Complex64::new(0.25, 0.0)),
        )
        .unwrap();
        let s = rho.von_neumann_entropy().unwrap();
        assert!((s - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn norm_conservation_over_many_layers() {
        let mut rng = seeded_rng(99);
        let mut s = StateVector::uniform_superposition(4, 2).unwrap();
        let g1 = LocalGate::new(2, sample_haar_unitary(4, &mut rng)).unwrap();
        let g2 = LocalGate::new(2, sample_haar_unitary(4, &mut rng)).unwrap();
        for _ in 0..10_000 {
            s.apply_layer(&g1, Parity::Even).unwrap();
            s.apply_layer(&g2, Parity::Odd).unwrap();
        }
        assert!((s.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn entropy_bounds_hold_after_evolution() {
        let mut rng = seeded_rng(7);
        let mut s = StateVector::new_basis_state(4, 2, &[0, 1, 1, 0]).unwrap();
        let g1 = LocalGate::new(2, sample_haar_unitary(4, &mut rng)).unwrap();
        let g2 = LocalGate::new(2, sample_haar_unitary(4, &mut rng)).unwrap();
        for _ in 0..50 {
            s.apply_layer(&g1, Parity::Even).unwrap();
            s.apply_layer(&g2, Parity::Odd).unwrap();
            let ent = s.partial_trace_half().unwrap().von_neumann_entropy().unwrap();
            assert!(ent >= -1e-12);
            assert!(ent <= 2.0 * 2.0f64.ln() + 1e-12);
        }
    }
}
