//! Temporal-ensemble moments and Hilbert-Schmidt distances to Haar moments.
//!
//! The workhorse is the Gram-sum path: with `S_k = sum_{t,t'} |<psi_t|psi_t'>|^(2k)`
//! maintained incrementally, the squared Hilbert-Schmidt distance between
//! the k-th temporal moment and the k-th Haar moment of a `D_eff`-dimensional
//! (sub)space is
//!
//! ```text
//! Delta_T^(k) = S_k / T^2 - 1 / binom(D_eff + k - 1, k)
//! ```
//!
//! because every `psi^(x)k` lives in the symmetric subspace, so the cross
//! term `Tr[rho_Haar rho_T]` collapses to the Haar purity. This avoids the
//! `D^(2k)` dense moment entirely (`D = 81`, `k = 2` would already need
//! ~0.7 GB); the dense constructions below the cap exist as test oracles
//! and for small-scale checks.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::linalg::CMat;
use crate::state::inner_product_slices;
use crate::{domain_err, Error, Result};
// f64 math comes from num-traits under no_std; with std linked the
// inherent methods win and this import is unused.
#[allow(unused_imports)]
use num_traits::Float;

/// Largest `D^k` for which the dense moment-matrix path is allowed.
pub const DENSE_MOMENT_CAP: usize = 4096;

/// Dimension of the symmetric subspace `Sym^k(C^D)`: `binom(D + k - 1, k)`.
/// (The permutation-sum normalization `D (D+1) ... (D+k-1)` equals `k!`
/// times this.)
pub fn sym_dim(dim: u128, order: u32) -> u128 {
    assert!(dim >= 1 && order >= 1);
    // binom(D + k - 1, k) with intermediate division to delay overflow.
    let mut acc: u128 = 1;
    for i in 1..=order as u128 {
        acc = acc * (dim + i - 1) / i;
    }
    acc
}

/// Hermitian `D^k x D^k` moment matrix of order `k` over a base dimension.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    base_dim: usize,
    order: u32,
    matrix: CMat,
}

impl MomentMatrix {
    pub fn new(base_dim: usize, order: u32, matrix: CMat) -> Result<Self> {
        let want = base_dim.pow(order);
        if matrix.n_rows() != want || matrix.n_cols() != want {
            return domain_err("moment matrix has wrong dimension");
        }
        Ok(MomentMatrix { base_dim, order, matrix })
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }
}

fn check_dense_cap(dim: usize, order: u32) -> Result<usize> {
    let total = dim.checked_pow(order).unwrap_or(usize::MAX);
    if total > DENSE_MOMENT_CAP {
        return Err(Error::CapExceeded(alloc::format!(
            "dense moment needs D^k = {total} > {DENSE_MOMENT_CAP}; use the Gram path"
        )));
    }
    Ok(total)
}

/// Exact k-th Haar moment as a dense matrix: the normalized sum of tensor
/// permutation operators, equal to the symmetric projector divided by
/// `binom(D + k - 1, k)`.
pub fn haar_moment_dense(dim: usize, order: u32) -> Result<MomentMatrix> {
    assert!(dim >= 1 && order >= 1);
    let total = check_dense_cap(dim, order)?;
    let k = order as usize;
    // Work bound: k! * D^k entries touched.
    let mut perm_count: usize = 1;
    for i in 1..=k {
        perm_count = perm_count.saturating_mul(i);
    }
    if perm_count.saturating_mul(total) > (1 << 28) {
        return Err(Error::CapExceeded("permutation sum too large".into()));
    }

    let mut m = CMat::zeros(total, total);
    let mut perm: Vec<usize> = (0..k).collect();
    let mut digits = vec![0usize; k];
    loop {
        // Add sum_alpha |alpha_1..alpha_k><alpha_perm(1)..alpha_perm(k)|.
        for row in 0..total {
            let mut rest = row;
            for slot in (0..k).rev() {
                digits[slot] = rest % dim;
                rest /= dim;
            }
            let mut col = 0usize;
            for slot in 0..k {
                col = col * dim + digits[perm[slot]];
            }
            m[(row, col)] += Complex64::new(1.0, 0.0);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let mut denom = 1.0f64;
    for i in 0..k {
        denom *= (dim + i) as f64;
    }
    let m = m.scale(Complex64::new(1.0 / denom, 0.0));
    MomentMatrix::new(dim, order, m)
}

/// Lexicographic next permutation; returns false after the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Dense k-th moment of a finite state list: the arithmetic mean of k-fold
/// tensor powers of the projectors.
pub fn temporal_moment_dense(states: &[&[Complex64]], order: u32) -> Result<MomentMatrix> {
    if states.is_empty() {
        return domain_err("temporal moment of an empty state list");
    }
    let dim = states[0].len();
    let total = check_dense_cap(dim, order)?;
    let k = order as usize;
    let mut m = CMat::zeros(total, total);
    let mut tensor = vec![Complex64::new(0.0, 0.0); total];
    for &psi in states {
        assert_eq!(psi.len(), dim, "mixed dimensions in state list");
        for (idx, slot) in tensor.iter_mut().enumerate() {
            let mut rest = idx;
            let mut prod = Complex64::new(1.0, 0.0);
            for _ in 0..k {
                let digit = rest % dim;
                rest /= dim;
                prod *= psi[digit];
            }
            *slot = prod;
        }
        for r in 0..total {
            let tr = tensor[r];
            for c in 0..total {
                m[(r, c)] += tr * tensor[c].conj();
            }
        }
    }
    let m = m.scale(Complex64::new(1.0 / states.len() as f64, 0.0));
    MomentMatrix::new(dim, order, m)
}

/// Squared Hilbert-Schmidt distance `Tr[(A - B)^dag (A - B)]`.
pub fn hs_distance_sq(a: &MomentMatrix, b: &MomentMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return domain_err("moment matrices have different dimensions");
    }
    Ok(a.matrix.sub(&b.matrix).frobenius_sq())
}

/// Running temporal ensemble: retained states plus the Gram power sums
/// `S_k` for `k = 1 ..= k_max`.
///
/// Single-writer: one ensemble per (instance, initial state); distinct
/// ensembles can be filled in parallel.
#[derive(Debug, Clone)]
pub struct TemporalEnsemble {
    dim: usize,
    k_max: u32,
    /// Flat row-major storage of the retained time series, `count x dim`.
    states: Vec<Complex64>,
    /// `gram_power_sums[k - 1] = S_k`.
    gram_power_sums: Vec<f64>,
    count: usize,
}

impl TemporalEnsemble {
    pub fn new(dim: usize, k_max: u32) -> Self {
        assert!(dim >= 1 && k_max >= 1);
        TemporalEnsemble {
            dim,
            k_max,
            states: Vec::new(),
            gram_power_sums: vec![0.0; k_max as usize],
            count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn gram_power_sum(&self, order: u32) -> Result<f64> {
        if order == 0 || order > self.k_max {
            return domain_err(alloc::format!(
                "order {order} outside tracked range 1..={}",
                self.k_max
            ));
        }
        Ok(self.gram_power_sums[order as usize - 1])
    }

    pub fn state(&self, t: usize) -> &[Complex64] {
        &self.states[t * self.dim..(t + 1) * self.dim]
    }

    /// Append one state: `S_k += 1 + 2 sum_{t<T} |<psi_t|psi>|^(2k)`.
    /// Cost `O(T * (dim + k_max))` per call; states are retained, so the
    /// memory is `O(T * dim)`.
    pub fn accumulate_state(&mut self, psi: &[Complex64]) -> Result<()> {
        if psi.len() != self.dim {
            return domain_err("accumulated state has wrong dimension");
        }
        let mut cross = vec![0.0f64; self.k_max as usize];
        for t in 0..self.count {
            let overlap = inner_product_slices(self.state(t), psi);
            let p = overlap.norm_sqr();
            let mut pk = p;
            for slot in cross.iter_mut() {
                *slot += pk;
                pk *= p;
            }
        }
        for (slot, &c) in self.gram_power_sums.iter_mut().zip(cross.iter()) {
            *slot += 1.0 + 2.0 * c;
        }
        self.states.extend_from_slice(psi);
        self.count += 1;
        Ok(())
    }

    /// Dense-path view of the retained series (oracle use).
    pub fn state_refs(&self) -> Vec<&[Complex64]> {
        (0..self.count).map(|t| self.state(t)).collect()
    }
}

/// `Delta_T^(k)` against the Haar moment of an effective dimension.
///
/// With `D_eff = D` this is the full-space distance; with `D_eff` equal to
/// the dimension of a dynamically disconnected subspace containing every
/// accumulated state it is the subspace-referenced distance. Confinement of
/// the states is the caller's responsibility (check leakage when states
/// are retained).
pub fn delta_gram(ensemble: &TemporalEnsemble, order: u32, effective_dim: usize) -> Result<f64> {
    if ensemble.count == 0 {
        return domain_err("delta of an empty ensemble");
    }
    let s_k = ensemble.gram_power_sum(order)?;
    let t = ensemble.count as f64;
    let haar_purity = 1.0 / sym_dim(effective_dim as u128, order) as f64;
    Ok(s_k / (t * t) - haar_purity)
}

/// Lower bound `B(D)` on the trace distance between temporal and Haar
/// moments (`k >= 2`) for time-independent Hamiltonian dynamics.
pub fn bound_b(dim: usize) -> f64 {
    assert!(dim >= 2);
    let d = dim as f64;
    1.0 / (d + 1.0) - 1.0 / (2.0 * d * (d + 1.0)).sqrt()
}

/// The induced lower bound `4 B(D)^2 / D` on the squared Hilbert-Schmidt
/// distance.
pub fn hs_lower_bound(dim: usize) -> f64 {
    let b = bound_b(dim);
    4.0 * b * b / dim as f64
}

/// Squared Hilbert-Schmidt distance between the full-space Haar moment and
/// the Haar moment of a `sub_dim`-dimensional subspace:
/// `1/binom(D' + k - 1, k) - 1/binom(D + k - 1, k)`.
///
/// Follows from `Sym^k` of the subspace sitting inside `Sym^k` of the
/// full space: the cross trace equals the
/// subspace purity.
pub fn cross_haar_distance(dim: usize, sub_dim: usize, order: u32) -> Result<f64> {
    if sub_dim > dim || sub_dim == 0 {
        return domain_err("subspace dimension must satisfy 1 <= D' <= D");
    }
    Ok(1.0 / sym_dim(sub_dim as u128, order) as f64 - 1.0 / sym_dim(dim as u128, order) as f64)
}
