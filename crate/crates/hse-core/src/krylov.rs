//! Dynamically disconnected sectors of the pair-flip model.
//!
//! Connectivity is decided by reachability alone: the flip block of the
//! gate is dense on the equal-pair span, so two basis states are in the
//! same Krylov sector exactly when a sequence of `aa -> bb` substitutions
//! at any bond links them. Against the BFS decomposition the module also
//! exposes the closed-form counts (number of sectors, frozen states,
//! largest even-N sector, commutant dimension) as cross-checks.

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::state::pow_usize;
use crate::{domain_err, Error, Result};

/// Dense cap on `d^N` for the reachability computation.
pub const SECTOR_DENSE_CAP: usize = 1 << 20;

/// Partition of the computational basis into dynamically disconnected
/// sectors. Sector ids are assigned in ascending order of each sector's
/// smallest basis index, which is deterministic; for `d = 2` every sector
/// then carries its staggered-magnetisation label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KrylovDecomposition {
    n_sites: usize,
    local_dim: usize,
    sectors: Vec<Vec<usize>>,
    sector_of: Vec<u32>,
}

impl KrylovDecomposition {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.sector_of.len()
    }

    pub fn sectors(&self) -> &[Vec<usize>] {
        &self.sectors
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    pub fn sector_id_of(&self, basis_index: usize) -> usize {
        self.sector_of[basis_index] as usize
    }

    pub fn sector_containing(&self, basis_index: usize) -> &[usize] {
        &self.sectors[self.sector_id_of(basis_index)]
    }

    /// Sector dimensions in ascending order.
    pub fn sorted_dims(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.sectors.iter().map(|s| s.len()).collect();
        dims.sort_unstable();
        dims
    }

    pub fn frozen_count(&self) -> usize {
        self.sectors.iter().filter(|s| s.len() == 1).count()
    }

    pub fn largest_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.len()).max().unwrap_or(0)
    }
}

/// Connected components of the pair-flip reachability graph: undirected
/// edges `aa <-> bb` at every bond `(n, n+1)` (the union of even- and
/// odd-layer bonds covers all adjacent pairs).
pub fn pair_flip_components(n_sites: usize, local_dim: usize) -> Result<KrylovDecomposition> {
    if n_sites < 1 || local_dim < 2 {
        return domain_err("need N >= 1 and d >= 2");
    }
    let dim = local_dim
        .checked_pow(n_sites as u32)
        .filter(|&d| d <= SECTOR_DENSE_CAP)
        .ok_or_else(|| {
            Error::CapExceeded(alloc::format!(
                "d^N exceeds the {SECTOR_DENSE_CAP}-state reachability cap"
            ))
        })?;
    let d = local_dim;
    let mut uf = UnionFind::new(dim);
    if n_sites >= 2 {
        for left in 0..n_sites - 1 {
            let step = pow_usize(d, n_sites - 2 - left);
            let pair_stride = step * d + step; // moving both digits together
            let block = step * d * d;
            let n_prefix = pow_usize(d, left);
            for prefix in 0..n_prefix {
                for suffix in 0..step {
                    let base = prefix * block + suffix;
                    // All equal-pair states at this bond are mutually linked.
                    let first = base; // digits (0, 0)
                    for a in 1..d {
                        uf.union(first, base + a * pair_stride);
                    }
                }
            }
        }
    }
    let mut root_to_id: Vec<Option<u32>> = vec![None; dim];
    let mut sectors: Vec<Vec<usize>> = Vec::new();
    let mut sector_of = vec![0u32; dim];
    for idx in 0..dim {
        let root = uf.find(idx);
        let id = match root_to_id[root] {
            Some(id) => id,
            None => {
                let id = sectors.len() as u32;
                root_to_id[root] = Some(id);
                sectors.push(Vec::new());
                id
            }
        };
        sector_of[idx] = id;
        sectors[id as usize].push(idx);
    }
    Ok(KrylovDecomposition {
        n_sites,
        local_dim,
        sectors,
        sector_of,
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins, so sector ids come out ordered by the
            // smallest contained index.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Number of disconnected pair-flip sectors for `d >= 3`:
/// `((d-1)^(N+1) - 1) / (d - 2)`.
pub fn count_sectors_formula(n_sites: usize, local_dim: usize) -> Result<u128> {
    if local_dim < 3 {
        return domain_err(
            "sector-count series needs d >= 3; for d = 2 the count is N + 1 (see commutant_dimension)",
        );
    }
    let q = (local_dim - 1) as u128;
    let numerator = q.checked_pow(n_sites as u32 + 1).and_then(|p| p.checked_sub(1));
    match numerator {
        Some(num) => Ok(num / (local_dim as u128 - 2)),
        None => domain_err("sector count overflows 128 bits"),
    }
}

/// Dimension of the largest pair-flip sector for even `N`, `d >= 3`,
/// evaluated from the binomial series in exact rational arithmetic.
///
/// The series is `d^N (1 + (d/2) sum_{j=1}^{N/2} binom(1/2, j) (-1)^j
/// (2 sqrt(d-1))^(2j) d^(-2j))`; the result is asserted to be integral.
pub fn largest_sector_formula(n_sites: usize, local_dim: usize) -> Result<u128> {
    if n_sites % 2 != 0 || n_sites == 0 {
        return domain_err("largest-sector series is defined for even N >= 2");
    }
    if local_dim < 3 {
        return domain_err("largest-sector series needs d >= 3");
    }
    let d = BigRational::from_integer(BigInt::from(local_dim));
    let d_n = pow_rational(&d, n_sites as i64);
    // binom(1/2, j) accumulated incrementally: b_j = b_{j-1} * (1/2 - (j-1)) / j.
    let mut binom = BigRational::one();
    let mut sum = BigRational::zero();
    let four_q = BigRational::from_integer(BigInt::from(4 * (local_dim - 1)));
    let d_sq_inv = pow_rational(&d, -2);
    let mut factor = BigRational::one(); // (4(d-1)/d^2)^j
    for j in 1..=(n_sites / 2) {
        let jr = BigRational::from_integer(BigInt::from(j));
        let half_minus = BigRational::new(BigInt::from(1), BigInt::from(2))
            - BigRational::from_integer(BigInt::from(j as i64 - 1));
        binom *= half_minus / jr;
        factor *= &four_q * &d_sq_inv;
        let sign = if j % 2 == 0 { BigRational::one() } else { -BigRational::one() };
        sum += sign * &binom * &factor;
    }
    let half_d = &d / BigRational::from_integer(BigInt::from(2));
    let value = d_n * (BigRational::one() + half_d * sum);
    if !value.is_integer() {
        return Err(Error::Numerical(
            "largest-sector series did not evaluate to an integer".into(),
        ));
    }
    let int = value.to_integer();
    if int.is_negative() {
        return Err(Error::Numerical("largest-sector series went negative".into()));
    }
    int.to_u128()
        .ok_or_else(|| Error::Numerical("largest sector overflows 128 bits".into()))
}

fn pow_rational(base: &BigRational, exp: i64) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp.unsigned_abs() {
        acc *= base;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Number of frozen product states (no equal adjacent pair):
/// `d (d-1)^(N-1)`.
pub fn frozen_state_count(n_sites: usize, local_dim: usize) -> Result<u128> {
    if n_sites < 1 || local_dim < 2 {
        return domain_err("need N >= 1 and d >= 2");
    }
    (local_dim as u128)
        .checked_mul((local_dim as u128 - 1).pow(n_sites as u32 - 1))
        .ok_or_else(|| Error::Numerical("frozen-state count overflows 128 bits".into()))
}

/// Commutant-algebra dimension of the pair-flip model:
/// `((d-1)^(N+1) - 1)/(d-2)` for d >= 3, and `N + 1` for d = 2.
pub fn commutant_dimension(n_sites: usize, local_dim: usize) -> Result<u128> {
    if n_sites < 1 || local_dim < 2 {
        return domain_err("need N >= 1 and d >= 2");
    }
    if local_dim == 2 {
        Ok(n_sites as u128 + 1)
    } else {
        count_sectors_formula(n_sites, local_dim)
    }
}

/// Staggered magnetisation `m = sum_j (-1)^j n_j` of a binary basis index
/// (site 0 carries `+`). The `N + 1` distinct values label the `d = 2`
/// pair-flip sectors, with class sizes `binom(N, N/2 + m)`.
pub fn staggered_sector_label(basis_index: usize, n_sites: usize) -> Result<i64> {
    if basis_index >= 1usize << n_sites {
        return domain_err("basis index is not a binary string of length N");
    }
    let mut m = 0i64;
    for site in 0..n_sites {
        let bit = (basis_index >> (n_sites - 1 - site)) & 1;
        if bit == 1 {
            m += if site % 2 == 0 { 1 } else { -1 };
        }
    }
    Ok(m)
}

/// Probability weight outside the sector: `sum_{i not in sector} |psi_i|^2`.
pub fn leakage(amplitudes: &[Complex64], sector: &[usize]) -> f64 {
    let mut inside = vec![false; amplitudes.len()];
    for &i in sector {
        inside[i] = true;
    }
    amplitudes
        .iter()
        .zip(inside.iter())
        .filter(|(_, &m)| !m)
        .map(|(a, _)| a.norm_sqr())
        .sum()
}
