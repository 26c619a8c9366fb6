//! Slow observables for diagnosing ergodicity breaking: the
//! infinite-temperature autocorrelator of a local operator and the
//! half-chain entanglement entropy along the evolution.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::drive::schedule;
use crate::linalg::CMat;
use crate::models::CircuitModel;
use crate::state::{pow_usize, StateVector};
use crate::{domain_err, Error, Result};
// f64 math comes from num-traits under no_std; with std linked the
// inherent methods win and this import is unused.
#[allow(unused_imports)]
use num_traits::Float;

/// Dimension cap for the dense operator evolution.
pub const OPERATOR_DENSE_CAP: usize = 256;

/// Single-site Hermitian observable.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableMatrix {
    local_dim: usize,
    matrix: CMat,
}

impl ObservableMatrix {
    pub fn new(local_dim: usize, matrix: CMat) -> Result<Self> {
        if matrix.n_rows() != local_dim || matrix.n_cols() != local_dim {
            return domain_err("observable must be d x d");
        }
        if matrix.hermiticity_defect() > 1e-12 {
            return Err(Error::Numerical("observable is not Hermitian".into()));
        }
        Ok(ObservableMatrix { local_dim, matrix })
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservableKind {
    /// Pauli Z on a qubit: diag(+1, -1).
    SigmaZ,
    /// Spin-1 Z on a qutrit, with levels (|1>, |0>, |-1>) mapped to basis
    /// indices (0, 1, 2): diag(+1, 0, -1).
    Spin1Z,
}

impl ObservableKind {
    pub fn label(self) -> &'static str {
        match self {
            ObservableKind::SigmaZ => "sigma_z",
            ObservableKind::Spin1Z => "spin1_z",
        }
    }
}

pub fn local_observable(kind: ObservableKind, local_dim: usize) -> Result<ObservableMatrix> {
    let diag: &[f64] = match kind {
        ObservableKind::SigmaZ => {
            if local_dim != 2 {
                return domain_err("sigma_z requires d = 2");
            }
            &[1.0, -1.0]
        }
        ObservableKind::Spin1Z => {
            if local_dim != 3 {
                return domain_err("spin1_z requires d = 3");
            }
            &[1.0, 0.0, -1.0]
        }
    };
    let mut m = CMat::zeros(local_dim, local_dim);
    for (i, &v) in diag.iter().enumerate() {
        m[(i, i)] = Complex64::new(v, 0.0);
    }
    ObservableMatrix::new(local_dim, m)
}

/// Embed a single-site observable at `site` into the full `D x D` space.
pub fn embed_single_site(
    obs: &ObservableMatrix,
    n_sites: usize,
    site: usize,
) -> Result<CMat> {
    if site >= n_sites {
        return domain_err("site out of range");
    }
    let d = obs.local_dim;
    let dim = pow_usize(d, n_sites);
    let step = pow_usize(d, n_sites - 1 - site);
    let block = step * d;
    let n_prefix = pow_usize(d, site);
    let mut full = CMat::zeros(dim, dim);
    for prefix in 0..n_prefix {
        for suffix in 0..step {
            let base = prefix * block + suffix;
            for a in 0..d {
                for b in 0..d {
                    let v = obs.matrix[(a, b)];
                    if v != Complex64::new(0.0, 0.0) {
                        full[(base + a * step, base + b * step)] += v;
                    }
                }
            }
        }
    }
    Ok(full)
}

/// Infinite-temperature autocorrelator series
/// `A(t) = Re Tr[O(t) O] / D` with `O(t) = U(t)^dag O U(t)`, for
/// `t = 0 ..= horizon`.
///
/// The propagator `U(t)` is carried as a dense matrix whose columns are
/// driven through the brickwork layers by the same stride contraction used
/// for states; the imaginary part of the trace is asserted below 1e-10 at
/// every step (both factors are Hermitian).
pub fn autocorrelator_series(
    model: &CircuitModel,
    obs: &ObservableMatrix,
    site: usize,
    horizon: usize,
) -> Result<Vec<f64>> {
    if obs.local_dim != model.local_dim() {
        return domain_err("observable dimension does not match the model");
    }
    let dim = model.dim();
    if dim > OPERATOR_DENSE_CAP {
        return Err(Error::CapExceeded(alloc::format!(
            "operator evolution needs D = {dim} > {OPERATOR_DENSE_CAP}"
        )));
    }
    let o_full = embed_single_site(obs, model.n_sites(), site)?;
    // Columns of U(t), flat column-major.
    let mut u_cols = vec![Complex64::new(0.0, 0.0); dim * dim];
    for c in 0..dim {
        u_cols[c * dim + c] = Complex64::new(1.0, 0.0);
    }
    let sched = schedule(horizon);
    let mut series = Vec::with_capacity(horizon + 1);
    series.push(trace_autocorrelator(&u_cols, &o_full, dim)?);
    for t in 1..=horizon {
        let brick = sched.brick_for_step(t);
        for c in 0..dim {
            model.step_slice(&mut u_cols[c * dim..(c + 1) * dim], brick)?;
        }
        series.push(trace_autocorrelator(&u_cols, &o_full, dim)?);
    }
    Ok(series)
}

/// `Re Tr[U^dag O U O] / D`, asserting the imaginary part is negligible.
fn trace_autocorrelator(u_cols: &[Complex64], o_full: &CMat, dim: usize) -> Result<f64> {
    // Tr[U^dag O U O] = sum_{j,k} conj(U_kj) (O U O)_{kj}; exploit density
    // of O only through plain dense products to stay general.
    let mut acc = Complex64::new(0.0, 0.0);
    // col_j of (O U): o_full * u_col_j; then right-multiply by O means
    // (O U O)_{kj} = sum_m (O U)_{km} O_{mj}.
    let mut ou = vec![Complex64::new(0.0, 0.0); dim * dim];
    for j in 0..dim {
        let u_col = &u_cols[j * dim..(j + 1) * dim];
        let target = &mut ou[j * dim..(j + 1) * dim];
        for k in 0..dim {
            let mut s = Complex64::new(0.0, 0.0);
            for (m, &u) in u_col.iter().enumerate() {
                let o = o_full[(k, m)];
                if o != Complex64::new(0.0, 0.0) {
                    s += o * u;
                }
            }
            target[k] = s;
        }
    }
    for j in 0..dim {
        // (O U O) column j = sum_m (O U) column m * O_{mj}.
        for m in 0..dim {
            let o = o_full[(m, j)];
            if o == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ou_col = &ou[m * dim..(m + 1) * dim];
            let u_col = &u_cols[j * dim..(j + 1) * dim];
            for k in 0..dim {
                acc += u_col[k].conj() * ou_col[k] * o;
            }
        }
    }
    let value = acc / dim as f64;
    if value.im.abs() > 1e-10 {
        return Err(Error::Numerical(alloc::format!(
            "autocorrelator trace has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Half-chain entanglement entropy `S(psi(t))` for `t = 0 ..= horizon`,
/// in natural-log units.
pub fn bipartite_entropy_series(
    model: &CircuitModel,
    initial: &StateVector,
    horizon: usize,
) -> Result<Vec<f64>> {
    if model.n_sites() % 2 != 0 {
        return domain_err("bipartite entropy needs an even number of sites");
    }
    let sched = schedule(horizon);
    let mut series = Vec::with_capacity(horizon + 1);
    model.evolve_visit(initial, &sched, |_, state| {
        let rho = state.partial_trace_half()?;
        series.push(rho.von_neumann_entropy()?);
        Ok(())
    })?;
    Ok(series)
}

/// Expected half-chain entanglement of a Haar-random pure state:
/// `(N/2) ln d - 1/2`.
pub fn page_entropy(n_sites: usize, local_dim: usize) -> f64 {
    0.5 * n_sites as f64 * (local_dim as f64).ln() - 0.5
}
