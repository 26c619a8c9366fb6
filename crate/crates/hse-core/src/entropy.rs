//! Discretised ensemble entropy (DEE): the negative Kullback-Leibler
//! divergence between the binned temporal ensemble and the discretised
//! Haar ensemble, estimated with a randomized reference-state binning.
//!
//! The reference distribution has two modes. `Uniform` assigns every
//! retained reference state probability `1/M'` (all reference bins equally
//! likely); this keeps the scar floor `-log2(M')` exact at every horizon.
//! `Sampled` bins one fresh Haar comparison state per temporal state and
//! smooths the resulting histogram; it reproduces the fully empirical
//! procedure at the cost of multinomial noise around the same values.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand_core::RngCore;

use crate::haar::{sample_haar_state, sample_haar_state_in_subspace};
use crate::state::inner_product_slices;
use crate::{domain_err, Result};
// f64 math comes from num-traits under no_std; with std linked the
// inherent methods win and this import is unused.
#[allow(unused_imports)]
use num_traits::Float;

/// A growing row-major series of same-dimension states.
#[derive(Debug, Clone)]
pub struct StateSeries {
    dim: usize,
    data: Vec<Complex64>,
}

impl StateSeries {
    pub fn new(dim: usize) -> Self {
        StateSeries { dim, data: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, state: &[Complex64]) {
        assert_eq!(state.len(), self.dim);
        self.data.extend_from_slice(state);
    }

    pub fn state(&self, t: usize) -> &[Complex64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }
}

/// Retained reference states with pairwise overlap at most `1 - epsilon`.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    dim: usize,
    epsilon: f64,
    /// Flat row-major `m_prime x dim` storage.
    states: Vec<Complex64>,
    m_prime: usize,
}

impl ReferenceSet {
    /// Greedily filter a candidate list: drop any state whose overlap with
    /// an already-retained state exceeds `1 - epsilon`.
    pub fn from_candidates(
        candidates: &[Vec<Complex64>],
        epsilon: f64,
        dim: usize,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return domain_err("epsilon must lie in [0, 1)");
        }
        let mut states: Vec<Complex64> = Vec::new();
        let mut m_prime = 0usize;
        for cand in candidates {
            if cand.len() != dim {
                return domain_err("reference candidate has wrong dimension");
            }
            let keep = (0..m_prime).all(|j| {
                let r = &states[j * dim..(j + 1) * dim];
                inner_product_slices(r, cand).norm() <= 1.0 - epsilon
            });
            if keep {
                states.extend_from_slice(cand);
                m_prime += 1;
            }
        }
        if m_prime < 2 {
            return domain_err("fewer than two reference states survived filtering");
        }
        Ok(ReferenceSet { dim, epsilon, states, m_prime })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn m_prime(&self) -> usize {
        self.m_prime
    }

    pub fn state(&self, j: usize) -> &[Complex64] {
        &self.states[j * self.dim..(j + 1) * self.dim]
    }

    /// Index of the reference with the largest overlap magnitude; ties go
    /// to the lowest index.
    pub fn bin_index(&self, psi: &[Complex64]) -> usize {
        debug_assert_eq!(psi.len(), self.dim);
        let mut best = 0usize;
        let mut best_val = -1.0f64;
        for j in 0..self.m_prime {
            let overlap = inner_product_slices(self.state(j), psi).norm_sqr();
            if overlap > best_val {
                best_val = overlap;
                best = j;
            }
        }
        best
    }
}

/// Sample `count` Haar states and greedily filter them.
pub fn build_reference_set<R: RngCore>(
    count: usize,
    epsilon: f64,
    dim: usize,
    rng: &mut R,
) -> Result<ReferenceSet> {
    if count < 2 {
        return domain_err("need at least two reference states");
    }
    let candidates: Vec<Vec<Complex64>> =
        (0..count).map(|_| sample_haar_state(dim, rng)).collect();
    ReferenceSet::from_candidates(&candidates, epsilon, dim)
}

/// Same, but the references are Haar states of the designated
/// computational-basis subspace (used to probe subspace ergodicity
/// directly).
pub fn build_reference_set_in_subspace<R: RngCore>(
    count: usize,
    epsilon: f64,
    dim: usize,
    basis_indices: &[usize],
    rng: &mut R,
) -> Result<ReferenceSet> {
    if count < 2 {
        return domain_err("need at least two reference states");
    }
    let candidates: Vec<Vec<Complex64>> = (0..count)
        .map(|_| sample_haar_state_in_subspace(basis_indices, dim, rng))
        .collect::<Result<_>>()?;
    ReferenceSet::from_candidates(&candidates, epsilon, dim)
}

/// Bin occupation counts over a reference set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinHistogram {
    counts: Vec<u64>,
    total: u64,
}

impl BinHistogram {
    pub fn empty(bins: usize) -> Self {
        BinHistogram { counts: vec![0; bins], total: 0 }
    }

    /// Flat histogram with the same count in every bin.
    pub fn uniform(bins: usize, count_per_bin: u64) -> Self {
        BinHistogram {
            counts: vec![count_per_bin; bins],
            total: bins as u64 * count_per_bin,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn record(&mut self, bin: usize) {
        self.counts[bin] += 1;
        self.total += 1;
    }
}

/// Assign each state to the bin of its best-overlapping reference.
pub fn bin_states(states: &[&[Complex64]], refs: &ReferenceSet) -> Result<BinHistogram> {
    let mut hist = BinHistogram::empty(refs.m_prime());
    for psi in states {
        if psi.len() != refs.dim() {
            return domain_err("state dimension does not match reference set");
        }
        hist.record(refs.bin_index(psi));
    }
    Ok(hist)
}

/// `DEE = -sum_j p_j^T log2(p_j^T / p_j^H)`.
///
/// Temporal probabilities are raw frequencies; Haar probabilities are
/// smoothed with one pseudo-count per bin so that empty Haar bins stay
/// finite (a flat Haar histogram therefore smooths to exactly `1/M'`).
/// Bins with `p_j^T = 0` contribute nothing.
pub fn dee(temporal: &BinHistogram, haar: &BinHistogram) -> Result<f64> {
    if temporal.bins() != haar.bins() {
        return domain_err("histograms have different bin counts");
    }
    if temporal.total() == 0 {
        return domain_err("temporal histogram is empty");
    }
    if haar.total() == 0 {
        return domain_err("haar histogram is empty");
    }
    let bins = temporal.bins() as f64;
    let t_total = temporal.total() as f64;
    let h_total = haar.total() as f64 + bins;
    let mut acc = 0.0f64;
    for (&nt, &nh) in temporal.counts().iter().zip(haar.counts().iter()) {
        if nt == 0 {
            continue;
        }
        let pt = nt as f64 / t_total;
        let ph = (nh as f64 + 1.0) / h_total;
        acc += pt * (pt / ph).log2();
    }
    Ok(-acc)
}

/// Which reference distribution [`run_dee_experiment`] compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeeReference {
    /// Exact flat distribution over the retained references.
    Uniform,
    /// Histogram of one fresh Haar comparison state per temporal state.
    Sampled,
}

/// Parameters of a DEE run.
#[derive(Debug, Clone, Copy)]
pub struct DeeParams {
    /// Requested reference states per set (M).
    pub count: usize,
    /// Overlap-filter parameter.
    pub epsilon: f64,
    /// Independent reference sets (R).
    pub repeats: usize,
    pub reference: DeeReference,
}

/// DEE of one temporal series against one reference set, evaluated at the
/// given ensemble-size checkpoints (each checkpoint uses the first `T`
/// states). Returns one DEE value per checkpoint.
pub fn dee_curve<R: RngCore>(
    states: &StateSeries,
    refs: &ReferenceSet,
    checkpoints: &[usize],
    reference: DeeReference,
    comparison_rng: &mut R,
    comparison_subspace: Option<&[usize]>,
) -> Result<Vec<f64>> {
    if states.dim() != refs.dim() {
        return domain_err("state dimension does not match reference set");
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return domain_err("checkpoints must be strictly increasing");
    }
    if let Some(&last) = checkpoints.last() {
        if last > states.len() {
            return domain_err("checkpoint beyond the stored series");
        }
    }
    let mut temporal = BinHistogram::empty(refs.m_prime());
    let mut haar = match reference {
        DeeReference::Uniform => BinHistogram::uniform(refs.m_prime(), 1),
        DeeReference::Sampled => BinHistogram::empty(refs.m_prime()),
    };
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for t in 0..states.len() {
        temporal.record(refs.bin_index(states.state(t)));
        if reference == DeeReference::Sampled {
            let phi = match comparison_subspace {
                Some(indices) => {
                    sample_haar_state_in_subspace(indices, states.dim(), comparison_rng)?
                }
                None => sample_haar_state(states.dim(), comparison_rng),
            };
            haar.record(refs.bin_index(&phi));
        }
        if let Some(&&cp) = next.peek() {
            if cp == t + 1 {
                out.push(dee(&temporal, &haar)?);
                next.next();
            }
        }
        if out.len() == checkpoints.len() {
            break;
        }
    }
    Ok(out)
}

/// Min/mean/max of the DEE across reference sets at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeePoint {
    pub horizon: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Outcome of a full DEE experiment.
#[derive(Debug, Clone)]
pub struct DeeOutcome {
    pub points: Vec<DeePoint>,
    /// Retained reference count per repetition.
    pub m_primes: Vec<usize>,
}

/// Run the full randomized-binning experiment: evolve the initial state,
/// then for each of `repeats` independent reference sets bin the prefix
/// ensembles and evaluate the DEE at every checkpoint; report min/mean/max
/// across the repetitions.
///
/// `subspace`, when given, restricts the reference (and any sampled
/// comparison) states to the listed computational-basis span.
#[allow(clippy::too_many_arguments)]
pub fn run_dee_experiment(
    model: &crate::models::CircuitModel,
    initial: &crate::state::StateVector,
    horizon: usize,
    checkpoints: &[usize],
    params: &DeeParams,
    subspace: Option<&[usize]>,
    master_seed: u64,
) -> Result<DeeOutcome> {
    let states = evolve_series(model, initial, horizon)?;
    let mut curves = Vec::with_capacity(params.repeats);
    let mut m_primes = Vec::with_capacity(params.repeats);
    for rep in 0..params.repeats {
        let seed = crate::rng::derive_seed(master_seed, rep as u64);
        let (curve, m_prime) =
            dee_single_repetition(&states, checkpoints, params, subspace, seed)?;
        curves.push(curve);
        m_primes.push(m_prime);
    }
    Ok(DeeOutcome {
        points: summarize_dee_curves(checkpoints, &curves),
        m_primes,
    })
}

/// Evolve `initial` for `horizon - 1` steps and collect the temporal
/// series `psi(0), ..., psi(horizon - 1)`.
pub fn evolve_series(
    model: &crate::models::CircuitModel,
    initial: &crate::state::StateVector,
    horizon: usize,
) -> Result<StateSeries> {
    if horizon == 0 {
        return domain_err("horizon must be at least 1");
    }
    let sched = crate::drive::schedule(horizon - 1);
    let mut states = StateSeries::new(initial.dim());
    model.evolve_visit(initial, &sched, |_, s| {
        states.push(s.amplitudes());
        Ok(())
    })?;
    Ok(states)
}

/// One repetition: build the reference set from its own seed and evaluate
/// the checkpoint curve. Exposed so callers can spread repetitions over
/// worker threads and still reduce deterministically.
pub fn dee_single_repetition(
    states: &StateSeries,
    checkpoints: &[usize],
    params: &DeeParams,
    subspace: Option<&[usize]>,
    seed: u64,
) -> Result<(Vec<f64>, usize)> {
    let mut rng = crate::rng::seeded_rng(seed);
    let refs = match subspace {
        Some(indices) => build_reference_set_in_subspace(
            params.count,
            params.epsilon,
            states.dim(),
            indices,
            &mut rng,
        )?,
        None => build_reference_set(params.count, params.epsilon, states.dim(), &mut rng)?,
    };
    let curve = dee_curve(
        states,
        &refs,
        checkpoints,
        params.reference,
        &mut rng,
        subspace,
    )?;
    Ok((curve, refs.m_prime()))
}

/// Ordered reduce of per-repetition curves into min/mean/max points.
pub fn summarize_dee_curves(checkpoints: &[usize], curves: &[Vec<f64>]) -> Vec<DeePoint> {
    let reps = curves.len().max(1) as f64;
    checkpoints
        .iter()
        .enumerate()
        .map(|(i, &cp)| {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            let mut sum = 0.0;
            for curve in curves {
                let v = curve[i];
                min = min.min(v);
                max = max.max(v);
                sum += v;
            }
            DeePoint {
                horizon: cp,
                min,
                mean: sum / reps,
                max,
            }
        })
        .collect()
}
