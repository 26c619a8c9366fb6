//! The experiment drivers: instance sweeps over circuit draws, metric
//! accumulation at geometric checkpoints, and file emission.
//!
//! Work is spread over a rayon pool at the (instance x start) granularity;
//! results are grouped back in index order, so output bytes depend only on
//! the configuration and the master seed. `HSE_THREADS` caps the pool.

use std::collections::BTreeMap;

use rayon::prelude::*;

use hse_core::diagnostics::{
    autocorrelator_series, bipartite_entropy_series, local_observable,
};
use hse_core::drive::schedule;
use hse_core::entropy::{dee_single_repetition, evolve_series, summarize_dee_curves, DeeParams};
use hse_core::krylov::{
    commutant_dimension, count_sectors_formula, frozen_state_count, largest_sector_formula,
    leakage, pair_flip_components, staggered_sector_label, KrylovDecomposition,
};
use hse_core::metrics::{cross_haar_distance, delta_gram, hs_lower_bound, TemporalEnsemble};
use hse_core::models::{
    build_circuit, scar_kernel_basis, scar_projector, ModelFamily, ProjectorKind,
};
use hse_core::rng::{derive_seed, seeded_rng};
use hse_core::state::{inner_product_slices, StateVector};
use hse_core::Complex64;

use crate::aggregate::{aggregate_instances, checkpoint_grid};
use crate::config::{
    observable_for_dim, Experiment, InitialStateSpec, ResolvedConfig,
};
use crate::output::{csv_document, fmt_float, RunWriter};
use crate::{CliError, CliResult};

/// Leakage above this aborts a run with a numerical-invariant error.
const LEAKAGE_TOL: f64 = 1e-10;

/// Stream tags for deriving independent child seeds from the master seed.
mod stream {
    pub const INSTANCE: u64 = 0x01_0000;
    pub const START_STATE: u64 = 0x02_0000;
}

pub fn run_experiment(cfg: &ResolvedConfig) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("HSE_THREADS") {
        let n: usize = raw
            .parse()
            .map_err(|_| CliError::config(format!("bad HSE_THREADS value '{raw}'")))?;
        if n == 0 {
            return Err(CliError::config("HSE_THREADS must be positive"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::io(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cfg))
}

fn dispatch(cfg: &ResolvedConfig) -> CliResult<()> {
    let mut writer = RunWriter::new(&cfg.out_dir)?;
    let outcome = match cfg.experiment {
        Experiment::Gbw
        | Experiment::Scar
        | Experiment::Multiscar
        | Experiment::Hsf
        | Experiment::Symmetry => moment_experiment(cfg, &mut writer),
        Experiment::Dee => dee_experiment(cfg, &mut writer),
        Experiment::Diagnostics => diagnostics_experiment(cfg, &mut writer),
        Experiment::Krylov => krylov_experiment(cfg, &mut writer),
    };
    match outcome {
        Ok((child_seeds, checkpoints)) => {
            writer.finalize(cfg, &child_seeds, &checkpoints, true)?;
            Ok(())
        }
        Err(e) => {
            // Flag whatever was already written as partial.
            let _ = writer.finalize(cfg, &[], &[], false);
            Err(e)
        }
    }
}

/// How the subspace-referenced metric and the confinement check are
/// evaluated for one start.
#[derive(Debug, Clone)]
enum SubspacePlan {
    /// Dynamically disconnected sector spanned by basis indices.
    BasisIndices(Vec<usize>),
    /// Orthogonal complement of a set of scar directions.
    KernelComplement(Vec<Vec<Complex64>>),
}

impl SubspacePlan {
    fn effective_dim(&self, full_dim: usize) -> usize {
        match self {
            SubspacePlan::BasisIndices(v) => v.len(),
            SubspacePlan::KernelComplement(kernel) => full_dim - kernel.len(),
        }
    }

    fn leakage(&self, amplitudes: &[Complex64]) -> f64 {
        match self {
            SubspacePlan::BasisIndices(v) => leakage(amplitudes, v),
            SubspacePlan::KernelComplement(kernel) => kernel
                .iter()
                .map(|v| inner_product_slices(v, amplitudes).norm_sqr())
                .sum(),
        }
    }
}

/// One evolution to run: a model family (per track), an initial state, and
/// an optional subspace declaration.
#[derive(Debug, Clone)]
struct StartPlan {
    label: String,
    family: ModelFamily,
    state: StateVector,
    subspace: Option<SubspacePlan>,
}

/// Expand the configured initial states into concrete start plans.
fn expand_starts(cfg: &ResolvedConfig) -> CliResult<Vec<StartPlan>> {
    let n = cfg.n_sites;
    let d = cfg.local_dim;
    let dim = d.checked_pow(n as u32).unwrap();
    let mut plans = Vec::new();

    // Track list: one family per projector for scar experiments, otherwise
    // a single family.
    let tracks: Vec<(ModelFamily, Option<ProjectorKind>)> = match cfg.experiment {
        Experiment::Scar | Experiment::Multiscar => cfg
            .projectors
            .iter()
            .map(|&k| (ModelFamily::Scar(k), Some(k)))
            .collect(),
        Experiment::Gbw => vec![(ModelFamily::Generic, None)],
        Experiment::Hsf | Experiment::Symmetry => vec![(ModelFamily::PairFlip, None)],
        Experiment::Dee | Experiment::Diagnostics => {
            let kind = cfg.projectors.first().copied().unwrap_or(ProjectorKind::P1);
            vec![(cfg.family.to_model_family(kind), None)]
        }
        Experiment::Krylov => return Err(CliError::config("krylov has no starts")),
    };
    let multi_track = tracks.len() > 1;

    let sectors = match (cfg.experiment, cfg.subspace_reference) {
        (Experiment::Hsf | Experiment::Symmetry, true) => Some(pair_flip_components(n, d)?),
        _ => None,
    };

    for (track_idx, (family, kind)) in tracks.iter().enumerate() {
        // Scar structure of this track, if any.
        let kernel = match kind {
            Some(k) => {
                let projector = scar_projector(*k, d)?;
                Some(scar_kernel_basis(&projector, n)?)
            }
            None => None,
        };
        for spec in &cfg.initial_states {
            let mut push = |label: String, state: StateVector| -> CliResult<()> {
                let subspace = subspace_for(cfg, &sectors, kernel.as_deref(), &state)?;
                let label = match kind {
                    Some(k) if multi_track => format!("{}:{label}", k.label()),
                    _ => label,
                };
                plans.push(StartPlan {
                    label,
                    family: *family,
                    state,
                    subspace,
                });
                Ok(())
            };
            match spec {
                InitialStateSpec::Zeros => {
                    push("zeros".into(), StateVector::new_basis_state(n, d, &vec![0; n])?)?
                }
                InitialStateSpec::Ones => {
                    push("ones".into(), StateVector::new_basis_state(n, d, &vec![1; n])?)?
                }
                InitialStateSpec::Plus => {
                    push("plus".into(), StateVector::uniform_superposition(n, d)?)?
                }
                InitialStateSpec::Basis(digits) => push(
                    spec.label(),
                    StateVector::new_basis_state(n, d, digits)?,
                )?,
                InitialStateSpec::AllBasis => {
                    for idx in 0..dim {
                        let digits = decode_digits(idx, n, d);
                        push(
                            format!("basis:{}", digits_string(&digits)),
                            StateVector::new_basis_state(n, d, &digits)?,
                        )?;
                    }
                }
                InitialStateSpec::HaarNonScar => {
                    let kernel = kernel.as_deref().ok_or_else(|| {
                        CliError::config("'haar-nonscar' needs a scar track")
                    })?;
                    let seed =
                        derive_seed(cfg.seed, stream::START_STATE + track_idx as u64);
                    let state = haar_state_orthogonal_to(kernel, n, d, seed)?;
                    push("haar-nonscar".into(), state)?;
                }
            }
        }
    }
    Ok(plans)
}

/// Subspace declaration for one start: the Krylov sector of a basis start
/// (pair-flip experiments) or the complement of the scar space for starts
/// orthogonal to every scar direction.
fn subspace_for(
    cfg: &ResolvedConfig,
    sectors: &Option<KrylovDecomposition>,
    kernel: Option<&[Vec<Complex64>]>,
    state: &StateVector,
) -> CliResult<Option<SubspacePlan>> {
    if !cfg.subspace_reference {
        return Ok(None);
    }
    if let Some(decomp) = sectors {
        // Basis starts sit in a single sector; anything else spans several.
        let nonzero: Vec<usize> = state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, _)| i)
            .collect();
        if nonzero.len() == 1 {
            let sector = decomp.sector_containing(nonzero[0]).to_vec();
            return Ok(Some(SubspacePlan::BasisIndices(sector)));
        }
        return Ok(None);
    }
    if let Some(kernel) = kernel {
        let scar_weight: f64 = kernel
            .iter()
            .map(|v| inner_product_slices(v, state.amplitudes()).norm_sqr())
            .sum();
        if scar_weight < LEAKAGE_TOL {
            return Ok(Some(SubspacePlan::KernelComplement(kernel.to_vec())));
        }
        // A start inside (or overlapping) the scar space has no thermal
        // subspace to reference.
        return Ok(None);
    }
    Ok(None)
}

fn decode_digits(mut idx: usize, n: usize, d: usize) -> Vec<usize> {
    let mut digits = vec![0usize; n];
    for slot in (0..n).rev() {
        digits[slot] = idx % d;
        idx /= d;
    }
    digits
}

fn digits_string(digits: &[usize]) -> String {
    digits.iter().map(|v| v.to_string()).collect()
}

/// Haar state with its scar components projected out, renormalized.
fn haar_state_orthogonal_to(
    kernel: &[Vec<Complex64>],
    n: usize,
    d: usize,
    seed: u64,
) -> CliResult<StateVector> {
    let dim = d.pow(n as u32);
    let mut rng = seeded_rng(seed);
    let mut amps = hse_core::haar::sample_haar_state(dim, &mut rng);
    for v in kernel {
        let overlap = inner_product_slices(v, &amps);
        for (a, &b) in amps.iter_mut().zip(v.iter()) {
            *a -= overlap * b;
        }
    }
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-6 {
        return Err(CliError::numerical(
            "orthogonalized start collapsed onto the scar space",
        ));
    }
    for a in amps.iter_mut() {
        *a /= norm;
    }
    Ok(StateVector::from_amplitudes(n, d, amps)?)
}

/// One metric sample: `delta_full` and optionally `delta_sub` at (t, k).
#[derive(Debug, Clone, Copy)]
struct MetricCell {
    t: usize,
    k: u32,
    delta_full: f64,
    delta_sub: Option<f64>,
}

/// Run one (instance, start) evolution and sample the metrics on the grid.
fn run_moment_item(
    cfg: &ResolvedConfig,
    start: &StartPlan,
    checkpoints: &[usize],
    instance_seed: u64,
) -> CliResult<Vec<MetricCell>> {
    let mut rng = seeded_rng(instance_seed);
    let model = build_circuit(start.family, cfg.n_sites, cfg.local_dim, &mut rng)?;
    let dim = model.dim();
    let k_max = *cfg.moments.iter().max().unwrap();
    let mut ensemble = TemporalEnsemble::new(dim, k_max);
    let sched = schedule(cfg.horizon - 1);
    let mut cells = Vec::with_capacity(checkpoints.len() * cfg.moments.len());
    let mut next_cp = 0usize;
    let sub_dim = start.subspace.as_ref().map(|s| s.effective_dim(dim));
    model.evolve_visit(&start.state, &sched, |t, state| {
        ensemble.accumulate_state(state.amplitudes())?;
        let count = t + 1;
        if next_cp < checkpoints.len() && checkpoints[next_cp] == count {
            if let Some(plan) = &start.subspace {
                let leak = plan.leakage(state.amplitudes());
                if leak > LEAKAGE_TOL {
                    return Err(hse_core::Error::Numerical(format!(
                        "start '{}' leaked {leak:e} outside its subspace at T={count}",
                        start.label
                    )));
                }
            }
            for &k in &cfg.moments {
                let delta_full = delta_gram(&ensemble, k, dim)?;
                let delta_sub = match sub_dim {
                    Some(sd) => Some(delta_gram(&ensemble, k, sd)?),
                    None => None,
                };
                cells.push(MetricCell { t: count, k, delta_full, delta_sub });
            }
            next_cp += 1;
        }
        Ok(())
    })?;
    Ok(cells)
}

type SeedsAndGrid = (Vec<u64>, Vec<usize>);

fn moment_experiment(cfg: &ResolvedConfig, writer: &mut RunWriter) -> CliResult<SeedsAndGrid> {
    let checkpoints = checkpoint_grid(cfg.horizon, cfg.per_decade);
    let starts = expand_starts(cfg)?;
    if starts.is_empty() {
        return Err(CliError::config("no initial states to run"));
    }
    let child_seeds: Vec<u64> = (0..cfg.instances)
        .map(|i| derive_seed(cfg.seed, stream::INSTANCE + i as u64))
        .collect();

    // (instance, start) work items, grouped back by index afterwards.
    let items: Vec<(usize, usize)> = (0..cfg.instances)
        .flat_map(|i| (0..starts.len()).map(move |s| (i, s)))
        .collect();
    let results: Vec<CliResult<Vec<MetricCell>>> = items
        .par_iter()
        .map(|&(i, s)| run_moment_item(cfg, &starts[s], &checkpoints, child_seeds[i]))
        .collect();

    let mut per_instance: Vec<Vec<Vec<MetricCell>>> =
        vec![Vec::with_capacity(starts.len()); cfg.instances];
    for (&(i, _s), result) in items.iter().zip(results.into_iter()) {
        per_instance[i].push(result?);
    }

    let dim = cfg.local_dim.pow(cfg.n_sites as u32);
    for (i, tables) in per_instance.iter().enumerate() {
        let doc = instance_csv(&starts, tables, dim);
        writer.emit(&format!("instance_{i}.csv"), &doc)?;
    }
    let doc = aggregate_csv(&starts, &per_instance)?;
    writer.emit("aggregate.csv", &doc)?;
    Ok((child_seeds, checkpoints))
}

fn instance_csv(
    starts: &[StartPlan],
    tables: &[Vec<MetricCell>],
    dim: usize,
) -> String {
    let header = "t,k,initial,delta_full,delta_subspace,bound_lb,cross_bound";
    let mut rows = Vec::new();
    for (start, cells) in starts.iter().zip(tables.iter()) {
        let sub_dim = start.subspace.as_ref().map(|s| s.effective_dim(dim));
        for cell in cells {
            // The bound exists for k >= 2 and needs at least a 2-dim
            // reference space (frozen 1-dim sectors have none).
            let bound_dim = sub_dim.unwrap_or(dim);
            let bound_lb = if cell.k >= 2 && bound_dim >= 2 {
                Some(hs_lower_bound(bound_dim))
            } else {
                None
            };
            let cross = sub_dim
                .map(|sd| cross_haar_distance(dim, sd, cell.k).unwrap_or(f64::NAN));
            rows.push(format!(
                "{},{},{},{},{},{},{}",
                cell.t,
                cell.k,
                start.label,
                fmt_float(Some(cell.delta_full)),
                fmt_float(cell.delta_sub),
                fmt_float(bound_lb),
                fmt_float(cross),
            ));
        }
    }
    csv_document(header, rows.into_iter())
}

fn aggregate_csv(
    starts: &[StartPlan],
    per_instance: &[Vec<Vec<MetricCell>>],
) -> CliResult<String> {
    let header = "t,k,initial,metric,mean,p10,p90";
    let mut rows = Vec::new();
    for (s, start) in starts.iter().enumerate() {
        let cells0 = &per_instance[0][s];
        // delta_full aggregation.
        let full_tables: Vec<Vec<f64>> = per_instance
            .iter()
            .map(|inst| inst[s].iter().map(|c| c.delta_full).collect())
            .collect();
        let full_bands = aggregate_instances(&full_tables)?;
        for (cell, band) in cells0.iter().zip(full_bands.iter()) {
            rows.push(format!(
                "{},{},{},delta_full,{},{},{}",
                cell.t,
                cell.k,
                start.label,
                fmt_float(Some(band.mean)),
                fmt_float(Some(band.p10)),
                fmt_float(Some(band.p90)),
            ));
        }
        if cells0.iter().any(|c| c.delta_sub.is_some()) {
            let sub_tables: Vec<Vec<f64>> = per_instance
                .iter()
                .map(|inst| {
                    inst[s]
                        .iter()
                        .map(|c| c.delta_sub.unwrap_or(f64::NAN))
                        .collect()
                })
                .collect();
            let sub_bands = aggregate_instances(&sub_tables)?;
            for (cell, band) in cells0.iter().zip(sub_bands.iter()) {
                rows.push(format!(
                    "{},{},{},delta_subspace,{},{},{}",
                    cell.t,
                    cell.k,
                    start.label,
                    fmt_float(Some(band.mean)),
                    fmt_float(Some(band.p10)),
                    fmt_float(Some(band.p90)),
                ));
            }
        }
    }
    Ok(csv_document(header, rows.into_iter()))
}

fn dee_experiment(cfg: &ResolvedConfig, writer: &mut RunWriter) -> CliResult<SeedsAndGrid> {
    let checkpoints = checkpoint_grid(cfg.horizon, cfg.per_decade);
    let starts = expand_starts(cfg)?;
    let instance_seed = derive_seed(cfg.seed, stream::INSTANCE);
    let params = DeeParams {
        count: cfg.dee_count,
        epsilon: cfg.dee_epsilon,
        repeats: cfg.dee_repeats,
        reference: cfg.dee_reference.to_core(),
    };

    let mut aggregate_rows = Vec::new();
    for (s, start) in starts.iter().enumerate() {
        let mut rng = seeded_rng(instance_seed);
        let model = build_circuit(start.family, cfg.n_sites, cfg.local_dim, &mut rng)?;
        let states = evolve_series(&model, &start.state, cfg.horizon)?;
        let subspace: Option<Vec<usize>> = if cfg.dee_subspace_reference {
            match &start.subspace {
                Some(SubspacePlan::BasisIndices(v)) => Some(v.clone()),
                _ => {
                    return Err(CliError::config(
                        "dee_subspace_reference needs a basis start with a Krylov sector",
                    ))
                }
            }
        } else {
            None
        };
        let rep_seeds: Vec<u64> = (0..params.repeats)
            .map(|r| derive_seed(instance_seed, (s as u64) << 32 | r as u64))
            .collect();
        let rep_results: Vec<CliResult<(Vec<f64>, usize)>> = rep_seeds
            .par_iter()
            .map(|&seed| {
                dee_single_repetition(
                    &states,
                    &checkpoints,
                    &params,
                    subspace.as_deref(),
                    seed,
                )
                .map_err(CliError::from)
            })
            .collect();
        let mut curves = Vec::with_capacity(params.repeats);
        let mut m_primes = Vec::with_capacity(params.repeats);
        for r in rep_results {
            let (curve, m_prime) = r?;
            curves.push(curve);
            m_primes.push(m_prime);
        }
        let points = summarize_dee_curves(&checkpoints, &curves);
        let m_prime_min = *m_primes.iter().min().unwrap();

        let header = "T,dee_min,dee_mean,dee_max,m_prime,epsilon,seed";
        let rows: Vec<String> = points
            .iter()
            .map(|p| {
                format!(
                    "{},{},{},{},{},{},{}",
                    p.horizon,
                    fmt_float(Some(p.min)),
                    fmt_float(Some(p.mean)),
                    fmt_float(Some(p.max)),
                    m_prime_min,
                    fmt_float(Some(cfg.dee_epsilon)),
                    cfg.seed,
                )
            })
            .collect();
        writer.emit(
            &format!("dee_{}.csv", sanitize(&start.label)),
            &csv_document(header, rows.clone().into_iter()),
        )?;
        for row in rows {
            aggregate_rows.push(format!("{},{row}", start.label));
        }
    }
    let header = "initial,T,dee_min,dee_mean,dee_max,m_prime,epsilon,seed";
    writer.emit("aggregate.csv", &csv_document(header, aggregate_rows.into_iter()))?;
    Ok((vec![instance_seed], checkpoints))
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn diagnostics_experiment(
    cfg: &ResolvedConfig,
    writer: &mut RunWriter,
) -> CliResult<SeedsAndGrid> {
    let starts = expand_starts(cfg)?;
    let child_seeds: Vec<u64> = (0..cfg.instances)
        .map(|i| derive_seed(cfg.seed, stream::INSTANCE + i as u64))
        .collect();
    let obs_kind = observable_for_dim(cfg.local_dim)?;
    let site = cfg.n_sites / 2;
    let family_label = cfg.family.label();

    struct InstanceSeries {
        autocorr: Vec<f64>,
        entropies: Vec<Vec<f64>>,
    }

    let results: Vec<CliResult<InstanceSeries>> = child_seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = seeded_rng(seed);
            let family = starts
                .first()
                .map(|s| s.family)
                .unwrap_or(ModelFamily::Generic);
            let model = build_circuit(family, cfg.n_sites, cfg.local_dim, &mut rng)?;
            let obs = local_observable(obs_kind, cfg.local_dim)?;
            let autocorr = autocorrelator_series(&model, &obs, site, cfg.horizon)?;
            let mut entropies = Vec::with_capacity(starts.len());
            for start in &starts {
                entropies.push(bipartite_entropy_series(&model, &start.state, cfg.horizon)?);
            }
            Ok(InstanceSeries { autocorr, entropies })
        })
        .collect();
    let mut series = Vec::with_capacity(cfg.instances);
    for r in results {
        series.push(r?);
    }

    // Per-instance CSVs.
    for (i, inst) in series.iter().enumerate() {
        let header = "t,value,observable,model,instance";
        let mut rows = Vec::new();
        for (t, v) in inst.autocorr.iter().enumerate() {
            rows.push(format!(
                "{t},{},{},{family_label},{i}",
                fmt_float(Some(*v)),
                obs_kind.label()
            ));
        }
        for (start, ent) in starts.iter().zip(inst.entropies.iter()) {
            for (t, v) in ent.iter().enumerate() {
                rows.push(format!(
                    "{t},{},entropy[{}],{family_label},{i}",
                    fmt_float(Some(*v)),
                    start.label
                ));
            }
        }
        writer.emit(&format!("instance_{i}.csv"), &csv_document(header, rows.into_iter()))?;
    }

    // Aggregate: mean/p10/p90 across instances per (t, observable).
    let header = "t,observable,model,mean,p10,p90";
    let mut rows = Vec::new();
    let auto_tables: Vec<Vec<f64>> = series.iter().map(|s| s.autocorr.clone()).collect();
    for (t, band) in aggregate_instances(&auto_tables)?.iter().enumerate() {
        rows.push(format!(
            "{t},{},{family_label},{},{},{}",
            obs_kind.label(),
            fmt_float(Some(band.mean)),
            fmt_float(Some(band.p10)),
            fmt_float(Some(band.p90)),
        ));
    }
    for (s, start) in starts.iter().enumerate() {
        let tables: Vec<Vec<f64>> = series.iter().map(|x| x.entropies[s].clone()).collect();
        for (t, band) in aggregate_instances(&tables)?.iter().enumerate() {
            rows.push(format!(
                "{t},entropy[{}],{family_label},{},{},{}",
                start.label,
                fmt_float(Some(band.mean)),
                fmt_float(Some(band.p10)),
                fmt_float(Some(band.p90)),
            ));
        }
    }
    writer.emit("aggregate.csv", &csv_document(header, rows.into_iter()))?;
    let grid: Vec<usize> = (0..=cfg.horizon).collect();
    Ok((child_seeds, grid))
}

fn krylov_experiment(cfg: &ResolvedConfig, writer: &mut RunWriter) -> CliResult<SeedsAndGrid> {
    let n = cfg.n_sites;
    let d = cfg.local_dim;
    let decomp = pair_flip_components(n, d)?;

    let mut dims_histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for sector in decomp.sectors() {
        *dims_histogram.entry(sector.len()).or_insert(0) += 1;
    }

    #[derive(serde::Serialize)]
    struct SectorEntry {
        id: usize,
        dimension: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        staggered_label: Option<i64>,
        indices: Vec<usize>,
    }
    #[derive(serde::Serialize)]
    struct FormulaBlock {
        #[serde(skip_serializing_if = "Option::is_none")]
        sector_count: Option<u128>,
        frozen_states: u128,
        #[serde(skip_serializing_if = "Option::is_none")]
        largest_sector: Option<u128>,
        commutant_dimension: u128,
    }
    #[derive(serde::Serialize)]
    struct BfsBlock {
        sector_count: usize,
        frozen_states: usize,
        largest_sector: usize,
        dims_histogram: BTreeMap<usize, usize>,
    }
    #[derive(serde::Serialize)]
    struct SectorsDoc {
        n_sites: usize,
        local_dim: usize,
        bfs: BfsBlock,
        formulas: FormulaBlock,
        consistent: bool,
        sectors: Vec<SectorEntry>,
    }

    let formulas = FormulaBlock {
        sector_count: if d >= 3 {
            Some(count_sectors_formula(n, d).map_err(CliError::from)?)
        } else {
            None
        },
        frozen_states: frozen_state_count(n, d)?,
        largest_sector: if d >= 3 && n % 2 == 0 {
            Some(largest_sector_formula(n, d)?)
        } else {
            None
        },
        commutant_dimension: commutant_dimension(n, d)?,
    };
    let bfs = BfsBlock {
        sector_count: decomp.sector_count(),
        frozen_states: decomp.frozen_count(),
        largest_sector: decomp.largest_dim(),
        dims_histogram: dims_histogram.clone(),
    };
    let mut consistent = formulas.frozen_states == bfs.frozen_states as u128
        && formulas.commutant_dimension == bfs.sector_count as u128;
    if let Some(c) = formulas.sector_count {
        consistent &= c == bfs.sector_count as u128;
    }
    if let Some(l) = formulas.largest_sector {
        consistent &= l == bfs.largest_sector as u128;
    }

    let sectors: Vec<SectorEntry> = decomp
        .sectors()
        .iter()
        .enumerate()
        .map(|(id, indices)| SectorEntry {
            id,
            dimension: indices.len(),
            staggered_label: if d == 2 {
                staggered_sector_label(indices[0], n).ok()
            } else {
                None
            },
            indices: indices.clone(),
        })
        .collect();

    let doc = SectorsDoc {
        n_sites: n,
        local_dim: d,
        bfs,
        formulas,
        consistent,
        sectors,
    };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::io(format!("sectors serialization: {e}")))?;
    writer.emit("sectors.json", &format!("{text}\n"))?;

    println!(
        "krylov audit N={n} d={d}: {} sectors, {} frozen, largest {}",
        decomp.sector_count(),
        decomp.frozen_count(),
        decomp.largest_dim()
    );
    for (dim, count) in &dims_histogram {
        println!("  {count} sector(s) of dimension {dim}");
    }
    println!("  formula cross-checks consistent: {consistent}");
    if !consistent {
        return Err(CliError::numerical(
            "closed-form sector counts disagree with the reachability decomposition",
        ));
    }
    Ok((vec![], vec![]))
}
