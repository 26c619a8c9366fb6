//! Experiment configuration: a JSON document plus command-line overrides,
//! resolved against per-experiment presets into a fully concrete
//! [`ResolvedConfig`]. Precedence, lowest to highest: preset defaults,
//! config file fields, CLI flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hse_core::diagnostics::ObservableKind;
use hse_core::models::{ModelFamily, ProjectorKind};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Generic brickwork circuit, full-space moment distances.
    Gbw,
    /// Single-projector scar model (scar and non-scar starts).
    Scar,
    /// Scar models for all four projector kinds, orthogonalized Haar start.
    Multiscar,
    /// Pair-flip fragmentation at d >= 3, all (or chosen) basis starts.
    Hsf,
    /// Pair-flip at d = 2: staggered-magnetisation symmetry sectors.
    Symmetry,
    /// Discretised ensemble entropy via the randomized-binning estimator.
    Dee,
    /// Autocorrelators and bipartite entanglement entropy.
    Diagnostics,
    /// Krylov sector audit: reachability decomposition plus formulas.
    Krylov,
}

impl Experiment {
    pub fn label(self) -> &'static str {
        match self {
            Experiment::Gbw => "gbw",
            Experiment::Scar => "scar",
            Experiment::Multiscar => "multiscar",
            Experiment::Hsf => "hsf",
            Experiment::Symmetry => "symmetry",
            Experiment::Dee => "dee",
            Experiment::Diagnostics => "diagnostics",
            Experiment::Krylov => "krylov",
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "gbw" => Ok(Experiment::Gbw),
            "scar" => Ok(Experiment::Scar),
            "multiscar" => Ok(Experiment::Multiscar),
            "hsf" => Ok(Experiment::Hsf),
            "symmetry" => Ok(Experiment::Symmetry),
            "dee" => Ok(Experiment::Dee),
            "diagnostics" => Ok(Experiment::Diagnostics),
            "krylov" => Ok(Experiment::Krylov),
            other => Err(CliError::config(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Model family selector for experiments that support more than one
/// (dee, diagnostics).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyChoice {
    Generic,
    Scar,
    PairFlip,
}

impl FamilyChoice {
    pub fn label(self) -> &'static str {
        match self {
            FamilyChoice::Generic => "generic",
            FamilyChoice::Scar => "scar",
            FamilyChoice::PairFlip => "pair_flip",
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "generic" => Ok(FamilyChoice::Generic),
            "scar" => Ok(FamilyChoice::Scar),
            "pair_flip" | "pair-flip" => Ok(FamilyChoice::PairFlip),
            other => Err(CliError::config(format!("unknown model family '{other}'"))),
        }
    }

    pub fn to_model_family(self, projector: ProjectorKind) -> ModelFamily {
        match self {
            FamilyChoice::Generic => ModelFamily::Generic,
            FamilyChoice::Scar => ModelFamily::Scar(projector),
            FamilyChoice::PairFlip => ModelFamily::PairFlip,
        }
    }
}

/// How an initial state is specified in config files and on the CLI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialStateSpec {
    /// `zeros`: |0...0>
    Zeros,
    /// `ones`: |1...1>
    Ones,
    /// `plus`: the uniform superposition of all basis states.
    Plus,
    /// `all-basis`: one start per computational basis state.
    AllBasis,
    /// `basis:0121`: explicit per-site levels.
    Basis(Vec<usize>),
    /// `haar-nonscar`: a Haar state orthogonalized against the scar space
    /// (scar/multiscar only).
    HaarNonScar,
}

impl InitialStateSpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "zeros" => Ok(InitialStateSpec::Zeros),
            "ones" => Ok(InitialStateSpec::Ones),
            "plus" => Ok(InitialStateSpec::Plus),
            "all-basis" => Ok(InitialStateSpec::AllBasis),
            "haar-nonscar" => Ok(InitialStateSpec::HaarNonScar),
            other => {
                if let Some(digits) = other.strip_prefix("basis:") {
                    let parsed: Option<Vec<usize>> = digits
                        .chars()
                        .map(|c| c.to_digit(10).map(|v| v as usize))
                        .collect();
                    match parsed {
                        Some(v) if !v.is_empty() => Ok(InitialStateSpec::Basis(v)),
                        _ => Err(CliError::config(format!(
                            "bad basis state spec '{other}'"
                        ))),
                    }
                } else {
                    Err(CliError::config(format!("unknown initial state '{other}'")))
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            InitialStateSpec::Zeros => "zeros".into(),
            InitialStateSpec::Ones => "ones".into(),
            InitialStateSpec::Plus => "plus".into(),
            InitialStateSpec::AllBasis => "all-basis".into(),
            InitialStateSpec::Basis(d) => {
                let digits: String = d.iter().map(|v| v.to_string()).collect();
                format!("basis:{digits}")
            }
            InitialStateSpec::HaarNonScar => "haar-nonscar".into(),
        }
    }
}

fn parse_projector(s: &str) -> CliResult<ProjectorKind> {
    match s {
        "p1" => Ok(ProjectorKind::P1),
        "p2" => Ok(ProjectorKind::P2),
        "pexp" => Ok(ProjectorKind::Pexp),
        "plin" => Ok(ProjectorKind::Plin),
        other => Err(CliError::config(format!("unknown projector kind '{other}'"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeeReferenceChoice {
    /// Exact flat reference distribution over the retained references.
    Uniform,
    /// Empirical: bin one fresh Haar comparison state per temporal state.
    Sampled,
}

impl DeeReferenceChoice {
    pub fn to_core(self) -> hse_core::entropy::DeeReference {
        match self {
            DeeReferenceChoice::Uniform => hse_core::entropy::DeeReference::Uniform,
            DeeReferenceChoice::Sampled => hse_core::entropy::DeeReference::Sampled,
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "uniform" => Ok(DeeReferenceChoice::Uniform),
            "sampled" => Ok(DeeReferenceChoice::Sampled),
            other => Err(CliError::config(format!("unknown dee reference '{other}'"))),
        }
    }
}

/// Raw config-file schema. Every field is optional; the experiment preset
/// fills in anything missing.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub n_sites: Option<usize>,
    pub local_dim: Option<usize>,
    pub horizon: Option<usize>,
    pub instances: Option<usize>,
    pub moments: Option<Vec<u32>>,
    pub initial_states: Option<Vec<String>>,
    pub projector: Option<String>,
    pub projectors: Option<Vec<String>>,
    pub subspace_reference: Option<bool>,
    pub family: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: Option<String>,
    pub per_decade: Option<usize>,
    pub dee_count: Option<usize>,
    pub dee_epsilon: Option<f64>,
    pub dee_repeats: Option<usize>,
    pub dee_reference: Option<String>,
    pub dee_subspace_reference: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
    }
}

/// Command-line overrides (all optional).
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub experiment: Option<String>,
    pub n_sites: Option<usize>,
    pub local_dim: Option<usize>,
    pub horizon: Option<usize>,
    pub instances: Option<usize>,
    pub moments: Option<Vec<u32>>,
    pub initial_states: Option<Vec<String>>,
    pub projector: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: Option<String>,
    pub per_decade: Option<usize>,
    pub family: Option<String>,
    pub dee_count: Option<usize>,
    pub dee_epsilon: Option<f64>,
    pub dee_repeats: Option<usize>,
    pub dee_reference: Option<String>,
}

/// Fully concrete configuration, validated for the chosen experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub n_sites: usize,
    pub local_dim: usize,
    pub horizon: usize,
    pub instances: usize,
    pub moments: Vec<u32>,
    #[serde(serialize_with = "serialize_initial_states")]
    pub initial_states: Vec<InitialStateSpec>,
    #[serde(serialize_with = "serialize_projectors")]
    pub projectors: Vec<ProjectorKind>,
    pub subspace_reference: bool,
    pub family: FamilyChoice,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub per_decade: usize,
    pub dee_count: usize,
    pub dee_epsilon: f64,
    pub dee_repeats: usize,
    pub dee_reference: DeeReferenceChoice,
    /// When true, DEE reference states are drawn from the start state's
    /// Krylov sector instead of the full space.
    pub dee_subspace_reference: bool,
}

fn serialize_initial_states<S: serde::Serializer>(
    v: &[InitialStateSpec],
    s: S,
) -> Result<S::Ok, S::Error> {
    let labels: Vec<String> = v.iter().map(|x| x.label()).collect();
    labels.serialize(s)
}

fn serialize_projectors<S: serde::Serializer>(
    v: &[ProjectorKind],
    s: S,
) -> Result<S::Ok, S::Error> {
    let labels: Vec<&str> = v.iter().map(|x| x.label()).collect();
    labels.serialize(s)
}

struct Preset {
    n_sites: usize,
    local_dim: usize,
    horizon: usize,
    instances: usize,
    moments: &'static [u32],
    initial_states: &'static [&'static str],
    projectors: &'static [&'static str],
    subspace_reference: bool,
    family: FamilyChoice,
}

fn preset(experiment: Experiment, family: FamilyChoice) -> Preset {
    match experiment {
        Experiment::Gbw => Preset {
            n_sites: 4,
            local_dim: 2,
            horizon: 10_000,
            instances: 100,
            moments: &[1, 2],
            initial_states: &["zeros", "plus"],
            projectors: &[],
            subspace_reference: false,
            family: FamilyChoice::Generic,
        },
        Experiment::Scar => Preset {
            n_sites: 4,
            local_dim: 2,
            horizon: 10_000,
            instances: 100,
            moments: &[1, 2],
            initial_states: &["zeros", "ones"],
            projectors: &["p1"],
            subspace_reference: true,
            family: FamilyChoice::Scar,
        },
        Experiment::Multiscar => Preset {
            n_sites: 4,
            local_dim: 3,
            horizon: 10_000,
            instances: 4,
            moments: &[1],
            initial_states: &["haar-nonscar"],
            projectors: &["p1", "p2", "pexp", "plin"],
            subspace_reference: true,
            family: FamilyChoice::Scar,
        },
        Experiment::Hsf => Preset {
            n_sites: 4,
            local_dim: 3,
            horizon: 10_000,
            instances: 1,
            moments: &[1, 2],
            initial_states: &["all-basis"],
            projectors: &[],
            subspace_reference: true,
            family: FamilyChoice::PairFlip,
        },
        Experiment::Symmetry => Preset {
            n_sites: 4,
            local_dim: 2,
            horizon: 10_000,
            instances: 1,
            moments: &[1, 2],
            initial_states: &["all-basis"],
            projectors: &[],
            subspace_reference: true,
            family: FamilyChoice::PairFlip,
        },
        Experiment::Dee => Preset {
            n_sites: 4,
            local_dim: match family {
                FamilyChoice::PairFlip => 3,
                _ => 2,
            },
            horizon: 10_000,
            instances: 1,
            moments: &[1],
            initial_states: match family {
                FamilyChoice::Scar => &["zeros", "ones"],
                _ => &["zeros"],
            },
            projectors: &["p1"],
            subspace_reference: false,
            family,
        },
        Experiment::Diagnostics => Preset {
            n_sites: 4,
            local_dim: match family {
                FamilyChoice::PairFlip => 3,
                _ => 2,
            },
            horizon: 1_000,
            instances: 5,
            moments: &[1],
            initial_states: match family {
                FamilyChoice::Scar => &["zeros", "ones"],
                FamilyChoice::PairFlip => &["zeros", "basis:0012", "basis:0120"],
                FamilyChoice::Generic => &["zeros", "plus"],
            },
            projectors: &["p1"],
            subspace_reference: false,
            family,
        },
        Experiment::Krylov => Preset {
            n_sites: 4,
            local_dim: 3,
            horizon: 1,
            instances: 1,
            moments: &[1],
            initial_states: &[],
            projectors: &[],
            subspace_reference: false,
            family: FamilyChoice::PairFlip,
        },
    }
}

/// Layer preset < file < flags, then validate.
pub fn resolve(file: &ConfigFile, flags: &CliOverrides) -> CliResult<ResolvedConfig> {
    let experiment_str = flags
        .experiment
        .clone()
        .or_else(|| file.experiment.clone())
        .ok_or_else(|| CliError::config("no experiment selected (config or --experiment)"))?;
    let experiment = Experiment::parse(&experiment_str)?;

    let family_str = flags.family.clone().or_else(|| file.family.clone());
    let family = match family_str {
        Some(s) => FamilyChoice::parse(&s)?,
        None => preset(experiment, FamilyChoice::Generic).family,
    };
    let p = preset(experiment, family);

    let projectors: Vec<ProjectorKind> = match (&flags.projector, &file.projector, &file.projectors)
    {
        (Some(s), _, _) => vec![parse_projector(s)?],
        (None, Some(s), _) => vec![parse_projector(s)?],
        (None, None, Some(list)) => list
            .iter()
            .map(|s| parse_projector(s))
            .collect::<CliResult<_>>()?,
        (None, None, None) => p
            .projectors
            .iter()
            .map(|s| parse_projector(s))
            .collect::<CliResult<_>>()?,
    };

    let initial_strings: Vec<String> = flags
        .initial_states
        .clone()
        .or_else(|| file.initial_states.clone())
        .unwrap_or_else(|| p.initial_states.iter().map(|s| s.to_string()).collect());
    let initial_states: Vec<InitialStateSpec> = initial_strings
        .iter()
        .map(|s| InitialStateSpec::parse(s))
        .collect::<CliResult<_>>()?;

    let dee_reference = match flags
        .dee_reference
        .clone()
        .or_else(|| file.dee_reference.clone())
    {
        Some(s) => DeeReferenceChoice::parse(&s)?,
        None => DeeReferenceChoice::Uniform,
    };

    let cfg = ResolvedConfig {
        experiment,
        n_sites: flags.n_sites.or(file.n_sites).unwrap_or(p.n_sites),
        local_dim: flags.local_dim.or(file.local_dim).unwrap_or(p.local_dim),
        horizon: flags.horizon.or(file.horizon).unwrap_or(p.horizon),
        instances: flags.instances.or(file.instances).unwrap_or(p.instances),
        moments: flags
            .moments
            .clone()
            .or_else(|| file.moments.clone())
            .unwrap_or_else(|| p.moments.to_vec()),
        initial_states,
        projectors,
        subspace_reference: file.subspace_reference.unwrap_or(p.subspace_reference),
        family,
        seed: flags.seed.or(file.seed).unwrap_or(7),
        out_dir: PathBuf::from(
            flags
                .out_dir
                .clone()
                .or_else(|| file.out_dir.clone())
                .unwrap_or_else(|| format!("hse_out/{}", experiment.label())),
        ),
        per_decade: flags.per_decade.or(file.per_decade).unwrap_or(30),
        dee_count: flags.dee_count.or(file.dee_count).unwrap_or(1000),
        dee_epsilon: flags.dee_epsilon.or(file.dee_epsilon).unwrap_or(0.1),
        dee_repeats: flags.dee_repeats.or(file.dee_repeats).unwrap_or(20),
        dee_reference,
        dee_subspace_reference: file.dee_subspace_reference.unwrap_or(false),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ResolvedConfig) -> CliResult<()> {
    if cfg.n_sites < 2 {
        return Err(CliError::config("n_sites must be at least 2"));
    }
    if cfg.local_dim < 2 {
        return Err(CliError::config("local_dim must be at least 2"));
    }
    if cfg.horizon < 1 {
        return Err(CliError::config("horizon must be at least 1"));
    }
    if cfg.instances < 1 {
        return Err(CliError::config("instances must be at least 1"));
    }
    if cfg.moments.is_empty() || cfg.moments.iter().any(|&k| k == 0) {
        return Err(CliError::config("moments must be a nonempty list of k >= 1"));
    }
    if cfg.per_decade < 1 {
        return Err(CliError::config("per_decade must be at least 1"));
    }
    let dim = (cfg.local_dim as u64).checked_pow(cfg.n_sites as u32);
    if dim.is_none() || dim.unwrap() > (1 << 20) {
        return Err(CliError::config("d^N exceeds the dense statevector cap"));
    }
    match cfg.experiment {
        Experiment::Hsf => {
            if cfg.local_dim < 3 {
                return Err(CliError::config("hsf requires local_dim >= 3"));
            }
        }
        Experiment::Symmetry => {
            if cfg.local_dim != 2 {
                return Err(CliError::config("symmetry requires local_dim = 2"));
            }
        }
        Experiment::Scar | Experiment::Multiscar => {
            if cfg.projectors.is_empty() {
                return Err(CliError::config("scar experiments need a projector kind"));
            }
            for kind in &cfg.projectors {
                if *kind != ProjectorKind::P1 && cfg.local_dim < 3 {
                    return Err(CliError::config(format!(
                        "projector {} needs local_dim >= 3",
                        kind.label()
                    )));
                }
            }
        }
        Experiment::Dee => {
            if cfg.instances != 1 {
                return Err(CliError::config("dee runs a single circuit instance"));
            }
            if cfg.dee_count < 2 {
                return Err(CliError::config("dee_count must be at least 2"));
            }
            if !(0.0..1.0).contains(&cfg.dee_epsilon) {
                return Err(CliError::config("dee_epsilon must lie in [0, 1)"));
            }
            if cfg.dee_repeats < 1 {
                return Err(CliError::config("dee_repeats must be at least 1"));
            }
            if cfg.family == FamilyChoice::PairFlip && cfg.local_dim < 2 {
                return Err(CliError::config("pair_flip dee needs local_dim >= 2"));
            }
        }
        Experiment::Diagnostics => {
            if cfg.family == FamilyChoice::PairFlip && cfg.local_dim == 2 {
                // Allowed, but the observable is then sigma_z.
            }
            if cfg.n_sites % 2 != 0 {
                return Err(CliError::config(
                    "diagnostics needs an even n_sites for the half-chain entropy",
                ));
            }
        }
        _ => {}
    }
    for spec in &cfg.initial_states {
        match spec {
            InitialStateSpec::Ones => {
                if cfg.local_dim < 2 {
                    return Err(CliError::config("'ones' needs local_dim >= 2"));
                }
            }
            InitialStateSpec::Basis(digits) => {
                if digits.len() != cfg.n_sites {
                    return Err(CliError::config(format!(
                        "basis state '{}' has {} digits, expected {}",
                        spec.label(),
                        digits.len(),
                        cfg.n_sites
                    )));
                }
                if digits.iter().any(|&v| v >= cfg.local_dim) {
                    return Err(CliError::config(format!(
                        "basis state '{}' has digits outside 0..{}",
                        spec.label(),
                        cfg.local_dim
                    )));
                }
            }
            InitialStateSpec::HaarNonScar => {
                if !matches!(cfg.experiment, Experiment::Scar | Experiment::Multiscar) {
                    return Err(CliError::config(
                        "'haar-nonscar' is only meaningful for scar experiments",
                    ));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// The observable the diagnostics experiment uses for this local dimension.
pub fn observable_for_dim(local_dim: usize) -> CliResult<ObservableKind> {
    match local_dim {
        2 => Ok(ObservableKind::SigmaZ),
        3 => Ok(ObservableKind::Spin1Z),
        other => Err(CliError::config(format!(
            "no diagnostic observable defined for d = {other}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gbw_preset_defaults() {
        let cfg = resolve(&ConfigFile::default(), &CliOverrides {
            experiment: Some("gbw".into()),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(cfg.n_sites, 4);
        assert_eq!(cfg.local_dim, 2);
        assert_eq!(cfg.horizon, 10_000);
        assert_eq!(cfg.instances, 100);
        assert_eq!(cfg.moments, vec![1, 2]);
        assert_eq!(cfg.initial_states.len(), 2);
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile {
            experiment: Some("gbw".into()),
            horizon: Some(500),
            seed: Some(1),
            ..Default::default()
        };
        let flags = CliOverrides {
            horizon: Some(100),
            ..Default::default()
        };
        let cfg = resolve(&file, &flags).unwrap();
        assert_eq!(cfg.horizon, 100);
        assert_eq!(cfg.seed, 1);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let bad = |f: &dyn Fn(&mut CliOverrides)| {
            let mut flags = CliOverrides {
                experiment: Some("gbw".into()),
                ..Default::default()
            };
            f(&mut flags);
            resolve(&ConfigFile::default(), &flags)
        };
        assert!(bad(&|f| f.horizon = Some(0)).is_err());
        assert!(bad(&|f| f.instances = Some(0)).is_err());
        assert!(bad(&|f| f.moments = Some(vec![])).is_err());
        assert!(bad(&|f| f.local_dim = Some(1)).is_err());
        assert!(bad(&|f| f.experiment = Some("nope".into())).is_err());

        // hsf needs d >= 3.
        let flags = CliOverrides {
            experiment: Some("hsf".into()),
            local_dim: Some(2),
            ..Default::default()
        };
        assert!(resolve(&ConfigFile::default(), &flags).is_err());

        // symmetry needs d = 2.
        let flags = CliOverrides {
            experiment: Some("symmetry".into()),
            local_dim: Some(3),
            ..Default::default()
        };
        assert!(resolve(&ConfigFile::default(), &flags).is_err());
    }

    #[test]
    fn initial_state_parsing() {
        assert_eq!(
            InitialStateSpec::parse("basis:0121").unwrap(),
            InitialStateSpec::Basis(vec![0, 1, 2, 1])
        );
        assert!(InitialStateSpec::parse("basis:").is_err());
        assert!(InitialStateSpec::parse("wat").is_err());
        assert_eq!(InitialStateSpec::parse("plus").unwrap(), InitialStateSpec::Plus);
    }

    #[test]
    fn basis_state_digit_validation() {
        let flags = CliOverrides {
            experiment: Some("hsf".into()),
            initial_states: Some(vec!["basis:0012".into()]),
            ..Default::default()
        };
        assert!(resolve(&ConfigFile::default(), &flags).is_ok());
        let flags = CliOverrides {
            experiment: Some("hsf".into()),
            initial_states: Some(vec!["basis:0019".into()]),
            ..Default::default()
        };
        assert!(resolve(&ConfigFile::default(), &flags).is_err());
    }

    #[test]
    fn dee_family_presets() {
        let flags = CliOverrides {
            experiment: Some("dee".into()),
            family: Some("pair_flip".into()),
            ..Default::default()
        };
        let cfg = resolve(&ConfigFile::default(), &flags).unwrap();
        assert_eq!(cfg.local_dim, 3);
        assert_eq!(cfg.dee_count, 1000);
        assert_eq!(cfg.dee_repeats, 20);
    }
}
