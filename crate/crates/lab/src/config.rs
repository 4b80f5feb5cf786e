//! Experiment configuration: strict JSON, one schema.

use std::collections::BTreeMap;
use std::fmt;
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::str::FromStr;

use rrdo_core::ensemble::{MatrixEnsemble, ParamDist, SpinParamDist};
use rrdo_core::markov::{as_rrdo, StochasticMatrix};
use rrdo_core::rrdo::{NormDescriptor, Rrdo, DEFAULT_CLUSTER_TOL};
use rrdo_core::{c64, ComplexMatrix, ComplexVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Decay,
    Cesaro,
    ForwardLimit,
    Lyapunov,
    Markov,
    SpinTau,
    SpinEnergy,
    Factorization,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Decay,
        ExperimentKind::Cesaro,
        ExperimentKind::ForwardLimit,
        ExperimentKind::Lyapunov,
        ExperimentKind::Markov,
        ExperimentKind::SpinTau,
        ExperimentKind::SpinEnergy,
        ExperimentKind::Factorization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Decay => "decay",
            ExperimentKind::Cesaro => "cesaro",
            ExperimentKind::ForwardLimit => "forward-limit",
            ExperimentKind::Lyapunov => "lyapunov",
            ExperimentKind::Markov => "markov",
            ExperimentKind::SpinTau => "spin-tau",
            ExperimentKind::SpinEnergy => "spin-energy",
            ExperimentKind::Factorization => "factorization",
        }
    }

    /// Smallest step count the experiment's estimators accept.
    pub fn min_steps(self) -> usize {
        match self {
            ExperimentKind::Decay | ExperimentKind::SpinTau => 4,
            ExperimentKind::ForwardLimit => 8,
            ExperimentKind::Lyapunov => 100,
            _ => 1,
        }
    }

    /// Tolerance names with their defaults.
    pub fn default_tolerances(self) -> &'static [(&'static str, f64)] {
        match self {
            ExperimentKind::Decay => &[
                ("cluster", DEFAULT_CLUSTER_TOL),
                ("decomposition_per_step", 1e-8),
                ("r_squared_min", 0.9),
                ("alpha_rel", 0.05),
            ],
            ExperimentKind::Cesaro => &[
                ("cluster", DEFAULT_CLUSTER_TOL),
                ("sigma_multiple", 5.0),
                ("closed_form_agreement", 1e-8),
            ],
            ExperimentKind::ForwardLimit => {
                &[("cluster", DEFAULT_CLUSTER_TOL), ("convergence", 1e-8)]
            }
            ExperimentKind::Lyapunov => &[
                ("cluster", DEFAULT_CLUSTER_TOL),
                ("top_exponent", 1e-3),
                ("gap_fraction", 0.5),
            ],
            ExperimentKind::Markov => &[
                ("cluster", DEFAULT_CLUSTER_TOL),
                ("rank_one", 1e-10),
                ("row_agreement", 1e-9),
                ("std_errors", 3.0),
            ],
            ExperimentKind::SpinTau => &[
                ("cluster", DEFAULT_CLUSTER_TOL),
                ("gibbs_residual", 1e-6),
                ("r_squared_min", 0.95),
                ("resonance_margin", 0.1),
            ],
            ExperimentKind::SpinEnergy => &[
                ("cluster", DEFAULT_CLUSTER_TOL),
                ("sigma_multiple", 5.0),
                ("bias", 1e-3),
                ("beta_degenerate", 1e-10),
            ],
            ExperimentKind::Factorization => &[
                ("cluster", DEFAULT_CLUSTER_TOL),
                ("kernel", 1e-12),
                ("tomita", 1e-12),
                ("intertwining", 1e-10),
                ("factorization", 1e-10),
                ("e0_spectrum", 1e-8),
            ],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown experiment `{}` (expected one of {})",
                    s,
                    names.join(", ")
                )
            })
    }
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Complex {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Complex> for c64 {
    fn from(z: Complex) -> c64 {
        match z {
            Complex::Real(re) => c64::new(re, 0.0),
            Complex::Pair([re, im]) => c64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormSpec {
    Named(String),
    ReferenceInduced {
        #[serde(rename = "reference-induced")]
        reference: Vec<Complex>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteAtom {
    pub matrix: Vec<Vec<Complex>>,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticAtom {
    pub rows: Vec<Vec<f64>>,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// A number, `{"uniform": [lo, hi]}` or `{"discrete": [[value, weight], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistSpec {
    Fixed(f64),
    Uniform { uniform: [f64; 2] },
    Discrete { discrete: Vec<[f64; 2]> },
}

impl DistSpec {
    pub fn to_dist(&self) -> ParamDist {
        match self {
            DistSpec::Fixed(x) => ParamDist::Fixed(*x),
            DistSpec::Uniform { uniform: [lo, hi] } => ParamDist::Uniform { lo: *lo, hi: *hi },
            DistSpec::Discrete { discrete } => {
                ParamDist::Discrete(discrete.iter().map(|[v, w]| (*v, *w)).collect())
            }
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, DistSpec::Fixed(_))
    }

    /// Fixed value, interval midpoint, or weighted mean.
    pub fn representative(&self) -> f64 {
        match self {
            DistSpec::Fixed(x) => *x,
            DistSpec::Uniform { uniform: [lo, hi] } => 0.5 * (lo + hi),
            DistSpec::Discrete { discrete } => {
                let w: f64 = discrete.iter().map(|p| p[1]).sum();
                discrete.iter().map(|p| p[0] * p[1]).sum::<f64>() / w
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnsembleSpec {
    Finite {
        norm: NormSpec,
        psi_s: Vec<Complex>,
        atoms: Vec<FiniteAtom>,
    },
    Stochastic {
        atoms: Vec<StochasticAtom>,
    },
    Dirichlet {
        dim: usize,
        alpha: f64,
    },
    Spin {
        e_s: DistSpec,
        e_e: DistSpec,
        beta: DistSpec,
        lambda: DistSpec,
        tau: DistSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mc_samples: Option<NonZeroUsize>,
    },
}

impl EnsembleSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            EnsembleSpec::Finite { .. } => "finite",
            EnsembleSpec::Stochastic { .. } => "stochastic",
            EnsembleSpec::Dirichlet { .. } => "dirichlet",
            EnsembleSpec::Spin { .. } => "spin",
        }
    }

    pub fn spin_dist(&self) -> Option<SpinParamDist> {
        match self {
            EnsembleSpec::Spin {
                e_s,
                e_e,
                beta,
                lambda,
                tau,
                ..
            } => Some(SpinParamDist {
                e_s: e_s.to_dist(),
                e_e: e_e.to_dist(),
                beta: beta.to_dist(),
                lambda: lambda.to_dist(),
                tau: tau.to_dist(),
            }),
            _ => None,
        }
    }

    pub fn build(&self, cluster_tol: f64) -> Result<MatrixEnsemble, ConfigError> {
        let ctx = |e: rrdo_core::Error| ConfigError::Invalid(format!("ensemble: {}", e));
        let e = match self {
            EnsembleSpec::Finite { norm, psi_s, atoms } => {
                let psi =
                    ComplexVector::new(psi_s.iter().map(|&z| z.into()).collect()).map_err(ctx)?;
                let norm = match norm {
                    NormSpec::Named(n) if n == "euclidean" => NormDescriptor::euclidean(),
                    NormSpec::Named(n) if n == "max-row-sum" => NormDescriptor::max_row_sum(),
                    NormSpec::Named(n) => {
                        return invalid(format!(
                            "ensemble.norm: unknown norm `{}` (expected \"euclidean\", \"max-row-sum\" or {{\"reference-induced\": [...]}})",
                            n
                        ))
                    }
                    NormSpec::ReferenceInduced { reference } => {
                        let r = ComplexVector::new(reference.iter().map(|&z| z.into()).collect())
                            .map_err(ctx)?;
                        NormDescriptor::reference_induced(r).map_err(ctx)?
                    }
                };
                let mut list = Vec::with_capacity(atoms.len());
                for (i, a) in atoms.iter().enumerate() {
                    let rows: Vec<Vec<c64>> = a
                        .matrix
                        .iter()
                        .map(|r| r.iter().map(|&z| z.into()).collect())
                        .collect();
                    let m = ComplexMatrix::from_rows(&rows).map_err(ctx)?;
                    let r = Rrdo::new(m, psi.clone(), norm.clone()).map_err(|e| {
                        ConfigError::Invalid(format!("ensemble.atoms[{}]: {}", i, e))
                    })?;
                    list.push((r, a.weight, a.label.clone()));
                }
                MatrixEnsemble::finite_labeled(list).map_err(ctx)?
            }
            EnsembleSpec::Stochastic { atoms } => {
                let mut list = Vec::with_capacity(atoms.len());
                for (i, a) in atoms.iter().enumerate() {
                    let s = StochasticMatrix::new(&a.rows).map_err(|e| {
                        ConfigError::Invalid(format!("ensemble.atoms[{}]: {}", i, e))
                    })?;
                    list.push((as_rrdo(&s), a.weight, a.label.clone()));
                }
                MatrixEnsemble::finite_labeled(list).map_err(ctx)?
            }
            EnsembleSpec::Dirichlet { dim, alpha } => {
                MatrixEnsemble::dirichlet(*dim, *alpha).map_err(ctx)?
            }
            EnsembleSpec::Spin { mc_samples, .. } => {
                let dist = self.spin_dist().expect("spin variant");
                let e = MatrixEnsemble::spin(dist).map_err(ctx)?;
                match mc_samples {
                    Some(n) => e.with_mc_samples(n.get()),
                    None => e,
                }
            }
        };
        Ok(e.with_cluster_tol(cluster_tol))
    }
}

fn default_trajectories() -> NonZeroUsize {
    NonZeroUsize::MIN
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub ensemble: EnsembleSpec,
    pub steps: NonZeroUsize,
    #[serde(default = "default_trajectories")]
    pub trajectories: NonZeroUsize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances
            .get(name)
            .copied()
            .or_else(|| {
                self.experiment
                    .default_tolerances()
                    .iter()
                    .find(|(n, _)| *n == name)
                    .map(|t| t.1)
            })
            .unwrap_or_else(|| panic!("no tolerance `{}` for {}", name, self.experiment))
    }

    /// Range checks and tolerance defaults.
    pub fn validate(mut self) -> Result<Self, ConfigError> {
        let defaults = self.experiment.default_tolerances();
        for (name, v) in &self.tolerances {
            if !defaults.iter().any(|(n, _)| n == name) {
                let known: Vec<&str> = defaults.iter().map(|t| t.0).collect();
                return invalid(format!(
                    "tolerances: unknown tolerance `{}` for {} (expected one of {})",
                    name,
                    self.experiment,
                    known.join(", ")
                ));
            }
            if !(v.is_finite() && *v > 0.0) {
                return invalid(format!(
                    "tolerances.{}: must be positive and finite, got {}",
                    name, v
                ));
            }
        }
        for (name, v) in defaults {
            self.tolerances.entry(name.to_string()).or_insert(*v);
        }
        let min = self.experiment.min_steps();
        if self.steps.get() < min {
            return invalid(format!(
                "steps: {} needs at least {} steps, got {}",
                self.experiment, min, self.steps
            ));
        }
        let spin = matches!(self.ensemble, EnsembleSpec::Spin { .. });
        let needs_spin = matches!(
            self.experiment,
            ExperimentKind::SpinTau | ExperimentKind::SpinEnergy | ExperimentKind::Factorization
        );
        if needs_spin && !spin {
            return invalid(format!(
                "ensemble.kind: {} needs a spin ensemble, got {}",
                self.experiment,
                self.ensemble.kind_name()
            ));
        }
        if let (ExperimentKind::SpinTau, EnsembleSpec::Spin { e_s, e_e, beta, .. }) =
            (self.experiment, &self.ensemble)
        {
            if !(e_s.is_fixed() && e_e.is_fixed() && beta.is_fixed()) {
                return invalid("ensemble: spin-tau needs fixed e_s, e_e and beta");
            }
        }
        if self.experiment == ExperimentKind::SpinEnergy
            && self
                .ensemble
                .spin_dist()
                .and_then(|d| d.enumerate())
                .is_none()
        {
            return invalid(
                "ensemble: spin-energy needs finitely supported parameters (fixed or discrete)",
            );
        }
        if self.experiment == ExperimentKind::Markov
            && !matches!(
                self.ensemble,
                EnsembleSpec::Stochastic { .. } | EnsembleSpec::Dirichlet { .. }
            )
        {
            return invalid(format!(
                "ensemble.kind: markov needs a stochastic or dirichlet ensemble, got {}",
                self.ensemble.kind_name()
            ));
        }
        Ok(self)
    }
}

/// Strict parse plus validation. Errors carry the JSON line and column.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = serde_json::from_str(text)?;
    cfg.validate()
}
