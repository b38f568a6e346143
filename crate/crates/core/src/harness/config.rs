//! JSON simulation configs.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "hamiltonian": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
//!   "rho0": {"random": {"dim": 2, "rank": 2, "seed": 7}},
//!   "generator": {"kind": "renyi_hom", "alpha": 1.5},
//!   "t_final": 5.0, "dt": 0.001, "record_every": 10, "tolerance": 1e-6,
//!   "observables": [{"label": "sx", "matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]}],
//!   "bipartite": {"d1": 2, "d2": 2},
//!   "allow_unnormalized": false
//! }
//! ```
//!
//! Matrices are row-major arrays of `[re, im]` pairs. `NAMBUQ_SEED`, when
//! set, replaces the seed of a random `rho0`.

use crate::dynamics::{DynamicsError, EvolutionSpec};
use crate::generators::GeneratorSpec;
use crate::matrix::{
    from_literal, random_density, BipartiteShape, DensityMatrix, HermitianMatrix, MatrixLiteral,
};
use crate::rng::resolve_seed;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field<E: std::fmt::Display>(name: &str) -> impl FnOnce(E) -> ConfigError + '_ {
    move |e| ConfigError::Field {
        field: name.to_string(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomState {
    pub dim: usize,
    pub rank: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Random { random: RandomState },
    Literal(MatrixLiteral),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub label: String,
    pub matrix: MatrixLiteral,
}

fn default_record_every() -> usize {
    1
}

fn default_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub hamiltonian: MatrixLiteral,
    pub rho0: StateSpec,
    pub generator: GeneratorSpec,
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bipartite: Option<BipartiteShape>,
    #[serde(default)]
    pub allow_unnormalized: bool,
}

/// A validated config, ready to integrate.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: SimConfig,
    pub spec: EvolutionSpec,
    pub observables: Vec<(String, HermitianMatrix)>,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    /// Checks every invariant and builds the evolution spec.
    pub fn load(self) -> Result<LoadedConfig, ConfigError> {
        let hamiltonian = from_literal(&self.hamiltonian)
            .and_then(HermitianMatrix::new)
            .map_err(field("hamiltonian"))?;
        let dim = hamiltonian.dim();
        if let Some(d) = self.dim {
            if d != dim {
                return Err(ConfigError::Field {
                    field: "dim".into(),
                    message: format!("declared {d} but hamiltonian is {dim}x{dim}"),
                });
            }
        }
        let rho0 = match &self.rho0 {
            StateSpec::Random { random } => {
                random_density(random.dim, random.rank, resolve_seed(random.seed))
                    .map_err(field("rho0.random"))?
            }
            StateSpec::Literal(lit) => from_literal(lit)
                .and_then(DensityMatrix::from_matrix)
                .map_err(field("rho0"))?,
        };
        if rho0.dim() != dim {
            return Err(ConfigError::Field {
                field: "rho0".into(),
                message: format!("state is {0}x{0} but hamiltonian is {dim}x{dim}", rho0.dim()),
            });
        }
        let shape = match self.bipartite {
            None => None,
            Some(s) => {
                let s = BipartiteShape::new(s.d1, s.d2).map_err(field("bipartite"))?;
                if s.total() != dim {
                    return Err(ConfigError::Field {
                        field: "bipartite".into(),
                        message: format!("{}x{} does not factor dimension {dim}", s.d1, s.d2),
                    });
                }
                Some(s)
            }
        };
        let generator = self.generator.build(shape).map_err(field("generator"))?;
        let mut observables = Vec::with_capacity(self.observables.len());
        for (i, o) in self.observables.iter().enumerate() {
            let name = format!("observables[{i}]");
            let m = from_literal(&o.matrix)
                .and_then(HermitianMatrix::new)
                .map_err(field(&name))?;
            if m.dim() != dim {
                return Err(ConfigError::Field {
                    field: name,
                    message: format!("matrix is {0}x{0}, expected {dim}x{dim}", m.dim()),
                });
            }
            if o.label.is_empty() || o.label.contains([',', '\n', '"']) {
                return Err(ConfigError::Field {
                    field: format!("{name}.label"),
                    message: "label must be non-empty and free of commas, quotes and newlines".into(),
                });
            }
            observables.push((o.label.clone(), m));
        }
        let spec = EvolutionSpec {
            hamiltonian,
            generator: generator.clone(),
            rho0: rho0.clone(),
            t_final: self.t_final,
            dt: self.dt,
            record_every: self.record_every,
            tolerance: self.tolerance,
            allow_unnormalized: self.allow_unnormalized,
        };
        spec.validate().map_err(|e| match e {
            DynamicsError::InvalidSpec(message) => ConfigError::Field {
                field: "spec".into(),
                message,
            },
            other => ConfigError::Field {
                field: "generator".into(),
                message: other.to_string(),
            },
        })?;
        // generator preconditions at the initial state
        generator.value(&rho0).map_err(field("generator"))?;
        generator.gradient(&rho0).map_err(field("generator"))?;
        Ok(LoadedConfig {
            config: self,
            spec,
            observables,
        })
    }
}
