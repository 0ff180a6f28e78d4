use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitParams, MaterialParams};
use crate::encoding::{Board, ElementLayout, GridSpec};
use crate::error::{Error, Result};
use crate::objective::{FilterObjective, PenaltyParams};
use crate::solvers::{ExhaustiveParams, RemoteClient, RemoteParams, SaParams, Solver, SolverKind};
use crate::surrogate::SurrogateParams;

/// Everything one experiment needs. Serialized as a single JSON document
/// with one nested section per subsystem; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_initial: usize,
    pub n_iterations: usize,
    pub n_trials: usize,
    pub solver: SolverKind,
    pub endpoint: Option<String>,
    pub seed: u64,
    pub grid: GridSpec,
    pub layout: ElementLayout,
    pub material: MaterialParams,
    pub circuit: CircuitParams,
    pub penalty: PenaltyParams,
    pub surrogate: SurrogateParams,
    pub sa: SaParams,
    pub exhaustive: ExhaustiveParams,
    pub remote: RemoteParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_initial: 20,
            n_iterations: 300,
            n_trials: 10,
            solver: SolverKind::Sa,
            endpoint: None,
            seed: 0,
            grid: GridSpec::default(),
            layout: ElementLayout::default(),
            material: MaterialParams::default(),
            circuit: CircuitParams::default(),
            penalty: PenaltyParams::default(),
            surrogate: SurrogateParams::default(),
            sa: SaParams::default(),
            exhaustive: ExhaustiveParams::default(),
            remote: RemoteParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_initial == 0 || self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_initial and n_trials must be >= 1".into()));
        }
        if self.solver == SolverKind::Remote && self.endpoint.is_none() {
            return Err(Error::InvalidConfig("remote solver requires an endpoint".into()));
        }
        self.board().validate()?;
        self.material.validate()?;
        self.circuit.validate()?;
        self.penalty.validate()?;
        self.surrogate.validate()?;
        self.sa.validate()
    }

    pub fn board(&self) -> Board {
        Board {
            grid: self.grid,
            layout: self.layout,
        }
    }

    pub fn objective(&self) -> FilterObjective {
        FilterObjective {
            board: self.board(),
            material: self.material,
            circuit: self.circuit,
            penalty: self.penalty,
        }
    }

    pub fn build_solver(&self) -> Result<Solver> {
        Ok(match self.solver {
            SolverKind::Sa => Solver::Sa(self.sa),
            SolverKind::Exhaustive => Solver::Exhaustive(self.exhaustive),
            SolverKind::Remote => {
                let endpoint = self
                    .endpoint
                    .clone()
                    .ok_or_else(|| Error::InvalidConfig("remote solver requires an endpoint".into()))?;
                let params = RemoteParams {
                    num_reads: self.sa.num_reads,
                    ..self.remote
                };
                Solver::Remote(RemoteClient::new(endpoint, params))
            }
        })
    }

    /// Copy with trial-specific seed.
    pub fn for_trial(&self, trial: usize) -> Self {
        Self {
            seed: self.seed.wrapping_add(trial as u64),
            ..self.clone()
        }
    }
}
