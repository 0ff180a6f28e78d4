//! QUBO minimization backends.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::QuboInstance;

pub mod exhaustive;
pub mod remote;
pub mod sa;

pub use exhaustive::{solve_exhaustive, ExhaustiveParams, MAX_EXHAUSTIVE_VARS};
pub use remote::{solve_remote, MockBehavior, MockSampler, RemoteClient, RemoteParams, SampleRequest, SampleResponse, WireSample};
pub use sa::{schedule_endpoints, solve_sa, SaParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub x: Vec<bool>,
    pub energy: f64,
    pub occurrences: u64,
}

/// Solver output, sorted ascending by `(energy, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub records: Vec<SampleRecord>,
    pub solver_tag: String,
    pub wall_time: Duration,
}

impl SampleSet {
    /// Merges raw states, re-evaluating every distinct state on `q`.
    pub fn from_states(q: &QuboInstance, states: impl IntoIterator<Item = Vec<bool>>, solver_tag: &str, wall_time: Duration) -> Self {
        let mut counts: BTreeMap<Vec<bool>, u64> = BTreeMap::new();
        for s in states {
            *counts.entry(s).or_default() += 1;
        }
        let records = counts
            .into_iter()
            .map(|(x, occurrences)| SampleRecord {
                energy: q.energy(&x),
                x,
                occurrences,
            })
            .collect();
        let mut set = Self {
            records,
            solver_tag: solver_tag.to_owned(),
            wall_time,
        };
        set.sort();
        set
    }

    pub fn sort(&mut self) {
        self.records
            .sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.x.cmp(&b.x)));
    }

    pub fn best(&self) -> Option<&SampleRecord> {
        self.records.first()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// State of the minimum-energy record.
pub fn best_of(s: &SampleSet) -> Result<Vec<bool>> {
    s.best().map(|r| r.x.clone()).ok_or(Error::EmptySampleSet)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Sa,
    Exhaustive,
    Remote,
}

/// A configured backend.
#[derive(Debug, Clone)]
pub enum Solver {
    Sa(SaParams),
    Exhaustive(ExhaustiveParams),
    Remote(RemoteClient),
}

impl Solver {
    /// `seed` drives stochastic backends; others ignore it.
    pub fn solve(&self, q: &QuboInstance, seed: u64) -> Result<SampleSet> {
        match self {
            Solver::Sa(p) => Ok(solve_sa(q, p, seed)),
            Solver::Exhaustive(p) => solve_exhaustive(q, p),
            Solver::Remote(client) => client.solve(q),
        }
    }

    pub fn kind(&self) -> SolverKind {
        match self {
            Solver::Sa(_) => SolverKind::Sa,
            Solver::Exhaustive(_) => SolverKind::Exhaustive,
            Solver::Remote(_) => SolverKind::Remote,
        }
    }
}
