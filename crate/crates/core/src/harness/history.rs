use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::encoding::DesignVector;
use crate::error::{Error, Result};
use crate::objective::{Branch, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Bocs,
    Random,
}

impl RunKind {
    pub fn label(self) -> &'static str {
        match self {
            RunKind::Bocs => "bocs",
            RunKind::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMeta {
    /// Energy of the acquired state on the sampled QUBO; `None` for random draws.
    pub solver_energy: Option<f64>,
    /// The design was already in the history.
    pub duplicate: bool,
    /// Wall time of the step in milliseconds.
    pub ms: f64,
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub seq: usize,
    pub bits: DesignVector,
    pub branch: Branch,
    pub z: u32,
    pub y: f64,
    pub solver_energy: Option<f64>,
    pub duplicate: bool,
    pub ms: f64,
}

impl LogRecord {
    pub fn new(obs: &Observation, meta: &StepMeta) -> Self {
        Self {
            seq: obs.seq,
            bits: obs.x,
            branch: obs.branch,
            z: obs.z,
            y: obs.y,
            solver_energy: meta.solver_energy,
            duplicate: meta.duplicate,
            ms: meta.ms,
        }
    }

    pub fn observation(&self) -> Observation {
        Observation {
            seq: self.seq,
            x: self.bits,
            y: self.y,
            branch: self.branch,
            z: self.z,
        }
    }

    pub fn meta(&self) -> StepMeta {
        StepMeta {
            solver_energy: self.solver_energy,
            duplicate: self.duplicate,
            ms: self.ms,
        }
    }
}

/// Append-only JSON-lines log, flushed after every record.
pub struct RunLog {
    writer: BufWriter<File>,
}

impl RunLog {
    pub fn append(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            writer: BufWriter::new(file),
        })
    }

    pub fn write(&mut self, record: &LogRecord) -> Result<()> {
        serde_json::to_writer(&mut self.writer, record)?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        Ok(())
    }
}

/// Reads a run log; a missing file is an empty log. A truncated last line
/// (interrupted write) is dropped.
pub fn read_log(path: &Path) -> Result<Vec<LogRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let lines: Vec<String> = BufReader::new(File::open(path)?)
        .lines()
        .collect::<std::io::Result<_>>()?;
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut records = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<LogRecord>(line) {
            Ok(r) => records.push(r),
            Err(_) if Some(i) == last => break,
            Err(e) => return Err(e.into()),
        }
    }
    for (i, r) in records.iter().enumerate() {
        if r.seq != i {
            return Err(Error::Checkpoint(format!("record {i} has seq {}", r.seq)));
        }
    }
    Ok(records)
}

/// Ordered record of one optimization trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHistory {
    pub kind: RunKind,
    pub config: RunConfig,
    pub observations: Vec<Observation>,
    pub steps: Vec<StepMeta>,
}

impl RunHistory {
    pub fn new(kind: RunKind, config: RunConfig) -> Self {
        Self {
            kind,
            config,
            observations: Vec::new(),
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn push(&mut self, obs: Observation, meta: StepMeta) {
        self.observations.push(obs);
        self.steps.push(meta);
    }

    pub fn contains(&self, x: &DesignVector) -> bool {
        self.observations.iter().any(|o| o.x == *x)
    }

    pub fn best(&self) -> Option<&Observation> {
        self.observations
            .iter()
            .min_by(|a, b| a.y.total_cmp(&b.y).then(a.seq.cmp(&b.seq)))
    }

    pub fn final_best_y(&self) -> Option<f64> {
        self.best().map(|o| o.y)
    }

    /// Acquisitions only, i.e. everything after the initial sample.
    pub fn acquisitions(&self) -> &[Observation] {
        let start = self.config.n_initial.min(self.observations.len());
        &self.observations[start..]
    }

    /// Fraction of acquisitions `first..=last` (1-based) on the S21 branch.
    pub fn feasible_rate(&self, first: usize, last: usize) -> f64 {
        let acq = self.acquisitions();
        let lo = first.saturating_sub(1).min(acq.len());
        let hi = last.min(acq.len());
        if hi <= lo {
            return 0.0;
        }
        let hits = acq[lo..hi].iter().filter(|o| o.is_feasible()).count();
        hits as f64 / (hi - lo) as f64
    }

    pub fn log_records(&self) -> Vec<LogRecord> {
        self.observations
            .iter()
            .zip(&self.steps)
            .map(|(o, m)| LogRecord::new(o, m))
            .collect()
    }

    /// Serialization with wall times zeroed, for reproducibility checks.
    pub fn canonical_json(&self) -> String {
        let mut copy = self.clone();
        for s in &mut copy.steps {
            s.ms = 0.0;
        }
        serde_json::to_string(&copy).expect("history serializes")
    }

    pub fn write_log(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for r in self.log_records() {
            serde_json::to_writer(&mut w, &r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(index, best y so far)`, index counting evaluations from 1.
pub fn update_record(h: &RunHistory) -> Vec<(usize, f64)> {
    let mut best = f64::INFINITY;
    h.observations
        .iter()
        .enumerate()
        .map(|(i, o)| {
            best = best.min(o.y);
            (i + 1, best)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub index: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Element-wise mean, min and max of equal-length update records.
pub fn aggregate_trials(series: &[Vec<(usize, f64)>]) -> Result<Vec<AggregatePoint>> {
    let first = series.first().ok_or(Error::NoData)?;
    if series.iter().any(|s| s.len() != first.len()) {
        return Err(Error::InvalidConfig("update records differ in length".into()));
    }
    Ok((0..first.len())
        .map(|k| {
            let values = series.iter().map(|s| s[k].1);
            let (sum, min, max) = values.fold((0.0, f64::INFINITY, f64::NEG_INFINITY), |(s, lo, hi), v| {
                (s + v, lo.min(v), hi.max(v))
            });
            AggregatePoint {
                index: first[k].0,
                mean: sum / series.len() as f64,
                min,
                max,
            }
        })
        .collect())
}
