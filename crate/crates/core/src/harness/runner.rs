//! The BOCS loop and the random-search baseline.
//!
//! Both runners draw their first `n_initial` designs from the same seeded
//! stream, so equal seeds give equal initial data. BOCS iteration `k` gets its
//! own generator derived from `(seed, k)`, which makes a run resumable from
//! its log at any step.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::RunConfig;
use super::history::{read_log, LogRecord, RunHistory, RunKind, RunLog, StepMeta};
use crate::encoding::{DesignVector, DESIGN_BITS};
use crate::error::{Error, Result};
use crate::objective::BlackBox;
use crate::solvers::{best_of, Solver};
use crate::surrogate::{to_qubo, QuadraticSurrogate};

fn random_design<R: Rng>(rng: &mut R) -> DesignVector {
    let mut bits = [false; DESIGN_BITS];
    for b in &mut bits {
        *b = rng.random();
    }
    DesignVector::new(bits)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for BOCS iteration `k` (0-based) of a run seeded with `seed`.
pub fn iteration_seed(seed: u64, k: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ (k as u64).wrapping_add(1))
}

/// Replays logged records and appends new ones.
struct Recorder {
    replay: Vec<LogRecord>,
    log: Option<RunLog>,
}

impl Recorder {
    fn open(log: Option<&Path>) -> Result<Self> {
        match log {
            None => Ok(Self {
                replay: Vec::new(),
                log: None,
            }),
            Some(path) => Ok(Self {
                replay: read_log(path)?,
                log: Some(RunLog::append(path)?),
            }),
        }
    }

    fn replayed(&self, seq: usize) -> Option<&LogRecord> {
        self.replay.get(seq)
    }

    fn check_len(&self, total: usize) -> Result<()> {
        if self.replay.len() > total {
            return Err(Error::Checkpoint(format!(
                "log holds {} records, run has {total}",
                self.replay.len()
            )));
        }
        Ok(())
    }

    fn record(&mut self, h: &mut RunHistory, record: LogRecord) -> Result<()> {
        if let Some(log) = &mut self.log {
            log.write(&record)?;
        }
        h.push(record.observation(), record.meta());
        Ok(())
    }
}

/// Evaluates (or replays) a design drawn without a solver.
fn step_without_solver(
    f: &dyn BlackBox,
    h: &mut RunHistory,
    rec: &mut Recorder,
    x: DesignVector,
) -> Result<()> {
    let seq = h.len();
    if let Some(r) = rec.replayed(seq) {
        if r.bits != x {
            return Err(Error::Checkpoint(format!(
                "seq {seq}: log has {}, seed gives {x}",
                r.bits
            )));
        }
        let r = r.clone();
        h.push(r.observation(), r.meta());
        return Ok(());
    }
    let start = Instant::now();
    let duplicate = h.contains(&x);
    let obs = f.evaluate(&x, seq)?;
    let meta = StepMeta {
        solver_energy: None,
        duplicate,
        ms: start.elapsed().as_secs_f64() * 1e3,
    };
    rec.record(h, LogRecord::new(&obs, &meta))
}

/// BOCS with an explicit objective and solver, optionally logging to (and
/// resuming from) `log`.
pub fn run_bocs_with(
    cfg: &RunConfig,
    f: &dyn BlackBox,
    solver: &Solver,
    log: Option<&Path>,
) -> Result<RunHistory> {
    let mut rec = Recorder::open(log)?;
    rec.check_len(cfg.n_initial + cfg.n_iterations)?;
    let mut h = RunHistory::new(RunKind::Bocs, cfg.clone());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.n_initial {
        let x = random_design(&mut rng);
        step_without_solver(f, &mut h, &mut rec, x)?;
    }

    let prior = QuadraticSurrogate::prior(DESIGN_BITS, cfg.surrogate);
    for k in 0..cfg.n_iterations {
        let seq = h.len();
        if let Some(r) = rec.replayed(seq) {
            let r = r.clone();
            h.push(r.observation(), r.meta());
            continue;
        }

        let start = Instant::now();
        let mut irng = ChaCha8Rng::seed_from_u64(iteration_seed(cfg.seed, k));
        let posterior = prior.fit(h.observations.iter().map(|o| (&o.x.bits()[..], o.y)))?;
        let alpha = posterior.thompson_sample(&mut irng);
        let q = to_qubo(DESIGN_BITS, &alpha)?;
        let samples = solver.solve(&q, irng.random())?;
        let x = DesignVector::from_slice(&best_of(&samples)?)?;

        let duplicate = h.contains(&x);
        let obs = f.evaluate(&x, seq)?;
        let meta = StepMeta {
            solver_energy: samples.best().map(|r| r.energy),
            duplicate,
            ms: start.elapsed().as_secs_f64() * 1e3,
        };
        rec.record(&mut h, LogRecord::new(&obs, &meta))?;
    }
    Ok(h)
}

/// Uniform random search over all 2^22 vectors with the same budget.
pub fn run_random_with(cfg: &RunConfig, f: &dyn BlackBox, log: Option<&Path>) -> Result<RunHistory> {
    let mut rec = Recorder::open(log)?;
    rec.check_len(cfg.n_initial + cfg.n_iterations)?;
    let mut h = RunHistory::new(RunKind::Random, cfg.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.n_initial + cfg.n_iterations {
        let x = random_design(&mut rng);
        step_without_solver(f, &mut h, &mut rec, x)?;
    }
    Ok(h)
}

pub fn run_bocs(cfg: &RunConfig) -> Result<RunHistory> {
    cfg.validate()?;
    run_bocs_with(cfg, &cfg.objective(), &cfg.build_solver()?, None)
}

pub fn run_random(cfg: &RunConfig) -> Result<RunHistory> {
    cfg.validate()?;
    run_random_with(cfg, &cfg.objective(), None)
}

pub fn trial_log_path(dir: &Path, kind: RunKind, trial: usize) -> PathBuf {
    dir.join(format!("{}_trial_{trial:02}.jsonl", kind.label()))
}

/// Runs `cfg.n_trials` independent trials (trial `t` seeded `seed + t`),
/// logging each to `out_dir` when given.
pub fn run_trials(cfg: &RunConfig, kind: RunKind, out_dir: Option<&Path>) -> Result<Vec<RunHistory>> {
    cfg.validate()?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    (0..cfg.n_trials)
        .into_par_iter()
        .map(|t| {
            let trial_cfg = cfg.for_trial(t);
            let objective = trial_cfg.objective();
            let log = out_dir.map(|d| trial_log_path(d, kind, t));
            match kind {
                RunKind::Bocs => run_bocs_with(&trial_cfg, &objective, &trial_cfg.build_solver()?, log.as_deref()),
                RunKind::Random => run_random_with(&trial_cfg, &objective, log.as_deref()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{Branch, Observation};
    use crate::solvers::{ExhaustiveParams, SaParams};

    fn quick_cfg() -> RunConfig {
        RunConfig {
            n_initial: 5,
            n_iterations: 4,
            seed: 3,
            sa: SaParams {
                num_reads: 20,
                sweeps: 20,
                ..SaParams::default()
            },
            ..RunConfig::default()
        }
    }

    #[test]
    fn zero_iterations_is_initial_sample() {
        let cfg = RunConfig {
            n_iterations: 0,
            ..quick_cfg()
        };
        let h = run_bocs(&cfg).unwrap();
        let r = run_random(&cfg).unwrap();
        assert_eq!(h.len(), 5);
        assert_eq!(h.observations, r.observations);
    }

    #[test]
    fn runners_share_initial_designs() {
        let cfg = quick_cfg();
        let h = run_bocs(&cfg).unwrap();
        let r = run_random(&cfg).unwrap();
        assert_eq!(h.len(), 9);
        assert_eq!(r.len(), 9);
        let xs = |h: &RunHistory| h.observations[..5].iter().map(|o| o.x).collect::<Vec<_>>();
        assert_eq!(xs(&h), xs(&r));
        assert!(h.steps[5..].iter().all(|s| s.solver_energy.is_some()));
        assert!(r.steps.iter().all(|s| s.solver_energy.is_none()));
    }

    #[test]
    fn iteration_seeds_are_distinct() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|k| iteration_seed(7, k)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(iteration_seed(7, 0), iteration_seed(8, 0));
    }

    #[test]
    fn resume_from_partial_log_matches_uninterrupted_run() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            solver: crate::solvers::SolverKind::Exhaustive,
            ..quick_cfg()
        };
        let f = cfg.objective();
        let solver = Solver::Exhaustive(ExhaustiveParams::default());
        let full = run_bocs_with(&cfg, &f, &solver, None).unwrap();

        // Keep the first 7 of 9 records, as if interrupted.
        let path = dir.path().join("bocs.jsonl");
        let mut partial = full.clone();
        partial.observations.truncate(7);
        partial.steps.truncate(7);
        partial.write_log(&path).unwrap();

        let resumed = run_bocs_with(&cfg, &f, &solver, Some(&path)).unwrap();
        assert_eq!(resumed.observations, full.observations);
        assert_eq!(read_log(&path).unwrap().len(), 9);
    }

    #[test]
    fn resume_rejects_foreign_log() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("random.jsonl");
        let cfg = quick_cfg();
        let other = run_random(&RunConfig { seed: 99, ..cfg.clone() }).unwrap();
        other.write_log(&path).unwrap();
        assert!(matches!(
            run_random_with(&cfg, &cfg.objective(), Some(&path)),
            Err(Error::Checkpoint(_))
        ));
    }

    struct Constant;

    impl BlackBox for Constant {
        fn evaluate(&self, x: &DesignVector, seq: usize) -> Result<Observation> {
            Ok(Observation {
                seq,
                x: *x,
                y: 1.0,
                branch: Branch::S21,
                z: 0,
            })
        }
    }

    #[test]
    fn duplicates_are_flagged() {
        // A constant objective gives a flat posterior; repeats are likely and
        // must be marked rather than rejected.
        let cfg = RunConfig {
            n_initial: 2,
            n_iterations: 6,
            ..quick_cfg()
        };
        let h = run_bocs_with(&cfg, &Constant, &Solver::Exhaustive(ExhaustiveParams::default()), None).unwrap();
        assert_eq!(h.len(), 8);
        for (i, o) in h.observations.iter().enumerate() {
            let seen_before = h.observations[..i].iter().any(|p| p.x == o.x);
            assert_eq!(h.steps[i].duplicate, seen_before);
        }
    }
}
