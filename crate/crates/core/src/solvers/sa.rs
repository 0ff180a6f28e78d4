//! Single-flip Metropolis simulated annealing with a geometric β schedule.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SampleSet;
use crate::error::{Error, Result};
use crate::qubo::QuboInstance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaParams {
    /// Independent restarts per solve.
    pub num_reads: usize,
    /// Full passes over all variables per read.
    pub sweeps: usize,
    /// Initial inverse temperature; derived from the instance when unset.
    pub beta_hot: Option<f64>,
    /// Final inverse temperature; derived from the instance when unset.
    pub beta_cold: Option<f64>,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            num_reads: 3000,
            sweeps: 100,
            beta_hot: None,
            beta_cold: None,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 || self.sweeps == 0 {
            return Err(Error::InvalidConfig("num_reads and sweeps must be >= 1".into()));
        }
        if let (Some(h), Some(c)) = (self.beta_hot, self.beta_cold) {
            if !(0.0 < h && h < c) {
                return Err(Error::InvalidConfig("require 0 < beta_hot < beta_cold".into()));
            }
        }
        Ok(())
    }
}

/// `(β_hot, β_cold)` for `q`: `ln 2 / ΔE_max` and `ln 100 / ΔE_min`, unless
/// overridden in `p`.
pub fn schedule_endpoints(q: &QuboInstance, p: &SaParams) -> (f64, f64) {
    let (hot, cold) = match q.flip_energy_bounds() {
        Some((max_delta, min_delta)) => (2f64.ln() / max_delta, 100f64.ln() / min_delta),
        None => (2f64.ln(), 100f64.ln()),
    };
    (p.beta_hot.unwrap_or(hot), p.beta_cold.unwrap_or(cold))
}

fn geometric_schedule(hot: f64, cold: f64, sweeps: usize) -> Vec<f64> {
    if sweeps == 1 {
        return vec![cold];
    }
    let ratio = (cold / hot).powf(1.0 / (sweeps - 1) as f64);
    (0..sweeps).map(|k| hot * ratio.powi(k as i32)).collect()
}

/// One Metropolis chain from a uniformly random state.
fn anneal_read(q: &QuboInstance, couplings: &[f64], betas: &[f64], seed: u64) -> Vec<bool> {
    let n = q.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<bool> = (0..n).map(|_| rng.random()).collect();

    // field[i] = h_i + Σ_j J_ij x_j; flipping i changes energy by ±field[i].
    let mut field: Vec<f64> = q.linear().to_vec();
    for j in (0..n).filter(|&j| x[j]) {
        let row = &couplings[j * n..(j + 1) * n];
        for (f, w) in field.iter_mut().zip(row) {
            *f += w;
        }
    }

    for &beta in betas {
        for i in 0..n {
            let delta = if x[i] { -field[i] } else { field[i] };
            let accept = delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp();
            if accept {
                let sign = if x[i] { -1.0 } else { 1.0 };
                x[i] = !x[i];
                let row = &couplings[i * n..(i + 1) * n];
                for (f, w) in field.iter_mut().zip(row) {
                    *f += sign * w;
                }
            }
        }
    }
    x
}

/// Read `r` is seeded with `seed + r`; results merge deterministically.
pub fn solve_sa(q: &QuboInstance, p: &SaParams, seed: u64) -> SampleSet {
    let start = Instant::now();
    let (hot, cold) = schedule_endpoints(q, p);
    let betas = geometric_schedule(hot, cold, p.sweeps.max(1));
    let couplings = q.symmetric_couplings();
    let states: Vec<Vec<bool>> = (0..p.num_reads.max(1) as u64)
        .into_par_iter()
        .map(|r| anneal_read(q, &couplings, &betas, seed.wrapping_add(r)))
        .collect();
    SampleSet::from_states(q, states, "sa", start.elapsed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::best_of;

    #[test]
    fn separable_minimum_is_all_zeros() {
        let q = QuboInstance::from_parts(vec![1.0; 8], [], 0.75);
        let s = solve_sa(&q, &SaParams { num_reads: 20, ..SaParams::default() }, 1);
        assert_eq!(best_of(&s).unwrap(), vec![false; 8]);
        assert_eq!(s.best().unwrap().energy, 0.75);
    }

    #[test]
    fn two_variable_frustration() {
        let q = QuboInstance::from_parts(vec![-1.0, -1.0], [(0, 1, 3.0)], 0.0);
        let s = solve_sa(&q, &SaParams { num_reads: 50, ..SaParams::default() }, 2);
        let best = best_of(&s).unwrap();
        assert!(best == vec![true, false] || best == vec![false, true]);
        assert_eq!(s.best().unwrap().energy, -1.0);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let q = QuboInstance::from_parts(vec![0.3, -1.2, 0.5, -0.1], [(0, 1, 1.0), (2, 3, -2.0), (0, 3, 0.7)], 0.0);
        let p = SaParams { num_reads: 64, sweeps: 20, ..SaParams::default() };
        let a = solve_sa(&q, &p, 42);
        let b = solve_sa(&q, &p, 42);
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn schedule_is_geometric_and_increasing() {
        let betas = geometric_schedule(0.1, 10.0, 5);
        assert!((betas[0] - 0.1).abs() < 1e-15);
        assert!((betas[4] - 10.0).abs() < 1e-12);
        for w in betas.windows(2) {
            assert!((w[1] / w[0] - 10f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn endpoints_follow_instance_scale() {
        let q = QuboInstance::from_parts(vec![2.0, 0.0], [(0, 1, 0.5)], 0.0);
        let (hot, cold) = schedule_endpoints(&q, &SaParams::default());
        assert!((hot - 2f64.ln() / 2.5).abs() < 1e-15);
        assert!((cold - 100f64.ln() / 0.5).abs() < 1e-12);
        assert!(hot < cold);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(SaParams { num_reads: 0, ..SaParams::default() }.validate().is_err());
        let p = SaParams { beta_hot: Some(2.0), beta_cold: Some(1.0), ..SaParams::default() };
        assert!(p.validate().is_err());
    }
}
