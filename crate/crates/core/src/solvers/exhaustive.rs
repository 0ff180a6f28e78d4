//! Exact minimization by Gray-code enumeration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{SampleRecord, SampleSet};
use crate::error::{Error, Result};
use crate::qubo::QuboInstance;

pub const MAX_EXHAUSTIVE_VARS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExhaustiveParams {
    /// How many of the lowest states to return.
    pub keep: usize,
}

impl Default for ExhaustiveParams {
    fn default() -> Self {
        Self { keep: 1 }
    }
}

/// Heap entry; `key` orders states lexicographically (bit 0 most significant).
#[derive(Debug, Clone, Copy)]
struct Entry {
    energy: f64,
    key: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.energy
            .total_cmp(&other.energy)
            .then(self.key.cmp(&other.key))
    }
}

fn key_to_state(key: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| key >> (n - 1 - i) & 1 == 1).collect()
}

/// The `keep` lowest-energy states of `q`, ties broken toward the
/// lexicographically smallest state.
pub fn solve_exhaustive(q: &QuboInstance, p: &ExhaustiveParams) -> Result<SampleSet> {
    let n = q.n();
    if n > MAX_EXHAUSTIVE_VARS {
        return Err(Error::TooManyVariables {
            n,
            max: MAX_EXHAUSTIVE_VARS,
        });
    }
    let start = Instant::now();
    let keep = p.keep.max(1);
    let couplings = q.symmetric_couplings();

    let mut x = vec![false; n];
    let mut field = q.linear().to_vec();
    let mut energy = q.offset();
    let mut key = 0u64;

    let mut heap = BinaryHeap::with_capacity(keep + 1);
    heap.push(Entry { energy, key });

    for step in 1u64..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        let (delta, sign) = if x[i] { (-field[i], -1.0) } else { (field[i], 1.0) };
        energy += delta;
        x[i] = !x[i];
        key ^= 1 << (n - 1 - i);
        let row = &couplings[i * n..(i + 1) * n];
        for (f, w) in field.iter_mut().zip(row) {
            *f += sign * w;
        }

        let entry = Entry { energy, key };
        if heap.len() < keep {
            heap.push(entry);
        } else if entry < *heap.peek().expect("heap holds keep >= 1 entries") {
            heap.pop();
            heap.push(entry);
        }
    }

    let records = heap
        .into_iter()
        .map(|e| {
            let x = key_to_state(e.key, n);
            SampleRecord {
                energy: q.energy(&x),
                x,
                occurrences: 1,
            }
        })
        .collect();
    let mut set = SampleSet {
        records,
        solver_tag: "exhaustive".into(),
        wall_time: start.elapsed(),
    };
    set.sort();
    Ok(set)
}
