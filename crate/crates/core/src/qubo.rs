//! Quadratic objectives over binary variables.

use serde::{Deserialize, Serialize};

/// `energy(x) = offset + Σ linear[i]·x_i + Σ_{i<j} q_ij·x_i·x_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboInstance {
    n: usize,
    linear: Vec<f64>,
    /// Row-major `n × n`, only `i < j` entries are ever nonzero.
    quadratic: Vec<f64>,
    offset: f64,
}

impl QuboInstance {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            linear: vec![0.0; n],
            quadratic: vec![0.0; n * n],
            offset: 0.0,
        }
    }

    /// Builds an instance from linear weights and `(i, j, w)` couplings.
    /// Couplings given with `i > j` are folded onto `(j, i)`; repeated pairs add.
    ///
    /// # Panics
    /// If an index is out of range or a coupling is diagonal.
    pub fn from_parts(linear: Vec<f64>, pairs: impl IntoIterator<Item = (usize, usize, f64)>, offset: f64) -> Self {
        let n = linear.len();
        let mut q = Self {
            n,
            linear,
            quadratic: vec![0.0; n * n],
            offset,
        };
        for (i, j, w) in pairs {
            q.add_coupling(i, j, w);
        }
        q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn set_linear(&mut self, i: usize, w: f64) {
        self.linear[i] = w;
    }

    /// Coupling between `i` and `j` in either order; zero on the diagonal.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.quadratic[i * self.n + j],
            std::cmp::Ordering::Greater => self.quadratic[j * self.n + i],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, w: f64) {
        assert!(i != j, "diagonal coupling ({i}, {i}) belongs in the linear term");
        assert!(i < self.n && j < self.n, "coupling index out of range");
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.quadratic[i * self.n + j] += w;
    }

    /// Nonzero couplings in lexicographic `(i, j)` order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| {
                let w = self.quadratic[i * self.n + j];
                (w != 0.0).then_some((i, j, w))
            })
        })
    }

    /// Symmetric coupling matrix, row-major, zero diagonal.
    pub fn symmetric_couplings(&self) -> Vec<f64> {
        let n = self.n;
        let mut full = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = self.quadratic[i * n + j];
                full[i * n + j] = w;
                full[j * n + i] = w;
            }
        }
        full
    }

    pub fn energy(&self, x: &[bool]) -> f64 {
        assert_eq!(x.len(), self.n, "state length does not match instance");
        let mut e = self.offset;
        for i in 0..self.n {
            if !x[i] {
                continue;
            }
            e += self.linear[i];
            let row = &self.quadratic[i * self.n..(i + 1) * self.n];
            for j in i + 1..self.n {
                if x[j] {
                    e += row[j];
                }
            }
        }
        e
    }

    /// Largest and smallest nonzero weight magnitudes seen by a single flip:
    /// `max_i (|h_i| + Σ_j |q_ij|)` and the smallest nonzero `|h_i|` or `|q_ij|`.
    pub fn flip_energy_bounds(&self) -> Option<(f64, f64)> {
        let n = self.n;
        let mut max_delta: f64 = 0.0;
        let mut min_term = f64::INFINITY;
        for i in 0..n {
            let mut total = self.linear[i].abs();
            if total > 0.0 {
                min_term = min_term.min(total);
            }
            for j in 0..n {
                let w = self.coupling(i, j).abs();
                total += w;
                if w > 0.0 {
                    min_term = min_term.min(w);
                }
            }
            max_delta = max_delta.max(total);
        }
        (max_delta > 0.0).then_some((max_delta, min_term))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_of_small_instance() {
        let q = QuboInstance::from_parts(vec![-1.0, -1.0], [(0, 1, 3.0)], 0.5);
        assert_eq!(q.energy(&[false, false]), 0.5);
        assert_eq!(q.energy(&[true, false]), -0.5);
        assert_eq!(q.energy(&[false, true]), -0.5);
        assert_eq!(q.energy(&[true, true]), 1.5);
    }

    #[test]
    fn couplings_fold_to_upper_triangle() {
        let q = QuboInstance::from_parts(vec![0.0; 3], [(2, 0, 1.0), (0, 2, 0.5)], 0.0);
        assert_eq!(q.coupling(0, 2), 1.5);
        assert_eq!(q.coupling(2, 0), 1.5);
        assert_eq!(q.pairs().collect::<Vec<_>>(), vec![(0, 2, 1.5)]);
    }

    #[test]
    fn flip_bounds() {
        let q = QuboInstance::from_parts(vec![0.5, -2.0, 0.0], [(0, 1, 1.0), (1, 2, -0.25)], 0.0);
        let (max, min) = q.flip_energy_bounds().unwrap();
        assert_eq!(max, 3.25);
        assert_eq!(min, 0.25);
        assert!(QuboInstance::zeros(4).flip_energy_bounds().is_none());
    }
}
