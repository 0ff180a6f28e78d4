//! Bayesian quadratic regression over binary inputs with Thompson sampling.
//!
//! Features are `[1, x_1..x_n, x_i·x_j (i<j, lexicographic)]`, so a sampled
//! coefficient vector maps one-to-one onto a [`QuboInstance`].

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::qubo::QuboInstance;

/// `1 + n + n(n-1)/2`.
pub fn feature_dim(n: usize) -> usize {
    1 + n + n * n.saturating_sub(1) / 2
}

/// Position of the `(i, j)` product feature, `i < j`.
pub fn pair_feature_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    // Pairs preceding row i: Σ_{r<i} (n-1-r).
    1 + n + i * (2 * n - i - 1) / 2 + (j - i - 1)
}

pub fn features(x: &[bool]) -> Vec<f64> {
    let n = x.len();
    let mut phi = Vec::with_capacity(feature_dim(n));
    phi.push(1.0);
    phi.extend(x.iter().map(|&b| b as u8 as f64));
    for i in 0..n {
        for j in i + 1..n {
            phi.push((x[i] && x[j]) as u8 as f64);
        }
    }
    phi
}

/// Indices of the nonzero features of `x`, ascending.
fn active_features(x: &[bool]) -> Vec<usize> {
    let n = x.len();
    let on: Vec<usize> = (0..n).filter(|&i| x[i]).collect();
    let mut idx = Vec::with_capacity(1 + on.len() * (on.len() + 1) / 2);
    idx.push(0);
    idx.extend(on.iter().map(|&i| 1 + i));
    for (a, &i) in on.iter().enumerate() {
        for &j in &on[a + 1..] {
            idx.push(pair_feature_index(n, i, j));
        }
    }
    idx.sort_unstable();
    idx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateParams {
    /// Prior variance of every coefficient.
    pub prior_var: f64,
    /// Observation noise variance.
    pub noise_var: f64,
    /// Center and scale responses to unit variance before the update, so both
    /// variances are in units of the data's spread. Coefficients are reported
    /// in the original units either way.
    pub standardize: bool,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        Self {
            prior_var: 1.0,
            noise_var: 1.0,
            standardize: true,
        }
    }
}

impl SurrogateParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.prior_var > 0.0 && self.noise_var > 0.0) {
            return Err(Error::InvalidConfig("surrogate variances must be > 0".into()));
        }
        Ok(())
    }
}

/// Gaussian posterior over quadratic-regression coefficients.
#[derive(Debug, Clone)]
pub struct QuadraticSurrogate {
    n: usize,
    params: SurrogateParams,
    /// Posterior mean in original units.
    mean: DVector<f64>,
    /// Posterior precision in standardized units.
    precision: Cholesky<f64, Dyn>,
    /// Response scale used for the last fit (1 when not standardizing).
    scale: f64,
}

impl QuadraticSurrogate {
    /// Prior: zero mean, covariance `prior_var · I`.
    pub fn prior(n: usize, params: SurrogateParams) -> Self {
        let d = feature_dim(n);
        let precision = DMatrix::identity(d, d) / params.prior_var;
        Self {
            n,
            params,
            mean: DVector::zeros(d),
            precision: Cholesky::new(precision).expect("scaled identity is positive definite"),
            scale: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> SurrogateParams {
        self.params
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Conjugate update from the prior on every `(x, y)` pair.
    pub fn fit<'a>(&self, data: impl IntoIterator<Item = (&'a [bool], f64)>) -> Result<Self> {
        let data: Vec<(&[bool], f64)> = data.into_iter().collect();
        let (center, scale) = if self.params.standardize {
            response_transform(data.iter().map(|(_, y)| *y))
        } else {
            (0.0, 1.0)
        };
        let d = self.dim();
        let mut gram = DMatrix::<f64>::zeros(d, d);
        let mut rhs = DVector::<f64>::zeros(d);
        for &(x, y) in &data {
            if x.len() != self.n {
                return Err(Error::InvalidBits(format!(
                    "expected {} bits, got {}",
                    self.n,
                    x.len()
                )));
            }
            let y = (y - center) / scale;
            let idx = active_features(x);
            for &r in &idx {
                rhs[r] += y;
                for &c in &idx {
                    gram[(r, c)] += 1.0;
                }
            }
        }
        let inv_noise = 1.0 / self.params.noise_var;
        let mut precision = gram * inv_noise;
        for k in 0..d {
            precision[(k, k)] += 1.0 / self.params.prior_var;
        }
        let precision = Cholesky::new(precision).ok_or(Error::Factorization)?;
        let mut mean = precision.solve(&(rhs * inv_noise)) * scale;
        mean[0] += center;
        Ok(Self {
            n: self.n,
            params: self.params,
            mean,
            precision,
            scale,
        })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Diagonal of the posterior covariance.
    pub fn marginal_variances(&self) -> DVector<f64> {
        self.precision.inverse().diagonal() * (self.scale * self.scale)
    }

    /// Mean-model prediction at `x`.
    pub fn predict(&self, x: &[bool]) -> f64 {
        active_features(x).iter().map(|&k| self.mean[k]).sum()
    }

    /// Draws `mean + L⁻ᵀ g`, `g ~ N(0, I)`, where `L Lᵀ` is the posterior precision.
    pub fn thompson_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let g = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let offset = self
            .precision
            .l()
            .transpose()
            .solve_upper_triangular(&g)
            .expect("Cholesky factor has a positive diagonal");
        (&self.mean + offset * self.scale).iter().copied().collect()
    }
}

/// Sample mean and standard deviation, with unit scale for fewer than two
/// points or constant responses.
fn response_transform(ys: impl Iterator<Item = f64>) -> (f64, f64) {
    let ys: Vec<f64> = ys.collect();
    if ys.len() < 2 {
        return (0.0, 1.0);
    }
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        (mean, var.sqrt())
    } else {
        (mean, 1.0)
    }
}

/// Maps a coefficient vector in feature order onto the equivalent QUBO.
pub fn to_qubo(n: usize, alpha: &[f64]) -> Result<QuboInstance> {
    let expected = feature_dim(n);
    if alpha.len() != expected {
        return Err(Error::CoefficientLength {
            got: alpha.len(),
            expected,
        });
    }
    let mut pairs = Vec::with_capacity(expected - 1 - n);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j, alpha[pair_feature_index(n, i, j)]));
        }
    }
    Ok(QuboInstance::from_parts(alpha[1..=n].to_vec(), pairs, alpha[0]))
}
