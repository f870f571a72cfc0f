//! Weighted comparison networks, reference strengths and Katz-Bonacich
//! centralities.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-sum tolerance enforced at construction.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Condition-number ceiling above which the resolvent solve is rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// A directed comparison network on `n` agents. Entry `g[(i, j)]` is the
/// weight agent `i` places on agent `j`. Diagonal is zero, entries are
/// nonnegative, and every row sums to one. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNetwork {
    weights: DMatrix<f64>,
}

impl WeightedNetwork {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        if weights.nrows() != weights.ncols() {
            return Err(Error::InvalidNetwork(format!(
                "weight matrix must be square, got {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        if weights.nrows() == 0 {
            return Err(Error::InvalidNetwork("need at least one agent".into()));
        }
        let n = weights.nrows();
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "nonzero self-weight {} at agent {i}",
                    weights[(i, i)]
                )));
            }
            let mut row_sum = 0.0;
            for j in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidNetwork(format!(
                        "weight at ({i}, {j}) must be finite and nonnegative, got {w}"
                    )));
                }
                row_sum += w;
            }
            if (row_sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidNetwork(format!(
                    "row {i} sums to {row_sum}, expected 1 within {ROW_SUM_TOL:e}"
                )));
            }
        }
        Ok(Self { weights })
    }

    /// Builds a network from rows given as slices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidNetwork("ragged row lengths".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(m)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Weighted sum of `values` over agent `i`'s out-neighbors.
    pub fn row_dot(&self, i: usize, values: &[f64]) -> f64 {
        (0..self.n()).map(|j| self.weights[(i, j)] * values[j]).sum()
    }
}

/// Per-agent reference strengths, each in `[0, 1)`. The bound is the
/// existence precondition for every solver in this crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProfile {
    alpha: Vec<f64>,
}

impl ReferenceProfile {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidProfile("empty profile".into()));
        }
        for (i, &a) in alpha.iter().enumerate() {
            if !a.is_finite() || !(0.0..1.0).contains(&a) {
                return Err(Error::InvalidProfile(format!(
                    "alpha[{i}] = {a} must lie in [0, 1)"
                )));
            }
        }
        Ok(Self { alpha })
    }

    pub fn constant(n: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![alpha; n])
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_bar(&self) -> f64 {
        self.alpha.iter().sum::<f64>() / self.alpha.len() as f64
    }

    pub fn max_alpha(&self) -> f64 {
        self.alpha.iter().cloned().fold(0.0, f64::max)
    }

    /// Returns a copy with `alpha[j]` changed by `delta`.
    pub fn with_bumped(&self, j: usize, delta: f64) -> Result<Self> {
        let mut alpha = self.alpha.clone();
        alpha[j] += delta;
        Self::new(alpha)
    }
}

/// Resolvent matrix `B = (I - diag(alpha) g)^{-1}`, its row sums `C_b`
/// (the Katz-Bonacich centralities) and the mean reference strength.
#[derive(Debug, Clone)]
pub struct CentralityResult {
    pub resolvent: DMatrix<f64>,
    pub centrality: Vec<f64>,
    pub alpha_bar: f64,
    /// 1-norm condition number of `I - diag(alpha) g`.
    pub condition: f64,
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_dims(net: &WeightedNetwork, prof: &ReferenceProfile) -> Result<()> {
    if net.n() != prof.n() {
        return Err(Error::InvalidInput(format!(
            "network has {} agents but profile has {}",
            net.n(),
            prof.n()
        )));
    }
    Ok(())
}

/// Katz-Bonacich centralities by a direct dense solve of
/// `(I - diag(alpha) g) B = I`.
///
/// Fails with an existence error when the system is singular or its 1-norm
/// condition number exceeds [`CONDITION_LIMIT`].
pub fn bonacich(net: &WeightedNetwork, prof: &ReferenceProfile) -> Result<CentralityResult> {
    check_dims(net, prof)?;
    let n = net.n();
    let mut system = -net.weights().clone();
    for i in 0..n {
        let a = prof.alpha()[i];
        for j in 0..n {
            system[(i, j)] *= a;
        }
        system[(i, i)] += 1.0;
    }
    let norm_a = one_norm(&system);
    let resolvent = system.clone().lu().try_inverse().ok_or_else(|| {
        Error::ExistenceFailure(
            "I - diag(alpha) g is singular; spectral radius of diag(alpha) g reaches 1".into(),
        )
    })?;
    let condition = norm_a * one_norm(&resolvent);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::ExistenceFailure(format!(
            "I - diag(alpha) g is near-singular (condition estimate {condition:.3e} > {CONDITION_LIMIT:e}); \
             max alpha {} is too close to 1",
            prof.max_alpha()
        )));
    }
    let centrality = (0..n).map(|i| resolvent.row(i).sum()).collect();
    Ok(CentralityResult {
        resolvent,
        centrality,
        alpha_bar: prof.alpha_bar(),
        condition,
    })
}

/// Truncated Neumann series `sum_{k=0..K} (diag(alpha) g)^k 1`, the
/// independent oracle for [`bonacich`]. `K = 0` returns all ones.
pub fn bonacich_neumann(net: &WeightedNetwork, prof: &ReferenceProfile, k_max: usize) -> Result<Vec<f64>> {
    check_dims(net, prof)?;
    let n = net.n();
    let mut term = DVector::from_element(n, 1.0);
    let mut sum = term.clone();
    for _ in 0..k_max {
        let propagated = net.weights() * &term;
        for i in 0..n {
            term[i] = prof.alpha()[i] * propagated[i];
        }
        sum += &term;
    }
    Ok(sum.iter().cloned().collect())
}

/// Network-free centralities `1 + alpha_i / (1 - alpha_bar)` under the
/// uncorrelated assumption. Only the mean must stay below one here, so this
/// takes raw strengths rather than a validated [`ReferenceProfile`].
pub fn uncorrelated_centrality(alpha: &[f64]) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return Err(Error::InvalidInput("empty reference strengths".into()));
    }
    if let Some(a) = alpha.iter().find(|a| !a.is_finite() || **a < 0.0) {
        return Err(Error::InvalidInput(format!(
            "reference strengths must be finite and nonnegative, got {a}"
        )));
    }
    let alpha_bar = alpha.iter().sum::<f64>() / alpha.len() as f64;
    if alpha_bar >= 1.0 {
        return Err(Error::ExistenceFailure(format!(
            "no equilibrium: mean reference strength {alpha_bar} >= 1"
        )));
    }
    Ok(alpha.iter().map(|a| 1.0 + a / (1.0 - alpha_bar)).collect())
}

/// Outcome of the row-level uncorrelatedness check: the deviation is
/// `max_i |sum_j g_ij alpha_j - alpha_bar|`, the exact quantity the
/// network-free collapse requires to vanish.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UncorrelatedCheck {
    pub uncorrelated: bool,
    pub max_row_deviation: f64,
    pub tolerance: f64,
}

pub const UNCORRELATED_DEFAULT_TOL: f64 = 1e-9;

pub fn check_uncorrelated(
    net: &WeightedNetwork,
    prof: &ReferenceProfile,
    tolerance: Option<f64>,
) -> Result<UncorrelatedCheck> {
    check_dims(net, prof)?;
    let tolerance = tolerance.unwrap_or(UNCORRELATED_DEFAULT_TOL);
    let alpha_bar = prof.alpha_bar();
    let max_row_deviation = (0..net.n())
        .map(|i| (net.row_dot(i, prof.alpha()) - alpha_bar).abs())
        .fold(0.0, f64::max);
    Ok(UncorrelatedCheck {
        uncorrelated: max_row_deviation < tolerance,
        max_row_deviation,
        tolerance,
    })
}

/// Seeded Erdos-Renyi draw with row normalization: each directed link is
/// present with probability `p`, then every row is scaled by its out-degree
/// so the result is row-stochastic. Rows that come up empty are redrawn;
/// the second return value counts those redraws.
pub fn erdos_renyi_row_normalized(n: usize, p: f64, seed: u64) -> Result<(WeightedNetwork, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    erdos_renyi_with_rng(n, p, &mut rng)
}

/// Same draw against a caller-owned RNG (used by the simulation harness to
/// derive per-network substreams).
pub fn erdos_renyi_with_rng<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<(WeightedNetwork, usize)> {
    if n < 2 {
        return Err(Error::Parameter(format!("need n >= 2 agents, got {n}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Parameter(format!("link probability {p} outside (0, 1]")));
    }
    let mut weights = DMatrix::zeros(n, n);
    let mut redraws = 0usize;
    let mut row = vec![false; n];
    for i in 0..n {
        loop {
            let mut degree = 0usize;
            for (j, linked) in row.iter_mut().enumerate() {
                *linked = j != i && rng.random_bool(p);
                degree += *linked as usize;
            }
            if degree > 0 {
                let w = 1.0 / degree as f64;
                for j in 0..n {
                    weights[(i, j)] = if row[j] { w } else { 0.0 };
                }
                break;
            }
            redraws += 1;
        }
    }
    Ok((WeightedNetwork::new(weights)?, redraws))
}
