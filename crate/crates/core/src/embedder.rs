//! Student-t joint over the embedded points, the KL objective and the
//! momentum gradient descent that minimizes it.
//!
//! All pairwise work is split by rows across the rayon pool. Every reduction
//! (the kernel normalizer, the objective) sums per-row partials in row order,
//! so results do not depend on the number of worker threads.

use ndarray::{Array2, ArrayView2, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Block, Error, Result};
use crate::model::{check_finite, EmbedConfig, Embedding};
use crate::relation::AugmentedRelation;

/// Standard deviation of the initial coordinates (variance 1e-4).
pub const INIT_STD: f64 = 1e-2;

/// Low-dimensional joint distribution with its cached kernel values.
#[derive(Debug, Clone)]
pub struct QJoint {
    q: Array2<f64>,
    num: Array2<f64>,
    z: f64,
}

impl QJoint {
    pub fn probs(&self) -> &Array2<f64> {
        &self.q
    }

    /// Unnormalized kernels `1 / (1 + |y_i - y_j|^2)`, zero on the diagonal.
    pub fn kernels(&self) -> &Array2<f64> {
        &self.num
    }

    /// Sum of kernels over ordered distinct pairs.
    pub fn normalizer(&self) -> f64 {
        self.z
    }
}

fn rows_to_matrix(rows: Vec<Vec<f64>>, m: usize, k: usize) -> Array2<f64> {
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((m, k), flat).expect("row lengths agree")
}

/// Heavy-tailed joint over every pair of items, normalized once over all
/// pairs regardless of domain.
pub fn compute_q(coords: ArrayView2<'_, f64>) -> Result<QJoint> {
    let m = coords.nrows();
    if m < 2 {
        return Err(Error::ShapeMismatch(format!(
            "need at least 2 embedded points, got {m}"
        )));
    }
    check_finite(coords, Block::Domain1)?;

    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let yi = coords.row(i);
            (0..m)
                .map(|j| {
                    if i == j {
                        return 0.0;
                    }
                    let d2: f64 = yi
                        .iter()
                        .zip(coords.row(j).iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    1.0 / (1.0 + d2)
                })
                .collect()
        })
        .collect();
    let z: f64 = rows.iter().map(|r| r.iter().sum::<f64>()).sum();
    let num = rows_to_matrix(rows, m, m);
    let q = &num / z;
    Ok(QJoint { q, num, z })
}

/// `sum p log(p / q)` over ordered distinct pairs, natural log, `0 log 0 = 0`.
pub fn kl_divergence(p: ArrayView2<'_, f64>, q: ArrayView2<'_, f64>) -> Result<f64> {
    if p.dim() != q.dim() || p.nrows() != p.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "P is {:?} but Q is {:?}",
            p.dim(),
            q.dim()
        )));
    }
    let m = p.nrows();
    let partials: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..m {
                let pij = p[[i, j]];
                if i == j || pij <= 0.0 {
                    continue;
                }
                let qij = q[[i, j]];
                if qij <= 0.0 {
                    return Err(Error::ZeroQWithPositiveP { i, j });
                }
                acc += pij * (pij / qij).ln();
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(partials.into_iter().sum())
}

/// KL divergence of the low-dimensional joint from the augmented relation.
pub fn kl_cost(p: &AugmentedRelation, q: &QJoint) -> Result<f64> {
    kl_divergence(p.matrix().view(), q.q.view())
}

/// Analytic gradient of [`kl_cost`] with respect to every coordinate:
/// row `i` is `4 sum_j (p_ij - q_ij) k_ij (y_i - y_j)` with `k` the cached kernels.
pub fn kl_gradient(
    p: &AugmentedRelation,
    coords: ArrayView2<'_, f64>,
    q: &QJoint,
) -> Result<Array2<f64>> {
    let (m, k) = coords.dim();
    if p.len() != m || q.q.nrows() != m {
        return Err(Error::ShapeMismatch(format!(
            "P has {} rows, Q has {}, coordinates have {m}",
            p.len(),
            q.q.nrows()
        )));
    }
    let pm = p.matrix();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut g = vec![0.0; k];
            let yi = coords.row(i);
            for j in 0..m {
                if i == j {
                    continue;
                }
                let mult = 4.0 * (pm[[i, j]] - q.q[[i, j]]) * q.num[[i, j]];
                for (c, gc) in g.iter_mut().enumerate() {
                    *gc += mult * (yi[c] - coords[[j, c]]);
                }
            }
            g
        })
        .collect();
    Ok(rows_to_matrix(rows, m, k))
}

/// Seeded `N(0, 1e-4)` starting layout, filled row by row.
pub fn initial_coords(m: usize, dim: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, INIT_STD).expect("valid normal");
    Array2::from_shape_simple_fn((m, dim), || normal.sample(&mut rng))
}

/// What the optimizer exposes to an observer at each iteration, before the
/// coordinates are updated.
#[derive(Debug)]
pub struct StepInfo<'a> {
    /// Zero-based iteration index.
    pub iteration: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub kl: f64,
    pub q: &'a QJoint,
}

/// Full-batch momentum gradient descent with a step-decayed learning rate.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    y: Array2<f64>,
    y_prev: Array2<f64>,
    eta: f64,
    t: usize,
    kl_history: Vec<f64>,
}

impl OptimizerState {
    /// Starts with `Y(0) = Y(1) = init`, so the first momentum term is zero.
    pub fn new(init: Array2<f64>, learning_rate: f64) -> Self {
        Self {
            y_prev: init.clone(),
            y: init,
            eta: learning_rate,
            t: 0,
            kl_history: Vec::new(),
        }
    }

    pub fn coords(&self) -> &Array2<f64> {
        &self.y
    }

    pub fn learning_rate(&self) -> f64 {
        self.eta
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn kl_history(&self) -> &[f64] {
        &self.kl_history
    }

    /// One update. Returns the objective at the coordinates before the step.
    pub fn step<F>(
        &mut self,
        p: &AugmentedRelation,
        config: &EmbedConfig,
        observer: &mut F,
    ) -> Result<f64>
    where
        F: FnMut(&StepInfo<'_>),
    {
        let diverged = Error::DivergedObjective { iteration: self.t };
        let q = compute_q(self.y.view()).map_err(|e| match e {
            Error::NonFiniteValue { .. } => Error::DivergedObjective { iteration: self.t },
            other => other,
        })?;
        let kl = kl_cost(p, &q)?;
        if !kl.is_finite() {
            return Err(diverged);
        }
        observer(&StepInfo {
            iteration: self.t,
            learning_rate: self.eta,
            momentum: config.momentum,
            kl,
            q: &q,
        });
        let grad = kl_gradient(p, self.y.view(), &q)?;

        let mut next = Array2::zeros(self.y.dim());
        let (eta, alpha) = (self.eta, config.momentum);
        Zip::from(&mut next)
            .and(&self.y)
            .and(&self.y_prev)
            .and(&grad)
            .for_each(|n, &y, &yp, &g| *n = y - eta * g + alpha * (y - yp));
        if next.iter().any(|v| !v.is_finite()) {
            return Err(diverged);
        }
        self.y_prev = std::mem::replace(&mut self.y, next);
        self.kl_history.push(kl);
        self.t += 1;
        if self.t.is_multiple_of(config.lr_decay_every) {
            self.eta *= config.lr_decay_factor;
        }
        Ok(kl)
    }
}

/// Result of [`embed`]: final layout and the objective at every iteration.
#[derive(Debug, Clone)]
pub struct EmbedResult {
    pub embedding: Embedding,
    pub kl_history: Vec<f64>,
}

/// Minimizes `KL(P || Q)` for exactly `config.iterations` steps.
pub fn embed(p: &AugmentedRelation, config: &EmbedConfig) -> Result<EmbedResult> {
    embed_with_observer(p, config, |_| {})
}

/// [`embed`] with a callback invoked once per iteration.
pub fn embed_with_observer<F>(
    p: &AugmentedRelation,
    config: &EmbedConfig,
    mut observer: F,
) -> Result<EmbedResult>
where
    F: FnMut(&StepInfo<'_>),
{
    config.validate_optimizer()?;
    let init = initial_coords(p.len(), config.dim, config.seed);
    let mut state = OptimizerState::new(init, config.learning_rate);
    for _ in 0..config.iterations {
        state.step(p, config, &mut observer)?;
    }
    let OptimizerState { y, kl_history, .. } = state;
    Ok(EmbedResult {
        embedding: Embedding::new(y, p.n1())?,
        kl_history,
    })
}
