//! Cross-domain graph normalization and the augmented joint distribution.
//!
//! The augmented matrix stacks the weighted within-domain graphs on the
//! diagonal and half the weighted cross relation off the diagonal:
//!
//! ```text
//! [ beta1 * P1          beta12/2 * R ]
//! [ beta12/2 * R^T      beta2 * P2   ]
//! ```

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Block, Error, Result};
use crate::model::{BetaWeights, NormMode};
use crate::sn_graph::SnGraph;

const MASS_TOLERANCE: f64 = 1e-10;

/// Cross-domain joint distribution: nonnegative, total mass one.
#[derive(Debug, Clone)]
pub struct CrossRelation {
    r: Array2<f64>,
}

impl CrossRelation {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.r
    }

    pub fn n1(&self) -> usize {
        self.r.nrows()
    }

    pub fn n2(&self) -> usize {
        self.r.ncols()
    }

    /// Relation for a dataset without a second domain.
    pub fn empty(n1: usize) -> Self {
        Self {
            r: Array2::zeros((n1, 0)),
        }
    }
}

/// Applies the preprocessing `mode` to `w` and scales the result to unit mass.
///
/// Row and column sums run over the full row and column. Entries in an
/// all-zero row or column are left at zero.
pub fn normalize_cross_graph(w: ArrayView2<'_, f64>, mode: NormMode) -> Result<CrossRelation> {
    for ((row, col), &v) in w.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                block: Block::Cross,
                row,
                col,
            });
        }
        if v < 0.0 {
            return Err(Error::NegativeWeight { row, col });
        }
    }
    if w.iter().sum::<f64>() <= 0.0 {
        return Err(Error::AllZeroCrossGraph);
    }

    let row_sums = w.sum_axis(ndarray::Axis(1));
    let col_sums = w.sum_axis(ndarray::Axis(0));
    let transformed = Array2::from_shape_fn(w.dim(), |(i, j)| {
        let v = w[[i, j]];
        let (rs, cs) = (row_sums[i], col_sums[j]);
        if v == 0.0 {
            return 0.0;
        }
        match mode {
            NormMode::Unnorm => v,
            NormMode::Norm => v / (rs.sqrt() * cs.sqrt()),
            NormMode::Pmi => v / (rs * cs),
        }
    });
    let total: f64 = transformed.iter().sum();
    Ok(CrossRelation {
        r: transformed / total,
    })
}

/// Block weights proportional to block sizes: `n1^2`, `n2^2` and `n1 n2`.
///
/// With `drop_domain2` the domain-2 graph is ignored and the remaining two
/// weights are renormalized (`n1^2 : n1 n2`).
pub fn adaptive_betas(n1: usize, n2: usize, drop_domain2: bool) -> BetaWeights {
    let (a, b) = (n1 as f64, n2 as f64);
    let within2 = if drop_domain2 { 0.0 } else { b * b };
    BetaWeights::new(a * a, within2, a * b).expect("positive block sizes")
}

/// The augmented joint distribution over all `n1 + n2` items.
#[derive(Debug, Clone)]
pub struct AugmentedRelation {
    p: Array2<f64>,
    n1: usize,
}

impl AugmentedRelation {
    /// Wraps an already assembled matrix after checking symmetry, sign, zero
    /// diagonal and unit mass.
    pub fn from_matrix(p: Array2<f64>, n1: usize) -> Result<Self> {
        let m = p.nrows();
        if p.ncols() != m || n1 > m {
            return Err(Error::DimensionMismatch(format!(
                "augmented matrix is {}x{} with n1 = {n1}",
                p.nrows(),
                p.ncols()
            )));
        }
        let mut total = 0.0;
        for i in 0..m {
            if p[[i, i]] != 0.0 {
                return Err(Error::InvalidConfig(format!("nonzero diagonal at {i}")));
            }
            for j in 0..m {
                let v = p[[i, j]];
                if v.is_nan() || v < 0.0 || !v.is_finite() {
                    return Err(Error::InvalidConfig(format!("invalid entry at ({i}, {j})")));
                }
                if v != p[[j, i]] {
                    return Err(Error::InvalidConfig(format!("asymmetric at ({i}, {j})")));
                }
                total += v;
            }
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidConfig(format!("total mass {total} is not 1")));
        }
        Ok(Self { p, n1 })
    }

    /// Single-domain case: the augmented matrix is the SN graph itself.
    pub fn single_domain(graph: &SnGraph) -> Self {
        Self {
            p: graph.probs().clone(),
            n1: graph.len(),
        }
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.p.nrows() - self.n1
    }

    pub fn len(&self) -> usize {
        self.p.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.p.nrows() == 0
    }
}

/// Assembles the weighted block matrix.
///
/// A within-domain graph may be omitted only when its weight is zero; the
/// missing block is then all zeros.
pub fn assemble_augmented(
    p1: Option<&SnGraph>,
    p2: Option<&SnGraph>,
    r: &CrossRelation,
    betas: &BetaWeights,
) -> Result<AugmentedRelation> {
    let (n1, n2) = (r.n1(), r.n2());
    let blocks = [
        (p1, n1, betas.beta1(), Block::Domain1),
        (p2, n2, betas.beta2(), Block::Domain2),
    ];
    for (graph, n, beta, block) in blocks {
        match graph {
            Some(g) if g.len() != n => {
                return Err(Error::DimensionMismatch(format!(
                    "{block} graph has {} items but the cross relation expects {n}",
                    g.len()
                )));
            }
            None if beta > 0.0 => return Err(Error::MissingGraphWithPositiveBeta { block }),
            _ => {}
        }
    }
    if n2 == 0 && betas.beta12() > 0.0 {
        return Err(Error::MissingGraphWithPositiveBeta {
            block: Block::Cross,
        });
    }

    let m = n1 + n2;
    let mut p = Array2::zeros((m, m));
    if let Some(g) = p1 {
        p.slice_mut(s![..n1, ..n1])
            .assign(&(g.probs() * betas.beta1()));
    }
    if let Some(g) = p2 {
        p.slice_mut(s![n1.., n1..])
            .assign(&(g.probs() * betas.beta2()));
    }
    let half = betas.beta12() / 2.0;
    let cross = r.matrix() * half;
    p.slice_mut(s![..n1, n1..]).assign(&cross);
    p.slice_mut(s![n1.., ..n1]).assign(&cross.t());
    Ok(AugmentedRelation { p, n1 })
}
