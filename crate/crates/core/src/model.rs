//! Shared data model: the two-domain dataset, mixing weights, optimizer
//! configuration and the joint embedding.
//!
//! Rows of every joint matrix are laid out positionally: the `n1` items of
//! domain 1 come first, followed by the `n2` items of domain 2.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Block, Error, Result};

/// Two domains of feature vectors plus the weighted bipartite graph between them.
///
/// A single-domain dataset has no `domain2` and an `n1 x 0` cross graph.
#[derive(Debug, Clone)]
pub struct MultimodalDataset {
    domain1: Array2<f64>,
    domain2: Option<Array2<f64>>,
    cross_graph: Array2<f64>,
}

impl MultimodalDataset {
    pub fn new(
        domain1: Array2<f64>,
        domain2: Option<Array2<f64>>,
        cross_graph: Array2<f64>,
    ) -> Result<Self> {
        let dataset = Self {
            domain1,
            domain2,
            cross_graph,
        };
        dataset.validate()?;
        Ok(dataset)
    }

    /// Single-domain dataset; the pipeline then reduces to plain t-SNE.
    pub fn single(domain1: Array2<f64>) -> Result<Self> {
        let n1 = domain1.nrows();
        Self::new(domain1, None, Array2::zeros((n1, 0)))
    }

    /// Checks every dataset invariant, reporting the first violation found.
    pub fn validate(&self) -> Result<()> {
        validate(self)
    }

    pub fn domain1(&self) -> ArrayView2<'_, f64> {
        self.domain1.view()
    }

    pub fn domain2(&self) -> Option<ArrayView2<'_, f64>> {
        self.domain2.as_ref().map(|d| d.view())
    }

    pub fn cross_graph(&self) -> ArrayView2<'_, f64> {
        self.cross_graph.view()
    }

    pub fn n1(&self) -> usize {
        self.domain1.nrows()
    }

    /// Zero when the second domain is absent.
    pub fn n2(&self) -> usize {
        self.domain2.as_ref().map_or(0, |d| d.nrows())
    }

    pub fn len(&self) -> usize {
        self.n1() + self.n2()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_domain2(&self) -> bool {
        self.domain2.is_some()
    }

    /// Tags (domain-2 indices) linked to image `i` by a positive weight.
    pub fn linked_tags(&self, i: usize) -> Vec<usize> {
        self.cross_graph
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    /// Whether domain-1 items `a` and `b` share at least one linked tag.
    pub fn share_tag(&self, a: usize, b: usize) -> bool {
        let ra = self.cross_graph.row(a);
        let rb = self.cross_graph.row(b);
        ra.iter().zip(rb.iter()).any(|(&x, &y)| x > 0.0 && y > 0.0)
    }
}

/// Validates a dataset against the data-model invariants.
pub fn validate(dataset: &MultimodalDataset) -> Result<()> {
    let n1 = dataset.domain1.nrows();
    if n1 < 2 {
        return Err(Error::EmptyDomain {
            block: Block::Domain1,
            reason: format!("need at least 2 items, got {n1}"),
        });
    }
    check_finite(dataset.domain1.view(), Block::Domain1)?;

    let n2 = match &dataset.domain2 {
        Some(d2) => {
            if d2.nrows() < 1 {
                return Err(Error::EmptyDomain {
                    block: Block::Domain2,
                    reason: "need at least 1 item".into(),
                });
            }
            check_finite(d2.view(), Block::Domain2)?;
            d2.nrows()
        }
        None => 0,
    };

    let w = &dataset.cross_graph;
    if w.dim() != (n1, n2) {
        return Err(Error::DimensionMismatch(format!(
            "cross graph is {}x{}, expected {n1}x{n2}",
            w.nrows(),
            w.ncols()
        )));
    }
    let mut any_positive = false;
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
        any_positive |= v > 0.0;
    }
    if dataset.domain2.is_some() && !any_positive {
        return Err(Error::AllZeroCrossGraph);
    }
    Ok(())
}

pub(crate) fn check_finite(m: ArrayView2<'_, f64>, block: Block) -> Result<()> {
    match m.indexed_iter().find(|(_, v)| !v.is_finite()) {
        Some(((row, col), _)) => Err(Error::NonFiniteValue { block, row, col }),
        None => Ok(()),
    }
}

/// Relative weights of the domain-1, domain-2 and cross-domain blocks.
///
/// Raw inputs are normalized by their sum, so `(1, 0, 1)` means half and half.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaWeights {
    beta1: f64,
    beta2: f64,
    beta12: f64,
}

impl BetaWeights {
    pub fn new(beta1: f64, beta2: f64, beta12: f64) -> Result<Self> {
        let raw = [beta1, beta2, beta12];
        if raw.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "beta weights must be finite and nonnegative, got {raw:?}"
            )));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidConfig(
                "beta weights must have a positive sum".into(),
            ));
        }
        Ok(Self {
            beta1: beta1 / total,
            beta2: beta2 / total,
            beta12: beta12 / total,
        })
    }

    /// `(1, 0, 0)`: only the domain-1 graph contributes.
    pub fn single_domain() -> Self {
        Self {
            beta1: 1.0,
            beta2: 0.0,
            beta12: 0.0,
        }
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    pub fn beta12(&self) -> f64 {
        self.beta12
    }
}

/// Preprocessing applied to the cross-domain graph before sum-normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormMode {
    /// Raw weights.
    #[default]
    Unnorm,
    /// Divide by the square roots of the row and column sums.
    Norm,
    /// Divide by the product of row and column sums.
    Pmi,
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unnorm" => Ok(NormMode::Unnorm),
            "norm" => Ok(NormMode::Norm),
            "pmi" => Ok(NormMode::Pmi),
            other => Err(Error::InvalidConfig(format!(
                "unknown normalization mode '{other}' (expected unnorm, norm or pmi)"
            ))),
        }
    }
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMode::Unnorm => "unnorm",
            NormMode::Norm => "norm",
            NormMode::Pmi => "pmi",
        })
    }
}

/// Everything needed to turn a dataset into an embedding.
#[derive(Debug, Clone)]
pub struct EmbedConfig {
    pub perplexity: f64,
    pub dim: usize,
    pub betas: BetaWeights,
    pub norm_mode: NormMode,
    pub iterations: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub lr_decay_every: usize,
    pub lr_decay_factor: f64,
    pub seed: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            dim: 2,
            betas: BetaWeights::new(1.0, 1.0, 1.0).expect("positive weights"),
            norm_mode: NormMode::Unnorm,
            iterations: 500,
            learning_rate: 100.0,
            momentum: 0.5,
            lr_decay_every: 400,
            lr_decay_factor: 0.1,
            seed: 0,
        }
    }
}

impl EmbedConfig {
    /// Checks the optimizer settings alone.
    pub fn validate_optimizer(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.dim < 1 {
            return bad("target dimension must be at least 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(self.momentum.is_finite() && self.momentum >= 0.0) {
            return bad(format!(
                "momentum must be nonnegative, got {}",
                self.momentum
            ));
        }
        if self.lr_decay_every < 1 {
            return bad("lr_decay_every must be at least 1".into());
        }
        if !(self.lr_decay_factor.is_finite() && self.lr_decay_factor > 0.0) {
            return bad(format!(
                "lr_decay_factor must be positive, got {}",
                self.lr_decay_factor
            ));
        }
        Ok(())
    }

    /// Checks the configuration against domain sizes; the perplexity must be
    /// achievable in every domain whose graph carries weight.
    pub fn validate(&self, n1: usize, n2: usize) -> Result<()> {
        self.validate_optimizer()?;
        let weighted = [
            (Block::Domain1, n1, self.betas.beta1()),
            (Block::Domain2, n2, self.betas.beta2()),
        ];
        for (block, n, beta) in weighted {
            if beta > 0.0 && !(self.perplexity > 1.0 && self.perplexity < n as f64) {
                return Err(Error::InvalidConfig(format!(
                    "perplexity must lie in (1, {n}) for {block}, got {}",
                    self.perplexity
                )));
            }
        }
        Ok(())
    }
}

/// Domain of origin of an embedded item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    One,
    Two,
}

impl Domain {
    /// External 1-based domain id.
    pub fn id(self) -> u8 {
        match self {
            Domain::One => 1,
            Domain::Two => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Domain::One),
            2 => Some(Domain::Two),
            _ => None,
        }
    }
}

impl From<Domain> for Block {
    fn from(d: Domain) -> Self {
        match d {
            Domain::One => Block::Domain1,
            Domain::Two => Block::Domain2,
        }
    }
}

/// K-dimensional coordinates for all items of both domains.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: Array2<f64>,
    n1: usize,
}

impl Embedding {
    pub fn new(coords: Array2<f64>, n1: usize) -> Result<Self> {
        if n1 > coords.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "embedding has {} rows but n1 = {n1}",
                coords.nrows()
            )));
        }
        if coords.ncols() < 1 {
            return Err(Error::DimensionMismatch("embedding has no columns".into()));
        }
        check_finite(coords.view(), Block::Domain1).map_err(|e| match e {
            Error::NonFiniteValue { row, col, .. } => Error::NonFiniteValue {
                block: if row < n1 {
                    Block::Domain1
                } else {
                    Block::Domain2
                },
                row: if row < n1 { row } else { row - n1 },
                col,
            },
            other => other,
        })?;
        Ok(Self { coords, n1 })
    }

    pub fn coords(&self) -> &Array2<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> Array2<f64> {
        self.coords
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.coords.nrows() - self.n1
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn domain1(&self) -> ArrayView2<'_, f64> {
        self.coords.slice(s![..self.n1, ..])
    }

    pub fn domain2(&self) -> ArrayView2<'_, f64> {
        self.coords.slice(s![self.n1.., ..])
    }

    /// Maps a joint row index to its domain and within-domain index.
    pub fn domain_of_row(&self, row: usize) -> Option<(Domain, usize)> {
        if row < self.n1 {
            Some((Domain::One, row))
        } else if row < self.coords.nrows() {
            Some((Domain::Two, row - self.n1))
        } else {
            None
        }
    }

    /// Inverse of [`Embedding::domain_of_row`].
    pub fn row_of(&self, domain: Domain, index: usize) -> Option<usize> {
        match domain {
            Domain::One if index < self.n1 => Some(index),
            Domain::Two if index < self.n2() => Some(self.n1 + index),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn two_by_one_dataset(w: Array2<f64>) -> Result<MultimodalDataset> {
        MultimodalDataset::new(
            array![[0.0, 1.0], [2.0, 3.0]],
            Some(array![[1.0, 2.0, 3.0]]),
            w,
        )
    }

    #[test]
    fn valid_dataset_passes() {
        assert!(two_by_one_dataset(array![[1.0], [0.0]]).is_ok());
    }

    #[test]
    fn negative_weight_names_index() {
        let err = two_by_one_dataset(array![[-1.0], [1.0]]).unwrap_err();
        assert!(matches!(err, Error::NegativeWeight { row: 0, col: 0 }));
    }

    #[test]
    fn all_zero_graph_rejected() {
        let err = two_by_one_dataset(array![[0.0], [0.0]]).unwrap_err();
        assert!(matches!(err, Error::AllZeroCrossGraph));
    }

    #[test]
    fn non_finite_feature_rejected() {
        let err = MultimodalDataset::new(
            array![[0.0, f64::NAN], [2.0, 3.0]],
            Some(array![[1.0]]),
            array![[1.0], [1.0]],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::NonFiniteValue {
                block: Block::Domain1,
                row: 0,
                col: 1
            }
        ));
    }

    #[test]
    fn too_few_items_rejected() {
        let err = MultimodalDataset::single(array![[0.0, 1.0]]).unwrap_err();
        assert!(matches!(
            err,
            Error::EmptyDomain {
                block: Block::Domain1,
                ..
            }
        ));
        let err = MultimodalDataset::new(
            array![[0.0], [1.0]],
            Some(Array2::zeros((0, 3))),
            Array2::zeros((2, 0)),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::EmptyDomain {
                block: Block::Domain2,
                ..
            }
        ));
    }

    #[test]
    fn graph_shape_checked() {
        let err = two_by_one_dataset(array![[1.0, 0.0], [0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn single_domain_has_empty_graph() {
        let d = MultimodalDataset::single(array![[0.0], [1.0], [2.0]]).unwrap();
        assert_eq!(d.n2(), 0);
        assert_eq!(d.cross_graph().dim(), (3, 0));
    }

    #[test]
    fn betas_reject_bad_input() {
        assert!(BetaWeights::new(0.0, 0.0, 0.0).is_err());
        assert!(BetaWeights::new(-1.0, 1.0, 1.0).is_err());
        let b = BetaWeights::new(1.0, 0.0, 1.0).unwrap();
        assert_eq!((b.beta1(), b.beta2(), b.beta12()), (0.5, 0.0, 0.5));
    }

    #[test]
    fn config_perplexity_bounds() {
        let cfg = EmbedConfig {
            perplexity: 5.0,
            ..Default::default()
        };
        assert!(cfg.validate(10, 10).is_ok());
        assert!(cfg.validate(10, 5).is_err());
        let cfg = EmbedConfig {
            perplexity: 5.0,
            betas: BetaWeights::new(1.0, 0.0, 1.0).unwrap(),
            ..Default::default()
        };
        assert!(cfg.validate(10, 5).is_ok());
    }

    #[test]
    fn norm_mode_parses() {
        assert_eq!("PMI".parse::<NormMode>().unwrap(), NormMode::Pmi);
        assert!("log".parse::<NormMode>().is_err());
    }

    proptest! {
        #[test]
        fn betas_sum_to_one(a in 0.0f64..10.0, b in 0.0f64..10.0, c in 0.0f64..10.0) {
            prop_assume!(a + b + c > 1e-9);
            let w = BetaWeights::new(a, b, c).unwrap();
            prop_assert!((w.beta1() + w.beta2() + w.beta12() - 1.0).abs() < 1e-12);
            prop_assert!(w.beta1() >= 0.0 && w.beta2() >= 0.0 && w.beta12() >= 0.0);
        }

        #[test]
        fn row_bookkeeping_is_bijective(n1 in 0usize..20, n2 in 0usize..20) {
            prop_assume!(n1 + n2 > 0);
            let e = Embedding::new(Array2::zeros((n1 + n2, 2)), n1).unwrap();
            for row in 0..n1 + n2 {
                let (d, i) = e.domain_of_row(row).unwrap();
                prop_assert_eq!(e.row_of(d, i), Some(row));
            }
            for i in 0..n1 {
                prop_assert_eq!(e.domain_of_row(e.row_of(Domain::One, i).unwrap()), Some((Domain::One, i)));
            }
            for j in 0..n2 {
                prop_assert_eq!(e.domain_of_row(e.row_of(Domain::Two, j).unwrap()), Some((Domain::Two, j)));
            }
            prop_assert_eq!(e.domain_of_row(n1 + n2), None);
        }
    }
}
