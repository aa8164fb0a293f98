//! Embedding quality metrics.
//!
//! Every metric is driven by query images (domain-1 items). A tag is a
//! positive for a query when the two are linked in the cross graph; another
//! image is a positive when it shares at least one linked tag with the query.

use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::error::{Block, Error, Result};
use crate::model::{Embedding, MultimodalDataset};

/// One point of the k-sweep ROC curve. `k = 0` is the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub k: usize,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// Starts at `(0, 0)` for `k = 0` and ends at `(1, 1)` once every
    /// candidate is retrieved.
    pub points: Vec<RocPoint>,
    pub auc: f64,
    /// Queries left out of the averages because they have no positive.
    pub skipped_queries: usize,
}

/// Which k-nearest-neighbor score to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Fraction of queries with at least one positive among the k neighbors.
    Hit,
    /// Mean number of positives among the k neighbors.
    Count,
}

/// Where the k neighbors of a query image are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Among all tags.
    Across,
    /// Among the other images.
    WithinImage,
}

fn sq_dist(coords: ArrayView2<'_, f64>, a: usize, b: usize) -> f64 {
    coords
        .row(a)
        .iter()
        .zip(coords.row(b).iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Candidates ordered by distance to `query`, ties broken by row index.
/// The query itself is dropped from the candidate list.
fn rank(coords: ArrayView2<'_, f64>, query: usize, candidates: &[usize]) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = candidates
        .iter()
        .copied()
        .filter(|&c| c != query)
        .map(|c| (sq_dist(coords, query, c), c))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, c)| c).collect()
}

/// The `k` candidate rows nearest to `query` (excluding the query itself).
pub fn knn_indices(
    embedding: &Embedding,
    query: usize,
    k: usize,
    candidates: &[usize],
) -> Result<Vec<usize>> {
    if query >= embedding.len() || candidates.iter().any(|&c| c >= embedding.len()) {
        return Err(Error::DimensionMismatch(format!(
            "row index out of range for an embedding of {} rows",
            embedding.len()
        )));
    }
    let available = candidates.iter().filter(|&&c| c != query).count();
    if k > available {
        return Err(Error::KTooLarge { k, available });
    }
    let mut ranked = rank(embedding.coords().view(), query, candidates);
    ranked.truncate(k);
    Ok(ranked)
}

fn check_alignment(embedding: &Embedding, dataset: &MultimodalDataset) -> Result<()> {
    if embedding.n1() != dataset.n1() || embedding.n2() != dataset.n2() {
        return Err(Error::DimensionMismatch(format!(
            "embedding has {}+{} rows, dataset has {}+{} items",
            embedding.n1(),
            embedding.n2(),
            dataset.n1(),
            dataset.n2()
        )));
    }
    Ok(())
}

/// Precomputed positive sets for every query image.
struct Truth {
    tags_of: Vec<Vec<usize>>,
    images_of: Vec<Vec<usize>>,
}

impl Truth {
    fn new(dataset: &MultimodalDataset) -> Self {
        let w = dataset.cross_graph();
        let mut tags_of = vec![Vec::new(); dataset.n1()];
        let mut images_of = vec![Vec::new(); dataset.n2()];
        for ((i, j), &v) in w.indexed_iter() {
            if v > 0.0 {
                tags_of[i].push(j);
                images_of[j].push(i);
            }
        }
        Self { tags_of, images_of }
    }

    /// Image-level positives of `i`: images other than `i` sharing a tag.
    fn image_mask(&self, i: usize, n1: usize) -> Vec<bool> {
        let mut mask = vec![false; n1];
        for &t in &self.tags_of[i] {
            for &other in &self.images_of[t] {
                mask[other] = true;
            }
        }
        mask[i] = false;
        mask
    }

    fn tag_mask(&self, i: usize, n2: usize) -> Vec<bool> {
        let mut mask = vec![false; n2];
        for &t in &self.tags_of[i] {
            mask[t] = true;
        }
        mask
    }
}

/// ROC curve over `k = 1..=L` from per-query relevance lists in rank order.
///
/// Counts are pooled over queries at each `k` before forming rates. Queries
/// without any positive are skipped and counted.
pub fn roc_from_relevance(rankings: &[Vec<bool>]) -> Result<RocCurve> {
    let len = rankings.first().map_or(0, Vec::len);
    if rankings.iter().any(|r| r.len() != len) {
        return Err(Error::ShapeMismatch(
            "every query must rank the same number of candidates".into(),
        ));
    }
    let mut tp = vec![0u64; len + 1];
    let mut fp = vec![0u64; len + 1];
    let (mut total_pos, mut total_neg, mut skipped) = (0u64, 0u64, 0usize);
    for ranking in rankings {
        let positives = ranking.iter().filter(|&&b| b).count() as u64;
        if positives == 0 {
            skipped += 1;
            continue;
        }
        total_pos += positives;
        total_neg += len as u64 - positives;
        let (mut t, mut f) = (0u64, 0u64);
        for (k, &relevant) in ranking.iter().enumerate() {
            if relevant {
                t += 1;
            } else {
                f += 1;
            }
            tp[k + 1] += t;
            fp[k + 1] += f;
        }
    }
    if total_pos == 0 {
        return Err(Error::NoPositives);
    }
    if total_neg == 0 {
        return Err(Error::NoNegatives);
    }

    let points: Vec<RocPoint> = (0..=len)
        .map(|k| RocPoint {
            k,
            fpr: fp[k] as f64 / total_neg as f64,
            tpr: tp[k] as f64 / total_pos as f64,
        })
        .collect();
    let auc = trapezoid(&points);
    Ok(RocCurve {
        points,
        auc,
        skipped_queries: skipped,
    })
}

fn trapezoid(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

/// Graph-reconstruction ROC: each query image predicts links to its `k`
/// nearest items of either domain, for every `k` from 1 to `n1 + n2 - 1`.
pub fn reconstruction_roc(embedding: &Embedding, dataset: &MultimodalDataset) -> Result<RocCurve> {
    check_alignment(embedding, dataset)?;
    let (n1, n2) = (dataset.n1(), dataset.n2());
    let truth = Truth::new(dataset);
    let coords = embedding.coords().view();
    let all: Vec<usize> = (0..n1 + n2).collect();
    let rankings: Vec<Vec<bool>> = (0..n1)
        .into_par_iter()
        .map(|i| {
            let images = truth.image_mask(i, n1);
            let tags = truth.tag_mask(i, n2);
            rank(coords, i, &all)
                .into_iter()
                .map(|r| if r < n1 { images[r] } else { tags[r - n1] })
                .collect()
        })
        .collect();
    roc_from_relevance(&rankings)
}

fn trace_of_covariance(block: ArrayView2<'_, f64>) -> f64 {
    let n = block.nrows() as f64;
    block
        .columns()
        .into_iter()
        .map(|col| {
            let mean = col.sum() / n;
            col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        })
        .sum()
}

/// Ratio of total sample variance (unbiased) of the domain-1 points to that
/// of the domain-2 points.
pub fn variance_ratio(embedding: &Embedding) -> Result<f64> {
    for (block, n) in [
        (Block::Domain1, embedding.n1()),
        (Block::Domain2, embedding.n2()),
    ] {
        if n < 2 {
            return Err(Error::TooFewPoints {
                block,
                needed: 2,
                got: n,
            });
        }
    }
    let t1 = trace_of_covariance(embedding.domain1());
    let t2 = trace_of_covariance(embedding.domain2());
    if t1 <= 0.0 {
        return Err(Error::DegenerateDomain {
            block: Block::Domain1,
        });
    }
    if t2 <= 0.0 {
        return Err(Error::DegenerateDomain {
            block: Block::Domain2,
        });
    }
    Ok(t1 / t2)
}

/// Neighborhood score averaged over all query images. Queries without any
/// positive count as misses.
pub fn knn_metric(
    embedding: &Embedding,
    dataset: &MultimodalDataset,
    k: usize,
    kind: MetricKind,
    scope: Scope,
) -> Result<f64> {
    check_alignment(embedding, dataset)?;
    let (n1, n2) = (dataset.n1(), dataset.n2());
    let candidates: Vec<usize> = match scope {
        Scope::Across => (n1..n1 + n2).collect(),
        Scope::WithinImage => (0..n1).collect(),
    };
    let available = match scope {
        Scope::Across => n2,
        Scope::WithinImage => n1 - 1,
    };
    if k > available {
        return Err(Error::KTooLarge { k, available });
    }
    let truth = Truth::new(dataset);
    let scores: Vec<f64> = (0..n1)
        .into_par_iter()
        .map(|i| {
            let neighbors = knn_indices(embedding, i, k, &candidates)?;
            let hits = match scope {
                Scope::Across => {
                    let mask = truth.tag_mask(i, n2);
                    neighbors.iter().filter(|&&r| mask[r - n1]).count()
                }
                Scope::WithinImage => {
                    let mask = truth.image_mask(i, n1);
                    neighbors.iter().filter(|&&r| mask[r]).count()
                }
            };
            Ok(match kind {
                MetricKind::Hit => f64::from(u8::from(hits > 0)),
                MetricKind::Count => hits as f64,
            })
        })
        .collect::<Result<_>>()?;
    Ok(scores.iter().sum::<f64>() / n1 as f64)
}
