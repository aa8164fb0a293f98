//! Latent-cluster generator shared by the integration tests.
#![allow(dead_code)]

use std::path::Path;

use mrsne::io::{save_cross_graph, save_matrix};
use mrsne::{EmbedConfig, MultimodalDataset};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const CLUSTERS: usize = 3;
/// Standard deviation of each coordinate of a cluster mean.
pub const MEAN_SCALE: f64 = 3.0;
/// Standard deviation of the per-point noise around the cluster mean.
pub const NOISE: f64 = 1.0;
pub const LINK_PROB: f64 = 0.3;

pub struct Synthetic {
    pub dataset: MultimodalDataset,
    pub cluster1: Vec<usize>,
    pub cluster2: Vec<usize>,
}

fn domain(rng: &mut ChaCha8Rng, n: usize, dim: usize, clusters: &[usize]) -> Array2<f64> {
    let mean_dist = Normal::new(0.0, MEAN_SCALE).unwrap();
    let noise = Normal::new(0.0, NOISE).unwrap();
    let means = Array2::from_shape_simple_fn((CLUSTERS, dim), || mean_dist.sample(rng));
    Array2::from_shape_fn((n, dim), |(i, c)| {
        means[[clusters[i], c]] + noise.sample(rng)
    })
}

/// Item `i` of either domain belongs to cluster `i % 3`. Same-cluster
/// pairs are linked with probability [`LINK_PROB`] and weight 1.
pub fn latent_clusters(n1: usize, d1: usize, n2: usize, d2: usize, seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cluster1: Vec<usize> = (0..n1).map(|i| i % CLUSTERS).collect();
    let cluster2: Vec<usize> = (0..n2).map(|j| j % CLUSTERS).collect();
    let x1 = domain(&mut rng, n1, d1, &cluster1);
    let x2 = domain(&mut rng, n2, d2, &cluster2);
    let mut w = Array2::zeros((n1, n2));
    for i in 0..n1 {
        for j in 0..n2 {
            if cluster1[i] == cluster2[j] && rng.random_bool(LINK_PROB) {
                w[[i, j]] = 1.0;
            }
        }
    }
    Synthetic {
        dataset: MultimodalDataset::new(x1, Some(x2), w).unwrap(),
        cluster1,
        cluster2,
    }
}

/// The standard benchmark shape: 90 ten-dimensional items against 30
/// five-dimensional ones.
pub fn benchmark(seed: u64) -> Synthetic {
    latent_clusters(90, 10, 30, 5, seed)
}

/// Writes the dataset files plus a manifest into `dir` and returns the
/// manifest path.
pub fn write_dataset(ds: &MultimodalDataset, dir: &Path) -> std::path::PathBuf {
    save_matrix(&ds.domain1().to_owned(), &dir.join("x1.txt")).unwrap();
    save_matrix(&ds.domain2().unwrap().to_owned(), &dir.join("x2.txt")).unwrap();
    save_cross_graph(&ds.cross_graph().to_owned(), &dir.join("w.txt")).unwrap();
    let manifest = dir.join("data.toml");
    std::fs::write(
        &manifest,
        "domain1 = \"x1.txt\"\ndomain2 = \"x2.txt\"\ncross_graph = \"w.txt\"\n",
    )
    .unwrap();
    manifest
}

/// The default perplexity, lowered to `(n - 1) / 3` when the smaller domain
/// is too small for it.
pub fn capped_perplexity(ds: &MultimodalDataset) -> f64 {
    let n = ds.n1().min(ds.n2().max(1)) as f64;
    EmbedConfig::default().perplexity.min((n - 1.0) / 3.0)
}
