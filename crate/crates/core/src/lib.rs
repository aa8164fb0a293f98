//! Multimodal relational stochastic neighbor embedding.
//!
//! Two domains of feature vectors (say, image features and tag word vectors)
//! and a weighted bipartite graph between them are embedded into one shared
//! low-dimensional space. Within-domain neighborhoods come from perplexity
//! calibrated Gaussian kernels, across-domain structure from the normalized
//! graph, and the layout minimizes the KL divergence to a Student-t joint over
//! every pair of items.
//!
//! The crate also ships the evaluation suite used to compare embeddings
//! (k-NN graph reconstruction ROC, variance ratio, neighborhood hit metrics),
//! a linear CDMCA baseline and the text formats read and written by the
//! `mrsne` command-line tool.

pub mod cca;
pub mod cli;
pub mod embedder;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod plot;
pub mod relation;
pub mod sn_graph;

pub use error::{Block, Error, Result};
pub use model::{BetaWeights, Domain, EmbedConfig, Embedding, MultimodalDataset, NormMode};
