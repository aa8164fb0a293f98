//! Dataset to embedding in one call.

use crate::embedder::{embed, EmbedResult};
use crate::error::{Block, Result};
use crate::model::{EmbedConfig, MultimodalDataset};
use crate::relation::{
    assemble_augmented, normalize_cross_graph, AugmentedRelation, CrossRelation,
};
use crate::sn_graph::SnGraph;

/// Builds the augmented relation for `dataset`. Within-domain graphs whose
/// weight is zero are never computed.
pub fn build_augmented(
    dataset: &MultimodalDataset,
    config: &EmbedConfig,
) -> Result<AugmentedRelation> {
    config.validate(dataset.n1(), dataset.n2())?;
    let betas = config.betas;
    let p1 = if betas.beta1() > 0.0 {
        Some(SnGraph::build(
            dataset.domain1(),
            config.perplexity,
            Block::Domain1,
        )?)
    } else {
        None
    };
    let p2 = match dataset.domain2() {
        Some(x2) if betas.beta2() > 0.0 => {
            Some(SnGraph::build(x2, config.perplexity, Block::Domain2)?)
        }
        _ => None,
    };
    let r = if dataset.has_domain2() {
        normalize_cross_graph(dataset.cross_graph(), config.norm_mode)?
    } else {
        CrossRelation::empty(dataset.n1())
    };
    assemble_augmented(p1.as_ref(), p2.as_ref(), &r, &betas)
}

/// Builds the augmented relation and optimizes the layout.
pub fn run_mrsne(dataset: &MultimodalDataset, config: &EmbedConfig) -> Result<EmbedResult> {
    let p = build_augmented(dataset, config)?;
    embed(&p, config)
}
