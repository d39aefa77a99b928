//! Per-class probability maps, arg-max splitting, segmentation scores and
//! the weighted multi-binomial loss.
//!
//! The maps normally come from [`oracle_probability_maps`], which corrupts
//! ground truth in a controlled way; externally produced maps load through
//! [`load_probability_maps`].

mod maps;
mod metrics;
mod oracle;

pub use maps::{
    argmax_segmentation, load_probability_maps, read_probability_maps, save_probability_maps, write_probability_maps,
    ProbabilityMaps, Segmentation,
};
pub use metrics::{
    multi_binomial_loss, segmentation_metrics, ClassMetrics, LossReport, LossWeights, SegError, SegmentationMetrics,
    LOSS_EPS,
};
pub use oracle::{oracle_probability_maps, CorruptionConfig};
