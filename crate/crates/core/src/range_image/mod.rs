//! Range images, PCA normals, instance-aware boundaries and label schemes.

mod boundary;
mod image;
pub mod io;
mod labels;
mod normals;

pub use boundary::compute_boundaries;
pub use image::{Intrinsics, PointMap, RangeImage};
pub use labels::{make_bags_labels, BagsCell, BagsLabel, BagsLabelMap, LabelMap, LabelScheme, SemanticClass};
pub use normals::{estimate_normals, NormalMap};

/// Window used for both normal estimation and boundary extraction.
pub const DEFAULT_WINDOW: usize = 5;
