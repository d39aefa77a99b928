//! Multi-model, multi-instance geometric primitive fitting on range images.
//!
//! The crate is organised bottom-up:
//!
//! - [`geom`]: plane/sphere/cylinder/cone models, point queries, minimal
//!   sample fits and Gauss-Newton refinement.
//! - [`range_image`]: depth images, unprojection, PCA normals, instance-aware
//!   boundaries, boundary-aware label schemes and the binary container format.
//! - [`scene`]: random room scenes, the scan pose grid and a ray-casting
//!   virtual scanner producing depth and ground-truth labels.
//! - [`seg`]: per-class probability maps (a configurable oracle standing in
//!   for a trained segmenter), arg-max splitting, segmentation metrics and the
//!   weighted multi-binomial cross-entropy.
//! - [`ransac`]: an efficient-RANSAC style greedy multi-instance detector.
//! - [`eval`]: segmentation-guided fitting, the whole-cloud baseline and the
//!   intersection-over-true matching used to score detections.

pub mod eval;
pub mod geom;
pub mod range_image;
pub mod ransac;
pub mod rng;
pub mod scene;
pub mod seg;

pub use nalgebra;

/// Double precision 3-vector used for all geometry.
pub type Vec3 = nalgebra::Vector3<f64>;
