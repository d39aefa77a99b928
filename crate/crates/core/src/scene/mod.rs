//! Random room scenes and a ray-casting depth scanner.

mod description;
mod generate;
mod patch;
mod poses;
mod render;
mod shapes;

pub use description::{Instance, SceneDescription, SceneParseError};
pub use generate::{generate_scene, translate, SceneConfig, SceneError};
pub use patch::BezierPatch;
pub use poses::{look_at, sample_scan_poses, view_direction, PoseConfig, ScanPose};
pub use render::{render_from, render_scan, NoiseModel, ScannerConfig, Tracer};
pub use shapes::{Aabb, Shape, RAY_EPS};
