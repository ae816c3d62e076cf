//! Guidance strategies built on top of the guiding-space contract: lazy
//! roadmap, workspace medial axis, path database, and the hybrid combinator.

pub mod hybrid;
pub mod lazy;
pub mod medial;
pub mod pathdb;
pub mod skeleton;

pub use hybrid::HybridGuidance;
pub use lazy::{lazy_build, LazyGuidance, LazyParams, LazyRoadmap};
pub use medial::{build_skeleton, medial_guidance, MedialAxisGuidance, MedialParams};
pub use pathdb::{db_build, DbBuildParams, DbEntry, PathDatabase, PathDbGuidance, PreparedDatabase};
pub use skeleton::{skeleton_extract, SkeletonEdge, SkeletonGraph, SkeletonPoint};
