//! Guidance evaluation: oracle cost-to-go, the smoothed softmin target over
//! tree nodes, and the divergences that turn a selection into a sampling
//! efficiency score (in nats).

pub mod divergence;
pub mod oracle;
pub mod target;

pub use divergence::{distribution_entropy, js_divergence, kl_divergence, sampling_efficiency, SeMode};
pub use oracle::{oracle_build, GridShape, OracleField};
pub use target::{node_scores, target_distribution, Normalization, NodeScores, TargetDistribution, TargetParams};
