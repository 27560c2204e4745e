//! Information-geometric clustering of radar clutter.
//!
//! Each range cell of a pulse burst is summarized by its reflection
//! coordinates `(log p0, μ_1, …, μ_m)` in `ℝ × D^m`. Cells are compared with
//! the weighted product of the Euclidean line and Poincaré disks, averaged with
//! Karcher means or Fréchet medians, and grouped with k-means on that
//! manifold. The `siegel` module carries the matrix-valued (multichannel)
//! generalization.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod estimate;
pub mod evaluate;
pub mod exec;
pub mod hermitian;
pub mod poincare;
pub mod siegel;
pub mod simulate;

pub use cluster::{kmeans, ClusterModel, Init, KMeansOptions};
pub use estimate::{burg_regularized, estimate_cells, levinson, ArModel, ReflectionPoint};
pub use evaluate::{best_permutation_score, EvalReport};
pub use exec::Exec;
pub use hermitian::{CMatrix, HpdMatrix};
pub use poincare::{frechet_median, karcher_mean, product_distance, FlowOptions, ProductPoint};
pub use siegel::{SiegelNorm, SiegelParams, SiegelPoint};
pub use simulate::{simulate_scenario, Burst, ClassSpec, ScenarioConfig};
