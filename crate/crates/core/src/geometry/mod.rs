//! Riemannian kernel: chart metrics, covariant operators, graph geometry in N×ℝ.

pub mod graph;
pub mod metric;
pub mod ops;
pub mod warp;

pub use graph::GraphGeometry;
pub use metric::{ChartMetric, MetricKind, SampledMetric};
pub use ops::{
    boundary_mean_curvature, boundary_mean_curvature_numeric, covariant_divergence, ricci_min_estimate,
    slice_mean_curvature,
};
pub use warp::{BridgeWarp, Warp};
