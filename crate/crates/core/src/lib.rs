//! Minimal spanning trees over finite samples of metric and quasi-metric
//! spaces, their alpha-energies, and box/MST dimension estimates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cloud;
pub mod dimension;
pub mod energy;
pub mod error;
pub mod fit;
pub mod generators;
pub mod lemma_checks;
pub mod metric;
pub mod mst;
pub mod record;
pub mod sweep;

pub use cloud::PointCloud;
pub use dimension::{
    box_dimension, greedy_packing, mst_dimension, BoxWindow, DimensionEstimate, EpsSchedule,
    MstDimensionConfig,
};
pub use energy::{energy, EnergyReport};
pub use error::{Error, Result};
pub use generators::{builtin_shape, Shape};
pub use lemma_checks::CheckReport;
pub use metric::Metric;
pub use mst::{build_mst_kruskal, build_mst_prim, Builder, Edge, SpanningTree};
