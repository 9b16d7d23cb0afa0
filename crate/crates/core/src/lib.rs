//! Persistent homology of point clouds and kernel density estimates,
//! persistence landscapes and silhouettes, and persistence flamelets:
//! landscapes stacked along a scale parameter such as a KDE bandwidth or time.
//!
//! Every numeric routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, with `*32` variants for
//! single precision.
//!
//! ```
//! use flamelets_core::{compute_persistence, rips_filtration, PointCloud};
//!
//! let square = PointCloud::from_rows([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
//! let complex = rips_filtration(&square, 2, 2.0).unwrap();
//! let diagrams = compute_persistence(&complex, &[1]).unwrap();
//! let loop_pair = diagrams[&1].significant().next().unwrap();
//! assert_eq!(loop_pair.birth, 1.0);
//! ```

// `!(a < b)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagram_metrics;
pub mod dynamic;
pub mod error;
pub mod filtration;
pub mod fixtures;
pub mod flamelets;
pub mod geometry;
pub mod io;
pub mod kde;
pub mod landscape;
pub mod persistence;
pub mod scalar;

pub use diagram_metrics::{bottleneck, bottleneck_bruteforce, integrated_bottleneck};
pub use error::{Result, TopoError};
pub use filtration::{
    rips_filtration, sublevel_grid_filtration, superlevel_grid_filtration, Convention,
};
pub use flamelets::{
    build_flamelet, flamelet_norm, integrated_landscape_distance, mean_flamelet, projection_matrix,
    select_bandwidth_ta, select_bandwidth_ta_with, variance_flamelet, SelectionCriterion,
};
pub use geometry::{hausdorff, integrated_hausdorff, pairwise_distances, Metric};
pub use kde::{bandwidth_sweep, kde_evaluate, silverman_classic, silverman_extended, Spacing};
pub use landscape::{landscape, landscape_distance, landscape_norm, silhouette, triangle};
pub use persistence::{betti_oracle, compute_persistence};
pub use scalar::Scalar;

pub type PointCloud<T = f64> = geometry::PointCloud<T>;
pub type DynamicPointCloud<T = f64> = geometry::DynamicPointCloud<T>;
pub type Simplex<T = f64> = filtration::Simplex<T>;
pub type FilteredComplex<T = f64> = filtration::FilteredComplex<T>;
pub type GridFunction<T = f64> = filtration::GridFunction<T>;
pub type PersistencePair<T = f64> = persistence::PersistencePair<T>;
pub type PersistenceDiagram<T = f64> = persistence::PersistenceDiagram<T>;
pub type Vineyard<T = f64> = diagram_metrics::Vineyard<T>;
pub type YGrid<T = f64> = landscape::YGrid<T>;
pub type Landscape<T = f64> = landscape::Landscape<T>;
pub type SigmaGrid<T = f64> = flamelets::SigmaGrid<T>;
pub type Flamelet<T = f64> = flamelets::Flamelet<T>;
pub type KdeModel<T = f64> = kde::KdeModel<T>;
pub type BandwidthRange<T = f64> = kde::BandwidthRange<T>;

pub type PointCloud32 = geometry::PointCloud<f32>;
pub type PersistenceDiagram32 = persistence::PersistenceDiagram<f32>;
pub type Landscape32 = landscape::Landscape<f32>;
pub type Flamelet32 = flamelets::Flamelet<f32>;
