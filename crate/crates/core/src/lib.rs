//! Topological features of market point clouds for index-direction classification.
//!
//! Pipeline: market data ([`data`]) → point clouds ([`pointcloud`]) →
//! persistence diagrams ([`persistence`]) → feature vectors ([`features`]) →
//! classifiers ([`models`]) → walk-forward evaluation ([`backtest`]).
//!
//! The geometric and topological stages are generic over [`Scalar`]
//! (`f32`/`f64`); the aliases below fix the scalar for the common cases.

pub mod error;
pub mod scalar;

pub mod data;
pub mod linalg;
pub mod pointcloud;
pub mod persistence;
pub mod features;
pub mod models;
pub mod backtest;

pub mod config;
pub mod pipeline;
pub mod synthetic;

pub use config::PipelineConfig;
pub use error::{Error, ErrorClass, Result};
pub use scalar::Scalar;

pub type PointCloud = pointcloud::PointCloud<f64>;
pub type PointCloudF32 = pointcloud::PointCloud<f32>;
pub type FilteredComplex = persistence::FilteredComplex<f64>;
pub type FilteredComplexF32 = persistence::FilteredComplex<f32>;
pub type PersistenceDiagram = persistence::PersistenceDiagram<f64>;
pub type PersistenceDiagramF32 = persistence::PersistenceDiagram<f32>;
pub type BarcodeSet = features::BarcodeSet<f64>;
pub type TopoFeatureVector = features::TopoFeatureVector<f64>;
pub type SquareMatrix = linalg::SquareMatrix<f64>;
