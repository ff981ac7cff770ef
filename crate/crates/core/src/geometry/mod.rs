//! Convex sets, their grid samples, and metric quantities on point clouds.

mod cloud;
mod grid;
mod kuratowski;
mod metric;
mod operator;
mod set;

use thiserror::Error;

pub use cloud::{format_sig17, write_row, PointCloud};
pub use grid::{sample_grid, sample_lattice, LatticeSample, DEFAULT_GRID_CAP, GRID_MEMBERSHIP_TOL};
pub use kuratowski::{farthest_point_cover, kuratowski_estimate, FarthestPointCover};
pub use metric::{diameter, diameter_of, directed_distance, distance, hausdorff, point_to_cloud, squared_distance};
pub use operator::LinearOperatorSpec;
pub use set::{BoxBounds, ConvexSetSpec, Halfspace, Shape, HALFSPACE_MAX_ITERATIONS, HALFSPACE_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("set is unbounded and has no sampling window")]
    Unbounded,
    #[error("grid would hold {points} points, over the cap of {cap}")]
    BudgetExceeded { points: f64, cap: usize },
    #[error("grid resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("cover budget must be at least 1")]
    InvalidBudget,
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("not supported: {0}")]
    NotSupported(String),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<(), GeometryError> {
    if expected == got {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, got })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
