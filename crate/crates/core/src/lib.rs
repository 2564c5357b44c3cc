//! Computational toolkit for Finsler metric measure spaces.
//!
//! The crate evaluates the pointwise tensors of a Finsler metric (fundamental
//! and Cartan tensors, spray and Chern connection, curvatures, the measure
//! couplings), integrates spray geodesics, solves the nonlinear Allen-Cahn
//! equation on uniform lattices by energy-descent gradient flow, and checks
//! the gradient-estimate bounds and the Liouville property on the solved
//! fields.

pub mod chart;
pub mod curvature;
pub mod error;
pub mod estimator;
pub mod geodesic;
pub mod grid;
pub mod invariants;
pub mod linalg;
pub mod measure;
pub mod metric;
pub mod optim;
pub mod sampling;
pub mod solver;
pub mod stencil;

mod connection;

pub use chart::{ChartDomain, Topology};
pub use connection::ConnectionData;
pub use error::{FinslerError, Result};
pub use metric::{
    mixed_angular_metric, CovectorField, DerivativeMode, FundamentalData, MatrixField,
    MatrixPreset, MetricFamily, MetricSpec, TangentPoint,
};

pub use connection::{connection_data, spray};
