//! Simulation and Monte Carlo verification of infinitely divisible processes
//! built from representations of their Lévy measures.
//!
//! Deterministic numerics (measure algebra, quadrature, dense linear algebra,
//! band local times) are generic over [`Scalar`]; samplers and Monte Carlo
//! estimators work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod isomorphism;
pub mod linalg;
pub mod mc;
pub mod measure;
pub mod path;
pub mod prm;
pub mod quadrature;
pub mod report;
pub mod representations;
pub mod rng;
pub mod scalar;
pub mod series;
pub mod stats;

pub use error::{Error, Result};
pub use path::SamplePath;
pub use prm::{LevyRepresentation, PointConfiguration, Window};
pub use report::IdentityReport;
pub use rng::{SimRng, StreamFamily};
pub use scalar::Scalar;

pub type AtomicMeasureF64 = measure::AtomicMeasure<f64>;
pub type AtomicMeasureF32 = measure::AtomicMeasure<f32>;
pub type FiniteLevyStructureF64 = measure::FiniteLevyStructure<f64>;
pub type FiniteLevyStructureF32 = measure::FiniteLevyStructure<f32>;
pub type MatrixF64 = linalg::Matrix<f64>;
pub type MatrixF32 = linalg::Matrix<f32>;
