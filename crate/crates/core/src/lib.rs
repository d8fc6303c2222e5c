//! Numerical workbench for immersed surfaces in Euclidean space whose second
//! fundamental form decays at least like the reciprocal of intrinsic distance.
//!
//! The core is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! `f64`, which every report and acceptance check uses.

// `!(x > 0)` is the NaN-rejecting form used throughout for input checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod comparison;
pub mod discretize;
pub mod error;
pub mod extrinsic;
pub mod integrals;
pub mod report;
pub mod scalar;
pub mod surface;
pub mod tone;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Immersion = surface::ParametricImmersion<f64>;
pub type Geometry = surface::PointGeometry<f64>;
pub type Mesh = discretize::SampledSurface<f64>;
pub type Profile = comparison::ComparisonProfile<f64>;
pub type Eigenprofile = comparison::RadialEigenfunction<f64>;
pub type Growth = extrinsic::GrowthCurve<f64>;
pub type Tamedness = extrinsic::TamednessReport<f64>;
pub type Trajectory = extrinsic::FlowTrajectory<f64>;
pub type Annulus = integrals::AnnulusReport<f64>;
pub type ChernOsserman = integrals::ChernOssermanReport<f64>;
pub type SpectralEstimate = tone::SpectralEstimate<f64>;
