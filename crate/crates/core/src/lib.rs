//! Numerical bounds for the first eigenvalue of the Dirac operator on
//! ellipsoids, tubes and conformally flat tori.

pub mod bounds;
pub mod conformal;
pub mod error;
pub mod geometry;
pub mod optimize;
pub mod quadrature;
pub mod spectrum;
pub mod uniformization;

pub use bounds::{BoundKind, BoundValue, TestFunctionPair};
pub use conformal::{ConformalFactorField, PeriodicGrid};
pub use error::{Error, Result};
pub use geometry::{EllipsoidParam, Lattice2, SpinStructure, TubeParam};
pub use optimize::OptimizationResult;
pub use quadrature::QuadratureResult;
pub use spectrum::SpectrumSlice;
pub use uniformization::ProfileSolution;
