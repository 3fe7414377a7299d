//! Discrete scattering theory for p-forms on manifolds with cylindrical
//! ends: Hodge-theoretic zero-energy scattering matrices, scattering
//! lengths from cylinder-attachment extrapolation, a semi-analytic
//! transfer-matrix oracle, and geometric bounds.

pub mod bounds;
pub mod complex;
pub mod dec;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod hodge;
pub mod les;
pub mod modes;
pub mod scatlen;
pub mod homology;
pub mod sparse;

pub use complex::cylinder::attach_cylinder;
pub use complex::generators::{generate_model, ModelReport, ModelSpec};
pub use complex::{CellComplex, Cochain, CollarInfo, CylinderSpec};
pub use error::{Error, ErrorClass, Result};
