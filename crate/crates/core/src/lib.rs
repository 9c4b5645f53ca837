//! Numerical verification of nodal-domain bounds for Sturm-Liouville problems,
//! Slater determinants, and mixed eigenvalue problems on the equilateral rhombus.

pub mod linalg;
pub mod sl1d;
pub mod gelfand;
pub mod geometry;
pub mod spectrum;
pub mod triangle;
pub mod fem;
pub mod nodal;
