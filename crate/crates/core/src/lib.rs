//! Simplicial Lagrange finite elements of arbitrary dimension and degree.
//!
//! The crate builds the three ingredients of a finite element (geometry,
//! polynomial space, degrees of freedom), certifies unisolvence with exact
//! or floating-point linear algebra, transports elements by affine maps,
//! and runs a small Poisson solver on structured meshes.

pub mod element;
pub mod error;
pub mod fem;
pub mod geom;
pub mod linalg;
pub mod mindex;
pub mod poly;
pub mod scalar;

pub use error::{Error, Result};
pub use geom::{AffineMap, Point, VertexFamily};
pub use mindex::{MultiIndex, MultiIndexTable};
pub use poly::Poly;
pub use scalar::{Rational, Scalar};
