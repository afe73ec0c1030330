//! Exact polynomial algebra for additive group actions on the affine plane.

pub mod auto;
pub mod error;
pub mod field;
pub mod gaction;
pub mod gen;
pub mod json;
pub mod linalg;
pub mod parse;
pub mod poly;
pub mod rentschler;

pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec};
pub use poly::{Poly2, PolyT, PolyTU, UniPoly, Var};
