//! Numerical verification of Yang-Baxter type identities for quantum affine
//! algebras: q-special functions, tensor-power embeddings, exact Cartan data,
//! evaluation representations, R-matrices and gauge transformations.

pub mod error;
pub mod qspecial;
pub mod tensor;
pub mod cartan;
pub mod evalrep;
pub mod rmat;
pub mod gauge;
pub mod sampling;
pub mod report;
pub mod suites;
pub mod converge;

pub use error::{Error, Result};
