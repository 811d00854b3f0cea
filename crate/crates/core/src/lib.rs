//! Chudnovsky-type algorithms for `k`-fold multiplication in finite field
//! extensions, together with the tensor machinery to check them and the
//! closed-form complexity bounds of the tower construction.

pub mod bounds;
pub mod builder;
pub mod error;
pub mod ext;
pub mod field;
pub mod function_field;
pub mod linalg;
pub mod poly;
pub mod relations;
pub mod tensor;
pub mod tower;

pub use builder::{BuildOptions, Builder, Costing, KMulAlgorithm, SubMode};
pub use error::{Error, Result};
pub use ext::ExtField;
pub use field::BaseField;
pub use poly::Poly;
pub use tensor::{TensorDecomposition, Term, Verdict};
