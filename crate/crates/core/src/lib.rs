//! Graph-aware dimensionality reduction: PCA and its dual, kernel PCA with
//! graph regularization, multiple-kernel learning over graphs, and local
//! (non)linear embeddings.
//!
//! Data matrices are `D×N` with one sample per column. Embeddings are `d×N`.

// `!(x >= 0.0)` style checks reject NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datasets;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod graphs;
pub mod kernels;
pub mod linalg;
pub mod lneg;
pub mod par;
pub mod spectral;

pub use error::{Error, Result};
