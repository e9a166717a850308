//! Coresets, spanning sets and sketches for robust low-rank approximation,
//! regression and clustering.

// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::needless_range_loop)]

pub mod active;
pub mod clustering;
pub mod coreset;
pub mod css;
pub mod ellipsoid;
pub mod error;
pub mod instances;
pub mod io;
pub mod lewis;
pub mod linalg;
pub mod loss;
pub mod matrix;
pub mod norm;
pub mod online_subspace;
pub mod oracles;
pub mod regression;
pub mod rng;
pub mod sketch;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use rng::SeededRng;
