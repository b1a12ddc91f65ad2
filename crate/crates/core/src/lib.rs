//! Lossless linear analog compression, numerically.
//!
//! A random vector `x ∈ ℝ^m` concentrated on a low-dimensional set can be
//! recovered with zero error from `n` linear measurements `Ax` once `n`
//! exceeds the set's dimension. This crate provides the pieces needed to
//! observe that on a desk: example sets and structured signals ([`setgen`]),
//! covering-number and Hausdorff-type dimension estimators ([`fracdim`]),
//! Gaussian measurement operators with kernel and null-space diagnostics
//! ([`measureop`]), concrete decoders ([`decode`]) and a seeded experiment
//! harness ([`harness`]).
//!
//! ```
//! use alc::{apply, embed, gen_sparse, l0_decode, sample_matrix, DecodeStatus};
//!
//! let a = sample_matrix(3, 10, 7).unwrap();
//! let x = embed(&gen_sparse(10, 2, 1).unwrap().into());
//! let out = l0_decode(&a, &apply(&a, &x).unwrap(), 2, 1e-9).unwrap();
//! assert_eq!(out.status, DecodeStatus::Unique);
//! ```

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decode;
pub mod error;
pub mod fracdim;
pub mod harness;
pub mod measureop;
pub mod rng;
pub mod setgen;
pub mod special;

mod linalg;

pub use decode::*;
pub use error::{AlcError, Result};
pub use fracdim::*;
pub use measureop::*;
pub use rng::{mix, SeedStream};
pub use setgen::*;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/dimension.md")]
    mod dimension {}
    #[doc = include_str!("../../../book/src/measurement.md")]
    mod measurement {}
    #[doc = include_str!("../../../book/src/sparse.md")]
    mod sparse {}
    #[doc = include_str!("../../../book/src/kronecker.md")]
    mod kronecker {}
    #[doc = include_str!("../../../book/src/interleaving.md")]
    mod interleaving {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
