// SPDX-License-Identifier: Apache-2.0

//! Exact k-step distributions, total-variation profiles and cutoff bounds
//! for the simple random walk on the Hamming scheme `H(n, q)`.
//!
//! The walk starts at `x0 = (0, ..., 0)` and moves to a uniformly chosen
//! neighbour (a word differing in exactly one coordinate). Everything is
//! computed on the `n + 1` distance classes around `x0`:
//!
//! - [`oracle`] powers the radial birth-death chain exactly and enumerates
//!   the full graph for tiny schemes;
//! - [`spectral`] inverts the spherical transform, using the
//!   [`krawtchouk`] spherical functions;
//! - [`bounds`] evaluates every majorant and minorant and checks them
//!   against exact distances;
//! - [`montecarlo`] samples walks as an independent stochastic check.
//!
//! ```
//! use hamming_cutoff::{oracle, scheme::{make_scheme, RadialDistribution}};
//! use num_rational::BigRational;
//!
//! let params = make_scheme(2, 3).unwrap();
//! let two_steps = oracle::kstep_oracle(&params, 2).unwrap();
//! let pi = RadialDistribution::<BigRational>::uniform(params);
//! let tv = two_steps.tv_distance(&pi).unwrap();
//! assert_eq!(tv, BigRational::new(7.into(), 36.into()));
//! ```

// `!(x >= 0.0)` is how NaN gets rejected along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod format;
pub mod krawtchouk;
pub mod montecarlo;
pub mod oracle;
pub mod par;
pub mod profile;
pub mod scalar;
pub mod scheme;
pub mod spectral;

pub use error::{Error, Result};
pub use num_rational::BigRational;
pub use par::Exec;
pub use scalar::{Backend, Scalar};
pub use scheme::{make_scheme, RadialDistribution, SchemeParams};
