// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// `n` or `q` outside the domain of the scheme, or a bound parameter out of range.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("distributions belong to different schemes: H({0}) vs H({1})")]
    ParamsMismatch(String, String),

    /// A configurable resource cap (table size, state space, bit growth, step draws) was hit.
    #[error("{what} exceeds budget: {requested} > {limit}")]
    ResourceCap {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    /// The requested bound has no theorem behind it for these parameters.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

impl Error {
    pub fn is_resource_cap(&self) -> bool {
        matches!(self, Error::ResourceCap { .. })
    }
}
