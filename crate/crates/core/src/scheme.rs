// SPDX-License-Identifier: Apache-2.0

//! Hamming-scheme parameters and radial (distance-class) distributions.
//!
//! A distribution that is invariant under the stabilizer of the base point
//! `x0 = (0, ..., 0)` is constant on each distance class
//! `{x : d(x0, x) = l}`, so it is stored as `n + 1` class masses instead of
//! `q^n` point probabilities. The per-point value at distance `l` is
//! `mass[l] / w[l]` with `w[l] = (q-1)^l C(n, l)`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Backend, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeParams {
    n: u32,
    q: u32,
}

impl SchemeParams {
    pub fn new(n: u32, q: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::ParameterDomain(format!("n must be >= 1, got {n}")));
        }
        if q < 2 {
            return Err(Error::ParameterDomain(format!("q must be >= 2, got {q}")));
        }
        Ok(SchemeParams { n, q })
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// The walk is ergodic exactly when `q >= 3`; `H(n, 2)` is bipartite.
    pub fn is_ergodic(&self) -> bool {
        self.q >= 3
    }

    /// Number of neighbours of every vertex, `n(q-1)`.
    #[inline]
    pub fn degree(&self) -> u64 {
        u64::from(self.n) * u64::from(self.q - 1)
    }

    /// Number of distance classes, `n + 1`.
    #[inline]
    pub fn classes(&self) -> usize {
        self.n as usize + 1
    }

    /// `q^n` if it fits in a `u128`.
    pub fn vertex_count(&self) -> Option<u128> {
        u128::from(self.q).checked_pow(self.n)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index > self.n as usize {
            Err(Error::IndexOutOfRange {
                index,
                max: self.n as usize,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.n, self.q)
    }
}

pub fn make_scheme(n: u32, q: u32) -> Result<SchemeParams> {
    SchemeParams::new(n, q)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Sizes of the distance classes around the base point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassWeights {
    pub weights: Vec<BigInt>,
    pub total: BigInt,
}

impl ClassWeights {
    pub fn get(&self, l: usize) -> &BigInt {
        &self.weights[l]
    }

    /// `w[l] / q^n` in the requested backend.
    pub fn fraction<T: Scalar>(&self, l: usize) -> T {
        T::from_ratio(&self.weights[l], &self.total)
    }
}

pub fn class_weights(params: &SchemeParams) -> ClassWeights {
    let n = u64::from(params.n);
    let qm1 = BigInt::from(params.q - 1);
    let mut weights = Vec::with_capacity(params.classes());
    let mut binom = BigInt::one();
    let mut pow = BigInt::one();
    for l in 0..=n {
        weights.push(&binom * &pow);
        // C(n, l+1) = C(n, l) (n - l) / (l + 1)
        binom = binom * (n - l) / (l + 1);
        pow *= &qm1;
    }
    let total = BigInt::from(params.q).pow(params.n);
    ClassWeights { weights, total }
}

/// A probability distribution on `H(n, q)` that is constant on distance classes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDistribution<T> {
    params: SchemeParams,
    mass: Vec<T>,
}

/// Float masses may drift from 1 by at most this much.
pub const FLOAT_NORMALIZATION_TOL: f64 = 1e-12;

impl<T: Scalar> RadialDistribution<T> {
    /// Builds a distribution from class masses, checking length, sign and normalization.
    pub fn from_masses(params: SchemeParams, mass: Vec<T>) -> Result<Self> {
        if mass.len() != params.classes() {
            return Err(Error::InvalidDistribution(format!(
                "expected {} class masses, got {}",
                params.classes(),
                mass.len()
            )));
        }
        if let Some(l) = mass.iter().position(|m| m.is_negative_val()) {
            return Err(Error::InvalidDistribution(format!(
                "negative mass in class {l}"
            )));
        }
        let total = T::sum_all(mass.iter().cloned());
        let ok = match T::BACKEND {
            Backend::Exact => total == T::one(),
            Backend::Float => (total.to_f64() - 1.0).abs() <= FLOAT_NORMALIZATION_TOL,
        };
        if !ok {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {:?}, not 1",
                total.to_f64()
            )));
        }
        Ok(RadialDistribution { params, mass })
    }

    pub(crate) fn from_masses_unchecked(params: SchemeParams, mass: Vec<T>) -> Self {
        debug_assert_eq!(mass.len(), params.classes());
        RadialDistribution { params, mass }
    }

    /// The stationary (uniform) distribution: `mass[l] = w[l] / q^n`.
    pub fn uniform(params: SchemeParams) -> Self {
        let w = class_weights(&params);
        Self::uniform_with(params, &w)
    }

    pub fn uniform_with(params: SchemeParams, weights: &ClassWeights) -> Self {
        let mass = (0..params.classes()).map(|l| weights.fraction(l)).collect();
        RadialDistribution { params, mass }
    }

    /// All mass on the base point: the walk at time zero.
    pub fn point_mass(params: SchemeParams) -> Self {
        let mut mass = vec![T::zero(); params.classes()];
        mass[0] = T::one();
        RadialDistribution { params, mass }
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn into_mass(self) -> Vec<T> {
        self.mass
    }

    pub fn backend(&self) -> Backend {
        T::BACKEND
    }

    /// Probability of a single vertex at distance `l`.
    pub fn per_point(&self, l: usize, weights: &ClassWeights) -> Result<T> {
        self.params.check_index(l)?;
        Ok(self.mass[l].clone() / T::from_ratio(&weights.weights[l], &BigInt::one()))
    }

    pub fn total_mass(&self) -> T {
        T::sum_all(self.mass.iter().cloned())
    }

    /// Total-variation distance, `(1/2) sum_l |a[l] - b[l]|`.
    pub fn tv_distance(&self, other: &Self) -> Result<T> {
        tv_distance(self, other)
    }

    pub fn to_f64(&self) -> RadialDistribution<f64> {
        RadialDistribution {
            params: self.params,
            mass: self.mass.iter().map(Scalar::to_f64).collect(),
        }
    }
}

impl RadialDistribution<BigRational> {
    /// Exact masses rendered in the float backend.
    pub fn to_float(&self) -> RadialDistribution<f64> {
        self.to_f64()
    }
}

/// Total-variation distance between two radial distributions.
///
/// The per-point differences are constant on each class, so the half-L1
/// sum over all `q^n` points collapses to a sum over class masses.
pub fn tv_distance<T: Scalar>(a: &RadialDistribution<T>, b: &RadialDistribution<T>) -> Result<T> {
    if a.params != b.params {
        return Err(Error::ParamsMismatch(
            a.params.to_string(),
            b.params.to_string(),
        ));
    }
    let l1 = T::sum_all(
        a.mass
            .iter()
            .zip(&b.mass)
            .map(|(x, y)| (x.clone() - y.clone()).abs_val()),
    );
    Ok(l1 / T::from_int(2))
}

/// `sum_l mass[l] f(l)` for a radial function `f`.
pub fn expectation<T: Scalar>(dist: &RadialDistribution<T>, values: &[T]) -> T {
    T::sum_all(
        dist.mass
            .iter()
            .zip(values)
            .map(|(m, v)| m.clone() * v.clone()),
    )
}
