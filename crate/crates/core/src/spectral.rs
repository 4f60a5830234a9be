// SPDX-License-Identifier: Apache-2.0

//! Spectrum of the walk and k-step distributions by spherical inversion.
//!
//! The one-step transform on the `j`-th spherical function is
//! `lambda_j = 1 - jq/(n(q-1))` with multiplicity `d_j = (q-1)^j C(n,j)`.
//! Transforms multiply under convolution, so after `k` steps the class
//! masses are
//!
//! ```text
//! mass[l] = (w[l] / q^n) * sum_j d_j lambda_j^k phi_j(l)
//! ```
//!
//! This module also hosts the moment identities for `phi_1` and `phi_2`
//! used by the lower-bound argument.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::krawtchouk::{build_table, phi_hypergeometric, KrawtchoukTable, DEFAULT_TABLE_BUDGET};
use crate::scalar::{ratio, Backend, Scalar};
use crate::scheme::{class_weights, expectation, ClassWeights, RadialDistribution, SchemeParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub params: SchemeParams,
    pub lambda: Vec<BigRational>,
    pub mult: Vec<BigInt>,
}

impl SpectrumTable {
    pub fn lambda_f64(&self) -> Vec<f64> {
        self.lambda.iter().map(Scalar::to_f64).collect()
    }

    pub fn lambda_as<T: Scalar>(&self) -> Vec<T> {
        self.lambda.iter().map(T::from_exact).collect()
    }
}

/// `lambda_j = (n(q-1) - jq) / (n(q-1))` as an exact fraction.
pub fn eigenvalue(params: &SchemeParams, j: usize) -> BigRational {
    let deg = params.degree() as i64;
    ratio(deg - j as i64 * i64::from(params.q()), deg)
}

pub fn spectrum(params: &SchemeParams) -> SpectrumTable {
    let lambda = (0..params.classes())
        .map(|j| eigenvalue(params, j))
        .collect();
    // d_j = (q-1)^j C(n, j), the same numbers as the class sizes
    let mult = class_weights(params).weights;
    SpectrumTable {
        params: *params,
        lambda,
        mult,
    }
}

/// A k-step distribution together with the float mass clamped away.
#[derive(Debug, Clone, PartialEq)]
pub struct KStep<T> {
    pub dist: RadialDistribution<T>,
    /// Sum of the negative round-off values set to zero; always 0 in the exact backend.
    pub clamped: f64,
}

/// Reusable spectral-inversion state for one scheme and backend.
#[derive(Debug, Clone)]
pub struct SpectralEngine<T> {
    params: SchemeParams,
    table: KrawtchoukTable<T>,
    lambda: Vec<T>,
    // coeff[l * classes + j] = w[l] d_j / q^n
    coeff: Vec<T>,
}

impl<T: Scalar> SpectralEngine<T> {
    pub fn new(params: &SchemeParams) -> Result<Self> {
        let table = build_table::<T>(params, DEFAULT_TABLE_BUDGET)?;
        Ok(Self::with_table(table))
    }

    pub fn with_table(table: KrawtchoukTable<T>) -> Self {
        let params = *table.params();
        let w = class_weights(&params);
        let spec = spectrum(&params);
        let c = params.classes();
        let mut coeff = Vec::with_capacity(c * c);
        for l in 0..c {
            for j in 0..c {
                coeff.push(T::from_ratio(&(&w.weights[l] * &spec.mult[j]), &w.total));
            }
        }
        SpectralEngine {
            params,
            table,
            lambda: spec.lambda_as(),
            coeff,
        }
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn table(&self) -> &KrawtchoukTable<T> {
        &self.table
    }

    /// Class masses after `k` steps from the base point.
    ///
    /// Terms are accumulated from `j = n` down to `j = 0`. In the float
    /// backend any negative round-off is clamped to zero and reported.
    pub fn kstep(&self, k: u64) -> KStep<T> {
        let c = self.params.classes();
        let powers: Vec<T> = self.lambda.iter().map(|lam| lam.powu(k)).collect();
        let mut clamped = 0.0;
        let mass = (0..c)
            .map(|l| {
                let v = T::sum_all((0..c).rev().map(|j| {
                    self.coeff[l * c + j].clone() * powers[j].clone() * self.table.get(j, l).clone()
                }));
                if T::BACKEND == Backend::Float && v.is_negative_val() {
                    clamped += -v.to_f64();
                    T::zero()
                } else {
                    v
                }
            })
            .collect();
        KStep {
            dist: RadialDistribution::from_masses_unchecked(self.params, mass),
            clamped,
        }
    }
}

/// k-step distribution by spherical inversion in the requested backend.
pub fn kstep_distribution<T: Scalar>(
    params: &SchemeParams,
    k: u64,
) -> Result<RadialDistribution<T>> {
    Ok(SpectralEngine::<T>::new(params)?.kstep(k).dist)
}

/// `E_{nu^{*k}}(phi_j) = lambda_j^k`.
pub fn expectation_phi<T: Scalar>(params: &SchemeParams, j: usize, k: u64) -> Result<T> {
    params.check_index(j)?;
    Ok(T::from_exact(&eigenvalue(params, j)).powu(k))
}

/// `E_dist(phi_j)` summed class by class; the independent side of [`expectation_phi`].
pub fn expectation_phi_from_distribution<T: Scalar>(
    dist: &RadialDistribution<T>,
    table: &KrawtchoukTable<T>,
    j: usize,
) -> Result<T> {
    dist.params().check_index(j)?;
    Ok(expectation(dist, table.row(j)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryMoments {
    /// `E_pi(phi_j)` for every `j`.
    pub mean_phi: Vec<BigRational>,
    /// `Var_pi(phi_1)`.
    pub var_phi1: BigRational,
}

/// Moments of the spherical functions under the uniform distribution,
/// computed as explicit weighted sums over classes.
pub fn stationary_moments(params: &SchemeParams) -> Result<StationaryMoments> {
    let table = build_table::<BigRational>(params, DEFAULT_TABLE_BUDGET)?;
    let w = class_weights(params);
    Ok(stationary_moments_with(&table, &w))
}

fn stationary_moments_with(
    table: &KrawtchoukTable<BigRational>,
    w: &ClassWeights,
) -> StationaryMoments {
    let params = table.params();
    let pi = RadialDistribution::<BigRational>::uniform_with(*params, w);
    let mean_phi: Vec<BigRational> = table.rows().map(|row| expectation(&pi, row)).collect();
    let mean1 = mean_phi[1].clone();
    let squares: Vec<BigRational> = table.row(1).iter().map(|v| v * v).collect();
    let var_phi1 = expectation(&pi, &squares) - &mean1 * &mean1;
    StationaryMoments { mean_phi, var_phi1 }
}

/// Coefficients `(a0, a1, a2)` with `phi_1^2 = a0 phi_0 + a1 phi_1 + a2 phi_2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Linearization {
    pub a0: BigRational,
    pub a1: BigRational,
    pub a2: BigRational,
}

pub fn linearization_phi1_squared(params: &SchemeParams) -> Result<Linearization> {
    if params.n() < 2 {
        return Err(Error::ParameterDomain(
            "phi_2 does not exist for n = 1".to_string(),
        ));
    }
    let n = i64::from(params.n());
    let qm1 = i64::from(params.q()) - 1;
    Ok(Linearization {
        a0: ratio(1, n * qm1),
        a1: ratio(qm1 - 1, n * qm1),
        a2: ratio(n - 1, n),
    })
}

/// Checks the linearization pointwise at every class, exactly.
pub fn linearization_holds(params: &SchemeParams) -> Result<bool> {
    let lin = linearization_phi1_squared(params)?;
    for l in 0..params.classes() {
        let p1: BigRational = phi_hypergeometric(params, 1, l)?;
        let p2: BigRational = phi_hypergeometric(params, 2, l)?;
        let rhs = &lin.a0 + &lin.a1 * &p1 + &lin.a2 * &p2;
        if &p1 * &p1 != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub value: BigRational,
    /// `1/n`.
    pub bound: BigRational,
    /// Whether `(n-2)(q-1) >= 2`, i.e. the bound is guaranteed.
    pub applies: bool,
    pub bound_holds: bool,
}

/// `Var_{nu^{*k}}(phi_1)` from the linearization:
/// `a0 + a1 lambda_1^k + a2 lambda_2^k - lambda_1^{2k}`.
///
/// For `n = 1` the `phi_2` coefficient `(n-1)/n` vanishes and the
/// expansion is used without it.
pub fn variance_phi1_kstep(params: &SchemeParams, k: u64) -> VarianceReport {
    let n = i64::from(params.n());
    let qm1 = i64::from(params.q()) - 1;
    let lam1 = eigenvalue(params, 1).powu(k);
    let mut value = ratio(1, n * qm1) + ratio(qm1 - 1, n * qm1) * &lam1 - &lam1 * &lam1;
    if n >= 2 {
        value += ratio(n - 1, n) * eigenvalue(params, 2).powu(k);
    }
    let bound = ratio(1, n);
    let bound_holds = value <= bound;
    VarianceReport {
        value,
        bound,
        applies: (n - 2) * qm1 >= 2,
        bound_holds,
    }
}

/// `E(phi_1^2) - E(phi_1)^2` evaluated directly on a distribution.
pub fn variance_phi1_direct<T: Scalar>(
    dist: &RadialDistribution<T>,
    table: &KrawtchoukTable<T>,
) -> T {
    let row = table.row(1);
    let squares: Vec<T> = row.iter().map(|v| v.clone() * v.clone()).collect();
    let mean = expectation(dist, row);
    expectation(dist, &squares) - mean.clone() * mean
}
