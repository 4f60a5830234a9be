// SPDX-License-Identifier: Apache-2.0

//! Ground truth: the walk projected onto distance classes.
//!
//! From a vertex at distance `l` from the base point, `l` neighbours are at
//! distance `l - 1`, `l(q-2)` stay at distance `l` and `(n-l)(q-1)` are at
//! `l + 1`. Each neighbour is chosen with probability `1/(n(q-1))`, which
//! gives a tridiagonal birth-death chain on `0..=n`.
//!
//! The exact engine keeps integer path counts over the common denominator
//! `(n(q-1))^k`, so no gcd work is done per step.

mod enumerate;

pub use enumerate::{enumerate_tiny, enumerate_tiny_trajectory, DEFAULT_STATE_BUDGET};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{ratio, Backend, Scalar};
use crate::scheme::{ClassWeights, RadialDistribution, SchemeParams};

/// Default cap on the total number of bits held by an exact trajectory.
pub const DEFAULT_BIT_CAP: u64 = 1_000_000;

/// Transition probabilities of the radial chain, indexed by the current class.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMatrix {
    pub params: SchemeParams,
    pub down: Vec<BigRational>,
    pub stay: Vec<BigRational>,
    pub up: Vec<BigRational>,
}

impl RadialMatrix {
    pub fn rows_sum_to_one(&self) -> bool {
        (0..self.params.classes()).all(|l| (&self.down[l] + &self.stay[l] + &self.up[l]).is_one())
    }
}

pub fn radial_matrix(params: &SchemeParams) -> RadialMatrix {
    let n = i64::from(params.n());
    let q = i64::from(params.q());
    let deg = params.degree() as i64;
    let mut down = Vec::with_capacity(params.classes());
    let mut stay = Vec::with_capacity(params.classes());
    let mut up = Vec::with_capacity(params.classes());
    for l in 0..=n {
        down.push(ratio(l, deg));
        stay.push(ratio(l * (q - 2), deg));
        up.push(ratio(n - l, n));
    }
    RadialMatrix {
        params: *params,
        down,
        stay,
        up,
    }
}

/// One step of the radial chain:
/// `mass'[l] = mass[l-1] up[l-1] + mass[l] stay[l] + mass[l+1] down[l+1]`.
pub fn power_step<T: Scalar>(
    dist: &RadialDistribution<T>,
    m: &RadialMatrix,
) -> Result<RadialDistribution<T>> {
    if dist.params() != &m.params {
        return Err(Error::ParamsMismatch(
            dist.params().to_string(),
            m.params.to_string(),
        ));
    }
    let c = m.params.classes();
    let mass = dist.mass();
    let out = (0..c)
        .map(|l| {
            let mut terms = Vec::with_capacity(3);
            if l > 0 {
                terms.push(mass[l - 1].clone() * T::from_exact(&m.up[l - 1]));
            }
            terms.push(mass[l].clone() * T::from_exact(&m.stay[l]));
            if l + 1 < c {
                terms.push(mass[l + 1].clone() * T::from_exact(&m.down[l + 1]));
            }
            T::sum_all(terms)
        })
        .collect();
    Ok(RadialDistribution::from_masses_unchecked(m.params, out))
}

/// Exact radial chain carried as integer path counts.
///
/// After `k` steps, `counts[l]` is the number of length-`k` walks from the
/// base point that end in class `l`; the class mass is `counts[l] / deg^k`.
#[derive(Debug, Clone)]
pub struct ExactChain {
    params: SchemeParams,
    counts: Vec<BigInt>,
    denom: BigInt,
    steps: u64,
    bit_cap: u64,
    // per-class multiplicities of the three moves, as integers
    down: Vec<u64>,
    stay: Vec<u64>,
    up: Vec<u64>,
}

impl ExactChain {
    pub fn new(params: &SchemeParams) -> Self {
        Self::with_bit_cap(params, DEFAULT_BIT_CAP)
    }

    pub fn with_bit_cap(params: &SchemeParams, bit_cap: u64) -> Self {
        let n = u64::from(params.n());
        let q = u64::from(params.q());
        let mut counts = vec![BigInt::zero(); params.classes()];
        counts[0] = BigInt::one();
        ExactChain {
            params: *params,
            counts,
            denom: BigInt::one(),
            steps: 0,
            bit_cap,
            down: (0..=n).collect(),
            stay: (0..=n).map(|l| l * (q - 2)).collect(),
            up: (0..=n).map(|l| (n - l) * (q - 1)).collect(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn counts(&self) -> &[BigInt] {
        &self.counts
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denom
    }

    fn held_bits(&self) -> u64 {
        self.counts.iter().map(|c| c.bits()).sum::<u64>() + self.denom.bits()
    }

    pub fn step(&mut self) -> Result<()> {
        let c = self.counts.len();
        let mut next = Vec::with_capacity(c);
        for l in 0..c {
            let mut v = &self.counts[l] * self.stay[l];
            if l > 0 {
                v += &self.counts[l - 1] * self.up[l - 1];
            }
            if l + 1 < c {
                v += &self.counts[l + 1] * self.down[l + 1];
            }
            next.push(v);
        }
        self.counts = next;
        self.denom *= self.params.degree();
        self.steps += 1;
        let bits = self.held_bits();
        if bits > self.bit_cap {
            return Err(Error::ResourceCap {
                what: "exact trajectory bits",
                requested: u128::from(bits),
                limit: u128::from(self.bit_cap),
            });
        }
        Ok(())
    }

    pub fn advance_to(&mut self, k: u64) -> Result<()> {
        while self.steps < k {
            self.step()?;
        }
        Ok(())
    }

    pub fn distribution(&self) -> RadialDistribution<BigRational> {
        let mass = self
            .counts
            .iter()
            .map(|c| BigRational::new(c.clone(), self.denom.clone()))
            .collect();
        RadialDistribution::from_masses_unchecked(self.params, mass)
    }

    /// Exact TV distance to the uniform distribution:
    /// `sum_l |c_l q^n - w_l D| / (2 D q^n)`.
    pub fn tv_to_uniform(&self, weights: &ClassWeights) -> BigRational {
        let num: BigInt = self
            .counts
            .iter()
            .zip(&weights.weights)
            .map(|(c, w)| (c * &weights.total - w * &self.denom).abs())
            .sum();
        BigRational::new(num, BigInt::from(2) * &self.denom * &weights.total)
    }

    /// `2 D q^n` times the TV distance, an integer.
    pub fn scaled_l1_to_uniform(&self, weights: &ClassWeights) -> BigInt {
        self.counts
            .iter()
            .zip(&weights.weights)
            .map(|(c, w)| (c * &weights.total - w * &self.denom).abs())
            .sum()
    }
}

/// Exact distribution after `k` steps of the radial chain.
pub fn kstep_oracle(params: &SchemeParams, k: u64) -> Result<RadialDistribution<BigRational>> {
    kstep_oracle_capped(params, k, DEFAULT_BIT_CAP)
}

pub fn kstep_oracle_capped(
    params: &SchemeParams,
    k: u64,
    bit_cap: u64,
) -> Result<RadialDistribution<BigRational>> {
    let mut chain = ExactChain::with_bit_cap(params, bit_cap);
    chain.advance_to(k)?;
    Ok(chain.distribution())
}

/// Row 0 of `R^k` by repeated squaring of the dense exact matrix.
///
/// Entries densify under squaring, so this only pays off for large `k`
/// with small `n`.
pub fn kstep_oracle_squaring(params: &SchemeParams, k: u64) -> RadialDistribution<BigRational> {
    let m = radial_matrix(params);
    let c = params.classes();
    let mut base = vec![vec![BigRational::zero(); c]; c];
    for l in 0..c {
        base[l][l] = m.stay[l].clone();
        if l > 0 {
            base[l][l - 1] = m.down[l].clone();
        }
        if l + 1 < c {
            base[l][l + 1] = m.up[l].clone();
        }
    }
    let mut row = vec![BigRational::zero(); c];
    row[0] = BigRational::one();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            row = vec_mat(&row, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mat_mat(&base, &base);
        }
    }
    RadialDistribution::from_masses_unchecked(*params, row)
}

fn vec_mat(v: &[BigRational], m: &[Vec<BigRational>]) -> Vec<BigRational> {
    let c = v.len();
    (0..c)
        .map(|j| {
            (0..c)
                .filter(|&i| !v[i].is_zero())
                .map(|i| &v[i] * &m[i][j])
                .sum()
        })
        .collect()
}

fn mat_mat(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    a.iter().map(|row| vec_mat(row, b)).collect()
}

/// Float radial chain for large `n`; every entry of the step is a convex
/// combination, so this path is stable where spectral inversion is not.
#[derive(Debug, Clone)]
pub struct FloatChain {
    params: SchemeParams,
    mass: Vec<f64>,
    scratch: Vec<f64>,
    steps: u64,
    down: Vec<f64>,
    stay: Vec<f64>,
    up: Vec<f64>,
}

impl FloatChain {
    pub fn new(params: &SchemeParams) -> Self {
        let n = params.n() as usize;
        let deg = params.degree() as f64;
        let q = f64::from(params.q());
        let mut mass = vec![0.0; n + 1];
        mass[0] = 1.0;
        FloatChain {
            params: *params,
            mass,
            scratch: vec![0.0; n + 1],
            steps: 0,
            down: (0..=n).map(|l| l as f64 / deg).collect(),
            stay: (0..=n).map(|l| l as f64 * (q - 2.0) / deg).collect(),
            up: (0..=n).map(|l| (n - l) as f64 / n as f64).collect(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn step(&mut self) {
        let c = self.mass.len();
        let m = &self.mass;
        for l in 0..c {
            let mut v = m[l] * self.stay[l];
            if l > 0 {
                v += m[l - 1] * self.up[l - 1];
            }
            if l + 1 < c {
                v += m[l + 1] * self.down[l + 1];
            }
            self.scratch[l] = v;
        }
        std::mem::swap(&mut self.mass, &mut self.scratch);
        self.steps += 1;
    }

    pub fn advance_to(&mut self, k: u64) {
        while self.steps < k {
            self.step();
        }
    }

    pub fn distribution(&self) -> RadialDistribution<f64> {
        RadialDistribution::from_masses_unchecked(self.params, self.mass.clone())
    }

    pub fn tv_to(&self, target: &[f64]) -> f64 {
        0.5 * crate::scalar::neumaier_sum(self.mass.iter().zip(target).map(|(a, b)| (a - b).abs()))
    }
}

pub fn kstep_float(params: &SchemeParams, k: u64) -> RadialDistribution<f64> {
    let mut chain = FloatChain::new(params);
    chain.advance_to(k);
    chain.distribution()
}

/// A forward-only trajectory of the radial chain on either backend, with
/// the uniform class masses kept alongside for TV evaluation.
#[derive(Debug, Clone)]
pub enum Trajectory {
    Exact {
        chain: ExactChain,
        weights: ClassWeights,
        uniform: Vec<f64>,
    },
    Float {
        chain: FloatChain,
        uniform: Vec<f64>,
    },
}

impl Trajectory {
    pub fn new(params: &SchemeParams, backend: Backend) -> Self {
        Self::with_bit_cap(params, backend, DEFAULT_BIT_CAP)
    }

    pub fn with_bit_cap(params: &SchemeParams, backend: Backend, bit_cap: u64) -> Self {
        let weights = crate::scheme::class_weights(params);
        let uniform = (0..params.classes())
            .map(|l| weights.fraction::<f64>(l))
            .collect();
        match backend {
            Backend::Exact => Trajectory::Exact {
                chain: ExactChain::with_bit_cap(params, bit_cap),
                weights,
                uniform,
            },
            Backend::Float => Trajectory::Float {
                chain: FloatChain::new(params),
                uniform,
            },
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            Trajectory::Exact { .. } => Backend::Exact,
            Trajectory::Float { .. } => Backend::Float,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            Trajectory::Exact { chain, .. } => chain.steps(),
            Trajectory::Float { chain, .. } => chain.steps(),
        }
    }

    /// Moves forward to step `k`; asking for an earlier step is an error.
    pub fn advance_to(&mut self, k: u64) -> Result<()> {
        if k < self.steps() {
            return Err(Error::ParameterDomain(format!(
                "trajectory is at step {} and cannot rewind to {k}",
                self.steps()
            )));
        }
        match self {
            Trajectory::Exact { chain, .. } => chain.advance_to(k),
            Trajectory::Float { chain, .. } => {
                chain.advance_to(k);
                Ok(())
            }
        }
    }

    pub fn tv_exact(&self) -> Option<BigRational> {
        match self {
            Trajectory::Exact { chain, weights, .. } => Some(chain.tv_to_uniform(weights)),
            Trajectory::Float { .. } => None,
        }
    }

    pub fn tv(&self) -> f64 {
        match self {
            Trajectory::Exact { chain, weights, .. } => {
                Scalar::to_f64(&chain.tv_to_uniform(weights))
            }
            Trajectory::Float { chain, uniform } => chain.tv_to(uniform),
        }
    }

    pub fn masses_f64(&self) -> Vec<f64> {
        match self {
            Trajectory::Exact { chain, .. } => chain
                .counts()
                .iter()
                .map(|c| <f64 as Scalar>::from_ratio(c, chain.denominator()))
                .collect(),
            Trajectory::Float { chain, .. } => chain.mass().to_vec(),
        }
    }

    pub fn uniform_f64(&self) -> &[f64] {
        match self {
            Trajectory::Exact { uniform, .. } | Trajectory::Float { uniform, .. } => uniform,
        }
    }
}

/// Checks detailed balance `w[l] up[l] = w[l+1] down[l+1]`, exactly.
pub fn detailed_balance_holds(m: &RadialMatrix, weights: &ClassWeights) -> bool {
    (0..m.params.n() as usize).all(|l| {
        BigRational::from_integer(weights.weights[l].clone()) * &m.up[l]
            == BigRational::from_integer(weights.weights[l + 1].clone()) * &m.down[l + 1]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{class_weights, make_scheme, tv_distance};

    #[test]
    fn matrix_examples() {
        let m = radial_matrix(&make_scheme(3, 3).unwrap());
        assert_eq!(
            (&m.down[1], &m.stay[1], &m.up[1]),
            (&ratio(1, 6), &ratio(1, 6), &ratio(2, 3))
        );
        let m = radial_matrix(&make_scheme(2, 3).unwrap());
        assert_eq!(
            (&m.down[2], &m.stay[2], &m.up[2]),
            (&ratio(1, 2), &ratio(1, 2), &ratio(0, 1))
        );
        let m = radial_matrix(&make_scheme(6, 2).unwrap());
        assert!(m.stay.iter().all(Zero::is_zero));
    }

    #[test]
    fn matrix_invariants() {
        for n in 1..=20 {
            for q in 2..=7 {
                let p = make_scheme(n, q).unwrap();
                let m = radial_matrix(&p);
                assert!(m.rows_sum_to_one());
                assert!(m.down[0].is_zero() && m.stay[0].is_zero() && m.up[0].is_one());
                assert!(m.up[n as usize].is_zero());
                assert!(detailed_balance_holds(&m, &class_weights(&p)));
            }
        }
    }

    #[test]
    fn power_step_examples() {
        let p = make_scheme(2, 3).unwrap();
        let m = radial_matrix(&p);
        let d1 = power_step(&RadialDistribution::<BigRational>::point_mass(p), &m).unwrap();
        assert_eq!(d1.mass(), &[ratio(0, 1), ratio(1, 1), ratio(0, 1)]);
        let d2 = power_step(&d1, &m).unwrap();
        assert_eq!(d2.mass(), &[ratio(1, 4), ratio(1, 4), ratio(1, 2)]);

        let other = RadialDistribution::<BigRational>::point_mass(make_scheme(3, 3).unwrap());
        assert!(power_step(&other, &m).is_err());
    }

    #[test]
    fn uniform_is_stationary() {
        for n in 1..=10 {
            for q in 2..=6 {
                let p = make_scheme(n, q).unwrap();
                let u = RadialDistribution::<BigRational>::uniform(p);
                assert_eq!(power_step(&u, &radial_matrix(&p)).unwrap(), u);
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let p = make_scheme(2, 3).unwrap();
        assert_eq!(
            kstep_oracle(&p, 0).unwrap(),
            RadialDistribution::point_mass(p)
        );
        let d2 = kstep_oracle(&p, 2).unwrap();
        assert_eq!(d2.mass(), &[ratio(1, 4), ratio(1, 4), ratio(1, 2)]);
        let tv = tv_distance(&d2, &RadialDistribution::uniform(p)).unwrap();
        assert_eq!(tv, ratio(7, 36));

        let mut chain = ExactChain::new(&p);
        chain.advance_to(2).unwrap();
        assert_eq!(chain.tv_to_uniform(&class_weights(&p)), ratio(7, 36));
    }

    #[test]
    fn counts_match_power_step() {
        for (n, q) in [(1, 2), (3, 3), (5, 4), (6, 2)] {
            let p = make_scheme(n, q).unwrap();
            let m = radial_matrix(&p);
            let mut d = RadialDistribution::<BigRational>::point_mass(p);
            let mut chain = ExactChain::new(&p);
            for _ in 0..15 {
                d = power_step(&d, &m).unwrap();
                chain.step().unwrap();
                assert_eq!(chain.distribution(), d);
            }
        }
    }

    #[test]
    fn squaring_matches_iteration() {
        for (n, q) in [(1, 3), (3, 2), (4, 3), (6, 5)] {
            let p = make_scheme(n, q).unwrap();
            for k in [0, 1, 2, 7, 16, 33] {
                assert_eq!(kstep_oracle_squaring(&p, k), kstep_oracle(&p, k).unwrap());
            }
        }
    }

    #[test]
    fn bit_cap_aborts() {
        let p = make_scheme(40, 5).unwrap();
        let err = kstep_oracle_capped(&p, 500, 10_000).unwrap_err();
        assert!(err.is_resource_cap());
    }

    #[test]
    fn float_chain_tracks_exact() {
        let p = make_scheme(9, 4).unwrap();
        let mut exact = ExactChain::new(&p);
        let mut float = FloatChain::new(&p);
        for _ in 0..60 {
            exact.step().unwrap();
            float.step();
            let e = exact.distribution();
            for (a, b) in e.mass().iter().zip(float.mass()) {
                assert!((Scalar::to_f64(a) - b).abs() < 1e-14);
            }
        }
    }
}
