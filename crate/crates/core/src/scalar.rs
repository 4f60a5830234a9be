// SPDX-License-Identifier: Apache-2.0

//! Arithmetic backends.
//!
//! Every engine is generic over [`Scalar`]: `BigRational` is the exact
//! ground-truth path and `f64` (with compensated summation) the fast path.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        })
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;

    fn from_ratio(num: &BigInt, den: &BigInt) -> Self;

    fn from_exact(value: &BigRational) -> Self {
        Self::from_ratio(value.numer(), value.denom())
    }

    fn from_int(value: i64) -> Self {
        Self::from_ratio(&BigInt::from(value), &BigInt::one())
    }

    fn from_frac(num: i64, den: i64) -> Self {
        Self::from_ratio(&BigInt::from(num), &BigInt::from(den))
    }

    fn abs_val(&self) -> Self;

    fn to_f64(&self) -> f64;

    fn powu(&self, k: u64) -> Self;

    /// Sum with the backend's preferred accumulation (exact, or Neumaier-compensated).
    fn sum_all<I: IntoIterator<Item = Self>>(items: I) -> Self {
        items.into_iter().fold(Self::zero(), |acc, x| acc + x)
    }

    fn is_negative_val(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for BigRational {
    const BACKEND: Backend = Backend::Exact;

    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }

    fn from_exact(value: &BigRational) -> Self {
        value.clone()
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn powu(&self, k: u64) -> Self {
        Pow::pow(self, k)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        match (num.to_i64(), den.to_i64()) {
            (Some(a), Some(b)) if a.unsigned_abs() < 1 << 53 && b.unsigned_abs() < 1 << 53 => {
                a as f64 / b as f64
            }
            _ => {
                ToPrimitive::to_f64(&BigRational::new(num.clone(), den.clone())).unwrap_or(f64::NAN)
            }
        }
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powu(&self, k: u64) -> Self {
        match i32::try_from(k) {
            Ok(k) => self.powi(k),
            Err(_) => self.powf(k as f64),
        }
    }

    fn sum_all<I: IntoIterator<Item = Self>>(items: I) -> Self {
        neumaier_sum(items)
    }
}

/// Neumaier's variant of Kahan summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(items: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in items {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_small_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
        assert_eq!(v.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn huge_ratio_converts() {
        let num = BigInt::from(3u8).pow(700u32);
        let den = BigInt::from(3u8).pow(701u32);
        let x = f64::from_ratio(&num, &den);
        assert!((x - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn exact_pow_and_abs() {
        let x = ratio(-1, 2);
        assert_eq!(x.powu(3), ratio(-1, 8));
        assert_eq!(x.abs_val(), ratio(1, 2));
        assert_eq!(<BigRational as Scalar>::to_f64(&ratio(7, 36)), 7.0 / 36.0);
    }
}
