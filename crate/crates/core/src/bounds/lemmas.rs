// SPDX-License-Identifier: Apache-2.0

//! Elementary inequalities the majorant proofs rest on.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scheme::binomial;

/// Which side of the comparison between `e^{-x}` and `|1 - x|` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma32Regime {
    /// `x <= 5/4`: `e^{-x} >= |1 - x|`.
    Below,
    /// `x >= 4/3`: `e^{-x} <= |1 - x|`.
    Above,
}

pub fn lemma32_regime(x: f64) -> Option<Lemma32Regime> {
    if x <= 1.25 {
        Some(Lemma32Regime::Below)
    } else if x >= 4.0 / 3.0 {
        Some(Lemma32Regime::Above)
    } else {
        None
    }
}

/// True iff the inequality for `x`'s regime holds. Points strictly between
/// `5/4` and `4/3` carry no claim and return true.
pub fn lemma32_check(x: f64) -> bool {
    let e = (-x).exp();
    let a = (1.0 - x).abs();
    match lemma32_regime(x) {
        Some(Lemma32Regime::Below) => e >= a,
        Some(Lemma32Regime::Above) => e <= a,
        None => true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma35Case {
    /// `a_{n,j} = 2^j C(n,j)` over `n in {3m-3, 3m-2, 3m-1}`, cap 9.
    Q3,
    /// `a_{n,j} = 3^j C(n,j)` over `n in {2m-2, 2m-1}`, cap 8.
    Q4,
}

impl Lemma35Case {
    fn base(self) -> u32 {
        match self {
            Lemma35Case::Q3 => 2,
            Lemma35Case::Q4 => 3,
        }
    }

    pub fn cap(self) -> u32 {
        match self {
            Lemma35Case::Q3 => 9,
            Lemma35Case::Q4 => 8,
        }
    }

    fn family(self, m: u64) -> Vec<u64> {
        match self {
            Lemma35Case::Q3 => vec![3 * m - 3, 3 * m - 2, 3 * m - 1],
            Lemma35Case::Q4 => vec![2 * m - 2, 2 * m - 1],
        }
    }

    /// Largest admissible `l` for a given `m`.
    pub fn l_max(self, m: u64) -> u64 {
        match self {
            Lemma35Case::Q3 => m - 1,
            Lemma35Case::Q4 => (m - 1) / 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma35Report {
    pub case: Lemma35Case,
    pub m: u64,
    pub l: u64,
    /// `(n, a_{n, n-l} / a_{n, l+m-1})` in increasing `n`.
    pub ratios: Vec<(u64, BigRational)>,
    pub within_cap: bool,
    pub nondecreasing: bool,
}

impl Lemma35Report {
    pub fn holds(&self) -> bool {
        self.within_cap && self.nondecreasing
    }
}

fn a(base: u32, n: u64, j: u64) -> BigInt {
    BigInt::from(base).pow(j as u32) * binomial(n, j)
}

/// Evaluates the ratio chain exactly for one admissible `(m, l)`.
pub fn lemma35_ratio_check(case: Lemma35Case, m: u64, l: u64) -> Result<Lemma35Report> {
    if m < 2 || l > case.l_max(m) {
        return Err(Error::ParameterDomain(format!(
            "need m >= 2 and 0 <= l <= {}, got m = {m}, l = {l}",
            if m >= 1 { case.l_max(m) } else { 0 }
        )));
    }
    let base = case.base();
    let ratios: Vec<(u64, BigRational)> = case
        .family(m)
        .into_iter()
        .map(|n| {
            (
                n,
                BigRational::new(a(base, n, n - l), a(base, n, l + m - 1)),
            )
        })
        .collect();
    let cap = BigRational::from_integer(BigInt::from(case.cap()));
    let within_cap = ratios.iter().all(|(_, r)| r <= &cap);
    let nondecreasing = ratios.windows(2).all(|w| w[0].1 <= w[1].1);
    Ok(Lemma35Report {
        case,
        m,
        l,
        ratios,
        within_cap,
        nondecreasing,
    })
}

/// Largest `l` for which the sum bound is stated.
pub fn lemma34_l_max(case: Lemma35Case, m: u64) -> u64 {
    match case {
        Lemma35Case::Q3 => m,
        Lemma35Case::Q4 => m / 2,
    }
}

/// The sums behind the ratio bounds, as exact rationals.
///
/// `Q3`: `sum_{p=l}^{2m-l-1} (p-m+2)/(p+m)`.
/// `Q4`: `sum_{p=l}^{m-l-1} (2p-m+3)/(p+m)`.
pub fn lemma34_sum(case: Lemma35Case, m: u64, l: u64) -> Result<BigRational> {
    if m < 2 || l > lemma34_l_max(case, m) {
        return Err(Error::ParameterDomain(format!(
            "need m >= 2 and 0 <= l <= {}, got m = {m}, l = {l}",
            lemma34_l_max(case, m.max(2))
        )));
    }
    let (m, l) = (m as i64, l as i64);
    let hi = match case {
        Lemma35Case::Q3 => 2 * m - l - 1,
        Lemma35Case::Q4 => m - l - 1,
    };
    let mut s = BigRational::zero();
    for p in l..=hi {
        let num = match case {
            Lemma35Case::Q3 => p - m + 2,
            Lemma35Case::Q4 => 2 * p - m + 3,
        };
        s += BigRational::new(num.into(), (p + m).into());
    }
    Ok(s)
}

/// `2 log((3m-l)/(l+m))` or `3 log((2m-l)/(l+m))`.
pub fn lemma34_bound(case: Lemma35Case, m: u64, l: u64) -> f64 {
    let (m, l) = (m as f64, l as f64);
    match case {
        Lemma35Case::Q3 => 2.0 * ((3.0 * m - l) / (l + m)).ln(),
        Lemma35Case::Q4 => 3.0 * ((2.0 * m - l) / (l + m)).ln(),
    }
}

/// Checks `sum <= bound <= log cap` with a float slack of `1e-12`.
pub fn lemma34_sum_within_bound(case: Lemma35Case, m: u64, l: u64) -> Result<bool> {
    let s = Scalar::to_f64(&lemma34_sum(case, m, l)?);
    let b = lemma34_bound(case, m, l);
    Ok(s <= b + 1e-12 && b <= f64::from(case.cap()).ln() + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn lemma32_points() {
        assert!(lemma32_check(0.0));
        assert!(lemma32_check(1.25));
        assert!(lemma32_check(4.0 / 3.0));
        assert!(lemma32_check(-3.0));
        assert!(lemma32_check(10.0));
        assert_eq!(lemma32_regime(1.3), None);
    }

    #[test]
    fn lemma35_examples() {
        let r = lemma35_ratio_check(Lemma35Case::Q3, 2, 0).unwrap();
        assert_eq!(r.ratios[2], (5, ratio(32, 10)));
        assert!(r.holds());
        let r = lemma35_ratio_check(Lemma35Case::Q4, 2, 0).unwrap();
        assert_eq!(r.ratios, vec![(2, ratio(3, 2)), (3, ratio(3, 1))]);
        assert!(r.holds());
        assert!(lemma35_ratio_check(Lemma35Case::Q3, 1, 0).is_err());
        assert!(lemma35_ratio_check(Lemma35Case::Q4, 4, 2).is_err());
    }

    #[test]
    fn lemma34_sums() {
        assert_eq!(lemma34_sum(Lemma35Case::Q3, 2, 0).unwrap(), ratio(43, 30));
        for case in [Lemma35Case::Q3, Lemma35Case::Q4] {
            for m in 2..=60 {
                for l in 0..=lemma34_l_max(case, m) {
                    assert!(
                        lemma34_sum_within_bound(case, m, l).unwrap(),
                        "{case:?} m={m} l={l}"
                    );
                }
            }
        }
        assert!(lemma34_sum(Lemma35Case::Q4, 4, 3).is_err());
    }

    #[test]
    fn lemma35_small_range() {
        for case in [Lemma35Case::Q3, Lemma35Case::Q4] {
            for m in 2..=40 {
                for l in 0..=case.l_max(m) {
                    assert!(
                        lemma35_ratio_check(case, m, l).unwrap().holds(),
                        "{case:?} m={m} l={l}"
                    );
                }
            }
        }
    }
}
