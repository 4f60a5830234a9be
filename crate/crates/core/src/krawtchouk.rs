// SPDX-License-Identifier: Apache-2.0

//! Spherical functions of the Hamming scheme (normalized Krawtchouk polynomials).
//!
//! `phi_j(l)` is the value of the `j`-th spherical function on the distance
//! class `l`. Two closed forms are provided and checked against each other:
//! the terminating hypergeometric series and the binomial double sum.
//! Large float tables are filled by the three-term recurrence in `l`
//! instead, since direct float summation cancels badly once `n` is in the
//! hundreds.

use std::io::{self, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::scalar::{Backend, Scalar};
use crate::scheme::{binomial, class_weights, SchemeParams};

/// Default largest `n` for which a full `(n+1) x (n+1)` table may be built.
pub const DEFAULT_TABLE_BUDGET: u32 = 4096;

/// `phi_j(l)` from the series `sum_r (-j)_r (-l)_r / ((-n)_r r!) (q/(q-1))^r`.
///
/// Consecutive terms differ by the factor `(r-j)(r-l) q / ((r-n)(r+1)(q-1))`;
/// the series stops once `r` passes `min(j, l)` because a Pochhammer factor vanishes.
pub fn phi_hypergeometric<T: Scalar>(params: &SchemeParams, j: usize, l: usize) -> Result<T> {
    params.check_index(j)?;
    params.check_index(l)?;
    let n = i64::from(params.n());
    let q = i64::from(params.q());
    let (j, l) = (j as i64, l as i64);
    let mut term = T::one();
    let mut acc = vec![T::one()];
    for r in 0..j.min(l) {
        let num = (r - j) * (r - l) * q;
        let den = (r - n) * (r + 1) * (q - 1);
        term = term * T::from_frac(num, den);
        acc.push(term.clone());
    }
    Ok(T::sum_all(acc))
}

/// `phi_j(l)` from `C(n,j)^{-1} sum_r C(l,r) C(n-l, j-r) (-1/(q-1))^r`.
///
/// The sum is accumulated over the integers after scaling by `(q-1)^j`, so
/// the value is exact and the float result is correctly rounded.
pub fn phi_binomial<T: Scalar>(params: &SchemeParams, j: usize, l: usize) -> Result<T> {
    let (num, den) = phi_binomial_parts(params, j, l)?;
    Ok(T::from_ratio(&num, &den))
}

fn phi_binomial_parts(params: &SchemeParams, j: usize, l: usize) -> Result<(BigInt, BigInt)> {
    params.check_index(j)?;
    params.check_index(l)?;
    let n = u64::from(params.n());
    let qm1 = BigInt::from(params.q() - 1);
    let (j, l) = (j as u64, l as u64);
    let mut num = BigInt::zero();
    for r in 0..=j.min(l) {
        if j - r > n - l {
            continue;
        }
        let mut term = binomial(l, r) * binomial(n - l, j - r) * qm1.pow((j - r) as u32);
        if r % 2 == 1 {
            term = -term;
        }
        num += term;
    }
    let den = binomial(n, j) * qm1.pow(j as u32);
    Ok((num, den))
}

/// Row `phi_j(0..=n)` by the recurrence
/// `(n-l)(q-1) phi(l+1) = (n(q-1) - jq - l(q-2)) phi(l) - l phi(l-1)`,
/// the eigen-equation of the radial transition matrix read row by row.
///
/// Past the turning point `l+ = (sqrt((n-j)(q-1)) + sqrt(j))^2 / q` the row
/// decays and forward iteration from `phi(0) = 1` is unstable, so that tail
/// is filled backwards from `phi(n) = (-1/(q-1))^j` instead.
pub fn phi_row_recurrence<T: Scalar>(params: &SchemeParams, j: usize) -> Result<Vec<T>> {
    params.check_index(j)?;
    let n = i64::from(params.n());
    let q = i64::from(params.q());
    let eig_scaled = n * (q - 1) - j as i64 * q;
    let diag = |l: i64| T::from_int(eig_scaled - l * (q - 2));
    let turn = ((((n - j as i64) * (q - 1)) as f64).sqrt() + (j as f64).sqrt()).powi(2) / q as f64;
    let split = (turn.floor() as i64).clamp(0, n);

    let mut row = vec![T::zero(); params.classes()];
    row[0] = T::one();
    let mut prev = T::zero();
    for l in 0..split {
        let cur = row[l as usize].clone();
        let next = (diag(l) * cur.clone() - T::from_int(l) * prev) / T::from_int((n - l) * (q - 1));
        prev = cur;
        row[l as usize + 1] = next;
    }
    if split < n {
        row[n as usize] = T::from_frac(-1, q - 1).powu(j as u64);
        let mut next = T::zero();
        for l in ((split + 2)..=n).rev() {
            let cur = row[l as usize].clone();
            let before =
                (diag(l) * cur.clone() - T::from_int((n - l) * (q - 1)) * next) / T::from_int(l);
            next = cur;
            row[l as usize - 1] = before;
        }
    }
    Ok(row)
}

/// Row `phi_j(0..=n)` in the backend's preferred evaluation strategy.
pub fn phi_row<T: Scalar>(params: &SchemeParams, j: usize) -> Result<Vec<T>> {
    match T::BACKEND {
        Backend::Exact => (0..params.classes())
            .map(|l| phi_hypergeometric(params, j, l))
            .collect(),
        Backend::Float => phi_row_recurrence(params, j),
    }
}

/// All values `phi_j(l)`, row-major by `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrawtchoukTable<T> {
    params: SchemeParams,
    phi: Vec<T>,
}

impl<T: Scalar> KrawtchoukTable<T> {
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn backend(&self) -> Backend {
        T::BACKEND
    }

    #[inline]
    pub fn get(&self, j: usize, l: usize) -> &T {
        &self.phi[j * self.params.classes() + l]
    }

    pub fn row(&self, j: usize) -> &[T] {
        let c = self.params.classes();
        &self.phi[j * c..(j + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.phi.chunks(self.params.classes())
    }

    /// Dumps the table as `j,l,value` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "j,l,value")?;
        for (j, row) in self.rows().enumerate() {
            for (l, v) in row.iter().enumerate() {
                writeln!(out, "{j},{l},{}", crate::format::g17(v.to_f64()))?;
            }
        }
        Ok(())
    }
}

pub fn build_table<T: Scalar>(params: &SchemeParams, budget: u32) -> Result<KrawtchoukTable<T>> {
    build_table_with(params, budget, Exec::default())
}

pub fn build_table_with<T: Scalar>(
    params: &SchemeParams,
    budget: u32,
    exec: Exec,
) -> Result<KrawtchoukTable<T>> {
    if params.n() > budget {
        return Err(Error::ResourceCap {
            what: "Krawtchouk table size n",
            requested: u128::from(params.n()),
            limit: u128::from(budget),
        });
    }
    let js: Vec<usize> = (0..params.classes()).collect();
    let rows = par::map(exec, &js, |&j| phi_row::<T>(params, j));
    let mut phi = Vec::with_capacity(params.classes() * params.classes());
    for row in rows {
        phi.extend(row?);
    }
    Ok(KrawtchoukTable {
        params: *params,
        phi,
    })
}

/// Exact check of `sum_l w[l] phi_j(l) phi_j'(l) = delta_{jj'} q^n / d_j`
/// with `d_j = (q-1)^j C(n, j)`.
pub fn orthogonality_holds_exact(table: &KrawtchoukTable<BigRational>) -> bool {
    let params = table.params();
    let w = class_weights(params);
    let c = params.classes();
    let total = BigRational::from_integer(w.total.clone());
    for j in 0..c {
        for jp in j..c {
            let s: BigRational = (0..c)
                .map(|l| {
                    BigRational::from_integer(w.weights[l].clone())
                        * table.get(j, l)
                        * table.get(jp, l)
                })
                .sum();
            let expect = if j == jp {
                // multiplicities coincide with the class sizes
                &total / BigRational::from_integer(w.weights[j].clone())
            } else {
                BigRational::zero()
            };
            if s != expect {
                return false;
            }
        }
    }
    true
}

/// Largest entry of `|G - I|` where `G[j][j'] = sqrt(d_j d_j') sum_l pi_l phi_j(l) phi_j'(l)`
/// and `pi_l = w[l]/q^n`. The orthonormal scaling makes the tolerance independent of `n`.
pub fn orthonormal_gram_error(table: &KrawtchoukTable<f64>) -> f64 {
    let params = table.params();
    let w = class_weights(params);
    let c = params.classes();
    let pi: Vec<f64> = (0..c).map(|l| w.fraction::<f64>(l)).collect();
    let sqrt_d: Vec<f64> = w
        .weights
        .iter()
        .map(|d| <f64 as Scalar>::from_ratio(d, &BigInt::one()).sqrt())
        .collect();
    let mut worst = 0.0f64;
    for j in 0..c {
        for jp in j..c {
            let s = crate::scalar::neumaier_sum(
                (0..c).map(|l| pi[l] * table.get(j, l) * table.get(jp, l)),
            );
            let g = s * sqrt_d[j] * sqrt_d[jp];
            let target = if j == jp { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

/// Exact `sum_l w[l] phi_j(l)` for each `j`; zero for every `j >= 1`.
pub fn weighted_row_sums(table: &KrawtchoukTable<BigRational>) -> Vec<BigRational> {
    let w = class_weights(table.params());
    table
        .rows()
        .map(|row| {
            row.iter()
                .zip(&w.weights)
                .map(|(v, wl)| v * BigRational::from_integer(wl.clone()))
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::scheme::make_scheme;

    #[test]
    fn closed_form_examples() {
        let p = make_scheme(2, 3).unwrap();
        assert_eq!(
            phi_hypergeometric::<BigRational>(&p, 1, 1).unwrap(),
            ratio(1, 4)
        );
        assert_eq!(
            phi_hypergeometric::<BigRational>(&p, 2, 2).unwrap(),
            ratio(1, 4)
        );
        assert_eq!(phi_binomial::<BigRational>(&p, 2, 1).unwrap(), ratio(-1, 2));
        let p3 = make_scheme(3, 3).unwrap();
        assert_eq!(
            phi_binomial::<BigRational>(&p3, 1, 3).unwrap(),
            ratio(-1, 2)
        );
        for l in 0..=3 {
            assert_eq!(
                phi_hypergeometric::<BigRational>(&p3, 0, l).unwrap(),
                BigRational::one()
            );
        }
    }

    #[test]
    fn out_of_range_index() {
        let p = make_scheme(2, 3).unwrap();
        assert!(matches!(
            phi_hypergeometric::<f64>(&p, 3, 0),
            Err(Error::IndexOutOfRange { index: 3, max: 2 })
        ));
        assert!(phi_binomial::<f64>(&p, 0, 5).is_err());
    }

    #[test]
    fn small_table() {
        let p = make_scheme(2, 3).unwrap();
        let t = build_table::<BigRational>(&p, DEFAULT_TABLE_BUDGET).unwrap();
        let expect = [
            [ratio(1, 1), ratio(1, 1), ratio(1, 1)],
            [ratio(1, 1), ratio(1, 4), ratio(-1, 2)],
            [ratio(1, 1), ratio(-1, 2), ratio(1, 4)],
        ];
        for (j, row) in expect.iter().enumerate() {
            assert_eq!(t.row(j), row);
        }
        assert!(orthogonality_holds_exact(&t));
        let sums = weighted_row_sums(&t);
        assert_eq!(sums, vec![ratio(9, 1), ratio(0, 1), ratio(0, 1)]);
    }

    #[test]
    fn budget_enforced() {
        let p = make_scheme(50, 3).unwrap();
        let err = build_table::<f64>(&p, 10).unwrap_err();
        assert!(err.is_resource_cap());
    }

    #[test]
    fn exact_recurrence_matches_series() {
        for n in 1..=14 {
            for q in 2..=5 {
                let p = make_scheme(n, q).unwrap();
                for j in 0..=n as usize {
                    let rec = phi_row_recurrence::<BigRational>(&p, j).unwrap();
                    let series = phi_row::<BigRational>(&p, j).unwrap();
                    assert_eq!(rec, series, "n={n} q={q} j={j}");
                }
            }
        }
    }

    #[test]
    fn float_table_close_to_exact() {
        let p = make_scheme(30, 4).unwrap();
        let exact = build_table::<BigRational>(&p, 64).unwrap();
        let float = build_table::<f64>(&p, 64).unwrap();
        for j in 0..=30 {
            for l in 0..=30 {
                let e = Scalar::to_f64(exact.get(j, l));
                assert!((e - float.get(j, l)).abs() < 1e-10, "j={j} l={l}");
            }
        }
    }

    #[test]
    fn self_duality() {
        let p = make_scheme(9, 4).unwrap();
        for j in 0..=9 {
            for l in 0..=9 {
                assert_eq!(
                    phi_binomial::<BigRational>(&p, j, l).unwrap(),
                    phi_binomial::<BigRational>(&p, l, j).unwrap()
                );
            }
        }
    }

    #[test]
    fn csv_dump() {
        let p = make_scheme(1, 3).unwrap();
        let t = build_table::<BigRational>(&p, 8).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "j,l,value\n0,0,1\n0,1,1\n1,0,1\n1,1,-0.5\n"
        );
    }
}
