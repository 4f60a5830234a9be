// SPDX-License-Identifier: Apache-2.0

//! Brute force over every vertex of `H(n, q)`.
//!
//! Vertices are the integers `0..q^n` read in base `q`. The adjacency
//! operator is applied literally: a neighbour differs in exactly one
//! coordinate. For each coordinate the `q` vertices that agree everywhere
//! else form a line, and the neighbours of a vertex along that coordinate
//! are the rest of its line, so `(A c)[x] = sum_i (line_i(x) - c[x])`.
//! Path counts are exact integers; distance classes are only formed at the
//! end, by counting nonzero digits.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::scheme::{RadialDistribution, SchemeParams};

/// Default largest vertex count `q^n` the enumerator accepts.
pub const DEFAULT_STATE_BUDGET: u128 = 1_000_000;

const MAX_LIMBS: u128 = 1 << 26;

struct Lattice {
    n: u32,
    q: usize,
    size: usize,
    class_of: Vec<u32>,
}

/// Flat fixed-width unsigned integers, `width` little-endian limbs each.
/// The width is chosen up front to hold `deg^k_max`, which bounds every
/// count, line sum and class sum along the trajectory.
struct Wide {
    width: usize,
    data: Vec<u64>,
}

impl Wide {
    fn zeros(len: usize, width: usize) -> Self {
        Wide {
            width,
            data: vec![0; len * width],
        }
    }

    fn get(&self, i: usize) -> &[u64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    fn get_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.width..(i + 1) * self.width]
    }

    fn to_biguint(&self, i: usize) -> BigUint {
        let mut digits = Vec::with_capacity(2 * self.width);
        for &limb in self.get(i) {
            digits.push(limb as u32);
            digits.push((limb >> 32) as u32);
        }
        BigUint::new(digits)
    }
}

fn add_assign(dst: &mut [u64], src: &[u64]) {
    let mut carry = false;
    for (d, &s) in dst.iter_mut().zip(src) {
        let (v, c1) = d.overflowing_add(s);
        let (v, c2) = v.overflowing_add(u64::from(carry));
        *d = v;
        carry = c1 || c2;
    }
    debug_assert!(!carry, "width too small");
}

fn sub_assign(dst: &mut [u64], src: &[u64]) {
    let mut borrow = false;
    for (d, &s) in dst.iter_mut().zip(src) {
        let (v, b1) = d.overflowing_sub(s);
        let (v, b2) = v.overflowing_sub(u64::from(borrow));
        *d = v;
        borrow = b1 || b2;
    }
    debug_assert!(!borrow, "negative count");
}

impl Lattice {
    fn new(params: &SchemeParams, budget: u128) -> Result<Self> {
        let size = params
            .vertex_count()
            .filter(|&s| s <= budget)
            .ok_or(Error::ResourceCap {
                what: "state space q^n",
                requested: params.vertex_count().unwrap_or(u128::MAX),
                limit: budget,
            })? as usize;
        let q = params.q() as usize;
        let class_of = (0..size)
            .map(|mut x| {
                let mut d = 0;
                while x > 0 {
                    d += u32::from(x % q != 0);
                    x /= q;
                }
                d
            })
            .collect();
        Ok(Lattice {
            n: params.n(),
            q,
            size,
            class_of,
        })
    }

    fn step(&self, counts: &Wide, next: &mut Wide, line: &mut [u64]) {
        next.data.fill(0);
        let mut stride = 1usize;
        for _ in 0..self.n {
            let block = stride * self.q;
            for start in (0..self.size).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    line.fill(0);
                    for a in 0..self.q {
                        add_assign(line, counts.get(base + a * stride));
                    }
                    for a in 0..self.q {
                        let x = base + a * stride;
                        let dst = next.get_mut(x);
                        add_assign(dst, line);
                        sub_assign(dst, counts.get(x));
                    }
                }
            }
            stride = block;
        }
    }

    fn compress(
        &self,
        params: &SchemeParams,
        counts: &Wide,
        denom: &BigInt,
    ) -> RadialDistribution<BigRational> {
        let mut per_class = Wide::zeros(params.classes(), counts.width);
        for x in 0..self.size {
            let c = counts.get(x);
            if c.iter().any(|&v| v != 0) {
                add_assign(per_class.get_mut(self.class_of[x] as usize), c);
            }
        }
        let mass = (0..params.classes())
            .map(|l| BigRational::new(BigInt::from(per_class.to_biguint(l)), denom.clone()))
            .collect();
        RadialDistribution::from_masses_unchecked(*params, mass)
    }
}

/// Distribution after `k` steps on the literal graph, compressed to classes.
pub fn enumerate_tiny(
    params: &SchemeParams,
    k: u64,
    budget: u128,
) -> Result<RadialDistribution<BigRational>> {
    let mut all = enumerate_tiny_trajectory(params, k, budget)?;
    Ok(all.pop().expect("trajectory holds k + 1 entries"))
}

/// Distributions for every step `0..=k_max`.
pub fn enumerate_tiny_trajectory(
    params: &SchemeParams,
    k_max: u64,
    budget: u128,
) -> Result<Vec<RadialDistribution<BigRational>>> {
    let lattice = Lattice::new(params, budget)?;
    let deg = BigInt::from(params.degree());
    // deg^k < 2^(k bits(deg)), and next-step sums stay below deg^(k+1)
    let bits = u128::from(k_max) * u128::from(deg.bits()) + 1;
    let limbs = bits.div_ceil(64) * lattice.size as u128;
    if limbs > MAX_LIMBS {
        return Err(Error::ResourceCap {
            what: "enumeration limbs",
            requested: limbs,
            limit: MAX_LIMBS,
        });
    }
    let width = bits.div_ceil(64) as usize;
    let mut counts = Wide::zeros(lattice.size, width);
    let mut next = Wide::zeros(lattice.size, width);
    let mut line = vec![0u64; width];
    counts.get_mut(0)[0] = 1;
    let mut denom = BigInt::one();
    let mut out = Vec::with_capacity(k_max as usize + 1);
    out.push(lattice.compress(params, &counts, &denom));
    for _ in 0..k_max {
        lattice.step(&counts, &mut next, &mut line);
        std::mem::swap(&mut counts, &mut next);
        denom *= &deg;
        out.push(lattice.compress(params, &counts, &denom));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::kstep_oracle;
    use crate::scalar::ratio;
    use crate::scheme::make_scheme;

    #[test]
    fn one_step_on_triangle() {
        let p = make_scheme(1, 3).unwrap();
        let d = enumerate_tiny(&p, 1, DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(d.mass(), &[ratio(0, 1), ratio(1, 1)]);
    }

    #[test]
    fn agrees_with_radial_chain() {
        for (n, q, k) in [(3, 2, 2), (2, 3, 4), (3, 4, 6), (4, 3, 5)] {
            let p = make_scheme(n, q).unwrap();
            let d = enumerate_tiny(&p, k, DEFAULT_STATE_BUDGET).unwrap();
            assert_eq!(d, kstep_oracle(&p, k).unwrap());
        }
    }

    #[test]
    fn budget_enforced() {
        let p = make_scheme(30, 3).unwrap();
        assert!(enumerate_tiny(&p, 1, DEFAULT_STATE_BUDGET)
            .unwrap_err()
            .is_resource_cap());
    }
}
