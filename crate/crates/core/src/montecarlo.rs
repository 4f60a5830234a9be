// SPDX-License-Identifier: Apache-2.0

//! Seeded sampling of the walk, as a stochastic cross-check of the exact engines.
//!
//! Walks are split into fixed-size chunks. Chunk `i` draws from a ChaCha8
//! generator keyed by the master seed on stream `i`, so counts depend on
//! `(params, k, walks, seed)` only, never on how chunks land on workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::kstep_oracle;
use crate::par::{self, Exec};
use crate::scalar::Scalar;
use crate::scheme::{class_weights, RadialDistribution, SchemeParams};

/// Default cap on `walks * k` step draws.
pub const DEFAULT_STEP_CAP: u128 = 10_000_000_000;

/// Walks per generator stream.
pub const CHUNK_WALKS: u64 = 4096;

/// Largest `q^n` the vertex-level sampler accepts.
pub const LITERAL_STATE_LIMIT: u128 = 10_000;

pub const TV_BIAS_NOTE: &str =
    "plug-in estimate; biased upward, most visibly near stationarity where the true value is small";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: SchemeParams,
    pub k: u64,
    pub walks: u64,
    pub seed: u64,
    /// Worker threads; has no effect on the result.
    pub streams: usize,
    pub step_cap: u128,
}

impl SimConfig {
    pub fn new(params: SchemeParams, k: u64, walks: u64, seed: u64) -> Self {
        SimConfig {
            params,
            k,
            walks,
            seed,
            streams: 1,
            step_cap: DEFAULT_STEP_CAP,
        }
    }

    pub fn with_streams(mut self, streams: usize) -> Self {
        self.streams = streams;
        self
    }

    fn validate(&self, what: &'static str) -> Result<()> {
        if self.walks == 0 {
            return Err(Error::ParameterDomain(
                "walks must be at least 1".to_string(),
            ));
        }
        let draws = u128::from(self.walks) * u128::from(self.k);
        if draws > self.step_cap {
            return Err(Error::ResourceCap {
                what,
                requested: draws,
                limit: self.step_cap,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalResult {
    pub params: SchemeParams,
    pub walks: u64,
    pub counts: Vec<u64>,
    /// `counts[l] / walks`.
    pub point_estimate: Vec<f64>,
    /// Multinomial standard errors `sqrt(p(1-p)/walks)` at the point estimate.
    pub stderr: Vec<f64>,
}

impl EmpiricalResult {
    fn from_counts(params: SchemeParams, walks: u64, counts: Vec<u64>) -> Self {
        let w = walks as f64;
        let point_estimate: Vec<f64> = counts.iter().map(|&c| c as f64 / w).collect();
        let stderr = point_estimate
            .iter()
            .map(|p| (p * (1.0 - p) / w).sqrt())
            .collect();
        EmpiricalResult {
            params,
            walks,
            counts,
            point_estimate,
            stderr,
        }
    }

    pub fn distribution(&self) -> RadialDistribution<f64> {
        RadialDistribution::from_masses_unchecked(self.params, self.point_estimate.clone())
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn run_chunks<F>(cfg: &SimConfig, classes: usize, walk: F) -> Vec<u64>
where
    F: Fn(&mut ChaCha8Rng) -> usize + Sync + Send,
{
    let chunks = cfg.walks.div_ceil(CHUNK_WALKS);
    let per_chunk = par::with_workers(cfg.streams, || {
        par::map_range(Exec::Parallel, chunks, |i| {
            let mut rng = chunk_rng(cfg.seed, i);
            let len = CHUNK_WALKS.min(cfg.walks - i * CHUNK_WALKS);
            let mut counts = vec![0u64; classes];
            for _ in 0..len {
                counts[walk(&mut rng)] += 1;
            }
            counts
        })
    });
    let mut counts = vec![0u64; classes];
    for chunk in per_chunk {
        for (c, x) in counts.iter_mut().zip(chunk) {
            *c += x;
        }
    }
    counts
}

/// Runs `walks` independent walks of `k` steps on the radial chain.
///
/// Each step draws one of the `n(q-1)` neighbours uniformly: the first `l`
/// move down, the next `l(q-2)` stay, the rest move up.
pub fn simulate(cfg: &SimConfig) -> Result<EmpiricalResult> {
    cfg.validate("walks * k step draws")?;
    let n = u64::from(cfg.params.n());
    let q = u64::from(cfg.params.q());
    let deg = cfg.params.degree();
    let counts = run_chunks(cfg, cfg.params.classes(), |rng| {
        let mut l = 0u64;
        for _ in 0..cfg.k {
            let u = rng.random_range(0..deg);
            if u < l {
                l -= 1;
            } else if u >= l * (q - 1) {
                l += 1;
            }
        }
        debug_assert!(l <= n);
        l as usize
    });
    Ok(EmpiricalResult::from_counts(cfg.params, cfg.walks, counts))
}

/// Vertex-level sampler on the literal graph, for `q^n <= 10^4`.
pub fn simulate_literal(cfg: &SimConfig) -> Result<EmpiricalResult> {
    let size = cfg.params.vertex_count().unwrap_or(u128::MAX);
    if size > LITERAL_STATE_LIMIT {
        return Err(Error::ResourceCap {
            what: "literal sampler state space q^n",
            requested: size,
            limit: LITERAL_STATE_LIMIT,
        });
    }
    cfg.validate("walks * k step draws")?;
    let n = cfg.params.n() as usize;
    let qm1 = u64::from(cfg.params.q()) - 1;
    let deg = cfg.params.degree();
    let counts = run_chunks(cfg, cfg.params.classes(), |rng| {
        let mut word = vec![0u64; n];
        for _ in 0..cfg.k {
            let u = rng.random_range(0..deg);
            let (i, r) = ((u / qm1) as usize, u % qm1);
            word[i] = if r >= word[i] { r + 1 } else { r };
        }
        word.iter().filter(|&&d| d != 0).count()
    });
    Ok(EmpiricalResult::from_counts(cfg.params, cfg.walks, counts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTv {
    pub estimate: f64,
    pub note: String,
}

/// `(1/2) sum_l |counts[l]/walks - w[l]/q^n|`.
pub fn empirical_tv(cfg: &SimConfig) -> Result<EmpiricalTv> {
    let r = simulate(cfg)?;
    Ok(EmpiricalTv {
        estimate: tv_to_uniform(&r),
        note: TV_BIAS_NOTE.to_string(),
    })
}

pub fn tv_to_uniform(r: &EmpiricalResult) -> f64 {
    let w = class_weights(&r.params);
    let terms = r
        .point_estimate
        .iter()
        .enumerate()
        .map(|(l, p)| (p - w.fraction::<f64>(l)).abs());
    0.5 * crate::scalar::neumaier_sum(terms)
}

/// Per-class z-scores `(p_hat - p) / sqrt(p(1-p)/walks)` against exact
/// masses. Classes with `p` in `{0, 1}` have no spread and are skipped.
pub fn z_scores(r: &EmpiricalResult, exact: &[f64]) -> Vec<f64> {
    let w = r.walks as f64;
    r.point_estimate
        .iter()
        .zip(exact)
        .filter(|(_, &p)| p > 0.0 && p < 1.0)
        .map(|(ph, &p)| (ph - p) / (p * (1.0 - p) / w).sqrt())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZStudy {
    pub seeds: u64,
    pub z: Vec<f64>,
    pub mean_z: f64,
    pub frac_beyond_2: f64,
}

impl ZStudy {
    /// `|mean z| < 0.1` and the share of `|z| > 2` in `[0.03, 0.07]`.
    pub fn consistent(&self) -> bool {
        self.mean_z.abs() < 0.1 && (0.03..=0.07).contains(&self.frac_beyond_2)
    }
}

/// Pools z-scores over seeds `first_seed..first_seed + seeds`.
pub fn z_score_study(
    params: &SchemeParams,
    k: u64,
    walks: u64,
    first_seed: u64,
    seeds: u64,
) -> Result<ZStudy> {
    let exact: Vec<f64> = kstep_oracle(params, k)?
        .mass()
        .iter()
        .map(Scalar::to_f64)
        .collect();
    let mut z = Vec::new();
    for s in first_seed..first_seed + seeds {
        let r = simulate(&SimConfig::new(*params, k, walks, s))?;
        z.extend(z_scores(&r, &exact));
    }
    let mean_z = crate::scalar::neumaier_sum(z.iter().copied()) / z.len() as f64;
    let frac_beyond_2 = z.iter().filter(|v| v.abs() > 2.0).count() as f64 / z.len() as f64;
    Ok(ZStudy {
        seeds,
        z,
        mean_z,
        frac_beyond_2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::make_scheme;

    #[test]
    fn zero_and_one_step() {
        let p = make_scheme(2, 3).unwrap();
        let r = simulate(&SimConfig::new(p, 0, 777, 1)).unwrap();
        assert_eq!(r.counts, vec![777, 0, 0]);
        let r = simulate(&SimConfig::new(p, 1, 100_000, 1)).unwrap();
        assert_eq!(r.counts, vec![0, 100_000, 0]);
        assert_eq!(r.point_estimate[1], 1.0);
    }

    #[test]
    fn two_steps_within_four_sigma() {
        let p = make_scheme(2, 3).unwrap();
        let r = simulate(&SimConfig::new(p, 2, 1_000_000, 42)).unwrap();
        for (ph, want) in r.point_estimate.iter().zip([0.25, 0.25, 0.5]) {
            let sigma = (want * (1.0 - want) / 1e6f64).sqrt();
            assert!((ph - want).abs() < 4.0 * sigma, "{ph} vs {want}");
        }
        assert_eq!(r.counts.iter().sum::<u64>(), 1_000_000);
    }

    #[test]
    fn deterministic_across_workers() {
        let p = make_scheme(7, 4).unwrap();
        let base = SimConfig::new(p, 13, 20_000, 9);
        let a = simulate(&base).unwrap();
        let b = simulate(&base.clone().with_streams(4)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&SimConfig::new(p, 13, 20_000, 10)).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn empirical_tv_examples() {
        let p = make_scheme(2, 3).unwrap();
        let e = empirical_tv(&SimConfig::new(p, 0, 10, 0)).unwrap();
        assert!((e.estimate - 8.0 / 9.0).abs() < 1e-15);
        assert!(e.note.contains("biased"));
        let e = empirical_tv(&SimConfig::new(p, 2, 1_000_000, 3)).unwrap();
        assert!((e.estimate - 7.0 / 36.0).abs() < 3e-3);
    }

    #[test]
    fn plug_in_error_shrinks() {
        let p = make_scheme(4, 3).unwrap();
        let exact = {
            let mut t = crate::oracle::Trajectory::new(&p, crate::scalar::Backend::Exact);
            t.advance_to(6).unwrap();
            t.tv()
        };
        let errs: Vec<f64> = [10_000u64, 100_000, 1_000_000]
            .iter()
            .map(|&w| (empirical_tv(&SimConfig::new(p, 6, w, 5)).unwrap().estimate - exact).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn literal_sampler_agrees() {
        let p = make_scheme(3, 4).unwrap();
        let exact: Vec<f64> = kstep_oracle(&p, 5)
            .unwrap()
            .mass()
            .iter()
            .map(Scalar::to_f64)
            .collect();
        let r = simulate_literal(&SimConfig::new(p, 5, 400_000, 8)).unwrap();
        for z in z_scores(&r, &exact) {
            assert!(z.abs() < 5.0, "{z}");
        }
        assert!(
            simulate_literal(&SimConfig::new(make_scheme(9, 3).unwrap(), 1, 1, 0))
                .unwrap_err()
                .is_resource_cap()
        );
    }

    #[test]
    fn step_cap_and_walks() {
        let p = make_scheme(3, 3).unwrap();
        let mut cfg = SimConfig::new(p, 1000, 1000, 0);
        cfg.step_cap = 999_999;
        assert!(simulate(&cfg).unwrap_err().is_resource_cap());
        assert!(simulate(&SimConfig::new(p, 1, 0, 0)).is_err());
    }
}
