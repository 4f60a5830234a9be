// SPDX-License-Identifier: Apache-2.0

//! Grid verifications. Each `(n, q)` cell is an independent job; results
//! are merged back in grid order so reports do not depend on scheduling.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{
    diagnostics_from, lemma32_check, lemma34_l_max, lemma34_sum_within_bound, lemma35_ratio_check,
    majorant_report, minorant_k, minorant_report, upper_lemma_violations, BoundReport,
    CutoffSchedule, Lemma35Case, MajorantRegime, MinorantDiagnostics, Rounding,
};
use crate::error::{Error, Result};
use crate::krawtchouk::{build_table, DEFAULT_TABLE_BUDGET};
use crate::oracle::{ExactChain, Trajectory};
use crate::par::{self, Exec};
use crate::scalar::{ratio, Backend, Scalar};
use crate::scheme::{make_scheme, SchemeParams};
use crate::spectral::{eigenvalue, linearization_holds, stationary_moments, variance_phi1_kstep};

/// One failed assertion, with both sides of the inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub n: u32,
    pub q: u32,
    pub k: Option<u64>,
    pub lhs: f64,
    pub rhs: f64,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FAIL {} n={} q={}", self.check, self.n, self.q)?;
        if let Some(k) = self.k {
            write!(f, " k={k}")?;
        }
        write!(f, " lhs={} rhs={}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub checks: u64,
    /// Grid cells outside every theorem's scope.
    pub skipped: u64,
    /// Checks that held only because the bound is trivial.
    pub vacuous: u64,
    pub failures: Vec<Failure>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn absorb(&mut self, other: SuiteOutcome) {
        self.checks += other.checks;
        self.skipped += other.skipped;
        self.vacuous += other.vacuous;
        self.failures.extend(other.failures);
    }
}

fn grid(n_min: u32, n_max: u32, qs: &[u32]) -> Result<Vec<SchemeParams>> {
    let mut cells = Vec::new();
    for n in n_min..=n_max {
        for &q in qs {
            cells.push(make_scheme(n, q)?);
        }
    }
    Ok(cells)
}

fn failure(check: &str, p: &SchemeParams, k: Option<u64>, lhs: f64, rhs: f64) -> Failure {
    Failure {
        check: check.to_string(),
        n: p.n(),
        q: p.q(),
        k,
        lhs,
        rhs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperGrid {
    pub n_min: u32,
    pub n_max: u32,
    pub qs: Vec<u32>,
    pub k_max: u64,
}

impl Default for UpperGrid {
    fn default() -> Self {
        UpperGrid {
            n_min: 1,
            n_max: 30,
            qs: (2..=6).collect(),
            k_max: 300,
        }
    }
}

/// `tv^2 <= (1/4) sum_{j>=1} d_j lambda_j^{2k}` over the whole grid, exactly.
pub fn verify_upper(g: &UpperGrid, exec: Exec) -> Result<SuiteOutcome> {
    let cells = grid(g.n_min, g.n_max, &g.qs)?;
    let results = par::map(exec, &cells, |p| upper_lemma_violations(p, g.k_max));
    let mut out = SuiteOutcome::default();
    for (p, r) in cells.iter().zip(results) {
        out.checks += g.k_max + 1;
        for (k, lhs, rhs) in r? {
            out.failures
                .push(failure("upper-lemma", p, Some(k), lhs, rhs));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantGrid {
    pub n_min: u32,
    pub n_max: u32,
    pub qs: Vec<u32>,
    pub cs: Vec<f64>,
    pub rounding: Rounding,
    /// `None` picks exact or float per scheme size.
    pub backend: Option<Backend>,
}

impl Default for MajorantGrid {
    fn default() -> Self {
        MajorantGrid {
            n_min: 1,
            n_max: 40,
            qs: (3..=8).collect(),
            cs: (1..=24).map(|i| f64::from(i) * 0.25).collect(),
            rounding: Rounding::Ceil,
            backend: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantRun {
    pub outcome: SuiteOutcome,
    /// Sorted by `(n, q, c)`.
    pub reports: Vec<BoundReport>,
}

fn majorant_cell(p: &SchemeParams, g: &MajorantGrid) -> Result<(Vec<BoundReport>, u64)> {
    let Ok(regime) = MajorantRegime::for_params(p) else {
        return Ok((Vec::new(), g.cs.len() as u64));
    };
    let schedule = CutoffSchedule::new(p);
    let mut skipped = 0;
    let mut jobs: Vec<(u64, f64)> = Vec::new();
    for &c in &g.cs {
        match schedule.k_rounded(c, g.rounding) {
            Ok(k) => jobs.push((k, c)),
            Err(Error::NotApplicable(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    jobs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let backend = g.backend.unwrap_or_else(|| super::auto_backend(p));
    let mut traj = Trajectory::new(p, backend);
    let mut reports = Vec::with_capacity(jobs.len());
    for (k, c) in jobs {
        traj.advance_to(k)?;
        reports.push(majorant_report(p, regime, k, c, traj.tv()));
    }
    reports.sort_by(|a, b| a.c.total_cmp(&b.c));
    Ok((reports, skipped))
}

/// Theorem majorants at `k` from the schedule; `q = 2` has no theorem.
pub fn verify_majorant(g: &MajorantGrid, exec: Exec) -> Result<MajorantRun> {
    if g.qs.contains(&2) {
        return Err(Error::NotApplicable(
            "no majorant theorem for q = 2".to_string(),
        ));
    }
    if let Some(c) = g.cs.iter().find(|c| !(**c > 0.0)) {
        return Err(Error::ParameterDomain(format!(
            "majorant needs c > 0, got {c}"
        )));
    }
    let cells = grid(g.n_min, g.n_max, &g.qs)?;
    let results = par::map(exec, &cells, |p| majorant_cell(p, g));
    let mut outcome = SuiteOutcome::default();
    let mut reports = Vec::new();
    for (p, r) in cells.iter().zip(results) {
        let (rs, skipped) = r?;
        outcome.skipped += skipped;
        for r in rs {
            outcome.checks += 1;
            outcome.vacuous += u64::from(r.vacuous);
            if !r.satisfied {
                outcome.failures.push(failure(
                    r.which.name(),
                    p,
                    Some(r.k),
                    r.tv_exact * r.tv_exact,
                    r.bound_value,
                ));
            }
            reports.push(r);
        }
    }
    Ok(MajorantRun { outcome, reports })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorantSweepConfig {
    pub q: u32,
    pub b: f64,
    pub c0: f64,
    pub c: f64,
    pub n_values: Vec<u32>,
    pub backend: Backend,
}

impl Default for MinorantSweepConfig {
    fn default() -> Self {
        MinorantSweepConfig {
            q: 3,
            b: 1.0,
            c0: 3.0,
            c: 3.0,
            n_values: (1..=2000).collect(),
            backend: Backend::Float,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorantSweepRow {
    pub report: BoundReport,
    pub diagnostics: MinorantDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorantSweep {
    pub config: MinorantSweepConfig,
    /// Admissible `n` only (those with `c <= log n(q-1)`), increasing.
    pub rows: Vec<MinorantSweepRow>,
    /// Smallest tested `n` from which the bound holds through the largest tested `n`.
    pub n_star: Option<u32>,
    pub outcome: SuiteOutcome,
}

fn minorant_cell(p: &SchemeParams, cfg: &MinorantSweepConfig) -> Result<Option<MinorantSweepRow>> {
    let log_deg = CutoffSchedule::new(p).log_degree();
    if cfg.c > cfg.c0.min(log_deg) {
        return Ok(None);
    }
    let k = minorant_k(p, cfg.c);
    let mut traj = Trajectory::new(p, cfg.backend);
    traj.advance_to(k)?;
    let tv = traj.tv();
    let report = minorant_report(p, k, cfg.b, cfg.c, tv);
    let diagnostics = diagnostics_from(
        p,
        k,
        cfg.b,
        cfg.c,
        &traj.masses_f64(),
        traj.uniform_f64(),
        tv,
    );
    Ok(Some(MinorantSweepRow {
        report,
        diagnostics,
    }))
}

/// Empirical threshold sweep for the minorant. The bound itself is only
/// asserted from `n_star` on; the Markov step, the Chebyshev step and the
/// event bound are asserted on every row.
pub fn minorant_sweep(cfg: &MinorantSweepConfig, exec: Exec) -> Result<MinorantSweep> {
    if !(cfg.b >= 0.0) || !(cfg.c >= 0.0) || !(cfg.c0 > 0.0) || cfg.c > cfg.c0 {
        return Err(Error::ParameterDomain(format!(
            "minorant sweep needs b >= 0 and 0 <= c <= c0, got b = {}, c = {}, c0 = {}",
            cfg.b, cfg.c, cfg.c0
        )));
    }
    let mut ns = cfg.n_values.clone();
    ns.sort_unstable();
    ns.dedup();
    let cells: Vec<SchemeParams> = ns
        .iter()
        .map(|&n| make_scheme(n, cfg.q))
        .collect::<Result<_>>()?;
    let results = par::map(exec, &cells, |p| minorant_cell(p, cfg));
    let mut rows = Vec::new();
    for r in results {
        if let Some(row) = r? {
            rows.push(row);
        }
    }
    let mut n_star = None;
    for row in rows.iter().rev() {
        if !row.report.satisfied {
            break;
        }
        n_star = Some(row.report.n);
    }
    let mut outcome = SuiteOutcome::default();
    for row in &rows {
        let p = make_scheme(row.report.n, cfg.q)?;
        let d = &row.diagnostics;
        let k = Some(row.report.k);
        outcome.checks += 3;
        if !d.markov_holds() {
            outcome
                .failures
                .push(failure("minorant-markov", &p, k, d.pi_b, d.markov_lb));
        }
        if !d.chebyshev_holds() {
            outcome
                .failures
                .push(failure("minorant-chebyshev", &p, k, d.nu_b, d.chebyshev_ub));
        }
        if !d.event_bound_holds() {
            outcome
                .failures
                .push(failure("minorant-event", &p, k, d.tv, d.pi_b - d.nu_b));
        }
        if n_star.is_some_and(|s| row.report.n >= s) {
            outcome.checks += 1;
            outcome.vacuous += u64::from(row.report.vacuous);
        }
    }
    if n_star.is_none() {
        if let Some(last) = rows.last() {
            let p = make_scheme(last.report.n, cfg.q)?;
            outcome.failures.push(failure(
                "minorant-no-threshold",
                &p,
                Some(last.report.k),
                last.report.tv_exact,
                last.report.bound_value,
            ));
        }
    }
    Ok(MinorantSweep {
        config: cfg.clone(),
        rows,
        n_star,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaGrid {
    /// Grid points per regime of the exponential comparison.
    pub exp_points: usize,
    /// Upper `m` for the ratio chains and the sums behind them.
    pub ratio_m_max: u64,
    /// Linearization and stationary moments: `2..=n_max` (resp. `1..=n_max`).
    pub identity_n_max: u32,
    pub qs: Vec<u32>,
    /// Two-path expectation agreement.
    pub expectation_n_max: u32,
    pub expectation_k_max: u64,
    /// Variance bound.
    pub variance_n_max: u32,
    pub variance_k_max: u64,
}

impl Default for LemmaGrid {
    fn default() -> Self {
        LemmaGrid {
            exp_points: 100_000,
            ratio_m_max: 200,
            identity_n_max: 30,
            qs: (2..=6).collect(),
            expectation_n_max: 10,
            expectation_k_max: 64,
            variance_n_max: 20,
            variance_k_max: 200,
        }
    }
}

/// Points spread evenly over `[lo, hi]`, both ends included.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect()
}

/// `e^{-x}` against `|1 - x|` on `[-10, 5/4]` and `[4/3, 20]`.
pub fn verify_lemma32(points: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome::default();
    let p = SchemeParams::new(1, 2).expect("valid");
    for x in linspace(-10.0, 1.25, points)
        .into_iter()
        .chain(linspace(4.0 / 3.0, 20.0, points))
    {
        out.checks += 1;
        if !lemma32_check(x) {
            let mut f = failure("exp-vs-abs", &p, None, (-x).exp(), (1.0 - x).abs());
            f.n = 0;
            f.q = 0;
            out.failures.push(f);
        }
    }
    out
}

/// Ratio caps and chain orderings in both cases, plus the sums behind them.
pub fn verify_lemma35(m_max: u64, exec: Exec) -> Result<SuiteOutcome> {
    let ms: Vec<u64> = (2..=m_max).collect();
    let per_m = par::map(exec, &ms, |&m| -> Result<SuiteOutcome> {
        let mut out = SuiteOutcome::default();
        for case in [Lemma35Case::Q3, Lemma35Case::Q4] {
            for l in 0..=case.l_max(m) {
                let r = lemma35_ratio_check(case, m, l)?;
                out.checks += 1;
                if !r.holds() {
                    let worst = r
                        .ratios
                        .iter()
                        .map(|(_, v)| Scalar::to_f64(v))
                        .fold(0.0, f64::max);
                    out.failures.push(Failure {
                        check: format!("ratio-chain-{case:?}-m{m}-l{l}"),
                        n: r.ratios.last().map_or(0, |(n, _)| *n as u32),
                        q: if case == Lemma35Case::Q3 { 3 } else { 4 },
                        k: None,
                        lhs: worst,
                        rhs: f64::from(case.cap()),
                    });
                }
            }
            for l in 0..=lemma34_l_max(case, m) {
                out.checks += 1;
                if !lemma34_sum_within_bound(case, m, l)? {
                    out.failures.push(Failure {
                        check: format!("ratio-sum-{case:?}-m{m}-l{l}"),
                        n: 0,
                        q: if case == Lemma35Case::Q3 { 3 } else { 4 },
                        k: None,
                        lhs: Scalar::to_f64(&super::lemma34_sum(case, m, l)?),
                        rhs: super::lemma34_bound(case, m, l),
                    });
                }
            }
        }
        Ok(out)
    });
    let mut out = SuiteOutcome::default();
    for r in per_m {
        out.absorb(r?);
    }
    Ok(out)
}

/// Linearization of `phi_1^2` pointwise, and the uniform-distribution
/// moments `E(phi_j) = [j = 0]`, `Var(phi_1) = 1/(n(q-1))`.
pub fn verify_identities(n_max: u32, qs: &[u32], exec: Exec) -> Result<SuiteOutcome> {
    let cells = grid(1, n_max, qs)?;
    let results = par::map(exec, &cells, |p| -> Result<SuiteOutcome> {
        let mut out = SuiteOutcome::default();
        if p.n() >= 2 {
            out.checks += 1;
            if !linearization_holds(p)? {
                out.failures
                    .push(failure("linearization", p, None, f64::NAN, f64::NAN));
            }
        }
        let m = stationary_moments(p)?;
        for (j, mean) in m.mean_phi.iter().enumerate() {
            out.checks += 1;
            let want = if j == 0 {
                BigRational::one()
            } else {
                BigRational::zero()
            };
            if *mean != want {
                out.failures.push(failure(
                    &format!("stationary-mean-j{j}"),
                    p,
                    None,
                    Scalar::to_f64(mean),
                    Scalar::to_f64(&want),
                ));
            }
        }
        out.checks += 1;
        let want = ratio(1, p.degree() as i64);
        if m.var_phi1 != want {
            out.failures.push(failure(
                "stationary-variance",
                p,
                None,
                Scalar::to_f64(&m.var_phi1),
                Scalar::to_f64(&want),
            ));
        }
        Ok(out)
    });
    let mut out = SuiteOutcome::default();
    for r in results {
        out.absorb(r?);
    }
    Ok(out)
}

/// `E_{nu^{*k}}(phi_j)` two ways: class sums over the exact chain against
/// `lambda_j^k`. The direct variance of `phi_1` is compared with the
/// linearized closed form on the same trajectory.
pub fn verify_expectations(n_max: u32, qs: &[u32], k_max: u64, exec: Exec) -> Result<SuiteOutcome> {
    let cells = grid(1, n_max, qs)?;
    let results = par::map(exec, &cells, |p| -> Result<SuiteOutcome> {
        let mut out = SuiteOutcome::default();
        let table = build_table::<BigRational>(p, DEFAULT_TABLE_BUDGET)?;
        let lambdas: Vec<BigRational> = (0..p.classes()).map(|j| eigenvalue(p, j)).collect();
        let mut powers = vec![BigRational::one(); p.classes()];
        let mut chain = ExactChain::with_bit_cap(p, u64::MAX);
        for k in 0..=k_max {
            if k > 0 {
                chain.step()?;
                for (pw, lam) in powers.iter_mut().zip(&lambdas) {
                    *pw *= lam;
                }
            }
            let denom = BigRational::from_integer(chain.denominator().clone());
            let counts: Vec<BigRational> = chain
                .counts()
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect();
            let weighted = |row: &[BigRational]| -> BigRational {
                counts
                    .iter()
                    .zip(row)
                    .map(|(c, v)| c * v)
                    .sum::<BigRational>()
                    / &denom
            };
            for (j, pw) in powers.iter().enumerate() {
                out.checks += 1;
                let e = weighted(table.row(j));
                if e != *pw {
                    out.failures.push(failure(
                        &format!("kstep-mean-j{j}"),
                        p,
                        Some(k),
                        Scalar::to_f64(&e),
                        Scalar::to_f64(pw),
                    ));
                }
            }
            if p.n() >= 2 {
                out.checks += 1;
                let squares: Vec<BigRational> = table.row(1).iter().map(|v| v * v).collect();
                let direct = weighted(&squares) - &powers[1] * &powers[1];
                let closed = variance_phi1_kstep(p, k).value;
                if direct != closed {
                    out.failures.push(failure(
                        "kstep-variance",
                        p,
                        Some(k),
                        Scalar::to_f64(&direct),
                        Scalar::to_f64(&closed),
                    ));
                }
            }
        }
        Ok(out)
    });
    let mut out = SuiteOutcome::default();
    for r in results {
        out.absorb(r?);
    }
    Ok(out)
}

/// `Var_{nu^{*k}}(phi_1) <= 1/n` wherever `(n-2)(q-1) >= 2`.
pub fn verify_variance_bound(
    n_max: u32,
    qs: &[u32],
    k_max: u64,
    exec: Exec,
) -> Result<SuiteOutcome> {
    let cells = grid(1, n_max, qs)?;
    let results = par::map(exec, &cells, |p| {
        let mut out = SuiteOutcome::default();
        for k in 0..=k_max {
            let r = variance_phi1_kstep(p, k);
            if !r.applies {
                out.skipped += 1;
                continue;
            }
            out.checks += 1;
            if !r.bound_holds {
                out.failures.push(failure(
                    "variance-bound",
                    p,
                    Some(k),
                    Scalar::to_f64(&r.value),
                    Scalar::to_f64(&r.bound),
                ));
            }
        }
        out
    });
    let mut out = SuiteOutcome::default();
    for r in results {
        out.absorb(r);
    }
    Ok(out)
}

/// Named pieces of the lemma suite, in the order they run.
pub fn verify_lemmas(g: &LemmaGrid, exec: Exec) -> Result<Vec<(&'static str, SuiteOutcome)>> {
    Ok(vec![
        ("exp-vs-abs", verify_lemma32(g.exp_points)),
        ("ratio-chains", verify_lemma35(g.ratio_m_max, exec)?),
        (
            "identities",
            verify_identities(g.identity_n_max, &g.qs, exec)?,
        ),
        (
            "kstep-expectations",
            verify_expectations(g.expectation_n_max, &g.qs, g.expectation_k_max, exec)?,
        ),
        (
            "variance-bound",
            verify_variance_bound(g.variance_n_max, &g.qs, g.variance_k_max, exec)?,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_small_grid() {
        let g = UpperGrid {
            n_min: 1,
            n_max: 8,
            qs: vec![2, 3, 5],
            k_max: 60,
        };
        let out = verify_upper(&g, Exec::Parallel).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
        assert_eq!(out.checks, 8 * 3 * 61);
    }

    #[test]
    fn majorant_rejects_q2() {
        let g = MajorantGrid {
            qs: vec![2, 3],
            ..MajorantGrid::default()
        };
        assert!(matches!(
            verify_majorant(&g, Exec::Sequential),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn majorant_small_grid() {
        let g = MajorantGrid {
            n_max: 12,
            qs: vec![3, 4, 5],
            ..MajorantGrid::default()
        };
        let run = verify_majorant(&g, Exec::Parallel).unwrap();
        assert!(run.outcome.passed(), "{:?}", run.outcome.failures);
        // q = 3 skips n < 3, q = 4 skips n = 1
        assert_eq!(run.outcome.skipped, 3 * 24);
        assert_eq!(run.reports.len() as u64, run.outcome.checks);
    }

    #[test]
    fn exact_rounding_only_integer_schedules() {
        let g = MajorantGrid {
            n_max: 10,
            qs: vec![5],
            cs: vec![0.5, 1.0],
            rounding: Rounding::Exact,
            backend: None,
            n_min: 1,
        };
        let run = verify_majorant(&g, Exec::Sequential).unwrap();
        assert!(run.outcome.passed());
        assert_eq!(run.outcome.checks + run.outcome.skipped, 20);
    }

    #[test]
    fn sweep_and_parallel_agree() {
        let cfg = MinorantSweepConfig {
            n_values: (5..=60).collect(),
            c: 1.0,
            ..MinorantSweepConfig::default()
        };
        let a = minorant_sweep(&cfg, Exec::Sequential).unwrap();
        let b = minorant_sweep(&cfg, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a
            .outcome
            .failures
            .iter()
            .all(|f| f.check == "minorant-no-threshold"));
    }

    #[test]
    fn lemma_suite_small() {
        let g = LemmaGrid {
            exp_points: 1000,
            ratio_m_max: 20,
            identity_n_max: 8,
            qs: vec![2, 3, 4],
            expectation_n_max: 5,
            expectation_k_max: 12,
            variance_n_max: 8,
            variance_k_max: 40,
        };
        for (name, out) in verify_lemmas(&g, Exec::Parallel).unwrap() {
            assert!(out.passed(), "{name}: {:?}", out.failures);
            assert!(out.checks > 0, "{name}");
        }
    }

    #[test]
    fn linspace_ends() {
        let xs = linspace(-1.0, 2.0, 4);
        assert_eq!(xs, vec![-1.0, 0.0, 1.0, 2.0]);
    }
}
