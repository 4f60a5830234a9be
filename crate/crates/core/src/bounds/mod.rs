// SPDX-License-Identifier: Apache-2.0

//! Majorants and minorants of the total-variation distance, and the
//! machinery that checks them against exact values.
//!
//! All bounds are parameterized by the window offset `c` through the
//! cutoff schedule `k = (n(q-1)/2q) (log n(q-1) + c)`.

mod lemmas;
pub mod suites;

pub use lemmas::{
    lemma32_check, lemma32_regime, lemma34_bound, lemma34_l_max, lemma34_sum,
    lemma34_sum_within_bound, lemma35_ratio_check, Lemma32Regime, Lemma35Case, Lemma35Report,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krawtchouk::phi_hypergeometric;
use crate::oracle::Trajectory;
use crate::scalar::{Backend, Scalar};
use crate::scheme::{class_weights, SchemeParams};
use crate::spectral::spectrum;

/// `a_n = b_n log n(q-1)` and `b_n = n(q-1)/(2q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSchedule {
    pub params: SchemeParams,
    pub a_n: f64,
    pub b_n: f64,
}

impl CutoffSchedule {
    pub fn new(params: &SchemeParams) -> Self {
        let deg = params.degree() as f64;
        let b_n = deg / (2.0 * f64::from(params.q()));
        CutoffSchedule {
            params: *params,
            a_n: b_n * deg.ln(),
            b_n,
        }
    }

    pub fn log_degree(&self) -> f64 {
        (self.params.degree() as f64).ln()
    }

    /// Real-valued step count `a_n + c b_n`.
    pub fn k_real(&self, c: f64) -> f64 {
        self.b_n * (self.log_degree() + c)
    }

    /// Offset `c` at which the schedule passes through step `k`.
    pub fn c_equiv(&self, k: u64) -> f64 {
        k as f64 / self.b_n - self.log_degree()
    }

    pub fn k_rounded(&self, c: f64, rounding: Rounding) -> Result<u64> {
        let k = self.k_real(c);
        let rounded = match rounding {
            Rounding::Ceil => k.ceil(),
            Rounding::Floor => k.floor(),
            Rounding::Exact => {
                let r = k.round();
                if (k - r).abs() > 1e-9 * r.max(1.0) {
                    return Err(Error::NotApplicable(format!(
                        "schedule {k} is not an integer"
                    )));
                }
                r
            }
        };
        if rounded < 0.0 {
            return Err(Error::ParameterDomain(format!(
                "negative step count at c = {c}"
            )));
        }
        Ok(rounded as u64)
    }
}

/// How a real-valued schedule is turned into a step count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    Ceil,
    Floor,
    /// Only accept schedules that already land on an integer.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "upper-lemma")]
    UpperLemma,
    #[serde(rename = "thm-q5")]
    ThmQ5,
    #[serde(rename = "thm-q3")]
    ThmQ3,
    #[serde(rename = "thm-q4")]
    ThmQ4,
    #[serde(rename = "minorant")]
    Minorant,
    #[serde(rename = "hora-limit")]
    HoraLimit,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::UpperLemma => "upper-lemma",
            BoundKind::ThmQ5 => "thm-q5",
            BoundKind::ThmQ3 => "thm-q3",
            BoundKind::ThmQ4 => "thm-q4",
            BoundKind::Minorant => "minorant",
            BoundKind::HoraLimit => "hora-limit",
        }
    }
}

/// Outcome of checking one bound at one `(k, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: u32,
    pub q: u32,
    pub k: u64,
    pub c: f64,
    pub tv_exact: f64,
    /// For majorants this bounds `tv^2`; for the minorant it bounds `tv`.
    pub bound_value: f64,
    pub satisfied: bool,
    /// The bound is trivially true (a `tv^2` majorant `>= 1` or a minorant `<= 0`).
    pub vacuous: bool,
    pub which: BoundKind,
}

/// `(1/4) sum_{j>=1} d_j lambda_j^{2k}`, exactly.
pub fn upper_bound_lemma_rhs(params: &SchemeParams, k: u64) -> BigRational {
    let spec = spectrum(params);
    let sum: BigRational = spec
        .lambda
        .iter()
        .zip(&spec.mult)
        .skip(1)
        .map(|(lam, d)| lam.powu(2 * k) * BigRational::from_integer(d.clone()))
        .sum();
    sum / BigRational::from_integer(BigInt::from(4))
}

/// Float version of [`upper_bound_lemma_rhs`] through a log-sum-exp, usable
/// when `d_j` overflows. Returns `+inf` when the true value does.
pub fn upper_bound_lemma_rhs_f64(params: &SchemeParams, k: u64) -> f64 {
    let n = params.n() as usize;
    let deg = params.degree() as f64;
    let q = f64::from(params.q());
    let ln_qm1 = (q - 1.0).ln();
    let mut ln_binom = 0.0f64;
    let mut logs = Vec::with_capacity(n);
    for j in 1..=n {
        ln_binom += ((n - j + 1) as f64).ln() - (j as f64).ln();
        let lam = 1.0 - j as f64 * q / deg;
        let ln_pow = if k == 0 {
            0.0
        } else if lam == 0.0 {
            continue;
        } else {
            2.0 * k as f64 * lam.abs().ln()
        };
        logs.push(ln_binom + j as f64 * ln_qm1 + ln_pow);
    }
    let Some(max) = logs.iter().cloned().reduce(f64::max) else {
        return 0.0;
    };
    let s = crate::scalar::neumaier_sum(logs.iter().map(|x| (x - max).exp()));
    (max + s.ln() - 4f64.ln()).exp()
}

/// Which majorant theorem covers a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MajorantRegime {
    /// `q >= 5`, constant `1/4`.
    QAtLeast5,
    /// `q = 3`, `n >= 3`, constant `5/2`.
    Q3,
    /// `q = 4`, `n >= 2`, constant `9/4`.
    Q4,
}

impl MajorantRegime {
    pub fn for_params(params: &SchemeParams) -> Result<Self> {
        match (params.q(), params.n()) {
            (2, _) => Err(Error::NotApplicable(
                "no majorant theorem for q = 2".to_string(),
            )),
            (3, n) if n >= 3 => Ok(MajorantRegime::Q3),
            (4, n) if n >= 2 => Ok(MajorantRegime::Q4),
            (q, _) if q >= 5 => Ok(MajorantRegime::QAtLeast5),
            (q, n) => Err(Error::NotApplicable(format!(
                "q = {q} theorem needs a larger n than {n}"
            ))),
        }
    }

    pub fn constant(self) -> f64 {
        match self {
            MajorantRegime::QAtLeast5 => 0.25,
            MajorantRegime::Q3 => 2.5,
            MajorantRegime::Q4 => 2.25,
        }
    }

    pub fn kind(self) -> BoundKind {
        match self {
            MajorantRegime::QAtLeast5 => BoundKind::ThmQ5,
            MajorantRegime::Q3 => BoundKind::ThmQ3,
            MajorantRegime::Q4 => BoundKind::ThmQ4,
        }
    }
}

/// Majorant of `tv^2`: `C (e^{e^{-c}} - 1)` with the regime's constant `C`.
pub fn majorant(regime: MajorantRegime, c: f64) -> f64 {
    regime.constant() * (-c).exp().exp_m1()
}

/// Picks the exact backend while exact trajectories stay cheap.
pub fn auto_backend(params: &SchemeParams) -> Backend {
    if params.n() <= 30 {
        Backend::Exact
    } else {
        Backend::Float
    }
}

pub fn check_majorant(params: &SchemeParams, c: f64, rounding: Rounding) -> Result<BoundReport> {
    check_majorant_with(params, c, rounding, auto_backend(params))
}

pub fn check_majorant_with(
    params: &SchemeParams,
    c: f64,
    rounding: Rounding,
    backend: Backend,
) -> Result<BoundReport> {
    if !(c > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "majorant needs c > 0, got {c}"
        )));
    }
    let regime = MajorantRegime::for_params(params)?;
    let k = CutoffSchedule::new(params).k_rounded(c, rounding)?;
    let mut traj = Trajectory::new(params, backend);
    traj.advance_to(k)?;
    Ok(majorant_report(params, regime, k, c, traj.tv()))
}

pub(crate) fn majorant_report(
    params: &SchemeParams,
    regime: MajorantRegime,
    k: u64,
    c: f64,
    tv: f64,
) -> BoundReport {
    let bound = majorant(regime, c);
    BoundReport {
        n: params.n(),
        q: params.q(),
        k,
        c,
        tv_exact: tv,
        bound_value: bound,
        satisfied: tv * tv <= bound,
        vacuous: bound >= 1.0,
        which: regime.kind(),
    }
}

/// `1 - (4q + b) e^{-c}`; with `b = 0` this is the asymptotic form.
pub fn minorant(q: u32, b: f64, c: f64) -> f64 {
    1.0 - (4.0 * f64::from(q) + b) * (-c).exp()
}

fn check_minorant_domain(params: &SchemeParams, c0: f64, b: f64, c: f64) -> Result<()> {
    let log_deg = CutoffSchedule::new(params).log_degree();
    if !(b >= 0.0) || !(c0 > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "minorant needs b >= 0 and c0 > 0, got b = {b}, c0 = {c0}"
        )));
    }
    if !(0.0..=c0.min(log_deg)).contains(&c) {
        return Err(Error::ParameterDomain(format!(
            "minorant needs 0 <= c <= min(c0, log n(q-1)) = {}, got {c}",
            c0.min(log_deg)
        )));
    }
    Ok(())
}

/// Step count `floor(a_n - c b_n)` used by the minorant.
pub fn minorant_k(params: &SchemeParams, c: f64) -> u64 {
    CutoffSchedule::new(params)
        .k_rounded(-c, Rounding::Floor)
        .unwrap_or(0)
}

pub fn check_minorant(params: &SchemeParams, c0: f64, b: f64, c: f64) -> Result<BoundReport> {
    check_minorant_with(params, c0, b, c, auto_backend(params))
}

pub fn check_minorant_with(
    params: &SchemeParams,
    c0: f64,
    b: f64,
    c: f64,
    backend: Backend,
) -> Result<BoundReport> {
    check_minorant_domain(params, c0, b, c)?;
    let k = minorant_k(params, c);
    let mut traj = Trajectory::new(params, backend);
    traj.advance_to(k)?;
    Ok(minorant_report(params, k, b, c, traj.tv()))
}

pub(crate) fn minorant_report(
    params: &SchemeParams,
    k: u64,
    b: f64,
    c: f64,
    tv: f64,
) -> BoundReport {
    let bound = minorant(params.q(), b, c);
    BoundReport {
        n: params.n(),
        q: params.q(),
        k,
        c,
        tv_exact: tv,
        bound_value: bound,
        satisfied: tv >= bound,
        vacuous: bound <= 0.0,
        which: BoundKind::Minorant,
    }
}

/// Intermediate quantities of the second-moment lower bound.
///
/// `B = {x : |phi_1(x)| < beta / sqrt(n)}` is a union of distance classes,
/// so both probabilities are exact class sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorantDiagnostics {
    pub k: u64,
    pub beta: f64,
    pub pi_b: f64,
    pub nu_b: f64,
    pub markov_lb: f64,
    pub chebyshev_ub: f64,
    /// `E_{nu^{*k}}(phi_1) = lambda_1^k`.
    pub mean_phi1: f64,
    /// `mean_phi1 >= 2 beta / sqrt(n)`, the condition under which the Chebyshev step applies.
    pub chebyshev_applies: bool,
    pub tv: f64,
}

/// Slack for float comparisons of class sums.
pub const DIAGNOSTIC_TOL: f64 = 1e-12;

impl MinorantDiagnostics {
    pub fn markov_holds(&self) -> bool {
        self.pi_b >= self.markov_lb - DIAGNOSTIC_TOL
    }

    pub fn chebyshev_holds(&self) -> bool {
        !self.chebyshev_applies || self.nu_b <= self.chebyshev_ub + DIAGNOSTIC_TOL
    }

    /// `tv >= pi(B) - nu(B)`.
    pub fn event_bound_holds(&self) -> bool {
        self.tv >= self.pi_b - self.nu_b - DIAGNOSTIC_TOL
    }
}

pub fn minorant_beta(q: u32, b: f64, c: f64) -> f64 {
    let q = f64::from(q);
    (q / ((4.0 * q + b) * (q - 1.0))).sqrt() * (c / 2.0).exp()
}

pub fn minorant_diagnostics(
    params: &SchemeParams,
    k: u64,
    b: f64,
    c: f64,
) -> Result<MinorantDiagnostics> {
    minorant_diagnostics_with(params, k, b, c, auto_backend(params))
}

pub fn minorant_diagnostics_with(
    params: &SchemeParams,
    k: u64,
    b: f64,
    c: f64,
    backend: Backend,
) -> Result<MinorantDiagnostics> {
    check_minorant_domain(params, f64::INFINITY, b, c)?;
    let mut traj = Trajectory::new(params, backend);
    traj.advance_to(k)?;
    Ok(diagnostics_from(
        params,
        k,
        b,
        c,
        &traj.masses_f64(),
        traj.uniform_f64(),
        traj.tv(),
    ))
}

pub(crate) fn diagnostics_from(
    params: &SchemeParams,
    k: u64,
    b: f64,
    c: f64,
    mass: &[f64],
    uniform: &[f64],
    tv: f64,
) -> MinorantDiagnostics {
    let n = f64::from(params.n());
    let q = params.q();
    let deg = params.degree() as f64;
    let beta = minorant_beta(q, b, c);
    let threshold_sq = beta * beta / n;
    let in_b = |l: usize| {
        let phi1 = 1.0 - l as f64 * f64::from(q) / deg;
        phi1 * phi1 < threshold_sq
    };
    let pi_b =
        crate::scalar::neumaier_sum((0..mass.len()).filter(|&l| in_b(l)).map(|l| uniform[l]));
    let nu_b = crate::scalar::neumaier_sum((0..mass.len()).filter(|&l| in_b(l)).map(|l| mass[l]));
    let mean_phi1 = (1.0 - f64::from(q) / deg).powu(k);
    MinorantDiagnostics {
        k,
        beta,
        pi_b,
        nu_b,
        markov_lb: 1.0 - 1.0 / (beta * beta * (f64::from(q) - 1.0)),
        chebyshev_ub: 1.0 / (beta * beta),
        mean_phi1,
        chebyshev_applies: mean_phi1 >= 2.0 * beta / n.sqrt(),
        tv,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

/// Limit profile `f_pm(c) = erf(e^{-+c/2} / (2 sqrt 2))`.
pub fn hora_limit(c: f64, side: Side) -> f64 {
    let e = match side {
        Side::Plus => (-c / 2.0).exp(),
        Side::Minus => (c / 2.0).exp(),
    };
    libm::erf(e / (2.0 * std::f64::consts::SQRT_2))
}

/// Exact check of `tv^2 <= (1/4) sum_{j>=1} d_j lambda_j^{2k}` for every
/// `k in 0..=k_max`, carried out over the integers.
///
/// With `D = (n(q-1))^k`, `L = 2 D q^n tv` and `N_j = n(q-1) - jq`, the
/// inequality reads `L^2 <= q^{2n} sum_{j>=1} d_j N_j^{2k}`. Returns the
/// steps at which it fails, with both sides as floats.
pub fn upper_lemma_violations(params: &SchemeParams, k_max: u64) -> Result<Vec<(u64, f64, f64)>> {
    let w = class_weights(params);
    let spec = spectrum(params);
    let deg = BigInt::from(params.degree());
    let numer_sq: Vec<BigInt> = spec
        .lambda
        .iter()
        .map(|lam| {
            let v = lam * BigRational::from_integer(deg.clone());
            let v = v.to_integer();
            &v * &v
        })
        .collect();
    let total_sq = &w.total * &w.total;
    let mut powers: Vec<BigInt> = vec![BigInt::one(); params.classes()];
    let mut chain = crate::oracle::ExactChain::with_bit_cap(params, u64::MAX);
    let mut out = Vec::new();
    for k in 0..=k_max {
        if k > 0 {
            chain.step()?;
            for (p, nsq) in powers.iter_mut().zip(&numer_sq) {
                *p *= nsq;
            }
        }
        let l1 = chain.scaled_l1_to_uniform(&w);
        let lhs = &l1 * &l1;
        let rhs_sum: BigInt = powers
            .iter()
            .zip(&spec.mult)
            .skip(1)
            .map(|(p, d)| p * d)
            .sum();
        let rhs = &total_sq * &rhs_sum;
        if lhs > rhs {
            let scale = BigRational::from_integer(
                BigInt::from(4) * chain.denominator() * chain.denominator() * &total_sq,
            );
            let lhs_f = Scalar::to_f64(&(BigRational::from_integer(lhs) / &scale));
            let rhs_f = Scalar::to_f64(&(BigRational::from_integer(rhs) / &scale));
            out.push((k, lhs_f, rhs_f));
        }
    }
    Ok(out)
}

/// `phi_1(l)` in exact arithmetic, `1 - lq/(n(q-1))`.
pub fn phi1_exact(params: &SchemeParams, l: usize) -> Result<BigRational> {
    phi_hypergeometric(params, 1, l)
}
