// SPDX-License-Identifier: Apache-2.0

//! TV profiles along a k-grid, with every bound evaluated alongside.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::bounds::{
    hora_limit, majorant, minorant, upper_bound_lemma_rhs, upper_bound_lemma_rhs_f64,
    CutoffSchedule, MajorantRegime, Side,
};
use crate::error::{Error, Result};
use crate::format::g17;
use crate::oracle::Trajectory;
use crate::scalar::{Backend, Scalar};
use crate::scheme::SchemeParams;

pub const CSV_HEADER: &str = "k,c_equiv,tv_exact,ub_lemma,majorant,minorant,hora_plus,hora_minus";

/// One row of a profile. Columns that do not apply at this `k` are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub k: u64,
    /// Offset at which the cutoff schedule passes through `k`.
    pub c_equiv: f64,
    pub tv_exact: f64,
    /// Square root of the upper-bound-lemma RHS.
    pub ub_lemma: Option<f64>,
    /// Square root of the regime's majorant at `c_equiv`, when `c_equiv > 0`.
    pub majorant: Option<f64>,
    /// `1 - (4q + b) e^{-c}` at `c = -c_equiv`, when `0 <= c <= log n(q-1)`.
    pub minorant: Option<f64>,
    /// `f_+(c_equiv)` on the far side of the cutoff, `c_equiv >= 0`.
    pub hora_plus: Option<f64>,
    /// `f_-(-c_equiv)` on the near side, `c_equiv <= 0`.
    pub hora_minus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub n: u32,
    pub q: u32,
    pub backend: Backend,
    /// `b` used in the minorant column.
    pub b: f64,
    pub rows: Vec<ProfileRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub k_min: u64,
    pub k_max: u64,
    pub k_step: u64,
    pub backend: Backend,
    pub b: f64,
    pub bit_cap: u64,
}

impl ProfileSpec {
    pub fn new(k_min: u64, k_max: u64, backend: Backend) -> Self {
        ProfileSpec {
            k_min,
            k_max,
            k_step: 1,
            backend,
            b: 0.0,
            bit_cap: crate::oracle::DEFAULT_BIT_CAP,
        }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn compute_profile(params: &SchemeParams, spec: &ProfileSpec) -> Result<Profile> {
    if spec.k_min > spec.k_max || spec.k_step == 0 {
        return Err(Error::ParameterDomain(format!(
            "need k_min <= k_max and k_step >= 1, got {}..={} step {}",
            spec.k_min, spec.k_max, spec.k_step
        )));
    }
    if !(spec.b >= 0.0) {
        return Err(Error::ParameterDomain(format!(
            "b must be >= 0, got {}",
            spec.b
        )));
    }
    let schedule = CutoffSchedule::new(params);
    let regime = MajorantRegime::for_params(params).ok();
    let log_deg = schedule.log_degree();
    let mut traj = Trajectory::with_bit_cap(params, spec.backend, spec.bit_cap);
    let mut rows = Vec::new();
    let mut k = spec.k_min;
    loop {
        traj.advance_to(k)?;
        let c = schedule.c_equiv(k);
        let ub = match spec.backend {
            Backend::Exact => Scalar::to_f64(&upper_bound_lemma_rhs(params, k)),
            Backend::Float => upper_bound_lemma_rhs_f64(params, k),
        };
        rows.push(ProfileRow {
            k,
            c_equiv: c,
            tv_exact: traj.tv(),
            ub_lemma: finite(ub.sqrt()),
            majorant: regime.filter(|_| c > 0.0).map(|r| majorant(r, c).sqrt()),
            minorant: (0.0..=log_deg)
                .contains(&-c)
                .then(|| minorant(params.q(), spec.b, -c)),
            hora_plus: (c >= 0.0).then(|| hora_limit(c, Side::Plus)),
            hora_minus: (c <= 0.0).then(|| hora_limit(-c, Side::Minus)),
        });
        match k.checked_add(spec.k_step) {
            Some(next) if next <= spec.k_max => k = next,
            _ => break,
        }
    }
    Ok(Profile {
        n: params.n(),
        q: params.q(),
        backend: spec.backend,
        b: spec.b,
        rows,
    })
}

fn cell(x: Option<f64>) -> String {
    x.map(g17).unwrap_or_default()
}

/// CSV with `\n` line endings; absent values are empty cells.
pub fn write_csv<W: Write>(profile: &Profile, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &profile.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k,
            g17(r.c_equiv),
            g17(r.tv_exact),
            cell(r.ub_lemma),
            cell(r.majorant),
            cell(r.minorant),
            cell(r.hora_plus),
            cell(r.hora_minus)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::make_scheme;

    #[test]
    fn small_profile() {
        let p = make_scheme(2, 3).unwrap();
        let prof = compute_profile(&p, &ProfileSpec::new(0, 10, Backend::Exact)).unwrap();
        assert_eq!(prof.rows.len(), 11);
        assert_eq!(g17(prof.rows[2].tv_exact), "0.19444444444444445");
        assert!(prof.rows.windows(2).all(|w| w[0].k < w[1].k));
        for r in &prof.rows {
            assert!(r.tv_exact <= r.ub_lemma.unwrap() + 1e-15);
            assert!((0.0..=1.0).contains(&r.tv_exact));
        }
        let mut buf = Vec::new();
        write_csv(&prof, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(text.lines().count(), 12);
        // no majorant theorem covers n = 2, q = 3
        assert!(text.lines().nth(3).unwrap().contains(",,"));
    }

    #[test]
    fn backends_agree() {
        let p = make_scheme(12, 4).unwrap();
        let mut spec = ProfileSpec::new(0, 60, Backend::Exact);
        spec.k_step = 7;
        let e = compute_profile(&p, &spec).unwrap();
        spec.backend = Backend::Float;
        let f = compute_profile(&p, &spec).unwrap();
        for (a, b) in e.rows.iter().zip(&f.rows) {
            assert!((a.tv_exact - b.tv_exact).abs() < 1e-13);
            let (ua, ub) = (a.ub_lemma.unwrap(), b.ub_lemma.unwrap());
            assert!((ua - ub).abs() <= 1e-12 * ua);
        }
    }

    #[test]
    fn bad_ranges() {
        let p = make_scheme(3, 3).unwrap();
        assert!(compute_profile(&p, &ProfileSpec::new(5, 4, Backend::Exact)).is_err());
        let mut s = ProfileSpec::new(0, 4, Backend::Exact);
        s.k_step = 0;
        assert!(compute_profile(&p, &s).is_err());
    }
}
