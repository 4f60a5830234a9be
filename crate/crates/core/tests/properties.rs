// SPDX-License-Identifier: Apache-2.0

use hamming_cutoff::bounds::{majorant, CutoffSchedule, MajorantRegime};
use hamming_cutoff::krawtchouk::{phi_binomial, phi_row_recurrence};
use hamming_cutoff::montecarlo::{simulate, SimConfig};
use hamming_cutoff::oracle::{
    kstep_oracle, kstep_oracle_squaring, ExactChain, FloatChain, Trajectory,
};
use hamming_cutoff::scheme::class_weights;
use hamming_cutoff::{make_scheme, Backend, Scalar};
use num_traits::One;
use proptest::prelude::*;

fn small() -> impl Strategy<Value = (u32, u32)> {
    (1u32..=12, 2u32..=7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn squaring_matches_stepping((n, q) in small(), k in 0u64..40) {
        let p = make_scheme(n, q).unwrap();
        prop_assert_eq!(kstep_oracle(&p, k).unwrap(), kstep_oracle_squaring(&p, k));
    }

    #[test]
    fn exact_masses_are_a_distribution((n, q) in small(), k in 0u64..60) {
        let d = kstep_oracle(&make_scheme(n, q).unwrap(), k).unwrap();
        prop_assert!(d.total_mass().is_one());
        prop_assert!(d.mass().iter().all(|m| !m.is_negative_val()));
    }

    #[test]
    fn float_chain_tracks_exact((n, q) in small(), k in 0u64..80) {
        let p = make_scheme(n, q).unwrap();
        let mut e = ExactChain::new(&p);
        let mut f = FloatChain::new(&p);
        e.advance_to(k).unwrap();
        f.advance_to(k);
        for (a, b) in e.distribution().mass().iter().zip(f.mass()) {
            prop_assert!((a.to_f64() - b).abs() < 1e-13);
        }
    }

    #[test]
    fn tv_is_nonincreasing((n, q) in (1u32..=10, 3u32..=6), k in 0u64..50) {
        let p = make_scheme(n, q).unwrap();
        let mut t = Trajectory::new(&p, Backend::Exact);
        t.advance_to(k).unwrap();
        let before = t.tv_exact().unwrap();
        t.advance_to(k + 1).unwrap();
        prop_assert!(t.tv_exact().unwrap() <= before);
    }

    #[test]
    fn recurrence_rows_match_closed_form(n in 1u32..=80, q in 2u32..=8, jf in 0.0f64..1.0) {
        let p = make_scheme(n, q).unwrap();
        let j = (jf * f64::from(n + 1)) as usize;
        let w = class_weights(&p);
        let d_j = w.fraction::<f64>(j) * f64::from(q).powi(n as i32);
        let row = phi_row_recurrence::<f64>(&p, j).unwrap();
        for (l, v) in row.iter().enumerate() {
            let exact: f64 = phi_binomial(&p, j, l).unwrap();
            // compare in the orthonormal scaling, where every entry is at most 1
            let scale = (w.fraction::<f64>(l) * d_j).sqrt();
            prop_assert!(((v - exact) * scale).abs() < 1e-11, "j={} l={}", j, l);
        }
    }

    #[test]
    fn majorant_decreases_in_c(c in 0.01f64..8.0, dc in 0.01f64..2.0) {
        for regime in [MajorantRegime::QAtLeast5, MajorantRegime::Q3, MajorantRegime::Q4] {
            prop_assert!(majorant(regime, c + dc) < majorant(regime, c));
        }
    }

    #[test]
    fn schedule_round_trips(n in 1u32..500, q in 2u32..10, k in 0u64..100_000) {
        let s = CutoffSchedule::new(&make_scheme(n, q).unwrap());
        prop_assert!((s.k_real(s.c_equiv(k)) - k as f64).abs() < 1e-9 * (k as f64).max(1.0));
    }
}

#[test]
fn sampling_ignores_worker_count() {
    let p = make_scheme(7, 4).unwrap();
    let one = simulate(&SimConfig::new(p, 30, 20_000, 3)).unwrap();
    let many = simulate(&SimConfig::new(p, 30, 20_000, 3).with_streams(5)).unwrap();
    assert_eq!(one.counts, many.counts);
    let other = simulate(&SimConfig::new(p, 30, 20_000, 4)).unwrap();
    assert_ne!(one.counts, other.counts);
}

#[test]
fn stationary_limit() {
    let p = make_scheme(6, 3).unwrap();
    let d = kstep_oracle(&p, 400).unwrap();
    let w = class_weights(&p);
    for l in 0..p.classes() {
        let pi: f64 = w.fraction(l);
        assert!((d.mass()[l].to_f64() - pi).abs() < 1e-12);
    }
}
