mod common;

use std::cell::Cell;

use common::{mask_to_support, ref_codeword_basis};
use errfloor::boundary::{bisect, probe_input, squared_distance, Bracket};
use errfloor::construct::{peg_regular_with_girth, random_girth6};
use errfloor::{
    probe_boundary, q_contribution, rank_catalog, run_search, select_shift_points, BitPattern, BoundaryProbe,
    ChannelModel, DecoderConfig, SearchParams, Selection,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn bisection_brackets_a_synthetic_threshold(
        l_min in 0.0f64..2.0,
        width in 0.5f64..4.0,
        p in 1u32..30,
        frac in -0.3f64..1.3,
        a in 1usize..40,
    ) {
        let probe = BoundaryProbe { l_min, l_max: l_min + width, p };
        let theta = l_min + frac * width;
        let calls = Cell::new(0u32);
        let r = bisect(a, &probe, |eps| {
            calls.set(calls.get() + 1);
            Ok(eps >= theta)
        }).unwrap();
        prop_assert_eq!(calls.get(), p + r.endpoint_decodes);
        prop_assert_eq!(r.bisection_decodes, p);
        prop_assert_eq!(r.d_e2, a as f64 * r.epsilon_star * r.epsilon_star);
        if theta <= probe.l_min {
            prop_assert_eq!(r.bracket, Bracket::ErrorAtMin);
            prop_assert_eq!(r.endpoint_decodes, 1);
            prop_assert_eq!(r.epsilon_star, probe.l_min);
        } else if theta > probe.l_max {
            prop_assert_eq!(r.bracket, Bracket::NoErrorAtMax);
            prop_assert_eq!(r.endpoint_decodes, 2);
            prop_assert_eq!(r.epsilon_star, probe.l_max);
        } else {
            prop_assert_eq!(r.bracket, Bracket::Bracketed);
            prop_assert_eq!(r.endpoint_decodes, 2);
            prop_assert!((r.epsilon_star - theta).abs() <= probe.resolution() / 2.0 + 1e-12);
        }
    }
}

#[test]
fn squared_distance_example_is_exact() {
    assert_eq!(squared_distance(10, 1.5), 22.5);
    let probe = BoundaryProbe::default();
    assert_eq!(probe.resolution(), 2.5 / 1024.0);
}

#[test]
fn probe_input_levels() {
    let ts = BitPattern::new(6, vec![1, 4]).unwrap();
    assert_eq!(probe_input(&ts, 1.25), vec![1.0, -0.25, 1.0, 1.0, -0.25, 1.0]);
}

#[test]
fn q_proxy_reference_value() {
    // Es/N0 = 0.5 at 0 dB and rate 1/2, so 2·9·0.5 = 9 and Q(3).
    let ch = ChannelModel::new(0.0, 0.5).unwrap();
    let q3 = 1.349_898_031_630_094_5e-3;
    assert!((q_contribution(9.0, &ch) / q3 - 1.0).abs() < 1e-9);
}

#[test]
fn codeword_directions_fail_by_the_midpoint() {
    // Flipping the sign pattern of a codeword maps decoding at ε to decoding
    // at 2 - ε, so a decoder correct below 1 must fail just above 1.
    let mut checked = 0;
    for seed in 0..20u64 {
        let code = random_girth6(12, &[3; 20], 5, seed, 5000).unwrap();
        let basis = ref_codeword_basis(code.col_adjacency(), code.m());
        let ch = ChannelModel::new(4.0, 0.5).unwrap();
        let probe = BoundaryProbe { l_min: 0.5, l_max: 3.5, p: 12 };
        let cfg = DecoderConfig::default();
        for &w in basis.iter().take(3) {
            let ts = BitPattern::new(code.n(), mask_to_support(w, code.n())).unwrap();
            let r = probe_boundary(&code, &ts, &probe, &cfg, &ch).unwrap();
            assert_ne!(r.bracket, Bracket::NoErrorAtMax);
            assert!(r.epsilon_star <= 1.0 + probe.resolution(), "eps* = {}", r.epsilon_star);
            checked += 1;
        }
    }
    assert!(checked >= 20);
}

#[test]
fn ranking_writes_back_and_is_thread_independent() {
    let code = peg_regular_with_girth(96, 3, 6, 6, 4, 50).unwrap();
    let params = SearchParams { epsilon1: 3.6, gamma: 0.8, eb_no_db: 5.0, ..Default::default() };
    let cfg = DecoderConfig::default();
    let mut catalog = run_search(&code, &params, &cfg).unwrap().catalog;
    // A short code fails on thousands of impulses; a slice keeps this quick.
    let keep: Vec<_> = catalog.entries.keys().step_by(40).cloned().collect();
    catalog.entries.retain(|p, _| keep.contains(p));
    assert!(catalog.len() > 100);
    let ch = ChannelModel::new(4.0, code.rate()).unwrap();
    let probe = BoundaryProbe::default();
    let run = |threads: usize| {
        let mut cat = catalog.clone();
        let r = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| rank_catalog(&mut cat, &probe, &cfg, &ch, &code).unwrap());
        (cat, r)
    };
    let (cat1, r1) = run(1);
    let (cat3, r3) = run(3);
    assert_eq!(r1.class_csv(), r3.class_csv());
    assert_eq!(r1.entry_csv(), r3.entry_csv());
    assert_eq!(cat1, cat3);

    for e in &r1.entries {
        assert_eq!(cat1.entries[&e.pattern].d_e2, Some(e.result.d_e2));
        let direct = probe_boundary(&code, &e.pattern, &probe, &cfg, &ch).unwrap();
        assert_eq!(direct, e.result);
        if e.result.bracket != Bracket::ErrorAtMin {
            assert!(e.result.d_e2 >= e.class.a as f64 * probe.l_min * probe.l_min);
        }
    }
    for row in &r1.classes {
        let members: Vec<f64> = r1
            .entries
            .iter()
            .filter(|e| (e.class.a, e.class.b) == (row.a, row.b) && e.result.bracketed())
            .map(|e| e.result.d_e2)
            .collect();
        if let Some(min) = row.min_d_e2 {
            assert_eq!(min, members.iter().cloned().fold(f64::INFINITY, f64::min));
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            assert!((row.mean_d_e2.unwrap() - mean).abs() < 1e-9);
        } else {
            assert!(members.is_empty());
        }
    }
    let mins: Vec<f64> = r1.classes.iter().filter_map(|r| r.min_d_e2).collect();
    assert!(mins.windows(2).all(|w| w[0] <= w[1]));

    let cap = select_shift_points(&r1.entries, Selection::Cap(5)).unwrap();
    assert_eq!(cap.len(), 5.min(r1.entries.iter().filter(|e| e.result.bracket != Bracket::NoErrorAtMax).count()));
    assert!(cap.windows(2).all(|w| w[0].result.d_e2 <= w[1].result.d_e2));
    let t = cap.last().unwrap().result.d_e2 + 1e-9;
    let thr = select_shift_points(&r1.entries, Selection::Threshold(t)).unwrap();
    assert!(thr.len() >= cap.len() && thr.iter().all(|e| e.result.d_e2 < t));
    assert!(select_shift_points(&r1.entries, Selection::Threshold(0.0)).is_err());
}
