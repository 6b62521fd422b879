use errfloor::construct::peg_regular_with_girth;
use errfloor::sim::{adapt_density, is_estimate_with, log_weight, mc_estimate_with, HalfSpaceJudge, IsOptions};
use errfloor::stats::q_function;
use errfloor::{
    is_estimate, mc_estimate, probe_boundary, sample_biased, sample_nominal, weight, BitPattern, BoundaryProbe,
    ChannelModel, DecoderConfig, ISDensity, NoiseSource, SimRecord,
};
use proptest::prelude::*;

fn pattern(n: usize, s: &[usize]) -> BitPattern {
    BitPattern::new(n, s.to_vec()).unwrap()
}

/// Direct `f / ((1/M) Σ f_m)` with unnormalised Gaussians; fine for small n.
fn naive_weight(y: &[f64], d: &ISDensity) -> f64 {
    let g = |c: &[f64]| (-y.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (2.0 * d.sigma2)).exp();
    let f = g(&vec![1.0; d.n]);
    let mix: f64 = (0..d.m()).map(|m| g(&d.center(m))).sum::<f64>() / d.m() as f64;
    f / mix
}

fn toy_density(sigma2: f64, shift: f64) -> ISDensity {
    let ch = ChannelModel::from_sigma2(sigma2).unwrap();
    let centers = vec![pattern(12, &[0, 1, 2]), pattern(12, &[3, 4, 5, 6]), pattern(12, &[0, 7])];
    ISDensity::new(centers, shift, &ch).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weight_matches_direct_evaluation(trial in 0u64..10_000, sigma2 in 0.2f64..1.0, shift in 0.0f64..1.5) {
        let d = toy_density(sigma2, shift);
        let (y, _) = sample_biased(&NoiseSource::new(9), trial, &d);
        let w = weight(&y, &d).unwrap();
        let naive = naive_weight(&y, &d);
        prop_assert!((w / naive - 1.0).abs() < 1e-10, "{} vs {}", w, naive);
    }

    #[test]
    fn weight_does_not_depend_on_psi(trial in 0u64..10_000, psi in -50.0f64..50.0) {
        let mut d = toy_density(0.5, 1.0);
        let (y, _) = sample_biased(&NoiseSource::new(2), trial, &d);
        let w0 = weight(&y, &d).unwrap();
        d.psi = Some(psi);
        let w1 = weight(&y, &d).unwrap();
        prop_assert!((w1 / w0 - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn mean_weight_is_one() {
    let d = toy_density(0.5, 0.8);
    let noise = NoiseSource::new(77);
    let l = 100_000u64;
    let ws: Vec<f64> = (0..l).map(|t| weight(&sample_biased(&noise, t, &d).0, &d).unwrap()).collect();
    let mean = ws.iter().sum::<f64>() / l as f64;
    let var = ws.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / (l - 1) as f64;
    let se = (var / l as f64).sqrt();
    assert!((mean - 1.0).abs() <= 5.0 * se, "mean {mean}, se {se}");
    // The estimator reports the same running mean.
    let judge = HalfSpaceJudge { support: pattern(12, &[0, 1, 2]) };
    let est = is_estimate_with(&judge, &d, l / 3 + 1, &noise, IsOptions::default()).unwrap();
    let all: f64 = (0..est.trials).map(|t| weight(&sample_biased(&noise, t, &d).0, &d).unwrap()).sum();
    assert!((est.mean_weight - all / est.trials as f64).abs() < 1e-9);
}

#[test]
fn zero_shift_single_centre_reproduces_monte_carlo() {
    let code = peg_regular_with_girth(96, 3, 6, 6, 1, 50).unwrap();
    let ch = ChannelModel::new(2.0, code.rate()).unwrap();
    let cfg = DecoderConfig::default();
    let noise = NoiseSource::new(123);
    let d = ISDensity::new(vec![pattern(96, &[5])], 0.0, &ch).unwrap();
    let mc = mc_estimate(&code, &ch, 3000, &cfg, &noise).unwrap();
    let is = is_estimate(&code, &ch, &d, 3000, &cfg, &noise, IsOptions::default()).unwrap();
    assert!(mc.errors > 20);
    assert_eq!(is.hits, mc.errors);
    assert_eq!(is.events, mc.events);
    assert_eq!(is.p_f_hat, mc.p_f_hat);
    assert_eq!(is.p_b_hat, mc.p_b_hat);
    assert_eq!(is.mean_weight, 1.0);
    for t in 0..50 {
        assert_eq!(sample_biased(&noise, t, &d).0, sample_nominal(&noise, t, 96, &ch));
    }
}

#[test]
fn second_moment_recomputes_from_weight_log() {
    let d = toy_density(0.4, 1.0);
    let judge = HalfSpaceJudge { support: pattern(12, &[0, 1, 2]) };
    let noise = NoiseSource::new(5);
    let est = is_estimate_with(&judge, &d, 2000, &noise, IsOptions { log_weights: true }).unwrap();
    let log = est.weight_log.as_ref().unwrap();
    assert_eq!(log.len() as u64, est.hits);
    let l = est.trials as f64;
    let v: f64 = log.iter().map(|(_, w)| w * w).sum::<f64>() / l;
    let p: f64 = log.iter().map(|(_, w)| w).sum::<f64>() / l;
    assert!((v / est.v_hat - 1.0).abs() < 1e-12);
    assert!((p / est.p_f_hat - 1.0).abs() < 1e-12);
    for &(t, w) in log {
        let (y, _) = sample_biased(&noise, t, &d);
        assert_eq!(w, weight(&y, &d).unwrap());
        assert!(y[0] + y[1] + y[2] < 0.0);
    }
    assert_eq!(est.hits, est.intended_hits + est.other_center_hits + est.new_events.values().map(|t| t.count).sum::<u64>());
}

#[test]
fn half_space_probability_is_recovered() {
    // a = 3, σ² = 0.4: P = Q(√3/σ) ≈ 3.1e-3, checked by both estimators.
    let sigma2 = 0.4;
    let truth = q_function((3.0f64 / sigma2).sqrt());
    let ch = ChannelModel::from_sigma2(sigma2).unwrap();
    let judge = HalfSpaceJudge { support: pattern(12, &[0, 1, 2]) };
    let mc = mc_estimate_with(&judge, &ch, 200_000, &NoiseSource::new(1)).unwrap();
    assert!(mc.ci95.0 <= truth && truth <= mc.ci95.1, "{truth} not in {:?}", mc.ci95);
    let d = ISDensity::new(vec![pattern(12, &[0, 1, 2])], 1.0, &ch).unwrap();
    let is = is_estimate_with(&judge, &d, 20_000, &NoiseSource::new(2), IsOptions::default()).unwrap();
    assert!((is.p_f_hat / truth - 1.0).abs() < 0.05, "{} vs {truth}", is.p_f_hat);
    let (lo, hi) = is.ci95();
    assert!(lo <= truth && truth <= hi);
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let code = peg_regular_with_girth(96, 3, 6, 6, 1, 50).unwrap();
    let ch = ChannelModel::new(2.5, code.rate()).unwrap();
    let cfg = DecoderConfig::default();
    let d = ISDensity::new(vec![pattern(96, &[1, 2, 3, 4]), pattern(96, &[10, 20, 30])], 0.7, &ch).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let noise = NoiseSource::new(42);
            let mc = mc_estimate(&code, &ch, 1500, &cfg, &noise).unwrap();
            let is = is_estimate(&code, &ch, &d, 700, &cfg, &noise, IsOptions { log_weights: true }).unwrap();
            (SimRecord::from_mc(2.5, &mc).csv_row(), mc.events, SimRecord::from_is(2.5, &is).csv_row(), is.events, is.weight_log)
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn underflowing_psi_form_is_counted_not_fatal() {
    // With ψ = n/2 the sampled centre's exponent stays near zero; a badly
    // chosen ψ pushes every term below the double range, yet the
    // log-domain weight stays finite.
    let n = 50;
    let ch = ChannelModel::from_sigma2(0.5).unwrap();
    let mut d = ISDensity::new(vec![pattern(n, &[0, 1, 2])], 1.0, &ch).unwrap();
    let noise = NoiseSource::new(1);
    let judge = HalfSpaceJudge { support: pattern(n, &[0, 1, 2]) };
    let good = is_estimate_with(&judge, &d, 200, &noise, IsOptions::default()).unwrap();
    assert_eq!(good.weight_overflows, 0);
    d.psi = Some(-1000.0);
    let bad = is_estimate_with(&judge, &d, 200, &noise, IsOptions::default()).unwrap();
    assert_eq!(bad.weight_overflows, 200);
    assert!((bad.p_f_hat / good.p_f_hat - 1.0).abs() < 1e-9);
    let y = sample_biased(&noise, 0, &d).0;
    let lw = log_weight(&y, &d);
    assert!(lw.denominator_underflows() && lw.log_w.is_finite());
    assert!(weight(&y, &d).is_err());
}

#[test]
fn adaptation_adds_only_close_new_events() {
    let code = peg_regular_with_girth(96, 3, 6, 6, 1, 50).unwrap();
    let ch = ChannelModel::new(2.0, code.rate()).unwrap();
    let cfg = DecoderConfig::default();
    let d = ISDensity::new(vec![pattern(96, &[0, 1, 2, 3, 4, 5])], 0.5, &ch).unwrap();
    let est = is_estimate(&code, &ch, &d, 400, &cfg, &NoiseSource::new(8), IsOptions::default()).unwrap();
    assert!(!est.new_events.is_empty());
    let probe = BoundaryProbe::default();
    let threshold = 12.0;
    let (next, added) =
        adapt_density(&est, &d, threshold, |p| probe_boundary(&code, p, &probe, &cfg, &ch)).unwrap();
    assert_eq!(next.m(), d.m() + added.len());
    for (p, r) in &added {
        assert!(r.d_e2 < threshold);
        assert!(est.new_events.contains_key(p) && !d.centers.contains(p));
    }
    assert_eq!(&next.centers[..d.m()], &d.centers[..]);
}
