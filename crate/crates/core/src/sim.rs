//! Monte Carlo and mixture importance-sampling estimation of frame and bit
//! error rates on the AWGN channel, all-zeros codeword transmitted as the
//! all-ones signal.
//!
//! The biasing density is an equal-weight mixture of Gaussians centred at
//! `1 - s·μ_m`, where `μ_m` is the indicator of the m-th error event.
//! Trial `t` draws from centre `t mod M`, so `L = M·P` trials give exactly
//! `P` draws per centre. With `f` the nominal density the weight is
//!
//! ```text
//! w(y) = f(y) / ((1/M) Σ_m f_m(y))
//!      = exp(ψ - |y-1|²/2σ²) / ((1/M) Σ_m exp(ψ - |y-c_m|²/2σ²))
//! ```
//!
//! and the estimates are `P̂_f = (1/L) Σ I(y)·w(y)` and
//! `V̂ = (1/L) Σ I(y)·w(y)²`.
//!
//! Every trial owns a noise substream keyed by its index, and trials are
//! reduced in fixed blocks in trial order, so results do not depend on the
//! number of worker threads.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{Bracket, BoundaryResult};
use crate::catalog::TsCatalog;
use crate::code::{BitPattern, TannerCode, TsClass};
use crate::decoder::{extract_trapping_set, ChannelModel, Decoder, DecoderConfig};
use crate::error::{Error, Result};
use crate::stats::{clopper_pearson, normal_interval, Z95};

/// Trials per reduction block.
const BLOCK: u64 = 256;

/// Below this the ψ-form denominator underflows in double precision.
const MIN_LOG: f64 = -745.0;

/// Deterministic per-trial Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSource {
    pub master_seed: u64,
}

impl NoiseSource {
    pub fn new(master_seed: u64) -> Self {
        NoiseSource { master_seed }
    }

    /// Generator for one trial: the master key with the trial index as the
    /// ChaCha stream id.
    pub fn stream(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(trial);
        rng
    }

    /// `n` standard normal draws for `trial`.
    pub fn standard_normals(&self, trial: u64, n: usize) -> Vec<f64> {
        let mut rng = self.stream(trial);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }
}

/// `y = 1 + n`, `n ~ N(0, σ²)` per coordinate.
pub fn sample_nominal(noise: &NoiseSource, trial: u64, n: usize, channel: &ChannelModel) -> Vec<f64> {
    let sigma = channel.sigma();
    noise.standard_normals(trial, n).into_iter().map(|z| 1.0 + sigma * z).collect()
}

/// Equal-weight mixture of shifted Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct ISDensity {
    pub n: usize,
    /// Error events defining the centres.
    pub centers: Vec<BitPattern>,
    /// Shift magnitude `s`.
    pub shift: f64,
    pub sigma2: f64,
    /// Stabilising exponent; `None` means `n/2`.
    pub psi: Option<f64>,
}

impl ISDensity {
    pub fn new(centers: Vec<BitPattern>, shift: f64, channel: &ChannelModel) -> Result<Self> {
        let n = centers.first().map(BitPattern::n).ok_or_else(|| {
            Error::EmptySelection("an importance density needs at least one centre".into())
        })?;
        let d = ISDensity { n, centers, shift, sigma2: channel.sigma2(), psi: None };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.centers.is_empty() {
            return Err(Error::EmptySelection("an importance density needs at least one centre".into()));
        }
        if let Some(c) = self.centers.iter().find(|c| c.n() != self.n) {
            return Err(Error::LengthMismatch { expected: self.n, got: c.n() });
        }
        if !(self.shift.is_finite() && self.shift >= 0.0) {
            return Err(Error::InvalidParameter(format!("shift must be >= 0, got {}", self.shift)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma2 must be > 0, got {}", self.sigma2)));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.centers.len()
    }

    pub fn psi(&self) -> f64 {
        self.psi.unwrap_or(self.n as f64 / 2.0)
    }

    /// Dense centre vector `1 - s·μ_m`.
    pub fn center(&self, m: usize) -> Vec<f64> {
        let mut c = vec![1.0; self.n];
        for &v in self.centers[m].support() {
            c[v] = 1.0 - self.shift;
        }
        c
    }

    /// Centre used by `trial`.
    pub fn center_of(&self, trial: u64) -> usize {
        (trial % self.m() as u64) as usize
    }
}

/// Draws trial `trial` from its centre; returns the sample and centre index.
pub fn sample_biased(noise: &NoiseSource, trial: u64, density: &ISDensity) -> (Vec<f64>, usize) {
    let m = density.center_of(trial);
    let sigma = density.sigma2.sqrt();
    let mut y: Vec<f64> = noise.standard_normals(trial, density.n).into_iter().map(|z| 1.0 + sigma * z).collect();
    for &v in density.centers[m].support() {
        y[v] -= density.shift;
    }
    (y, m)
}

/// Logarithm of a weight together with the largest ψ-form exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWeight {
    pub log_w: f64,
    /// `max_m (ψ - |y - c_m|²/2σ²)`.
    pub max_exponent: f64,
}

impl LogWeight {
    /// True when every term of the ψ-form denominator underflows.
    pub fn denominator_underflows(&self) -> bool {
        self.max_exponent < MIN_LOG
    }

    pub fn value(&self) -> f64 {
        self.log_w.exp()
    }
}

/// Computes `log w(y)`. Exponents are formed with ψ and then shifted by
/// their maximum before summation.
pub fn log_weight(y: &[f64], density: &ISDensity) -> LogWeight {
    let two_s2 = 2.0 * density.sigma2;
    let psi = density.psi();
    let base: f64 = y.iter().map(|&v| (v - 1.0) * (v - 1.0)).sum::<f64>();
    let e0 = psi - base / two_s2;
    let s = density.shift;
    // |y - c_m|² = |y - 1|² + Σ_{i ∈ S_m} (2s(y_i - 1) + s²)
    let exps: Vec<f64> = density
        .centers
        .iter()
        .map(|c| {
            let extra: f64 = c.support().iter().map(|&i| 2.0 * s * (y[i] - 1.0) + s * s).sum();
            psi - (base + extra) / two_s2
        })
        .collect();
    let emax = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = exps.iter().map(|e| (e - emax).exp()).sum();
    let log_den = emax + (sum / density.m() as f64).ln();
    LogWeight { log_w: e0 - log_den, max_exponent: emax }
}

/// `w(y) = f(y)/f*(y)`. Fails with a weight-overflow diagnostic when the
/// ψ-form denominator underflows or the weight is not finite.
pub fn weight(y: &[f64], density: &ISDensity) -> Result<f64> {
    let lw = log_weight(y, density);
    let w = lw.value();
    if lw.denominator_underflows() || !w.is_finite() {
        return Err(Error::WeightOverflow { trial: None });
    }
    Ok(w)
}

/// What a judge reports for an errored frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub bit_errors: usize,
    /// Identified error event.
    pub event: BitPattern,
    pub class: TsClass,
}

/// Decides whether a received vector is a frame error.
pub trait FrameJudge: Sync {
    type Worker: Send;
    fn n(&self) -> usize;
    fn worker(&self) -> Result<Self::Worker>;
    /// `None` when the frame is received correctly.
    fn judge(&self, worker: &mut Self::Worker, y: &[f64]) -> Result<Option<Verdict>>;
}

/// Iterative decoding; the event is the Definition-1 minimum-syndrome
/// state and bit errors are counted on the final hard decision.
pub struct DecoderJudge<'a> {
    pub code: &'a TannerCode,
    pub cfg: DecoderConfig,
    pub channel: ChannelModel,
}

impl<'a> FrameJudge for DecoderJudge<'a> {
    type Worker = Decoder<'a>;

    fn n(&self) -> usize {
        self.code.n()
    }

    fn worker(&self) -> Result<Decoder<'a>> {
        Decoder::new(self.code, self.cfg)
    }

    fn judge(&self, dec: &mut Decoder<'a>, y: &[f64]) -> Result<Option<Verdict>> {
        let out = dec.decode(y, &self.channel)?;
        if !out.is_frame_error() {
            return Ok(None);
        }
        let (event, class) = extract_trapping_set(self.code, &out)?;
        Ok(Some(Verdict { bit_errors: out.bit_errors(), event, class }))
    }
}

/// Two-codeword maximum-likelihood decision between all-zeros and the
/// codeword with support `support`: an error iff `Σ_{i∈S} y_i < 0`.
/// The error probability is `Q(√|S| / σ)`.
pub struct HalfSpaceJudge {
    pub support: BitPattern,
}

impl FrameJudge for HalfSpaceJudge {
    type Worker = ();

    fn n(&self) -> usize {
        self.support.n()
    }

    fn worker(&self) -> Result<()> {
        Ok(())
    }

    fn judge(&self, _: &mut (), y: &[f64]) -> Result<Option<Verdict>> {
        let s: f64 = self.support.support().iter().map(|&i| y[i]).sum();
        if s >= 0.0 {
            return Ok(None);
        }
        let a = self.support.weight();
        Ok(Some(Verdict {
            bit_errors: a,
            event: self.support.clone(),
            class: TsClass { a, b: 0, edges: 0, checks_touched: 0, elementary: true },
        }))
    }
}

/// Occurrences of one error event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTally {
    pub class: TsClass,
    pub count: u64,
    pub weight_sum: f64,
    /// Centre of the trial that first produced it (IS) or 0 (MC).
    pub first_center: usize,
}

fn tally(map: &mut BTreeMap<BitPattern, EventTally>, event: BitPattern, class: TsClass, w: f64, center: usize) {
    map.entry(event)
        .and_modify(|t| {
            t.count += 1;
            t.weight_sum += w;
        })
        .or_insert(EventTally { class, count: 1, weight_sum: w, first_center: center });
}

fn merge_tallies(into: &mut BTreeMap<BitPattern, EventTally>, from: BTreeMap<BitPattern, EventTally>) {
    for (p, t) in from {
        match into.get_mut(&p) {
            Some(e) => {
                e.count += t.count;
                e.weight_sum += t.weight_sum;
            }
            None => {
                into.insert(p, t);
            }
        }
    }
}

fn tallies_to_catalog(n: usize, map: &BTreeMap<BitPattern, EventTally>) -> TsCatalog {
    let mut cat = TsCatalog::new(n);
    for (p, t) in map {
        cat.upsert(p.clone(), t.class, t.count, t.first_center);
    }
    cat
}

fn class_tallies(map: &BTreeMap<BitPattern, EventTally>) -> BTreeMap<(usize, usize), u64> {
    let mut out = BTreeMap::new();
    for t in map.values() {
        *out.entry((t.class.a, t.class.b)).or_insert(0) += t.count;
    }
    out
}

/// Plain Monte Carlo result.
#[derive(Debug, Clone, PartialEq)]
pub struct MCEstimate {
    pub trials: u64,
    pub errors: u64,
    /// Σ over errored frames of wrong bits / n.
    pub bit_error_sum: f64,
    pub p_f_hat: f64,
    pub p_b_hat: f64,
    /// Exact 95% binomial interval on `p_f`.
    pub ci95: (f64, f64),
    /// Error events with their counts.
    pub events: BTreeMap<BitPattern, EventTally>,
    pub wall_time_secs: f64,
}

impl MCEstimate {
    /// Error counts per `(a, b)` class.
    pub fn class_tallies(&self) -> BTreeMap<(usize, usize), u64> {
        class_tallies(&self.events)
    }

    pub fn event_catalog(&self, n: usize) -> TsCatalog {
        tallies_to_catalog(n, &self.events)
    }
}

#[derive(Default)]
struct McBlock {
    errors: u64,
    bit_error_sum: f64,
    events: BTreeMap<BitPattern, EventTally>,
}

/// Runs `trials` nominal frames through `judge`.
pub fn mc_estimate_with<J: FrameJudge>(
    judge: &J,
    channel: &ChannelModel,
    trials: u64,
    noise: &NoiseSource,
) -> Result<MCEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let started = Instant::now();
    let n = judge.n();
    let blocks: Vec<u64> = (0..trials.div_ceil(BLOCK)).collect();
    let parts: Vec<Result<McBlock>> = blocks
        .par_iter()
        .map_init(
            || judge.worker(),
            |worker, &b| {
                let worker = worker.as_mut().map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let mut acc = McBlock::default();
                for t in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                    let y = sample_nominal(noise, t, n, channel);
                    if let Some(v) = judge.judge(worker, &y)? {
                        acc.errors += 1;
                        acc.bit_error_sum += v.bit_errors as f64 / n as f64;
                        tally(&mut acc.events, v.event, v.class, 1.0, 0);
                    }
                }
                Ok(acc)
            },
        )
        .collect();
    let mut total = McBlock::default();
    for p in parts {
        let p = p?;
        total.errors += p.errors;
        total.bit_error_sum += p.bit_error_sum;
        merge_tallies(&mut total.events, p.events);
    }
    Ok(MCEstimate {
        trials,
        errors: total.errors,
        bit_error_sum: total.bit_error_sum,
        p_f_hat: total.errors as f64 / trials as f64,
        p_b_hat: total.bit_error_sum / trials as f64,
        ci95: clopper_pearson(total.errors, trials, 0.05),
        events: total.events,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Monte Carlo with the iterative decoder.
pub fn mc_estimate(
    code: &TannerCode,
    channel: &ChannelModel,
    trials: u64,
    cfg: &DecoderConfig,
    noise: &NoiseSource,
) -> Result<MCEstimate> {
    let judge = DecoderJudge { code, cfg: *cfg, channel: *channel };
    mc_estimate_with(&judge, channel, trials, noise)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IsOptions {
    /// Keep `(trial, weight)` for every errored trial.
    pub log_weights: bool,
}

/// Importance-sampling result.
#[derive(Debug, Clone, PartialEq)]
pub struct ISEstimate {
    pub trials: u64,
    pub per_center: u64,
    pub hits: u64,
    pub intended_hits: u64,
    /// Hits whose event is another centre's event.
    pub other_center_hits: u64,
    /// Hits and intended hits per centre.
    pub center_hits: Vec<(u64, u64)>,
    pub weight_sum: f64,
    pub bit_weight_sum: f64,
    pub weight_sq_sum: f64,
    pub p_f_hat: f64,
    pub p_b_hat: f64,
    /// `(1/L) Σ I·w²`. A large value flags an unreliable estimate; a small
    /// one proves nothing.
    pub v_hat: f64,
    /// Sample mean of `w` over all trials, errored or not (ideally 1).
    pub mean_weight: f64,
    /// Trials whose ψ-form denominator underflowed. Their weights are still
    /// evaluated exactly in the log domain.
    pub weight_overflows: u64,
    /// All error events seen.
    pub events: BTreeMap<BitPattern, EventTally>,
    /// Events matching none of the centres.
    pub new_events: BTreeMap<BitPattern, EventTally>,
    pub weight_log: Option<Vec<(u64, f64)>>,
    pub wall_time_secs: f64,
}

impl ISEstimate {
    /// Standard error of `p_f_hat` from the second moment.
    pub fn std_err(&self) -> f64 {
        ((self.v_hat - self.p_f_hat * self.p_f_hat).max(0.0) / self.trials as f64).sqrt()
    }

    /// Normal-approximation 95% interval.
    pub fn ci95(&self) -> (f64, f64) {
        normal_interval(self.p_f_hat, self.std_err(), Z95)
    }

    pub fn class_tallies(&self) -> BTreeMap<(usize, usize), u64> {
        class_tallies(&self.events)
    }

    pub fn new_event_catalog(&self, n: usize) -> TsCatalog {
        tallies_to_catalog(n, &self.new_events)
    }
}

#[derive(Default)]
struct IsBlock {
    hits: u64,
    intended: u64,
    other: u64,
    center_hits: Vec<(u64, u64)>,
    w: f64,
    wb: f64,
    w2: f64,
    w_all: f64,
    overflows: u64,
    events: BTreeMap<BitPattern, EventTally>,
    new_events: BTreeMap<BitPattern, EventTally>,
    log: Vec<(u64, f64)>,
}

/// Runs `M·P` biased frames through `judge`.
pub fn is_estimate_with<J: FrameJudge>(
    judge: &J,
    density: &ISDensity,
    per_center: u64,
    noise: &NoiseSource,
    opts: IsOptions,
) -> Result<ISEstimate> {
    density.validate()?;
    if per_center == 0 {
        return Err(Error::InvalidParameter("P (trials per centre) must be at least 1".into()));
    }
    if density.n != judge.n() {
        return Err(Error::LengthMismatch { expected: judge.n(), got: density.n });
    }
    let started = Instant::now();
    let m = density.m();
    let trials = per_center * m as u64;
    let index: HashMap<&BitPattern, usize> = density.centers.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let n = judge.n() as f64;

    let blocks: Vec<u64> = (0..trials.div_ceil(BLOCK)).collect();
    let parts: Vec<Result<IsBlock>> = blocks
        .par_iter()
        .map_init(
            || judge.worker(),
            |worker, &b| {
                let worker = worker.as_mut().map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let mut acc = IsBlock { center_hits: vec![(0, 0); m], ..Default::default() };
                for t in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                    let (y, c) = sample_biased(noise, t, density);
                    let lw = log_weight(&y, density);
                    let w = lw.value();
                    if !w.is_finite() {
                        return Err(Error::WeightOverflow { trial: Some(t) });
                    }
                    acc.overflows += u64::from(lw.denominator_underflows());
                    acc.w_all += w;
                    let Some(v) = judge.judge(worker, &y)? else { continue };
                    acc.hits += 1;
                    acc.center_hits[c].0 += 1;
                    acc.w += w;
                    acc.wb += w * v.bit_errors as f64 / n;
                    acc.w2 += w * w;
                    if opts.log_weights {
                        acc.log.push((t, w));
                    }
                    if v.event == density.centers[c] {
                        acc.intended += 1;
                        acc.center_hits[c].1 += 1;
                    } else if index.contains_key(&v.event) {
                        acc.other += 1;
                    } else {
                        tally(&mut acc.new_events, v.event.clone(), v.class, w, c);
                    }
                    tally(&mut acc.events, v.event, v.class, w, c);
                }
                Ok(acc)
            },
        )
        .collect();

    let mut tot = IsBlock { center_hits: vec![(0, 0); m], ..Default::default() };
    for p in parts {
        let p = p?;
        tot.hits += p.hits;
        tot.intended += p.intended;
        tot.other += p.other;
        for (a, b) in tot.center_hits.iter_mut().zip(&p.center_hits) {
            a.0 += b.0;
            a.1 += b.1;
        }
        tot.w += p.w;
        tot.wb += p.wb;
        tot.w2 += p.w2;
        tot.w_all += p.w_all;
        tot.overflows += p.overflows;
        merge_tallies(&mut tot.events, p.events);
        merge_tallies(&mut tot.new_events, p.new_events);
        tot.log.extend(p.log);
    }
    let l = trials as f64;
    Ok(ISEstimate {
        trials,
        per_center,
        hits: tot.hits,
        intended_hits: tot.intended,
        other_center_hits: tot.other,
        center_hits: tot.center_hits,
        weight_sum: tot.w,
        bit_weight_sum: tot.wb,
        weight_sq_sum: tot.w2,
        p_f_hat: tot.w / l,
        p_b_hat: tot.wb / l,
        v_hat: tot.w2 / l,
        mean_weight: tot.w_all / l,
        weight_overflows: tot.overflows,
        events: tot.events,
        new_events: tot.new_events,
        weight_log: opts.log_weights.then_some(tot.log),
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Importance sampling with the iterative decoder.
pub fn is_estimate(
    code: &TannerCode,
    channel: &ChannelModel,
    density: &ISDensity,
    per_center: u64,
    cfg: &DecoderConfig,
    noise: &NoiseSource,
    opts: IsOptions,
) -> Result<ISEstimate> {
    if (density.sigma2 - channel.sigma2()).abs() > 1e-12 * channel.sigma2() {
        return Err(Error::InvalidParameter(format!(
            "density sigma2 {} differs from channel sigma2 {}",
            density.sigma2,
            channel.sigma2()
        )));
    }
    let judge = DecoderJudge { code, cfg: *cfg, channel: *channel };
    is_estimate_with(&judge, density, per_center, noise, opts)
}

/// Adds new events whose probed `d²_ε` is below `threshold` as centres.
/// Returns the enlarged density and the added events; estimation must be
/// restarted with it.
pub fn adapt_density<F>(
    estimate: &ISEstimate,
    density: &ISDensity,
    threshold: f64,
    mut probe: F,
) -> Result<(ISDensity, Vec<(BitPattern, BoundaryResult)>)>
where
    F: FnMut(&BitPattern) -> Result<BoundaryResult>,
{
    let mut next = density.clone();
    let mut added = Vec::new();
    for p in estimate.new_events.keys() {
        if density.centers.contains(p) {
            continue;
        }
        let r = probe(p)?;
        if r.bracket != Bracket::NoErrorAtMax && r.d_e2 < threshold {
            next.centers.push(p.clone());
            added.push((p.clone(), r));
        }
    }
    Ok((next, added))
}

/// One per-SNR output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRecord {
    pub mode: String,
    pub eb_no_db: f64,
    pub trials: u64,
    pub hits: u64,
    pub intended_hits: u64,
    pub p_f_hat: f64,
    pub p_b_hat: f64,
    pub v_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub new_events: usize,
    pub weight_overflows: u64,
}

impl SimRecord {
    pub const CSV_HEADER: &'static str =
        "mode,eb_no_db,trials,hits,intended_hits,p_f_hat,p_b_hat,v_hat,ci_low,ci_high,new_events,weight_overflows";

    pub fn from_mc(eb_no_db: f64, e: &MCEstimate) -> Self {
        SimRecord {
            mode: "mc".into(),
            eb_no_db,
            trials: e.trials,
            hits: e.errors,
            intended_hits: 0,
            p_f_hat: e.p_f_hat,
            p_b_hat: e.p_b_hat,
            v_hat: e.p_f_hat,
            ci_low: e.ci95.0,
            ci_high: e.ci95.1,
            new_events: e.events.len(),
            weight_overflows: 0,
        }
    }

    pub fn from_is(eb_no_db: f64, e: &ISEstimate) -> Self {
        let (ci_low, ci_high) = e.ci95();
        SimRecord {
            mode: "is".into(),
            eb_no_db,
            trials: e.trials,
            hits: e.hits,
            intended_hits: e.intended_hits,
            p_f_hat: e.p_f_hat,
            p_b_hat: e.p_b_hat,
            v_hat: e.v_hat,
            ci_low,
            ci_high,
            new_events: e.new_events.len(),
            weight_overflows: e.weight_overflows,
        }
    }

    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{},{}",
            self.mode,
            self.eb_no_db,
            self.trials,
            self.hits,
            self.intended_hits,
            self.p_f_hat,
            self.p_b_hat,
            self.v_hat,
            self.ci_low,
            self.ci_high,
            self.new_events,
            self.weight_overflows
        );
        s
    }

    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("plain record serializes")
    }
}
