//! Flooding-schedule message-passing decoder (belief propagation and
//! min-sum) with per-iteration hard-decision history.
//!
//! The all-zeros codeword is transmitted as BPSK `0 → +1`, so a positive
//! LLR favours bit 0. A decode records the syndrome weight after every
//! iteration and keeps the hard decision of minimum syndrome weight
//! (earliest on ties); that state identifies the trapping set of a failed
//! decode.

use crate::code::{BitPattern, TannerCode, TsClass};
use crate::error::{Error, Result};

/// Check-node update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    BeliefPropagation,
    MinSum,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bp" | "belief-propagation" | "sum-product" => Ok(Algorithm::BeliefPropagation),
            "ms" | "min-sum" | "minsum" => Ok(Algorithm::MinSum),
            other => Err(Error::InvalidParameter(format!("unknown decoder algorithm {other:?}"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::BeliefPropagation => "bp",
            Algorithm::MinSum => "min-sum",
        })
    }
}

/// BPSK over AWGN with unit symbol energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    eb_no_db: f64,
    rate: f64,
    sigma2: f64,
}

impl ChannelModel {
    /// Channel at `eb_no_db` for a code of the given rate.
    pub fn new(eb_no_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) || !eb_no_db.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "channel needs 0 < rate <= 1 and finite Eb/No (rate {rate}, Eb/No {eb_no_db})"
            )));
        }
        let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(eb_no_db / 10.0));
        Ok(ChannelModel { eb_no_db, rate, sigma2 })
    }

    /// Channel with a given per-dimension noise variance and rate 1.
    pub fn from_sigma2(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma2 must be positive, got {sigma2}")));
        }
        let eb_no_db = 10.0 * (1.0 / (2.0 * sigma2)).log10();
        Ok(ChannelModel { eb_no_db, rate: 1.0, sigma2 })
    }

    pub fn eb_no_db(&self) -> f64 {
        self.eb_no_db
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Noise variance per dimension, `N0 / 2`.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// `Es/N0` as a linear ratio.
    pub fn es_no(&self) -> f64 {
        1.0 / (2.0 * self.sigma2)
    }

    /// `4 Es / N0`, the factor mapping received values to channel LLRs.
    pub fn llr_scale(&self) -> f64 {
        2.0 / self.sigma2
    }
}

/// Channel LLRs `Lc_i = 4 y_i Es / N0`.
pub fn channel_llr(y: &[f64], channel: &ChannelModel) -> Vec<f64> {
    let scale = channel.llr_scale();
    y.iter().map(|&v| scale * v).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecoderConfig {
    pub algorithm: Algorithm,
    pub max_iters: usize,
    /// Bound on every variable-to-check message magnitude.
    pub llr_clamp: f64,
    /// Stop as soon as the hard decision has zero syndrome.
    pub early_exit: bool,
    /// Keep every iteration's hard decision in the outcome.
    pub keep_history: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            algorithm: Algorithm::BeliefPropagation,
            max_iters: 50,
            llr_clamp: 30.0,
            early_exit: true,
            keep_history: false,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.llr_clamp > 0.0 && self.llr_clamp.is_finite()) {
            return Err(Error::InvalidParameter("llr_clamp must be positive and finite".into()));
        }
        Ok(())
    }
}

/// Hard decision of minimum syndrome weight across the decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinSyndromeState {
    pub pattern: BitPattern,
    /// 1-based iteration index.
    pub iteration: usize,
    pub weight: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// The final hard decision is a codeword.
    pub converged: bool,
    pub iterations_used: usize,
    pub final_hard_decision: BitPattern,
    pub syndrome_weight_history: Vec<usize>,
    pub min_syndrome_state: MinSyndromeState,
    /// Every iteration's hard decision, when requested.
    pub hard_decision_history: Option<Vec<BitPattern>>,
}

impl DecodeOutcome {
    /// Anything but the all-zeros codeword counts as a frame error.
    pub fn is_frame_error(&self) -> bool {
        !(self.converged && self.final_hard_decision.is_zero())
    }

    /// Wrong bits in the final hard decision.
    pub fn bit_errors(&self) -> usize {
        self.final_hard_decision.weight()
    }
}

/// Check-to-variable message from the extrinsic inputs of one check.
///
/// Belief propagation uses `2 atanh(Π tanh(x/2))`; min-sum uses the sign
/// product times the minimum magnitude. Both results are bounded by the
/// smallest input magnitude.
pub fn check_update(incoming: &[f64], algorithm: Algorithm) -> f64 {
    assert!(!incoming.is_empty(), "check update needs at least one input");
    let sign = incoming.iter().filter(|x| **x < 0.0).count() % 2;
    let sign = if sign == 1 { -1.0 } else { 1.0 };
    let min = incoming.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    match algorithm {
        Algorithm::MinSum => sign * min,
        Algorithm::BeliefPropagation => {
            let prod: f64 = incoming.iter().map(|x| (x.abs() * 0.5).tanh()).product();
            sign * bp_magnitude(prod, min)
        }
    }
}

/// `2 atanh(p)` with `p` kept below 1 and the result capped at `min`.
#[inline]
fn bp_magnitude(prod: f64, min: f64) -> f64 {
    const P_MAX: f64 = 1.0 - 1e-15;
    (2.0 * prod.min(P_MAX).atanh()).min(min)
}

/// Variable-to-check message: `Lc + Σ incoming`, clamped to `±clamp`.
pub fn variable_update(incoming: &[f64], lc: f64, clamp: f64) -> f64 {
    (lc + incoming.iter().sum::<f64>()).clamp(-clamp, clamp)
}

/// Marginal LLR `LQ = Lc + Σ incoming` (no clamp).
pub fn marginal(incoming: &[f64], lc: f64) -> f64 {
    lc + incoming.iter().sum::<f64>()
}

/// Bit decision from a marginal LLR: negative decides 1, zero decides 0.
#[inline]
pub fn hard_decision(lq: f64) -> bool {
    lq < 0.0
}

/// Reusable decoder bound to one code. Holds per-edge message buffers, so
/// create one per worker thread.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    code: &'a TannerCode,
    cfg: DecoderConfig,
    /// Edges are numbered in check order; `check_start[c]..check_start[c+1]`.
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    /// Edge ids incident to each variable, `var_start[v]..var_start[v+1]`.
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    scratch: Vec<f64>,
    suffix: Vec<f64>,
    hard: Vec<bool>,
}

impl<'a> Decoder<'a> {
    pub fn new(code: &'a TannerCode, cfg: DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        let mut check_start = Vec::with_capacity(code.m() + 1);
        let mut edge_var = Vec::with_capacity(code.num_edges());
        let mut per_var: Vec<Vec<usize>> = vec![Vec::new(); code.n()];
        check_start.push(0);
        for row in code.row_adjacency() {
            for &v in row {
                per_var[v].push(edge_var.len());
                edge_var.push(v);
            }
            check_start.push(edge_var.len());
        }
        let mut var_start = Vec::with_capacity(code.n() + 1);
        var_start.push(0);
        let mut var_edges = Vec::with_capacity(edge_var.len());
        for list in per_var {
            var_edges.extend(list);
            var_start.push(var_edges.len());
        }
        let max_dc = code.row_adjacency().iter().map(Vec::len).max().unwrap_or(0);
        let e = edge_var.len();
        Ok(Decoder {
            code,
            cfg,
            check_start,
            edge_var,
            var_start,
            var_edges,
            v2c: vec![0.0; e],
            c2v: vec![0.0; e],
            scratch: vec![0.0; max_dc],
            suffix: vec![0.0; max_dc + 1],
            hard: vec![false; code.n()],
        })
    }

    pub fn code(&self) -> &'a TannerCode {
        self.code
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    /// Decodes received values `y` at the given channel.
    pub fn decode(&mut self, y: &[f64], channel: &ChannelModel) -> Result<DecodeOutcome> {
        if y.len() != self.code.n() {
            return Err(Error::LengthMismatch { expected: self.code.n(), got: y.len() });
        }
        let llr = channel_llr(y, channel);
        self.decode_llr(&llr)
    }

    /// Decodes from channel LLRs directly.
    pub fn decode_llr(&mut self, lc: &[f64]) -> Result<DecodeOutcome> {
        let n = self.code.n();
        if lc.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: lc.len() });
        }
        let clamp = self.cfg.llr_clamp;
        for (e, &v) in self.edge_var.iter().enumerate() {
            self.v2c[e] = lc[v].clamp(-clamp, clamp);
        }

        let mut history = Vec::with_capacity(self.cfg.max_iters.min(64));
        let mut hard_history = self.cfg.keep_history.then(Vec::new);
        let mut best: Option<MinSyndromeState> = None;

        for iteration in 1..=self.cfg.max_iters {
            self.check_pass();
            self.variable_pass(lc);
            let weight = self.syndrome_weight();
            history.push(weight);
            if best.as_ref().is_none_or(|b| weight < b.weight) {
                best = Some(MinSyndromeState {
                    pattern: BitPattern::from_bits(&self.hard),
                    iteration,
                    weight,
                });
            }
            if let Some(h) = hard_history.as_mut() {
                h.push(BitPattern::from_bits(&self.hard));
            }
            if weight == 0 && self.cfg.early_exit {
                break;
            }
        }

        let converged = history.last() == Some(&0);
        Ok(DecodeOutcome {
            converged,
            iterations_used: history.len(),
            final_hard_decision: BitPattern::from_bits(&self.hard),
            syndrome_weight_history: history,
            min_syndrome_state: best.expect("max_iters >= 1"),
            hard_decision_history: hard_history,
        })
    }

    fn check_pass(&mut self) {
        let alg = self.cfg.algorithm;
        for c in 0..self.code.m() {
            let (lo, hi) = (self.check_start[c], self.check_start[c + 1]);
            let inputs = &self.v2c[lo..hi];
            let out = &mut self.c2v[lo..hi];
            // Sign parity and the two smallest magnitudes serve both rules.
            let mut neg = false;
            let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
            for (i, &x) in inputs.iter().enumerate() {
                neg ^= x < 0.0;
                let a = x.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    arg = i;
                } else if a < min2 {
                    min2 = a;
                }
            }
            match alg {
                Algorithm::MinSum => {
                    for (i, (o, &x)) in out.iter_mut().zip(inputs).enumerate() {
                        let s = neg ^ (x < 0.0);
                        let mag = if i == arg { min2 } else { min1 };
                        *o = if s { -mag } else { mag };
                    }
                }
                Algorithm::BeliefPropagation => {
                    let d = inputs.len();
                    let t = &mut self.scratch[..d];
                    for (ti, &x) in t.iter_mut().zip(inputs) {
                        *ti = (x.abs() * 0.5).tanh();
                    }
                    let suffix = &mut self.suffix[..=d];
                    suffix[d] = 1.0;
                    for i in (0..d).rev() {
                        suffix[i] = suffix[i + 1] * t[i];
                    }
                    let mut prefix = 1.0;
                    for i in 0..d {
                        let x = inputs[i];
                        let s = neg ^ (x < 0.0);
                        let mag = bp_magnitude(prefix * suffix[i + 1], if i == arg { min2 } else { min1 });
                        out[i] = if s { -mag } else { mag };
                        prefix *= t[i];
                    }
                }
            }
        }
    }

    fn variable_pass(&mut self, lc: &[f64]) {
        let clamp = self.cfg.llr_clamp;
        for v in 0..self.code.n() {
            let edges = &self.var_edges[self.var_start[v]..self.var_start[v + 1]];
            let total = lc[v] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
            self.hard[v] = hard_decision(total);
            for &e in edges {
                self.v2c[e] = (total - self.c2v[e]).clamp(-clamp, clamp);
            }
        }
    }

    fn syndrome_weight(&self) -> usize {
        (0..self.code.m())
            .filter(|&c| {
                self.edge_var[self.check_start[c]..self.check_start[c + 1]]
                    .iter()
                    .fold(false, |p, &v| p ^ self.hard[v])
            })
            .count()
    }
}

/// One-shot decode of received values `y`.
pub fn decode(
    code: &TannerCode,
    y: &[f64],
    channel: &ChannelModel,
    cfg: &DecoderConfig,
) -> Result<DecodeOutcome> {
    Decoder::new(code, *cfg)?.decode(y, channel)
}

/// The error event of a decode: the minimum-syndrome hard decision of a
/// failed decode, or the final codeword when the decoder converged to a
/// nonzero codeword.
pub fn extract_trapping_set(
    code: &TannerCode,
    outcome: &DecodeOutcome,
) -> Result<(BitPattern, TsClass)> {
    let pattern = if outcome.converged {
        if outcome.final_hard_decision.is_zero() {
            return Err(Error::NoErrorEvent);
        }
        outcome.final_hard_decision.clone()
    } else {
        outcome.min_syndrome_state.pattern.clone()
    };
    let class = code.classify(&pattern)?;
    Ok((pattern, class))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hamming74() -> TannerCode {
        TannerCode::from_dense(&[
            vec![1, 1, 0, 1, 1, 0, 0],
            vec![1, 0, 1, 1, 0, 1, 0],
            vec![0, 1, 1, 1, 0, 0, 1],
        ])
        .unwrap()
    }

    #[test]
    fn channel_llr_examples() {
        let ch = ChannelModel::from_sigma2(0.5).unwrap();
        assert_eq!(channel_llr(&[0.0, 1.0], &ch), vec![0.0, 4.0]);
        let ch = ChannelModel::new(5.0, 0.5).unwrap();
        // 4 Es/N0 with Es/N0 = R · Eb/N0 = 0.5 · 10^0.5
        let by_hand = 4.0 * 0.5 * 10f64.powf(0.5);
        assert_relative_eq!(channel_llr(&[1.0], &ch)[0], by_hand, max_relative = 1e-14);
        assert_relative_eq!(ch.llr_scale() * ch.sigma2(), 2.0, max_relative = 1e-15);
        assert!(ChannelModel::new(3.0, 0.0).is_err());
    }

    #[test]
    fn check_update_examples() {
        assert_eq!(check_update(&[2.0, -3.0], Algorithm::MinSum), -2.0);
        // 2 atanh(tanh(1) tanh(-1.5)) by direct evaluation
        let direct = 2.0 * (1.0f64.tanh() * (-1.5f64).tanh()).atanh();
        let bp = check_update(&[2.0, -3.0], Algorithm::BeliefPropagation);
        assert_relative_eq!(bp, direct, max_relative = 1e-12);
        // The commonly quoted -1.6946 is a rounding of -1.69345.
        assert!((bp + 1.6946).abs() < 2e-3);
        for alg in [Algorithm::MinSum, Algorithm::BeliefPropagation] {
            assert_eq!(check_update(&[0.0, 5.0, -2.0], alg), 0.0);
        }
    }

    #[test]
    fn variable_and_marginal_examples() {
        assert_eq!(variable_update(&[1.0, 1.0], -3.0, 30.0), -1.0);
        assert_eq!(variable_update(&[], 2.0, 30.0), 2.0);
        assert_eq!(variable_update(&[50.0, 60.0], 0.0, 100.0), 100.0);
        assert_eq!(marginal(&[1.0, -1.0, 0.5], 0.0), 0.5);
        assert!(!hard_decision(0.5));
        assert!(hard_decision(marginal(&[-1.0, -2.0], -0.1)));
        assert!(!hard_decision(0.0));
    }

    #[test]
    fn noiseless_input_converges_in_one_iteration() {
        let code = hamming74();
        let ch = ChannelModel::new(3.0, code.rate()).unwrap();
        for alg in [Algorithm::BeliefPropagation, Algorithm::MinSum] {
            let cfg = DecoderConfig { algorithm: alg, ..Default::default() };
            let out = decode(&code, &[1.0; 7], &ch, &cfg).unwrap();
            assert!(out.converged && !out.is_frame_error());
            assert_eq!(out.iterations_used, 1);
            assert_eq!(out.syndrome_weight_history, vec![0]);
        }
    }

    #[test]
    fn noiseless_codeword_decodes_to_itself() {
        let code = hamming74();
        let cw = BitPattern::new(7, vec![0, 1, 2]).unwrap();
        assert_eq!(code.syndrome(&cw).unwrap().weight, 0);
        let y: Vec<f64> = cw.to_bits().iter().map(|&b| if b { -1.0 } else { 1.0 }).collect();
        let ch = ChannelModel::new(3.0, code.rate()).unwrap();
        let out = decode(&code, &y, &ch, &DecoderConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.final_hard_decision, cw);
        assert!(out.is_frame_error());
        let (event, class) = extract_trapping_set(&code, &out).unwrap();
        assert_eq!((event, class.b), (cw, 0));
    }

    #[test]
    fn extract_on_correct_decode_is_error() {
        let code = hamming74();
        let ch = ChannelModel::new(3.0, code.rate()).unwrap();
        let out = decode(&code, &[1.0; 7], &ch, &DecoderConfig::default()).unwrap();
        assert!(matches!(extract_trapping_set(&code, &out), Err(Error::NoErrorEvent)));
    }

    #[test]
    fn length_mismatch_rejected() {
        let code = hamming74();
        let ch = ChannelModel::new(3.0, code.rate()).unwrap();
        assert!(matches!(
            decode(&code, &[1.0; 6], &ch, &DecoderConfig::default()),
            Err(Error::LengthMismatch { expected: 7, got: 6 })
        ));
        let bad = DecoderConfig { max_iters: 0, ..Default::default() };
        assert!(Decoder::new(&code, bad).is_err());
    }

    #[test]
    fn min_state_tracks_earliest_minimum() {
        let code = hamming74();
        let ch = ChannelModel::new(0.0, code.rate()).unwrap();
        let cfg = DecoderConfig { keep_history: true, max_iters: 20, ..Default::default() };
        // Strong negative evidence on a non-codeword pattern.
        let y = [-2.0, 1.0, 1.0, 1.0, 1.0, -2.0, 1.0];
        let out = decode(&code, &y, &ch, &cfg).unwrap();
        let hist = out.hard_decision_history.as_ref().unwrap();
        assert_eq!(hist.len(), out.iterations_used);
        let min = *out.syndrome_weight_history.iter().min().unwrap();
        let first = out.syndrome_weight_history.iter().position(|&w| w == min).unwrap();
        assert_eq!(out.min_syndrome_state.weight, min);
        assert_eq!(out.min_syndrome_state.iteration, first + 1);
        assert_eq!(out.min_syndrome_state.pattern, hist[first]);
    }
}
