//! Distance from the transmitted point to the decoder's error boundary
//! along the direction of an error event, found by bisection on the
//! impulse magnitude.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::catalog::{one_based, TsCatalog};
use crate::code::{BitPattern, TannerCode, TsClass};
use crate::decoder::{ChannelModel, Decoder, DecoderConfig};
use crate::error::{Error, Result};
use crate::stats::q_function;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryProbe {
    pub l_min: f64,
    pub l_max: f64,
    /// Bisection steps.
    pub p: u32,
}

impl Default for BoundaryProbe {
    fn default() -> Self {
        BoundaryProbe { l_min: 1.0, l_max: 3.5, p: 10 }
    }
}

impl BoundaryProbe {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_min.is_finite() && self.l_max.is_finite() && self.l_min < self.l_max) {
            return Err(Error::InvalidParameter(format!(
                "need l_min < l_max, got [{}, {}]",
                self.l_min, self.l_max
            )));
        }
        if self.p == 0 || self.p > 52 {
            return Err(Error::InvalidParameter(format!("p must lie in 1..=52, got {}", self.p)));
        }
        Ok(())
    }

    /// `(l_max - l_min) / 2^p`.
    pub fn resolution(&self) -> f64 {
        (self.l_max - self.l_min) / 2f64.powi(self.p as i32)
    }
}

/// How the endpoint decodes came out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bracket {
    /// Correct at `l_min`, error at `l_max`.
    Bracketed,
    /// Already an error at `l_min`.
    ErrorAtMin,
    /// Still decoded correctly at `l_max`.
    NoErrorAtMax,
}

impl Bracket {
    pub fn as_str(self) -> &'static str {
        match self {
            Bracket::Bracketed => "bracketed",
            Bracket::ErrorAtMin => "error-at-lmin",
            Bracket::NoErrorAtMax => "no-error-at-lmax",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResult {
    pub epsilon_star: f64,
    pub d_e2: f64,
    pub bracket: Bracket,
    /// Bisection decodes (always `p`).
    pub bisection_decodes: u32,
    /// Endpoint decodes used to establish the bracket (1 or 2).
    pub endpoint_decodes: u32,
}

impl BoundaryResult {
    pub fn bracketed(&self) -> bool {
        self.bracket == Bracket::Bracketed
    }
}

/// `a · ε²`.
pub fn squared_distance(a: usize, epsilon: f64) -> f64 {
    a as f64 * epsilon * epsilon
}

/// Bisection against an arbitrary error test. `is_error(ε)` must report
/// whether the input with impulse magnitude `ε` is decoded in error.
///
/// The k-th probe sits at `ε_{k-1} ± (l_max - l_min)/2^k` starting from
/// the midpoint; after `p` probes the threshold is known to within the
/// probe resolution and the centre of the final bracket is returned.
pub fn bisect<F>(a: usize, probe: &BoundaryProbe, mut is_error: F) -> Result<BoundaryResult>
where
    F: FnMut(f64) -> Result<bool>,
{
    probe.validate()?;
    let (mut lo, mut hi) = (probe.l_min, probe.l_max);
    for _ in 0..probe.p {
        let mid = 0.5 * (lo + hi);
        if is_error(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (bracket, endpoint_decodes) = if is_error(probe.l_min)? {
        (Bracket::ErrorAtMin, 1)
    } else if is_error(probe.l_max)? {
        (Bracket::Bracketed, 2)
    } else {
        (Bracket::NoErrorAtMax, 2)
    };
    let epsilon_star = match bracket {
        Bracket::Bracketed => 0.5 * (lo + hi),
        Bracket::ErrorAtMin => probe.l_min,
        Bracket::NoErrorAtMax => probe.l_max,
    };
    Ok(BoundaryResult {
        epsilon_star,
        d_e2: squared_distance(a, epsilon_star),
        bracket,
        bisection_decodes: probe.p,
        endpoint_decodes,
    })
}

/// Decoder input for a probe: `1 - ε` on the support, exactly 1 elsewhere.
pub fn probe_input(ts: &BitPattern, epsilon: f64) -> Vec<f64> {
    let mut y = vec![1.0; ts.n()];
    for &v in ts.support() {
        y[v] = 1.0 - epsilon;
    }
    y
}

fn probe_with(decoder: &mut Decoder<'_>, ts: &BitPattern, probe: &BoundaryProbe, channel: &ChannelModel) -> Result<BoundaryResult> {
    if ts.is_zero() {
        return Err(Error::InvalidParameter("cannot probe an empty support".into()));
    }
    bisect(ts.weight(), probe, |eps| {
        Ok(decoder.decode(&probe_input(ts, eps), channel)?.is_frame_error())
    })
}

/// Probes the boundary along `ts`. Any outcome other than the all-zeros
/// codeword counts as an error.
pub fn probe_boundary(
    code: &TannerCode,
    ts: &BitPattern,
    probe: &BoundaryProbe,
    cfg: &DecoderConfig,
    channel: &ChannelModel,
) -> Result<BoundaryResult> {
    let mut dec = Decoder::new(code, *cfg)?;
    probe_with(&mut dec, ts, probe, channel)
}

/// `Q(√(2 d²_ε Es/N0))`, an order-of-magnitude proxy for the event's
/// frame-error contribution.
pub fn q_contribution(d_e2: f64, channel: &ChannelModel) -> f64 {
    q_function((2.0 * d_e2.max(0.0) * channel.es_no()).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub pattern: BitPattern,
    pub class: TsClass,
    pub result: BoundaryResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub a: usize,
    pub b: usize,
    pub multiplicity: usize,
    /// Mean over bracketed members only.
    pub mean_d_e2: Option<f64>,
    pub min_d_e2: Option<f64>,
    pub elementary: usize,
    pub unbracketed: usize,
}

impl ClassRow {
    pub fn label(&self) -> String {
        format!("({},{})", self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    /// Per entry, ascending `d²_ε` then support.
    pub entries: Vec<RankedEntry>,
    /// Per class, ascending class-minimum `d²_ε`.
    pub classes: Vec<ClassRow>,
    pub unbracketed: usize,
    pub probe: BoundaryProbe,
    pub eb_no_db: f64,
}

fn by_distance(x: &RankedEntry, y: &RankedEntry) -> Ordering {
    x.result.d_e2.total_cmp(&y.result.d_e2).then_with(|| x.pattern.cmp(&y.pattern))
}

/// Ranks already probed entries.
pub fn rank_results(mut entries: Vec<RankedEntry>, probe: BoundaryProbe, eb_no_db: f64) -> Ranking {
    entries.sort_by(by_distance);
    let mut rows: Vec<ClassRow> = Vec::new();
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for e in &entries {
        let i = match rows.iter().position(|r| (r.a, r.b) == (e.class.a, e.class.b)) {
            Some(i) => i,
            None => {
                rows.push(ClassRow {
                    a: e.class.a,
                    b: e.class.b,
                    multiplicity: 0,
                    mean_d_e2: None,
                    min_d_e2: None,
                    elementary: 0,
                    unbracketed: 0,
                });
                sums.push((0.0, 0));
                rows.len() - 1
            }
        };
        let row = &mut rows[i];
        row.multiplicity += 1;
        row.elementary += usize::from(e.class.elementary);
        if e.result.bracketed() {
            sums[i].0 += e.result.d_e2;
            sums[i].1 += 1;
            row.min_d_e2 = Some(row.min_d_e2.map_or(e.result.d_e2, |m: f64| m.min(e.result.d_e2)));
        } else {
            row.unbracketed += 1;
        }
    }
    for (row, (sum, k)) in rows.iter_mut().zip(sums) {
        row.mean_d_e2 = (k > 0).then(|| sum / k as f64);
    }
    rows.sort_by(|x, y| {
        let key = |r: &ClassRow| r.min_d_e2.unwrap_or(f64::INFINITY);
        key(x).total_cmp(&key(y)).then((x.b, x.a).cmp(&(y.b, y.a)))
    });
    let unbracketed = entries.iter().filter(|e| !e.result.bracketed()).count();
    Ranking { entries, classes: rows, unbracketed, probe, eb_no_db }
}

/// Probes every catalog entry (in parallel), stores `d²_ε` back into the
/// catalog and ranks the result.
pub fn rank_catalog(
    catalog: &mut TsCatalog,
    probe: &BoundaryProbe,
    cfg: &DecoderConfig,
    channel: &ChannelModel,
    code: &TannerCode,
) -> Result<Ranking> {
    probe.validate()?;
    if catalog.is_empty() {
        return Err(Error::EmptySelection("catalog has no entries to rank".into()));
    }
    if catalog.n != code.n() {
        return Err(Error::LengthMismatch { expected: code.n(), got: catalog.n });
    }
    let items: Vec<(&BitPattern, TsClass)> = catalog.entries.iter().map(|(p, r)| (p, r.class)).collect();
    let results: Vec<Result<BoundaryResult>> = items
        .par_iter()
        .map_init(
            || Decoder::new(code, *cfg).expect("validated config"),
            |dec, (p, _)| probe_with(dec, p, probe, channel),
        )
        .collect();
    let mut entries = Vec::with_capacity(items.len());
    for ((p, class), r) in items.into_iter().zip(results) {
        entries.push(RankedEntry { pattern: p.clone(), class, result: r? });
    }
    for e in &entries {
        if let Some(rec) = catalog.entries.get_mut(&e.pattern) {
            rec.d_e2 = Some(e.result.d_e2);
        }
    }
    Ok(rank_results(entries, *probe, channel.eb_no_db()))
}

/// Shift-point selection rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// Every entry with `d²_ε` strictly below the threshold.
    Threshold(f64),
    /// The `M` nearest entries.
    Cap(usize),
}

/// Picks mixture centres from a ranking. Entries that never failed within
/// `l_max` are not eligible; ties in `d²_ε` go by canonical support.
pub fn select_shift_points(entries: &[RankedEntry], rule: Selection) -> Result<Vec<RankedEntry>> {
    let mut eligible: Vec<RankedEntry> =
        entries.iter().filter(|e| e.result.bracket != Bracket::NoErrorAtMax).cloned().collect();
    eligible.sort_by(by_distance);
    let picked: Vec<RankedEntry> = match rule {
        Selection::Threshold(t) => eligible.into_iter().filter(|e| e.result.d_e2 < t).collect(),
        Selection::Cap(m) => eligible.into_iter().take(m).collect(),
    };
    if picked.is_empty() {
        return Err(Error::EmptySelection(match rule {
            Selection::Threshold(t) => format!("no event with d2 below {t}"),
            Selection::Cap(m) => format!("cap M = {m} selects nothing"),
        }));
    }
    Ok(picked)
}

impl Ranking {
    /// Class table: Error Class, Multiplicity, d²_ε (class mean), |TS|_Elem,
    /// plus the class minimum and unbracketed count.
    pub fn class_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# probe_eb_no_db={}", self.eb_no_db);
        let _ = writeln!(out, "# l_min={} l_max={} p={}", self.probe.l_min, self.probe.l_max, self.probe.p);
        out.push_str("error_class,multiplicity,d2_eps,ts_elem,min_d2_eps,unbracketed\n");
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.4}"));
        for r in &self.classes {
            let _ = writeln!(
                out,
                "\"{}\",{},{},{},{},{}",
                r.label(),
                r.multiplicity,
                fmt(r.mean_d_e2),
                r.elementary,
                fmt(r.min_d_e2),
                r.unbracketed
            );
        }
        out
    }

    /// Per-entry detail.
    pub fn entry_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# probe_eb_no_db={}", self.eb_no_db);
        out.push_str("support,a,b,elementary,epsilon_star,d2_eps,bracket\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "\"{}\",{},{},{},{:.6},{:.6},{}",
                one_based(&e.pattern),
                e.class.a,
                e.class.b,
                u8::from(e.class.elementary),
                e.result.epsilon_star,
                e.result.d_e2,
                e.result.bracket.as_str()
            );
        }
        out
    }
}
