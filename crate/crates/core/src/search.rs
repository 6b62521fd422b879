//! Trapping-set search by deterministic error impulses.
//!
//! For every root variable the local tree is unrolled and each combination
//! of the root plus one variable from each of `v_num` chosen check branches
//! receives an impulse of magnitude `epsilon1`. Optionally the variables one
//! tier further down get a smaller impulse `epsilon2`, and every untouched
//! bit is sent as `gamma` instead of 1. The decoder is run on each such
//! input and every failure contributes its minimum-syndrome state to the
//! catalog.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use rayon::prelude::*;

use crate::catalog::TsCatalog;
use crate::code::{NeighborTree, TannerCode};
use crate::decoder::{extract_trapping_set, ChannelModel, Decoder, DecoderConfig};
use crate::error::{Error, Result};

/// Per-degree γ values of the irregular-code example (degrees 2, 3, 6, 8).
pub const IRREGULAR_GAMMA_EXAMPLE: [(usize, f64); 4] = [(2, 0.3), (3, 0.3), (6, 0.4), (8, 0.45)];

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    pub epsilon1: f64,
    /// Second-tier impulse; `None` leaves those bits at γ.
    pub epsilon2: Option<f64>,
    pub gamma: f64,
    /// γ overrides keyed by root degree.
    pub gamma_by_degree: BTreeMap<usize, f64>,
    pub eb_no_db: f64,
    /// Branches receiving an impulse per root; `None` means all of them.
    pub v_num: Option<usize>,
    /// 1 for root + tier one, 2 to extend the impulse to tier two.
    pub tree_depth: usize,
    /// Search roots only among this many smallest variable degrees.
    pub degree_cutoff: Option<usize>,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            epsilon1: 3.0,
            epsilon2: None,
            gamma: 0.6,
            gamma_by_degree: BTreeMap::new(),
            eb_no_db: 6.0,
            v_num: None,
            tree_depth: 1,
            degree_cutoff: Some(2),
        }
    }
}

impl SearchParams {
    pub fn gamma_for(&self, root_degree: usize) -> f64 {
        self.gamma_by_degree.get(&root_degree).copied().unwrap_or(self.gamma)
    }

    /// Magnitude ordering `epsilon1 > epsilon2 > 1 - gamma >= 0` for every γ
    /// in use, plus structural sanity.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(1..=2).contains(&self.tree_depth) {
            return bad(format!("tree_depth must be 1 or 2, got {}", self.tree_depth));
        }
        if self.tree_depth == 2 && self.epsilon2.is_some() {
            return bad("epsilon2 is only defined for depth-1 trees".into());
        }
        if self.v_num == Some(0) {
            return bad("v_num must be at least 1".into());
        }
        if self.degree_cutoff == Some(0) {
            return bad("degree_cutoff must be at least 1".into());
        }
        let gammas = std::iter::once(self.gamma).chain(self.gamma_by_degree.values().copied());
        for g in gammas {
            if !(g > 0.0 && g <= 1.0) {
                return bad(format!("gamma must lie in (0, 1], got {g}"));
            }
            let floor = self.epsilon2.unwrap_or(1.0 - g);
            if let Some(e2) = self.epsilon2 {
                if e2 <= 1.0 - g {
                    return bad(format!("epsilon2 = {e2} must exceed 1 - gamma = {}", 1.0 - g));
                }
            }
            if self.epsilon1 <= floor {
                return bad(format!("epsilon1 = {} must exceed {floor}", self.epsilon1));
            }
        }
        Ok(())
    }
}

/// A deterministic decoder input pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImpulsePattern {
    pub n: usize,
    pub root: usize,
    /// Bits receiving `epsilon1`, sorted.
    pub tier01: Vec<usize>,
    /// Bits receiving `epsilon2`, sorted and disjoint from `tier01`.
    pub tier2: Vec<usize>,
}

/// Received vector for an impulse: `1 - ε1` on tier01, `1 - ε2` on tier2
/// (when given) and `γ` elsewhere.
pub fn impulse_to_received(pattern: &ImpulsePattern, epsilon1: f64, epsilon2: Option<f64>, gamma: f64) -> Vec<f64> {
    let mut y = vec![gamma; pattern.n];
    if let Some(e2) = epsilon2 {
        for &v in &pattern.tier2 {
            y[v] = 1.0 - e2;
        }
    }
    for &v in &pattern.tier01 {
        y[v] = 1.0 - epsilon1;
    }
    y
}

/// Lexicographic `k`-subsets of `0..n`.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Advances a mixed-radix counter; false once it wraps.
fn odometer(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// Lazily enumerates the impulse patterns of one root.
///
/// When the tree has repeated nodes, patterns whose ε1 support repeats an
/// earlier one are skipped and counted in [`ImpulseIter::skipped`].
pub struct ImpulseIter<'t> {
    tree: &'t NeighborTree,
    n: usize,
    depth: usize,
    with_epsilon2: bool,
    subsets: Vec<Vec<usize>>,
    subset: usize,
    t1: Vec<usize>,
    /// Tier-two candidate groups for the current tier-one picks.
    t2_slots: Vec<&'t [usize]>,
    t2: Vec<usize>,
    fresh_t1: bool,
    dedup: Option<HashSet<Box<[u32]>>>,
    pub skipped: u64,
    done: bool,
}

impl<'t> ImpulseIter<'t> {
    fn new(tree: &'t NeighborTree, n: usize, v_num: usize, depth: usize, with_epsilon2: bool) -> Self {
        let v = v_num.min(tree.branches.len());
        let subsets = subsets(tree.branches.len(), v);
        let empty_branch = tree.branches.iter().any(|b| b.variables.is_empty());
        let dedup = tree.duplicates_present.then(HashSet::new);
        let mut it = ImpulseIter {
            tree,
            n,
            depth,
            with_epsilon2,
            t1: vec![0; v],
            subsets,
            subset: 0,
            t2_slots: Vec::new(),
            t2: Vec::new(),
            fresh_t1: true,
            dedup,
            skipped: 0,
            done: false,
        };
        // Skip subsets containing an empty branch (degree-1 checks).
        if empty_branch {
            it.subsets.retain(|s| s.iter().all(|&b| !tree.branches[b].variables.is_empty()));
        }
        it.done = it.subsets.is_empty();
        it
    }

    fn picks(&self) -> Vec<(usize, usize)> {
        self.subsets[self.subset].iter().zip(&self.t1).map(|(&b, &j)| (b, j)).collect()
    }

    fn load_t2_slots(&mut self) {
        let tree = self.tree;
        self.t2_slots.clear();
        for (&b, &j) in self.subsets[self.subset].iter().zip(&self.t1) {
            for g in &tree.branches[b].children[j] {
                if !g.variables.is_empty() {
                    self.t2_slots.push(&g.variables);
                }
            }
        }
        self.t2 = vec![0; self.t2_slots.len()];
    }

    fn advance(&mut self) {
        if self.depth == 2 && odometer(&mut self.t2, |i| self.t2_slots[i].len()) {
            return;
        }
        self.fresh_t1 = true;
        let tree = self.tree;
        let subset = &self.subsets[self.subset];
        if odometer(&mut self.t1, |i| tree.branches[subset[i]].variables.len()) {
            return;
        }
        self.subset += 1;
        if self.subset == self.subsets.len() {
            self.done = true;
        }
    }
}

impl Iterator for ImpulseIter<'_> {
    type Item = ImpulsePattern;

    fn next(&mut self) -> Option<ImpulsePattern> {
        while !self.done {
            if self.fresh_t1 && self.depth == 2 {
                self.load_t2_slots();
            }
            self.fresh_t1 = false;
            let picks = self.picks();
            let mut tier01: Vec<usize> = std::iter::once(self.tree.root)
                .chain(picks.iter().map(|&(b, j)| self.tree.branches[b].variables[j]))
                .collect();
            if self.depth == 2 {
                tier01.extend(self.t2.iter().zip(&self.t2_slots).map(|(&k, s)| s[k]));
            }
            tier01.sort_unstable();
            tier01.dedup();
            let tier2 = if self.with_epsilon2 {
                self.tree.below(&picks).into_iter().filter(|v| tier01.binary_search(v).is_err()).collect()
            } else {
                Vec::new()
            };
            self.advance();
            if let Some(seen) = self.dedup.as_mut() {
                if !seen.insert(tier01.iter().map(|&v| v as u32).collect()) {
                    self.skipped += 1;
                    continue;
                }
            }
            return Some(ImpulsePattern { n: self.n, root: self.tree.root, tier01, tier2 });
        }
        None
    }
}

/// Lazy impulse stream over a prebuilt tree (depth 2 is needed for
/// `tree_depth = 2` or when ε2 is used).
pub fn impulses<'t>(tree: &'t NeighborTree, n: usize, params: &SearchParams) -> ImpulseIter<'t> {
    ImpulseIter::new(tree, n, params.v_num.unwrap_or(usize::MAX), params.tree_depth, params.epsilon2.is_some())
}

/// Builds the tree `params` calls for around `root`.
pub fn tree_for(code: &TannerCode, root: usize, params: &SearchParams) -> Result<NeighborTree> {
    let depth = if params.tree_depth == 2 || params.epsilon2.is_some() { 2 } else { 1 };
    code.neighbor_tree(root, depth)
}

/// Enumerates all impulse patterns rooted at `root`.
pub fn enumerate_impulses(code: &TannerCode, root: usize, params: &SearchParams) -> Result<Vec<ImpulsePattern>> {
    let tree = tree_for(code, root, params)?;
    Ok(impulses(&tree, code.n(), params).collect())
}

/// Roots searched: variables in ascending-degree order, limited to the
/// `degree_cutoff` smallest degree classes.
pub fn search_roots(code: &TannerCode, params: &SearchParams) -> Vec<usize> {
    let order = code.search_order();
    match params.degree_cutoff {
        None => order,
        Some(k) => {
            let allowed: Vec<usize> = code.dv_profile().keys().take(k).copied().collect();
            order.into_iter().filter(|&v| allowed.contains(&code.var_degree(v))).collect()
        }
    }
}

/// Number of impulse decodings the search performs (before removal of
/// repeated supports): per root, the sum over chosen branch subsets of the
/// product of branch sizes, with depth-2 branches weighted by their
/// tier-two fan-out.
pub fn search_cost(code: &TannerCode, params: &SearchParams) -> Result<u64> {
    let mut total = 0u64;
    for root in search_roots(code, params) {
        let tree = code.neighbor_tree(root, params.tree_depth)?;
        let weights: Vec<u64> = tree
            .branches
            .iter()
            .map(|b| {
                if params.tree_depth == 1 {
                    b.variables.len() as u64
                } else {
                    b.children
                        .iter()
                        .map(|groups| {
                            groups.iter().filter(|g| !g.variables.is_empty()).map(|g| g.variables.len() as u64).product::<u64>()
                        })
                        .sum()
                }
            })
            .collect();
        let v = params.v_num.unwrap_or(usize::MAX).min(weights.len());
        total += subsets(weights.len(), v)
            .iter()
            .map(|s| s.iter().map(|&b| weights[b]).product::<u64>())
            .sum::<u64>();
    }
    Ok(total)
}

/// Closed-form decoding count for a uniform check degree:
/// `Σ_d count(d) · C(d, v) · (dc - 1)^v` with `v = min(v_num, d)`.
pub fn predicted_decodings(dv_profile: &BTreeMap<usize, usize>, dc: usize, v_num: Option<usize>) -> u64 {
    dv_profile
        .iter()
        .map(|(&d, &count)| {
            let v = v_num.unwrap_or(d).min(d);
            count as u64 * binomial(d as u64, v as u64) * (dc as u64 - 1).pow(v as u32)
        })
        .sum()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Result of a search: the catalog plus run statistics.
#[derive(Debug, Clone)]
pub struct SearchReport {
    pub catalog: TsCatalog,
    pub decodings: u64,
    pub skipped_duplicates: u64,
    pub total_iterations: u64,
    pub predicted_decodings: u64,
}

impl SearchReport {
    pub fn mean_iterations(&self) -> f64 {
        if self.decodings == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.decodings as f64
        }
    }
}

struct RootResult {
    catalog: TsCatalog,
    decodings: u64,
    skipped: u64,
    iterations: u64,
}

fn search_root(
    decoder: &mut Decoder<'_>,
    root: usize,
    params: &SearchParams,
    channel: &ChannelModel,
) -> Result<RootResult> {
    let code = decoder.code();
    let tree = tree_for(code, root, params)?;
    let gamma = params.gamma_for(code.var_degree(root));
    let mut it = impulses(&tree, code.n(), params);
    let mut res = RootResult { catalog: TsCatalog::new(code.n()), decodings: 0, skipped: 0, iterations: 0 };
    for pattern in it.by_ref() {
        let y = impulse_to_received(&pattern, params.epsilon1, params.epsilon2, gamma);
        let out = decoder.decode(&y, channel)?;
        res.decodings += 1;
        res.iterations += out.iterations_used as u64;
        if out.is_frame_error() {
            let (event, class) = extract_trapping_set(code, &out)?;
            res.catalog.upsert(event, class, 1, root);
        }
    }
    res.skipped = it.skipped;
    Ok(res)
}

/// Runs the impulse search over all roots.
///
/// Roots are processed in parallel; per-root catalogs are folded in search
/// order so the result does not depend on the thread count.
pub fn run_search(code: &TannerCode, params: &SearchParams, cfg: &DecoderConfig) -> Result<SearchReport> {
    params.validate()?;
    cfg.validate()?;
    let started = Instant::now();
    let channel = ChannelModel::new(params.eb_no_db, code.rate())?;
    let roots = search_roots(code, params);
    let per_root: Vec<Result<RootResult>> = roots
        .par_iter()
        .map_init(
            || Decoder::new(code, *cfg).expect("validated config"),
            |dec, &root| search_root(dec, root, params, &channel),
        )
        .collect();

    let mut catalog = TsCatalog::new(code.n());
    let (mut decodings, mut skipped, mut iterations) = (0, 0, 0);
    for r in per_root {
        let r = r?;
        decodings += r.decodings;
        skipped += r.skipped;
        iterations += r.iterations;
        catalog.merge(r.catalog);
    }
    let predicted = search_cost(code, params)?;
    catalog.wall_time_secs = started.elapsed().as_secs_f64();

    catalog.set_meta("kind", "search");
    catalog.set_meta("m", code.m());
    catalog.set_meta("epsilon1", params.epsilon1);
    catalog.set_meta("epsilon2", params.epsilon2.map_or("none".to_string(), |e| e.to_string()));
    catalog.set_meta("gamma", params.gamma);
    if !params.gamma_by_degree.is_empty() {
        let g: Vec<String> = params.gamma_by_degree.iter().map(|(d, g)| format!("{d}:{g}")).collect();
        catalog.set_meta("gamma_by_degree", g.join(","));
    }
    catalog.set_meta("eb_no_db", params.eb_no_db);
    catalog.set_meta("v_num", params.v_num.map_or("full".to_string(), |v| v.to_string()));
    catalog.set_meta("tree_depth", params.tree_depth);
    catalog.set_meta("decoder", cfg.algorithm);
    catalog.set_meta("max_iters", cfg.max_iters);
    catalog.set_meta("roots", roots.len());
    catalog.set_meta("decodings", decodings);
    catalog.set_meta("predicted_decodings", predicted);
    catalog.set_meta("skipped_duplicates", skipped);
    catalog.set_meta(
        "mean_iterations",
        format!("{:.4}", if decodings == 0 { 0.0 } else { iterations as f64 / decodings as f64 }),
    );

    Ok(SearchReport {
        catalog,
        decodings,
        skipped_duplicates: skipped,
        total_iterations: iterations,
        predicted_decodings: predicted,
    })
}
