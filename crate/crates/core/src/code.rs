//! Parity-check matrix model.
//!
//! A [`TannerCode`] holds the sparse parity-check matrix `H` as a pair of
//! adjacency lists (variable → checks and check → variables). Everything
//! here is 0-based; the alist format is 1-based and converted at the I/O
//! boundary.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Shortest-cycle length of a Tanner graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Girth {
    Cycle(usize),
    Acyclic,
}

impl Girth {
    pub fn length(self) -> Option<usize> {
        match self {
            Girth::Cycle(g) => Some(g),
            Girth::Acyclic => None,
        }
    }

    /// True when no cycle shorter than `g` exists.
    pub fn at_least(self, g: usize) -> bool {
        match self {
            Girth::Cycle(len) => len >= g,
            Girth::Acyclic => true,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Cycle(g) => write!(f, "{g}"),
            Girth::Acyclic => f.write_str("acyclic"),
        }
    }
}

/// An LDPC code given by its parity-check matrix.
#[derive(Debug)]
pub struct TannerCode {
    n: usize,
    m: usize,
    k: usize,
    col_adjacency: Vec<Vec<usize>>,
    row_adjacency: Vec<Vec<usize>>,
    girth: OnceLock<Girth>,
}

impl Clone for TannerCode {
    fn clone(&self) -> Self {
        let girth = OnceLock::new();
        if let Some(g) = self.girth.get() {
            let _ = girth.set(*g);
        }
        TannerCode {
            n: self.n,
            m: self.m,
            k: self.k,
            col_adjacency: self.col_adjacency.clone(),
            row_adjacency: self.row_adjacency.clone(),
            girth,
        }
    }
}

impl PartialEq for TannerCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.m == other.m
            && self.col_adjacency == other.col_adjacency
            && self.row_adjacency == other.row_adjacency
    }
}

impl TannerCode {
    /// Builds a code from per-variable check lists. Row adjacency is derived
    /// in ascending variable order.
    pub fn from_columns(m: usize, columns: Vec<Vec<usize>>) -> Result<Self> {
        let n = columns.len();
        if n == 0 || m == 0 {
            return Err(Error::InvalidCode("empty matrix".into()));
        }
        let mut rows = vec![Vec::new(); m];
        for (v, col) in columns.iter().enumerate() {
            if col.is_empty() {
                return Err(Error::InvalidCode(format!("variable {v} has degree 0")));
            }
            let mut seen = BTreeSet::new();
            for &c in col {
                if c >= m {
                    return Err(Error::InvalidCode(format!(
                        "variable {v} references check {c} (m = {m})"
                    )));
                }
                if !seen.insert(c) {
                    return Err(Error::InvalidCode(format!(
                        "duplicate edge (variable {v}, check {c})"
                    )));
                }
                rows[c].push(v);
            }
        }
        if let Some(c) = rows.iter().position(|r| r.is_empty()) {
            return Err(Error::InvalidCode(format!("check {c} has degree 0")));
        }
        Ok(TannerCode {
            n,
            m,
            k: n.saturating_sub(m),
            col_adjacency: columns,
            row_adjacency: rows,
            girth: OnceLock::new(),
        })
    }

    /// Builds a code from a dense 0/1 matrix given row by row.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut cols = vec![Vec::new(); n];
        for (c, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: row.len() });
            }
            for (v, &bit) in row.iter().enumerate() {
                if bit != 0 {
                    cols[v].push(c);
                }
            }
        }
        Self::from_columns(m, cols)
    }

    /// Overrides the reported dimension (defaults to `n - m`).
    pub fn with_dimension(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Checks incident to variable `v`.
    pub fn checks_of(&self, v: usize) -> &[usize] {
        &self.col_adjacency[v]
    }

    /// Variables incident to check `c`.
    pub fn vars_of(&self, c: usize) -> &[usize] {
        &self.row_adjacency[c]
    }

    pub fn col_adjacency(&self) -> &[Vec<usize>] {
        &self.col_adjacency
    }

    pub fn row_adjacency(&self) -> &[Vec<usize>] {
        &self.row_adjacency
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.col_adjacency[v].len()
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.row_adjacency[c].len()
    }

    pub fn num_edges(&self) -> usize {
        self.col_adjacency.iter().map(Vec::len).sum()
    }

    /// Variable-degree profile, degree → count.
    pub fn dv_profile(&self) -> BTreeMap<usize, usize> {
        degree_profile(&self.col_adjacency)
    }

    /// Check-degree profile, degree → count.
    pub fn dc_profile(&self) -> BTreeMap<usize, usize> {
        degree_profile(&self.row_adjacency)
    }

    /// `Some((dv, dc))` when both profiles have a single degree.
    pub fn regular_degrees(&self) -> Option<(usize, usize)> {
        let dv = self.dv_profile();
        let dc = self.dc_profile();
        if dv.len() == 1 && dc.len() == 1 {
            Some((*dv.keys().next()?, *dc.keys().next()?))
        } else {
            None
        }
    }

    /// Shortest cycle length, computed on first use.
    pub fn girth(&self) -> Girth {
        *self.girth.get_or_init(|| compute_girth(self))
    }

    /// GF(2) rank of `H` by dense elimination.
    pub fn gf2_rank(&self) -> usize {
        let words = self.n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = self
            .row_adjacency
            .iter()
            .map(|r| {
                let mut bits = vec![0u64; words];
                for &v in r {
                    bits[v / 64] ^= 1 << (v % 64);
                }
                bits
            })
            .collect();
        let mut rank = 0;
        for col in 0..self.n {
            let (w, b) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & b != 0 {
                    row.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
                }
            }
            rank += 1;
        }
        rank
    }

    fn check_len(&self, x: &BitPattern) -> Result<()> {
        if x.n() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: x.n() });
        }
        Ok(())
    }

    /// Number of edges from `support` into every check, indexed by check.
    fn edge_counts(&self, support: &[usize]) -> Vec<u32> {
        let mut counts = vec![0u32; self.m];
        for &v in support {
            for &c in &self.col_adjacency[v] {
                counts[c] += 1;
            }
        }
        counts
    }

    /// Unsatisfied checks of `x·Hᵀ`.
    pub fn syndrome(&self, x: &BitPattern) -> Result<Syndrome> {
        self.check_len(x)?;
        let counts = self.edge_counts(x.support());
        let checks: Vec<usize> = counts
            .iter()
            .enumerate()
            .filter(|(_, &k)| k % 2 == 1)
            .map(|(c, _)| c)
            .collect();
        Ok(Syndrome { weight: checks.len(), checks })
    }

    /// Syndrome weight of a dense hard decision (`true` = bit 1).
    pub fn syndrome_weight_dense(&self, bits: &[bool]) -> usize {
        self.row_adjacency
            .iter()
            .filter(|row| row.iter().filter(|&&v| bits[v]).count() % 2 == 1)
            .count()
    }

    /// Trapping-set class of `x`.
    pub fn classify(&self, x: &BitPattern) -> Result<TsClass> {
        self.check_len(x)?;
        let counts = self.edge_counts(x.support());
        let edges = x.support().iter().map(|&v| self.var_degree(v)).sum();
        let mut b = 0;
        let mut touched = 0;
        let mut elementary = true;
        for &k in &counts {
            if k == 0 {
                continue;
            }
            touched += 1;
            if k % 2 == 1 {
                b += 1;
                elementary &= k == 1;
            } else {
                elementary &= k == 2;
            }
        }
        Ok(TsClass { a: x.weight(), b, edges, checks_touched: touched, elementary })
    }

    /// Breadth-first tree around `root`. `depth` is 1 or 2 variable tiers.
    pub fn neighbor_tree(&self, root: usize, depth: usize) -> Result<NeighborTree> {
        build_neighbor_tree(self, root, depth)
    }

    /// Variables ordered by ascending degree, ties by index.
    pub fn search_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&v| self.var_degree(v));
        order
    }

    /// Serializes in the unpadded alist dialect.
    pub fn to_alist(&self) -> String {
        use std::fmt::Write;
        let max_dv = self.col_adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let max_dc = self.row_adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        let join = |xs: &mut dyn Iterator<Item = usize>| {
            xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        };
        let _ = writeln!(out, "{} {}", self.n, self.m);
        let _ = writeln!(out, "{max_dv} {max_dc}");
        let _ = writeln!(out, "{}", join(&mut self.col_adjacency.iter().map(Vec::len)));
        let _ = writeln!(out, "{}", join(&mut self.row_adjacency.iter().map(Vec::len)));
        for col in &self.col_adjacency {
            let _ = writeln!(out, "{}", join(&mut col.iter().map(|c| c + 1)));
        }
        for row in &self.row_adjacency {
            let _ = writeln!(out, "{}", join(&mut row.iter().map(|v| v + 1)));
        }
        out
    }
}

fn degree_profile(adj: &[Vec<usize>]) -> BTreeMap<usize, usize> {
    let mut profile = BTreeMap::new();
    for list in adj {
        *profile.entry(list.len()).or_insert(0) += 1;
    }
    profile
}

/// Parses the alist sparse-matrix format.
///
/// Column and row lists may carry zero padding; zeros are skipped. The row
/// section must describe exactly the transpose of the column section.
pub fn parse_alist(text: &str) -> Result<TannerCode> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut next_line = |what: &str| -> Result<(usize, Vec<usize>)> {
        let (no, line) = lines.next().ok_or_else(|| Error::Alist {
            line: text.lines().count() + 1,
            msg: format!("unexpected end of input, expected {what}"),
        })?;
        let nums = line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|_| Error::Alist {
                    line: no,
                    msg: format!("not a non-negative integer: {t:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((no, nums))
    };

    let (no, header) = next_line("'n m'")?;
    let [n, m] = header[..] else {
        return Err(Error::Alist { line: no, msg: "expected two counts 'n m'".into() });
    };
    if n == 0 || m == 0 {
        return Err(Error::Alist { line: no, msg: "n and m must be positive".into() });
    }
    let (no, maxes) = next_line("'max_dv max_dc'")?;
    let [max_dv, max_dc] = maxes[..] else {
        return Err(Error::Alist { line: no, msg: "expected 'max_dv max_dc'".into() });
    };
    let (no, col_deg) = next_line("column degrees")?;
    if col_deg.len() != n {
        return Err(Error::Alist {
            line: no,
            msg: format!("expected {n} column degrees, found {}", col_deg.len()),
        });
    }
    if let Some(d) = col_deg.iter().find(|&&d| d > max_dv || d == 0) {
        return Err(Error::Alist { line: no, msg: format!("column degree {d} outside 1..={max_dv}") });
    }
    let (no, row_deg) = next_line("row degrees")?;
    if row_deg.len() != m {
        return Err(Error::Alist {
            line: no,
            msg: format!("expected {m} row degrees, found {}", row_deg.len()),
        });
    }
    if let Some(d) = row_deg.iter().find(|&&d| d > max_dc || d == 0) {
        return Err(Error::Alist { line: no, msg: format!("row degree {d} outside 1..={max_dc}") });
    }

    let mut read_lists = |count: usize, degrees: &[usize], bound: usize, kind: &str| {
        let mut lists = Vec::with_capacity(count);
        for (i, &deg) in degrees.iter().enumerate() {
            let (no, raw) = next_line(kind)?;
            let mut list = Vec::with_capacity(deg);
            for idx in raw.into_iter().filter(|&x| x != 0) {
                if idx > bound {
                    return Err(Error::Alist {
                        line: no,
                        msg: format!("index {idx} out of range 1..={bound}"),
                    });
                }
                if list.contains(&(idx - 1)) {
                    return Err(Error::Alist { line: no, msg: format!("duplicate edge index {idx}") });
                }
                list.push(idx - 1);
            }
            if list.len() != deg {
                return Err(Error::Alist {
                    line: no,
                    msg: format!("{kind} {} lists {} entries, declared degree {deg}", i + 1, list.len()),
                });
            }
            lists.push((no, list));
        }
        Ok::<_, Error>(lists)
    };

    let cols = read_lists(n, &col_deg, m, "column")?;
    let rows = read_lists(m, &row_deg, n, "row")?;

    let code = TannerCode::from_columns(m, cols.into_iter().map(|(_, l)| l).collect())
        .map_err(|e| Error::Alist { line: 0, msg: e.to_string() })?;

    for (c, (no, listed)) in rows.iter().enumerate() {
        let mut listed = listed.clone();
        listed.sort_unstable();
        if listed != code.row_adjacency[c] {
            return Err(Error::Alist {
                line: *no,
                msg: format!("row {} is not consistent with the column lists", c + 1),
            });
        }
    }
    Ok(code)
}

/// Sparse length-`n` binary vector in canonical form (sorted, unique).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitPattern {
    n: usize,
    support: Vec<usize>,
}

impl BitPattern {
    pub fn new(n: usize, mut support: Vec<usize>) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if let Some(&last) = support.last() {
            if last >= n {
                return Err(Error::IndexOutOfRange { index: last, len: n });
            }
        }
        Ok(BitPattern { n, support })
    }

    pub fn zeros(n: usize) -> Self {
        BitPattern { n, support: Vec::new() }
    }

    /// From a dense hard decision (`true` = bit 1).
    pub fn from_bits(bits: &[bool]) -> Self {
        BitPattern {
            n: bits.len(),
            support: bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.support.binary_search(&v).is_ok()
    }

    pub fn to_bits(&self) -> Vec<bool> {
        let mut bits = vec![false; self.n];
        for &v in &self.support {
            bits[v] = true;
        }
        bits
    }

    /// True when every bit of `other` is also set here.
    pub fn is_superset_of(&self, other: &BitPattern) -> bool {
        other.support.iter().all(|v| self.contains(*v))
    }
}

/// Unsatisfied checks and their count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syndrome {
    pub checks: Vec<usize>,
    pub weight: usize,
}

/// `(a, b)` class of a bit pattern plus its edge statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TsClass {
    pub a: usize,
    pub b: usize,
    /// Edges leaving the support: the sum of the support's variable degrees.
    pub edges: usize,
    /// Checks with at least one edge into the support.
    pub checks_touched: usize,
    /// Every unsatisfied touched check has one support edge and every
    /// satisfied touched check has two.
    pub elementary: bool,
}

impl TsClass {
    /// `(edges - b) / 2 + b`, exact for elementary sets.
    pub fn elementary_check_count(&self) -> usize {
        (self.edges - self.b) / 2 + self.b
    }

    pub fn label(&self) -> (usize, usize) {
        (self.a, self.b)
    }
}

impl fmt::Display for TsClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// Exact girth by breadth-first search from every variable node.
pub fn compute_girth(code: &TannerCode) -> Girth {
    // Nodes 0..n are variables, n..n+m checks. Every cycle passes through a
    // variable, so rooting at variables suffices.
    let n = code.n;
    let total = n + code.m;
    let neighbors = |u: usize| -> &[usize] {
        if u < n {
            &code.col_adjacency[u]
        } else {
            &code.row_adjacency[u - n]
        }
    };
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; total];
    let mut parent = vec![usize::MAX; total];
    let mut queue = std::collections::VecDeque::new();
    let mut touched = Vec::new();
    for root in 0..n {
        for &t in &touched {
            dist[t] = usize::MAX;
            parent[t] = usize::MAX;
        }
        touched.clear();
        queue.clear();
        dist[root] = 0;
        touched.push(root);
        queue.push_back(root);
        'bfs: while let Some(u) = queue.pop_front() {
            if 2 * dist[u] >= best {
                break;
            }
            let offset = if u < n { n } else { 0 };
            for &raw in neighbors(u) {
                let w = raw + offset;
                if w == parent[u] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    touched.push(w);
                    queue.push_back(w);
                } else {
                    best = best.min(dist[u] + dist[w] + 1);
                    if best == 4 {
                        break 'bfs;
                    }
                }
            }
        }
        if best == 4 {
            break;
        }
    }
    if best == usize::MAX {
        Girth::Acyclic
    } else {
        Girth::Cycle(best)
    }
}

/// One check branch of a [`NeighborTree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    /// The check this branch hangs from.
    pub check: usize,
    /// Variables under `check`, excluding the parent variable.
    pub variables: Vec<usize>,
    /// For depth-2 trees, `children[j]` holds the further branches of
    /// `variables[j]` (one per remaining check). Empty at depth 1.
    pub children: Vec<Vec<Branch>>,
}

/// Breadth-first tree rooted at a variable node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborTree {
    pub root: usize,
    pub depth: usize,
    /// One branch per check of the root.
    pub branches: Vec<Branch>,
    /// Distinct variables at variable tier two (depth 2 only), excluding
    /// the root and tier-one variables.
    pub tier2_variables: Vec<usize>,
    /// Set when short cycles make a node appear more than once.
    pub duplicates_present: bool,
}

impl NeighborTree {
    /// The tier-one variable groups, one per root check.
    pub fn tier1_sets(&self) -> Vec<&[usize]> {
        self.branches.iter().map(|b| b.variables.as_slice()).collect()
    }

    /// Distinct tier-one variables.
    pub fn tier1_variables(&self) -> Vec<usize> {
        let set: BTreeSet<usize> =
            self.branches.iter().flat_map(|b| b.variables.iter().copied()).collect();
        set.into_iter().collect()
    }

    /// Variables hanging below the chosen tier-one nodes, given as
    /// `(branch, position)` pairs. Excludes the root and the chosen nodes.
    pub fn below(&self, picks: &[(usize, usize)]) -> Vec<usize> {
        let chosen: BTreeSet<usize> =
            picks.iter().map(|&(b, j)| self.branches[b].variables[j]).collect();
        let mut out = BTreeSet::new();
        for &(b, j) in picks {
            if let Some(groups) = self.branches[b].children.get(j) {
                for g in groups {
                    out.extend(g.variables.iter().copied());
                }
            }
        }
        out.remove(&self.root);
        out.into_iter().filter(|v| !chosen.contains(v)).collect()
    }
}

/// Builds the tree of `depth` variable tiers (1 or 2) around `root`.
pub fn build_neighbor_tree(code: &TannerCode, root: usize, depth: usize) -> Result<NeighborTree> {
    if root >= code.n {
        return Err(Error::IndexOutOfRange { index: root, len: code.n });
    }
    if !(1..=2).contains(&depth) {
        return Err(Error::InvalidParameter(format!("tree depth must be 1 or 2, got {depth}")));
    }
    let branch = |parent: usize, check: usize| Branch {
        check,
        variables: code.row_adjacency[check].iter().copied().filter(|&v| v != parent).collect(),
        children: Vec::new(),
    };

    let mut branches: Vec<Branch> =
        code.col_adjacency[root].iter().map(|&c| branch(root, c)).collect();

    let mut seen = BTreeSet::new();
    let mut duplicates = false;
    for b in &branches {
        for &v in &b.variables {
            duplicates |= !seen.insert(v);
        }
    }

    let mut tier2 = BTreeSet::new();
    if depth == 2 {
        for b in &mut branches {
            let parent_check = b.check;
            b.children = b
                .variables
                .iter()
                .map(|&u| {
                    let groups: Vec<Branch> = code.col_adjacency[u]
                        .iter()
                        .filter(|&&c| c != parent_check)
                        .map(|&c| branch(u, c))
                        .collect();
                    groups
                })
                .collect();
            for groups in &b.children {
                for g in groups {
                    for &w in &g.variables {
                        duplicates |= !tier2.insert(w) || w == root || seen.contains(&w);
                    }
                }
            }
        }
        tier2.remove(&root);
        for v in &seen {
            tier2.remove(v);
        }
    }

    Ok(NeighborTree {
        root,
        depth,
        branches,
        tier2_variables: tier2.into_iter().collect(),
        duplicates_present: duplicates,
    })
}
