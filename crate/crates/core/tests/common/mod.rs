//! Independent reference computations shared by the integration tests.
//! Nothing here calls the library's own classification, girth or tree code.

#![allow(dead_code)]

use errfloor::code::TannerCode;
use errfloor::construct::random_girth6;

/// Reference class of a support: recount parities from the column lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefClass {
    pub a: usize,
    pub b: usize,
    pub edges: usize,
    pub touched: usize,
    pub elementary: bool,
}

pub fn ref_classify(cols: &[Vec<usize>], m: usize, support: &[usize]) -> RefClass {
    let mut count = vec![0usize; m];
    for &v in support {
        for &c in &cols[v] {
            count[c] += 1;
        }
    }
    let b = count.iter().filter(|&&k| k % 2 == 1).count();
    let touched = count.iter().filter(|&&k| k > 0).count();
    let edges = support.iter().map(|&v| cols[v].len()).sum();
    let elementary = count.iter().all(|&k| k == 0 || k == 1 || k == 2);
    RefClass { a: support.len(), b, edges, touched, elementary }
}

/// Shortest cycle by exhaustive depth-first search over simple cycles of
/// increasing length. Nodes: variables `0..n`, checks `n..n+m`.
pub fn ref_girth(cols: &[Vec<usize>], m: usize) -> Option<usize> {
    let n = cols.len();
    let mut adj = vec![Vec::new(); n + m];
    for (v, cs) in cols.iter().enumerate() {
        for &c in cs {
            adj[v].push(n + c);
            adj[n + c].push(v);
        }
    }
    fn dfs(adj: &[Vec<usize>], start: usize, at: usize, left: usize, on: &mut [bool]) -> bool {
        for &nx in &adj[at] {
            if left == 1 {
                if nx == start {
                    return true;
                }
                continue;
            }
            // Only visit nodes above the start so each cycle is found from
            // its smallest node.
            if nx > start && !on[nx] {
                on[nx] = true;
                if dfs(adj, start, nx, left - 1, on) {
                    return true;
                }
                on[nx] = false;
            }
        }
        false
    }
    let mut len = 4;
    while len <= 2 * n.min(m) {
        for s in 0..n + m {
            let mut on = vec![false; n + m];
            on[s] = true;
            if dfs(&adj, s, s, len, &mut on) {
                return Some(len);
            }
        }
        len += 2;
    }
    None
}

/// Reference branch sets of `root`: for each of its checks, the other
/// variables on that check.
pub fn ref_branches(cols: &[Vec<usize>], rows: &[Vec<usize>], root: usize) -> Vec<Vec<usize>> {
    cols[root].iter().map(|&c| rows[c].iter().copied().filter(|&v| v != root).collect()).collect()
}

/// Transposes column lists.
pub fn rows_of(cols: &[Vec<usize>], m: usize) -> Vec<Vec<usize>> {
    let mut rows = vec![Vec::new(); m];
    for (v, cs) in cols.iter().enumerate() {
        for &c in cs {
            rows[c].push(v);
        }
    }
    rows
}

/// Basis of the GF(2) null space of H (rows as bitmasks over n ≤ 64).
pub fn ref_codeword_basis(cols: &[Vec<usize>], m: usize) -> Vec<u64> {
    let n = cols.len();
    assert!(n <= 64);
    let rows = rows_of(cols, m);
    let mut mat: Vec<u64> = rows.iter().map(|r| r.iter().fold(0u64, |acc, &v| acc | 1 << v)).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..mat.len()).find(|&i| mat[i] >> c & 1 == 1) else { continue };
        mat.swap(r, p);
        for i in 0..mat.len() {
            if i != r && mat[i] >> c & 1 == 1 {
                mat[i] ^= mat[r];
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = 1u64 << f;
            for (i, &p) in pivots.iter().enumerate() {
                if mat[i] >> f & 1 == 1 {
                    x |= 1 << p;
                }
            }
            x
        })
        .collect()
}

pub fn mask_to_support(x: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| x >> i & 1 == 1).collect()
}

/// Outcome of an exhaustive scan over all nonzero patterns.
#[derive(Debug, Default)]
pub struct S2CoverScan {
    pub patterns_a_gt_b: u64,
    pub violations: Vec<u64>,
}

/// Walks every nonzero pattern in Gray-code order, maintaining per-check
/// support counts, and checks that each pattern with `a > b` contains a
/// root plus one support variable in every branch of that root.
pub fn s2_cover_scan(cols: &[Vec<usize>], m: usize) -> S2CoverScan {
    let n = cols.len();
    assert!(n <= 32);
    let rows = rows_of(cols, m);
    let branch_masks: Vec<Vec<u64>> = (0..n)
        .map(|v| ref_branches(cols, &rows, v).iter().map(|b| b.iter().fold(0u64, |a, &u| a | 1 << u)).collect())
        .collect();
    let mut count = vec![0u8; m];
    let mut b = 0usize;
    let mut x = 0u64;
    let mut out = S2CoverScan::default();
    for i in 1u64..(1u64 << n) {
        let bit = i.trailing_zeros() as usize;
        x ^= 1 << bit;
        let adding = x >> bit & 1 == 1;
        for &c in &cols[bit] {
            if adding {
                count[c] += 1;
            } else {
                count[c] -= 1;
            }
            if count[c] % 2 == 1 {
                b += 1;
            } else {
                b -= 1;
            }
        }
        let a = x.count_ones() as usize;
        if a > b {
            out.patterns_a_gt_b += 1;
            let mut rest = x;
            let mut found = false;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if branch_masks[v].iter().all(|&bm| bm & x != 0) {
                    found = true;
                    break;
                }
            }
            if !found {
                out.violations.push(x);
            }
        }
    }
    out
}

/// Families used for small-code checks: `(m, variable degrees, check cap)`.
pub fn small_families() -> Vec<(usize, Vec<usize>, usize)> {
    let mut irregular = vec![2; 8];
    irregular.extend(vec![3; 8]);
    vec![
        (12, vec![3; 16], 4),
        (15, vec![3; 20], 4),
        (18, vec![3; 24], 4),
        (12, vec![3; 20], 5),
        (8, vec![2; 16], 4),
        (12, vec![2; 24], 4),
        (8, vec![2; 12], 3),
        (12, vec![2; 18], 3),
        (10, irregular, 4),
    ]
}

/// At least `count` small 4-cycle-free codes, cycling through the families.
pub fn small_codes(count: usize, seed: u64) -> Vec<TannerCode> {
    let fams = small_families();
    (0..count)
        .map(|i| {
            let (m, degs, cap) = &fams[i % fams.len()];
            random_girth6(*m, degs, *cap, seed + i as u64, 5000).expect("family admits girth 6")
        })
        .collect()
}
