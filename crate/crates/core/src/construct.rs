//! Progressive edge growth, for generating fixture codes.
//!
//! Each new edge of a variable goes to a check that is as far as possible
//! from it in the current graph, preferring the lowest check degree and
//! breaking remaining ties with the supplied generator. Check degrees are
//! capped so that a regular profile comes out exactly regular.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::code::TannerCode;
use crate::error::{Error, Result};

/// Builds an `m`-check code whose variable `j` has degree `var_degrees[j]`.
/// No check receives more than `max_check_degree` edges.
pub fn peg(m: usize, var_degrees: &[usize], max_check_degree: usize, seed: u64) -> Result<TannerCode> {
    let edges: usize = var_degrees.iter().sum();
    if m == 0 || edges > m * max_check_degree {
        return Err(Error::InvalidParameter(format!(
            "{edges} edges do not fit into {m} checks of degree <= {max_check_degree}"
        )));
    }
    if let Some(&d) = var_degrees.iter().find(|&&d| d == 0 || d > m) {
        return Err(Error::InvalidParameter(format!("variable degree {d} not in 1..={m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = var_degrees.len();
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| var_degrees[v]);
    for v in order {
        for _ in 0..var_degrees[v] {
            let open = |c: usize, rows: &[Vec<usize>], cols: &[Vec<usize>]| {
                rows[c].len() < max_check_degree && !cols[v].contains(&c)
            };
            let dist = check_distances(v, &cols, &rows);
            let mut pool: Vec<usize> = (0..m).filter(|&c| open(c, &rows, &cols)).collect();
            let far = pool.iter().map(|&c| dist[c]).max().unwrap_or(0);
            pool.retain(|&c| dist[c] == far);
            let low = pool.iter().map(|&c| rows[c].len()).min().ok_or_else(|| {
                Error::InvalidParameter("check degree cap leaves no free check".into())
            })?;
            pool.retain(|&c| rows[c].len() == low);
            let &c = pool.choose(&mut rng).expect("non-empty pool");
            cols[v].push(c);
            rows[c].push(v);
        }
    }
    for col in &mut cols {
        col.sort_unstable();
    }
    TannerCode::from_columns(m, cols)
}

/// BFS distance (in check layers) from `v` to every check; unreachable
/// checks get `usize::MAX`.
fn check_distances(v: usize, cols: &[Vec<usize>], rows: &[Vec<usize>]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; rows.len()];
    let mut seen_v = vec![false; cols.len()];
    seen_v[v] = true;
    let mut frontier = vec![v];
    let mut depth = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for &c in &cols[u] {
                if dist[c] == usize::MAX {
                    dist[c] = depth;
                    for &w in &rows[c] {
                        if !seen_v[w] {
                            seen_v[w] = true;
                            next.push(w);
                        }
                    }
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    dist
}

/// Regular `{dv, dc}` code of length `n` by progressive edge growth.
pub fn peg_regular(n: usize, dv: usize, dc: usize, seed: u64) -> Result<TannerCode> {
    if dc == 0 || !(n * dv).is_multiple_of(dc) {
        return Err(Error::InvalidParameter(format!("n*dv = {} is not a multiple of dc = {dc}", n * dv)));
    }
    peg(n * dv / dc, &vec![dv; n], dc, seed)
}

/// Tries `attempts` consecutive seeds starting at `seed` and returns the
/// first regular code whose girth is at least `min_girth`.
pub fn peg_regular_with_girth(
    n: usize,
    dv: usize,
    dc: usize,
    min_girth: usize,
    seed: u64,
    attempts: u64,
) -> Result<TannerCode> {
    for s in seed..seed + attempts {
        let code = peg_regular(n, dv, dc, s)?;
        if code.girth().at_least(min_girth) {
            return Ok(code);
        }
    }
    Err(Error::InvalidParameter(format!(
        "no {{{dv},{dc}}} code of length {n} with girth >= {min_girth} in {attempts} attempts"
    )))
}

/// Random code without 4-cycles: columns are drawn one at a time from
/// checks with spare capacity (least used first), rejecting any check that
/// already shares a variable with a chosen one. Restarts on dead ends.
pub fn random_girth6(
    m: usize,
    var_degrees: &[usize],
    max_check_degree: usize,
    seed: u64,
    attempts: usize,
) -> Result<TannerCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..attempts {
        let mut cols: Vec<Vec<usize>> = Vec::with_capacity(var_degrees.len());
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        for &d in var_degrees {
            let mut col: Vec<usize> = Vec::with_capacity(d);
            for _ in 0..d {
                let ok = |c: usize| {
                    rows[c].len() < max_check_degree
                        && !col.contains(&c)
                        && col.iter().all(|&k| rows[k].iter().all(|u| !rows[c].contains(u)))
                };
                let mut pool: Vec<usize> = (0..m).filter(|&c| ok(c)).collect();
                let Some(low) = pool.iter().map(|&c| rows[c].len()).min() else {
                    continue 'attempt;
                };
                pool.retain(|&c| rows[c].len() == low);
                col.push(*pool.choose(&mut rng).expect("non-empty pool"));
            }
            col.sort_unstable();
            for &c in &col {
                rows[c].push(cols.len());
            }
            cols.push(col);
        }
        if rows.iter().all(|r| !r.is_empty()) {
            return TannerCode::from_columns(m, cols);
        }
    }
    Err(Error::InvalidParameter(format!("no 4-cycle-free code found in {attempts} attempts")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_profile_is_exact() {
        let code = peg_regular(96, 3, 6, 1).unwrap();
        assert_eq!(code.regular_degrees(), Some((3, 6)));
        let code = peg_regular_with_girth(96, 3, 6, 6, 1, 20).unwrap();
        assert!(code.girth().at_least(6));
    }

    #[test]
    fn small_codes_without_four_cycles() {
        for seed in 0..5 {
            let code = random_girth6(12, &[3; 16], 4, seed, 1000).unwrap();
            assert_eq!(code.regular_degrees(), Some((3, 4)));
            assert!(code.girth().at_least(6));
        }
    }

    #[test]
    fn seed_determines_code() {
        assert_eq!(peg_regular(48, 3, 6, 9).unwrap(), peg_regular(48, 3, 6, 9).unwrap());
    }

    #[test]
    fn impossible_profiles_rejected() {
        assert!(peg_regular(10, 3, 4, 0).is_err());
        assert!(peg(2, &[3], 4, 0).is_err());
    }
}
