//! Catalog of discovered error events and its text/CSV serializations.
//!
//! Text format: `#`-prefixed header lines carrying `key=value` metadata,
//! then one record per line,
//!
//! ```text
//! <1-based support, space separated>;<a>;<b>;<elementary 0|1>;<count>
//! ```
//!
//! The only volatile header line is `# wall_time_secs=...`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::code::{BitPattern, TannerCode, TsClass};
use crate::error::{Error, Result};

/// One catalog entry.
#[derive(Debug, Clone, PartialEq)]
pub struct TsRecord {
    pub class: TsClass,
    /// How many times the event was hit.
    pub count: u64,
    /// Root (search) or center index (simulation) of the first discovery.
    pub first_root: usize,
    /// Squared distance to the error boundary, once probed.
    pub d_e2: Option<f64>,
}

/// Error events keyed by canonical support.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TsCatalog {
    pub n: usize,
    pub entries: BTreeMap<BitPattern, TsRecord>,
    /// Ordered `key=value` metadata written into the header.
    pub meta: Vec<(String, String)>,
    pub wall_time_secs: f64,
}

/// Per-class summary row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassCount {
    pub a: usize,
    pub b: usize,
    pub multiplicity: usize,
    pub elementary: usize,
}

impl TsCatalog {
    pub fn new(n: usize) -> Self {
        TsCatalog { n, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `count` discoveries of `pattern`; the first discovery keeps its
    /// root.
    pub fn upsert(&mut self, pattern: BitPattern, class: TsClass, count: u64, root: usize) {
        self.entries
            .entry(pattern)
            .and_modify(|r| r.count += count)
            .or_insert(TsRecord { class, count, first_root: root, d_e2: None });
    }

    /// Folds `later` into `self`. Counts add; entries already present keep
    /// their first root.
    pub fn merge(&mut self, later: TsCatalog) {
        for (p, r) in later.entries {
            match self.entries.get_mut(&p) {
                Some(e) => {
                    e.count += r.count;
                    if e.d_e2.is_none() {
                        e.d_e2 = r.d_e2;
                    }
                }
                None => {
                    self.entries.insert(p, r);
                }
            }
        }
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key.to_string(), value)),
        }
    }

    /// Class multiplicities ordered by `b`, then `a`.
    pub fn class_counts(&self) -> Vec<ClassCount> {
        let mut by_class: BTreeMap<(usize, usize), ClassCount> = BTreeMap::new();
        for r in self.entries.values() {
            let row = by_class.entry((r.class.b, r.class.a)).or_insert(ClassCount {
                a: r.class.a,
                b: r.class.b,
                multiplicity: 0,
                elementary: 0,
            });
            row.multiplicity += 1;
            row.elementary += usize::from(r.class.elementary);
        }
        by_class.into_values().collect()
    }

    /// Text serialization (see module docs).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# errfloor catalog v1");
        let _ = writeln!(out, "# n={}", self.n);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "# wall_time_secs={:.3}", self.wall_time_secs);
        let _ = writeln!(out, "# support;a;b;elementary;count");
        for (p, r) in &self.entries {
            let _ = writeln!(
                out,
                "{};{};{};{};{}",
                one_based(p),
                r.class.a,
                r.class.b,
                u8::from(r.class.elementary),
                r.count
            );
        }
        out
    }

    /// CSV mirror of the records.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("support,a,b,elementary,count\n");
        for (p, r) in &self.entries {
            let _ = writeln!(
                out,
                "\"{}\",{},{},{},{}",
                one_based(p),
                r.class.a,
                r.class.b,
                u8::from(r.class.elementary),
                r.count
            );
        }
        out
    }

    /// Parses the text serialization. With `code`, each record's stored
    /// class is re-derived and compared.
    pub fn from_text(text: &str, code: Option<&TannerCode>) -> Result<TsCatalog> {
        let mut cat = TsCatalog::default();
        let mut n = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let h = h.trim();
                if let Some((k, v)) = h.split_once('=') {
                    match k {
                        "n" => {
                            n = Some(v.parse().map_err(|_| fmt_err(line_no, "bad n"))?);
                        }
                        "wall_time_secs" => cat.wall_time_secs = v.parse().unwrap_or(0.0),
                        _ => cat.meta.push((k.to_string(), v.to_string())),
                    }
                }
                continue;
            }
            let n = n.ok_or_else(|| fmt_err(line_no, "record before '# n=' header"))?;
            let fields: Vec<&str> = line.split(';').collect();
            let [support, a, b, elem, count] = fields[..] else {
                return Err(fmt_err(line_no, "expected 5 ';'-separated fields"));
            };
            let support = support
                .split_whitespace()
                .map(|t| match t.parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(fmt_err(line_no, "support indices are 1-based integers")),
                })
                .collect::<Result<Vec<_>>>()?;
            let pattern = BitPattern::new(n, support)
                .map_err(|e| fmt_err(line_no, &e.to_string()))?;
            let num = |s: &str| s.trim().parse::<u64>().map_err(|_| fmt_err(line_no, "bad number"));
            let (a, b, count) = (num(a)? as usize, num(b)? as usize, num(count)?);
            let elementary = match elem.trim() {
                "1" => true,
                "0" => false,
                _ => return Err(fmt_err(line_no, "elementary flag must be 0 or 1")),
            };
            let class = match code {
                Some(code) => {
                    let c = code.classify(&pattern)?;
                    if (c.a, c.b, c.elementary) != (a, b, elementary) {
                        return Err(fmt_err(line_no, "stored class disagrees with the code"));
                    }
                    c
                }
                None => TsClass { a, b, edges: 0, checks_touched: 0, elementary },
            };
            if pattern.weight() != a {
                return Err(fmt_err(line_no, "a differs from support size"));
            }
            cat.entries.insert(pattern, TsRecord { class, count, first_root: 0, d_e2: None });
        }
        cat.n = n.ok_or_else(|| fmt_err(1, "missing '# n=' header"))?;
        Ok(cat)
    }
}

fn fmt_err(line: usize, msg: &str) -> Error {
    Error::CatalogFormat { line, msg: msg.to_string() }
}

/// 1-based, space-separated support.
pub fn one_based(p: &BitPattern) -> String {
    p.support().iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> TannerCode {
        TannerCode::from_columns(4, vec![vec![0, 1], vec![0, 2], vec![1, 3], vec![2, 3]]).unwrap()
    }

    #[test]
    fn text_roundtrip_with_reclassification() {
        let code = tiny();
        let mut cat = TsCatalog::new(4);
        for s in [vec![0, 1], vec![2], vec![0, 1, 2, 3]] {
            let p = BitPattern::new(4, s).unwrap();
            let c = code.classify(&p).unwrap();
            cat.upsert(p, c, 2, 0);
        }
        cat.set_meta("epsilon1", 3.0);
        let text = cat.to_text();
        let back = TsCatalog::from_text(&text, Some(&code)).unwrap();
        assert_eq!(back.entries.keys().collect::<Vec<_>>(), cat.entries.keys().collect::<Vec<_>>());
        assert_eq!(back.meta_value("epsilon1"), Some("3"));
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn stale_class_rejected() {
        let code = tiny();
        let text = "# n=4\n1 2;2;1;1;1\n";
        assert!(matches!(
            TsCatalog::from_text(text, Some(&code)),
            Err(Error::CatalogFormat { line: 2, .. })
        ));
        assert!(TsCatalog::from_text("1 2;2;2;1;1\n", None).is_err());
    }

    #[test]
    fn merge_adds_counts_and_keeps_first_root() {
        let code = tiny();
        let p = BitPattern::new(4, vec![0]).unwrap();
        let c = code.classify(&p).unwrap();
        let mut a = TsCatalog::new(4);
        a.upsert(p.clone(), c, 1, 3);
        let mut b = TsCatalog::new(4);
        b.upsert(p.clone(), c, 4, 7);
        a.merge(b);
        assert_eq!(a.entries[&p].count, 5);
        assert_eq!(a.entries[&p].first_root, 3);
    }
}
