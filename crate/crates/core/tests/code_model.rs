mod common;

use common::{ref_classify, ref_girth, rows_of};
use errfloor::code::{BitPattern, Girth, TannerCode};
use errfloor::construct::random_girth6;
use errfloor::parse_alist;
use proptest::prelude::*;

/// Random sparse code: every variable gets 1..=max_dv distinct checks;
/// unused checks are dropped.
fn arb_code(max_n: usize, max_m: usize, max_dv: usize) -> impl Strategy<Value = TannerCode> {
    (2..=max_n, 2..=max_m)
        .prop_flat_map(move |(n, m)| {
            let col = proptest::sample::subsequence((0..m).collect::<Vec<_>>(), 1..=max_dv.min(m));
            (Just(m), proptest::collection::vec(col, n))
        })
        .prop_map(|(m, mut cols)| {
            let mut label = vec![usize::MAX; m];
            let mut used = 0;
            for c in cols.iter().flatten() {
                if label[*c] == usize::MAX {
                    label[*c] = used;
                    used += 1;
                }
            }
            for col in &mut cols {
                for c in col.iter_mut() {
                    *c = label[*c];
                }
            }
            TannerCode::from_columns(used, cols).unwrap()
        })
}

fn arb_code_and_pattern() -> impl Strategy<Value = (TannerCode, Vec<usize>)> {
    arb_code(20, 14, 4).prop_flat_map(|code| {
        let n = code.n();
        (Just(code), proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 0..=n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn classify_matches_recount((code, support) in arb_code_and_pattern()) {
        let x = BitPattern::new(code.n(), support.clone()).unwrap();
        let got = code.classify(&x).unwrap();
        let want = ref_classify(code.col_adjacency(), code.m(), &support);
        prop_assert_eq!((got.a, got.b, got.edges, got.checks_touched, got.elementary),
            (want.a, want.b, want.edges, want.touched, want.elementary));
        prop_assert_eq!(code.syndrome(&x).unwrap().weight, want.b);
    }

    #[test]
    fn edge_count_identity((code, support) in arb_code_and_pattern()) {
        // Σ_{v∈S} d_v = Σ_c |N(c) ∩ S|, and the odd part of that sum has
        // the parity of b.
        let x = BitPattern::new(code.n(), support.clone()).unwrap();
        let class = code.classify(&x).unwrap();
        let per_check: usize = (0..code.m())
            .map(|c| code.vars_of(c).iter().filter(|v| support.contains(v)).count())
            .sum();
        prop_assert_eq!(class.edges, per_check);
        prop_assert_eq!(class.edges % 2, class.b % 2);
        prop_assert!(class.b <= class.checks_touched);
    }

    #[test]
    fn elementary_check_count((code, support) in arb_code_and_pattern()) {
        let x = BitPattern::new(code.n(), support).unwrap();
        let class = code.classify(&x).unwrap();
        if class.elementary {
            prop_assert_eq!(class.elementary_check_count(), class.checks_touched);
        }
    }

    #[test]
    fn girth_matches_cycle_enumeration(code in arb_code(12, 10, 3)) {
        let want = ref_girth(code.col_adjacency(), code.m());
        prop_assert_eq!(code.girth().length(), want);
    }

    #[test]
    fn adjacency_lists_are_transposes(code in arb_code(30, 20, 5)) {
        let rows = rows_of(code.col_adjacency(), code.m());
        prop_assert_eq!(code.row_adjacency(), rows.as_slice());
        let edges: usize = code.col_adjacency().iter().map(Vec::len).sum();
        prop_assert_eq!(edges, code.num_edges());
    }

    #[test]
    fn alist_round_trip(code in arb_code(30, 20, 5)) {
        let back = parse_alist(&code.to_alist()).unwrap();
        prop_assert_eq!(back.col_adjacency(), code.col_adjacency());
        prop_assert_eq!(back.row_adjacency(), code.row_adjacency());
    }

    #[test]
    fn search_order_is_by_degree(code in arb_code(30, 20, 5)) {
        let order = code.search_order();
        prop_assert_eq!(order.len(), code.n());
        for w in order.windows(2) {
            let key = |v: usize| (code.var_degree(v), v);
            prop_assert!(key(w[0]) < key(w[1]));
        }
    }

    #[test]
    fn tier_one_is_distinct_without_four_cycles(seed in 0u64..200) {
        let code = random_girth6(12, &[3; 16], 4, seed, 5000).unwrap();
        for root in 0..code.n() {
            let tree = code.neighbor_tree(root, 1).unwrap();
            let total: usize = tree.tier1_sets().iter().map(|s| s.len()).sum();
            prop_assert_eq!(tree.tier1_variables().len(), total);
            prop_assert!(!tree.duplicates_present);
        }
    }
}

#[test]
fn elementary_identity_fails_for_non_elementary_sets() {
    // One check meets all three support variables, so the support is not
    // elementary and the count formula overstates the touched checks.
    let code = TannerCode::from_columns(4, vec![vec![0, 1], vec![0, 2], vec![0, 3]]).unwrap();
    let x = BitPattern::new(3, vec![0, 1, 2]).unwrap();
    let class = code.classify(&x).unwrap();
    assert!(!class.elementary);
    assert_eq!((class.a, class.b, class.edges, class.checks_touched), (3, 4, 6, 4));
    assert_eq!(class.elementary_check_count(), 5);
}

#[test]
fn four_cycle_and_acyclic_girths() {
    let square = TannerCode::from_columns(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
    assert_eq!(square.girth(), Girth::Cycle(4));
    let path = TannerCode::from_columns(2, vec![vec![0], vec![0, 1], vec![1]]).unwrap();
    assert_eq!(path.girth(), Girth::Acyclic);
    assert_eq!(ref_girth(path.col_adjacency(), 2), None);
}

#[test]
fn alist_errors_carry_line_numbers() {
    let err = parse_alist("3 2\n2 3\n1 1 1\n").unwrap_err().to_string();
    assert!(err.contains("line"), "{err}");
    let text = "2 1\n1 2\n1 1\n2\n1\n1\n1 2\n";
    let code = parse_alist(text).unwrap();
    assert_eq!((code.n(), code.m()), (2, 1));
    let bad = "2 1\n1 2\n1 1\n2\n1\n2\n1 2\n";
    let err = parse_alist(bad).unwrap_err().to_string();
    assert!(err.contains("line"), "{err}");
}
