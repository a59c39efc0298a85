use std::collections::BTreeSet;

use dimkit::coloring::{Coloring, Matching};
use dimkit::generator::canonical_code;
use dimkit::oracle::{all_dims, count_dims, oracle_dim, verify_dim};
use dimkit::{solve, Color, Graph, SolveConfig, Status};
use proptest::prelude::*;

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut i = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[i] {
                        edges.push((u, v));
                    }
                    i += 1;
                }
            }
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

/// Sparse graphs look more like the interesting instances.
fn sparse_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..2 * n).prop_map(move |pairs| {
            let edges: BTreeSet<(usize, usize)> =
                pairs.into_iter().filter(|(u, v)| u != v).map(|(u, v)| (u.min(v), u.max(v))).collect();
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

fn strict() -> SolveConfig {
    SolveConfig { fallback_oracle_max_n: 0, ..SolveConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn graph_text_round_trip(g in graph(12)) {
        let back = Graph::parse(&g.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), g.to_text());
    }

    #[test]
    fn solve_agrees_with_oracle(g in sparse_graph(16)) {
        let out = solve(&g, &strict());
        let truth = oracle_dim(&g, u64::MAX).found;
        match out.status {
            Status::Dim => {
                let m = out.matching.unwrap();
                prop_assert!(verify_dim(&g, &m).unwrap().is_valid());
                prop_assert!(truth.is_some());
            }
            Status::NoDim => prop_assert!(truth.is_none()),
            Status::Inconclusive => prop_assert!(false, "inconclusive: {:?}", out.reason),
        }
    }

    #[test]
    fn tight_budgets_never_lie(g in sparse_graph(14), branches in 0u64..20, seeds in 0usize..3) {
        let cfg = SolveConfig { branch_budget: Some(branches), seed_budget: Some(seeds), ..strict() };
        let out = solve(&g, &cfg);
        let truth = oracle_dim(&g, u64::MAX).found.is_some();
        match out.status {
            Status::Dim => prop_assert!(truth && verify_dim(&g, out.matching.as_ref().unwrap()).unwrap().is_valid()),
            Status::NoDim => prop_assert!(!truth),
            Status::Inconclusive => {}
        }
    }

    #[test]
    fn dims_are_complete_feasible_colorings(g in graph(9)) {
        for m in all_dims(&g, u64::MAX).unwrap() {
            let c = Coloring::from_matching(&g, &m);
            prop_assert!(c.is_complete_feasible(&g));
            prop_assert_eq!(c.extract_matching(&g).unwrap(), m);
        }
    }

    #[test]
    fn propagation_keeps_every_compatible_dim(g in sparse_graph(12), picks in proptest::collection::vec(any::<u8>(), 1..4)) {
        let dims = all_dims(&g, u64::MAX).unwrap();
        prop_assume!(!dims.is_empty());
        let m = &dims[picks[0] as usize % dims.len()];
        let covered = m.covered(g.n());
        let mut c = Coloring::new(g.n());
        for &p in &picks {
            let v = p as usize % g.n();
            let color = if covered.contains(v) { Color::Black } else { Color::White };
            if c.color(v) == Color::Unknown {
                prop_assert!(c.assign_and_propagate(&g, v, color).is_ok());
            }
            prop_assert!(c.consistent_with(m));
        }
    }

    #[test]
    fn matching_text_round_trip(g in graph(10)) {
        if let Some(m) = oracle_dim(&g, u64::MAX).found {
            prop_assert_eq!(Matching::parse(&m.to_text(), &g).unwrap(), m);
        }
    }

    #[test]
    fn canonical_code_ignores_labels(g in graph(9), key in any::<u64>()) {
        let n = g.n();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by_key(|&v| (v as u64).wrapping_mul(key | 1).rotate_left(17));
        let h = Graph::from_edges(n, g.edges().map(|e| (perm[e.u], perm[e.v]))).unwrap();
        prop_assert_eq!(canonical_code(&g), canonical_code(&h));
    }

    #[test]
    fn unions_need_both_sides(a in sparse_graph(8), b in sparse_graph(8)) {
        let u = a.disjoint_union(&b);
        let both = oracle_dim(&a, u64::MAX).found.is_some() && oracle_dim(&b, u64::MAX).found.is_some();
        prop_assert_eq!(solve(&u, &strict()).status == Status::Dim, both);
        let count = |g: &Graph| count_dims(g, u64::MAX).count.unwrap();
        prop_assert_eq!(count(&u), count(&a) * count(&b));
    }
}
