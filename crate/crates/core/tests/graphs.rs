use melonic_core::graph::*;
use melonic_core::melonic::{elementary_melons, find_reductions, MoveType};
use melonic_core::trees::{count_2rooted, enumerate_2rooted, TwoRootedTree};
use melonic_core::Error;
use num_bigint::BigUint;
use proptest::prelude::*;
use std::collections::HashSet;

#[test]
fn propagators_form_a_closed_set() {
    let all: Vec<_> = Propagator::all().collect();
    assert_eq!(all.len(), 8);
    let maps: HashSet<_> = all.iter().map(|p| p.slot_map()).collect();
    assert_eq!(maps.len(), 8);
    for p in all {
        assert_eq!(p.inverse().inverse(), p);
        assert_eq!(Propagator::from_slot_map(p.slot_map()), Some(p));
    }
    assert!(Propagator::new(0).is_err());
    assert!(Propagator::new(9).is_err());
}

#[test]
fn leaf_pairing_counts() {
    for n in 0..5 {
        for u in enumerate_2rooted(n).unwrap() {
            let ps = enumerate_leaf_pairings(&u).unwrap();
            assert_eq!(ps.len(), (1..=n + 1).product::<usize>());
        }
    }
}

#[test]
fn wick_pairing_counts() {
    assert_eq!(count_wick_pairings(0), BigUint::from(1u32));
    assert_eq!(count_wick_pairings(2), BigUint::from(8u32));
    assert_eq!(count_wick_pairings(4), BigUint::from(192u32));
    assert_eq!(count_wick_pairings(3), BigUint::from(0u32));
    for n in [0, 2, 4] {
        let w = enumerate_wick_pairings(n).unwrap();
        assert_eq!(BigUint::from(w.len()), count_wick_pairings(n));
    }
    assert!(matches!(enumerate_wick_pairings(3), Err(Error::OddOrder(3))));
}

#[test]
fn wick_mate_inverts_propagator() {
    for w in enumerate_wick_pairings(2).unwrap() {
        let (b, p) = w.mate(0).unwrap();
        let (a, q) = w.mate(1).unwrap();
        assert_eq!((a, b), (0, 1));
        assert_eq!(q, p.inverse());
    }
}

#[test]
fn graph_counts() {
    assert_eq!(count_graphs(0), BigUint::from(1u32));
    assert_eq!(count_graphs(2), BigUint::from(384u32));
    assert_eq!(count_graphs(1), BigUint::from(0u32));
    assert_eq!(count_graphs(4), count_2rooted(4) * BigUint::from(120u32 * 192));
    let fam = GraphFamily::new(2).unwrap();
    assert_eq!(fam.len(), 384);
    assert_eq!(fam.prefix_count(), 48);
    assert!(GraphFamily::new(3).unwrap().is_empty());
    assert_eq!(assemble_graphs(5).unwrap().count(), 0);
}

#[test]
fn order_guard() {
    assert!(matches!(GraphFamily::new(6), Err(Error::Guard { .. })));
    assert!(GraphFamily::with_guard(2, 2).is_ok());
}

#[test]
fn order_two_keys_are_distinct_and_roundtrip() {
    let mut keys = HashSet::new();
    for g in GraphFamily::new(2).unwrap().iter() {
        g.validate().unwrap();
        let k = g.canonical_key();
        assert_eq!(ExpansionGraph::from_key(&k).unwrap(), g);
        keys.insert(k);
    }
    assert_eq!(keys.len(), 384);
}

#[test]
fn trivial_graph() {
    let g = ExpansionGraph::trivial();
    assert_eq!(g.n(), 0);
    assert_eq!(g.canonical_key(), "g0|t|w0|c");
    assert_eq!(g.sign(), 1);
    assert_eq!(ExpansionGraph::from_key("g0|t|w0|c").unwrap(), g);
    assert_eq!(assemble_graphs(0).unwrap().collect::<Vec<_>>(), vec![g]);
}

#[test]
fn malformed_keys() {
    for k in ["", "g2", "g2|ta,b|w1,2,0|c1-2:9", "g2|ta,b|w2,1|c1-2:1", "g3|ta,b,1.2|w1,2,0,3|c"] {
        assert!(ExpansionGraph::from_key(k).is_err(), "{k}");
    }
}

#[test]
fn tree_signs() {
    assert_eq!(tree_sign(&TwoRootedTree::trivial()), 1);
    for g in elementary_melons() {
        let kind = find_reductions(&g)[0].kind;
        let want = if kind == MoveType::III { -1 } else { 1 };
        assert_eq!(g.sign(), want, "{}", g.canonical_key());
    }
}

#[test]
fn signs_balance_at_order_two() {
    let s: i32 = enumerate_2rooted(2).unwrap().iter().map(tree_sign).sum();
    assert_eq!(s, 0);
}

#[test]
fn edges_cover_every_slot() {
    for g in GraphFamily::new(2).unwrap().iter().step_by(7) {
        assert_eq!(g.solid_edges().len(), g.n());
        assert_eq!(g.dashed_edges().len(), g.n() + 1);
        let h = g.half_edges();
        assert_eq!(h.half_edge_count(), 2 + 4 * g.n());
        for x in 0..h.half_edge_count() {
            assert_eq!(h.edge[h.edge[x]], x);
            assert_ne!(h.edge[x], x);
            assert_eq!(h.corner[h.corner[x]], x);
            assert_eq!(h.kind[x], h.kind[h.edge[x]]);
        }
        for v in 0..g.n() {
            assert_eq!(h.mate(h.mate(v)), v);
            assert_eq!(h.propagator_from(v).unwrap().inverse(), h.propagator_from(h.mate(v)).unwrap());
        }
    }
}

#[test]
fn half_edge_ids() {
    assert_eq!(he(0, 0), 2);
    assert_eq!(he(3, 2), 16);
    assert_eq!(he_vertex(16), (3, 2));
}

#[test]
fn half_edges_roundtrip() {
    for g in GraphFamily::new(2).unwrap().iter() {
        assert_eq!(g.half_edges().to_expansion(LabelOrder::Keep).unwrap(), g);
    }
}

#[test]
fn heap_free_key_forgets_labels() {
    let fam = GraphFamily::new(4).unwrap();
    let a = fam.get(0);
    assert_eq!(a.heap_free_key(), a.half_edges().to_expansion(LabelOrder::Preorder).unwrap().heap_free_key());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn order_four_keys_roundtrip(index in 0usize..9_999_999) {
        let fam = GraphFamily::new(4).unwrap();
        let g = fam.get(index % fam.len());
        g.validate().unwrap();
        let k = g.canonical_key();
        prop_assert_eq!(ExpansionGraph::from_key(&k).unwrap(), g.clone());
        prop_assert_eq!(g.half_edges().to_expansion(LabelOrder::Keep).unwrap(), g);
    }

    #[test]
    fn distinct_indices_distinct_keys(i in 0usize..1_000_000, j in 0usize..1_000_000) {
        let fam = GraphFamily::new(4).unwrap();
        let (i, j) = (i % fam.len(), j % fam.len());
        prop_assume!(i != j);
        prop_assert_ne!(fam.get(i).canonical_key(), fam.get(j).canonical_key());
    }
}
