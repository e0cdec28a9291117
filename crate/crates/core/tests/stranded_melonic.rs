use melonic_core::checks::{match_up_to_labels, INCIDENCE_E, INCIDENCE_E_REDUCED, INCIDENCE_E_TRAVERSAL, INCIDENCE_FIXTURE, INCIDENCE_REDUCED};
use melonic_core::graph::{ExpansionGraph, GraphFamily};
use melonic_core::melonic::*;
use melonic_core::stranded::*;
use num_bigint::BigUint;
use num_rational::Ratio;
use std::collections::{BTreeMap, HashMap};

fn faces(g: &ExpansionGraph) -> usize {
    to_stranded(g).unwrap().face_count()
}

#[test]
fn trivial_graph_has_one_root_face() {
    let g = ExpansionGraph::trivial();
    let gs = to_stranded(&g).unwrap();
    assert_eq!(gs.face_count(), 1);
    assert_eq!(gs.root_face, 0);
    let inc = incidence(&gs);
    assert!(inc.e.is_empty());
    assert_eq!((inc.rank, inc.free_faces()), (0, 0));
    assert_eq!(degree(&g).unwrap(), 0);
    assert!(find_reductions(&g).is_empty());
    assert!(is_melonic(&g));
}

#[test]
fn elementary_melons_by_type() {
    let ms = elementary_melons();
    assert_eq!(ms.len(), 14);
    let mut by_kind = BTreeMap::new();
    for g in &ms {
        let moves = find_reductions(g);
        assert_eq!(moves.len(), 1, "{}", g.canonical_key());
        *by_kind.entry(moves[0].kind).or_insert(0) += 1;
        let gs = to_stranded(g).unwrap();
        assert_eq!(gs.length_histogram(), vec![0, 4]);
        assert_eq!(degree(g).unwrap(), 0);
        assert!(is_melonic(g));
        assert_eq!(reduce(g, &moves[0]).unwrap(), ExpansionGraph::trivial());
    }
    assert_eq!(by_kind, BTreeMap::from([(MoveType::I, 2), (MoveType::II, 4), (MoveType::III, 8)]));
}

#[test]
fn order_two_face_histogram() {
    let mut hist = BTreeMap::new();
    for g in GraphFamily::new(2).unwrap().iter() {
        let gs = to_stranded(&g).unwrap();
        let inc = incidence(&gs);
        check_invariants(&gs, &inc).unwrap();
        let f = gs.face_count();
        *hist.entry(f).or_insert(0) += 1;
        let total: usize = gs.faces.iter().map(|x| x.length()).sum();
        assert_eq!(total, 2 * g.n());
        assert_eq!(f == 4, is_melonic(&g), "{}", g.canonical_key());
        assert_eq!(degree(&g).unwrap() == 0, is_melonic(&g));
    }
    assert_eq!(hist, BTreeMap::from([(1, 160), (2, 144), (3, 64), (4, 16)]));
}

#[test]
fn one_leading_propagator_per_diagram() {
    let mut per_prefix: HashMap<String, usize> = HashMap::new();
    for g in GraphFamily::new(2).unwrap().iter() {
        let key = g.canonical_key();
        let prefix = key.rsplit_once(':').unwrap().0.to_string();
        *per_prefix.entry(prefix).or_insert(0) += find_reductions(&g).len();
    }
    // the two type I melons each come with two heap labelings
    assert_eq!(per_prefix.values().filter(|&&c| c == 1).count(), 16);
    assert!(per_prefix.values().all(|&c| c <= 1));
}

#[test]
fn incidence_of_the_fixture() {
    let g = ExpansionGraph::from_key(INCIDENCE_FIXTURE).unwrap();
    let inc = incidence(&to_stranded(&g).unwrap());
    let want: Vec<Vec<i64>> = INCIDENCE_E_TRAVERSAL.iter().map(|r| r.to_vec()).collect();
    assert_eq!(inc.e, want);
    assert_eq!(inc.rank, 2);
    assert_eq!(match_up_to_labels(&inc.e, &INCIDENCE_E), Some(vec![0, 1, 2, 5, 4, 3]));
    assert_eq!(degree(&g).unwrap(), 1);
    assert!(!is_melonic(&g));

    let mv = find_reductions(&g).into_iter().find(|m| m.kind == MoveType::I).unwrap();
    let r = reduce(&g, &mv).unwrap();
    assert_eq!(r.canonical_key(), INCIDENCE_REDUCED);
    let inc_r = incidence(&to_stranded(&r).unwrap());
    assert_eq!(inc_r.e, vec![INCIDENCE_E_REDUCED[0].to_vec()]);
    assert_eq!(inc_r.rank, 1);
    assert_eq!(degree(&r).unwrap(), 1);
}

#[test]
fn label_matching_rejects_other_matrices() {
    let e = vec![vec![1, 1, -2, 0, 0, 0], vec![0, 1, 1, 1, -1, -1]];
    assert_eq!(match_up_to_labels(&e, &INCIDENCE_E), None);
}

#[test]
fn pivot_choice() {
    let g = ExpansionGraph::from_key(INCIDENCE_FIXTURE).unwrap();
    let gs = to_stranded(&g).unwrap();
    let inc = incidence_with_pivots(&gs, Some(&[5, 4, 3, 2, 1])).unwrap();
    assert_eq!(inc.dependent.len(), 2);
    assert!(inc.independent.contains(&0));
    assert!(incidence_with_pivots(&gs, Some(&[0, 1, 2])).is_err());
    // any choice of independent momenta extends to a kernel vector of E
    let free: Vec<i64> = vec![3, -1, 2, 5];
    let mut x = vec![Ratio::from_integer(0i64); inc.face_count()];
    for (k, &f) in inc.independent.iter().enumerate() {
        x[f] = Ratio::from_integer(free[k]);
    }
    for (j, &f) in inc.dependent.iter().enumerate() {
        x[f] = inc.a[j].iter().zip(&inc.independent).map(|(c, &k)| c * x[k]).sum();
    }
    for row in &inc.e {
        let s: Ratio<i64> = row.iter().zip(&x).map(|(&e, v)| Ratio::from_integer(e) * v).sum();
        assert_eq!(s, Ratio::from_integer(0));
    }
}

#[test]
fn melonic_counts() {
    assert_eq!(count_melonic(0).unwrap(), BigUint::from(1u32));
    assert_eq!(count_melonic(2).unwrap(), BigUint::from(16u32));
    assert_eq!(count_melonic(3).unwrap(), BigUint::from(0u32));
    assert_eq!(count_melonic(4).unwrap(), BigUint::from(1536u32));
    assert_eq!(count_melonic(6).unwrap(), BigUint::from(374_784u32));
    for n in [2, 4, 6] {
        assert!(count_melonic(n).unwrap() <= melonic_count_bound(n));
    }
}

#[test]
fn melonic_family_members() {
    let fam = melonic_family(4).unwrap();
    assert_eq!(fam.len(), 624);
    for (k, g) in &fam {
        assert_eq!(&g.heap_free_key(), k);
        assert!(is_melonic(g));
        assert!(is_melonic_greedy(g));
        assert_eq!(degree(g).unwrap(), 0);
        assert_eq!(faces(g), 7);
    }
}

#[test]
fn eight_vertex_melon_by_insertions() {
    let mut g = ExpansionGraph::trivial();
    for step in 0..4 {
        let ins = all_insertions(&g).unwrap();
        g = ins[(7 * step + 3) % ins.len()].clone();
    }
    assert_eq!(g.n(), 8);
    g.validate().unwrap();
    assert!(is_melonic(&g));
    assert_eq!(degree(&g).unwrap(), 0);
    assert_eq!(faces(&g), 13);
}

#[test]
fn greedy_reduction_is_confluent_at_order_four() {
    let fam = GraphFamily::new(4).unwrap();
    for i in (0..fam.len()).step_by(97) {
        let g = fam.get(i);
        let m = is_melonic(&g);
        assert_eq!(is_melonic_greedy(&g), m, "{}", g.canonical_key());
        assert!(faces(&g) <= 7);
        assert_eq!(degree(&g).unwrap() == 0, m);
    }
    assert!(fam.len() / 97 > 90_000);
}

#[test]
fn insertions_into_the_trivial_graph() {
    let mut keys: Vec<_> = elementary_melons().iter().map(|g| g.canonical_key()).collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 14);
}
