use melonic_core::trees::*;
use melonic_core::Error;
use num_bigint::BigUint;
use std::collections::HashSet;

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

#[test]
fn heap_tree_counts() {
    assert_eq!(count_heap_trees_1rooted(3, 3).unwrap(), big(15));
    assert_eq!(count_heap_trees_1rooted(3, 4).unwrap(), big(105));
    assert_eq!(count_heap_trees_1rooted(2, 0).unwrap(), big(1));
    assert_eq!(count_heap_trees_1rooted(2, 3).unwrap(), big(6));
    assert_eq!(count_heap_trees_1rooted(2, 4).unwrap(), big(24));
}

#[test]
fn binary_heap_trees_are_factorials() {
    let mut f = 1u64;
    for h in 1..15 {
        f *= h as u64;
        assert_eq!(count_heap_trees_1rooted(2, h).unwrap(), big(f));
    }
}

#[test]
fn fuss_catalan_counts() {
    assert_eq!(fuss_catalan(3, 3).unwrap(), big(12));
    assert_eq!(fuss_catalan(3, 4).unwrap(), big(55));
    assert_eq!(fuss_catalan(2, 0).unwrap(), big(1));
    assert_eq!(fuss_catalan(2, 5).unwrap(), big(42));
    assert!(matches!(fuss_catalan(1, 3), Err(Error::Domain(_))));
}

#[test]
fn enumeration_matches_counts() {
    for (q, h) in [(2, 0), (2, 3), (2, 5), (3, 0), (3, 2), (3, 4), (4, 3)] {
        let trees = enumerate_heap_trees_1rooted(q, h).unwrap();
        assert_eq!(BigUint::from(trees.len()), count_heap_trees_1rooted(q, h).unwrap(), "q={q} h={h}");
        let distinct: HashSet<_> = trees.iter().map(|t| t.dfs_signature()).collect();
        assert_eq!(distinct.len(), trees.len());
        for t in &trees {
            t.validate().unwrap();
            assert_eq!(t.size(), h);
            assert_eq!(t.open_slots().len(), h * (q - 1) + 1);
        }
    }
}

#[test]
fn shapes_match_fuss_catalan() {
    for (q, h) in [(2, 4), (3, 3), (3, 4), (4, 3)] {
        let shapes: HashSet<_> = enumerate_heap_trees_1rooted(q, h).unwrap().iter().map(|t| t.shape_key()).collect();
        assert_eq!(BigUint::from(shapes.len()), fuss_catalan(q, h).unwrap(), "q={q} h={h}");
    }
}

#[test]
fn trivial_one_rooted_tree() {
    let trees = enumerate_heap_trees_1rooted(3, 0).unwrap();
    assert_eq!(trees.len(), 1);
    assert_eq!(trees[0].open_slots().len(), 1);
}

#[test]
fn enumeration_guard() {
    assert!(matches!(enumerate_heap_trees_1rooted(3, 12), Err(Error::Guard { .. })));
}

#[test]
fn two_rooted_counts() {
    let want = [1u64, 2, 8];
    for (n, &w) in want.iter().enumerate() {
        assert_eq!(count_2rooted(n), big(w));
        let ts = enumerate_2rooted(n).unwrap();
        assert_eq!(ts.len() as u64, w);
        for t in &ts {
            t.validate().unwrap();
            assert_eq!(t.leaves().len(), t.n() + 1);
            assert_eq!(t.anti_leaves().len(), t.n() + 1);
        }
    }
    for n in 3..6 {
        assert_eq!(BigUint::from(enumerate_2rooted(n).unwrap().len()), count_2rooted(n));
    }
}

#[test]
fn trivial_two_rooted_tree() {
    let t = TwoRootedTree::trivial();
    assert_eq!(t.n(), 0);
    assert_eq!(t.leaves().len(), 1);
    assert_eq!(t.anti_leaves().len(), 1);
}

#[test]
fn single_vertex_sides() {
    let ts = enumerate_2rooted(1).unwrap();
    let sides: HashSet<_> = ts.iter().map(|t| t.side(0)).collect();
    assert_eq!(sides, HashSet::from([Charge::Alpha, Charge::AlphaBar]));
}

#[test]
fn heap_orderings_sum_to_count() {
    for n in 0..6 {
        let ts = enumerate_2rooted(n).unwrap();
        let mut by_shape = std::collections::HashMap::new();
        for t in &ts {
            let shape: Vec<_> = t.dfs_signature().into_iter().map(|(s, c, o)| (s, c > 0, o)).collect();
            by_shape.entry(shape).or_insert_with(|| t.heap_orderings());
        }
        let total: BigUint = by_shape.values().sum();
        assert_eq!(total, count_2rooted(n), "n={n}");
    }
}

#[test]
fn halves_split_the_vertices() {
    for t in enumerate_2rooted(4).unwrap() {
        let ((a, ma), (b, mb)) = t.halves();
        assert_eq!(a.size() + b.size(), 4);
        assert_eq!(ma.len() + mb.len(), 4);
        a.validate().unwrap();
        b.validate().unwrap();
    }
}

#[test]
fn scalar_flow_zero_data() {
    let (a, b) = scalar_flow_check(2, 1.0f64, 0.0, 5, 0.1).unwrap();
    assert_eq!((a, b), (0.0, 0.0));
}

#[test]
fn scalar_flow_cubic() {
    let (tree, taylor) = scalar_flow_check(3, 1.0f64, 0.5, 6, 0.5).unwrap();
    assert!((tree - taylor).abs() < 1e-12, "{tree} vs {taylor}");
    let (c, _) = scalar_flow_coefficients(3, 1.0f64, 0.5, 3).unwrap();
    // x0 (1 - 2 t x0^2)^{-1/2} = x0 + x0^3 t + (3/2) x0^5 t^2 + (5/2) x0^7 t^3
    let want = [0.5, 0.125, 1.5 * 0.5f64.powi(5), 2.5 * 0.5f64.powi(7)];
    for (g, w) in c.iter().zip(want) {
        assert!((g - w).abs() < 1e-15);
    }
}

#[test]
fn scalar_flow_quadratic_is_geometric() {
    let (c, t) = scalar_flow_coefficients(2, 1.0f64, 1.0, 5).unwrap();
    for h in 0..=5 {
        assert!((c[h] - 1.0).abs() < 1e-14);
        assert!((t[h] - 1.0).abs() < 1e-14);
    }
    let (a, b) = scalar_flow_check(2, 1.0f64, 1.0, 5, 0.2).unwrap();
    let want: f64 = (0..=5).map(|h| 0.2f64.powi(h)).sum();
    assert!((a - want).abs() < 1e-14 && (b - want).abs() < 1e-14);
}

#[test]
fn scalar_flow_negative_coupling() {
    for q in [2, 3, 4] {
        let (c, t) = scalar_flow_coefficients(q, -0.7f64, 0.9, 6).unwrap();
        for (x, y) in c.iter().zip(&t) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "q={q}: {x} vs {y}");
        }
    }
}

#[test]
fn scalar_flow_outside_radius() {
    assert!(matches!(scalar_flow_check(2, 1.0f64, 1.0, 4, 1.5), Err(Error::Domain(_))));
}
