use melonic_core::amplitude::*;
use melonic_core::checks::INCIDENCE_FIXTURE;
use melonic_core::graph::{ExpansionGraph, GraphFamily};
use melonic_core::melonic::{elementary_melons, find_reductions, melonic_family, MoveType};
use melonic_core::Error;
use std::collections::HashMap;

const TYPE_I: &str = "g2|ta,b|w1,2,0|c1-2:1";
const TYPE_II: &str = "g2|ta,1.2|w1,2,0|c1-2:2";

fn key(k: &str) -> ExpansionGraph {
    ExpansionGraph::from_key(k).unwrap()
}

fn brute(g: &ExpansionGraph, r: usize, p: f64) -> AmplitudeValue<f64> {
    amplitude_bruteforce(g, r, p, &EvalOptions::default()).unwrap()
}

fn face(g: &ExpansionGraph, r: usize, p: f64) -> AmplitudeValue<f64> {
    amplitude_facesum(g, r, p, &EvalOptions::default(), &FaceSumOptions::default()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

#[test]
fn bare_edge() {
    let g = ExpansionGraph::trivial();
    assert!(close(brute(&g, 2, 0.5).value, 0.25, 1e-15));
    for r in 0..5 {
        let want = 0.3f64.powi(r as i32);
        assert!(close(face(&g, r, 0.3).value, want, 1e-14));
        let t = amplitude_transfer(&g, r, 0.3, &EvalOptions::default()).unwrap();
        assert!(close(t.value, want, 1e-14));
    }
}

#[test]
fn type_one_closed_form() {
    let g = key(TYPE_I);
    assert_eq!(find_reductions(&g)[0].kind, MoveType::I);
    let a = brute(&g, 0, 0.5);
    assert!(a.converged);
    assert!((a.value - 4.0 / 9.0).abs() <= a.tail.max(1e-12));
    for p in [0.3f64, 0.5, 0.8] {
        let n = 1.0 / (1.0 - p);
        for r in 0..4 {
            let want = p.powi(r) * (p * p / (1.0 + p).powi(2) + (r as f64 + 1.0) / (n * (1.0 + p)));
            let b = brute(&g, r as usize, p);
            let f = face(&g, r as usize, p);
            assert!(close(b.value, want, 1e-9), "brute p={p} r={r}: {} vs {want}", b.value);
            assert!(close(f.value, want, 1e-9), "face p={p} r={r}: {} vs {want}", f.value);
        }
    }
}

#[test]
fn type_two_closed_form() {
    let g = key(TYPE_II);
    assert_eq!(find_reductions(&g)[0].kind, MoveType::II);
    assert!(close(brute(&g, 1, 0.5).value, 0.375, 1e-10));
    for p in [0.2f64, 0.6, 0.9] {
        let n = 1.0 / (1.0 - p);
        for r in 0..4 {
            let want = p.powi(2 * r) * (p + (r as f64 + 1.0) / n);
            assert!(close(face(&g, r as usize, p).value, want, 1e-9), "p={p} r={r}");
        }
    }
}

#[test]
fn three_methods_agree_on_elementary_melons() {
    for g in elementary_melons() {
        for (r, p) in [(0, 0.5), (1, 0.5), (3, 0.7)] {
            let b = brute(&g, r, p).value;
            let f = face(&g, r, p).value;
            let t = amplitude_transfer(&g, r, p, &EvalOptions::default()).unwrap().value;
            assert!(close(f, b, 1e-10), "{} r={r} p={p}: face {f} brute {b}", g.canonical_key());
            assert!(close(t, b, 1e-10), "{} r={r} p={p}: transfer {t} brute {b}", g.canonical_key());
        }
    }
}

#[test]
fn brute_and_face_agree_at_order_two() {
    for g in GraphFamily::new(2).unwrap().iter().step_by(5) {
        let b = brute(&g, 1, 0.5).value;
        let f = face(&g, 1, 0.5).value;
        assert!(close(f, b, 1e-10), "{}: {f} vs {b}", g.canonical_key());
    }
}

#[test]
fn sweep_respects_momentum_conservation() {
    for g in GraphFamily::new(2).unwrap().iter() {
        let (_, stats) = bruteforce_sum::<f64>(&g, 1, 0.5, 10).unwrap();
        assert!(stats.assignments > 0);
        assert_eq!(stats.lemma_violations, 0, "{}", g.canonical_key());
    }
}

#[test]
fn analytic_tail_is_reported() {
    let a = brute(&key(TYPE_I), 0, 0.5);
    let bound = a.analytic_tail.unwrap();
    assert!(bound >= 0.0 && bound.is_finite());
    assert!(face(&key(TYPE_I), 0, 0.5).analytic_tail.is_none());
}

#[test]
fn theta_off_diverges() {
    let g = elementary_melons().into_iter().find(|g| g.canonical_key() == TYPE_I).unwrap();
    let on = facesum_sum::<f64>(&g, 1, 0.5, 128, &FaceSumOptions::default()).unwrap();
    let off = |piv: usize, lam: usize| {
        let o = FaceSumOptions { disable_theta: true, pivots: Some(vec![piv]) };
        facesum_sum::<f64>(&g, 1, 0.5, lam, &o).unwrap()
    };
    assert!(close(on, brute(&g, 1, 0.5).value, 1e-10));
    let v: Vec<f64> = [32, 64, 128, 256].iter().map(|&l| off(3, l)).collect();
    for w in v.windows(2) {
        assert!(w[1] / w[0] > 1.9, "{v:?}");
    }
    assert!(v[3] > 40.0 * on);
}

#[test]
fn pivot_order_does_not_change_the_value() {
    let g = key(INCIDENCE_FIXTURE);
    let eval = EvalOptions::for_order(4);
    let base = amplitude_facesum::<f64>(&g, 1, 0.5, &eval, &FaceSumOptions::default()).unwrap();
    for piv in [vec![5, 4], vec![3, 1], vec![2, 5]] {
        let o = FaceSumOptions { disable_theta: false, pivots: Some(piv.clone()) };
        let Ok(v) = amplitude_facesum::<f64>(&g, 1, 0.5, &eval, &o) else { continue };
        assert!((v.value - base.value).abs() <= 2.0 * (v.tail + base.tail) + 1e-9, "{piv:?}");
    }
}

#[test]
fn heap_labels_do_not_change_the_value() {
    let fam = GraphFamily::new(4).unwrap();
    let mut groups: HashMap<String, Vec<ExpansionGraph>> = HashMap::new();
    for i in (0..fam.len()).step_by(1009) {
        let g = fam.get(i);
        groups.entry(g.heap_free_key()).or_default().push(g);
    }
    let mut checked = 0;
    for i in 0..fam.len() / 1009 {
        let g = fam.get(i * 1009 + 1);
        if let Some(gs) = groups.get(&g.heap_free_key()) {
            if gs[0] != g {
                let eval = EvalOptions { tol: 1e-8, cutoff: Some(24), max_cutoff: 96 };
                let a = amplitude_facesum::<f64>(&g, 0, 0.4, &eval, &FaceSumOptions::default()).unwrap();
                let b = amplitude_facesum::<f64>(&gs[0], 0, 0.4, &eval, &FaceSumOptions::default()).unwrap();
                assert!(close(a.value, b.value, 1e-9));
                checked += 1;
            }
        }
    }
    let melon = melonic_family(4).unwrap().into_values().next().unwrap();
    let relabeled = melon.half_edges().to_expansion(melonic_core::graph::LabelOrder::Preorder).unwrap();
    let eval = EvalOptions::default();
    let a = amplitude_transfer::<f64>(&melon, 1, 0.5, &eval).unwrap().value;
    let b = amplitude_transfer::<f64>(&relabeled, 1, 0.5, &eval).unwrap().value;
    assert!(close(a, b, 1e-12));
    assert!(checked > 0);
}

#[test]
fn transfer_needs_a_melonic_graph() {
    let g = key(INCIDENCE_FIXTURE);
    assert!(matches!(transfer_weights::<f64>(&g, 0.5, 16), Err(Error::Domain(_))));
}

#[test]
fn transfer_weights_match_pointwise() {
    let g = key(TYPE_I);
    let w = transfer_weights::<f64>(&g, 0.5, 200).unwrap();
    for r in 0..4 {
        assert!(close(w[r], brute(&g, r, 0.5).value, 1e-10));
    }
}

#[test]
fn p_outside_the_unit_interval() {
    let g = key(TYPE_I);
    for p in [0.0, 1.0, -0.5, 1.5] {
        assert!(amplitude_bruteforce(&g, 0, p, &EvalOptions::default()).is_err());
        assert!(amplitude_facesum(&g, 0, p, &EvalOptions::default(), &FaceSumOptions::default()).is_err());
    }
}

#[test]
fn single_precision() {
    let g = key(TYPE_I);
    let a = amplitude_facesum::<f32>(&g, 0, 0.5, &EvalOptions { tol: 1e-5, ..EvalOptions::default() }, &FaceSumOptions::default()).unwrap();
    assert!((a.value - 4.0 / 9.0).abs() < 1e-5, "{}", a.value);
    let t = amplitude_transfer::<f32>(&g, 0, 0.5, &EvalOptions { tol: 1e-5, ..EvalOptions::default() }).unwrap();
    assert!((t.value - 4.0 / 9.0).abs() < 1e-5);
}

#[test]
fn chain_functions() {
    assert_eq!(chain_function(0, 0, 0.7).unwrap(), 1.0);
    assert!(close(chain_function(0, 3, 0.7).unwrap(), 0.343, 1e-14));
    let t = ChainTable::new(0.5, 3).unwrap();
    let w = t.window as i64;
    let sum = |l: usize| (-w..=w).map(|j| t.get(l, j).unwrap()).sum::<f64>();
    assert!(close(sum(0), 3.0, 1e-12));
    assert!(close(sum(2), 27.0, 1e-12));
    // F_1(j) = p^|j| (|j| + 1 + 2p^2/(1-p^2))
    let p: f64 = 0.5;
    let want = p * p * (3.0 + 2.0 * p * p / (1.0 - p * p));
    assert!(close(t.get(1, 2).unwrap(), want, 1e-12));
    assert!(close(t.get(1, -2).unwrap(), want, 1e-12));
}

#[test]
fn chain_concatenation() {
    let t = ChainTable::new(0.3, 4).unwrap();
    let w = t.window as i64;
    for j in [-3i64, 0, 1, 5] {
        let conv: f64 = (-w..=w).filter_map(|k| Some(t.get(1, k)? * t.get(2, j - k)?)).sum();
        assert!(close(conv, t.get(4, j).unwrap(), 1e-12), "j={j}");
    }
    assert!(ChainTable::new(1.0, 2).is_err());
}

#[test]
fn bounds_on_elementary_melons() {
    for g in elementary_melons() {
        let b = check_melonic_bounds(&g, 0, 0.5).unwrap();
        assert!(b.all(), "{}: {b:?}", g.canonical_key());
    }
    let b = check_melonic_bounds(&ExpansionGraph::trivial(), 0, 0.5).unwrap();
    assert!(b.all());
    assert_eq!(crude_bound(0, 0.5), 1.0);
    assert!(check_melonic_bounds(&key(INCIDENCE_FIXTURE), 0, 0.5f64).is_err());
}

#[test]
fn bounds_on_order_four_melons() {
    for g in melonic_family(4).unwrap().into_values().step_by(37) {
        let b = check_melonic_bounds(&g, 2, 0.8).unwrap();
        assert!(b.all(), "{}: {b:?}", g.canonical_key());
    }
}

#[test]
fn scaling_exponents() {
    let grid = [0.9, 0.95, 0.975, 0.99];
    let triv = empirical_scaling_exponent(&ExpansionGraph::trivial(), 0, &grid).unwrap();
    assert_eq!(triv.slope, 0.0);
    let mel = empirical_scaling_exponent(&key(TYPE_I), 0, &grid).unwrap();
    assert_eq!(mel.degree, 0);
    assert!(mel.slope.abs() < 0.1, "{}", mel.slope);
    let fix = empirical_scaling_exponent(&key(INCIDENCE_FIXTURE), 0, &grid).unwrap();
    assert_eq!(fix.degree, 1);
    assert!(fix.slope <= -0.9, "{}", fix.slope);
    assert!(empirical_scaling_exponent(&key(TYPE_I), 0, &[0.9]).is_err());
}
