use melonic_core::series::*;
use melonic_core::Error;
use num_bigint::BigUint;

fn n_of(p: f64) -> f64 {
    1.0 / (1.0 - p)
}

fn direct(gamma: f64, z: f64) -> f64 {
    (1..20_000).map(|r| (r as f64).powf(gamma) * z.powi(r)).sum()
}

#[test]
fn polylog_values() {
    assert!((polylog(1.0f64, 0.5).unwrap() - 2.0).abs() < 1e-14);
    assert!((polylog(0.0f64, 0.5).unwrap() - 1.0).abs() < 1e-14);
    for g in [2.0, 3.0, 5.0, 2.5] {
        for z in [0.3, 0.9, 0.99] {
            let got: f64 = polylog(g, z).unwrap();
            let want = direct(g, z);
            assert!((got - want).abs() <= 1e-12 * want, "g={g} z={z}: {got} vs {want}");
        }
    }
    assert!(polylog(2.0, 1.0f64).is_err());
}

#[test]
fn eulerian_rows() {
    assert_eq!(eulerian_row(0), vec![BigUint::from(1u32)]);
    let row: Vec<u32> = eulerian_row(4).iter().map(|x| x.try_into().unwrap()).collect();
    assert_eq!(row, vec![1, 11, 11, 1]);
    for g in 1..15usize {
        let s: BigUint = eulerian_row(g).iter().sum();
        let f: BigUint = (1..=g).map(BigUint::from).product();
        assert_eq!(s, f, "g={g}");
    }
}

#[test]
fn conserved_norms_at_order_two() {
    for p in [0.2, 0.5, 0.9] {
        for g in [0.0, 1.0] {
            let (d, r) = order2_reference::<f64>(g, p).unwrap();
            assert!((d + r).abs() < 1e-10 * d.abs().max(1.0), "g={g} p={p}");
            let c = sobolev_coefficient(2, g, p, Scope::Full, None).unwrap();
            assert!(c.value.abs() < 1e-8, "g={g} p={p}: {}", c.value);
        }
    }
}

#[test]
fn order_two_against_closed_forms() {
    for p in [0.3, 0.5] {
        for g in [2.0, 3.0] {
            let (d, r) = order2_reference::<f64>(g, p).unwrap();
            let full = sobolev_coefficient(2, g, p, Scope::Full, None).unwrap();
            let mel = sobolev_coefficient(2, g, p, Scope::Melonic, None).unwrap();
            assert!((full.value - d - r).abs() < 1e-6 + full.error, "full g={g} p={p}");
            assert!((mel.value - d).abs() < 1e-6 + mel.error, "melonic g={g} p={p}");
            assert!(full.error < 1e-6 && mel.error < 1e-6);
            assert!(full.value > 0.0);
            assert_eq!(full.graphs, 384);
            assert_eq!(mel.graphs, 16);
        }
    }
}

#[test]
fn asymptotic_limit() {
    assert!((order2_asymptotic(2, 0.5) / 4.0 - 3.0 / 32.0).abs() < 1e-15);
    assert_eq!(order2_asymptotic(0, 0.7), 0.0);
    assert_eq!(order2_asymptotic(1, 0.7), 0.0);
    let target = 3.0 / 32.0;
    let mut prev = f64::INFINITY;
    for p in [0.9, 0.95, 0.99] {
        let (d, _) = order2_reference(2.0, p).unwrap();
        let gap = (d / (n_of(p) * n_of(p)) - target).abs();
        assert!(gap < prev);
        prev = gap;
    }
    assert!(prev < 0.02);
}

#[test]
fn melonic_trend_towards_three_over_thirty_two() {
    let c = sobolev_coefficient(2, 2.0, 0.99, Scope::Melonic, None).unwrap();
    assert!((c.value / n_of(0.99).powi(2) - 3.0 / 32.0).abs() < 0.02);
}

#[test]
fn odd_orders_vanish() {
    for n in [1, 3, 5] {
        let c = sobolev_coefficient(n, 2.0, 0.5, Scope::Full, None).unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.graphs, 0);
    }
    assert!(matches!(melonic_series_eval(2.0, 0.5, 0.1, 3), Err(Error::OddOrder(3))));
}

#[test]
fn full_scope_guard() {
    if FULL_ORDER_GUARD < 4 {
        assert!(matches!(sobolev_coefficient(4, 2.0, 0.5, Scope::Full, None), Err(Error::Guard { .. })));
    }
    assert!(sobolev_coefficient(2, 2.0, 1.0, Scope::Full, None).is_err());
    assert!(sobolev_coefficient(2, -1.0, 0.5, Scope::Full, None).is_err());
}

#[test]
fn order_four_melonic_conserved_norms() {
    for g in [0.0, 1.0] {
        let c = sobolev_coefficient(4, g, 0.5, Scope::Melonic, None).unwrap();
        assert!(c.value.abs() < 1e-9, "g={g}: {}", c.value);
    }
}

#[test]
fn series_at_time_zero() {
    for p in [0.3, 0.9] {
        let s = melonic_series_eval(0.0, p, 0.0, 2).unwrap();
        assert!((s.value - 1.0).abs() < 1e-14);
        let s = melonic_series_eval(2.0, p, 0.0, 2).unwrap();
        let want = polylog(2.0, p).unwrap() / n_of(p);
        assert!((s.value - want).abs() < 1e-12 * want);
        assert_eq!(s.remainder, 0.0);
    }
}

#[test]
fn melonic_series_grows_for_gamma_two() {
    let s = melonic_series_eval(2.0, 0.9, 1e-3, 4).unwrap();
    assert!(s.certified && s.remainder.is_finite());
    assert!(s.coefficients[1] > 0.0);
    let at = |t: f64| s.coefficients.iter().enumerate().map(|(k, c)| c * t.powi(2 * k as i32)).sum::<f64>();
    assert!((at(1e-3) - s.value).abs() < 1e-12 * s.value);
    let vals: Vec<f64> = (0..=10).map(|i| at(1e-4 * i as f64)).collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
}

#[test]
fn melonic_series_constant_for_gamma_one() {
    let a = melonic_series_eval(1.0, 0.6, 0.0, 4).unwrap().value;
    for t in [1e-4, 5e-4] {
        let b = melonic_series_eval(1.0, 0.6, t, 4).unwrap().value;
        assert!((a - b).abs() < 1e-12 * a, "{a} {b}");
    }
}

#[test]
fn uncertified_outside_the_disk() {
    let s = melonic_series_eval(2.0, 0.5, 1.0, 2).unwrap();
    assert!(!s.certified);
    assert!(s.remainder.is_infinite());
    assert!(s.radius > 0.0 && s.radius < 1.0);
}

#[test]
fn scope_parsing() {
    assert_eq!("full".parse::<Scope>().unwrap(), Scope::Full);
    assert_eq!("melonic".parse::<Scope>().unwrap(), Scope::Melonic);
    assert!(matches!("all".parse::<Scope>(), Err(Error::Parse(_))));
}

#[test]
fn default_truncation() {
    for p in [0.3, 0.9, 0.99] {
        for g in [0.0, 2.0, 3.0] {
            let r = default_r_max(p, g);
            let term = |r: usize| (r as f64).powf(g) * p.powf(r as f64 / 2.0);
            assert!(term(r) < 1e-12 * (1.0 - p));
            assert!(term(r - 1) >= 1e-12 * (1.0 - p));
        }
    }
}
