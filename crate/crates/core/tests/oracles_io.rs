use std::cell::Cell;

use coreset_kit::instances::gaussian;
use coreset_kit::io::{format_matrix, parse_matrix, parse_stream, read_matrix, write_matrix};
use coreset_kit::loss::LossRegistry;
use coreset_kit::matrix::lp_norm;
use coreset_kit::norm::{norm, NormMode};
use coreset_kit::oracles::{
    exact_lp_regression, hemisphere_grid, instance_hash, linf_vertex_enumeration, subspace_net, OracleCache,
};
use coreset_kit::{DenseMatrix, Error, SeededRng};
use proptest::prelude::*;

fn residual(a: &DenseMatrix, x: &[f64], b: &[f64], p: f64) -> f64 {
    let r: Vec<f64> = a.matvec(x).iter().zip(b).map(|(u, v)| u - v).collect();
    lp_norm(&r, p)
}

#[test]
fn exact_fits_report_their_residual() {
    let mut rng = SeededRng::new(11);
    let a = gaussian(20, 3, &mut rng);
    let b: Vec<f64> = (0..20).map(|_| rng.normal()).collect();
    for p in [1.0, 2.0, 3.0, f64::INFINITY] {
        let f = exact_lp_regression(&a, &b, p).unwrap();
        assert!((residual(&a, &f.x, &b, p) - f.opt).abs() < 1e-6 * f.opt.max(1.0), "p={p}");
        // no coordinate step improves on it
        for j in 0..3 {
            for h in [1e-3, -1e-3] {
                let mut y = f.x.clone();
                y[j] += h;
                assert!(residual(&a, &y, &b, p) >= f.opt - 1e-9, "p={p}");
            }
        }
    }
}

#[test]
fn vertex_enumeration_agrees_with_lp() {
    for seed in 0..5 {
        let mut rng = SeededRng::new(seed);
        let a = gaussian(12, 2, &mut rng);
        let b: Vec<f64> = (0..12).map(|_| rng.normal()).collect();
        let (_, t) = linf_vertex_enumeration(&a, &b).unwrap();
        let lp = exact_lp_regression(&a, &b, f64::INFINITY).unwrap();
        assert!((t - lp.opt).abs() < 1e-7, "{t} vs {}", lp.opt);
    }
    assert!(linf_vertex_enumeration(&gaussian(10, 4, &mut SeededRng::new(0)), &[0.0; 10]).is_err());
}

#[test]
fn grids_have_expected_sizes() {
    // a half circle at 30 degrees has 6 lines
    assert_eq!(hemisphere_grid(2, 30f64.to_radians()).len(), 6);
    assert_eq!(hemisphere_grid(1, 0.1), vec![vec![1.0]]);
    for v in hemisphere_grid(3, 20f64.to_radians()) {
        assert!((lp_norm(&v, 2.0) - 1.0).abs() < 1e-12);
    }
    let net = subspace_net(3, 2, 30.0).unwrap();
    assert!(!net.is_empty());
    for f in &net {
        let g = f.transpose().matmul(f).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(i, j) - want).abs() < 1e-9);
            }
        }
    }
    assert!(subspace_net(5, 1, 30.0).is_err());
    assert!(subspace_net(3, 3, 30.0).is_err());
}

#[test]
fn cache_returns_stored_report() {
    let dir = tempfile::tempdir().unwrap();
    let cache = OracleCache::new(dir.path().join("cache")).unwrap();
    let calls = Cell::new(0);
    let first = cache
        .get_or_compute("abc", "brute", || {
            calls.set(calls.get() + 1);
            Ok(4.5)
        })
        .unwrap();
    let second = cache
        .get_or_compute("abc", "brute", || {
            calls.set(calls.get() + 1);
            Ok(-1.0)
        })
        .unwrap();
    assert_eq!(calls.get(), 1);
    assert_eq!(first, second);
    assert_eq!(second.value, 4.5);
    assert!(cache.get("abc", "exact").unwrap().is_none());
    // a fresh handle on the same directory sees it too
    let again = OracleCache::new(dir.path().join("cache")).unwrap();
    assert_eq!(again.get("abc", "brute").unwrap(), Some(first));
}

#[test]
fn instance_hash_is_stable_and_sensitive() {
    let a = gaussian(5, 2, &mut SeededRng::new(1));
    let h = instance_hash(&a, None, "p=1");
    assert_eq!(h.len(), 64);
    assert_eq!(h, instance_hash(&a.clone(), None, "p=1"));
    assert_ne!(h, instance_hash(&a, None, "p=2"));
    assert_ne!(h, instance_hash(&a, Some(&[0.0; 5]), "p=1"));
    let mut b = a.clone();
    b.set(4, 1, a.get(4, 1) + 1e-12);
    assert_ne!(h, instance_hash(&b, None, "p=1"));
}

#[test]
fn matrix_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let m = gaussian(7, 3, &mut SeededRng::new(2));
    write_matrix(&path, &m).unwrap();
    assert_eq!(read_matrix(&path).unwrap(), m);
    assert!(read_matrix(&dir.path().join("missing.csv")).is_err());
}

#[test]
fn parse_errors_carry_line_numbers() {
    match parse_matrix("# rows=2 cols=2\n1,2\n3,oops\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    assert!(parse_matrix("# rows=3 cols=2\n1,2\n3,4\n").is_err());
    assert!(parse_stream("").is_err());
    assert!(parse_stream("1,2\n3\n").is_err());
    let s = parse_stream("# comment\n1, 2\n\n 3,4\n").unwrap();
    assert_eq!(s.row(1), &[3.0, 4.0]);
}

#[test]
fn norm_modes() {
    let m = DenseMatrix::from_rows(&[vec![1.0, -2.0], vec![0.0, 2.0]]).unwrap();
    assert_eq!(norm(&m, &NormMode::EntrywiseInf).unwrap(), 2.0);
    assert_eq!(norm(&m, &NormMode::EntrywiseP(1.0)).unwrap(), 5.0);
    assert!((norm(&m, &NormMode::Inf2).unwrap() - 5f64.sqrt()).abs() < 1e-15);
    assert!((norm(&m, &NormMode::P2(2.0)).unwrap() - 3.0).abs() < 1e-15);
    let g = LossRegistry::default().parse("abs_p:1").unwrap();
    assert_eq!(norm(&m, &NormMode::G(g)).unwrap(), 5.0);
    assert!(norm(&m, &NormMode::P2(0.9)).is_err());
}

#[test]
fn loss_registry_parses_parameters() {
    let r = LossRegistry::default();
    assert!(r.names().contains(&"huber"));
    assert!(r.parse("fair: 1.5").is_ok());
    assert!(r.parse("abs_p:x").is_err());
    assert!(matches!(r.parse("tukey"), Err(Error::UnknownName(_))));
}

#[test]
fn rng_children_are_independent_and_reproducible() {
    let root = SeededRng::new(42);
    let a: Vec<f64> = {
        let mut c = root.child(1);
        (0..5).map(|_| c.uniform()).collect()
    };
    let b: Vec<f64> = {
        let mut c = root.child(1);
        (0..5).map(|_| c.uniform()).collect()
    };
    let c: Vec<f64> = {
        let mut c = root.child(2);
        (0..5).map(|_| c.uniform()).collect()
    };
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(root.named("x").uniform(), root.named("x").uniform());
    assert_ne!(root.named("x").uniform(), root.named("y").uniform());
    assert_eq!(root.child(3).path(), &[3]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn format_then_parse_is_identity(n in 1usize..8, d in 1usize..5, seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let m = DenseMatrix::from_fn(n, d, |_, _| rng.normal() * 1e3);
        prop_assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn subset_is_distinct_and_in_range(n in 1usize..50, seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let k = rng.below(n + 1);
        let mut s = rng.subset(n, k);
        prop_assert_eq!(s.len(), k);
        prop_assert!(s.iter().all(|&i| i < n));
        s.sort_unstable();
        s.dedup();
        prop_assert_eq!(s.len(), k);
    }
}
