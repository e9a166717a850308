use coreset_kit::instances::gaussian;
use coreset_kit::loss::LossRegistry;
use coreset_kit::matrix::lp_norm;
use coreset_kit::oracles::exact_lp_regression;
use coreset_kit::regression::{chebyshev, g_regression, lp_regression, IrlsOptions};
use coreset_kit::sketch::{build_sketch, fwht, pstable_sample, Sketch, SrhtSketch};
use coreset_kit::{DenseMatrix, SeededRng};
use proptest::prelude::*;

fn hadamard(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 }).collect()).collect()
}

#[test]
fn cauchy_median_is_one() {
    let mut rng = SeededRng::new(9);
    let mut xs: Vec<f64> = (0..20001).map(|_| pstable_sample(1.0, &mut rng).abs()).collect();
    xs.sort_by(f64::total_cmp);
    assert!((xs[10000] - 1.0).abs() < 0.05, "median {}", xs[10000]);
}

#[test]
fn full_srht_is_an_isometry() {
    let n = 16;
    let mut rng = SeededRng::new(4);
    let s = SrhtSketch::new(n, n, &mut rng).unwrap();
    let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let y = s.apply_vec(&x);
    assert!((lp_norm(&y, 2.0) - lp_norm(&x, 2.0)).abs() < 1e-10);
}

#[test]
fn sketch_registry() {
    let mut rng = SeededRng::new(0);
    assert_eq!(build_sketch("pstable", 10, 4, 1.0, &mut rng).unwrap().rows(), 4);
    assert_eq!(build_sketch("srht", 10, 4, 2.0, &mut rng).unwrap().input_dim(), 10);
    assert!(build_sketch("countsketch", 10, 4, 2.0, &mut rng).is_err());
    let s = build_sketch("srht", 10, 4, 2.0, &mut rng).unwrap();
    assert!(s.apply(&gaussian(9, 2, &mut rng)).is_err());
}

#[test]
fn irls_matches_lp_solver() {
    for seed in 0..5 {
        let mut rng = SeededRng::new(seed);
        let a = gaussian(25, 2, &mut rng);
        let b: Vec<f64> = (0..25).map(|_| rng.normal() * 3.0).collect();
        let exact = exact_lp_regression(&a, &b, 1.0).unwrap();
        let irls = lp_regression(&a, &b, 1.0, IrlsOptions { max_iters: 500, tol: 1e-12 }).unwrap();
        assert!(irls.cost <= exact.opt * (1.0 + 1e-6), "{} vs {}", irls.cost, exact.opt);
        let exact_inf = exact_lp_regression(&a, &b, f64::INFINITY).unwrap();
        let (cheb, _) = chebyshev(&a, &b, 1.01, IrlsOptions::default()).unwrap();
        assert!(cheb.cost <= 1.01 * exact_inf.opt + 1e-9);
        assert!(cheb.cost >= exact_inf.opt - 1e-9);
    }
}

#[test]
fn huber_regression_ignores_one_outlier() {
    let a = DenseMatrix::from_fn(30, 1, |i, _| 1.0 + i as f64 / 10.0);
    let mut b: Vec<f64> = a.col(0).iter().map(|v| 2.0 * v).collect();
    b[5] += 1e4;
    let huber = LossRegistry::default().parse("huber").unwrap();
    let f = g_regression(&a, &b, huber.as_ref(), IrlsOptions::default()).unwrap();
    assert!((f.x[0] - 2.0).abs() < 0.1, "{:?}", f.x);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fwht_matches_dense_hadamard(log_n in 0u32..6, seed in any::<u64>()) {
        let n = 1usize << log_n;
        let mut rng = SeededRng::new(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mut y = x.clone();
        fwht(&mut y);
        for (i, row) in hadamard(n).iter().enumerate() {
            let want: f64 = row.iter().zip(&x).map(|(h, v)| h * v).sum();
            prop_assert!((y[i] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn lp_fit_is_no_worse_than_least_squares(n in 5usize..40, d in 1usize..4, p in 1.0f64..6.0, seed in any::<u64>()) {
        prop_assume!(n > d);
        let mut rng = SeededRng::new(seed);
        let a = gaussian(n, d, &mut rng);
        let b: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let ls = lp_regression(&a, &b, 2.0, IrlsOptions::default()).unwrap();
        let fit = lp_regression(&a, &b, p, IrlsOptions::default()).unwrap();
        let ls_cost = lp_norm(&a.matvec(&ls.x).iter().zip(&b).map(|(u, v)| u - v).collect::<Vec<_>>(), p);
        prop_assert!(fit.cost <= ls_cost * (1.0 + 1e-8));
    }
}
