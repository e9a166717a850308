use coreset_kit::instances::gaussian;
use coreset_kit::online_subspace::{
    integer_round, online_subspace_coreset, sensitivity_budget, subspace_cost, OnlineSensitivity, OnlineSubspaceConfig,
};
use coreset_kit::oracles::strong_coreset_check;
use coreset_kit::{DenseMatrix, SeededRng};
use proptest::prelude::*;

fn reduced() -> OnlineSubspaceConfig {
    OnlineSubspaceConfig { c_beta: 1e-3, copies: Some(2), ..OnlineSubspaceConfig::default() }
}

#[test]
fn first_row_has_full_sensitivity() {
    // the span is empty before the first row, so its sensitivity is 1
    let a = gaussian(30, 3, &mut SeededRng::new(1));
    let cs = online_subspace_coreset(&a, 1, 2.0, 0.5, 0.1, &mut SeededRng::new(2), reduced()).unwrap();
    assert_eq!(cs.sigma[0], 1.0);
    assert!(cs.sigma.iter().all(|s| (0.0..=1.0).contains(s)));
}

#[test]
fn sketched_regime_is_reached_on_wide_rows() {
    let a = gaussian(120, 64, &mut SeededRng::new(3));
    let cfg = OnlineSubspaceConfig { c_t: 0.5, ..OnlineSubspaceConfig::default() };
    let mut est = OnlineSensitivity::new(64, 1, 2.0, 120, &cfg, SeededRng::new(4)).unwrap();
    for r in a.row_iter() {
        est.push(r).unwrap();
    }
    assert!(2 * est.sketch_dim() <= 64);
    assert!(est.segments() >= 1);
    assert_eq!(est.basis().rows(), 64);
    assert!(est.lewis_keeps() > 0);
}

#[test]
fn reduced_constants_subsample_and_preserve_cost() {
    let mut ok = 0;
    let mut kept = 0;
    for s in 0..10 {
        // a dominant direction plus small noise: later rows have low sensitivity
        let mut rng = SeededRng::new(50 + s);
        let a = DenseMatrix::from_fn(150, 3, |_, j| if j == 0 { 5.0 * rng.normal() } else { 0.5 * rng.normal() });
        let cs = online_subspace_coreset(&a, 1, 2.0, 0.5, 0.1, &mut SeededRng::new(500 + s), reduced()).unwrap();
        kept += cs.len();
        let dev = strong_coreset_check(&a, &cs.indices, &cs.weights, 1, 2.0, 3.0).unwrap();
        ok += (dev <= 0.5) as usize;
    }
    assert!(kept < 10 * 120, "kept {kept} of 1500");
    assert!(ok >= 9, "{ok}/10");
}

#[test]
fn rounding_is_on_the_grid() {
    let a = gaussian(20, 2, &mut SeededRng::new(0));
    let r = integer_round(&a, 0.1, 1e-3, 2.0).unwrap();
    for (x, y) in a.data().iter().zip(r.a.data()) {
        let q = y / r.granularity;
        assert!((q - q.round()).abs() < 1e-6);
        assert!((x - y).abs() <= r.granularity);
    }
}

#[test]
fn subspace_cost_of_contained_rows_is_zero() {
    let basis = DenseMatrix::from_rows(&[vec![1.0], vec![0.0], vec![0.0]]).unwrap();
    let a = DenseMatrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 4.0, 0.0]]).unwrap();
    assert_eq!(subspace_cost(&a, Some((&[0], &[2.0])), &basis, 1.0), 0.0);
    assert!((subspace_cost(&a, None, &basis, 3.0) - 64.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decisions_are_irrevocable(seed in any::<u64>(), cut in 5usize..35, p in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let a = gaussian(40, 3, &mut SeededRng::new(seed));
        let mut b = a.clone();
        for i in cut..40 {
            for j in 0..3 {
                b.set(i, j, 7.0 * a.get(i, j) - 1.0);
            }
        }
        let x = online_subspace_coreset(&a, 1, p, 0.5, 0.1, &mut SeededRng::new(seed ^ 9), reduced()).unwrap();
        let y = online_subspace_coreset(&b, 1, p, 0.5, 0.1, &mut SeededRng::new(seed ^ 9), reduced()).unwrap();
        let head = |v: &[usize]| v.iter().copied().filter(|&i| i < cut).collect::<Vec<_>>();
        prop_assert_eq!(head(&x.indices), head(&y.indices));
        prop_assert_eq!(&x.sigma[..cut], &y.sigma[..cut]);
    }

    #[test]
    fn sigma_total_within_budget(seed in any::<u64>(), n in 10usize..80) {
        let a = gaussian(n, 3, &mut SeededRng::new(seed));
        let cfg = OnlineSubspaceConfig::default();
        let cs = online_subspace_coreset(&a, 1, 1.0, 0.5, 0.1, &mut SeededRng::new(seed), cfg).unwrap();
        let t = cfg.sketch_dim(1, n);
        prop_assert!(cs.sigma_total() <= sensitivity_budget(t, n, 1.0, &cfg, cs.copies));
        prop_assert!(cs.weights.iter().zip(&cs.probs).all(|(w, p)| (w * p - 1.0).abs() < 1e-12));
    }
}
