use coreset_kit::ellipsoid::{
    l2_spanning_set, linf_embedding_subset, mvee_coreset, mvee_method, spanning_budget, spanning_coefficients,
    CoordinateAscent,
};
use coreset_kit::instances::{hard_instance, HardKind};
use coreset_kit::matrix::lp_norm;
use coreset_kit::{DenseMatrix, SeededRng};
use proptest::prelude::*;

#[test]
fn cross_polytope_keeps_every_axis() {
    // ±e_i: the MVEE is the unit ball and needs every axis
    let d = 4;
    let mut rows = Vec::new();
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut r = vec![0.0; d];
            r[i] = s;
            rows.push(r);
        }
    }
    let a = DenseMatrix::from_rows(&rows).unwrap();
    let ss = l2_spanning_set(&a, 0.1, &mut SeededRng::new(1)).unwrap();
    let axes: std::collections::BTreeSet<usize> = ss.support.iter().map(|&i| i / 2).collect();
    assert_eq!(axes.len(), d);
    assert!(ss.max_coef() <= 1.0 + 1e-9);
}

#[test]
fn lower_bound_instance_needs_sqrt_d_without_the_extra_row() {
    let d = 6;
    let h = hard_instance(HardKind::SpanningLb { d }, &mut SeededRng::new(0)).unwrap();
    // the identity block alone expresses the all-ones row with norm √d
    let coef = spanning_coefficients(&h.a, &(0..d).collect::<Vec<_>>());
    assert!((coef[d] - (d as f64).sqrt()).abs() < 1e-9);
    let ss = l2_spanning_set(&h.a, 0.25, &mut SeededRng::new(0)).unwrap();
    assert!(ss.support.contains(&d));
    assert!(ss.max_coef() <= 1.25);
}

#[test]
fn registry_names_resolve() {
    for name in ["coordinate_ascent", "leverage_sampled"] {
        assert_eq!(mvee_method(name).unwrap().name(), name);
    }
    assert!(mvee_method("khachiyan-typo").is_err());
}

#[test]
fn budget_formula() {
    assert_eq!(spanning_budget(2), 16.0);
    assert_eq!(spanning_budget(4), 32.0);
    let b16 = spanning_budget(16);
    assert!((b16 - 8.0 * 16.0 * 2.0).abs() < 1e-12);
}

fn matrix(n: usize, d: usize, seed: u64) -> DenseMatrix {
    let mut rng = SeededRng::new(seed);
    DenseMatrix::from_fn(n, d, |_, _| rng.normal() / (rng.uniform() + 0.1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificates_hold(n in 10usize..120, d in 1usize..6, seed in any::<u64>()) {
        prop_assume!(n >= d);
        let a = matrix(n, d, seed);
        let ec = mvee_coreset(&a, 0.25, &CoordinateAscent::default(), &mut SeededRng::new(seed)).unwrap();
        prop_assert!(ec.max_witness() <= 1.25 + 1e-6);
        let total: f64 = ec.weights.iter().sum();
        prop_assert!((total - d as f64).abs() <= ec.mass_tol + 1e-9);
        let coef = spanning_coefficients(&a, &ec.support);
        prop_assert!(coef.iter().all(|c| *c <= 1.25));
        prop_assert!(ec.support.len() as f64 <= spanning_budget(d));
        // support rows express themselves
        for &i in &ec.support {
            prop_assert!(coef[i] <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn linf_sandwich(n in 10usize..80, d in 1usize..5, seed in any::<u64>()) {
        prop_assume!(n >= d);
        let a = matrix(n, d, seed);
        let mut rng = SeededRng::new(seed ^ 1);
        let (ss, kappa) = linf_embedding_subset(&a, 0.25, &CoordinateAscent::default(), &mut rng).unwrap();
        let sub = a.select_rows(&ss.support);
        for _ in 0..200 {
            let x: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let full = lp_norm(&a.matvec(&x), f64::INFINITY);
            let part = lp_norm(&sub.matvec(&x), f64::INFINITY);
            prop_assert!(part <= full * (1.0 + 1e-12));
            prop_assert!(full <= kappa * part * (1.0 + 1e-9));
        }
    }
}
