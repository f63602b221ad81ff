use approx::assert_relative_eq;
use corrlab_core::ensemble::{derive_seed, kahan_sum, sample_stats, Ensemble};
use corrlab_core::linalg::solve_spd_tridiagonal;
use corrlab_core::{GreenKernel1D, MaProcessSpec, Mesh1D};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn green_kernel_symmetric_and_positive(a in 0.2f64..5.0, q0 in 0.0f64..20.0, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let g = GreenKernel1D::unit(a, q0).unwrap();
        let (gxy, gyx) = (g.eval(x, y).unwrap(), g.eval(y, x).unwrap());
        prop_assert!((gxy - gyx).abs() <= 1e-14 * gxy.abs().max(1e-300));
        prop_assert!(gxy >= 0.0);
        prop_assert_eq!(g.eval(0.0, y).unwrap(), 0.0);
    }

    #[test]
    fn field_is_bounded_and_integral_additive(seed in any::<u64>(), inv_eps in 10usize..200, a in 0.0f64..0.4, b in 0.4f64..0.7) {
        let eps = 1.0 / inv_eps as f64;
        let spec = MaProcessSpec::rademacher(&[0.6, 0.3, 0.1]);
        let mesh = Mesh1D::uniform(1.0, 65).unwrap();
        let q = spec.sample(eps, &mesh, seed).unwrap();
        let bound = spec.bound();
        prop_assert!(q.values.iter().all(|v| v.abs() <= bound + 1e-12));
        let whole = q.integral(a, 1.0);
        let split = q.integral(a, b) + q.integral(b, 1.0);
        prop_assert!((whole - split).abs() < 1e-12);
    }

    #[test]
    fn interpolation_reproduces_nodes(n in 3usize..200, k in 0usize..1000) {
        let mesh = Mesh1D::uniform(1.0, n).unwrap();
        let u = mesh.map(|x| (7.0 * x).sin());
        let i = k % n;
        prop_assert!((mesh.interpolate(&u, mesh.nodes()[i]) - u[i]).abs() < 1e-14);
        prop_assert_eq!(mesh.nearest(mesh.nodes()[i]), i);
    }

    #[test]
    fn tridiagonal_solve_has_small_residual(
        diag in prop::collection::vec(2.5f64..10.0, 2..60),
        seed in any::<u64>(),
    ) {
        let n = diag.len();
        let off: Vec<f64> = (0..n - 1).map(|i| -1.0 - 0.1 * ((seed >> (i % 60)) & 1) as f64).collect();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let x = solve_spd_tridiagonal(&diag, &off, &rhs).unwrap();
        for i in 0..n {
            let mut r = diag[i] * x[i] - rhs[i];
            if i > 0 { r += off[i - 1] * x[i - 1]; }
            if i + 1 < n { r += off[i] * x[i + 1]; }
            prop_assert!(r.abs() < 1e-12, "row {i}: {r}");
        }
    }

    #[test]
    fn variance_is_shift_invariant(xs in prop::collection::vec(-10.0f64..10.0, 2..100), shift in -1e3f64..1e3) {
        let a = sample_stats(&xs).unwrap();
        let shifted: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        let b = sample_stats(&shifted).unwrap();
        prop_assert!((a.variance - b.variance).abs() <= 1e-8 * (1.0 + a.variance));
        prop_assert!((b.mean - a.mean - shift).abs() <= 1e-9 * (1.0 + shift.abs()));
    }

    #[test]
    fn kahan_sum_is_order_insensitive(xs in prop::collection::vec(-1e6f64..1e6, 1..200)) {
        let forward = kahan_sum(xs.iter().copied());
        let backward = kahan_sum(xs.iter().rev().copied());
        prop_assert!((forward - backward).abs() <= 1e-9 * (1.0 + forward.abs()));
    }

    #[test]
    fn ensemble_results_ignore_worker_count(seed in any::<u64>(), n in 1usize..40, workers in 2usize..6) {
        let task = |s: u64| Ok((s % 1000) as f64 * 0.5);
        let one = Ensemble::new(seed, 1).unwrap().run(3, n, task).unwrap();
        let many = Ensemble::new(seed, workers).unwrap().run(3, n, task).unwrap();
        prop_assert_eq!(&one.values, &many.values);
        prop_assert_eq!(&one.seeds, &many.seeds);
        prop_assert_eq!(one.seeds[0], derive_seed(seed, 3, 0));
    }
}

#[test]
fn seeds_differ_across_indices() {
    let mut seen = std::collections::HashSet::new();
    for e in 0..8 {
        for i in 0..500 {
            assert!(seen.insert(derive_seed(42, e, i)));
        }
    }
}

#[test]
fn kahan_keeps_small_increments() {
    let xs = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 1000));
    assert_relative_eq!(kahan_sum(xs), 1.0 + 1e-13, max_relative = 1e-15);
}
