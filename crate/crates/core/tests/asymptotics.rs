use corrlab_core::asymptotics::{
    fourier_variance, radial_transform, scaling_study, sphere_area, CorrelationModel, RadialSetup,
};
use gauss_quad::legendre::GaussLegendre;
use std::f64::consts::PI;

const EPS_LIST: [f64; 7] = [0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001];

fn composite(a: f64, b: f64, panels: usize, rule: &GaussLegendre, mut f: impl FnMut(f64) -> f64) -> f64 {
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|i| rule.integrate(a + i as f64 * w, a + (i + 1) as f64 * w, &mut f))
        .sum()
}

/// `∫∫ h(y) h(z) R((y − z)/ε) dy dz` over `[−s, s]²` with breaks at 0.
fn double_integral_1d(h: impl Fn(f64) -> f64, s: f64, eps: f64) -> f64 {
    let rule = GaussLegendre::new(20.try_into().unwrap());
    let corr = CorrelationModel::default();
    let panels = (4.0 * s / eps).ceil() as usize;
    let inner = |y: f64| {
        let g = |z: f64| h(z) * corr.spatial(((y - z) / eps).abs(), 1);
        composite(-s, 0.0, panels, &rule, g) + composite(0.0, s, panels, &rule, g)
    };
    let outer = |y: f64| h(y) * inner(y);
    composite(-s, 0.0, panels, &rule, outer) + composite(0.0, s, panels, &rule, outer)
}

#[test]
fn one_dim_matches_direct_double_integral() {
    let setup = RadialSetup::new(1, 1.0).unwrap();
    for &eps in &[0.1, 0.05] {
        let direct = double_integral_1d(|y| y.abs(), 1.0, eps);
        let fourier = setup.variance_fourier(eps).unwrap();
        assert!((fourier / direct - 1.0).abs() < 1e-6, "eps {eps}: {fourier} vs {direct}");
    }
}

#[test]
fn parseval_compact_bump_1d() {
    let bump = |x: f64| if x.abs() < 1.0 { (1.0 - x * x).powi(2) } else { 0.0 };
    let eps = 0.2;
    let hat = |rho: f64| radial_transform(1, bump, 1.0, rho).unwrap();
    let fourier = fourier_variance(1, hat, 1.0, &CorrelationModel::default(), eps).unwrap();
    let direct = double_integral_1d(bump, 1.0, eps);
    assert!((fourier / direct - 1.0).abs() < 1e-8, "{fourier} vs {direct}");
}

#[test]
fn parseval_gaussian_profile_2d() {
    // h(x) = e^{−|x|²/2} is separable, so the 4-fold integral is a square
    let eps = 0.3;
    let one_dim = double_integral_1d(|y| (-0.5 * y * y).exp(), 10.0, eps);
    let fourier = fourier_variance(2, |r| 2.0 * PI * (-0.5 * r * r).exp(), 1.0, &CorrelationModel::default(), eps).unwrap();
    assert!((fourier / (one_dim * one_dim) - 1.0).abs() < 1e-8);
}

#[test]
fn low_dimension_limit_constant() {
    for d in 1..=3 {
        let setup = RadialSetup::new(d, 1.0).unwrap();
        let l2 = setup.kernel_l2_squared().unwrap();
        assert!((l2 - sphere_area(d) / (4 - d) as f64).abs() < 1e-12);
        let eps = 1e-3;
        let ratio = setup.variance_fourier(eps).unwrap() / (eps.powi(d as i32) * l2);
        assert!((ratio - 1.0).abs() < 0.01, "d = {d}: ratio {ratio}");
    }
}

#[test]
fn five_dim_constant() {
    let setup = RadialSetup::new(5, 1.0).unwrap();
    let m = setup.inverse_quartic_moment().unwrap().unwrap();
    let closed = 8.0 * PI * PI / 3.0 * (PI / 2.0).sqrt();
    assert!((m - closed).abs() < 1e-9 * closed);
    assert!((m / 32.986 - 1.0).abs() < 0.01);
    let (p, c) = setup.leading_order().unwrap().unwrap();
    assert_eq!(p, 4.0);
    let ratio = setup.variance_fourier(1e-3).unwrap() / (c * 1e-12);
    assert!((ratio - 1.0).abs() < 0.02, "ratio {ratio}");
}

#[test]
fn exponents_by_dimension() {
    for (d, target) in [(1, 1.0), (2, 2.0), (3, 3.0), (5, 4.0)] {
        let setup = RadialSetup::new(d, 1.0).unwrap();
        let curve = scaling_study(&setup, &EPS_LIST).unwrap();
        eprintln!("d = {d}: slope {:.4}", curve.plain.slope);
        assert!((curve.plain.slope - target).abs() < 0.1, "d = {d}: {}", curve.plain.slope);
    }
}

#[test]
fn four_dim_logarithm() {
    let setup = RadialSetup::new(4, 1.0).unwrap();
    let curve = scaling_study(&setup, &EPS_LIST).unwrap();
    eprintln!(
        "d = 4: plain {:.4} (res {:.2e}), augmented {:.4} log {:.3} (res {:.2e})",
        curve.plain.slope,
        curve.plain.max_residual,
        curve.augmented.slope,
        curve.augmented.log_coefficient,
        curve.augmented.max_residual
    );
    assert!(curve.plain.slope > 3.7 && curve.plain.slope < 4.0);
    assert!(curve.augmented.log_coefficient > 0.0);
    assert!(curve.plain.max_residual >= 10.0 * curve.augmented.max_residual);
}

#[test]
fn monotone_in_epsilon() {
    for d in 1..=5 {
        let setup = RadialSetup::new(d, 1.0).unwrap();
        let v: Vec<f64> = EPS_LIST.iter().map(|&e| setup.variance_fourier(e).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]), "d = {d}");
    }
}

#[test]
fn scaling_study_preconditions() {
    let setup = RadialSetup::new(2, 1.0).unwrap();
    assert!(scaling_study(&setup, &[0.1, 0.05, 0.02]).is_err());
    assert!(scaling_study(&setup, &[0.1, 0.08, 0.06, 0.05]).is_err());
}
