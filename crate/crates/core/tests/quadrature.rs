use std::f64::consts::PI;

use hslab_core::profile::RadialProfile;
use hslab_core::quadrature::{
    build_log_grid, gradient_p_integral, translated_hardy_integral, weighted_power_integral,
    GridSpec,
};
use hslab_core::testgen::TestProfileGenerator;
use proptest::prelude::*;

/// `int_{R^3} e^{-m r} |x|^{-a} dx`.
fn exp_moment(m: f64, a: f64) -> f64 {
    4.0 * PI * statrs::function::gamma::gamma(3.0 - a) / m.powf(3.0 - a)
}

#[test]
fn refinement_is_second_order_or_better() {
    let u = |r: f64| (-r).exp();
    let errors = |m: usize| {
        let g = build_log_grid(1e-6, 1e3, m, 3).unwrap();
        let v = RadialProfile::from_fn(&g, u);
        [
            (weighted_power_integral(&g, &v, 2.5, 1.5).unwrap() - exp_moment(2.5, 1.5)).abs()
                / exp_moment(2.5, 1.5),
            (gradient_p_integral(&g, &v, 2.5).unwrap() - exp_moment(2.5, 0.0)).abs()
                / exp_moment(2.5, 0.0),
        ]
    };
    let (coarse, fine) = (errors(256), errors(512));
    for (c, f) in coarse.iter().zip(&fine) {
        assert!(*f <= 1e-13 || c / f >= 4.0, "{c:e} -> {f:e}");
    }
}

#[test]
fn translated_matches_far_field_and_origin() {
    let g = GridSpec::default_for(3).build().unwrap();
    let u = RadialProfile::from_fn(&g, |r| (-r).exp());
    let at_zero = translated_hardy_integral(&g, &u, 0.0, 2.0).unwrap();
    let radial = weighted_power_integral(&g, &u, 2.0, 2.0).unwrap();
    assert!((at_zero - radial).abs() <= 1e-8 * radial);
    // |x + alpha e1|^{-2} ~ alpha^{-2} (1 + O(r^2/alpha^2)) on the bulk of u
    let alpha = 1e3;
    let far = translated_hardy_integral(&g, &u, alpha, 2.0).unwrap();
    let expect = exp_moment(2.0, 0.0) / (alpha * alpha);
    assert!((far - expect).abs() <= 1e-4 * expect, "{far} vs {expect}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn non_negative_integrands_integrate_non_negative(seed in any::<u64>(), m in 1.0..6.0f64, a in 0.0..2.9f64, p in 1.1..2.9f64) {
        let g = build_log_grid(1e-4, 1e3, 256, 3).unwrap();
        let mut gen = TestProfileGenerator::new(seed);
        let u = gen.bump_with_dip(&g);
        prop_assert!(weighted_power_integral(&g, &u, m, a).unwrap() >= 0.0);
        prop_assert!(gradient_p_integral(&g, &u, p).unwrap() >= 0.0);
        prop_assert!(translated_hardy_integral(&g, &u, gen.uniform(0.0, 10.0), p).unwrap() >= 0.0);
    }
}
